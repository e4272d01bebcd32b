//! Numeric rank oracles, desk scale: exact matrix rank on the edge,
//! alternating-least-squares search for a decomposition of a given index
//! size (an upper-bound certificate when it succeeds, never a lower bound
//! when it fails), and a damped-Newton search for small covering-indicator
//! coefficient families.

use crate::construct::{indicator_residual, IndicatorCoefficients};
use crate::decomp::{
    assignment_index, build_locals_orbitwise, contract, table_len, Decomposition, Incidence,
};
use crate::group::Action;
use crate::tensor::{basis_expansion, idx_of, GlobalTensor};
use crate::{Error, Result, DEFAULT_BUDGET};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Knobs shared by the randomized searches.
#[derive(Debug, Clone, Copy)]
pub struct SearchOptions {
    pub restarts: usize,
    pub iters: usize,
    pub tol: f64,
    pub seed: u64,
    pub budget: u64,
}

impl Default for SearchOptions {
    fn default() -> SearchOptions {
        SearchOptions { restarts: 32, iters: 300, tol: 1e-8, seed: 0, budget: DEFAULT_BUDGET }
    }
}

fn restart_rng(seed: u64, restart: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Rank of a two-site tensor as a matrix: singular values above
/// tol·(largest singular value) count. The zero matrix has rank 0.
pub fn exact_edge_rank(v: &GlobalTensor, tol: f64) -> Result<usize> {
    if v.dims.len() != 2 {
        return Err(Error::DimMismatch(format!(
            "edge rank needs exactly two sites, got {}",
            v.dims.len()
        )));
    }
    let (rows, cols) = (v.dims[0], v.dims[1]);
    let m = DMatrix::from_fn(rows, cols, |i, j| v.entries[i * cols + j]);
    let sv = m.svd(false, false).singular_values;
    let top = sv.max();
    if top == 0.0 {
        return Ok(0);
    }
    Ok(sv.iter().filter(|s| **s > tol * top).count())
}

/// One alternating-least-squares sweep state for a fixed complex.
struct Als<'a> {
    a: &'a Action,
    inc: Incidence,
    r: usize,
    dims: Vec<usize>,
    v: &'a GlobalTensor,
    copy_count: usize,
}

impl<'a> Als<'a> {
    fn new(a: &'a Action, v: &'a GlobalTensor, r: usize) -> Als<'a> {
        let inc = Incidence::new(&a.complex);
        let copy_count = inc.copy_count;
        Als { a, inc, r, dims: v.dims.clone(), v, copy_count }
    }

    /// Number of global assignments r^m; small by construction of the
    /// search's admissible budget.
    fn assignment_count(&self) -> Result<usize> {
        table_len(self.r, self.copy_count)
    }

    /// Solves the least-squares update for one site's table, all other
    /// tables held fixed. The target tensor is linear in the site's table:
    /// grouping global assignments by their restriction to the site gives
    /// one design column per table entry.
    fn update_site(&self, locals: &mut [Vec<Vec<Complex64>>], site: usize) -> Result<()> {
        let nv = self.dims.len();
        let others: Vec<usize> = (0..nv).filter(|&k| k != site).collect();
        let other_dims: Vec<usize> = others.iter().map(|&k| self.dims[k]).collect();
        let n_rows: usize = other_dims.iter().product();
        let b_cols = locals[site].len();
        let mut design = DMatrix::<Complex64>::zeros(n_rows, b_cols);
        let total = self.assignment_count()?;
        let mut scratch = vec![ZERO; n_rows];
        for flat in 0..total {
            // Global assignment digits, big-endian over copy positions.
            let mut digits = vec![0usize; self.copy_count];
            let mut rest = flat;
            for p in (0..self.copy_count).rev() {
                digits[p] = rest % self.r;
                rest /= self.r;
            }
            let column = assignment_index(
                &self.inc.positions[site].iter().map(|&p| digits[p]).collect::<Vec<_>>(),
                self.r,
            );
            // Rank-one coefficient over the other sites.
            scratch.clear();
            scratch.push(Complex64::new(1.0, 0.0));
            for &k in &others {
                let idx = assignment_index(
                    &self.inc.positions[k].iter().map(|&p| digits[p]).collect::<Vec<_>>(),
                    self.r,
                );
                let w = &locals[k][idx];
                let mut next = Vec::with_capacity(scratch.len() * w.len());
                for &x in scratch.iter() {
                    for &y in w {
                        next.push(x * y);
                    }
                }
                scratch = next;
            }
            for (row, &x) in scratch.iter().enumerate() {
                design[(row, column)] += x;
            }
        }
        // Shared design for every coordinate of the site vectors: solve all
        // right-hand sides at once.
        let d_site = self.dims[site];
        let mut rhs = DMatrix::<Complex64>::zeros(n_rows, d_site);
        for (flat, &z) in self.v.entries.iter().enumerate() {
            let full = idx_of(flat, &self.dims);
            let mine = full[site];
            let other_idx: Vec<usize> = others.iter().map(|&k| full[k]).collect();
            rhs[(crate::tensor::flat_of(&other_idx, &other_dims), mine)] = z;
        }
        let svd = design.svd(true, true);
        let sol = svd
            .solve(&rhs, 1e-12)
            .map_err(|e| Error::Unsupported(format!("least-squares solve failed: {e}")))?;
        for beta in 0..b_cols {
            for x in 0..d_site {
                locals[site][beta][x] = sol[(beta, x)];
            }
        }
        Ok(())
    }

    fn residual(&self, locals: &[Vec<Vec<Complex64>>], budget: u64) -> Result<f64> {
        let d = Decomposition::new(
            self.a.clone(),
            self.r,
            self.dims.clone(),
            locals.to_vec(),
        )?;
        contract(&d, budget)?.max_diff(self.v)
    }
}

/// Searches for a decomposition of `v` with index-set size `r` over the
/// action's complex by alternating least squares, one restart per seed,
/// restarts in parallel with deterministic selection (best residual, then
/// lowest restart id). For a nontrivial group the tables are re-projected
/// onto the equivariant subspace after every sweep, which keeps the output
/// exactly equivariant but makes the search heuristic. Success returns a
/// decomposition whose contraction is within `tol` of `v` in max norm;
/// failure reports the best residual seen and is NOT a lower-bound
/// certificate.
pub fn numeric_rank_search(
    a: &Action,
    v: &GlobalTensor,
    r: usize,
    opts: &SearchOptions,
) -> Result<Decomposition> {
    if r == 0 {
        return Err(Error::InvalidDecomposition("index set must be nonempty".into()));
    }
    if v.dims.len() != a.complex.vertex_count() {
        return Err(Error::DimMismatch(format!(
            "tensor has {} sites, complex has {}",
            v.dims.len(),
            a.complex.vertex_count()
        )));
    }
    let als = Als::new(a, v, r);
    // Budget admissibility: the sweep enumerates all global assignments.
    let per_iter = als.assignment_count()? as u64;
    if per_iter.saturating_mul(opts.iters as u64) > opts.budget {
        return Err(Error::BudgetExceeded {
            needed: per_iter.saturating_mul(opts.iters as u64),
            budget: opts.budget,
        });
    }
    // When the index set is large enough to hold the entrywise expansion,
    // that expansion is already an exact answer.
    if a.group.order() == 1 && a.complex.is_connected() {
        let s = basis_expansion(v);
        if s.terms.len() <= r && !s.terms.is_empty() {
            let seed = crate::decomp::from_elementary(&a.complex, &s)?;
            let padded = pad_index_set(&seed, r)?;
            if als.residual(&padded.locals, opts.budget)? <= opts.tol {
                return Ok(padded);
            }
        }
    }
    let nv = v.dims.len();
    let equivariant = a.group.order() > 1;
    let run = |restart: usize| -> (f64, usize, Option<Decomposition>) {
        let mut rng = restart_rng(opts.seed, restart);
        let mut locals: Vec<Vec<Vec<Complex64>>> = (0..nv)
            .map(|i| {
                let t = table_len(r, als.inc.positions[i].len()).expect("admissible");
                (0..t)
                    .map(|_| {
                        (0..v.dims[i])
                            .map(|_| {
                                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        if equivariant {
            if let Ok(projected) = project_equivariant(a, r, &v.dims, &locals) {
                locals = projected;
            }
        }
        let mut best = f64::INFINITY;
        for _ in 0..opts.iters {
            for site in 0..nv {
                if als.update_site(&mut locals, site).is_err() {
                    return (best, restart, None);
                }
            }
            if equivariant {
                match project_equivariant(a, r, &v.dims, &locals) {
                    Ok(projected) => locals = projected,
                    Err(_) => return (best, restart, None),
                }
            }
            match als.residual(&locals, opts.budget) {
                Ok(res) => {
                    best = best.min(res);
                    if res <= opts.tol {
                        let d = Decomposition::new(a.clone(), r, v.dims.clone(), locals)
                            .expect("validated shapes");
                        return (res, restart, Some(d));
                    }
                }
                Err(_) => return (best, restart, None),
            }
        }
        let d = Decomposition::new(a.clone(), r, v.dims.clone(), locals).ok();
        (best, restart, d.filter(|_| best.is_finite()))
    };
    let results: Vec<(f64, usize, Option<Decomposition>)> =
        (0..opts.restarts.max(1)).into_par_iter().map(run).collect();
    let mut best_overall = f64::INFINITY;
    let mut winner: Option<Decomposition> = None;
    for (res, _, d) in results.iter() {
        if *res < best_overall {
            best_overall = *res;
            if *res <= opts.tol {
                winner = d.clone();
            }
        }
    }
    match winner {
        Some(d) => Ok(d),
        None => Err(Error::SearchFailed {
            best_residual: best_overall,
            restarts: opts.restarts.max(1),
        }),
    }
}

/// Pads a decomposition's index set from its own size up to `r`, filling
/// the new digits' table entries with zero vectors.
fn pad_index_set(d: &Decomposition, r: usize) -> Result<Decomposition> {
    if r < d.r {
        return Err(Error::InvalidDecomposition("cannot shrink the index set".into()));
    }
    if r == d.r {
        return Ok(d.clone());
    }
    let inc = Incidence::new(&d.action.complex);
    let locals = build_locals_orbitwise(&d.action, r, &d.dims, |i, digits| {
        if digits.iter().any(|&x| x >= d.r) {
            return vec![ZERO; d.dims[i]];
        }
        d.locals[i][assignment_index(digits, d.r)].clone()
    })?;
    let _ = inc;
    Decomposition::new(d.action.clone(), r, d.dims.clone(), locals)
}

/// Projects site tables onto the equivariant subspace by copying each
/// orbit representative's value to its whole orbit.
fn project_equivariant(
    a: &Action,
    r: usize,
    dims: &[usize],
    locals: &[Vec<Vec<Complex64>>],
) -> Result<Vec<Vec<Vec<Complex64>>>> {
    build_locals_orbitwise(a, r, dims, |i, digits| {
        locals[i][assignment_index(digits, r)].clone()
    })
}

/// Residual vector of a candidate coefficient family: one entry per tuple,
/// Σ_ℓ Π_k c[ℓ][t_k] minus the covering indicator.
fn indicator_residual_vector(c: &[Vec<Complex64>], nv: usize) -> DVector<Complex64> {
    let tuples = nv.pow(nv as u32);
    let mut out = DVector::zeros(tuples);
    for t in 0..tuples {
        let digits = tuple_digits(t, nv);
        let mut total = ZERO;
        for row in c {
            let mut p = Complex64::new(1.0, 0.0);
            for &i in &digits {
                p *= row[i];
            }
            total += p;
        }
        let mut seen = vec![false; nv];
        for &i in &digits {
            seen[i] = true;
        }
        let target = if seen.iter().all(|&s| s) { 1.0 } else { 0.0 };
        out[t] = total - Complex64::new(target, 0.0);
    }
    out
}

fn tuple_digits(mut t: usize, nv: usize) -> Vec<usize> {
    let mut digits = vec![0usize; nv];
    for p in (0..nv).rev() {
        digits[p] = t % nv;
        t /= nv;
    }
    digits
}

/// Jacobian of the residual vector in the coefficients: the residuals are
/// polynomials with no conjugations, so a complex derivative exists; the
/// entry for variable c[ℓ][i] at tuple t is Σ over slots holding value i of
/// the product over the remaining slots.
fn indicator_jacobian(c: &[Vec<Complex64>], nv: usize) -> DMatrix<Complex64> {
    let tuples = nv.pow(nv as u32);
    let vars = c.len() * nv;
    let mut j = DMatrix::zeros(tuples, vars);
    for t in 0..tuples {
        let digits = tuple_digits(t, nv);
        for (l, row) in c.iter().enumerate() {
            // prefix[k] = product of slots before k, suffix[k] = after.
            let k = digits.len();
            let mut prefix = vec![Complex64::new(1.0, 0.0); k + 1];
            for x in 0..k {
                prefix[x + 1] = prefix[x] * row[digits[x]];
            }
            let mut suffix = vec![Complex64::new(1.0, 0.0); k + 1];
            for x in (0..k).rev() {
                suffix[x] = suffix[x + 1] * row[digits[x]];
            }
            for (slot, &i) in digits.iter().enumerate() {
                j[(t, l * nv + i)] += prefix[slot] * suffix[slot + 1];
            }
        }
    }
    j
}

/// Searches for a covering-indicator coefficient family of a given size by
/// damped least-squares iteration (Levenberg–Marquardt on the holomorphic
/// residuals), with seeded random restarts. Success requires the worst
/// tuple deviation to come out at or below `opts.tol`; failure reports the
/// best residual seen and proves nothing about feasibility.
pub fn indicator_search(n: usize, r: usize, opts: &SearchOptions) -> Result<IndicatorCoefficients> {
    if r == 0 {
        return Err(Error::InvalidDecomposition("index set must be nonempty".into()));
    }
    let nv = n + 1;
    if nv > 7 {
        return Err(Error::Unsupported(format!(
            "indicator search enumerates (n+1)^(n+1) tuples; n = {n} is too large"
        )));
    }
    let run = |restart: usize| -> (f64, usize, Option<Vec<Vec<Complex64>>>) {
        let mut rng = restart_rng(opts.seed, restart);
        let mut c: Vec<Vec<Complex64>> = (0..r)
            .map(|_| {
                (0..nv)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect()
            })
            .collect();
        let mut lambda = 1e-3;
        let mut f = indicator_residual_vector(&c, nv);
        let mut cost = f.norm_squared();
        let mut best_worst = f.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        for _ in 0..opts.iters {
            let j = indicator_jacobian(&c, nv);
            let jh = j.adjoint();
            let normal = &jh * &j;
            let grad = &jh * &f;
            let mut improved = false;
            for _ in 0..25 {
                let mut damped = normal.clone();
                for k in 0..damped.nrows() {
                    damped[(k, k)] += Complex64::new(lambda, 0.0);
                }
                let Some(delta) = damped.lu().solve(&grad) else {
                    lambda *= 10.0;
                    continue;
                };
                let mut trial = c.clone();
                for (v, d) in trial.iter_mut().flatten().zip(delta.iter()) {
                    *v -= d;
                }
                let tf = indicator_residual_vector(&trial, nv);
                let tcost = tf.norm_squared();
                if tcost < cost {
                    c = trial;
                    f = tf;
                    cost = tcost;
                    lambda = (lambda * 0.3).max(1e-14);
                    improved = true;
                    break;
                }
                lambda *= 10.0;
                if lambda > 1e12 {
                    break;
                }
            }
            let worst = f.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            best_worst = best_worst.min(worst);
            if worst <= opts.tol {
                return (worst, restart, Some(c));
            }
            if !improved {
                break;
            }
        }
        (best_worst, restart, None)
    };
    let results: Vec<(f64, usize, Option<Vec<Vec<Complex64>>>)> =
        (0..opts.restarts.max(1)).into_par_iter().map(run).collect();
    let mut best_overall = f64::INFINITY;
    let mut winner = None;
    for (res, _, c) in results.iter() {
        if *res < best_overall {
            best_overall = *res;
            if c.is_some() {
                winner = c.clone();
            }
        }
    }
    match winner {
        Some(c) => {
            let coeffs = IndicatorCoefficients::new(c)?;
            let residual = indicator_residual(&coeffs);
            if residual > opts.tol {
                return Err(Error::SearchFailed {
                    best_residual: residual,
                    restarts: opts.restarts.max(1),
                });
            }
            Ok(coeffs)
        }
        None => Err(Error::SearchFailed {
            best_residual: best_overall,
            restarts: opts.restarts.max(1),
        }),
    }
}
