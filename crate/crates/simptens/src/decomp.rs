//! Invariant decompositions and their contraction.
//!
//! A decomposition of size r stores, at every vertex site, one local vector
//! per *assignment* — a map from the facet copies incident to that site into
//! the index set {0, …, r−1}. Contracting sums, over all global assignments,
//! the outer products of the selected locals. When a group acts on the
//! complex, the locals are compatible with the action ("the invariance
//! condition") iff `v[i][β] == v[g·i][g·β]` for every element, site and
//! assignment, where `g·β` reads its digit at copy x from β at g⁻¹·x; every
//! decomposition satisfying it contracts to an invariant tensor.
//!
//! Assignments are encoded big-endian in base r over the site's incident
//! copy positions in ascending order (first incident copy = most significant
//! digit).

use crate::complex::Wsc;
use crate::group::Action;
use crate::tensor::{check_dims_for_action, ElementarySum, GlobalTensor};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Incidence bookkeeping between vertex sites and facet-copy positions.
#[derive(Debug, Clone)]
pub struct Incidence {
    /// `positions[i]` = positions of the copies incident to vertex i, ascending.
    pub positions: Vec<Vec<usize>>,
    /// `rank[i][p]` = index of position p within `positions[i]`, or usize::MAX.
    pub rank: Vec<Vec<usize>>,
    pub copy_count: usize,
}

impl Incidence {
    pub fn new(w: &Wsc) -> Incidence {
        let fm = w.facet_multiset();
        let m = fm.len();
        let nv = w.vertex_count();
        let mut positions = Vec::with_capacity(nv);
        let mut rank = vec![vec![usize::MAX; m]; nv];
        for (i, row) in rank.iter_mut().enumerate() {
            let ps = fm.incident_positions(i);
            for (k, &p) in ps.iter().enumerate() {
                row[p] = k;
            }
            positions.push(ps);
        }
        Incidence {
            positions,
            rank,
            copy_count: m,
        }
    }
}

/// Big-endian digits of an assignment index (k digits, base r).
pub fn assignment_digits(mut idx: usize, r: usize, k: usize) -> Vec<usize> {
    let mut digits = vec![0usize; k];
    for slot in digits.iter_mut().rev() {
        *slot = idx % r;
        idx /= r;
    }
    debug_assert_eq!(idx, 0);
    digits
}

/// Assignment index of big-endian digits.
pub fn assignment_index(digits: &[usize], r: usize) -> usize {
    digits.iter().fold(0, |acc, &d| {
        debug_assert!(d < r);
        acc * r + d
    })
}

pub(crate) fn table_len(r: usize, k: usize) -> Result<usize> {
    r.checked_pow(k as u32)
        .ok_or_else(|| Error::InvalidDecomposition(format!("assignment table r^{k} overflows at r={r}")))
}

/// Transports a site assignment along a group element: maps `(i, β)` to
/// `(g·i, g·β)` where the digit of `g·β` at copy x is β's digit at g⁻¹·x.
pub fn transported_assignment(
    a: &Action,
    inc: &Incidence,
    g: usize,
    i: usize,
    digits: &[usize],
) -> (usize, Vec<usize>) {
    let gi = a.vertex_act[g][i];
    let ginv = a.group.inv(g);
    let out = inc.positions[gi]
        .iter()
        .map(|&x| {
            let src = a.copy_act[ginv][x];
            let rank = inc.rank[i][src];
            debug_assert_ne!(rank, usize::MAX, "copy {src} not incident to site {i}");
            digits[rank]
        })
        .collect();
    (gi, out)
}

/// A size-r decomposition over the vertex sites of an action's complex.
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub action: Action,
    pub r: usize,
    pub dims: Vec<usize>,
    /// `locals[site][assignment]` = vector in ℂ^{dims\[site\]}.
    pub locals: Vec<Vec<Vec<Complex64>>>,
}

impl Decomposition {
    pub fn new(
        action: Action,
        r: usize,
        dims: Vec<usize>,
        locals: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Decomposition> {
        let d = Decomposition {
            action,
            r,
            dims,
            locals,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidDecomposition("index set must be nonempty".into()));
        }
        check_dims_for_action(&self.action, &self.dims)?;
        let inc = Incidence::new(&self.action.complex);
        let nv = self.dims.len();
        if self.locals.len() != nv {
            return Err(Error::InvalidDecomposition(format!(
                "expected {nv} site tables, got {}",
                self.locals.len()
            )));
        }
        for i in 0..nv {
            let want = table_len(self.r, inc.positions[i].len())?;
            if self.locals[i].len() != want {
                return Err(Error::InvalidDecomposition(format!(
                    "site {i}: expected {want} assignments, got {}",
                    self.locals[i].len()
                )));
            }
            if let Some(v) = self.locals[i].iter().find(|v| v.len() != self.dims[i]) {
                return Err(Error::InvalidDecomposition(format!(
                    "site {i}: local vector of length {} (dim is {})",
                    v.len(),
                    self.dims[i]
                )));
            }
        }
        Ok(())
    }

    pub fn incidence(&self) -> Incidence {
        Incidence::new(&self.action.complex)
    }
}

/// Largest max-norm violation of the invariance condition over all elements,
/// sites and assignments. Exactly 0.0 for decompositions built orbitwise.
pub fn condition_b_deviation(d: &Decomposition) -> f64 {
    let inc = d.incidence();
    let mut worst: f64 = 0.0;
    for i in 0..d.dims.len() {
        let k = inc.positions[i].len();
        for idx in 0..d.locals[i].len() {
            let digits = assignment_digits(idx, d.r, k);
            for g in 0..d.action.group.order() {
                let (gi, moved) = transported_assignment(&d.action, &inc, g, i, &digits);
                let idx2 = assignment_index(&moved, d.r);
                let diff = d.locals[i][idx]
                    .iter()
                    .zip(&d.locals[gi][idx2])
                    .map(|(a, b)| (a - b).norm())
                    .fold(0.0, f64::max);
                worst = worst.max(diff);
            }
        }
    }
    worst
}

pub fn check_condition_b(d: &Decomposition, tol: f64) -> bool {
    condition_b_deviation(d) <= tol
}

/// Fills the local tables by computing one value per orbit of
/// (site, assignment) pairs and copying it to every orbit member, so the
/// invariance condition holds bitwise by construction. The callback is
/// invoked once per orbit, on the first pair in (site, index) order.
pub fn build_locals_orbitwise<F>(
    a: &Action,
    r: usize,
    dims: &[usize],
    mut value: F,
) -> Result<Vec<Vec<Vec<Complex64>>>>
where
    F: FnMut(usize, &[usize]) -> Vec<Complex64>,
{
    check_dims_for_action(a, dims)?;
    let inc = Incidence::new(&a.complex);
    let nv = dims.len();
    let mut tables: Vec<Vec<Option<Vec<Complex64>>>> = (0..nv)
        .map(|i| Ok(vec![None; table_len(r, inc.positions[i].len())?]))
        .collect::<Result<_>>()?;
    for i in 0..nv {
        for idx in 0..tables[i].len() {
            if tables[i][idx].is_some() {
                continue;
            }
            let digits = assignment_digits(idx, r, inc.positions[i].len());
            let v = value(i, &digits);
            if v.len() != dims[i] {
                return Err(Error::InvalidDecomposition(format!(
                    "orbitwise builder returned a vector of length {} at site {i} (dim {})",
                    v.len(),
                    dims[i]
                )));
            }
            for g in 0..a.group.order() {
                let (gi, moved) = transported_assignment(a, &inc, g, i, &digits);
                let idx2 = assignment_index(&moved, r);
                if tables[gi][idx2].is_none() {
                    tables[gi][idx2] = Some(v.clone());
                }
            }
        }
    }
    Ok(tables
        .into_iter()
        .map(|t| t.into_iter().map(|v| v.expect("orbit closure fills every slot")).collect())
        .collect())
}

fn random_condition_b_with(
    a: &Action,
    r: usize,
    dims: &[usize],
    rng: &mut impl Rng,
    nonneg: bool,
) -> Result<Decomposition> {
    let locals = build_locals_orbitwise(a, r, dims, |i, _| {
        (0..dims[i])
            .map(|_| {
                if nonneg {
                    Complex64::new(rng.gen_range(0.0..1.0), 0.0)
                } else {
                    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                }
            })
            .collect()
    })?;
    Decomposition::new(a.clone(), r, dims.to_vec(), locals)
}

/// Random decomposition satisfying the invariance condition bitwise.
pub fn random_condition_b_decomposition(
    a: &Action,
    r: usize,
    dims: &[usize],
    rng: &mut impl Rng,
) -> Result<Decomposition> {
    random_condition_b_with(a, r, dims, rng, false)
}

/// Like [`random_condition_b_decomposition`] but with nonnegative real locals.
pub fn random_nonneg_condition_b_decomposition(
    a: &Action,
    r: usize,
    dims: &[usize],
    rng: &mut impl Rng,
) -> Result<Decomposition> {
    random_condition_b_with(a, r, dims, rng, true)
}

struct Contractor<'a> {
    d: &'a Decomposition,
    /// (site, digit weight) pairs to update when a copy position is assigned.
    updates: Vec<Vec<(usize, usize)>>,
    /// Sites whose assignment is complete once position p has a digit.
    completes_at: Vec<Vec<usize>>,
    zero: Vec<Vec<bool>>,
    cur: Vec<usize>,
    out: Vec<Complex64>,
    cost: u64,
    budget: u64,
    leaf_work: u64,
}

impl<'a> Contractor<'a> {
    fn charge(&mut self, amount: u64) -> Result<()> {
        self.cost = self.cost.saturating_add(amount);
        if self.cost > self.budget {
            return Err(Error::BudgetExceeded {
                needed: self.cost,
                budget: self.budget,
            });
        }
        Ok(())
    }

    fn go(&mut self, p: usize) -> Result<()> {
        if p == self.updates.len() {
            self.charge(self.leaf_work)?;
            self.leaf(0, 0, Complex64::new(1.0, 0.0));
            return Ok(());
        }
        for digit in 0..self.d.r {
            self.charge(1)?;
            for &(site, weight) in &self.updates[p] {
                self.cur[site] += digit * weight;
            }
            let alive = self.completes_at[p]
                .iter()
                .all(|&site| !self.zero[site][self.cur[site]]);
            if alive {
                self.go(p + 1)?;
            }
            for &(site, weight) in &self.updates[p] {
                self.cur[site] -= digit * weight;
            }
        }
        Ok(())
    }

    fn leaf(&mut self, site: usize, flat: usize, coeff: Complex64) {
        if site == self.d.dims.len() {
            self.out[flat] += coeff;
            return;
        }
        let d = self.d;
        let local = &d.locals[site][self.cur[site]];
        for (x, &value) in local.iter().enumerate() {
            self.leaf(site + 1, flat * d.dims[site] + x, coeff * value);
        }
    }
}

/// Contracts the decomposition to its global tensor. The work estimate
/// (one unit per search node plus Π dims per surviving leaf) is charged
/// against `budget`; branches whose newly completed site has an all-zero
/// local are pruned, which never changes the sum. Summation order is the
/// lexicographic order of global assignments, so results are deterministic.
pub fn contract(d: &Decomposition, budget: u64) -> Result<GlobalTensor> {
    d.validate()?;
    let inc = d.incidence();
    let nv = d.dims.len();
    let m = inc.copy_count;
    let mut updates: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m];
    let mut completes_at: Vec<Vec<usize>> = vec![Vec::new(); m];
    for i in 0..nv {
        let k = inc.positions[i].len();
        for (j, &p) in inc.positions[i].iter().enumerate() {
            updates[p].push((i, d.r.pow((k - 1 - j) as u32)));
        }
        if let Some(&last) = inc.positions[i].last() {
            completes_at[last].push(i);
        }
    }
    let zero: Vec<Vec<bool>> = d
        .locals
        .iter()
        .map(|t| {
            t.iter()
                .map(|v| v.iter().all(|z| z.re == 0.0 && z.im == 0.0))
                .collect()
        })
        .collect();
    let total: usize = d.dims.iter().product();
    let mut c = Contractor {
        d,
        updates,
        completes_at,
        zero,
        cur: vec![0usize; nv],
        out: vec![Complex64::new(0.0, 0.0); total],
        cost: 0,
        budget,
        leaf_work: d.dims.iter().map(|&x| x as u64).product(),
    };
    c.go(0)?;
    GlobalTensor::new(d.dims.clone(), c.out)
}

/// Contracts and compares against a target; returns (within tolerance, max
/// deviation).
pub fn verify(d: &Decomposition, target: &GlobalTensor, tol: f64, budget: u64) -> Result<(bool, f64)> {
    let got = contract(d, budget)?;
    let dev = got.max_diff(target)?;
    Ok((dev <= tol, dev))
}

/// Seeds a decomposition from a sum of elementary tensors: the index set is
/// one index per term, the local at a constant assignment with value j is
/// the term's site vector, and every non-constant assignment gets zero. On a
/// connected complex this contracts exactly to the elementary sum.
pub fn from_elementary(complex: &Wsc, s: &ElementarySum) -> Result<Decomposition> {
    complex.ensure_valid()?;
    if !complex.is_connected() {
        return Err(Error::Unsupported(
            "elementary seeding needs a connected complex".into(),
        ));
    }
    if s.dims.len() != complex.vertex_count() {
        return Err(Error::DimMismatch(format!(
            "elementary sum has {} sites, complex has {} vertices",
            s.dims.len(),
            complex.vertex_count()
        )));
    }
    let action = Action::trivial(complex.clone())?;
    let r = s.terms.len().max(1);
    let inc = Incidence::new(complex);
    let zero_tables: Result<Vec<Vec<Vec<Complex64>>>> = (0..s.dims.len())
        .map(|i| {
            let k = inc.positions[i].len();
            let count = table_len(r, k)?;
            let mut table = vec![vec![Complex64::new(0.0, 0.0); s.dims[i]]; count];
            for (idx, slot) in table.iter_mut().enumerate() {
                let digits = assignment_digits(idx, r, k);
                let constant = digits.windows(2).all(|w| w[0] == w[1]);
                if constant && !digits.is_empty() && digits[0] < s.terms.len() {
                    *slot = s.terms[digits[0]][i].clone();
                }
            }
            Ok(table)
        })
        .collect();
    Decomposition::new(action, r, s.dims.clone(), zero_tables?)
}

/// Direct sum: a size r₁+r₂ decomposition of v+w from decompositions of v
/// and w over the same connected complex and action. Assignments staying
/// below r₁ read the first summand, assignments staying at or above r₁ read
/// the second, and mixed assignments vanish (connectivity makes some site
/// see the mix).
pub fn direct_sum(d1: &Decomposition, d2: &Decomposition) -> Result<Decomposition> {
    if d1.action != d2.action {
        return Err(Error::InvalidDecomposition(
            "direct sum needs the same complex and action on both summands".into(),
        ));
    }
    if d1.dims != d2.dims {
        return Err(Error::DimMismatch("direct sum needs equal site dims".into()));
    }
    if !d1.action.complex.is_connected() {
        return Err(Error::Unsupported("direct sum needs a connected complex".into()));
    }
    let r = d1.r + d2.r;
    let inc = d1.incidence();
    let locals: Result<Vec<Vec<Vec<Complex64>>>> = (0..d1.dims.len())
        .map(|i| {
            let k = inc.positions[i].len();
            let count = table_len(r, k)?;
            let mut table = vec![vec![Complex64::new(0.0, 0.0); d1.dims[i]]; count];
            for (idx, slot) in table.iter_mut().enumerate() {
                let digits = assignment_digits(idx, r, k);
                if digits.iter().all(|&x| x < d1.r) {
                    *slot = d1.locals[i][assignment_index(&digits, d1.r)].clone();
                } else if digits.iter().all(|&x| x >= d1.r) {
                    let shifted: Vec<usize> = digits.iter().map(|&x| x - d1.r).collect();
                    *slot = d2.locals[i][assignment_index(&shifted, d2.r)].clone();
                }
            }
            Ok(table)
        })
        .collect();
    Decomposition::new(d1.action.clone(), r, d1.dims.clone(), locals?)
}

/// How the site vectors of two decompositions are combined in a product.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProductMode {
    /// Pointwise products; yields the entrywise product of the tensors.
    Entrywise,
    /// Site vectors are row-major square matrices; yields the sitewise
    /// operator product.
    MatrixSites,
}

/// Size r₁·r₂ decomposition of the (entrywise or sitewise-operator) product.
/// The combined index ℓ = i·r₂ + j reads factor one at i and factor two at j.
pub fn product(d1: &Decomposition, d2: &Decomposition, mode: ProductMode) -> Result<Decomposition> {
    if d1.action != d2.action {
        return Err(Error::InvalidDecomposition(
            "product needs the same complex and action on both factors".into(),
        ));
    }
    if d1.dims != d2.dims {
        return Err(Error::DimMismatch("product needs equal site dims".into()));
    }
    let side: Vec<usize> = match mode {
        ProductMode::Entrywise => vec![0; d1.dims.len()],
        ProductMode::MatrixSites => d1
            .dims
            .iter()
            .map(|&d| {
                let m = (d as f64).sqrt().round() as usize;
                if m * m == d {
                    Ok(m)
                } else {
                    Err(Error::DimMismatch(format!(
                        "matrix-site product needs square dims, got {d}"
                    )))
                }
            })
            .collect::<Result<_>>()?,
    };
    let r = d1
        .r
        .checked_mul(d2.r)
        .ok_or_else(|| Error::InvalidDecomposition("product index set overflows".into()))?;
    let inc = d1.incidence();
    let locals: Result<Vec<Vec<Vec<Complex64>>>> = (0..d1.dims.len())
        .map(|i| {
            let k = inc.positions[i].len();
            let count = table_len(r, k)?;
            let mut table = Vec::with_capacity(count);
            for idx in 0..count {
                let digits = assignment_digits(idx, r, k);
                let b1: Vec<usize> = digits.iter().map(|&x| x / d2.r).collect();
                let b2: Vec<usize> = digits.iter().map(|&x| x % d2.r).collect();
                let v1 = &d1.locals[i][assignment_index(&b1, d1.r)];
                let v2 = &d2.locals[i][assignment_index(&b2, d2.r)];
                let combined = match mode {
                    ProductMode::Entrywise => v1.iter().zip(v2).map(|(a, b)| a * b).collect(),
                    ProductMode::MatrixSites => {
                        let m = side[i];
                        let mut c = vec![Complex64::new(0.0, 0.0); m * m];
                        for row in 0..m {
                            for col in 0..m {
                                let mut acc = Complex64::new(0.0, 0.0);
                                for t in 0..m {
                                    acc += v1[row * m + t] * v2[t * m + col];
                                }
                                c[row * m + col] = acc;
                            }
                        }
                        c
                    }
                };
                table.push(combined);
            }
            Ok(table)
        })
        .collect();
    Decomposition::new(d1.action.clone(), r, d1.dims.clone(), locals?)
}

/// Scales the contraction by `factor` while preserving the invariance
/// condition bitwise: every site in the orbit of vertex 0 is scaled by
/// factor^(1/orbit size).
pub fn rescale_orbit_uniform(d: &mut Decomposition, factor: f64) -> Result<()> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::InvalidDecomposition(format!(
            "rescale factor must be positive and finite, got {factor}"
        )));
    }
    let orbit = d.action.vertex_orbit(0);
    let s = factor.powf(1.0 / orbit.len() as f64);
    for &i in &orbit {
        for v in &mut d.locals[i] {
            for z in v.iter_mut() {
                *z *= s;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{self, act};
    use crate::DEFAULT_BUDGET;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn one(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    /// Elementary sum with small integer entries, so contraction sums are
    /// exact in floating point.
    fn integer_sum(dims: &[usize], terms: usize, rng: &mut ChaCha8Rng) -> ElementarySum {
        let terms = (0..terms)
            .map(|_| {
                dims.iter()
                    .map(|&d| (0..d).map(|_| one(rng.gen_range(-3..4) as f64)).collect())
                    .collect()
            })
            .collect();
        ElementarySum::new(dims.to_vec(), terms).unwrap()
    }

    #[test]
    fn assignment_encoding_roundtrip() {
        for idx in 0..27 {
            let digits = assignment_digits(idx, 3, 3);
            assert_eq!(assignment_index(&digits, 3), idx);
        }
        assert_eq!(assignment_digits(11, 3, 3), vec![1, 0, 2]);
    }

    #[test]
    fn transport_on_circle_matches_hand_computation() {
        let a = Action::rotation_circle(3).unwrap();
        let inc = Incidence::new(&a.complex);
        assert_eq!(inc.positions[0], vec![0, 1]);
        assert_eq!(inc.positions[1], vec![0, 2]);
        // Rotating by one sends site 0 to site 1; the transported assignment
        // reads its first digit from the second original copy and vice versa.
        let (gi, moved) = transported_assignment(&a, &inc, 1, 0, &[5, 7]);
        assert_eq!(gi, 1);
        assert_eq!(moved, vec![7, 5]);
    }

    #[test]
    fn transport_composes_along_multiplication() {
        for a in [
            Action::rotation_circle(4).unwrap(),
            Action::symmetric_on_simplex(2).unwrap(),
            Action::reflection_line(3).unwrap(),
        ] {
            let inc = Incidence::new(&a.complex);
            let r = 3usize;
            for i in 0..a.complex.vertex_count() {
                let k = inc.positions[i].len();
                let digits: Vec<usize> = (0..k).map(|t| t % r).collect();
                for g in 0..a.group.order() {
                    for h in 0..a.group.order() {
                        let (hi, hb) = transported_assignment(&a, &inc, h, i, &digits);
                        let (ghi, ghb) = transported_assignment(&a, &inc, g, hi, &hb);
                        let direct = transported_assignment(&a, &inc, a.group.mul(g, h), i, &digits);
                        assert_eq!((ghi, ghb), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn elementary_seed_contracts_exactly() {
        let w = Wsc::line(2).unwrap();
        let s = integer_sum(&[2, 2, 2], 3, &mut rng(2));
        let d = from_elementary(&w, &s).unwrap();
        assert_eq!(d.r, 3);
        let got = contract(&d, DEFAULT_BUDGET).unwrap();
        let want = s.contract();
        assert_eq!(got.entries, want.entries);
        // Mixed assignments carry zero locals: site 1 sees two copies.
        let idx = assignment_index(&[0, 1], 3);
        assert!(d.locals[1][idx].iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn elementary_seed_needs_connectivity() {
        let single = |v: usize| (crate::complex::SimplexSet::new([v]).unwrap(), 1u64);
        let w = Wsc::new(1, vec![single(0), single(1)]).unwrap();
        let s = integer_sum(&[2, 2], 1, &mut rng(3));
        assert!(matches!(from_elementary(&w, &s), Err(Error::Unsupported(_))));
    }

    #[test]
    fn budget_is_enforced() {
        let w = Wsc::circle(4).unwrap();
        let s = integer_sum(&[2, 2, 2, 2], 3, &mut rng(4));
        let d = from_elementary(&w, &s).unwrap();
        let err = contract(&d, 10).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { budget: 10, .. }));
    }

    #[test]
    fn direct_sum_adds_contractions() {
        let w = Wsc::line(2).unwrap();
        let s1 = integer_sum(&[2, 2, 2], 2, &mut rng(5));
        let s2 = integer_sum(&[2, 2, 2], 1, &mut rng(6));
        let d1 = from_elementary(&w, &s1).unwrap();
        let d2 = from_elementary(&w, &s2).unwrap();
        let sum = direct_sum(&d1, &d2).unwrap();
        assert_eq!(sum.r, 3);
        let got = contract(&sum, DEFAULT_BUDGET).unwrap();
        let want = s1.contract().add(&s2.contract()).unwrap();
        assert_eq!(got.entries, want.entries);
    }

    #[test]
    fn entrywise_product_multiplies_pointwise() {
        let w = Wsc::circle(3).unwrap();
        let s1 = integer_sum(&[2, 2, 2], 2, &mut rng(7));
        let s2 = integer_sum(&[2, 2, 2], 2, &mut rng(8));
        let d1 = from_elementary(&w, &s1).unwrap();
        let d2 = from_elementary(&w, &s2).unwrap();
        let prod = product(&d1, &d2, ProductMode::Entrywise).unwrap();
        assert_eq!(prod.r, 4);
        let got = contract(&prod, DEFAULT_BUDGET).unwrap();
        let (a, b) = (s1.contract(), s2.contract());
        for (flat, z) in got.entries.iter().enumerate() {
            assert_eq!(*z, a.entries[flat] * b.entries[flat]);
        }
    }

    #[test]
    fn matrix_product_multiplies_sitewise() {
        let w = Wsc::simplex(1);
        // Rank-one operators: site matrices A_i and B_i, row-major in ℂ⁴.
        let a_mats = vec![vec![one(1.0), one(2.0), one(0.0), one(1.0)]; 2];
        let b_mats = vec![vec![one(3.0), one(0.0), one(1.0), one(1.0)]; 2];
        let s1 = ElementarySum::new(vec![4, 4], vec![a_mats.clone()]).unwrap();
        let s2 = ElementarySum::new(vec![4, 4], vec![b_mats.clone()]).unwrap();
        let d1 = from_elementary(&w, &s1).unwrap();
        let d2 = from_elementary(&w, &s2).unwrap();
        let prod = product(&d1, &d2, ProductMode::MatrixSites).unwrap();
        let got = contract(&prod, DEFAULT_BUDGET).unwrap();
        // A·B = [[5,2],[1,1]] for both sites.
        let ab = vec![one(5.0), one(2.0), one(1.0), one(1.0)];
        let want = ElementarySum::new(vec![4, 4], vec![vec![ab.clone(), ab]])
            .unwrap()
            .contract();
        assert_eq!(got.entries, want.entries);
    }

    #[test]
    fn matrix_product_rejects_nonsquare_dims() {
        let w = Wsc::simplex(1);
        let s = integer_sum(&[3, 3], 1, &mut rng(9));
        let d = from_elementary(&w, &s).unwrap();
        assert!(matches!(
            product(&d, &d, ProductMode::MatrixSites),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn condition_b_sees_middle_site_symmetry_on_reflected_line() {
        let a = Action::reflection_line(2).unwrap();
        let mk = |middle: Vec<Vec<Complex64>>| {
            let ends = vec![vec![one(1.0), one(2.0)], vec![one(3.0), one(4.0)]];
            Decomposition::new(
                a.clone(),
                2,
                vec![2, 2, 2],
                vec![ends.clone(), middle, ends],
            )
            .unwrap()
        };
        let sym = mk(vec![
            vec![one(1.0), one(0.0)],
            vec![one(5.0), one(6.0)],
            vec![one(5.0), one(6.0)],
            vec![one(2.0), one(7.0)],
        ]);
        assert_eq!(condition_b_deviation(&sym), 0.0);
        let broken = mk(vec![
            vec![one(1.0), one(0.0)],
            vec![one(5.0), one(6.0)],
            vec![one(5.0), one(-6.0)],
            vec![one(2.0), one(7.0)],
        ]);
        assert!(condition_b_deviation(&broken) >= 12.0);
    }

    #[test]
    fn orbitwise_randoms_satisfy_condition_b_and_contract_invariantly() {
        let cases = vec![
            Action::rotation_circle(3).unwrap(),
            Action::reflection_line(2).unwrap(),
            Action::symmetric_on_simplex(2).unwrap(),
            Action::swap_double_edge(true).unwrap(),
        ];
        let mut r = rng(10);
        for a in cases {
            let dims = vec![2; a.complex.vertex_count()];
            let d = random_condition_b_decomposition(&a, 2, &dims, &mut r).unwrap();
            assert_eq!(condition_b_deviation(&d), 0.0);
            let v = contract(&d, DEFAULT_BUDGET).unwrap();
            assert!(tensor::invariance_deviation(&a, &v).unwrap() <= 1e-12);

            let dn = random_nonneg_condition_b_decomposition(&a, 2, &dims, &mut r).unwrap();
            assert!(dn
                .locals
                .iter()
                .flatten()
                .flatten()
                .all(|z| z.re >= 0.0 && z.im == 0.0));
            assert_eq!(condition_b_deviation(&dn), 0.0);
        }
    }

    #[test]
    fn condition_b_transports_correctly_under_rotation() {
        // Hand check on the 3-circle: an orbitwise-built decomposition must
        // relate site 0's (x, y) assignment to site 1's (y, x) assignment.
        let a = Action::rotation_circle(3).unwrap();
        let d = random_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(11)).unwrap();
        let at = |i: usize, digits: &[usize]| &d.locals[i][assignment_index(digits, 2)];
        assert_eq!(at(0, &[0, 1]), at(1, &[1, 0]));
        assert_eq!(at(0, &[1, 0]), at(1, &[0, 1]));
    }

    #[test]
    fn rescale_scales_contraction_and_keeps_condition_b() {
        let a = Action::rotation_circle(3).unwrap();
        let mut d = random_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(12)).unwrap();
        let before = contract(&d, DEFAULT_BUDGET).unwrap();
        rescale_orbit_uniform(&mut d, 2.0).unwrap();
        assert_eq!(condition_b_deviation(&d), 0.0);
        let after = contract(&d, DEFAULT_BUDGET).unwrap();
        let dev = after.max_diff(&before.scale(one(2.0))).unwrap();
        assert!(dev <= 1e-12 * before.max_norm().max(1.0));
    }

    #[test]
    fn invariance_condition_implies_invariant_contraction() {
        // Mixed-orbit example: the refined swap action on the doubled edge.
        let base = Action::swap_double_edge(true).unwrap();
        let refined = crate::group::free_refinement(&base).unwrap();
        let d = random_condition_b_decomposition(&refined, 2, &[2, 2], &mut rng(13)).unwrap();
        let v = contract(&d, DEFAULT_BUDGET).unwrap();
        for g in 0..refined.group.order() {
            let moved = act(&refined, g, &v).unwrap();
            assert!(moved.max_diff(&v).unwrap() <= 1e-12);
        }
    }
}
