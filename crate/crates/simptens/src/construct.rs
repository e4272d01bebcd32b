//! Constructions that turn one decomposition into another while preserving
//! the contracted tensor:
//!
//! * averaging a plain decomposition of an invariant tensor into an
//!   equivariant one, when the action is free (`invariantize_free`) or when
//!   it blends orbits strongly enough (`invariantize_blending`,
//!   `invariantize_strong_blending`);
//! * trading the symmetry group for a quotient by a normal subgroup
//!   (`change_group`);
//! * moving a plain decomposition to another complex on the same vertices
//!   (`change_complex_constant`), to or from a weight-scaled copy of the
//!   same complex (`to_power`, `from_power`), and between Cayley complexes
//!   of the same group (`change_complex_cayley`).
//!
//! All constructions copy one computed vector per orbit of
//! (site, assignment) pairs, so their outputs satisfy the invariance
//! condition bitwise, and deterministic index conventions make outputs
//! reproducible byte for byte.

use crate::complex::Wsc;
use crate::decomp::{
    assignment_digits, assignment_index, build_locals_orbitwise, contract, rescale_orbit_uniform,
    transported_assignment, Decomposition, Incidence,
};
use crate::group::{
    self, cayley_directed_edges, cayley_edge_position, covering_tuple_count, Action, Group,
};
use crate::tensor::{basis_expansion, invariance_deviation, GlobalTensor};
use crate::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Per-site coefficient families whose symmetric products sum to the
/// covering indicator: Σ_ℓ Π_k coeffs\[ℓ\]\[i_k\] is 1 when the tuple
/// (i₀, …, i_n) uses every value 0..=n and 0 otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorCoefficients {
    /// `coeffs[ℓ][i]`, with i ranging over the n+1 values.
    pub coeffs: Vec<Vec<Complex64>>,
}

impl IndicatorCoefficients {
    pub fn new(coeffs: Vec<Vec<Complex64>>) -> Result<IndicatorCoefficients> {
        if coeffs.is_empty() || coeffs[0].is_empty() {
            return Err(Error::InvalidDecomposition(
                "indicator coefficients need at least one index and one value".into(),
            ));
        }
        let nv = coeffs[0].len();
        if coeffs.iter().any(|row| row.len() != nv) {
            return Err(Error::InvalidDecomposition(
                "indicator coefficient rows must have uniform length".into(),
            ));
        }
        Ok(IndicatorCoefficients { coeffs })
    }

    /// Number of indices ℓ.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// n, where tuples have n+1 slots over values 0..=n.
    pub fn n(&self) -> usize {
        self.coeffs[0].len() - 1
    }
}

/// Closed-form covering-indicator coefficients of size 2^{n+1}−1: one index
/// per nonempty subset S of {0, …, n} in ascending bitmask order, with
/// coefficient exp(iπ(n+1−|S|)/(n+1)) on the values in S and 0 elsewhere.
/// Then λ_S^{n+1} = (−1)^{n+1−|S|}, so summing over supersets of a tuple's
/// support telescopes to the covering indicator. The rounding error is
/// checked to be at most 1e-10 before returning.
pub fn indicator_coefficients(n: usize) -> Result<IndicatorCoefficients> {
    let nv = n + 1;
    if nv > 11 {
        return Err(Error::Unsupported(format!(
            "closed-form indicator family has 2^{nv}−1 indices; n = {n} is too large"
        )));
    }
    let full = (1u32 << nv) - 1;
    let lam = |size: usize| Complex64::from_polar(1.0, PI * (nv - size) as f64 / nv as f64);
    let coeffs = (1..=full)
        .map(|mask| {
            let l = lam(mask.count_ones() as usize);
            (0..nv).map(|i| if mask >> i & 1 == 1 { l } else { ZERO }).collect()
        })
        .collect();
    let c = IndicatorCoefficients::new(coeffs)?;
    // For this family the value of a tuple depends only on its support set
    // (every product has exactly n+1 factors λ_S), so checking all supports
    // checks all tuples.
    let mut worst: f64 = 0.0;
    for supp in 1..=full {
        let mut total = ZERO;
        for mask in 1..=full {
            if mask & supp == supp {
                total += Complex64::from_polar(1.0, PI * (nv - mask.count_ones() as usize) as f64);
            }
        }
        let target = if supp == full { 1.0 } else { 0.0 };
        worst = worst.max((total - Complex64::new(target, 0.0)).norm());
    }
    if worst > 1e-10 {
        return Err(Error::Unsupported(format!(
            "closed-form indicator coefficients drifted to residual {worst:.3e}"
        )));
    }
    Ok(c)
}

fn residual_walk(
    c: &IndicatorCoefficients,
    depth: usize,
    support: u32,
    active: &[(usize, Complex64)],
    worst: &mut f64,
) {
    let nv = c.coeffs[0].len();
    let full = (1u32 << nv) - 1;
    if active.is_empty() {
        // Every completion evaluates to exactly 0; the worst deviation below
        // this node is 1 iff the support can still be completed to full.
        let missing = (full & !support).count_ones() as usize;
        if missing <= nv - depth {
            *worst = worst.max(1.0);
        }
        return;
    }
    if depth == nv {
        let total: Complex64 = active.iter().map(|&(_, p)| p).sum();
        let target = if support == full { 1.0 } else { 0.0 };
        *worst = worst.max((total - Complex64::new(target, 0.0)).norm());
        return;
    }
    for i in 0..nv {
        let next: Vec<(usize, Complex64)> = active
            .iter()
            .filter_map(|&(l, p)| {
                let q = p * c.coeffs[l][i];
                (q != ZERO).then_some((l, q))
            })
            .collect();
        residual_walk(c, depth + 1, support | (1 << i), &next, worst);
    }
}

/// Largest deviation of Σ_ℓ Π_k coeffs\[ℓ\]\[i_k\] from the covering
/// indicator over all (n+1)^{n+1} tuples. Branches whose running products
/// are all exactly zero are folded into a single comparison, which does not
/// change the maximum.
pub fn indicator_residual(c: &IndicatorCoefficients) -> f64 {
    let start: Vec<(usize, Complex64)> =
        (0..c.len()).map(|l| (l, Complex64::new(1.0, 0.0))).collect();
    let mut worst = 0.0;
    residual_walk(c, 0, 0, &start, &mut worst);
    worst
}

/// Turns a plain decomposition of a G-invariant tensor into an equivariant
/// one for a free action, at size r·|G|: indices become pairs (j, g), a
/// local is nonzero only when the group components follow one global shift
/// of the equivariant copy labeling, and the surviving vectors are the input
/// locals at a transported assignment. Equivalent to [`change_group`] with
/// the trivial subgroup.
pub fn invariantize_free(a: &Action, d: &Decomposition, tol: f64, budget: u64) -> Result<Decomposition> {
    change_group(a, &[0], d, tol, budget)
}

/// Trades an equivariant decomposition under a normal subgroup H ⊴ G for one
/// under the full group, at size r·|G/H|, assuming the G-action is free on
/// the copies, the complex is connected, and the input contracts to a
/// G-invariant tensor. The quotient-sized second index component must follow
/// a global shift of the quotient copy labeling, exactly as in the free
/// construction. With H trivial this is the free construction; with H = G it
/// returns the input unchanged.
pub fn change_group(
    a: &Action,
    h_elems: &[usize],
    d: &Decomposition,
    tol: f64,
    budget: u64,
) -> Result<Decomposition> {
    let restricted = a.restrict(h_elems)?;
    if d.action != restricted {
        return Err(Error::InvalidDecomposition(
            "input decomposition must carry the action restricted to the given subgroup".into(),
        ));
    }
    let ids = a.group.check_subgroup(h_elems)?;
    if !a.complex.is_connected() {
        return Err(Error::Unsupported("group change needs a connected complex".into()));
    }
    let z = group::z_map(a)?;
    let (quot, coset_of) = a.group.quotient(&ids)?;
    let qk = quot.order();
    let mut rep = vec![usize::MAX; qk];
    for g in 0..a.group.order() {
        if rep[coset_of[g]] == usize::MAX {
            rep[coset_of[g]] = g;
        }
    }
    let v = contract(d, budget)?;
    let dev = invariance_deviation(a, &v)?;
    if dev > tol {
        return Err(Error::NotInvariant { deviation: dev, tol });
    }
    let zq: Vec<usize> = z.values.iter().map(|&g| coset_of[g]).collect();
    let r_out = d.r.checked_mul(qk).ok_or_else(|| {
        Error::InvalidDecomposition("combined index set overflows".into())
    })?;
    let inc = Incidence::new(&a.complex);
    let locals = build_locals_orbitwise(a, r_out, &d.dims, |i, digits| {
        let jd: Vec<usize> = digits.iter().map(|&x| x / qk).collect();
        let cd: Vec<usize> = digits.iter().map(|&x| x % qk).collect();
        let x0 = inc.positions[i][0];
        let ghat = quot.mul(cd[0], quot.inv(zq[x0]));
        let follows_shift = inc.positions[i]
            .iter()
            .zip(&cd)
            .all(|(&x, &c)| c == quot.mul(ghat, zq[x]));
        if !follows_shift {
            return vec![ZERO; d.dims[i]];
        }
        let g = rep[ghat];
        let (gi, moved) = transported_assignment(a, &inc, g, i, &jd);
        d.locals[gi][assignment_index(&moved, d.r)].clone()
    })?;
    let mut out = Decomposition::new(a.clone(), r_out, d.dims.clone(), locals)?;
    rescale_orbit_uniform(&mut out, 1.0 / qk as f64)?;
    Ok(out)
}

/// Builds an equivariant decomposition of an invariant tensor for a blending
/// action directly from the tensor's entries, at size (2^{n+1}−1)·(number of
/// nonzero entries): per index pair (ℓ, j), the only nonzero locals sit on
/// constant assignments and hold Σ_g coeffs[ℓ][g·i]·w_j[g·i], where w_j are
/// the factors of the entrywise elementary expansion. Summing the covering
/// indicator over orbit shifts makes the contraction a positive multiple of
/// the input, which is absorbed by an orbit-uniform rescale.
pub fn invariantize_blending(a: &Action, v: &GlobalTensor, tol: f64) -> Result<Decomposition> {
    let dev = invariance_deviation(a, v)?;
    if dev > tol {
        return Err(Error::NotInvariant { deviation: dev, tol });
    }
    if !a.complex.is_connected() {
        return Err(Error::Unsupported("blending construction needs a connected complex".into()));
    }
    if !group::is_blending(a) {
        return Err(Error::NotBlending);
    }
    let coeffs = indicator_coefficients(a.complex.vertex_count() - 1)?;
    let scale = covering_tuple_count(a)? as f64;
    let s = basis_expansion(v);
    let r_seed = s.terms.len().max(1);
    let r_out = coeffs.len().checked_mul(r_seed).ok_or_else(|| {
        Error::InvalidDecomposition("combined index set overflows".into())
    })?;
    let k = a.group.order();
    let locals = build_locals_orbitwise(a, r_out, &v.dims, |i, digits| {
        let constant = digits.windows(2).all(|w| w[0] == w[1]);
        if !constant || digits.is_empty() {
            return vec![ZERO; v.dims[i]];
        }
        let (l, j) = (digits[0] / r_seed, digits[0] % r_seed);
        if j >= s.terms.len() {
            return vec![ZERO; v.dims[i]];
        }
        let mut acc = vec![ZERO; v.dims[i]];
        for g in 0..k {
            let gi = a.vertex_act[g][i];
            let c = coeffs.coeffs[l][gi];
            for (slot, w) in acc.iter_mut().zip(&s.terms[j][gi]) {
                *slot += c * w;
            }
        }
        acc
    })?;
    let mut out = Decomposition::new(a.clone(), r_out, v.dims.clone(), locals)?;
    rescale_orbit_uniform(&mut out, 1.0 / scale)?;
    Ok(out)
}

/// Builds an equivariant decomposition from a plain decomposition of an
/// invariant tensor for a strongly blending action, at size C·r where C is
/// the indicator family size (2^{n+1}−1 by default; a smaller verified
/// family can be supplied). The local at index pair (ℓ, j-assignment β) is
/// Σ_g coeffs[ℓ][g·i]·w[g·i][g·β]; strong blending lets the covering
/// indicator collapse independent per-site shifts to one global shift. The
/// trivial group passes the input through unchanged.
pub fn invariantize_strong_blending(
    a: &Action,
    d: &Decomposition,
    coeffs: Option<&IndicatorCoefficients>,
    tol: f64,
    budget: u64,
) -> Result<Decomposition> {
    let trivial = Action::trivial(a.complex.clone())?;
    if d.action != trivial {
        return Err(Error::InvalidDecomposition(
            "input must be a plain decomposition (trivial action) of the same complex".into(),
        ));
    }
    if a.group.order() == 1 {
        return Ok(d.clone());
    }
    if !a.complex.is_connected() {
        return Err(Error::Unsupported("blending construction needs a connected complex".into()));
    }
    if !group::is_strongly_blending(a) {
        return Err(Error::NotBlending);
    }
    let v = contract(d, budget)?;
    let dev = invariance_deviation(a, &v)?;
    if dev > tol {
        return Err(Error::NotInvariant { deviation: dev, tol });
    }
    let owned;
    let coeffs = match coeffs {
        Some(c) => {
            if c.n() + 1 != a.complex.vertex_count() {
                return Err(Error::DimMismatch(format!(
                    "indicator family covers {} values, complex has {} vertices",
                    c.n() + 1,
                    a.complex.vertex_count()
                )));
            }
            let res = indicator_residual(c);
            if res > 1e-8 {
                return Err(Error::Unsupported(format!(
                    "supplied coefficients miss the covering indicator by {res:.3e}"
                )));
            }
            c
        }
        None => {
            owned = indicator_coefficients(a.complex.vertex_count() - 1)?;
            &owned
        }
    };
    let scale = covering_tuple_count(a)? as f64;
    let r_out = coeffs.len().checked_mul(d.r).ok_or_else(|| {
        Error::InvalidDecomposition("combined index set overflows".into())
    })?;
    let k = a.group.order();
    let inc = Incidence::new(&a.complex);
    let locals = build_locals_orbitwise(a, r_out, &d.dims, |i, digits| {
        let blocks: Vec<usize> = digits.iter().map(|&x| x / d.r).collect();
        if !blocks.windows(2).all(|w| w[0] == w[1]) || blocks.is_empty() {
            return vec![ZERO; d.dims[i]];
        }
        let l = blocks[0];
        let beta: Vec<usize> = digits.iter().map(|&x| x % d.r).collect();
        let mut acc = vec![ZERO; d.dims[i]];
        for g in 0..k {
            let gi = a.vertex_act[g][i];
            let c = coeffs.coeffs[l][gi];
            let (site, moved) = transported_assignment(a, &inc, g, i, &beta);
            debug_assert_eq!(site, gi);
            let w = &d.locals[gi][assignment_index(&moved, d.r)];
            for (slot, x) in acc.iter_mut().zip(w) {
                *slot += c * x;
            }
        }
        acc
    })?;
    let mut out = Decomposition::new(a.clone(), r_out, d.dims.clone(), locals)?;
    rescale_orbit_uniform(&mut out, 1.0 / scale)?;
    Ok(out)
}

fn require_trivial_action(d: &Decomposition, what: &str) -> Result<()> {
    let trivial = Action::trivial(d.action.complex.clone())?;
    if d.action != trivial {
        return Err(Error::InvalidDecomposition(format!(
            "{what} works on plain decompositions (trivial action)"
        )));
    }
    Ok(())
}

/// Moves a plain decomposition to any connected complex on the same vertex
/// set, at size r^(number of source copies): the new index set enumerates
/// whole source assignments, only constant assignments survive, and the
/// local reads the input at the decoded restriction. Contractions agree
/// exactly, with matching summation order.
pub fn change_complex_constant(d: &Decomposition, target: &Wsc) -> Result<Decomposition> {
    require_trivial_action(d, "complex change")?;
    target.ensure_valid()?;
    if target.vertex_count() != d.action.complex.vertex_count() {
        return Err(Error::DimMismatch(format!(
            "target has {} vertices, source has {}",
            target.vertex_count(),
            d.action.complex.vertex_count()
        )));
    }
    if !target.is_connected() {
        return Err(Error::Unsupported("complex change needs a connected target".into()));
    }
    let src_inc = Incidence::new(&d.action.complex);
    let m_src = src_inc.copy_count;
    let r_out = d
        .r
        .checked_pow(m_src as u32)
        .ok_or_else(|| Error::InvalidDecomposition("index set overflows".into()))?;
    let out_action = Action::trivial(target.clone())?;
    let locals = build_locals_orbitwise(&out_action, r_out, &d.dims, |i, digits| {
        let constant = digits.windows(2).all(|w| w[0] == w[1]);
        if !constant || digits.is_empty() {
            return vec![ZERO; d.dims[i]];
        }
        let global = assignment_digits(digits[0], d.r, m_src);
        let restricted: Vec<usize> = src_inc.positions[i].iter().map(|&p| global[p]).collect();
        d.locals[i][assignment_index(&restricted, d.r)].clone()
    })?;
    Decomposition::new(out_action, r_out, d.dims.clone(), locals)
}

/// Moves a plain decomposition onto the complex with facet weights scaled by
/// m, shrinking the index set to ⌈r^(1/m)⌉: each original copy's index is
/// spread over its m new copies in mixed radix, tuples decoding past r
/// vanish. Contractions agree exactly.
pub fn to_power(d: &Decomposition, m: usize) -> Result<Decomposition> {
    require_trivial_action(d, "power change")?;
    if m == 0 {
        return Err(Error::InvalidComplex("weight multiplier must be positive".into()));
    }
    let target = d.action.complex.scale_weights(m as u64)?;
    let mut k_out = 1usize;
    while k_out.checked_pow(m as u32).map_or(true, |p| p < d.r) {
        k_out += 1;
    }
    let out_action = Action::trivial(target)?;
    let locals = build_locals_orbitwise(&out_action, k_out, &d.dims, |i, digits| {
        debug_assert_eq!(digits.len() % m, 0);
        let mut src = Vec::with_capacity(digits.len() / m);
        for chunk in digits.chunks(m) {
            let value = assignment_index(chunk, k_out);
            if value >= d.r {
                return vec![ZERO; d.dims[i]];
            }
            src.push(value);
        }
        d.locals[i][assignment_index(&src, d.r)].clone()
    })?;
    Decomposition::new(out_action, k_out, d.dims.clone(), locals)
}

/// Moves a plain decomposition from a weight-scaled complex back onto the
/// base complex, at size r^m: each base copy's index is the m-tuple of its
/// scaled copies' indices. A bijective reindexing, so contractions agree
/// exactly.
pub fn from_power(d: &Decomposition, target: &Wsc, m: usize) -> Result<Decomposition> {
    require_trivial_action(d, "power change")?;
    if m == 0 {
        return Err(Error::InvalidComplex("weight multiplier must be positive".into()));
    }
    target.ensure_valid()?;
    if target.scale_weights(m as u64)? != d.action.complex {
        return Err(Error::InvalidComplex(
            "source complex is not the m-fold facet-weight scaling of the target".into(),
        ));
    }
    let r_out = d
        .r
        .checked_pow(m as u32)
        .ok_or_else(|| Error::InvalidDecomposition("index set overflows".into()))?;
    let out_action = Action::trivial(target.clone())?;
    let locals = build_locals_orbitwise(&out_action, r_out, &d.dims, |i, digits| {
        let src: Vec<usize> = digits
            .iter()
            .flat_map(|&x| assignment_digits(x, d.r, m))
            .collect();
        d.locals[i][assignment_index(&src, d.r)].clone()
    })?;
    Decomposition::new(out_action, r_out, d.dims.clone(), locals)
}

/// Moves a plain decomposition between Cayley complexes of the same group by
/// relaying every source edge along a shortest generator word in the target:
/// each target copy carries one lane per routed step (padded to the maximum
/// load L), intermediate vertices check that consecutive lanes agree, unused
/// lanes are pinned to 0, and the endpoints read the relayed index. The map
/// from surviving assignments to source assignments is a bijection, so
/// contractions agree exactly and the size is r^L. With equal generator
/// sets every load is 1 and the output has size r.
pub fn change_complex_cayley(
    d: &Decomposition,
    grp: &Group,
    src_gens: &[usize],
    tgt_gens: &[usize],
) -> Result<Decomposition> {
    require_trivial_action(d, "complex change")?;
    let source = Wsc::cayley(grp.mul_table(), src_gens)?;
    if d.action.complex != source {
        return Err(Error::InvalidComplex(
            "input complex does not match the Cayley complex of the source generators".into(),
        ));
    }
    let target = Wsc::cayley(grp.mul_table(), tgt_gens)?;
    let k = grp.order();
    // Shortest generator words in the target, by breadth-first search over
    // right multiplication (generators in ascending order for determinism).
    let mut gens = tgt_gens.to_vec();
    gens.sort_unstable();
    gens.dedup();
    let mut parent: Vec<Option<usize>> = vec![None; k];
    let mut seen = vec![false; k];
    seen[0] = true;
    let mut queue = std::collections::VecDeque::from([0usize]);
    while let Some(x) = queue.pop_front() {
        for &s in &gens {
            let y = grp.mul(x, s);
            if !seen[y] {
                seen[y] = true;
                parent[y] = Some(x);
                queue.push_back(y);
            }
        }
    }
    let path_from_identity = |t: usize| -> Vec<(usize, usize)> {
        let mut segs = Vec::new();
        let mut cur = t;
        while cur != 0 {
            let prev = parent[cur].expect("generators reach every element");
            segs.push((prev, cur));
            cur = prev;
        }
        segs.reverse();
        segs
    };
    let src_edges = cayley_directed_edges(grp, src_gens, &source);
    let tgt_fm = target.facet_multiset();
    let mut load = vec![0usize; tgt_fm.len()];
    // routes[source copy] = (target copy, lane) per relay step.
    let mut routes: Vec<Vec<(usize, usize)>> = Vec::with_capacity(src_edges.len());
    for &(u, v) in &src_edges {
        let t = grp.mul(grp.inv(u), v);
        let mut slots = Vec::new();
        for (a0, b0) in path_from_identity(t) {
            let (x, y) = (grp.mul(u, a0), grp.mul(u, b0));
            let q = cayley_edge_position(&target, x, y).expect("generator step is a target edge");
            slots.push((q, load[q]));
            load[q] += 1;
        }
        routes.push(slots);
    }
    let lanes = load.iter().copied().max().unwrap_or(0).max(1);
    let r_out = d
        .r
        .checked_pow(lanes as u32)
        .ok_or_else(|| Error::InvalidDecomposition("index set overflows".into()))?;
    // Constraints, each assigned to one vertex that sees all its copies:
    // lane pins at the smallest vertex of the copy's facet, relay equalities
    // at the step's midpoint.
    let nv = target.vertex_count();
    let mut pins_at: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for q in 0..tgt_fm.len() {
        let home = tgt_fm.copy(q).facet.vertices()[0];
        for lane in load[q]..lanes {
            pins_at[home].push((q, lane));
        }
    }
    let mut eqs_at: Vec<Vec<((usize, usize), (usize, usize))>> = vec![Vec::new(); nv];
    for (y, slots) in routes.iter().enumerate() {
        let (u, _) = src_edges[y];
        let t = grp.mul(grp.inv(u), src_edges[y].1);
        let path = path_from_identity(t);
        for j in 0..slots.len().saturating_sub(1) {
            let midpoint = grp.mul(u, path[j].1);
            eqs_at[midpoint].push((slots[j], slots[j + 1]));
        }
    }
    let out_action = Action::trivial(target.clone())?;
    let tgt_inc = Incidence::new(&target);
    let src_inc = Incidence::new(&source);
    let locals = build_locals_orbitwise(&out_action, r_out, &d.dims, |i, digits| {
        // digits[rank] encodes the `lanes` relay values of the target copy
        // at that rank, big-endian base r.
        let lane_vals: Vec<Vec<usize>> =
            digits.iter().map(|&x| assignment_digits(x, d.r, lanes)).collect();
        let read = |q: usize, lane: usize| lane_vals[tgt_inc.rank[i][q]][lane];
        if pins_at[i].iter().any(|&(q, lane)| read(q, lane) != 0) {
            return vec![ZERO; d.dims[i]];
        }
        if eqs_at[i].iter().any(|&((q1, l1), (q2, l2))| read(q1, l1) != read(q2, l2)) {
            return vec![ZERO; d.dims[i]];
        }
        let src_assign: Vec<usize> = src_inc.positions[i]
            .iter()
            .map(|&y| {
                let (u, _v) = src_edges[y];
                let (q, lane) = if u == i {
                    routes[y][0]
                } else {
                    *routes[y].last().expect("route is nonempty")
                };
                read(q, lane)
            })
            .collect();
        d.locals[i][assignment_index(&src_assign, d.r)].clone()
    })?;
    Decomposition::new(out_action, r_out, d.dims.clone(), locals)
}
