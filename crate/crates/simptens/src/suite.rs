//! The end-to-end verification matrix.
//!
//! Each check here is one acceptance criterion the artifact commits to:
//! a self-contained, seeded experiment with a pass/fail verdict, a detail
//! string carrying the measured numbers, and a wall-clock limit. The CLI
//! `suite` subcommand runs the whole matrix and the acceptance test target
//! runs each check as its own test.
//!
//! Two checks are expected to fail and do so with a witness in their detail:
//! the size-three covering family ([`check_minimal_indicator_family`]) and
//! the squared-size bound for the Cayley relay
//! ([`check_cayley_complex_change`]). Both assert size bounds that are
//! mathematically unattainable; the checks run the asserted experiment
//! faithfully and report why no outcome could ever satisfy it.

use crate::complex::{SimplexSet, Wsc};
use crate::construct::{
    change_complex_cayley, change_complex_constant, change_group, from_power,
    indicator_coefficients, indicator_residual, invariantize_blending, invariantize_free,
    to_power, IndicatorCoefficients,
};
use crate::decomp::{
    condition_b_deviation, contract, direct_sum, from_elementary, product,
    random_condition_b_decomposition, random_nonneg_condition_b_decomposition, verify,
    ProductMode,
};
use crate::group::{is_blending, is_free, free_refinement, Action, Group};
use crate::positivity::{
    adjoint_product, check_nonneg, diag_embed, evaluate_psd_decomp, matrix_of, matrix_of_tensor,
    nn_to_sep, purification_to_psd, purify_separable,
};
use crate::search::{indicator_search, numeric_rank_search, SearchOptions};
use crate::tensor::{
    basis_expansion, invariance_deviation, random_sparse_tensor, random_tensor, symmetrize,
    GlobalTensor,
};
use crate::{Error, Result, DEFAULT_BUDGET};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// Outcome of one acceptance check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckResult {
    pub id: String,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// All check outcomes for one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }
}

/// Runs the whole matrix. Deterministic for a fixed seed.
pub fn run_suite(seed: u64) -> SuiteReport {
    let checks = vec![
        check_complex_axioms(sub_seed(seed, 1)),
        check_classification(),
        check_free_refinement(),
        check_free_invariantization(sub_seed(seed, 4)),
        check_blending_reconstruction(sub_seed(seed, 5)),
        check_minimal_indicator_family(sub_seed(seed, 6)),
        check_sums_and_products(sub_seed(seed, 7)),
        check_group_change(sub_seed(seed, 8)),
        check_constant_complex_change(sub_seed(seed, 9)),
        check_power_complex_change(sub_seed(seed, 10)),
        check_cayley_complex_change(sub_seed(seed, 11)),
        check_positivity_chain(sub_seed(seed, 12)),
        check_invariant_contraction(sub_seed(seed, 13)),
        check_planted_size_recovery(sub_seed(seed, 14)),
    ];
    SuiteReport { seed, checks }
}

fn sub_seed(seed: u64, k: u64) -> u64 {
    seed ^ k.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn lib<T>(r: Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Folds a check body's verdict together with the wall-clock limit.
fn finish(
    id: &str,
    name: &str,
    limit_s: f64,
    started: Instant,
    outcome: std::result::Result<String, String>,
) -> CheckResult {
    let elapsed = started.elapsed().as_secs_f64();
    let on_time = elapsed <= limit_s;
    let (ok, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    detail.push_str(&format!(" [{elapsed:.2} s of {limit_s:.0} s allowed]"));
    if !on_time {
        detail.push_str(" (over the time limit)");
    }
    CheckResult { id: id.into(), name: name.into(), pass: ok && on_time, detail }
}

fn hadamard(x: &GlobalTensor, y: &GlobalTensor) -> GlobalTensor {
    let entries = x.entries.iter().zip(&y.entries).map(|(a, b)| a * b).collect();
    GlobalTensor { dims: x.dims.clone(), entries }
}

fn max_matrix_diff(a: &nalgebra::DMatrix<Complex64>, b: &nalgebra::DMatrix<Complex64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Criterion 1: the standard families validate and seeded divisibility
/// violations are rejected.
pub fn check_complex_axioms(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let mut families: Vec<(String, Wsc)> = Vec::new();
        for n in 1..=4 {
            families.push((format!("simplex({n})"), Wsc::simplex(n)));
        }
        for n in 2..=4 {
            families.push((format!("complete({n})"), Wsc::complete(n)));
        }
        for n in 1..=4 {
            families.push((format!("line({n})"), lib(Wsc::line(n))?));
        }
        for len in 3..=6 {
            families.push((format!("circle({len})"), lib(Wsc::circle(len))?));
        }
        families.push(("double edge".into(), Wsc::double_edge()));
        let c5 = lib(Group::cyclic(5))?;
        families.push(("Cayley(C5, {1,2})".into(), lib(Wsc::cayley(c5.mul_table(), &[1, 2]))?));
        for (label, w) in &families {
            let report = w.validate();
            if !report.is_valid() {
                return Err(format!("{label} was rejected: {}", report.summary()));
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for k in 0..10 {
            let n = rng.gen_range(1..=4usize);
            let size = rng.gen_range(2..=n + 1);
            let mut verts: Vec<usize> = (0..=n).collect();
            for i in (1..verts.len()).rev() {
                verts.swap(i, rng.gen_range(0..=i));
            }
            let sup: Vec<usize> = verts[..size].to_vec();
            let mut sub = sup.clone();
            sub.remove(rng.gen_range(0..sub.len()));
            let w_sup = rng.gen_range(2u64..=6);
            let w_sub = loop {
                let c = rng.gen_range(2u64..=7);
                if w_sup % c != 0 {
                    break c;
                }
            };
            let w = lib(Wsc::new(
                n,
                vec![
                    (lib(SimplexSet::new(sup.iter().copied()))?, w_sup),
                    (lib(SimplexSet::new(sub.iter().copied()))?, w_sub),
                ],
            ))?;
            let report = w.validate();
            if report.is_valid() || !report.has_kind("divisibility") {
                return Err(format!(
                    "seeded violation #{k} (sub weight {w_sub} under sup weight {w_sup}) \
                     was not flagged as a divisibility break"
                ));
            }
        }
        Ok(format!(
            "{} standard complexes accepted; 10/10 seeded divisibility violations rejected",
            families.len()
        ))
    })();
    finish(
        "1",
        "standard complexes validate; divisibility violations are rejected",
        1.0,
        start,
        body,
    )
}

/// Criterion 2: the classification of the standard small actions.
pub fn check_classification() -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let s3 = lib(Action::symmetric_on_simplex(2))?;
        let line1 = lib(Action::reflection_line(1))?;
        let line2 = lib(Action::reflection_line(2))?;
        let line3 = lib(Action::reflection_line(3))?;
        let line4 = lib(Action::reflection_line(4))?;
        let circle3 = lib(Action::rotation_circle(3))?;
        let swap = lib(Action::swap_double_edge(true))?;
        let table: Vec<(&str, bool, bool)> = vec![
            ("permutations of the triangle are blending", is_blending(&s3), true),
            ("permutations of the triangle are not free", is_free(&s3), false),
            ("reflection of the length-2 path is free", is_free(&line2), true),
            ("reflection of the length-3 path is not free", is_free(&line3), false),
            ("reflection of the length-4 path is not blending", is_blending(&line4), false),
            ("rotation of the 3-circle is free", is_free(&circle3), true),
            ("rotation of the 3-circle is not blending", is_blending(&circle3), false),
            ("swap of the single edge is blending", is_blending(&line1), true),
            ("swap of the single edge is not free", is_free(&line1), false),
            ("copy-swapping flip of the double edge is free", is_free(&swap), true),
        ];
        for (label, got, want) in &table {
            if got != want {
                return Err(format!("{label}: got {got}, expected {want}"));
            }
        }
        Ok(format!("{} classification checks exact", table.len()))
    })();
    finish("2", "action classification table", 1.0, start, body)
}

fn classification_actions() -> Result<Vec<(String, Action)>> {
    Ok(vec![
        ("permutations / triangle".into(), Action::symmetric_on_simplex(2)?),
        ("reflection / 1-path".into(), Action::reflection_line(1)?),
        ("reflection / 2-path".into(), Action::reflection_line(2)?),
        ("reflection / 3-path".into(), Action::reflection_line(3)?),
        ("reflection / 4-path".into(), Action::reflection_line(4)?),
        ("rotation / 3-circle".into(), Action::rotation_circle(3)?),
        ("copy swap / double edge".into(), Action::swap_double_edge(true)?),
    ])
}

/// Criterion 3: free refinement makes every small action free by scaling
/// facet weights by exactly the group order.
pub fn check_free_refinement() -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let actions = lib(classification_actions())?;
        for (label, a) in &actions {
            let k = a.group.order() as u64;
            if k > 6 {
                continue;
            }
            let refined = lib(free_refinement(a))?;
            if !is_free(&refined) {
                return Err(format!("{label}: refinement is not free"));
            }
            for f in a.complex.facets() {
                let before = a.complex.weight(&f);
                let after = refined.complex.weight(&f);
                if after != k * before {
                    return Err(format!(
                        "{label}: facet {f} weight {before} refined to {after}, expected {}",
                        k * before
                    ));
                }
            }
        }
        Ok(format!("{} refinements free with weights scaled exactly", actions.len()))
    })();
    finish("3", "free refinement scales weights by the group order", 1.0, start, body)
}

/// For criterion 4: every nonzero local of `out` must be a nonnegative real
/// multiple of some local vector of `seed` (transport moves vectors across
/// sites, so candidates are drawn from every site).
fn locals_are_nonneg_multiples(out: &crate::decomp::Decomposition, seed: &crate::decomp::Decomposition) -> std::result::Result<(), String> {
    let candidates: Vec<&Vec<Complex64>> = seed
        .locals
        .iter()
        .flatten()
        .filter(|v| v.iter().any(|z| z.norm() > 1e-12))
        .collect();
    for (site, table) in out.locals.iter().enumerate() {
        'vectors: for w in table {
            if w.iter().all(|z| z.norm() <= 1e-12) {
                continue;
            }
            for u in &candidates {
                if u.len() != w.len() {
                    continue;
                }
                let k0 = match u.iter().position(|z| z.norm() > 1e-12) {
                    Some(k) => k,
                    None => continue,
                };
                let c = w[k0] / u[k0];
                if c.im.abs() > 1e-9 || c.re < -1e-12 {
                    continue;
                }
                let dev = w
                    .iter()
                    .zip(u.iter())
                    .map(|(a, b)| (a - c * b).norm())
                    .fold(0.0, f64::max);
                if dev <= 1e-9 {
                    continue 'vectors;
                }
            }
            return Err(format!("site {site} has a local that is no nonnegative multiple of any seed vector"));
        }
    }
    Ok(())
}

/// Criterion 4: the free invariantization round-trip on four free actions.
pub fn check_free_invariantization(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let families: Vec<(String, Action)> = vec![
            ("rotation / 3-circle".into(), lib(Action::rotation_circle(3))?),
            ("rotation / 4-circle".into(), lib(Action::rotation_circle(4))?),
            ("copy swap / double edge".into(), lib(Action::swap_double_edge(true))?),
            (
                "translation / 5-cycle Cayley".into(),
                lib(Action::cayley_translation(lib(Group::cyclic(5))?, &[1]))?,
            ),
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for t in 0..20 {
            let (label, a) = &families[t % families.len()];
            let nv = a.complex.vertex_count();
            let dims = vec![2usize; nv];
            let v = lib(symmetrize(a, &random_tensor(&dims, &mut rng)))?;
            let seed_d = lib(from_elementary(&a.complex, &basis_expansion(&v)))?;
            let out = lib(invariantize_free(a, &seed_d, 1e-9, DEFAULT_BUDGET))?;
            if out.r != seed_d.r * a.group.order() {
                return Err(format!(
                    "{label}: output size {} is not seed size {} times group order {}",
                    out.r,
                    seed_d.r,
                    a.group.order()
                ));
            }
            let (ok, dev) = lib(verify(&out, &v, 1e-9, DEFAULT_BUDGET))?;
            worst = worst.max(dev);
            if !ok {
                return Err(format!("{label}: reconstruction off by {dev:.3e} (tol 1e-9)"));
            }
            if condition_b_deviation(&out) != 0.0 {
                return Err(format!("{label}: output symmetry condition is not bitwise"));
            }
            locals_are_nonneg_multiples(&out, &seed_d).map_err(|e| format!("{label}: {e}"))?;
        }
        Ok(format!(
            "20 invariantizations verified (worst deviation {worst:.2e}); sizes, bitwise \
             symmetry, and nonnegative proportionality all exact"
        ))
    })();
    finish("4", "free invariantization round-trip", 30.0, start, body)
}

/// Criterion 5: closed-form covering coefficients have tiny residuals, and
/// the blending construction reconstructs symmetric tensors on the triangle.
pub fn check_blending_reconstruction(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        for n in 1..=6 {
            let fam = lib(indicator_coefficients(n))?;
            let res = indicator_residual(&fam);
            if res > 1e-10 {
                return Err(format!("closed-form family at {n} values has residual {res:.3e}"));
            }
        }
        let a = lib(Action::symmetric_on_simplex(2))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for _ in 0..10 {
            let v = lib(symmetrize(&a, &random_tensor(&[2, 2, 2], &mut rng)))?;
            let d = lib(invariantize_blending(&a, &v, 1e-9))?;
            let (ok, dev) = lib(verify(&d, &v, 1e-9, DEFAULT_BUDGET))?;
            worst = worst.max(dev);
            if !ok {
                return Err(format!("symmetric reconstruction off by {dev:.3e} (tol 1e-9)"));
            }
        }
        Ok(format!(
            "covering residuals ≤ 1e-10 for 1..=6 values; 10 symmetric tensors \
             reconstructed (worst deviation {worst:.2e})"
        ))
    })();
    finish("5", "covering coefficients and blending reconstruction", 30.0, start, body)
}

/// Criterion 6: a covering family of size three at three values. No such
/// family exists — the minimum is four — so this check reports the floor it
/// hits and the size-four witnesses instead of passing.
pub fn check_minimal_indicator_family(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let opts = SearchOptions { restarts: 32, iters: 300, tol: 1e-8, seed, budget: DEFAULT_BUDGET };
        match indicator_search(2, 3, &opts) {
            Ok(fam) => Ok(format!(
                "size-3 covering family found with residual {:.3e}",
                indicator_residual(&fam)
            )),
            Err(Error::SearchFailed { best_residual, restarts }) => {
                let four = indicator_search(2, 4, &opts)
                    .map(|f| indicator_residual(&f))
                    .map_err(|e| format!("size-4 comparison search failed too: {e}"))?;
                let closed = closed_form_four_family()?;
                Err(format!(
                    "no size-3 family: best residual {best_residual:.4} after {restarts} \
                     restarts, every restart stalling at the same floor. The constraints ask \
                     for the covering tensor at three values as a sum of third tensor powers, \
                     i.e. the product cubic abc as a sum of cubes of linear forms, and the \
                     classical minimum number of cubes for abc is four, not three \
                     (24abc = (a+b+c)^3 - (a+b-c)^3 - (a-b+c)^3 - (-a+b+c)^3, and no \
                     three-cube identity exists). Size four succeeds here: search residual \
                     {four:.1e}, four-cube closed form residual {closed:.1e}. A size-3 \
                     success is therefore unattainable, not merely unfound"
                ))
            }
            Err(e) => Err(format!("search errored: {e}")),
        }
    })();
    finish("6", "minimal covering family of size three at three values", 60.0, start, body)
}

/// The exact size-four covering family at three values, from the four-cube
/// identity for the product cubic.
fn closed_form_four_family() -> std::result::Result<f64, String> {
    let s = Complex64::new(0.25f64.cbrt(), 0.0);
    let t = Complex64::from_polar(0.25f64.cbrt(), std::f64::consts::FRAC_PI_3);
    let fam = lib(IndicatorCoefficients::new(vec![
        vec![s, s, s],
        vec![t, t, -t],
        vec![t, -t, t],
        vec![-t, t, t],
    ]))?;
    Ok(indicator_residual(&fam))
}

/// Criterion 7: direct sums and entrywise products of random pairs.
pub fn check_sums_and_products(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let circle = lib(Action::rotation_circle(3))?;
        let path = lib(Action::trivial(lib(Wsc::line(2))?))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst_sum = 0.0f64;
        let mut worst_prod = 0.0f64;
        for t in 0..10 {
            let a = if t < 5 { &circle } else { &path };
            let dims = vec![2usize; a.complex.vertex_count()];
            let r1 = t % 3 + 1;
            let r2 = (t + 1) % 3 + 1;
            let d1 = lib(random_condition_b_decomposition(a, r1, &dims, &mut rng))?;
            let d2 = lib(random_condition_b_decomposition(a, r2, &dims, &mut rng))?;
            let v1 = lib(contract(&d1, DEFAULT_BUDGET))?;
            let v2 = lib(contract(&d2, DEFAULT_BUDGET))?;

            let ds = lib(direct_sum(&d1, &d2))?;
            if ds.r != r1 + r2 {
                return Err(format!("direct sum size {} instead of {}", ds.r, r1 + r2));
            }
            let sum = lib(v1.add(&v2))?;
            let dev = lib(lib(contract(&ds, DEFAULT_BUDGET))?.max_diff(&sum))?;
            worst_sum = worst_sum.max(dev);
            if dev > 1e-12 {
                return Err(format!("direct-sum contraction off by {dev:.3e}"));
            }

            let dp = lib(product(&d1, &d2, ProductMode::Entrywise))?;
            if dp.r != r1 * r2 {
                return Err(format!("product size {} instead of {}", dp.r, r1 * r2));
            }
            let had = hadamard(&v1, &v2);
            let dev = lib(lib(contract(&dp, DEFAULT_BUDGET))?.max_diff(&had))?;
            worst_prod = worst_prod.max(dev);
            if dev > 1e-9 {
                return Err(format!("product contraction off by {dev:.3e} (tol 1e-9)"));
            }
        }
        Ok(format!(
            "10 pairs: sums exact to {worst_sum:.1e}, entrywise products to {worst_prod:.1e}"
        ))
    })();
    finish("7", "direct sums and entrywise products", 10.0, start, body)
}

/// Criterion 8: moving a symmetric decomposition of an invariant tensor from
/// a subgroup of the 6-circle rotations to the full group multiplies the
/// size by the subgroup index.
pub fn check_group_change(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let a = lib(Action::rotation_circle(6))?;
        let dims = vec![2usize; 6];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..2 {
            let v = lib(symmetrize(&a, &random_sparse_tensor(&dims, 2, &mut rng)))?;
            let seed_d = lib(from_elementary(&a.complex, &basis_expansion(&v)))?;

            // Index-2 subgroup: decompose symmetrically under the rotations
            // by even amounts, then move to the full group.
            let h: Vec<usize> = vec![0, 2, 4];
            let a_h = lib(a.restrict(&h))?;
            let d_h = lib(invariantize_free(&a_h, &seed_d, 1e-9, DEFAULT_BUDGET))?;
            let out = lib(change_group(&a, &h, &d_h, 1e-8, DEFAULT_BUDGET))?;
            if out.r != 2 * d_h.r {
                return Err(format!("index-2 subgroup: size {} instead of 2·{}", out.r, d_h.r));
            }
            let (ok, dev) = lib(verify(&out, &v, 1e-8, DEFAULT_BUDGET))?;
            if !ok {
                return Err(format!("index-2 subgroup: reconstruction off by {dev:.3e}"));
            }
            if condition_b_deviation(&out) != 0.0 {
                return Err("index-2 subgroup: output symmetry is not bitwise".into());
            }

            // Trivial subgroup: the plain seed is the starting decomposition.
            let out = lib(change_group(&a, &[0], &seed_d, 1e-8, DEFAULT_BUDGET))?;
            if out.r != 6 * seed_d.r {
                return Err(format!("trivial subgroup: size {} instead of 6·{}", out.r, seed_d.r));
            }
            let (ok, dev) = lib(verify(&out, &v, 1e-8, DEFAULT_BUDGET))?;
            if !ok {
                return Err(format!("trivial subgroup: reconstruction off by {dev:.3e}"));
            }
            if condition_b_deviation(&out) != 0.0 {
                return Err("trivial subgroup: output symmetry is not bitwise".into());
            }
        }
        Ok("index-2 and trivial subgroup changes verified at sizes 2·r and 6·r".into())
    })();
    finish("8", "group change through a normal subgroup", 30.0, start, body)
}

/// Criterion 9(a): the constant change of complex from the triangle simplex
/// preserves size and value.
pub fn check_constant_complex_change(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let simplex = Wsc::simplex(2);
        let circle = lib(Wsc::circle(3))?;
        let trivial = lib(Action::trivial(simplex))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for r in 1..=5 {
            let d = lib(random_condition_b_decomposition(&trivial, r, &[2, 2, 2], &mut rng))?;
            let out = lib(change_complex_constant(&d, &circle))?;
            if out.r != r {
                return Err(format!("size changed from {r} to {}", out.r));
            }
            let v = lib(contract(&d, DEFAULT_BUDGET))?;
            let dev = lib(lib(contract(&out, DEFAULT_BUDGET))?.max_diff(&v))?;
            worst = worst.max(dev);
            if dev > 1e-12 {
                return Err(format!("value changed by {dev:.3e}"));
            }
        }
        Ok(format!("5 constant transfers simplex→circle preserve size and value ({worst:.1e})"))
    })();
    finish("9a", "constant change of complex", 30.0, start, body)
}

/// Criterion 9(b): the power move between the edge and the double edge
/// reaches ⌈√r⌉ one way and r² back.
pub fn check_power_complex_change(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let edge = lib(Wsc::line(1))?;
        let trivial = lib(Action::trivial(edge.clone()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for r in 2..=5usize {
            let d = lib(random_condition_b_decomposition(&trivial, r, &[2, 2], &mut rng))?;
            let v = lib(contract(&d, DEFAULT_BUDGET))?;
            let halved = lib(to_power(&d, 2))?;
            let k = (1..).find(|k| k * k >= r).expect("some square bounds r");
            if halved.r != k {
                return Err(format!("doubled-edge size {} instead of ⌈√{r}⌉ = {k}", halved.r));
            }
            let dev = lib(lib(contract(&halved, DEFAULT_BUDGET))?.max_diff(&v))?;
            if dev > 1e-12 {
                return Err(format!("doubled-edge value off by {dev:.3e}"));
            }
            let back = lib(from_power(&halved, &edge, 2))?;
            if back.r != k * k {
                return Err(format!("edge size {} instead of {k}² = {}", back.r, k * k));
            }
            let dev = lib(lib(contract(&back, DEFAULT_BUDGET))?.max_diff(&v))?;
            if dev > 1e-12 {
                return Err(format!("restored edge value off by {dev:.3e}"));
            }
        }
        Ok("sizes ⌈√r⌉ and ⌈√r⌉² verified for r = 2..=5 with exact values".into())
    })();
    finish("9b", "power change of complex", 30.0, start, body)
}

/// Criterion 9(c): relaying a decomposition from the complete-graph Cayley
/// complex of the 5-cycle onto the pentagon within squared size. The relay
/// verifies at cubed size, and squared size is impossible for generic
/// inputs, which this check certifies with a flattening-rank witness.
pub fn check_cayley_complex_change(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let grp = lib(Group::cyclic(5))?;
        let k5 = lib(Wsc::cayley(grp.mul_table(), &[1, 2]))?;
        let trivial = lib(Action::trivial(k5))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r_in = 2usize;
        let d = lib(random_condition_b_decomposition(&trivial, r_in, &[5; 5], &mut rng))?;
        let v = lib(contract(&d, DEFAULT_BUDGET))?;
        let out = lib(change_complex_cayley(&d, &grp, &[1, 2], &[1]))?;
        let (ok, dev) = lib(verify(&out, &v, 1e-9, DEFAULT_BUDGET))?;
        if !ok {
            return Err(format!("relay output off by {dev:.3e} (tol 1e-9)"));
        }

        // Rank of the {0,1} | {2,3,4} matricization bounds any pentagon
        // decomposition size q from below by √rank: the cut crosses exactly
        // two pentagon edges.
        let (rows, cols) = (25usize, 125usize);
        let m = nalgebra::DMatrix::from_fn(rows, cols, |x, y| v.entries[x * cols + y]);
        let svals = m.svd(false, false).singular_values;
        let smax = svals.iter().cloned().fold(0.0, f64::max);
        let rank = svals.iter().filter(|&&s| s > 1e-9 * smax).count();
        let q_min = (1..).find(|q| q * q >= rank).expect("some square bounds the rank");

        if out.r <= r_in * r_in {
            return Ok(format!(
                "relay verified within squared size: {} ≤ {}",
                out.r,
                r_in * r_in
            ));
        }
        if q_min > r_in * r_in {
            Err(format!(
                "the verified relay needs size {} (= r³); the asserted squared-size bound \
                 (≤ {}) is unattainable for this input: its two-against-three matricization \
                 has rank {rank}, and a pentagon decomposition of size q bounds that rank \
                 by q², so q ≥ {q_min} > {}. No construction could pass this check",
                out.r,
                r_in * r_in,
                r_in * r_in
            ))
        } else {
            Err(format!(
                "the relay needs size {} (= r³), above the asserted bound {}; the \
                 matricization witness was inconclusive at this seed (rank {rank})",
                out.r,
                r_in * r_in
            ))
        }
    })();
    finish("9c", "relay change between Cayley complexes", 30.0, start, body)
}

/// Criterion 10: the nonnegative → separable → purification → psd chain.
pub fn check_positivity_chain(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let edge = lib(Action::trivial(lib(Wsc::line(1))?))?;
        let circle = lib(Action::rotation_circle(3))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in 0..10 {
            let a = if t < 5 { &edge } else { &circle };
            let dims = vec![2usize; a.complex.vertex_count()];
            let r = t % 3 + 1;
            let d_nn = lib(random_nonneg_condition_b_decomposition(a, r, &dims, &mut rng))?;
            let m_tensor = lib(contract(&d_nn, DEFAULT_BUDGET))?;
            lib(check_nonneg(&m_tensor, 1e-12))?;

            let sep = lib(nn_to_sep(&d_nn, 1e-9))?;
            if sep.r != r {
                return Err(format!("separable lift changed size {r} to {}", sep.r));
            }
            let xi = lib(purify_separable(&sep, 1e-9))?;
            if xi.r != r {
                return Err(format!("purification changed size {r} to {}", xi.r));
            }

            let sigma = lib(diag_embed(&m_tensor, 1e-12))?;
            let (sigma_mat, _) = lib(matrix_of_tensor(&sigma))?;
            let ap = lib(adjoint_product(&xi, &xi))?;
            if ap.r != r * r {
                return Err(format!("adjoint product size {} instead of r² = {}", ap.r, r * r));
            }
            let ap_mat = lib(matrix_of(&ap, DEFAULT_BUDGET))?;
            let dev = max_matrix_diff(&ap_mat, &sigma_mat);
            if dev > 1e-8 {
                return Err(format!("ξ*ξ differs from the separable value by {dev:.3e}"));
            }

            let psd = lib(purification_to_psd(&xi))?;
            if psd.r != r {
                return Err(format!("psd extraction changed size {r} to {}", psd.r));
            }
            let m_back = lib(evaluate_psd_decomp(&psd, DEFAULT_BUDGET))?;
            let dev = lib(m_back.max_diff(&m_tensor))?;
            if dev > 1e-8 {
                return Err(format!("psd re-evaluation off by {dev:.3e}"));
            }
        }
        Ok("10 chains: sizes preserved, ξ*ξ = σ and psd re-evaluation within 1e-8".into())
    })();
    finish("10", "nonnegative → separable → purification → psd chain", 60.0, start, body)
}

/// Criterion 11: bitwise-symmetric decompositions contract to invariant
/// tensors.
pub fn check_invariant_contraction(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let families: Vec<Action> = vec![
            lib(Action::rotation_circle(3))?,
            lib(Action::rotation_circle(4))?,
            lib(Action::swap_double_edge(true))?,
            lib(Action::reflection_line(2))?,
            lib(Action::symmetric_on_simplex(2))?,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = 0.0f64;
        for t in 0..50 {
            let a = &families[t % families.len()];
            let dims = vec![2usize; a.complex.vertex_count()];
            let r = t % 3 + 1;
            let d = lib(random_condition_b_decomposition(a, r, &dims, &mut rng))?;
            let v = lib(contract(&d, DEFAULT_BUDGET))?;
            let dev = lib(invariance_deviation(a, &v))?;
            worst = worst.max(dev);
            if dev > 1e-10 {
                return Err(format!("trial {t}: contraction deviates from invariance by {dev:.3e}"));
            }
        }
        Ok(format!("50 contractions invariant (worst deviation {worst:.1e})"))
    })();
    finish("11", "symmetric decompositions contract to invariant tensors", 10.0, start, body)
}

/// Criterion 12: the numeric search recovers planted sizes on the 2-path and
/// the 3-circle in at least 90% of trials.
pub fn check_planted_size_recovery(seed: u64) -> CheckResult {
    let start = Instant::now();
    let body = (|| {
        let path = lib(Action::trivial(lib(Wsc::line(2))?))?;
        let circle = lib(Action::trivial(lib(Wsc::circle(3))?))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut successes = 0usize;
        let trials = 20usize;
        for t in 0..trials {
            let a = if t % 2 == 0 { &path } else { &circle };
            let r = t % 3 + 1;
            let dims = vec![2usize; a.complex.vertex_count()];
            let planted = lib(random_condition_b_decomposition(a, r, &dims, &mut rng))?;
            let v = lib(contract(&planted, DEFAULT_BUDGET))?;
            let opts = SearchOptions {
                restarts: 32,
                iters: 300,
                tol: 1e-6,
                seed: sub_seed(seed, 100 + t as u64),
                budget: DEFAULT_BUDGET,
            };
            if let Ok(found) = numeric_rank_search(a, &v, r, &opts) {
                let (ok, _) = lib(verify(&found, &v, 1e-6, DEFAULT_BUDGET))?;
                if ok && found.r == r {
                    successes += 1;
                }
            }
        }
        if successes * 10 >= trials * 9 {
            Ok(format!("{successes}/{trials} planted sizes recovered at 1e-6"))
        } else {
            Err(format!("only {successes}/{trials} planted sizes recovered (need ≥ 18)"))
        }
    })();
    finish("12", "planted index-set size recovery", 120.0, start, body)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_and_refinement_pass() {
        let c = check_classification();
        assert!(c.pass, "{}", c.detail);
        let c = check_free_refinement();
        assert!(c.pass, "{}", c.detail);
    }

    #[test]
    fn axioms_check_is_seed_stable() {
        let a = check_complex_axioms(7);
        let b = check_complex_axioms(7);
        assert!(a.pass, "{}", a.detail);
        assert_eq!(a, b);
    }

    #[test]
    fn constant_and_power_changes_pass() {
        let c = check_constant_complex_change(3);
        assert!(c.pass, "{}", c.detail);
        let c = check_power_complex_change(3);
        assert!(c.pass, "{}", c.detail);
    }

    #[test]
    fn suite_ids_cover_every_criterion() {
        // Pure bookkeeping; the heavy checks themselves run in the
        // acceptance test target.
        let report = SuiteReport {
            seed: 0,
            checks: vec![CheckResult {
                id: "x".into(),
                name: "y".into(),
                pass: false,
                detail: "z".into(),
            }],
        };
        assert!(!report.all_pass());
        assert_eq!(report.failed().len(), 1);
    }
}
