//! Cross-module flows: seeding, symmetrization, transfers between complexes,
//! the positivity chain, and wire-format round trips, exercised end to end.

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simptens::complex::Wsc;
use simptens::construct::{
    change_complex_constant, change_group, from_power, invariantize_blending, invariantize_free,
    to_power,
};
use simptens::decomp::{
    contract, direct_sum, from_elementary, product, random_condition_b_decomposition,
    random_nonneg_condition_b_decomposition, verify, ProductMode,
};
use simptens::formats::{from_json, to_json, DecompositionDto, TensorDto, WscDto};
use simptens::group::Action;
use simptens::positivity::{
    adjoint_product, evaluate_psd_decomp, matrix_of, nn_to_sep, purification_to_psd,
    purify_separable, sqrt_purification, SqrtRoute,
};
use simptens::tensor::{
    basis_expansion, invariance_deviation, random_sparse_tensor, symmetrize, GlobalTensor,
};
use simptens::{DEFAULT_BUDGET, DEFAULT_TOL};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Seeding a tensor from its basis expansion reproduces it exactly, on a
/// complex whose facets do not cover all pairs.
#[test]
fn seeding_reproduces_the_tensor_on_a_line() {
    let complex = Wsc::line(3).unwrap();
    let dims = vec![2, 3, 2, 3];
    let v = random_sparse_tensor(&dims, 5, &mut rng(21));
    let d = from_elementary(&complex, &basis_expansion(&v)).unwrap();
    let (ok, dev) = verify(&d, &v, DEFAULT_TOL, DEFAULT_BUDGET).unwrap();
    assert!(ok, "deviation {dev:.3e}");
}

/// The vertex swap of a single edge is not free, but its refinement is, and
/// free invariantization on the refined complex reconstructs the
/// symmetrized tensor at twice the seeding size.
#[test]
fn refine_then_invariantize_reconstructs_symmetrized_tensor() {
    let a = Action::reflection_line(1).unwrap();
    assert!(!simptens::group::is_free(&a));
    let refined = simptens::group::free_refinement(&a).unwrap();
    let dims = vec![2, 2];
    let v = symmetrize(&refined, &random_sparse_tensor(&dims, 2, &mut rng(3))).unwrap();
    assert!(invariance_deviation(&refined, &v).unwrap() <= 1e-12);
    let seed = from_elementary(&refined.complex, &basis_expansion(&v)).unwrap();
    let d = invariantize_free(&refined, &seed, DEFAULT_TOL, DEFAULT_BUDGET).unwrap();
    let (ok, dev) = verify(&d, &v, 1e-9, DEFAULT_BUDGET).unwrap();
    assert!(ok, "deviation {dev:.3e}");
    assert_eq!(d.r, seed.r * 2);
}

/// Blending invariantization on the triangle with full symmetry recovers the
/// tensor from its value alone.
#[test]
fn blending_reconstruction_on_symmetric_triangle() {
    let a = Action::symmetric_on_simplex(2).unwrap();
    let dims = vec![2; 3];
    let v = symmetrize(&a, &random_sparse_tensor(&dims, 6, &mut rng(9))).unwrap();
    let d = invariantize_blending(&a, &v, DEFAULT_TOL).unwrap();
    let (ok, dev) = verify(&d, &v, 1e-9, DEFAULT_BUDGET).unwrap();
    assert!(ok, "deviation {dev:.3e}");
}

/// Moving a decomposition from the triangle to the circle of length three
/// (same vertices, fewer facets) and back to a power complex keeps the value.
#[test]
fn complex_transfers_compose() {
    let triangle = Wsc::simplex(2);
    let circle = Wsc::circle(3).unwrap();
    let dims = vec![2, 2, 2];
    let v = random_sparse_tensor(&dims, 3, &mut rng(17));
    let d = from_elementary(&triangle, &basis_expansion(&v)).unwrap();
    let on_circle = change_complex_constant(&d, &circle).unwrap();
    assert_eq!(on_circle.r, d.r);
    let (ok, _) = verify(&on_circle, &v, DEFAULT_TOL, DEFAULT_BUDGET).unwrap();
    assert!(ok);

    let up = to_power(&on_circle, 2).unwrap();
    let back = from_power(&up, &circle, 2).unwrap();
    let (ok, dev) = verify(&back, &v, 1e-9, DEFAULT_BUDGET).unwrap();
    assert!(ok, "deviation {dev:.3e}");
}

/// The full group-change ladder on the circle of length six: a tensor with
/// full rotation symmetry, decomposed with only the subgroup acting, is
/// upgraded to the full group at the predicted size.
#[test]
fn group_change_upgrades_subgroup_symmetry() {
    let a = Action::rotation_circle(6).unwrap();
    let dims = vec![2; 6];
    let v = symmetrize(&a, &random_sparse_tensor(&dims, 2, &mut rng(11))).unwrap();
    let plain = from_elementary(&a.complex, &basis_expansion(&v)).unwrap();
    let sub = a.restrict(&[0, 2, 4]).unwrap();
    let d_h = invariantize_free(&sub, &plain, DEFAULT_TOL, DEFAULT_BUDGET).unwrap();
    let d_g = change_group(&a, &[0, 2, 4], &d_h, DEFAULT_TOL, DEFAULT_BUDGET).unwrap();
    assert_eq!(d_g.r, 2 * d_h.r);
    let (ok, dev) = verify(&d_g, &v, 1e-8, DEFAULT_BUDGET).unwrap();
    assert!(ok, "deviation {dev:.3e}");
}

/// Nonnegative chain: a nonnegative symmetric decomposition on the triangle
/// circle becomes separable, purifies, and evaluates back through the psd
/// family, all at the same size.
#[test]
fn positivity_chain_preserves_value_and_size() {
    let a = Action::rotation_circle(3).unwrap();
    let d = random_nonneg_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(5)).unwrap();
    let sigma = contract(&d, DEFAULT_BUDGET).unwrap();

    let sep = nn_to_sep(&d, DEFAULT_TOL).unwrap();
    assert_eq!(sep.r, d.r);
    let xi = purify_separable(&sep, DEFAULT_TOL).unwrap();
    assert_eq!(xi.r, sep.r);
    let fam = purification_to_psd(&xi).unwrap();
    assert_eq!(fam.r, xi.r);
    let back = evaluate_psd_decomp(&fam, DEFAULT_BUDGET).unwrap();
    assert!(sigma.max_diff(&back).unwrap() <= 1e-8);

    // ξ*ξ recovers the matricization of σ as an operator product.
    let prod = adjoint_product(&xi, &xi).unwrap();
    let lhs = matrix_of(&prod, DEFAULT_BUDGET).unwrap();
    let rhs = matrix_of(&sep, DEFAULT_BUDGET).unwrap();
    assert!((lhs - rhs).norm() <= 1e-8);
}

/// An invariant psd operator tensor for an action: a random psd matrix on
/// the paired indices, pushed to a tensor and averaged over the group.
fn invariant_psd_operator(a: &Action, side_dim: usize, seed: u64) -> GlobalTensor {
    use simptens::positivity::{matrix_of_tensor, tensor_of_matrix};
    let sites = a.complex.vertex_count();
    let dims = vec![side_dim * side_dim; sites];
    let raw = random_sparse_tensor(&dims, dims.iter().product::<usize>() / 2, &mut rng(seed));
    let (m, side) = matrix_of_tensor(&raw).unwrap();
    let psd = m.adjoint() * &m;
    let sigma = tensor_of_matrix(&psd, &side).unwrap();
    symmetrize(a, &sigma).unwrap()
}

/// The psd square root of an invariant positive operator purifies through
/// the free route (double-edge copy swap) and the blending route (edge
/// reflection), each reproducing the operator as ξ*ξ.
#[test]
fn sqrt_purification_reproduces_the_operator_on_both_routes() {
    let cases = [
        (Action::swap_double_edge(true).unwrap(), SqrtRoute::Free),
        (Action::reflection_line(1).unwrap(), SqrtRoute::Blending),
    ];
    for (a, route) in cases {
        let sigma = invariant_psd_operator(&a, 2, 13);
        assert!(invariance_deviation(&a, &sigma).unwrap() <= 1e-10);
        let (sigma_m, _) = simptens::positivity::matrix_of_tensor(&sigma).unwrap();

        let xi = sqrt_purification(&a, &sigma, route, 1e-9, DEFAULT_BUDGET).unwrap();
        let prod = adjoint_product(&xi, &xi).unwrap();
        let lhs = matrix_of(&prod, DEFAULT_BUDGET).unwrap();
        let diff = (lhs - sigma_m).norm();
        assert!(diff <= 1e-8, "route {route:?}: deviation {diff:.3e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Direct sums add contractions entry by entry; entrywise products
    /// multiply them.
    #[test]
    fn sums_and_products_act_entrywise(seed in 0u64..1000, r1 in 1usize..3, r2 in 1usize..3) {
        let a = Action::trivial(Wsc::circle(3).unwrap()).unwrap();
        let dims = [2usize, 2, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d1 = random_condition_b_decomposition(&a, r1, &dims, &mut rng).unwrap();
        let d2 = random_condition_b_decomposition(&a, r2, &dims, &mut rng).unwrap();
        let v1 = contract(&d1, DEFAULT_BUDGET).unwrap();
        let v2 = contract(&d2, DEFAULT_BUDGET).unwrap();

        let sum = direct_sum(&d1, &d2).unwrap();
        prop_assert_eq!(sum.r, r1 + r2);
        let expected = v1.add(&v2).unwrap();
        let got = contract(&sum, DEFAULT_BUDGET).unwrap();
        prop_assert!(got.max_diff(&expected).unwrap() <= 1e-12);

        let prod = product(&d1, &d2, ProductMode::Entrywise).unwrap();
        prop_assert_eq!(prod.r, r1 * r2);
        let got = contract(&prod, DEFAULT_BUDGET).unwrap();
        let mut expected = v1.clone();
        for (e, f) in expected.entries.iter_mut().zip(v2.entries.iter()) {
            *e *= f;
        }
        prop_assert!(got.max_diff(&expected).unwrap() <= 1e-12);
    }

    /// Symmetric decompositions contract to invariant tensors on every
    /// built-in symmetric action.
    #[test]
    fn symmetric_contractions_are_invariant(seed in 0u64..1000, which in 0usize..3) {
        let a = [
            Action::rotation_circle(3).unwrap(),
            Action::reflection_line(2).unwrap(),
            Action::swap_double_edge(true).unwrap(),
        ]
        .to_vec()
        .swap_remove(which);
        let dims = vec![2; a.complex.vertex_count()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_condition_b_decomposition(&a, 2, &dims, &mut rng).unwrap();
        let v = contract(&d, DEFAULT_BUDGET).unwrap();
        prop_assert!(invariance_deviation(&a, &v).unwrap() <= 1e-10);
    }

    /// Tensor JSON round trips are bit-exact on arbitrary finite floats.
    #[test]
    fn tensor_json_round_trip_is_bit_exact(values in proptest::collection::vec(
        (any::<f64>(), any::<f64>()), 4,
    )) {
        prop_assume!(values.iter().all(|(re, im)| re.is_finite() && im.is_finite()));
        let entries: Vec<Complex64> =
            values.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        let v = GlobalTensor { dims: vec![2, 2], entries };
        let text = to_json(&TensorDto::from_tensor(&v));
        let back = from_json::<TensorDto>(&text).unwrap().to_tensor().unwrap();
        for (x, y) in v.entries.iter().zip(back.entries.iter()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    /// Complex and decomposition JSON round trips preserve equality.
    #[test]
    fn structural_json_round_trips(seed in 0u64..1000) {
        let a = Action::rotation_circle(3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = random_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng).unwrap();

        let text = to_json(&WscDto::from_wsc(&a.complex));
        let wsc = from_json::<WscDto>(&text).unwrap().to_wsc().unwrap();
        prop_assert_eq!(&wsc, &a.complex);

        let text = to_json(&DecompositionDto::from_decomposition(&d));
        let back = from_json::<DecompositionDto>(&text).unwrap().to_decomposition().unwrap();
        prop_assert_eq!(back, d);
    }
}
