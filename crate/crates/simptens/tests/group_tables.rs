//! Property tests over the mechanical tables: group multiplication tables,
//! vertex and copy permutation tables, and assignment indexing.

use proptest::prelude::*;
use simptens::complex::Wsc;
use simptens::decomp::{assignment_digits, assignment_index, transported_assignment, Incidence};
use simptens::group::{free_refinement, is_free, lex_permutations, z_map, Action, Group};

/// The actions the classification table is built from, rebuilt fresh so each
/// property draws from the same well-known pool.
fn action_pool() -> Vec<Action> {
    vec![
        Action::symmetric_on_simplex(2).unwrap(),
        Action::rotation_circle(3).unwrap(),
        Action::rotation_circle(4).unwrap(),
        Action::reflection_line(2).unwrap(),
        Action::reflection_line(3).unwrap(),
        Action::swap_double_edge(true).unwrap(),
        Action::swap_double_edge(false).unwrap(),
        Action::cayley_translation(Group::cyclic(5).unwrap(), &[1]).unwrap(),
        Action::cayley_translation(Group::cyclic(5).unwrap(), &[1, 2]).unwrap(),
    ]
}

fn group_pool() -> Vec<Group> {
    vec![
        Group::trivial(),
        Group::cyclic(2).unwrap(),
        Group::cyclic(3).unwrap(),
        Group::cyclic(6).unwrap(),
        Group::symmetric(3).unwrap(),
    ]
}

proptest! {
    /// Multiplication tables of the generated groups satisfy the group laws
    /// at arbitrary triples, and inversion is an involution.
    #[test]
    fn generated_group_tables_obey_group_laws(
        which in 0usize..5,
        g in 0usize..6,
        h in 0usize..6,
        k in 0usize..6,
    ) {
        let grp = group_pool().swap_remove(which);
        let n = grp.order();
        let (g, h, k) = (g % n, h % n, k % n);
        prop_assert_eq!(grp.mul(0, g), g);
        prop_assert_eq!(grp.mul(g, 0), g);
        prop_assert_eq!(grp.mul(grp.mul(g, h), k), grp.mul(g, grp.mul(h, k)));
        prop_assert_eq!(grp.mul(g, grp.inv(g)), 0);
        prop_assert_eq!(grp.inv(grp.inv(g)), g);
    }

    /// A mangled multiplication table is rejected: breaking one entry of a
    /// cyclic table destroys either the Latin-square property or
    /// associativity.
    #[test]
    fn corrupted_multiplication_tables_are_rejected(
        n in 2usize..6,
        row in 0usize..6,
        col in 0usize..6,
        delta in 1usize..5,
    ) {
        let mut mul = Group::cyclic(n).unwrap().mul_table().to_vec();
        let (row, col) = (row % n, col % n);
        let old = mul[row][col];
        mul[row][col] = (old + (delta % (n - 1)) + 1) % n;
        prop_assert!(Group::new(mul).is_err());
    }

    /// Vertex and copy tables of every built-in action are permutations
    /// composing along the group law (a left action).
    #[test]
    fn action_tables_are_left_actions(
        which in 0usize..9,
        g in 0usize..6,
        h in 0usize..6,
    ) {
        let a = action_pool().swap_remove(which);
        let n = a.group.order();
        let (g, h) = (g % n, h % n);
        let gh = a.group.mul(g, h);
        for v in 0..a.complex.vertex_count() {
            prop_assert_eq!(a.vertex_act[gh][v], a.vertex_act[g][a.vertex_act[h][v]]);
            prop_assert_eq!(a.vertex_act[0][v], v);
        }
        let copies = a.complex.facet_multiset().len();
        for p in 0..copies {
            prop_assert_eq!(a.copy_act[gh][p], a.copy_act[g][a.copy_act[h][p]]);
            prop_assert_eq!(a.copy_act[0][p], p);
        }
    }

    /// A free refinement of any pooled action is free, leaves the vertex
    /// table untouched, and scales every stored weight by the group order.
    #[test]
    fn free_refinement_is_free_with_scaled_weights(which in 0usize..9) {
        let a = action_pool().swap_remove(which);
        let refined = free_refinement(&a).unwrap();
        prop_assert!(is_free(&refined));
        prop_assert_eq!(&refined.vertex_act, &a.vertex_act);
        let order = a.group.order() as u64;
        let facets = a.complex.facets();
        for (s, w) in a.complex.stored_weights() {
            let expect = if facets.contains(s) { w * order } else { w };
            prop_assert_eq!(refined.complex.weight(s), expect);
        }
        // The refined action carries an equivariant copy labeling.
        z_map(&refined).unwrap().check(&refined).unwrap();
    }

    /// Assignment indices and digit vectors round-trip in both directions.
    #[test]
    fn assignment_indexing_round_trips(r in 1usize..5, k in 0usize..5, idx in 0usize..600) {
        let idx = idx % r.pow(k as u32);
        let digits = assignment_digits(idx, r, k);
        prop_assert_eq!(digits.len(), k);
        prop_assert!(digits.iter().all(|&d| d < r));
        prop_assert_eq!(assignment_index(&digits, r), idx);
    }

    /// Transporting a local assignment with g and then g⁻¹ returns to the
    /// original site and digits.
    #[test]
    fn assignment_transport_inverts(
        which in 0usize..9,
        g in 0usize..6,
        site in 0usize..10,
        idx in 0usize..600,
    ) {
        let a = action_pool().swap_remove(which);
        let inc = Incidence::new(&a.complex);
        let g = g % a.group.order();
        let i = site % a.complex.vertex_count();
        let r = 3usize;
        let k = inc.positions[i].len();
        let digits = assignment_digits(idx % r.pow(k as u32), r, k);
        let (j, moved) = transported_assignment(&a, &inc, g, i, &digits);
        let (back_site, back) = transported_assignment(&a, &inc, a.group.inv(g), j, &moved);
        prop_assert_eq!(back_site, i);
        prop_assert_eq!(back, digits);
    }

    /// Scaling multiplies exactly the facet weights, keeps every other
    /// stored weight, and preserves the complex axioms.
    #[test]
    fn weight_scaling_preserves_axioms(m in 1u64..5, which in 0usize..5) {
        let base = [
            Wsc::simplex(2),
            Wsc::complete(3),
            Wsc::line(3).unwrap(),
            Wsc::circle(4).unwrap(),
            Wsc::double_edge(),
        ]
        .to_vec()
        .swap_remove(which);
        let scaled = base.scale_weights(m).unwrap();
        prop_assert!(scaled.validate().is_valid());
        let facets = base.facets();
        for (s, w) in base.stored_weights() {
            let expect = if facets.contains(s) { w * m } else { w };
            prop_assert_eq!(scaled.weight(s), expect);
        }
    }

    /// The lexicographic permutation listing is a permutation group carrier:
    /// closed under composition as used by the symmetric-group constructor.
    #[test]
    fn lex_permutations_compose_within_symmetric_group(m in 1usize..4, i in 0usize..6, j in 0usize..6) {
        let perms = lex_permutations(m);
        let order = perms.len();
        let (i, j) = (i % order, j % order);
        let composed: Vec<usize> = (0..m).map(|x| perms[i][perms[j][x]]).collect();
        prop_assert!(perms.contains(&composed));
        let grp = Group::symmetric(m).unwrap();
        let k = perms.iter().position(|p| p == &composed).unwrap();
        prop_assert_eq!(grp.mul(i, j), k);
    }
}
