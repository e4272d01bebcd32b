//! Finite groups acting on weighted simplicial complexes.
//!
//! Groups are explicit multiplication tables over element ids `0..order`,
//! with 0 the identity. An action on a complex consists of a vertex
//! permutation and a facet-copy permutation per group element, tied together
//! by collapse linearity: the facet under a copy must move the way the
//! vertices say it does.
//!
//! The module classifies actions (free / blending / strongly blending),
//! extracts the copy-labeling map that witnesses freeness, and produces the
//! weight-multiplied free refinement that exists for every action.

use crate::complex::{SimplexSet, Wsc};
use crate::report::ValidationReport;
use crate::{Error, Result};

/// A finite group as a multiplication table. Element 0 is the identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    mul: Vec<Vec<usize>>,
    inv: Vec<usize>,
}

impl Group {
    /// Validates the table (Latin square, identity at 0, associativity,
    /// two-sided inverses) and derives the inverse table.
    pub fn new(mul: Vec<Vec<usize>>) -> Result<Group> {
        let k = mul.len();
        if k == 0 {
            return Err(Error::InvalidGroup("empty multiplication table".into()));
        }
        for (g, row) in mul.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidGroup(format!("row {g} has length {}", row.len())));
            }
            if row.iter().any(|&x| x >= k) {
                return Err(Error::InvalidGroup(format!("row {g} has an out-of-range entry")));
            }
        }
        for g in 0..k {
            if mul[0][g] != g || mul[g][0] != g {
                return Err(Error::InvalidGroup("element 0 is not a two-sided identity".into()));
            }
            let mut seen_row = vec![false; k];
            let mut seen_col = vec![false; k];
            for h in 0..k {
                seen_row[mul[g][h]] = true;
                seen_col[mul[h][g]] = true;
            }
            if !seen_row.iter().all(|&b| b) || !seen_col.iter().all(|&b| b) {
                return Err(Error::InvalidGroup(format!(
                    "row or column {g} is not a permutation"
                )));
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if mul[mul[a][b]][c] != mul[a][mul[b][c]] {
                        return Err(Error::InvalidGroup(format!(
                            "associativity fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let mut inv = vec![0usize; k];
        for g in 0..k {
            let x = (0..k)
                .find(|&x| mul[g][x] == 0 && mul[x][g] == 0)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
            inv[g] = x;
        }
        Ok(Group { mul, inv })
    }

    pub fn trivial() -> Group {
        Group::new(vec![vec![0]]).expect("valid")
    }

    /// Cyclic group of order `k`, element g = rotation by g.
    pub fn cyclic(k: usize) -> Result<Group> {
        if k == 0 {
            return Err(Error::InvalidGroup("cyclic group needs positive order".into()));
        }
        let mul = (0..k).map(|g| (0..k).map(|h| (g + h) % k).collect()).collect();
        Group::new(mul)
    }

    /// Symmetric group on `m` letters; elements are the permutations of
    /// `0..m` in lexicographic order (identity first), and multiplication is
    /// composition with the right factor applied first.
    pub fn symmetric(m: usize) -> Result<Group> {
        if m == 0 {
            return Err(Error::InvalidGroup("symmetric group needs at least one letter".into()));
        }
        let perms = lex_permutations(m);
        let index_of = |p: &[usize]| -> usize {
            perms.binary_search_by(|q| q.as_slice().cmp(p)).expect("permutation present")
        };
        let k = perms.len();
        let mut mul = vec![vec![0usize; k]; k];
        for g in 0..k {
            for h in 0..k {
                let composed: Vec<usize> = (0..m).map(|x| perms[g][perms[h][x]]).collect();
                mul[g][h] = index_of(&composed);
            }
        }
        Group::new(mul)
    }

    pub fn order(&self) -> usize {
        self.mul.len()
    }

    pub fn mul(&self, g: usize, h: usize) -> usize {
        self.mul[g][h]
    }

    pub fn inv(&self, g: usize) -> usize {
        self.inv[g]
    }

    pub fn mul_table(&self) -> &[Vec<usize>] {
        &self.mul
    }

    /// Checks that `elems` (any order, duplicates rejected) forms a subgroup;
    /// returns the sorted element list.
    pub fn check_subgroup(&self, elems: &[usize]) -> Result<Vec<usize>> {
        let k = self.order();
        let mut sub = elems.to_vec();
        sub.sort_unstable();
        sub.dedup();
        if sub.len() != elems.len() {
            return Err(Error::NotSubgroup("duplicate elements listed".into()));
        }
        if sub.iter().any(|&g| g >= k) {
            return Err(Error::NotSubgroup("element id out of range".into()));
        }
        if !sub.contains(&0) {
            return Err(Error::NotSubgroup("missing identity".into()));
        }
        for &a in &sub {
            if !sub.contains(&self.inv[a]) {
                return Err(Error::NotSubgroup(format!("missing inverse of {a}")));
            }
            for &b in &sub {
                if !sub.contains(&self.mul[a][b]) {
                    return Err(Error::NotSubgroup(format!("not closed: {a}*{b} escapes")));
                }
            }
        }
        Ok(sub)
    }

    pub fn is_normal(&self, sub: &[usize]) -> bool {
        let in_sub = |x: usize| sub.contains(&x);
        (0..self.order()).all(|g| {
            sub.iter().all(|&s| in_sub(self.mul[self.mul[g][s]][self.inv[g]]))
        })
    }

    /// The subgroup as a standalone group; element i of the result is
    /// `ids[i]` of the parent, with ids sorted ascending (so identity stays
    /// at index 0). Returns `(subgroup, ids)`.
    pub fn subgroup(&self, elems: &[usize]) -> Result<(Group, Vec<usize>)> {
        let ids = self.check_subgroup(elems)?;
        let pos = |x: usize| ids.binary_search(&x).expect("closed");
        let mul = ids
            .iter()
            .map(|&a| ids.iter().map(|&b| pos(self.mul[a][b])).collect())
            .collect();
        Ok((Group::new(mul)?, ids))
    }

    /// Quotient by a normal subgroup. Cosets are ordered by their smallest
    /// member, which puts the identity coset at index 0. Returns
    /// `(quotient, coset_of)` where `coset_of[g]` is the coset index of g.
    pub fn quotient(&self, sub: &[usize]) -> Result<(Group, Vec<usize>)> {
        let ids = self.check_subgroup(sub)?;
        if !self.is_normal(&ids) {
            return Err(Error::NotNormal);
        }
        let k = self.order();
        let mut coset_of = vec![usize::MAX; k];
        let mut reps = Vec::new();
        for g in 0..k {
            if coset_of[g] != usize::MAX {
                continue;
            }
            let c = reps.len();
            reps.push(g);
            for &s in &ids {
                coset_of[self.mul[g][s]] = c;
            }
        }
        let q = reps.len();
        let mut mul = vec![vec![0usize; q]; q];
        for a in 0..q {
            for b in 0..q {
                mul[a][b] = coset_of[self.mul[reps[a]][reps[b]]];
            }
        }
        Ok((Group::new(mul)?, coset_of))
    }
}

/// All permutations of `0..m` in lexicographic order.
pub fn lex_permutations(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..m).collect();
    loop {
        out.push(cur.clone());
        // next_permutation
        let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
            break;
        };
        let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).expect("exists");
        cur.swap(i, j);
        cur[i + 1..].reverse();
    }
    out
}

/// A group action on a weighted simplicial complex: per element, a vertex
/// permutation and a permutation of the canonical facet-copy positions.
/// Actions are left actions: `table[mul(g,h)][x] = table[g][table[h][x]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    pub complex: Wsc,
    pub group: Group,
    /// `vertex_act[g][i]` = image of vertex i under g.
    pub vertex_act: Vec<Vec<usize>>,
    /// `copy_act[g][p]` = image position of facet-copy position p under g.
    pub copy_act: Vec<Vec<usize>>,
}

impl Action {
    /// Builds and fully validates an action.
    pub fn new(
        complex: Wsc,
        group: Group,
        vertex_act: Vec<Vec<usize>>,
        copy_act: Vec<Vec<usize>>,
    ) -> Result<Action> {
        let a = Action {
            complex,
            group,
            vertex_act,
            copy_act,
        };
        let report = a.validate();
        if report.is_valid() {
            Ok(a)
        } else {
            Err(Error::InvalidAction(report.summary()))
        }
    }

    /// Trivial group acting trivially.
    pub fn trivial(complex: Wsc) -> Result<Action> {
        let nv = complex.vertex_count();
        let m = complex.facet_multiset().len();
        Action::new(
            complex,
            Group::trivial(),
            vec![(0..nv).collect()],
            vec![(0..m).collect()],
        )
    }

    /// Lifts vertex permutations to the unique copy action, which exists
    /// when every facet has weight one.
    pub fn from_vertex_act(complex: Wsc, group: Group, vertex_act: Vec<Vec<usize>>) -> Result<Action> {
        let fm = complex.facet_multiset();
        if fm.copies().iter().any(|c| c.copy > 0) {
            return Err(Error::Unsupported(
                "copy action is ambiguous on facets of weight > 1; supply copy_act explicitly".into(),
            ));
        }
        if vertex_act.len() != group.order() {
            return Err(Error::InvalidAction("vertex_act length != group order".into()));
        }
        let mut copy_act = Vec::with_capacity(group.order());
        for va in &vertex_act {
            let mut row = Vec::with_capacity(fm.len());
            for c in fm.copies() {
                let image = c.facet.map(|x| {
                    *va.get(x).unwrap_or(&usize::MAX)
                });
                let pos = fm.position(&image, 0).ok_or_else(|| {
                    Error::InvalidAction(format!("image {image} of facet {} is not a facet", c.facet))
                })?;
                row.push(pos);
            }
            copy_act.push(row);
        }
        Action::new(complex, group, vertex_act, copy_act)
    }

    /// S_{n+1} permuting the full simplex on `{0, ..., n}`.
    pub fn symmetric_on_simplex(n: usize) -> Result<Action> {
        let group = Group::symmetric(n + 1)?;
        let vertex_act = lex_permutations(n + 1);
        Action::from_vertex_act(Wsc::simplex(n), group, vertex_act)
    }

    /// C_len rotating the circle with `len` vertices.
    pub fn rotation_circle(len: usize) -> Result<Action> {
        let group = Group::cyclic(len)?;
        let vertex_act = (0..len).map(|g| (0..len).map(|x| (x + g) % len).collect()).collect();
        Action::from_vertex_act(Wsc::circle(len)?, group, vertex_act)
    }

    /// C₂ reflecting the line with n edges through its midpoint (x ↦ n−x).
    pub fn reflection_line(n: usize) -> Result<Action> {
        let group = Group::cyclic(2)?;
        let vertex_act = vec![(0..=n).collect(), (0..=n).rev().collect()];
        Action::from_vertex_act(Wsc::line(n)?, group, vertex_act)
    }

    /// C₂ on the weight-two edge, swapping the vertices; `swap_copies`
    /// selects whether the generator also exchanges the two copies (the free
    /// refinement) or fixes them.
    pub fn swap_double_edge(swap_copies: bool) -> Result<Action> {
        let copy_swap = if swap_copies { vec![1, 0] } else { vec![0, 1] };
        Action::new(
            Wsc::double_edge(),
            Group::cyclic(2)?,
            vec![vec![0, 1], vec![1, 0]],
            vec![vec![0, 1], copy_swap],
        )
    }

    /// G acting on its own Cayley complex for generating set `gens` by left
    /// translation. Copies of a weight-two pair {a, b} (a < b) are ordered
    /// directed edges: copy 0 = (a, b), copy 1 = (b, a); a weight-one pair's
    /// single copy is its present direction.
    pub fn cayley_translation(group: Group, gens: &[usize]) -> Result<Action> {
        let complex = Wsc::cayley(group.mul_table(), gens)?;
        let k = group.order();
        let edges = cayley_directed_edges(&group, gens, &complex);
        let vertex_act: Vec<Vec<usize>> = (0..k).map(|g| (0..k).map(|h| group.mul(g, h)).collect()).collect();
        let copy_act: Vec<Vec<usize>> = (0..k)
            .map(|g| {
                edges
                    .iter()
                    .map(|&(u, v)| {
                        cayley_edge_position(&complex, group.mul(g, u), group.mul(g, v))
                            .expect("translated edge is an edge")
                    })
                    .collect()
            })
            .collect();
        Action::new(complex, group, vertex_act, copy_act)
    }

    /// The action restricted to a subgroup, given by parent element ids.
    pub fn restrict(&self, elems: &[usize]) -> Result<Action> {
        let (group, ids) = self.group.subgroup(elems)?;
        Action::new(
            self.complex.clone(),
            group,
            ids.iter().map(|&g| self.vertex_act[g].clone()).collect(),
            ids.iter().map(|&g| self.copy_act[g].clone()).collect(),
        )
    }

    /// Checks permutation shape, identity, homomorphism, weight
    /// preservation, and collapse linearity.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        let k = self.group.order();
        let nv = self.complex.vertex_count();
        let fm = self.complex.facet_multiset();
        let m = fm.len();
        if self.vertex_act.len() != k || self.copy_act.len() != k {
            report.push("shape", "one table per group element required");
            return report;
        }
        for g in 0..k {
            if self.vertex_act[g].len() != nv || !is_permutation(&self.vertex_act[g]) {
                report.push("permutation", format!("vertex_act[{g}] is not a permutation of the vertices"));
            }
            if self.copy_act[g].len() != m || !is_permutation(&self.copy_act[g]) {
                report.push("permutation", format!("copy_act[{g}] is not a permutation of the copy positions"));
            }
        }
        if !report.is_valid() {
            return report;
        }
        for i in 0..nv {
            if self.vertex_act[0][i] != i {
                report.push("identity", format!("identity moves vertex {i}"));
            }
        }
        for p in 0..m {
            if self.copy_act[0][p] != p {
                report.push("identity", format!("identity moves copy position {p}"));
            }
        }
        for g in 0..k {
            for h in 0..k {
                let gh = self.group.mul(g, h);
                if (0..nv).any(|i| self.vertex_act[gh][i] != self.vertex_act[g][self.vertex_act[h][i]]) {
                    report.push("homomorphism", format!("vertex_act breaks at ({g},{h})"));
                }
                if (0..m).any(|p| self.copy_act[gh][p] != self.copy_act[g][self.copy_act[h][p]]) {
                    report.push("homomorphism", format!("copy_act breaks at ({g},{h})"));
                }
            }
        }
        for g in 0..k {
            for (s, w) in self.complex.stored_weights() {
                let image = s.map(|x| self.vertex_act[g][x]);
                let wi = self.complex.weight(&image);
                if wi != w {
                    report.push(
                        "weight-preservation",
                        format!("element {g} maps {s} (weight {w}) to {image} (weight {wi})"),
                    );
                }
            }
        }
        for g in 0..k {
            for p in 0..m {
                let src = fm.copy(p);
                let dst = fm.copy(self.copy_act[g][p]);
                let image = src.facet.map(|x| self.vertex_act[g][x]);
                if dst.facet != image {
                    report.push(
                        "collapse-linearity",
                        format!(
                            "element {g} sends copy position {p} over {} to a copy over {}, but the vertex action gives {image}",
                            src.facet, dst.facet
                        ),
                    );
                }
            }
        }
        report
    }

    // ----- orbit utilities -----

    pub fn vertex_orbit(&self, i: usize) -> Vec<usize> {
        let mut orb: Vec<usize> = (0..self.group.order()).map(|g| self.vertex_act[g][i]).collect();
        orb.sort_unstable();
        orb.dedup();
        orb
    }

    /// Orbit partition of the vertices, each orbit sorted, orbits ordered by
    /// smallest member.
    pub fn vertex_orbits(&self) -> Vec<Vec<usize>> {
        partition_by_orbits(self.complex.vertex_count(), |g, i| self.vertex_act[g][i], self.group.order())
    }

    /// Orbit partition of the facet-copy positions.
    pub fn copy_orbits(&self) -> Vec<Vec<usize>> {
        let m = self.complex.facet_multiset().len();
        partition_by_orbits(m, |g, p| self.copy_act[g][p], self.group.order())
    }

    /// Elements fixing vertex i.
    pub fn vertex_stabilizer(&self, i: usize) -> Vec<usize> {
        (0..self.group.order()).filter(|&g| self.vertex_act[g][i] == i).collect()
    }

    /// Smallest element carrying vertex `from` to vertex `to`, if any.
    pub fn vertex_transporter(&self, from: usize, to: usize) -> Option<usize> {
        (0..self.group.order()).find(|&g| self.vertex_act[g][from] == to)
    }
}

fn is_permutation(xs: &[usize]) -> bool {
    let mut seen = vec![false; xs.len()];
    for &x in xs {
        if x >= xs.len() || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

fn partition_by_orbits(count: usize, act: impl Fn(usize, usize) -> usize, order: usize) -> Vec<Vec<usize>> {
    let mut assigned = vec![false; count];
    let mut orbits = Vec::new();
    for x in 0..count {
        if assigned[x] {
            continue;
        }
        let mut orb: Vec<usize> = (0..order).map(|g| act(g, x)).collect();
        orb.sort_unstable();
        orb.dedup();
        for &y in &orb {
            assigned[y] = true;
        }
        orbits.push(orb);
    }
    orbits
}

// ----- classification -----

/// True when no non-identity element fixes any facet copy.
/// The directed edge carried by each copy position of a Cayley complex:
/// copies of a weight-two pair {a, b} (a < b) are (a, b) then (b, a); a
/// weight-one pair's single copy is its present direction.
pub fn cayley_directed_edges(group: &Group, gens: &[usize], complex: &Wsc) -> Vec<(usize, usize)> {
    let fm = complex.facet_multiset();
    let fwd = |x: usize, y: usize| gens.iter().any(|&s| group.mul(x, s) == y);
    (0..fm.len())
        .map(|p| {
            let c = fm.copy(p);
            let v = c.facet.vertices();
            let (a, b) = (v[0], v[1]);
            match (complex.weight(&c.facet), c.copy) {
                (2, 0) => (a, b),
                (2, 1) => (b, a),
                (1, 0) => {
                    if fwd(a, b) {
                        (a, b)
                    } else {
                        (b, a)
                    }
                }
                _ => unreachable!("cayley facets have weight 1 or 2 and copies within weight"),
            }
        })
        .collect()
}

/// Copy position of a Cayley complex carrying the directed edge (u, v).
pub fn cayley_edge_position(complex: &Wsc, u: usize, v: usize) -> Option<usize> {
    let facet = SimplexSet::new([u, v]).ok()?;
    let copy = match complex.weight(&facet) {
        1 => 0,
        2 => usize::from(u > v),
        _ => return None,
    };
    complex.facet_multiset().position(&facet, copy)
}

pub fn is_free(a: &Action) -> bool {
    free_violation(a).is_none()
}

/// A witness `(g, copy position)` with g non-identity fixing the copy, if
/// the action is not free.
pub fn free_violation(a: &Action) -> Option<(usize, usize)> {
    let m = a.complex.facet_multiset().len();
    (1..a.group.order())
        .flat_map(|g| (0..m).map(move |p| (g, p)))
        .find(|&(g, p)| a.copy_act[g][p] == p)
}

/// All bijections p of the vertex set with p(i) in the orbit of i, i.e. the
/// vertex-image patterns of the covering tuples.
pub fn pointwise_realizable_bijections(a: &Action) -> Vec<Vec<usize>> {
    let nv = a.complex.vertex_count();
    let orbits: Vec<Vec<usize>> = (0..nv).map(|i| a.vertex_orbit(i)).collect();
    let mut out = Vec::new();
    let mut used = vec![false; nv];
    let mut cur = vec![0usize; nv];
    fn dfs(
        i: usize,
        nv: usize,
        orbits: &[Vec<usize>],
        used: &mut [bool],
        cur: &mut [usize],
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == nv {
            out.push(cur.to_vec());
            return;
        }
        for &v in &orbits[i] {
            if !used[v] {
                used[v] = true;
                cur[i] = v;
                dfs(i + 1, nv, orbits, used, cur, out);
                used[v] = false;
            }
        }
    }
    dfs(0, nv, &orbits, &mut used, &mut cur, &mut out);
    out
}

/// Smallest element realizing a full vertex-image pattern, if any.
pub fn element_realizing(a: &Action, pattern: &[usize]) -> Option<usize> {
    let nv = a.complex.vertex_count();
    (0..a.group.order()).find(|&g| (0..nv).all(|i| a.vertex_act[g][i] == pattern[i]))
}

/// True when every covering tuple's vertex-image pattern is realized by a
/// single group element.
pub fn is_blending(a: &Action) -> bool {
    pointwise_realizable_bijections(a)
        .iter()
        .all(|p| element_realizing(a, p).is_some())
}

/// Number of covering tuples (g₀, …, g_n) whose vertex images are a
/// bijection: each realizable pattern accounts for one choice of gᵢ per
/// vertex-stabilizer coset.
pub fn covering_tuple_count(a: &Action) -> Result<u64> {
    let nv = a.complex.vertex_count();
    let patterns = pointwise_realizable_bijections(a).len() as u64;
    let mut total = patterns;
    for i in 0..nv {
        let stab = a.vertex_stabilizer(i).len() as u64;
        total = total
            .checked_mul(stab)
            .ok_or_else(|| Error::Unsupported("covering tuple count overflows u64".into()))?;
    }
    Ok(total)
}

/// True when for every covering tuple (g₀, …, g_n) some single g agrees
/// with each gᵢ on vertex i and on the copy positions incident to i.
///
/// Tuples are enumerated up to the per-vertex equivalence
/// gᵢ ~ gᵢ' iff they share the vertex image of i and the copy action on the
/// copies incident to i; this is the only data of gᵢ the condition sees.
pub fn is_strongly_blending(a: &Action) -> bool {
    let k = a.group.order();
    let nv = a.complex.vertex_count();
    let fm = a.complex.facet_multiset();
    let incident: Vec<Vec<usize>> = (0..nv).map(|i| fm.incident_positions(i)).collect();
    assert!(k <= 128, "class masks assume group order <= 128");

    // Per vertex: distinct classes (image, incident restriction) with the
    // mask of elements realizing the class.
    let mut classes: Vec<Vec<(usize, Vec<usize>, u128)>> = Vec::with_capacity(nv);
    for i in 0..nv {
        let mut cl: Vec<(usize, Vec<usize>, u128)> = Vec::new();
        for g in 0..k {
            let img = a.vertex_act[g][i];
            let restr: Vec<usize> = incident[i].iter().map(|&x| a.copy_act[g][x]).collect();
            match cl.iter_mut().find(|(im, r, _)| *im == img && *r == restr) {
                Some((_, _, mask)) => *mask |= 1u128 << g,
                None => cl.push((img, restr, 1u128 << g)),
            }
        }
        classes.push(cl);
    }

    // DFS over class choices whose vertex images stay distinct (covering
    // patterns); each complete choice must admit one element matching every
    // chosen class.
    fn dfs(i: usize, nv: usize, classes: &[Vec<(usize, Vec<usize>, u128)>], used: &mut [bool], mask: u128) -> bool {
        if i == nv {
            return mask != 0;
        }
        for (img, _, class_mask) in &classes[i] {
            if used[*img] {
                continue;
            }
            used[*img] = true;
            let ok = dfs(i + 1, nv, classes, used, mask & class_mask);
            used[*img] = false;
            if !ok {
                return false;
            }
        }
        true
    }
    let mut used = vec![false; nv];
    dfs(0, nv, &classes, &mut used, u128::MAX)
}

// ----- z-maps -----

/// A copy labeling z: facet copies → G with z(g·x) = g·z(x).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZMap {
    /// `values[p]` = group element labeling copy position p.
    pub values: Vec<usize>,
}

impl ZMap {
    /// Verifies equivariance against an action.
    pub fn check(&self, a: &Action) -> Result<()> {
        let m = a.complex.facet_multiset().len();
        if self.values.len() != m {
            return Err(Error::InvalidAction("copy labeling has wrong length".into()));
        }
        for g in 0..a.group.order() {
            for p in 0..m {
                let lhs = self.values[a.copy_act[g][p]];
                let rhs = a.group.mul(g, self.values[p]);
                if lhs != rhs {
                    return Err(Error::InvalidAction(format!(
                        "copy labeling not equivariant at element {g}, position {p}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds the equivariant copy labeling of a free action: the smallest
/// position in each copy orbit is labeled with the identity, and its image
/// under g is labeled g. Fails with a witness when the action is not free.
pub fn z_map(a: &Action) -> Result<ZMap> {
    if let Some((g, p)) = free_violation(a) {
        return Err(Error::NotFree { element: g, copy: p });
    }
    let m = a.complex.facet_multiset().len();
    let k = a.group.order();
    let mut values = vec![usize::MAX; m];
    for rep in 0..m {
        if values[rep] != usize::MAX {
            continue;
        }
        for g in 0..k {
            let q = a.copy_act[g][rep];
            debug_assert!(values[q] == usize::MAX, "freeness guarantees one visit");
            values[q] = g;
        }
    }
    let z = ZMap { values };
    z.check(a)?;
    Ok(z)
}

// ----- free refinement -----

/// Multiplies every facet weight by |G| and extends the action so that g
/// sends lane h of a copy to lane g·h of the copy's image. The result is
/// always free: a fixed refined copy forces g·h = h.
pub fn free_refinement(a: &Action) -> Result<Action> {
    let k = a.group.order();
    let refined = a.complex.scale_weights(k as u64)?;
    let fm = a.complex.facet_multiset();
    let rfm = refined.facet_multiset();
    let mut copy_act = Vec::with_capacity(k);
    for g in 0..k {
        let mut row = Vec::with_capacity(rfm.len());
        for rp in 0..rfm.len() {
            let rc = rfm.copy(rp);
            let base_copy = rc.copy / k;
            let lane = rc.copy % k;
            let p = fm.position(&rc.facet, base_copy).expect("same facets");
            let q = a.copy_act[g][p];
            let dst = fm.copy(q);
            let dst_pos = rfm
                .position(&dst.facet, dst.copy * k + a.group.mul(g, lane))
                .expect("within scaled weight");
            row.push(dst_pos);
        }
        copy_act.push(row);
    }
    Action::new(refined, a.group.clone(), a.vertex_act.clone(), copy_act)
}
