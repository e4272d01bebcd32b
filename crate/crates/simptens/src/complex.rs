//! Weighted simplicial complexes.
//!
//! A complex on vertex set `{0, ..., n}` assigns a weight in ℕ to every
//! subset, with only finitely many nonzero. Two axioms make it a weighted
//! simplicial complex: the weight of a subset divides the weight of every
//! superset with nonzero weight (so support is closed under taking subsets),
//! and every singleton carries nonzero weight. Facets are the
//! inclusion-maximal sets with nonzero weight; the facet multiset repeats
//! each facet as many times as its weight, and those copies are what tensor
//! decompositions index over.
//!
//! Storage is sparse: only explicitly set weights are kept, and the weight of
//! an unlisted set is derived as the gcd of the weights of its stored
//! supersets (zero when it has none). The empty set is ignored throughout.

use crate::report::ValidationReport;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// A simplex: a nonempty set of vertices, stored sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SimplexSet(Vec<usize>);

impl SimplexSet {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut v: Vec<usize> = vertices.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            return Err(Error::InvalidComplex("empty vertex set".into()));
        }
        Ok(SimplexSet(v))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, vertex: usize) -> bool {
        self.0.binary_search(&vertex).is_ok()
    }

    pub fn is_subset_of(&self, other: &SimplexSet) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn max_vertex(&self) -> usize {
        *self.0.last().expect("nonempty")
    }

    /// All nonempty subsets, in lexicographic order.
    pub fn subsets(&self) -> Vec<SimplexSet> {
        let k = self.0.len();
        let mut out = Vec::with_capacity((1usize << k) - 1);
        for mask in 1usize..(1 << k) {
            let verts: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect();
            out.push(SimplexSet(verts));
        }
        out.sort();
        out
    }

    /// Image under a vertex map.
    pub fn map(&self, f: impl Fn(usize) -> usize) -> SimplexSet {
        let mut v: Vec<usize> = self.0.iter().map(|&x| f(x)).collect();
        v.sort_unstable();
        v.dedup();
        SimplexSet(v)
    }
}

impl fmt::Display for SimplexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// One copy of a facet in the facet multiset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetCopy {
    pub facet: SimplexSet,
    /// Copy index within the facet, `0..weight(facet)`.
    pub copy: usize,
}

/// The facet multiset in canonical order: facets sorted lexicographically by
/// vertex set, copies in ascending order. Positions in this list are the
/// data contract for copy permutations and assignment digits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetMultiset {
    copies: Vec<FacetCopy>,
}

impl FacetMultiset {
    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn copies(&self) -> &[FacetCopy] {
        &self.copies
    }

    pub fn copy(&self, pos: usize) -> &FacetCopy {
        &self.copies[pos]
    }

    /// Position of a given copy, if present.
    pub fn position(&self, facet: &SimplexSet, copy: usize) -> Option<usize> {
        self.copies.iter().position(|c| &c.facet == facet && c.copy == copy)
    }

    /// Positions of the copies whose facet contains `vertex`, ascending.
    pub fn incident_positions(&self, vertex: usize) -> Vec<usize> {
        (0..self.copies.len()).filter(|&p| self.copies[p].facet.contains(vertex)).collect()
    }

    /// Restriction to the copies incident to `vertex`.
    pub fn incident(&self, vertex: usize) -> FacetMultiset {
        FacetMultiset {
            copies: self
                .incident_positions(vertex)
                .into_iter()
                .map(|p| self.copies[p].clone())
                .collect(),
        }
    }
}

/// A weighted simplicial complex on vertices `{0, ..., n}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wsc {
    n: usize,
    weights: BTreeMap<SimplexSet, u64>,
}

impl Wsc {
    /// Builds a complex from explicit weights. Structural errors (vertices
    /// out of range, zero entries) are rejected here; the divisibility and
    /// singleton axioms are checked by [`Wsc::validate`].
    pub fn new(n: usize, weights: impl IntoIterator<Item = (SimplexSet, u64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (s, w) in weights {
            if s.max_vertex() > n {
                return Err(Error::InvalidComplex(format!(
                    "simplex {s} exceeds vertex range 0..={n}"
                )));
            }
            if w == 0 {
                return Err(Error::InvalidComplex(format!(
                    "zero weight stored for {s}; omit zero-weight simplices"
                )));
            }
            if map.insert(s.clone(), w).is_some() {
                return Err(Error::InvalidComplex(format!("duplicate simplex {s}")));
            }
        }
        Ok(Wsc { n, weights: map })
    }

    /// Largest vertex id; the vertex set is `{0, ..., n}`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn vertex_count(&self) -> usize {
        self.n + 1
    }

    /// Stored weights, sorted by simplex.
    pub fn stored_weights(&self) -> impl Iterator<Item = (&SimplexSet, u64)> {
        self.weights.iter().map(|(s, &w)| (s, w))
    }

    /// Weight of a simplex: the stored value, or the gcd of the weights of
    /// all stored supersets (zero if there are none).
    pub fn weight(&self, s: &SimplexSet) -> u64 {
        if let Some(&w) = self.weights.get(s) {
            return w;
        }
        let mut g = 0u64;
        for (t, &w) in &self.weights {
            if s.is_subset_of(t) {
                g = gcd(g, w);
            }
        }
        g
    }

    /// Checks the two complex axioms plus coherence of stored entries.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::new();
        if self.weights.is_empty() {
            report.push("singleton-support", "complex has no simplices at all");
            return report;
        }
        // Support closure: every subset of a stored simplex.
        let mut closure: BTreeMap<SimplexSet, u64> = BTreeMap::new();
        for (s, _) in self.weights.iter() {
            for sub in s.subsets() {
                let w = self.weight(&sub);
                closure.insert(sub, w);
            }
        }
        for i in 0..=self.n {
            let singleton = SimplexSet::new([i]).expect("nonempty");
            if self.weight(&singleton) == 0 {
                report.push("singleton-support", format!("vertex {i} has weight 0"));
            }
        }
        // Divisibility along covering pairs S ⊂ S ∪ {v}; transitivity covers the rest.
        for (s, &ws) in &closure {
            for v in 0..=self.n {
                if s.contains(v) {
                    continue;
                }
                let mut verts = s.vertices().to_vec();
                verts.push(v);
                let sup = SimplexSet::new(verts).expect("nonempty");
                let wsup = match closure.get(&sup) {
                    Some(&w) => w,
                    None => continue,
                };
                if wsup == 0 {
                    continue;
                }
                if ws == 0 {
                    report.push(
                        "monotone-support",
                        format!("{s} has weight 0 but superset {sup} has weight {wsup}"),
                    );
                } else if wsup % ws != 0 {
                    report.push(
                        "divisibility",
                        format!("weight({s}) = {ws} does not divide weight({sup}) = {wsup}"),
                    );
                }
            }
        }
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let report = self.validate();
        if report.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidComplex(report.summary()))
        }
    }

    /// Inclusion-maximal simplices with nonzero weight, sorted.
    pub fn facets(&self) -> Vec<SimplexSet> {
        self.weights
            .keys()
            .filter(|s| {
                !self
                    .weights
                    .keys()
                    .any(|t| t != *s && s.is_subset_of(t))
            })
            .cloned()
            .collect()
    }

    /// The facet multiset in canonical order.
    pub fn facet_multiset(&self) -> FacetMultiset {
        let mut copies = Vec::new();
        for facet in self.facets() {
            let w = self.weight(&facet);
            for copy in 0..w as usize {
                copies.push(FacetCopy {
                    facet: facet.clone(),
                    copy,
                });
            }
        }
        FacetMultiset { copies }
    }

    /// Copies incident to one vertex, in canonical order.
    pub fn incident(&self, vertex: usize) -> Result<FacetMultiset> {
        if vertex > self.n {
            return Err(Error::InvalidComplex(format!(
                "vertex {vertex} out of range 0..={}",
                self.n
            )));
        }
        self.ensure_valid()?;
        Ok(self.facet_multiset().incident(vertex))
    }

    /// Connectivity of the neighbor relation: i ~ j when some facet contains
    /// both. Demanded by every decomposition construction.
    pub fn is_connected(&self) -> bool {
        let facets = self.facets();
        if facets.is_empty() {
            return self.n == 0;
        }
        let mut seen = vec![false; self.n + 1];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for f in &facets {
                if f.contains(i) {
                    for &j in f.vertices() {
                        if !seen[j] {
                            seen[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
        }
        seen.iter().all(|&b| b)
    }

    /// Multiplies every facet weight by `m`. Weights of lower simplices are
    /// kept as stored: they still divide the scaled facet weights.
    pub fn scale_weights(&self, m: u64) -> Result<Wsc> {
        if m == 0 {
            return Err(Error::InvalidComplex("scale factor must be nonzero".into()));
        }
        self.ensure_valid()?;
        let facets = self.facets();
        let mut weights = self.weights.clone();
        for f in &facets {
            let w = weights.get_mut(f).expect("facet is stored");
            *w *= m;
        }
        Wsc::new(self.n, weights)
    }

    // ----- standard families -----

    /// Full simplex on `{0, ..., n}`: every subset has weight one.
    pub fn simplex(n: usize) -> Wsc {
        let all: Vec<usize> = (0..=n).collect();
        let top = SimplexSet::new(all).expect("nonempty");
        let weights = top.subsets().into_iter().map(|s| (s, 1)).collect::<Vec<_>>();
        Wsc::new(n, weights).expect("well-formed")
    }

    /// Complete graph on `{0, ..., n}`: all singletons and pairs, weight one.
    pub fn complete(n: usize) -> Wsc {
        let mut weights = Vec::new();
        for i in 0..=n {
            weights.push((SimplexSet::new([i]).unwrap(), 1));
            for j in (i + 1)..=n {
                weights.push((SimplexSet::new([i, j]).unwrap(), 1));
            }
        }
        Wsc::new(n, weights).expect("well-formed")
    }

    /// Line with edges {i, i+1} for i < n.
    pub fn line(n: usize) -> Result<Wsc> {
        if n == 0 {
            return Err(Error::InvalidComplex("line needs at least one edge".into()));
        }
        let mut weights = Vec::new();
        for i in 0..=n {
            weights.push((SimplexSet::new([i]).unwrap(), 1));
        }
        for i in 0..n {
            weights.push((SimplexSet::new([i, i + 1]).unwrap(), 1));
        }
        Wsc::new(n, weights)
    }

    /// Circle with `len` vertices and edges {i, i+1 mod len}; `len >= 3`.
    pub fn circle(len: usize) -> Result<Wsc> {
        if len < 3 {
            return Err(Error::InvalidComplex("circle needs at least 3 vertices".into()));
        }
        let mut weights = Vec::new();
        for i in 0..len {
            weights.push((SimplexSet::new([i]).unwrap(), 1));
            weights.push((SimplexSet::new([i, (i + 1) % len]).unwrap(), 1));
        }
        Wsc::new(len - 1, weights)
    }

    /// Two vertices joined by an edge of weight two.
    pub fn double_edge() -> Wsc {
        Wsc::new(
            1,
            [
                (SimplexSet::new([0]).unwrap(), 1),
                (SimplexSet::new([1]).unwrap(), 1),
                (SimplexSet::new([0, 1]).unwrap(), 2),
            ],
        )
        .expect("well-formed")
    }

    /// Cayley complex of a group given by its multiplication table, with
    /// generating set `gens` (element indices, identity excluded). Vertices
    /// are group elements. The pair {g, h} gets weight two when both directed
    /// edges (g, h) and (h, g) exist, weight one when exactly one does.
    ///
    /// The group is passed as a raw table so this module stays independent of
    /// group machinery; full validation of the table lives in [`crate::group`].
    pub fn cayley(mul: &[Vec<usize>], gens: &[usize]) -> Result<Wsc> {
        let k = mul.len();
        if k == 0 {
            return Err(Error::InvalidComplex("empty multiplication table".into()));
        }
        for row in mul {
            if row.len() != k || row.iter().any(|&x| x >= k) {
                return Err(Error::InvalidComplex("malformed multiplication table".into()));
            }
        }
        let mut gens_sorted = gens.to_vec();
        gens_sorted.sort_unstable();
        gens_sorted.dedup();
        if gens_sorted.len() != gens.len() {
            return Err(Error::InvalidComplex("duplicate generators".into()));
        }
        if gens_sorted.contains(&0) {
            return Err(Error::InvalidComplex("generating set must not contain the identity".into()));
        }
        if gens_sorted.iter().any(|&s| s >= k) {
            return Err(Error::InvalidComplex("generator index out of range".into()));
        }
        if gens_sorted.is_empty() && k > 1 {
            return Err(Error::InvalidComplex("empty generating set".into()));
        }
        // Closure check: the generators must reach every element.
        let mut reached = vec![false; k];
        reached[0] = true;
        let mut stack = vec![0usize];
        while let Some(g) = stack.pop() {
            for &s in &gens_sorted {
                let h = mul[g][s];
                if !reached[h] {
                    reached[h] = true;
                    stack.push(h);
                }
            }
        }
        if !reached.iter().all(|&b| b) {
            return Err(Error::InvalidComplex("set does not generate the group".into()));
        }
        let mut weights = Vec::new();
        for g in 0..k {
            weights.push((SimplexSet::new([g]).unwrap(), 1));
        }
        for g in 0..k {
            for h in (g + 1)..k {
                let fwd = gens_sorted.iter().any(|&s| mul[g][s] == h);
                let bwd = gens_sorted.iter().any(|&s| mul[h][s] == g);
                let w = (fwd as u64) + (bwd as u64);
                if w > 0 {
                    weights.push((SimplexSet::new([g, h]).unwrap(), w));
                }
            }
        }
        Wsc::new(k - 1, weights)
    }
}

/// Standalone validation entry point matching the CLI subcommand.
pub fn validate_wsc(w: &Wsc) -> ValidationReport {
    w.validate()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[usize]) -> SimplexSet {
        SimplexSet::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn simplex_families_are_valid() {
        for n in 0..5 {
            assert!(Wsc::simplex(n).validate().is_valid(), "simplex {n}");
        }
        for n in 1..5 {
            assert!(Wsc::complete(n).validate().is_valid(), "complete {n}");
            assert!(Wsc::line(n).unwrap().validate().is_valid(), "line {n}");
        }
        for len in 3..7 {
            assert!(Wsc::circle(len).unwrap().validate().is_valid(), "circle {len}");
        }
        assert!(Wsc::double_edge().validate().is_valid());
    }

    #[test]
    fn derived_weights_use_gcd() {
        // Two triangles sharing an edge, weights 2 and 4: the shared edge
        // derives weight gcd(2,4) = 2, an outer edge derives its facet weight.
        let w = Wsc::new(
            3,
            [(s(&[0, 1, 2]), 2), (s(&[1, 2, 3]), 4)],
        )
        .unwrap();
        assert_eq!(w.weight(&s(&[1, 2])), 2);
        assert_eq!(w.weight(&s(&[2, 3])), 4);
        assert_eq!(w.weight(&s(&[0])), 2);
        assert_eq!(w.weight(&s(&[0, 3])), 0);
        assert!(w.validate().is_valid());
    }

    #[test]
    fn divisibility_violation_is_reported() {
        let w = Wsc::new(
            2,
            [
                (s(&[0]), 1),
                (s(&[1]), 1),
                (s(&[2]), 1),
                (s(&[0, 1]), 3),
                (s(&[0, 1, 2]), 4),
            ],
        )
        .unwrap();
        let report = w.validate();
        assert!(report.has_kind("divisibility"));
    }

    #[test]
    fn missing_singleton_is_reported() {
        let w = Wsc::new(2, [(s(&[0, 1]), 1)]).unwrap();
        let report = w.validate();
        assert!(report.has_kind("singleton-support"));
    }

    #[test]
    fn facets_of_line_and_complete() {
        let line = Wsc::line(2).unwrap();
        assert_eq!(line.facets(), vec![s(&[0, 1]), s(&[1, 2])]);
        let k3 = Wsc::complete(3);
        assert_eq!(k3.facets().len(), 6);
    }

    #[test]
    fn multiset_order_and_incidence() {
        let de = Wsc::double_edge();
        let fm = de.facet_multiset();
        assert_eq!(fm.len(), 2);
        assert_eq!(fm.copy(0).copy, 0);
        assert_eq!(fm.copy(1).copy, 1);
        assert_eq!(fm.incident_positions(0), vec![0, 1]);

        let th4 = Wsc::circle(4).unwrap();
        let inc0 = th4.incident(0).unwrap();
        let facets: Vec<_> = inc0.copies().iter().map(|c| c.facet.clone()).collect();
        assert_eq!(facets, vec![s(&[0, 1]), s(&[0, 3])]);
    }

    #[test]
    fn connectivity() {
        assert!(Wsc::circle(5).unwrap().is_connected());
        let disconnected = Wsc::new(
            3,
            [
                (s(&[0, 1]), 1),
                (s(&[2, 3]), 1),
                (s(&[0]), 1),
                (s(&[1]), 1),
                (s(&[2]), 1),
                (s(&[3]), 1),
            ],
        )
        .unwrap();
        assert!(!disconnected.is_connected());
    }

    #[test]
    fn scaling_keeps_sub_simplex_weights() {
        let tri = Wsc::simplex(2);
        let scaled = tri.scale_weights(3).unwrap();
        assert_eq!(scaled.weight(&s(&[0, 1, 2])), 3);
        assert_eq!(scaled.weight(&s(&[0, 1])), 1);
        assert!(scaled.validate().is_valid());
        assert!(tri.scale_weights(0).is_err());
    }

    #[test]
    fn cayley_c2_is_double_edge() {
        let mul = vec![vec![0, 1], vec![1, 0]];
        let w = Wsc::cayley(&mul, &[1]).unwrap();
        assert_eq!(w, Wsc::double_edge());
    }

    #[test]
    fn cayley_rejects_non_generating_sets() {
        // C4 with {2}: reaches only {0, 2}.
        let mul = vec![
            vec![0, 1, 2, 3],
            vec![1, 2, 3, 0],
            vec![2, 3, 0, 1],
            vec![3, 0, 1, 2],
        ];
        assert!(Wsc::cayley(&mul, &[2]).is_err());
        assert!(Wsc::cayley(&mul, &[0]).is_err());
        assert!(Wsc::cayley(&mul, &[1]).is_ok());
    }
}
