//! Dense complex tensors on the vertex sites of a complex.
//!
//! A global tensor lives in ℂ^{d₀}⊗⋯⊗ℂ^{d_n} and is stored row-major (last
//! site fastest). A group acting on the complex acts on the global space by
//! permuting the tensor factors along the vertex action; invariant tensors
//! are the fixed points. Elementary sums are the seed format every
//! decomposition construction starts from.

use crate::group::Action;
use crate::{Error, Result};
use num_complex::Complex64;
use rand::Rng;

/// Row-major flat index of a multi-index.
pub fn flat_of(idx: &[usize], dims: &[usize]) -> usize {
    debug_assert_eq!(idx.len(), dims.len());
    let mut flat = 0;
    for (x, d) in idx.iter().zip(dims) {
        debug_assert!(x < d);
        flat = flat * d + x;
    }
    flat
}

/// Multi-index of a row-major flat index.
pub fn idx_of(mut flat: usize, dims: &[usize]) -> Vec<usize> {
    let mut idx = vec![0usize; dims.len()];
    for (slot, d) in idx.iter_mut().zip(dims).rev() {
        *slot = flat % d;
        flat /= d;
    }
    idx
}

/// A dense complex tensor with one axis per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalTensor {
    pub dims: Vec<usize>,
    /// Row-major entries, length Π dims.
    pub entries: Vec<Complex64>,
}

impl GlobalTensor {
    pub fn new(dims: Vec<usize>, entries: Vec<Complex64>) -> Result<GlobalTensor> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::DimMismatch("dims must be nonempty and positive".into()));
        }
        let count: usize = dims.iter().product();
        if entries.len() != count {
            return Err(Error::DimMismatch(format!(
                "expected {count} entries for dims {dims:?}, got {}",
                entries.len()
            )));
        }
        Ok(GlobalTensor { dims, entries })
    }

    pub fn zeros(dims: Vec<usize>) -> GlobalTensor {
        let count: usize = dims.iter().product();
        GlobalTensor {
            dims,
            entries: vec![Complex64::new(0.0, 0.0); count],
        }
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        flat_of(idx, &self.dims)
    }

    pub fn multi_index(&self, flat: usize) -> Vec<usize> {
        idx_of(flat, &self.dims)
    }

    pub fn get(&self, idx: &[usize]) -> Complex64 {
        self.entries[self.flat_index(idx)]
    }

    pub fn set(&mut self, idx: &[usize], value: Complex64) {
        let f = self.flat_index(idx);
        self.entries[f] = value;
    }

    pub fn max_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm distance; errors on shape mismatch.
    pub fn max_diff(&self, other: &GlobalTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch(format!(
                "dims {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &GlobalTensor) -> Result<GlobalTensor> {
        if self.dims != other.dims {
            return Err(Error::DimMismatch("adding tensors of different shape".into()));
        }
        Ok(GlobalTensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: Complex64) -> GlobalTensor {
        GlobalTensor {
            dims: self.dims.clone(),
            entries: self.entries.iter().map(|z| z * c).collect(),
        }
    }
}

pub(crate) fn check_dims_for_action(a: &Action, dims: &[usize]) -> Result<()> {
    let nv = a.complex.vertex_count();
    if dims.len() != nv {
        return Err(Error::DimMismatch(format!(
            "tensor has {} axes but the complex has {nv} vertices",
            dims.len()
        )));
    }
    for g in 0..a.group.order() {
        for m in 0..nv {
            if dims[a.vertex_act[g][m]] != dims[m] {
                return Err(Error::DimMismatch(format!(
                    "vertices {m} and {} share an orbit but have dims {} and {}",
                    a.vertex_act[g][m], dims[m], dims[a.vertex_act[g][m]]
                )));
            }
        }
    }
    Ok(())
}

/// Left action of a group element on the global tensor: the factor at site m
/// moves to site g·m, i.e. the output entry at multi-index (i₀, …, i_n)
/// is the input entry whose m-th slot is i_{g·m}.
pub fn act(a: &Action, g: usize, v: &GlobalTensor) -> Result<GlobalTensor> {
    check_dims_for_action(a, &v.dims)?;
    if g >= a.group.order() {
        return Err(Error::InvalidGroup(format!("element {g} out of range")));
    }
    let nv = v.dims.len();
    let mut out = GlobalTensor::zeros(v.dims.clone());
    let mut src = vec![0usize; nv];
    for flat in 0..v.entries.len() {
        let idx = v.multi_index(flat);
        for m in 0..nv {
            src[m] = idx[a.vertex_act[g][m]];
        }
        out.entries[flat] = v.entries[flat_of(&src, &v.dims)];
    }
    Ok(out)
}

/// Largest max-norm deviation ‖act(g, v) − v‖ over all group elements.
pub fn invariance_deviation(a: &Action, v: &GlobalTensor) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for g in 0..a.group.order() {
        let moved = act(a, g, v)?;
        worst = worst.max(moved.max_diff(v)?);
    }
    Ok(worst)
}

pub fn is_invariant(a: &Action, v: &GlobalTensor, tol: f64) -> Result<bool> {
    Ok(invariance_deviation(a, v)? <= tol)
}

/// Projection onto the invariant subspace: (1/|G|) Σ_g act(g, v).
pub fn symmetrize(a: &Action, v: &GlobalTensor) -> Result<GlobalTensor> {
    let k = a.group.order();
    let mut sum = GlobalTensor::zeros(v.dims.clone());
    for g in 0..k {
        sum = sum.add(&act(a, g, v)?)?;
    }
    Ok(sum.scale(Complex64::new(1.0 / k as f64, 0.0)))
}

/// A finite sum of elementary tensors: Σ_j w_j^{[0]}⊗⋯⊗w_j^{[n]}.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementarySum {
    pub dims: Vec<usize>,
    /// terms[j][site] is a vector of length dims[site].
    pub terms: Vec<Vec<Vec<Complex64>>>,
}

impl ElementarySum {
    pub fn new(dims: Vec<usize>, terms: Vec<Vec<Vec<Complex64>>>) -> Result<ElementarySum> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::DimMismatch("dims must be nonempty and positive".into()));
        }
        for (j, term) in terms.iter().enumerate() {
            if term.len() != dims.len() {
                return Err(Error::DimMismatch(format!("term {j} has wrong arity")));
            }
            for (i, w) in term.iter().enumerate() {
                if w.len() != dims[i] {
                    return Err(Error::DimMismatch(format!(
                        "term {j}, site {i}: vector length {} != dim {}",
                        w.len(),
                        dims[i]
                    )));
                }
            }
        }
        Ok(ElementarySum { dims, terms })
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exact dense sum of the outer products, term order fixed.
    pub fn contract(&self) -> GlobalTensor {
        let mut out = GlobalTensor::zeros(self.dims.clone());
        for term in &self.terms {
            for flat in 0..out.entries.len() {
                let idx = idx_of(flat, &self.dims);
                let mut prod = Complex64::new(1.0, 0.0);
                for (i, &x) in idx.iter().enumerate() {
                    prod *= term[i][x];
                }
                out.entries[flat] += prod;
            }
        }
        out
    }
}

/// One term per nonzero entry: the coefficient on the first site's basis
/// vector, plain basis vectors elsewhere. Lossless.
pub fn basis_expansion(v: &GlobalTensor) -> ElementarySum {
    let nv = v.dims.len();
    let mut terms = Vec::new();
    for flat in 0..v.entries.len() {
        let c = v.entries[flat];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let idx = v.multi_index(flat);
        let mut term = Vec::with_capacity(nv);
        for i in 0..nv {
            let mut w = vec![Complex64::new(0.0, 0.0); v.dims[i]];
            w[idx[i]] = if i == 0 { c } else { Complex64::new(1.0, 0.0) };
            term.push(w);
        }
        terms.push(term);
    }
    ElementarySum {
        dims: v.dims.clone(),
        terms,
    }
}

/// Uniform random complex entries in the square [−1, 1]².
pub fn random_tensor(dims: &[usize], rng: &mut impl Rng) -> GlobalTensor {
    let count: usize = dims.iter().product();
    GlobalTensor {
        dims: dims.to_vec(),
        entries: (0..count)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect(),
    }
}

/// Random tensor with at most `nonzeros` nonzero entries (sampled with
/// replacement, so collisions may reduce the count).
pub fn random_sparse_tensor(dims: &[usize], nonzeros: usize, rng: &mut impl Rng) -> GlobalTensor {
    let mut out = GlobalTensor::zeros(dims.to_vec());
    let count = out.entries.len();
    for _ in 0..nonzeros {
        let flat = rng.gen_range(0..count);
        out.entries[flat] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Wsc;
    use crate::group::Group;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn flat_and_multi_index_roundtrip() {
        let dims = [2usize, 3, 4];
        for flat in 0..24 {
            assert_eq!(flat_of(&idx_of(flat, &dims), &dims), flat);
        }
        assert_eq!(flat_of(&[1, 2, 3], &dims), 23);
        assert_eq!(idx_of(0, &dims), vec![0, 0, 0]);
    }

    #[test]
    fn identity_acts_trivially_and_swap_transposes() {
        let a = Action::from_vertex_act(
            Wsc::simplex(1),
            Group::cyclic(2).unwrap(),
            vec![vec![0, 1], vec![1, 0]],
        )
        .unwrap();
        let v = random_tensor(&[2, 2], &mut rng(1));
        assert_eq!(act(&a, 0, &v).unwrap(), v);
        let t = act(&a, 1, &v).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(t.get(&[i, j]), v.get(&[j, i]));
            }
        }
    }

    #[test]
    fn act_is_a_left_action() {
        let actions = vec![
            Action::rotation_circle(4).unwrap(),
            Action::symmetric_on_simplex(2).unwrap(),
            Action::reflection_line(3).unwrap(),
        ];
        for a in &actions {
            let dims = vec![2; a.complex.vertex_count()];
            let v = random_tensor(&dims, &mut rng(7));
            for g in 0..a.group.order() {
                for h in 0..a.group.order() {
                    let lhs = act(a, g, &act(a, h, &v).unwrap()).unwrap();
                    let rhs = act(a, a.group.mul(g, h), &v).unwrap();
                    // Pure entry permutations compose exactly.
                    assert_eq!(lhs, rhs, "left action law at ({g},{h})");
                }
            }
        }
    }

    #[test]
    fn rotation_has_order_three() {
        let a = Action::rotation_circle(3).unwrap();
        let v = random_tensor(&[2, 2, 2], &mut rng(3));
        let mut w = v.clone();
        for _ in 0..3 {
            w = act(&a, 1, &w).unwrap();
        }
        assert_eq!(w, v);
    }

    #[test]
    fn symmetrize_projects_onto_invariants() {
        let a = Action::rotation_circle(3).unwrap();
        let v = random_tensor(&[2, 2, 2], &mut rng(5));
        assert!(!is_invariant(&a, &v, 1e-9).unwrap());
        let s = symmetrize(&a, &v).unwrap();
        assert!(is_invariant(&a, &s, 1e-12).unwrap());
        let ss = symmetrize(&a, &s).unwrap();
        assert!(s.max_diff(&ss).unwrap() <= 1e-12);
    }

    #[test]
    fn all_ones_is_invariant() {
        let a = Action::symmetric_on_simplex(2).unwrap();
        let ones = GlobalTensor::new(vec![2, 2, 2], vec![Complex64::new(1.0, 0.0); 8]).unwrap();
        assert!(is_invariant(&a, &ones, 0.0).unwrap());
    }

    #[test]
    fn orbit_dim_mismatch_is_rejected() {
        let a = Action::rotation_circle(3).unwrap();
        let v = random_tensor(&[2, 2, 3], &mut rng(9));
        assert!(matches!(act(&a, 1, &v), Err(Error::DimMismatch(_))));
    }

    #[test]
    fn basis_expansion_roundtrip_is_exact() {
        let v = random_tensor(&[2, 3, 2], &mut rng(11));
        let s = basis_expansion(&v);
        assert_eq!(s.len(), 12);
        let back = s.contract();
        assert_eq!(back.dims, v.dims);
        for (a, b) in back.entries.iter().zip(&v.entries) {
            assert_eq!(a, b);
        }
        assert!(basis_expansion(&GlobalTensor::zeros(vec![2, 2])).is_empty());
    }

    #[test]
    fn cancelling_terms_contract_to_zero() {
        let one = Complex64::new(1.0, 0.0);
        let a = vec![one, 2.0 * one];
        let b = vec![3.0 * one, 4.0 * one];
        let neg: Vec<_> = a.iter().map(|z| -z).collect();
        let s = ElementarySum::new(vec![2, 2], vec![vec![a, b.clone()], vec![neg, b]]).unwrap();
        assert_eq!(s.contract().max_norm(), 0.0);
    }

    #[test]
    fn single_term_is_outer_product() {
        let one = Complex64::new(1.0, 0.0);
        let s = ElementarySum::new(
            vec![2, 2],
            vec![vec![vec![one, Complex64::new(0.0, 0.0)], vec![Complex64::new(0.0, 0.0), one]]],
        )
        .unwrap();
        let t = s.contract();
        assert_eq!(t.get(&[0, 1]), one);
        assert_eq!(t.get(&[0, 0]), Complex64::new(0.0, 0.0));
    }
}
