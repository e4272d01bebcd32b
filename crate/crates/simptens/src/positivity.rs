//! Positivity-aware decompositions: operator-valued decompositions whose
//! locals are matrices, separability (all locals Hermitian psd),
//! purifications (rectangular locals ξ with ξ*ξ recovering the operator),
//! and the correspondences between nonnegative tensors, diagonal separable
//! decompositions, and families of psd matrices.
//!
//! Orbit symmetry is kept bitwise throughout by computing data once per
//! orbit representative and copying it (index-permuted) to the other orbit
//! members.

use crate::decomp::{
    assignment_digits, assignment_index, contract, table_len, transported_assignment,
    Decomposition, Incidence,
};
use crate::group::Action;
use crate::report::ValidationReport;
use crate::tensor::{flat_of, idx_of, GlobalTensor};
use crate::{Error, Result};
use nalgebra::DMatrix;
use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// A decomposition whose locals are matrices instead of vectors: the
/// contraction over a global assignment multiplies entrywise over sites in
/// the row and column slots separately, producing a (Π rows)×(Π cols)
/// matrix. Square shapes model operator decompositions; rectangular shapes
/// are purifications.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixDecomposition {
    pub action: Action,
    pub r: usize,
    /// Per-site matrix shape (rows, cols).
    pub shapes: Vec<(usize, usize)>,
    /// `locals[site][assignment]` is a rows×cols matrix, row-major.
    pub locals: Vec<Vec<Vec<Complex64>>>,
    /// Rectangular locals allowed; the object is a purification ξ rather
    /// than an operator decomposition.
    pub purification: bool,
    /// Row index carries a leading per-assignment block label: rows =
    /// (number of assignments at the site)·cols, and the equivariance
    /// condition permutes blocks along with assignments.
    pub assignment_blocks: bool,
}

impl MatrixDecomposition {
    pub fn new(
        action: Action,
        r: usize,
        shapes: Vec<(usize, usize)>,
        locals: Vec<Vec<Vec<Complex64>>>,
        purification: bool,
        assignment_blocks: bool,
    ) -> Result<MatrixDecomposition> {
        if r == 0 {
            return Err(Error::InvalidDecomposition("index set must be nonempty".into()));
        }
        let nv = action.complex.vertex_count();
        if shapes.len() != nv || locals.len() != nv {
            return Err(Error::DimMismatch(format!(
                "expected {nv} site shapes and tables, got {} and {}",
                shapes.len(),
                locals.len()
            )));
        }
        let inc = Incidence::new(&action.complex);
        for i in 0..nv {
            let (rows, cols) = shapes[i];
            if rows == 0 || cols == 0 {
                return Err(Error::DimMismatch(format!("site {i} has an empty matrix shape")));
            }
            if !purification && rows != cols {
                return Err(Error::InvalidDecomposition(format!(
                    "site {i} is rectangular ({rows}×{cols}) but the purification flag is off"
                )));
            }
            let t = table_len(r, inc.positions[i].len())?;
            if assignment_blocks && rows != t * cols {
                return Err(Error::InvalidDecomposition(format!(
                    "site {i} expects {t} row blocks of height {cols}, got {rows} rows"
                )));
            }
            if locals[i].len() != t {
                return Err(Error::DimMismatch(format!(
                    "site {i} table has {} entries, expected {t}",
                    locals[i].len()
                )));
            }
            if locals[i].iter().any(|m| m.len() != rows * cols) {
                return Err(Error::DimMismatch(format!(
                    "site {i} holds a matrix that is not {rows}×{cols}"
                )));
            }
        }
        // Shapes must be constant along vertex orbits for equivariance to
        // type-check.
        for g in 0..action.group.order() {
            for i in 0..nv {
                if shapes[action.vertex_act[g][i]] != shapes[i] {
                    return Err(Error::DimMismatch(format!(
                        "sites {i} and {} share an orbit but have different shapes",
                        action.vertex_act[g][i]
                    )));
                }
            }
        }
        Ok(MatrixDecomposition { action, r, shapes, locals, purification, assignment_blocks })
    }

    /// The same data as a vector decomposition over flattened matrices.
    pub fn flattened(&self) -> Result<Decomposition> {
        let dims = self.shapes.iter().map(|&(a, b)| a * b).collect();
        Decomposition::new(self.action.clone(), self.r, dims, self.locals.clone())
    }
}

/// Largest entrywise deviation from matrix equivariance. Without block
/// labels a local must equal its transported partner entrywise; with block
/// labels the row blocks are permuted by the same assignment transport as
/// the table index.
pub fn matrix_condition_b_deviation(md: &MatrixDecomposition) -> f64 {
    let a = &md.action;
    let inc = Incidence::new(&a.complex);
    let mut worst: f64 = 0.0;
    for g in 0..a.group.order() {
        for i in 0..a.complex.vertex_count() {
            let gi = a.vertex_act[g][i];
            let (rows, cols) = md.shapes[i];
            let k = inc.positions[i].len();
            let t = md.locals[i].len();
            for idx in 0..t {
                let digits = assignment_digits(idx, md.r, k);
                let (_, moved) = transported_assignment(a, &inc, g, i, &digits);
                let other = &md.locals[gi][assignment_index(&moved, md.r)];
                let local = &md.locals[i][idx];
                if !md.assignment_blocks {
                    for (x, y) in local.iter().zip(other) {
                        worst = worst.max((x - y).norm());
                    }
                } else {
                    // Row block γ of (i, β) matches row block ^gγ of
                    // (gi, ^gβ).
                    let block = rows / t;
                    debug_assert_eq!(block, cols);
                    for gamma in 0..t {
                        let gd = assignment_digits(gamma, md.r, k);
                        let (_, gmoved) = transported_assignment(a, &inc, g, i, &gd);
                        let tgamma = assignment_index(&gmoved, md.r);
                        let src = &local[gamma * block * cols..(gamma + 1) * block * cols];
                        let dst = &other[tgamma * block * cols..(tgamma + 1) * block * cols];
                        for (x, y) in src.iter().zip(dst) {
                            worst = worst.max((x - y).norm());
                        }
                    }
                }
            }
        }
    }
    worst
}

/// Contracts the matrix decomposition and reorders the result into the
/// global (Π rows)×(Π cols) matrix.
pub fn matrix_of(md: &MatrixDecomposition, budget: u64) -> Result<DMatrix<Complex64>> {
    let v = contract(&md.flattened()?, budget)?;
    let rows: Vec<usize> = md.shapes.iter().map(|s| s.0).collect();
    let cols: Vec<usize> = md.shapes.iter().map(|s| s.1).collect();
    let rt: usize = rows.iter().product();
    let ct: usize = cols.iter().product();
    let mut m = DMatrix::zeros(rt, ct);
    for (flat, &z) in v.entries.iter().enumerate() {
        let site = idx_of(flat, &v.dims);
        let x: Vec<usize> = site.iter().zip(&cols).map(|(&s, &c)| s / c).collect();
        let y: Vec<usize> = site.iter().zip(&cols).map(|(&s, &c)| s % c).collect();
        m[(flat_of(&x, &rows), flat_of(&y, &cols))] = z;
    }
    Ok(m)
}

/// Reorders a square tensor with per-site paired dimensions m_i² into the
/// (Π m_i)×(Π m_i) matrix; inverse of [`tensor_of_matrix`].
pub fn matrix_of_tensor(v: &GlobalTensor) -> Result<(DMatrix<Complex64>, Vec<usize>)> {
    let mut side = Vec::with_capacity(v.dims.len());
    for (i, &d) in v.dims.iter().enumerate() {
        let m = (d as f64).sqrt().round() as usize;
        if m * m != d {
            return Err(Error::DimMismatch(format!(
                "site {i} dimension {d} is not a perfect square"
            )));
        }
        side.push(m);
    }
    let total: usize = side.iter().product();
    let mut out = DMatrix::zeros(total, total);
    for (flat, &z) in v.entries.iter().enumerate() {
        let site = idx_of(flat, &v.dims);
        let x: Vec<usize> = site.iter().zip(&side).map(|(&s, &m)| s / m).collect();
        let y: Vec<usize> = site.iter().zip(&side).map(|(&s, &m)| s % m).collect();
        out[(flat_of(&x, &side), flat_of(&y, &side))] = z;
    }
    Ok((out, side))
}

/// Packs a (Π m_i)×(Π m_i) matrix into a tensor with per-site dimensions
/// m_i², pairing row and column digits site by site.
pub fn tensor_of_matrix(m: &DMatrix<Complex64>, side: &[usize]) -> Result<GlobalTensor> {
    let total: usize = side.iter().product();
    if m.nrows() != total || m.ncols() != total {
        return Err(Error::DimMismatch(format!(
            "matrix is {}×{}, expected {total}×{total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let dims: Vec<usize> = side.iter().map(|&s| s * s).collect();
    let mut v = GlobalTensor::zeros(dims.clone());
    for row in 0..total {
        let x = idx_of(row, side);
        for col in 0..total {
            let y = idx_of(col, side);
            let site: Vec<usize> =
                x.iter().zip(&y).zip(side).map(|((&a, &b), &s)| a * s + b).collect();
            let flat = flat_of(&site, &dims);
            v.entries[flat] = m[(row, col)];
        }
    }
    Ok(v)
}

fn as_dmatrix(data: &[Complex64], rows: usize, cols: usize) -> DMatrix<Complex64> {
    DMatrix::from_row_iterator(rows, cols, data.iter().copied())
}

fn hermitian_stats(m: &DMatrix<Complex64>) -> (f64, f64, f64) {
    let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let herm_dev = (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let min_eig = if scale == 0.0 {
        0.0
    } else {
        m.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    };
    (min_eig, herm_dev, scale)
}

/// Hermitian psd square root with tiny negative eigenvalues clamped to 0.
fn psd_sqrt(m: &DMatrix<Complex64>, tol: f64) -> Result<DMatrix<Complex64>> {
    let (min_eig, herm_dev, scale) = hermitian_stats(m);
    if herm_dev > tol * scale.max(1.0) {
        return Err(Error::NotPsd { eigenvalue: -herm_dev });
    }
    if min_eig < -tol * scale.max(1.0) {
        return Err(Error::NotPsd { eigenvalue: min_eig });
    }
    if scale == 0.0 {
        return Ok(m.clone());
    }
    let eig = m.clone().symmetric_eigen();
    let roots: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::new(l.max(0.0).sqrt(), 0.0))
        .collect();
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(roots));
    Ok(&eig.eigenvectors * d * eig.eigenvectors.adjoint())
}

/// Checks that every local matrix is Hermitian and has all eigenvalues
/// ≥ −tol·(its max entry norm). The report lists each offending
/// (site, assignment) pair.
pub fn check_separable(md: &MatrixDecomposition, tol: f64) -> ValidationReport {
    let mut report = ValidationReport::new();
    for (i, table) in md.locals.iter().enumerate() {
        let (rows, cols) = md.shapes[i];
        if rows != cols {
            report.push("shape", format!("site {i} local matrices are not square"));
            continue;
        }
        for (idx, data) in table.iter().enumerate() {
            let m = as_dmatrix(data, rows, cols);
            let (min_eig, herm_dev, scale) = hermitian_stats(&m);
            if herm_dev > tol * scale.max(1.0) {
                report.push(
                    "hermitian",
                    format!("site {i} assignment {idx} deviates from Hermitian by {herm_dev:.3e}"),
                );
            } else if min_eig < -tol * scale.max(1.0) {
                report.push(
                    "psd",
                    format!("site {i} assignment {idx} has eigenvalue {min_eig:.3e}"),
                );
            }
        }
    }
    report
}

/// Per vertex orbit: the smallest member and, for every site in the orbit,
/// one group element carrying the smallest member there.
fn orbit_transporters(a: &Action) -> Vec<(usize, usize)> {
    let nv = a.complex.vertex_count();
    let mut out = vec![(usize::MAX, usize::MAX); nv];
    for rep in 0..nv {
        if out[rep].0 != usize::MAX {
            continue;
        }
        for g in 0..a.group.order() {
            let gi = a.vertex_act[g][rep];
            if out[gi].0 == usize::MAX {
                out[gi] = (rep, g);
            }
        }
    }
    out
}

/// Turns a separable operator decomposition into a purification of the same
/// index-set size: the local at (site, assignment β) is the psd square root
/// of the input local, placed as row block β of an otherwise zero
/// (blocks·d)×d matrix. Then (ξ_β)*ξ_γ = δ_{βγ}·σ_β sitewise, so ξ*ξ
/// recovers the contraction of the input exactly.
pub fn purify_separable(md: &MatrixDecomposition, tol: f64) -> Result<MatrixDecomposition> {
    if md.purification {
        return Err(Error::InvalidDecomposition(
            "input must be an operator decomposition, not a purification".into(),
        ));
    }
    let a = &md.action;
    let inc = Incidence::new(&a.complex);
    let nv = a.complex.vertex_count();
    let mut shapes = Vec::with_capacity(nv);
    let mut tables: Vec<Vec<Option<Vec<Complex64>>>> = Vec::with_capacity(nv);
    for i in 0..nv {
        let d = md.shapes[i].1;
        let t = md.locals[i].len();
        shapes.push((t * d, d));
        tables.push(vec![None; t]);
    }
    for i in 0..nv {
        for idx in 0..md.locals[i].len() {
            if tables[i][idx].is_some() {
                continue;
            }
            let (rows, cols) = md.shapes[i];
            let root = psd_sqrt(&as_dmatrix(&md.locals[i][idx], rows, cols), tol)?;
            let k = inc.positions[i].len();
            let digits = assignment_digits(idx, md.r, k);
            for g in 0..a.group.order() {
                let (gi, moved) = transported_assignment(a, &inc, g, i, &digits);
                let target = assignment_index(&moved, md.r);
                if tables[gi][target].is_some() {
                    continue;
                }
                // Block row index = the assignment itself.
                let t = md.locals[gi].len();
                let mut data = vec![ZERO; t * cols * cols];
                for x in 0..cols {
                    for y in 0..cols {
                        data[(target * cols + x) * cols + y] = root[(x, y)];
                    }
                }
                tables[gi][target] = Some(data);
            }
        }
    }
    let locals = tables
        .into_iter()
        .map(|t| t.into_iter().map(|m| m.expect("orbit sweep fills all slots")).collect())
        .collect();
    MatrixDecomposition::new(a.clone(), md.r, shapes, locals, true, true)
}

/// Sitewise adjoint product: the local at the paired index (β, γ) is
/// (d1 local at β)* · (d2 local at γ). For a purification ξ,
/// `adjoint_product(ξ, ξ)` is an operator decomposition of ξ*ξ with
/// index-set size r².
pub fn adjoint_product(
    d1: &MatrixDecomposition,
    d2: &MatrixDecomposition,
) -> Result<MatrixDecomposition> {
    if d1.action != d2.action {
        return Err(Error::InvalidDecomposition(
            "adjoint product needs a common action".into(),
        ));
    }
    for (i, (s1, s2)) in d1.shapes.iter().zip(&d2.shapes).enumerate() {
        if s1.0 != s2.0 {
            return Err(Error::DimMismatch(format!(
                "site {i} row counts differ: {} vs {}",
                s1.0, s2.0
            )));
        }
    }
    let r_out = d1.r.checked_mul(d2.r).ok_or_else(|| {
        Error::InvalidDecomposition("combined index set overflows".into())
    })?;
    let a = &d1.action;
    let inc = Incidence::new(&a.complex);
    let nv = a.complex.vertex_count();
    let mut shapes = Vec::with_capacity(nv);
    let mut locals = Vec::with_capacity(nv);
    for i in 0..nv {
        let rows = d1.shapes[i].0;
        let (c1, c2) = (d1.shapes[i].1, d2.shapes[i].1);
        shapes.push((c1, c2));
        let k = inc.positions[i].len();
        let t = table_len(r_out, k)?;
        let mut table = Vec::with_capacity(t);
        for idx in 0..t {
            let digits = assignment_digits(idx, r_out, k);
            let b1: Vec<usize> = digits.iter().map(|&x| x / d2.r).collect();
            let b2: Vec<usize> = digits.iter().map(|&x| x % d2.r).collect();
            let m1 = &d1.locals[i][assignment_index(&b1, d1.r)];
            let m2 = &d2.locals[i][assignment_index(&b2, d2.r)];
            let mut prod = vec![ZERO; c1 * c2];
            for x in 0..c1 {
                for y in 0..c2 {
                    let mut acc = ZERO;
                    for k2 in 0..rows {
                        acc += m1[k2 * c1 + x].conj() * m2[k2 * c2 + y];
                    }
                    prod[x * c2 + y] = acc;
                }
            }
            table.push(prod);
        }
        locals.push(table);
    }
    let square = shapes.iter().all(|&(x, y)| x == y);
    MatrixDecomposition::new(a.clone(), r_out, shapes, locals, !square, false)
}

/// Which invariantization route `sqrt_purification` uses for the square
/// root.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SqrtRoute {
    Free,
    Blending,
}

/// Decomposes the psd square root of an invariant psd operator σ (given as
/// a tensor with per-site dimensions m_i²): reorder to a matrix, take the
/// Hermitian psd root, check it stayed invariant, and run the chosen
/// invariantization route on it. The result ξ is a square matrix
/// decomposition with ξ*ξ = σ up to the eigendecomposition's rounding.
pub fn sqrt_purification(
    a: &Action,
    sigma: &GlobalTensor,
    route: SqrtRoute,
    tol: f64,
    budget: u64,
) -> Result<MatrixDecomposition> {
    let (m, side) = matrix_of_tensor(sigma)?;
    let root = psd_sqrt(&m, tol)?;
    let root_tensor = tensor_of_matrix(&root, &side)?;
    let dev = crate::tensor::invariance_deviation(a, &root_tensor)?;
    let scale = root_tensor.max_norm().max(1.0);
    if dev > tol * scale {
        return Err(Error::NotInvariant { deviation: dev, tol: tol * scale });
    }
    let d = match route {
        SqrtRoute::Free => {
            let seed = crate::decomp::from_elementary(
                &a.complex,
                &crate::tensor::basis_expansion(&root_tensor),
            )?;
            crate::construct::invariantize_free(a, &seed, tol * scale, budget)?
        }
        SqrtRoute::Blending => {
            crate::construct::invariantize_blending(a, &root_tensor, tol * scale)?
        }
    };
    let shapes = side.iter().map(|&s| (s, s)).collect();
    MatrixDecomposition::new(a.clone(), d.r, shapes, d.locals, false, false)
}

/// Fails if any entry has imaginary part or negative real part beyond tol.
pub fn check_nonneg(v: &GlobalTensor, tol: f64) -> Result<()> {
    for (flat, z) in v.entries.iter().enumerate() {
        if z.im.abs() > tol || z.re < -tol {
            return Err(Error::InvalidDecomposition(format!(
                "entry {flat} = {z} is not nonnegative within {tol}"
            )));
        }
    }
    Ok(())
}

/// Embeds a nonnegative tensor M as the diagonal operator σ with per-site
/// dimensions d_i²: σ has M's entries on the index pairs that are diagonal
/// at every site and zeros elsewhere.
pub fn diag_embed(m: &GlobalTensor, tol: f64) -> Result<GlobalTensor> {
    check_nonneg(m, tol)?;
    let dims: Vec<usize> = m.dims.iter().map(|&d| d * d).collect();
    let mut out = GlobalTensor::zeros(dims.clone());
    for (flat, &z) in m.entries.iter().enumerate() {
        let j = idx_of(flat, &m.dims);
        let site: Vec<usize> = j.iter().zip(&m.dims).map(|(&x, &d)| x * d + x).collect();
        out.entries[flat_of(&site, &dims)] = z;
    }
    Ok(out)
}

/// Lifts a decomposition with entrywise nonnegative real locals to a
/// separable operator decomposition by placing each local vector on a
/// diagonal matrix, verbatim. Index-set size and equivariance carry over
/// unchanged.
pub fn nn_to_sep(d: &Decomposition, tol: f64) -> Result<MatrixDecomposition> {
    let mut locals = Vec::with_capacity(d.locals.len());
    for (i, table) in d.locals.iter().enumerate() {
        let dim = d.dims[i];
        let mut out = Vec::with_capacity(table.len());
        for (idx, v) in table.iter().enumerate() {
            if v.iter().any(|z| z.im.abs() > tol || z.re < -tol) {
                return Err(Error::InvalidDecomposition(format!(
                    "site {i} assignment {idx} has a negative or complex entry"
                )));
            }
            let mut m = vec![ZERO; dim * dim];
            for (x, &z) in v.iter().enumerate() {
                m[x * dim + x] = z;
            }
            out.push(m);
        }
        locals.push(out);
    }
    let shapes = d.dims.iter().map(|&x| (x, x)).collect();
    MatrixDecomposition::new(d.action.clone(), d.r, shapes, locals, false, false)
}

/// Extracts the diagonals of a diagonal separable decomposition back into a
/// plain decomposition, verbatim; inverse of [`nn_to_sep`].
pub fn sep_to_nn(md: &MatrixDecomposition, tol: f64) -> Result<Decomposition> {
    let mut locals = Vec::with_capacity(md.locals.len());
    let mut dims = Vec::with_capacity(md.shapes.len());
    for (i, table) in md.locals.iter().enumerate() {
        let (rows, cols) = md.shapes[i];
        if rows != cols {
            return Err(Error::InvalidDecomposition(format!(
                "site {i} local matrices are not square"
            )));
        }
        dims.push(cols);
        let mut out = Vec::with_capacity(table.len());
        for (idx, m) in table.iter().enumerate() {
            let scale = m.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
            for x in 0..rows {
                for y in 0..cols {
                    if x != y && m[x * cols + y].norm() > tol * scale.max(1.0) {
                        return Err(Error::InvalidDecomposition(format!(
                            "site {i} assignment {idx} is not diagonal"
                        )));
                    }
                }
            }
            out.push((0..cols).map(|x| m[x * cols + x]).collect());
        }
        locals.push(out);
    }
    Decomposition::new(md.action.clone(), md.r, dims, locals)
}

/// A family of Hermitian psd matrices E_j^{[i]}, one per site i and
/// physical value j, each indexed by the site's assignments. Evaluating the
/// double sum over global assignment pairs yields a nonnegative tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFamily {
    pub action: Action,
    pub r: usize,
    /// Physical dimensions d_i.
    pub dims: Vec<usize>,
    /// `grids[site][j]` is a t_i×t_i matrix, row-major, with t_i the number
    /// of assignments at the site.
    pub grids: Vec<Vec<Vec<Complex64>>>,
}

impl PsdFamily {
    pub fn new(
        action: Action,
        r: usize,
        dims: Vec<usize>,
        grids: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<PsdFamily> {
        if r == 0 {
            return Err(Error::InvalidDecomposition("index set must be nonempty".into()));
        }
        let nv = action.complex.vertex_count();
        if dims.len() != nv || grids.len() != nv {
            return Err(Error::DimMismatch(format!(
                "expected {nv} dims and grids, got {} and {}",
                dims.len(),
                grids.len()
            )));
        }
        let inc = Incidence::new(&action.complex);
        for i in 0..nv {
            if dims[i] == 0 {
                return Err(Error::DimMismatch(format!("site {i} has dimension 0")));
            }
            let t = table_len(r, inc.positions[i].len())?;
            if grids[i].len() != dims[i] {
                return Err(Error::DimMismatch(format!(
                    "site {i} has {} matrices, expected {}",
                    grids[i].len(),
                    dims[i]
                )));
            }
            if grids[i].iter().any(|m| m.len() != t * t) {
                return Err(Error::DimMismatch(format!(
                    "site {i} holds a matrix that is not {t}×{t}"
                )));
            }
        }
        for g in 0..action.group.order() {
            for i in 0..nv {
                if dims[action.vertex_act[g][i]] != dims[i] {
                    return Err(Error::DimMismatch(format!(
                        "sites {i} and {} share an orbit but have different dimensions",
                        action.vertex_act[g][i]
                    )));
                }
            }
        }
        Ok(PsdFamily { action, r, dims, grids })
    }

    /// Checks Hermitian-psd per matrix (eigenvalues ≥ −tol·max-norm) and
    /// exact symmetry along orbits.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let mut report = ValidationReport::new();
        let a = &self.action;
        let inc = Incidence::new(&a.complex);
        for (i, grid) in self.grids.iter().enumerate() {
            let t = table_len(self.r, inc.positions[i].len()).expect("validated at construction");
            for (j, data) in grid.iter().enumerate() {
                let m = as_dmatrix(data, t, t);
                let (min_eig, herm_dev, scale) = hermitian_stats(&m);
                if herm_dev > tol * scale.max(1.0) {
                    report.push(
                        "hermitian",
                        format!("site {i} value {j} deviates from Hermitian by {herm_dev:.3e}"),
                    );
                } else if min_eig < -tol * scale.max(1.0) {
                    report.push("psd", format!("site {i} value {j} has eigenvalue {min_eig:.3e}"));
                }
            }
        }
        for g in 0..a.group.order() {
            for i in 0..a.complex.vertex_count() {
                let gi = a.vertex_act[g][i];
                let t = table_len(self.r, inc.positions[i].len()).expect("validated");
                'outer: for j in 0..self.dims[i] {
                    for beta in 0..t {
                        let bd = assignment_digits(beta, self.r, inc.positions[i].len());
                        let (_, bm) = transported_assignment(a, &inc, g, i, &bd);
                        let tb = assignment_index(&bm, self.r);
                        for beta2 in 0..t {
                            let bd2 = assignment_digits(beta2, self.r, inc.positions[i].len());
                            let (_, bm2) = transported_assignment(a, &inc, g, i, &bd2);
                            let tb2 = assignment_index(&bm2, self.r);
                            if self.grids[gi][j][tb * t + tb2] != self.grids[i][j][beta * t + beta2]
                            {
                                report.push(
                                    "orbit-symmetry",
                                    format!(
                                        "site {i} value {j} differs from its image at site {gi}"
                                    ),
                                );
                                break 'outer;
                            }
                        }
                    }
                }
            }
        }
        report
    }
}

/// Builds the purification whose sitewise Gram matrices reproduce a psd
/// family: with S = √(E_j) computed once per vertex-orbit representative
/// and transported, the local at (site, assignment β) stacks, per
/// assignment block s, the diagonal d×d matrix diag_j(S_j[s, β]). Then
/// ((ξ_β)*ξ_{β′})[j,j] = E_j[β, β′], so ξ*ξ is the diagonal embedding of
/// the family's tensor, at the same index-set size.
pub fn psd_decomp_to_purification(e: &PsdFamily, tol: f64) -> Result<MatrixDecomposition> {
    let a = &e.action;
    let inc = Incidence::new(&a.complex);
    let nv = a.complex.vertex_count();
    let transporters = orbit_transporters(a);
    // Square roots at orbit representatives.
    let mut roots: Vec<Option<Vec<DMatrix<Complex64>>>> = vec![None; nv];
    for i in 0..nv {
        if transporters[i].0 != i {
            continue;
        }
        let t = table_len(e.r, inc.positions[i].len())?;
        let mut per_value = Vec::with_capacity(e.dims[i]);
        for j in 0..e.dims[i] {
            per_value.push(psd_sqrt(&as_dmatrix(&e.grids[i][j], t, t), tol)?);
        }
        roots[i] = Some(per_value);
    }
    let mut shapes = Vec::with_capacity(nv);
    let mut locals = Vec::with_capacity(nv);
    for i in 0..nv {
        let (rep, g) = transporters[i];
        let k = inc.positions[i].len();
        let t = table_len(e.r, k)?;
        let d = e.dims[i];
        shapes.push((t * d, d));
        let root = roots[rep].as_ref().expect("representative filled");
        // Transport: assignment β at site i corresponds to the assignment at
        // rep whose image under g is β (g carries rep to i).
        let mut to_rep = vec![0usize; t];
        for beta in 0..t {
            let digits = assignment_digits(beta, e.r, inc.positions[rep].len());
            let (site, moved) = transported_assignment(a, &inc, g, rep, &digits);
            debug_assert_eq!(site, i);
            to_rep[assignment_index(&moved, e.r)] = beta;
        }
        let mut table = Vec::with_capacity(t);
        for beta in 0..t {
            let mut data = vec![ZERO; t * d * d];
            for s in 0..t {
                for j in 0..d {
                    // Row block s, diagonal entry j: S_j at the rep indices.
                    data[(s * d + j) * d + j] = root[j][(to_rep[s], to_rep[beta])];
                }
            }
            table.push(data);
        }
        locals.push(table);
    }
    MatrixDecomposition::new(a.clone(), e.r, shapes, locals, true, true)
}

/// Extracts the psd family of sitewise Gram matrices from a purification:
/// E_j[β, β′] = ((ξ_β)*ξ_{β′})[j, j], computed once per vertex-orbit
/// representative and transported, so orbit symmetry is exact.
pub fn purification_to_psd(xi: &MatrixDecomposition) -> Result<PsdFamily> {
    let a = &xi.action;
    let inc = Incidence::new(&a.complex);
    let nv = a.complex.vertex_count();
    let transporters = orbit_transporters(a);
    let dims: Vec<usize> = xi.shapes.iter().map(|s| s.1).collect();
    let mut grids: Vec<Vec<Vec<Complex64>>> = vec![Vec::new(); nv];
    for i in 0..nv {
        if transporters[i].0 != i {
            continue;
        }
        let (rows, cols) = xi.shapes[i];
        let t = xi.locals[i].len();
        let mut grid = vec![vec![ZERO; t * t]; cols];
        for beta in 0..t {
            for beta2 in 0..t {
                for j in 0..cols {
                    let mut acc = ZERO;
                    for x in 0..rows {
                        acc += xi.locals[i][beta][x * cols + j].conj()
                            * xi.locals[i][beta2][x * cols + j];
                    }
                    grid[j][beta * t + beta2] = acc;
                }
            }
        }
        grids[i] = grid;
    }
    for i in 0..nv {
        let (rep, g) = transporters[i];
        if rep == i {
            continue;
        }
        let t = xi.locals[i].len();
        let cols = xi.shapes[i].1;
        let mut image = vec![0usize; t];
        for beta in 0..t {
            let digits = assignment_digits(beta, xi.r, inc.positions[rep].len());
            let (site, moved) = transported_assignment(a, &inc, g, rep, &digits);
            debug_assert_eq!(site, i);
            image[beta] = assignment_index(&moved, xi.r);
        }
        let mut grid = vec![vec![ZERO; t * t]; cols];
        for j in 0..cols {
            for beta in 0..t {
                for beta2 in 0..t {
                    grid[j][image[beta] * t + image[beta2]] = grids[rep][j][beta * t + beta2];
                }
            }
        }
        grids[i] = grid;
    }
    PsdFamily::new(a.clone(), xi.r, dims, grids)
}

/// Evaluates the tensor a psd family defines: the entry at (j_i) sums, over
/// pairs of global assignments (α, α′), the product over sites of
/// E_{j_i}[α|i, α′|i]. Runs through the standard contraction engine on
/// paired indices, so the budget guard applies.
pub fn evaluate_psd_decomp(e: &PsdFamily, budget: u64) -> Result<GlobalTensor> {
    let a = &e.action;
    let inc = Incidence::new(&a.complex);
    let r2 = e.r.checked_mul(e.r).ok_or_else(|| {
        Error::InvalidDecomposition("paired index set overflows".into())
    })?;
    let trivial = Action::trivial(a.complex.clone())?;
    let nv = a.complex.vertex_count();
    let mut locals = Vec::with_capacity(nv);
    for i in 0..nv {
        let k = inc.positions[i].len();
        let t = table_len(e.r, k)?;
        let paired = table_len(r2, k)?;
        let mut table = Vec::with_capacity(paired);
        for idx in 0..paired {
            let digits = assignment_digits(idx, r2, k);
            let alpha: Vec<usize> = digits.iter().map(|&x| x / e.r).collect();
            let alpha2: Vec<usize> = digits.iter().map(|&x| x % e.r).collect();
            let row = assignment_index(&alpha, e.r);
            let col = assignment_index(&alpha2, e.r);
            table.push((0..e.dims[i]).map(|j| e.grids[i][j][row * t + col]).collect());
        }
        locals.push(table);
    }
    let d = Decomposition::new(trivial, r2, e.dims.clone(), locals)?;
    contract(&d, budget)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::Wsc;
    use crate::decomp::{condition_b_deviation, random_nonneg_condition_b_decomposition};
    use crate::tensor::random_tensor;
    use crate::DEFAULT_BUDGET;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn projector_locals(dim: usize, table: usize, which: usize) -> Vec<Vec<Complex64>> {
        (0..table)
            .map(|_| {
                let mut m = vec![ZERO; dim * dim];
                m[which * dim + which] = Complex64::new(1.0, 0.0);
                m
            })
            .collect()
    }

    #[test]
    fn projector_locals_are_separable() {
        let w = Wsc::simplex(1);
        let a = Action::trivial(w).unwrap();
        let locals = vec![projector_locals(2, 2, 0), projector_locals(2, 2, 1)];
        let md =
            MatrixDecomposition::new(a, 2, vec![(2, 2); 2], locals, false, false).unwrap();
        assert!(check_separable(&md, 1e-10).is_valid());
        assert_eq!(matrix_condition_b_deviation(&md), 0.0);
    }

    #[test]
    fn hermitian_defect_and_negative_eigenvalue_are_reported() {
        let w = Wsc::simplex(1);
        let a = Action::trivial(w).unwrap();
        let bad_herm = vec![
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(0.5, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
            ];
            1
        ];
        let neg = vec![
            vec![
                Complex64::new(-1.0, 0.0),
                ZERO,
                ZERO,
                Complex64::new(1.0, 0.0),
            ];
            1
        ];
        let md = MatrixDecomposition::new(
            a,
            1,
            vec![(2, 2); 2],
            vec![bad_herm, neg],
            false,
            false,
        )
        .unwrap();
        let report = check_separable(&md, 1e-10);
        assert!(report.has_kind("hermitian"));
        assert!(report.has_kind("psd"));
    }

    #[test]
    fn matrix_contraction_matches_kronecker_product() {
        // Single assignment on the edge: the global matrix is the Kronecker
        // product of the two site matrices.
        let w = Wsc::simplex(1);
        let a = Action::trivial(w).unwrap();
        let m0 = vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(4.0, 0.0),
        ];
        let m1 = vec![
            Complex64::new(0.0, 1.0),
            ZERO,
            Complex64::new(5.0, 0.0),
            Complex64::new(1.0, -1.0),
        ];
        let md = MatrixDecomposition::new(
            a,
            1,
            vec![(2, 2); 2],
            vec![vec![m0.clone()], vec![m1.clone()]],
            false,
            false,
        )
        .unwrap();
        let got = matrix_of(&md, DEFAULT_BUDGET).unwrap();
        let a0 = as_dmatrix(&m0, 2, 2);
        let a1 = as_dmatrix(&m1, 2, 2);
        let want = a0.kronecker(&a1);
        assert!(max_abs(&(got - want)) <= 1e-12);
    }

    #[test]
    fn purification_of_separable_recovers_sigma() {
        let a = Action::rotation_circle(3).unwrap();
        for seed in [50u64, 51, 52] {
            let d = random_nonneg_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(seed))
                .unwrap();
            let md = nn_to_sep(&d, 1e-12).unwrap();
            assert!(check_separable(&md, 1e-10).is_valid());
            let sigma = matrix_of(&md, DEFAULT_BUDGET).unwrap();
            let xi = purify_separable(&md, 1e-10).unwrap();
            assert_eq!(xi.r, md.r);
            assert!(xi.purification && xi.assignment_blocks);
            assert_eq!(matrix_condition_b_deviation(&xi), 0.0);
            let xi_mat = matrix_of(&xi, DEFAULT_BUDGET).unwrap();
            let recon = xi_mat.adjoint() * &xi_mat;
            assert!(max_abs(&(recon - &sigma)) <= 1e-8 * max_abs(&sigma).max(1.0));
        }
    }

    #[test]
    fn adjoint_product_of_purification_is_squared_size_decomposition() {
        let a = Action::rotation_circle(3).unwrap();
        let d =
            random_nonneg_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(53)).unwrap();
        let md = nn_to_sep(&d, 1e-12).unwrap();
        let sigma = matrix_of(&md, DEFAULT_BUDGET).unwrap();
        let xi = purify_separable(&md, 1e-10).unwrap();
        let prod = adjoint_product(&xi, &xi).unwrap();
        assert_eq!(prod.r, xi.r * xi.r);
        assert!(!prod.purification);
        assert_eq!(matrix_condition_b_deviation(&prod), 0.0);
        let got = matrix_of(&prod, DEFAULT_BUDGET).unwrap();
        assert!(max_abs(&(got - &sigma)) <= 1e-8 * max_abs(&sigma).max(1.0));
    }

    #[test]
    fn diag_embed_places_entries_on_the_diagonal() {
        let mut m = GlobalTensor::zeros(vec![2, 2]);
        m.entries[0] = Complex64::new(1.0, 0.0);
        m.entries[3] = Complex64::new(2.0, 0.0);
        let sigma = diag_embed(&m, 1e-12).unwrap();
        assert_eq!(sigma.dims, vec![4, 4]);
        assert_eq!(sigma.entries[0], Complex64::new(1.0, 0.0)); // (00, 00)
        assert_eq!(sigma.entries[3 * 4 + 3], Complex64::new(2.0, 0.0)); // (11, 11)
        let total: Complex64 = sigma.entries.iter().sum();
        assert_eq!(total, Complex64::new(3.0, 0.0));

        let mut neg = GlobalTensor::zeros(vec![2]);
        neg.entries[0] = Complex64::new(-1.0, 0.0);
        assert!(diag_embed(&neg, 1e-12).is_err());
    }

    #[test]
    fn nn_and_sep_are_mutually_inverse() {
        let a = Action::rotation_circle(3).unwrap();
        let d =
            random_nonneg_condition_b_decomposition(&a, 3, &[2, 2, 2], &mut rng(54)).unwrap();
        let md = nn_to_sep(&d, 1e-12).unwrap();
        assert_eq!(md.r, d.r);
        let back = sep_to_nn(&md, 1e-12).unwrap();
        assert_eq!(back, d);
        // Contractions correspond under the diagonal embedding.
        let m = contract(&d, DEFAULT_BUDGET).unwrap();
        let sigma_direct = diag_embed(&m, 1e-9).unwrap();
        let sigma_lifted = contract(&md.flattened().unwrap(), DEFAULT_BUDGET).unwrap();
        assert!(sigma_direct.max_diff(&sigma_lifted).unwrap() <= 1e-10);
    }

    #[test]
    fn nn_to_sep_rejects_negative_and_complex_locals() {
        let w = Wsc::simplex(1);
        let a = Action::trivial(w.clone()).unwrap();
        let bad = Decomposition::new(
            a,
            1,
            vec![2, 2],
            vec![
                vec![vec![Complex64::new(-1.0, 0.0), ZERO]],
                vec![vec![Complex64::new(1.0, 0.0), ZERO]],
            ],
        )
        .unwrap();
        assert!(nn_to_sep(&bad, 1e-12).is_err());
    }

    #[test]
    fn sqrt_purification_round_trips_on_rotating_circle() {
        let a = Action::rotation_circle(3).unwrap();
        // Invariant psd σ: A*A for a random invariant operator A.
        let raw = random_tensor(&[4, 4, 4], &mut rng(55));
        let inv = crate::tensor::symmetrize(&a, &raw).unwrap();
        let (am, side) = matrix_of_tensor(&inv).unwrap();
        let psd = am.adjoint() * &am;
        let sigma = tensor_of_matrix(&psd, &side).unwrap();
        let xi = sqrt_purification(&a, &sigma, SqrtRoute::Free, 1e-8, DEFAULT_BUDGET).unwrap();
        assert_eq!(matrix_condition_b_deviation(&xi), 0.0);
        let xi_mat = matrix_of(&xi, DEFAULT_BUDGET).unwrap();
        let recon = xi_mat.adjoint() * &xi_mat;
        assert!(max_abs(&(recon - &psd)) <= 1e-8 * max_abs(&psd).max(1.0));
    }

    #[test]
    fn sqrt_purification_rejects_non_psd_input() {
        let a = Action::rotation_circle(3).unwrap();
        // −identity is invariant and Hermitian but negative definite.
        let side = [2usize, 2, 2];
        let total = 8;
        let m = DMatrix::from_fn(total, total, |i, j| {
            if i == j {
                Complex64::new(-1.0, 0.0)
            } else {
                ZERO
            }
        });
        let sigma = tensor_of_matrix(&m, &side).unwrap();
        assert!(matches!(
            sqrt_purification(&a, &sigma, SqrtRoute::Free, 1e-9, DEFAULT_BUDGET),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn identity_sigma_purifies_to_identity() {
        let a = Action::rotation_circle(3).unwrap();
        let side = [2usize, 2, 2];
        let m = DMatrix::from_fn(8, 8, |i, j| {
            if i == j {
                Complex64::new(1.0, 0.0)
            } else {
                ZERO
            }
        });
        let sigma = tensor_of_matrix(&m, &side).unwrap();
        let xi = sqrt_purification(&a, &sigma, SqrtRoute::Free, 1e-9, DEFAULT_BUDGET).unwrap();
        let xi_mat = matrix_of(&xi, DEFAULT_BUDGET).unwrap();
        assert!(max_abs(&(xi_mat - m)) <= 1e-9);
    }

    #[test]
    fn psd_family_round_trip_reproduces_tensor() {
        let a = Action::rotation_circle(3).unwrap();
        let d =
            random_nonneg_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(56)).unwrap();
        let m = contract(&d, DEFAULT_BUDGET).unwrap();
        let xi = purify_separable(&nn_to_sep(&d, 1e-12).unwrap(), 1e-10).unwrap();
        let family = purification_to_psd(&xi).unwrap();
        assert_eq!(family.r, d.r);
        assert!(family.validate(1e-10).is_valid());
        let evaluated = evaluate_psd_decomp(&family, DEFAULT_BUDGET).unwrap();
        assert!(evaluated.max_diff(&m).unwrap() <= 1e-8 * m.max_norm().max(1.0));
        // And the family purifies back to something evaluating identically.
        let xi2 = psd_decomp_to_purification(&family, 1e-10).unwrap();
        assert_eq!(xi2.r, family.r);
        assert_eq!(matrix_condition_b_deviation(&xi2), 0.0);
        let family2 = purification_to_psd(&xi2).unwrap();
        let evaluated2 = evaluate_psd_decomp(&family2, DEFAULT_BUDGET).unwrap();
        assert!(evaluated2.max_diff(&m).unwrap() <= 1e-8 * m.max_norm().max(1.0));
    }

    #[test]
    fn psd_family_evaluation_matches_brute_force_double_sum() {
        // Λ₁ (one edge), r = 2, random Hermitian psd grids: compare the
        // contraction-engine evaluation against the defining double sum.
        let w = Wsc::simplex(1);
        let a = Action::trivial(w).unwrap();
        let mut r1 = rng(57);
        let mut random_psd = |t: usize| -> Vec<Complex64> {
            let b = DMatrix::from_fn(t, t, |_, _| {
                Complex64::new(r1.gen_range(-1.0..1.0), r1.gen_range(-1.0..1.0))
            });
            let p = b.adjoint() * &b;
            let mut out = Vec::with_capacity(t * t);
            for x in 0..t {
                for y in 0..t {
                    out.push(p[(x, y)]);
                }
            }
            out
        };
        let grids = vec![
            vec![random_psd(2), random_psd(2)],
            vec![random_psd(2), random_psd(2)],
        ];
        let e = PsdFamily::new(a, 2, vec![2, 2], grids).unwrap();
        assert!(e.validate(1e-9).is_valid());
        let got = evaluate_psd_decomp(&e, DEFAULT_BUDGET).unwrap();
        for j0 in 0..2 {
            for j1 in 0..2 {
                let mut want = ZERO;
                for alpha in 0..2 {
                    for alpha2 in 0..2 {
                        want += e.grids[0][j0][alpha * 2 + alpha2]
                            * e.grids[1][j1][alpha * 2 + alpha2];
                    }
                }
                let got_entry = got.entries[j0 * 2 + j1];
                assert!((got_entry - want).norm() <= 1e-12);
            }
        }
        // Entries of a psd-family tensor are nonnegative.
        check_nonneg(&got, 1e-9).unwrap();
    }

    #[test]
    fn all_scalar_one_family_evaluates_to_all_ones() {
        let w = Wsc::simplex(1);
        let a = Action::trivial(w).unwrap();
        let one = vec![Complex64::new(1.0, 0.0)];
        let grids = vec![vec![one.clone(), one.clone()], vec![one.clone(), one.clone()]];
        let e = PsdFamily::new(a, 1, vec![2, 2], grids).unwrap();
        let got = evaluate_psd_decomp(&e, DEFAULT_BUDGET).unwrap();
        assert!(got.entries.iter().all(|z| (z - Complex64::new(1.0, 0.0)).norm() <= 1e-15));
    }

    #[test]
    fn equivariant_matrix_decomposition_contracts_invariantly() {
        let a = Action::rotation_circle(3).unwrap();
        let d =
            random_nonneg_condition_b_decomposition(&a, 2, &[2, 2, 2], &mut rng(58)).unwrap();
        assert_eq!(condition_b_deviation(&d), 0.0);
        let md = nn_to_sep(&d, 1e-12).unwrap();
        assert_eq!(matrix_condition_b_deviation(&md), 0.0);
        let sigma_tensor = contract(&md.flattened().unwrap(), DEFAULT_BUDGET).unwrap();
        let dev = crate::tensor::invariance_deviation(&a, &sigma_tensor).unwrap();
        assert!(dev <= 1e-12);
    }
}
