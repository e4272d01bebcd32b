//! Tensor decompositions on weighted simplicial complexes.
//!
//! A weighted simplicial complex assigns a natural-number weight to every
//! simplex so that weights divide along inclusions. Its facets, counted with
//! multiplicity, index the summation pattern of a tensor decomposition: one
//! index per facet copy, one local tensor per vertex, each local depending
//! only on the indices of the facet copies touching that vertex. A finite
//! group acting on the complex restricts the decomposition to a symmetric
//! one, and the constructions in [`construct`] turn plain decompositions of
//! invariant tensors into symmetric ones (and move decompositions between
//! groups and between complexes) with controlled index growth.
//!
//! Modules:
//! - [`complex`]: weighted simplicial complexes, standard families, validation
//! - [`group`]: finite groups, actions on complexes, freeness/blending tests
//! - [`tensor`]: dense tensors, the site-permutation action, elementary sums
//! - [`decomp`]: decompositions, contraction, symmetry condition, sums/products
//! - [`construct`]: invariance-imposing and complex/group-changing transforms
//! - [`positivity`]: separable and purification forms, nonnegative tensors
//! - [`search`]: exact edge rank, numeric rank search, indicator search
//! - [`formats`]: JSON wire formats shared by the library and the CLI
//! - [`suite`]: the end-to-end verification matrix used by tests and the CLI

pub mod complex;
pub mod construct;
pub mod decomp;
pub mod formats;
pub mod group;
pub mod positivity;
pub mod report;
pub mod search;
pub mod suite;
pub mod tensor;

use thiserror::Error;

/// Default comparison tolerance (max norm) used when none is supplied.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default contraction budget in scalar multiply-adds.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

#[derive(Error, Debug)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("invalid action: {0}")]
    InvalidAction(String),
    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("contraction budget exceeded: needs about {needed} multiply-adds, budget is {budget}")]
    BudgetExceeded { needed: u64, budget: u64 },
    #[error("action is not free: element {element} fixes facet copy {copy}")]
    NotFree { element: usize, copy: usize },
    #[error("action is not blending")]
    NotBlending,
    #[error("tensor is not invariant: deviation {deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotInvariant { deviation: f64, tol: f64 },
    #[error("subset is not a subgroup: {0}")]
    NotSubgroup(String),
    #[error("subgroup is not normal")]
    NotNormal,
    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:.3e} below threshold")]
    NotPsd { eigenvalue: f64 },
    #[error("search failed: best residual {best_residual:.3e} after {restarts} restarts")]
    SearchFailed { best_residual: f64, restarts: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
