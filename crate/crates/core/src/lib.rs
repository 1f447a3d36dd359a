//! Noncommutative rank and smallest shrunk subspaces of complex matrix
//! spaces via majorized operator scaling, with exact rounding, plus
//! fractional linear matroid matching and rank-2 Brascamp-Lieb polytope
//! membership/optimization built on the same machinery.
//!
//! Layout:
//! - [`exactla`]: exact linear algebra over Gaussian rationals
//! - [`numla`]: floating Hermitian linear algebra, CP maps, scaled eigensolves
//! - [`permproj`]: generalized KL projection onto permutahedra and half-spaces
//! - [`matscale`]: the nonnegative-matrix scaling model (Hall blockers)
//! - [`opscale`]: majorized operator Sinkhorn, capacity decision, witnesses
//! - [`shrunk`]: Wong sequences, randomized shrunk subspace, exact rounding
//! - [`blapps`]: matroid matching, 2-covers, weighted optimization, membership
//! - [`instance`]: instance files, result envelopes, command dispatch
//! - [`repro`]: the reproduction/acceptance suite

pub mod bipartite;
pub mod blapps;
pub mod exactla;
pub mod instance;
pub mod matscale;
pub mod numla;
pub mod opscale;
pub mod permproj;
pub mod repro;
pub mod shrunk;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("linearly dependent input: {0}")]
    DependentInput(String),
    #[error("support violation: p has mass where q vanishes (index {0})")]
    Support(usize),
    #[error("solver did not reach the required state: {0}")]
    Solver(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
