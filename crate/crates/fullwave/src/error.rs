//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Error, Debug)]
pub enum Error {
    /// A physical or numerical parameter is out of its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    /// The Coulomb logarithm argument Λ is not large: the medium does not
    /// behave as a plasma and the collision model breaks down.
    #[error("not a plasma: Coulomb logarithm argument Λ = {lambda:.3e} ≤ 1")]
    NotAPlasma { lambda: f64 },

    /// A collisionless resonance α² = ω_c² makes the Stix coefficients blow up.
    #[error("singular cyclotron resonance for species `{species}` (collisionless)")]
    SingularResonance { species: String },

    /// |B₀| vanishes where the unit vector b = B₀/|B₀| is needed.
    #[error("degenerate magnetic field: |B0| = 0 at ({x:.6}, {y:.6}, {z:.6})")]
    DegenerateField { x: f64, y: f64, z: f64 },

    /// The environment has no absorption (ζ ≤ 0); the propagation model is
    /// ill-posed and all solver entry points reject it.
    #[error("absorption missing: spectral lower bound ζ = {zeta:.3e} ≤ 0")]
    AbsorptionMissing { zeta: f64 },

    /// Mesh file could not be parsed.
    #[error("mesh parse error at line {line}: {message}")]
    MeshParse { line: usize, message: String },

    /// The mesh or partition violates a structural invariant.
    #[error("mesh/partition structure error: {0}")]
    Structure(String),

    /// Input data (sources, boundary data, dof vectors) is inconsistent.
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// A direct factorization or linear solve failed.
    #[error("solver failure: {0}")]
    Solver(String),

    /// An iterative solve did not reach its tolerance.
    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    Convergence { iterations: usize, residual: f64 },

    /// A dense computation was requested on a problem too large for it.
    #[error("problem too large for dense computation: {size} unknowns (limit {limit})")]
    SizeGuard { size: usize, limit: usize },

    /// The operation only supports a restricted geometry.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    /// Configuration file error.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid_parameter(name: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        }
    }

    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidParameter { .. } => 2,
            Error::Io(_) | Error::MeshParse { .. } | Error::Json(_) => 3,
            Error::Solver(_) | Error::Convergence { .. } => 4,
            _ => 2,
        }
    }
}
