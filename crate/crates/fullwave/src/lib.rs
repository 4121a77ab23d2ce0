//! Full-wave finite-element solver for time-harmonic electromagnetic wave
//! propagation and absorption in magnetised plasmas.
//!
//! The library solves
//!
//! ```text
//! curl curl E - (ω²/c²) K(x) E = f      in Ω,
//! div(K(x) E) = g                       in Ω,
//! ```
//!
//! where `K(x)` is the cold-plasma dielectric tensor augmented with a Landau
//! damping term. Absorption (collisional or Landau) makes the imaginary part
//! of the spectrum of `K` strictly positive, which is what renders the
//! problem well-posed; every solver entry point therefore refuses
//! environments without absorption.
//!
//! The main pieces:
//!
//! * [`plasma`] — species data, Stix coefficients, the response tensor `K`
//!   and its spectral bounds;
//! * [`mesh`] — tetrahedral meshes, boundary tags, non-overlapping
//!   partitions and the interface skeleton;
//! * [`space`] — Taylor–Hood (P2 vector / P1 scalar) nodal spaces;
//! * [`assemble`] — sesquilinear forms (plain, augmented, mixed couplings),
//!   right-hand sides and essential boundary conditions;
//! * [`solver`] — one-domain direct solves for the four variational
//!   formulations plus the `div(K grad ·)` elliptic solver and a
//!   K-Helmholtz decomposition;
//! * [`dd`] — domain-decomposed solves with interface Lagrange multipliers
//!   and a Schur-complement GMRES iteration;
//! * [`verify`] — manufactured-solution studies, discrete inf-sup probes
//!   and spectral reports;
//! * [`config`] — the JSON run configuration consumed by the `fullwave`
//!   command-line tool.

pub mod assemble;
pub mod config;
pub mod constants;
pub mod dd;
pub mod error;
pub mod fieldops;
pub mod fields;
pub mod gmres;
pub mod linsolve;
pub mod mesh;
pub mod plasma;
pub mod quadrature;
pub mod solver;
pub mod space;
pub mod sparse;
pub mod verify;
pub mod vtk;

mod guide;

pub use error::Error;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Real 3-vector (positions, normals, real fields).
pub type Vec3 = nalgebra::Vector3<f64>;

/// Complex 3-vector.
pub type Vec3c = nalgebra::Vector3<C64>;

/// Complex 3×3 matrix (response tensors, rotations of them).
pub type Mat3c = nalgebra::Matrix3<C64>;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
