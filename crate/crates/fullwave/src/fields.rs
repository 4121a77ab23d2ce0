//! Spatial coefficient profiles: constants, affine functions of position,
//! or values tabulated at mesh vertices (P1-interpolated).
//!
//! Physics inputs (density, temperature, static field, parallel wavenumber)
//! are all expressed as profiles so the same environment can be evaluated
//! pointwise by the tensor routines and at quadrature points by assembly.

use crate::error::Error;
use crate::mesh::Mesh;
use crate::{Result, Vec3};

/// Evaluation context for tabulated profiles: the mesh carrying the nodal
/// values and, when known, the tetrahedron containing the query point.
#[derive(Clone, Copy)]
pub struct MeshContext<'a> {
    pub mesh: &'a Mesh,
    pub tet: Option<usize>,
}

impl<'a> MeshContext<'a> {
    pub fn new(mesh: &'a Mesh) -> Self {
        MeshContext { mesh, tet: None }
    }

    pub fn in_tet(mesh: &'a Mesh, tet: usize) -> Self {
        MeshContext {
            mesh,
            tet: Some(tet),
        }
    }

    fn locate(&self, x: Vec3) -> Result<(usize, [f64; 4])> {
        if let Some(t) = self.tet {
            return Ok((t, self.mesh.barycentric(t, x)));
        }
        self.mesh
            .find_tet(x)
            .ok_or_else(|| Error::InvalidData(format!("point {x:?} is outside the mesh")))
    }
}

/// A scalar field over the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum ScalarProfile {
    Constant(f64),
    /// value(x) = value_at_origin + gradient · x
    Affine { value_at_origin: f64, gradient: Vec3 },
    /// One value per mesh vertex, P1-interpolated.
    Nodal(Vec<f64>),
}

/// A vector field over the domain.
#[derive(Debug, Clone, PartialEq)]
pub enum VectorProfile {
    Constant(Vec3),
    /// value(x) = value_at_origin + jacobian · x
    Affine {
        value_at_origin: Vec3,
        jacobian: nalgebra::Matrix3<f64>,
    },
    /// One vector per mesh vertex, P1-interpolated.
    Nodal(Vec<Vec3>),
}

impl ScalarProfile {
    pub fn eval(&self, x: Vec3, ctx: Option<&MeshContext>) -> Result<f64> {
        match self {
            ScalarProfile::Constant(v) => Ok(*v),
            ScalarProfile::Affine {
                value_at_origin,
                gradient,
            } => Ok(value_at_origin + gradient.dot(&x)),
            ScalarProfile::Nodal(values) => {
                let ctx = ctx.ok_or_else(|| {
                    Error::InvalidData("nodal profile evaluated without a mesh context".into())
                })?;
                let (tet, lambda) = ctx.locate(x)?;
                let vs = ctx.mesh.tets[tet];
                let mut acc = 0.0;
                for k in 0..4 {
                    acc += lambda[k] * values[vs[k] as usize];
                }
                Ok(acc)
            }
        }
    }

    /// True when the profile cannot vary with position.
    pub fn is_constant(&self) -> bool {
        match self {
            ScalarProfile::Constant(_) => true,
            ScalarProfile::Affine { gradient, .. } => gradient.norm() == 0.0,
            ScalarProfile::Nodal(_) => false,
        }
    }
}

impl VectorProfile {
    pub fn eval(&self, x: Vec3, ctx: Option<&MeshContext>) -> Result<Vec3> {
        match self {
            VectorProfile::Constant(v) => Ok(*v),
            VectorProfile::Affine {
                value_at_origin,
                jacobian,
            } => Ok(value_at_origin + jacobian * x),
            VectorProfile::Nodal(values) => {
                let ctx = ctx.ok_or_else(|| {
                    Error::InvalidData("nodal profile evaluated without a mesh context".into())
                })?;
                let (tet, lambda) = ctx.locate(x)?;
                let vs = ctx.mesh.tets[tet];
                let mut acc = Vec3::zeros();
                for k in 0..4 {
                    acc += lambda[k] * values[vs[k] as usize];
                }
                Ok(acc)
            }
        }
    }

    pub fn is_constant(&self) -> bool {
        match self {
            VectorProfile::Constant(_) => true,
            VectorProfile::Affine { jacobian, .. } => jacobian.norm() == 0.0,
            VectorProfile::Nodal(_) => false,
        }
    }
}
