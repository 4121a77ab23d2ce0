//! P2/P1 basis evaluation and discrete field operations: pointwise values,
//! curls, gradients, L² norms and errors.
//!
//! Local node order in a tet: vertices 0..3 then edge midpoints in
//! [`crate::space::TET_EDGES`] order. P2 basis in barycentric coordinates:
//! vertex i ↦ λᵢ(2λᵢ−1), edge (i,j) ↦ 4λᵢλⱼ.

use num_complex::Complex64;

use crate::mesh::Mesh;
use crate::quadrature::{tet_degree5, TetRule};
use crate::space::{FeSpace, TET_EDGES};
use crate::{Vec3, Vec3c, C64};

/// Barycentric gradients and measure of one tet.
#[derive(Debug, Clone)]
pub struct ElemGeom {
    /// ∇λ₀..∇λ₃ (constant on the tet).
    pub grads: [Vec3; 4],
    /// Tet volume.
    pub volume: f64,
}

impl ElemGeom {
    pub fn new(mesh: &Mesh, t: usize) -> ElemGeom {
        let j = mesh.tet_jacobian(t);
        let volume = j.determinant() / 6.0;
        debug_assert!(volume > 0.0, "tet {t} not canonically oriented");
        let inv = j.try_inverse().expect("nondegenerate tet");
        let g1 = Vec3::new(inv[(0, 0)], inv[(0, 1)], inv[(0, 2)]);
        let g2 = Vec3::new(inv[(1, 0)], inv[(1, 1)], inv[(1, 2)]);
        let g3 = Vec3::new(inv[(2, 0)], inv[(2, 1)], inv[(2, 2)]);
        ElemGeom {
            grads: [-g1 - g2 - g3, g1, g2, g3],
            volume,
        }
    }
}

/// Values of the ten P2 basis functions at barycentric λ.
pub fn p2_values(lambda: [f64; 4]) -> [f64; 10] {
    let mut phi = [0.0; 10];
    for i in 0..4 {
        phi[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
    }
    for (k, (i, j)) in TET_EDGES.iter().enumerate() {
        phi[4 + k] = 4.0 * lambda[*i] * lambda[*j];
    }
    phi
}

/// Physical gradients of the ten P2 basis functions at barycentric λ.
pub fn p2_gradients(lambda: [f64; 4], geom: &ElemGeom) -> [Vec3; 10] {
    let g = &geom.grads;
    let mut out = [Vec3::zeros(); 10];
    for i in 0..4 {
        out[i] = (4.0 * lambda[i] - 1.0) * g[i];
    }
    for (k, (i, j)) in TET_EDGES.iter().enumerate() {
        out[4 + k] = 4.0 * (lambda[*i] * g[*j] + lambda[*j] * g[*i]);
    }
    out
}

/// Values of the six P2 basis functions on a triangle (vertices then edge
/// midpoints (0,1), (1,2), (2,0)).
pub fn tri_p2_values(lambda: [f64; 3]) -> [f64; 6] {
    let mut phi = [0.0; 6];
    for i in 0..3 {
        phi[i] = lambda[i] * (2.0 * lambda[i] - 1.0);
    }
    for (k, (i, j)) in [(0usize, 1usize), (1, 2), (2, 0)].iter().enumerate() {
        phi[3 + k] = 4.0 * lambda[*i] * lambda[*j];
    }
    phi
}

/// P2 vector field value at a barycentric point of tet t.
pub fn eval_vector(space: &FeSpace, dofs: &[C64], t: usize, lambda: [f64; 4]) -> Vec3c {
    let phi = p2_values(lambda);
    let mut v = Vec3c::zeros();
    for (m, &node) in space.elem_nodes[t].iter().enumerate() {
        for c in 0..3 {
            v[c] += phi[m] * dofs[3 * node as usize + c];
        }
    }
    v
}

/// Curl of a P2 vector field at a barycentric point of tet t.
pub fn eval_curl(
    space: &FeSpace,
    dofs: &[C64],
    t: usize,
    lambda: [f64; 4],
    geom: &ElemGeom,
) -> Vec3c {
    let gphi = p2_gradients(lambda, geom);
    let mut curl = Vec3c::zeros();
    for (m, &node) in space.elem_nodes[t].iter().enumerate() {
        let g = gphi[m];
        let u = [
            dofs[3 * node as usize],
            dofs[3 * node as usize + 1],
            dofs[3 * node as usize + 2],
        ];
        // curl(φ e_c) = ∇φ × e_c
        curl[0] += g[1] * u[2] - g[2] * u[1];
        curl[1] += g[2] * u[0] - g[0] * u[2];
        curl[2] += g[0] * u[1] - g[1] * u[0];
    }
    curl
}

/// P1 scalar value at a barycentric point of tet t.
pub fn eval_scalar_p1(mesh: &Mesh, dofs: &[C64], t: usize, lambda: [f64; 4]) -> C64 {
    let vs = mesh.tets[t];
    let mut v = Complex64::new(0.0, 0.0);
    for k in 0..4 {
        v += lambda[k] * dofs[vs[k] as usize];
    }
    v
}

/// Gradient of a P1 scalar on tet t (constant).
pub fn eval_scalar_p1_grad(mesh: &Mesh, dofs: &[C64], t: usize, geom: &ElemGeom) -> Vec3c {
    let vs = mesh.tets[t];
    let mut g = Vec3c::zeros();
    for k in 0..4 {
        for c in 0..3 {
            g[c] += dofs[vs[k] as usize] * geom.grads[k][c];
        }
    }
    g
}

/// P2 scalar value (dofs indexed by node).
pub fn eval_scalar_p2(space: &FeSpace, dofs: &[C64], t: usize, lambda: [f64; 4]) -> C64 {
    let phi = p2_values(lambda);
    let mut v = Complex64::new(0.0, 0.0);
    for (m, &node) in space.elem_nodes[t].iter().enumerate() {
        v += phi[m] * dofs[node as usize];
    }
    v
}

/// Gradient of a P2 scalar field.
pub fn eval_scalar_p2_grad(
    space: &FeSpace,
    dofs: &[C64],
    t: usize,
    lambda: [f64; 4],
    geom: &ElemGeom,
) -> Vec3c {
    let gphi = p2_gradients(lambda, geom);
    let mut g = Vec3c::zeros();
    for (m, &node) in space.elem_nodes[t].iter().enumerate() {
        for c in 0..3 {
            g[c] += dofs[node as usize] * gphi[m][c];
        }
    }
    g
}

fn quad_sum(space: &FeSpace, rule: &TetRule, mut f: impl FnMut(usize, [f64; 4], Vec3) -> f64) -> f64 {
    let mesh = &space.mesh;
    let mut acc = 0.0;
    for t in 0..mesh.tets.len() {
        let geom = ElemGeom::new(mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = mesh.point_of(t, lam);
            acc += rule.weights[q] * geom.volume * f(t, lam, x);
        }
    }
    acc
}

/// L² norm of a discrete P2 vector field (degree-5 rule).
pub fn l2_norm_vector(space: &FeSpace, dofs: &[C64]) -> f64 {
    let rule = tet_degree5();
    quad_sum(space, &rule, |t, lam, _| {
        eval_vector(space, dofs, t, lam).norm_squared()
    })
    .sqrt()
}

/// L² distance between a discrete P2 vector field and a closed-form field.
pub fn l2_error_vector(
    space: &FeSpace,
    dofs: &[C64],
    exact: &dyn Fn(Vec3) -> Vec3c,
) -> f64 {
    let rule = tet_degree5();
    quad_sum(space, &rule, |t, lam, x| {
        (eval_vector(space, dofs, t, lam) - exact(x)).norm_squared()
    })
    .sqrt()
}

/// L² norm of a discrete P1 scalar field.
pub fn l2_norm_scalar_p1(space: &FeSpace, dofs: &[C64]) -> f64 {
    let rule = tet_degree5();
    quad_sum(space, &rule, |t, lam, _| {
        eval_scalar_p1(&space.mesh, dofs, t, lam).norm_sqr()
    })
    .sqrt()
}

/// H¹ seminorm of a discrete P1 scalar field.
pub fn h1_seminorm_scalar_p1(space: &FeSpace, dofs: &[C64]) -> f64 {
    let mesh = &space.mesh;
    let mut acc = 0.0;
    for t in 0..mesh.tets.len() {
        let geom = ElemGeom::new(mesh, t);
        let g = eval_scalar_p1_grad(mesh, dofs, t, &geom);
        acc += geom.volume * g.norm_squared();
    }
    acc.sqrt()
}

/// L² distance between a discrete P1 scalar and a closed-form scalar.
pub fn l2_error_scalar_p1(space: &FeSpace, dofs: &[C64], exact: &dyn Fn(Vec3) -> C64) -> f64 {
    let rule = tet_degree5();
    quad_sum(space, &rule, |t, lam, x| {
        (eval_scalar_p1(&space.mesh, dofs, t, lam) - exact(x)).norm_sqr()
    })
    .sqrt()
}

/// L² distance between a discrete P2 scalar and a closed-form scalar.
pub fn l2_error_scalar_p2(space: &FeSpace, dofs: &[C64], exact: &dyn Fn(Vec3) -> C64) -> f64 {
    let rule = tet_degree5();
    quad_sum(space, &rule, |t, lam, x| {
        (eval_scalar_p2(space, dofs, t, lam) - exact(x)).norm_sqr()
    })
    .sqrt()
}

/// Interpolates a closed-form field onto the P2 vector dofs.
pub fn interpolate_vector(space: &FeSpace, f: &dyn Fn(Vec3) -> Vec3c) -> Vec<C64> {
    let mut dofs = vec![Complex64::new(0.0, 0.0); space.n_vector_dofs()];
    for node in 0..space.n_nodes() as u32 {
        let v = f(space.node_position(node));
        for c in 0..3 {
            dofs[3 * node as usize + c] = v[c];
        }
    }
    dofs
}

/// Interpolates a closed-form scalar onto P1 vertex dofs.
pub fn interpolate_scalar_p1(space: &FeSpace, f: &dyn Fn(Vec3) -> C64) -> Vec<C64> {
    (0..space.n_scalar_dofs() as u32)
        .map(|v| f(space.node_position(v)))
        .collect()
}

/// Interpolates a closed-form scalar onto P2 node dofs.
pub fn interpolate_scalar_p2(space: &FeSpace, f: &dyn Fn(Vec3) -> C64) -> Vec<C64> {
    (0..space.n_nodes() as u32)
        .map(|node| f(space.node_position(node)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{CubeFace, Mesh};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    #[test]
    fn p2_partition_of_unity() {
        let lam = [0.1, 0.2, 0.3, 0.4];
        let phi = p2_values(lam);
        assert_relative_eq!(phi.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn p2_nodal_property() {
        // value 1 at own node, 0 at the others
        let nodes: Vec<[f64; 4]> = {
            let mut v = vec![
                [1.0, 0.0, 0.0, 0.0],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
            ];
            for (i, j) in TET_EDGES {
                let mut lam = [0.0; 4];
                lam[i] = 0.5;
                lam[j] = 0.5;
                v.push(lam);
            }
            v
        };
        for (m, &lam) in nodes.iter().enumerate() {
            let phi = p2_values(lam);
            for (k, &p) in phi.iter().enumerate() {
                let expect = if k == m { 1.0 } else { 0.0 };
                assert_relative_eq!(p, expect, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn interpolated_field_reproduced_pointwise() {
        let mesh = Arc::new(Mesh::unit_cube(2, CubeFace::XMin));
        let space = FeSpace::new(mesh);
        // quadratic fields are reproduced exactly by P2 interpolation
        let f = |x: Vec3| {
            Vec3c::new(
                Complex64::new(x[0] * x[0] + 2.0 * x[1], -x[2]),
                Complex64::new(x[1] * x[2], 1.0),
                Complex64::new(x[0] * x[2] + 1.0, x[1] * x[1]),
            )
        };
        let dofs = interpolate_vector(&space, &f);
        let lam = [0.15, 0.25, 0.35, 0.25];
        for t in [0, 3, 17] {
            let x = space.mesh.point_of(t, lam);
            let v = eval_vector(&space, &dofs, t, lam);
            assert!((v - f(x)).norm() < 1e-13);
        }
        assert!(l2_error_vector(&space, &dofs, &f) < 1e-13);
    }

    #[test]
    fn curl_of_linear_field() {
        let mesh = Arc::new(Mesh::unit_cube(1, CubeFace::XMin));
        let space = FeSpace::new(mesh);
        // v = (z, x, y): curl = (1, 1, 1)
        let f = |x: Vec3| {
            Vec3c::new(
                Complex64::new(x[2], 0.0),
                Complex64::new(x[0], 0.0),
                Complex64::new(x[1], 0.0),
            )
        };
        let dofs = interpolate_vector(&space, &f);
        for t in 0..space.mesh.tets.len() {
            let geom = ElemGeom::new(&space.mesh, t);
            let c = eval_curl(&space, &dofs, t, [0.25; 4], &geom);
            for k in 0..3 {
                assert_relative_eq!(c[k].re, 1.0, epsilon = 1e-12);
                assert_relative_eq!(c[k].im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn l2_norm_of_constant() {
        let mesh = Arc::new(Mesh::unit_cube(2, CubeFace::XMin));
        let space = FeSpace::new(mesh);
        let f = |_x: Vec3| Vec3c::new(
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 4.0),
            Complex64::new(0.0, 0.0),
        );
        let dofs = interpolate_vector(&space, &f);
        // unit cube: ‖v‖ = sqrt(9+16) = 5
        assert_relative_eq!(l2_norm_vector(&space, &dofs), 5.0, max_relative = 1e-13);
    }
}
