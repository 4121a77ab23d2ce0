//! Assembly of the sesquilinear forms and right-hand sides over a
//! Taylor–Hood space, and essential boundary-condition handling by
//! pseudo-elimination in rotated local frames.
//!
//! Forms (complex scalar products are linear in the first argument,
//! anti-linear in the second):
//!
//! ```text
//! a_s(u,v) = (curl u | curl v) − (ω²/c²)(K u | v) + s (div(K u) | div(K v)),
//! b(v,q)   = (div(K v) | q),
//! β(v,q)   = −(K v | grad q),
//! L_s(v)   = (f | v) + s (g | div(K v)) + iωμ₀⟨j_A, v_⊤⟩_{Γ_A},
//! ℓ(q)     = (g | q).
//! ```
//!
//! `div(K v)` is computed from the per-element P2 interpolant of K
//! (differentiating the interpolant), so users never supply ∇K; the mass
//! and gradient couplings use K evaluated directly at quadrature points.
//!
//! Essential conditions constrain tangential components in a local frame
//! (t₁, t₂, n) built from area-averaged face normals; nodes where faces
//! with independent normals meet have all three components constrained to
//! the least-squares value honoring every tangential condition. Rows and
//! columns of constrained dofs are eliminated with the lifting moved to
//! the right-hand side.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::Error;
use crate::fieldops::{p2_gradients, p2_values, tri_p2_values, ElemGeom};
use crate::mesh::BoundaryTag;
use crate::plasma::PlasmaEnvironment;
use crate::quadrature::{tet_degree4, tri_degree4, TetRule};
use crate::space::{FeSpace, NodeClass};
use crate::sparse::CsrComplex;
use crate::{Mat3c, Result, Vec3, Vec3c, C64};

/// Closed-form complex vector field.
pub type VectorFn<'a> = &'a (dyn Fn(Vec3) -> Vec3c + Sync);
/// Closed-form complex scalar field.
pub type ScalarFn<'a> = &'a (dyn Fn(Vec3) -> C64 + Sync);

/// Volume and boundary data of a solve.
pub struct SourceData<'a> {
    /// Volumic source f.
    pub f: VectorFn<'a>,
    /// Divergence datum g (compatible data satisfy div f = −(ω²/c²) g).
    pub g: ScalarFn<'a>,
    /// Antenna surface current on Γ_A (natural condition), tangential.
    pub j_a: Option<VectorFn<'a>>,
    /// Antenna electric field on Γ_A (essential condition).
    pub e_a: Option<VectorFn<'a>>,
}

fn zero_vec(_: Vec3) -> Vec3c {
    Vec3c::zeros()
}
fn zero_scalar(_: Vec3) -> C64 {
    Complex64::new(0.0, 0.0)
}

impl<'a> SourceData<'a> {
    pub fn zero() -> SourceData<'static> {
        SourceData {
            f: &zero_vec,
            g: &zero_scalar,
            j_a: None,
            e_a: None,
        }
    }
}

/// Whether assembly insists on an absorbing environment (all solver entry
/// points do) or runs in diagnostic mode for tensor/matrix inspection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbsorptionGate {
    Enforce,
    Diagnostic,
}

/// How the boundary data enters.
pub enum BcMode<'a> {
    /// E × n = E_A × n on Γ_A (zero without a datum), E × n = 0 on Γ_C.
    Dirichlet { e_a: Option<VectorFn<'a>> },
    /// Natural condition on Γ_A through j_A; essential only on Γ_C.
    Antenna,
}

/// Evaluates the response tensor on a (sub)mesh, mapping local tet indices
/// to the environment's mesh for tabulated profiles.
#[derive(Clone, Copy)]
pub struct CoefficientMap<'a> {
    pub env: &'a PlasmaEnvironment,
    /// Local tet → tet of `env.mesh`, when assembling on a submesh.
    pub global_tet: Option<&'a [usize]>,
}

impl<'a> CoefficientMap<'a> {
    pub fn new(env: &'a PlasmaEnvironment) -> Self {
        CoefficientMap {
            env,
            global_tet: None,
        }
    }

    fn hint(&self, local_tet: usize) -> Option<usize> {
        match self.global_tet {
            Some(map) => Some(map[local_tet]),
            None => Some(local_tet),
        }
    }

    pub fn tensor(&self, x: Vec3, local_tet: usize) -> Result<crate::plasma::ResponseTensor> {
        let hint = if self.env.mesh.is_some() {
            self.hint(local_tet)
        } else {
            None
        };
        self.env.tensor_at_hint(x, hint)
    }
}

/// Everything a one-domain solve needs: matrices, right-hand sides, the
/// augmentation parameter and the essential-condition plan.
pub struct AssembledSystem {
    /// Augmented form a_s (plain form when s = 0).
    pub a_s: CsrComplex,
    /// Divergence coupling b (scalar rows × vector columns).
    pub b: CsrComplex,
    /// Gradient coupling β (scalar rows × vector columns).
    pub b_beta: CsrComplex,
    pub rhs_vector: Vec<C64>,
    pub rhs_scalar: Vec<C64>,
    pub s: C64,
    pub dirichlet: DirichletPlan,
    /// Min Im λ over quadrature points.
    pub zeta: f64,
    /// Max |λ| over quadrature points.
    pub eta: f64,
}

/// Validates the augmentation parameter: s = 0 (plain) or Re s > 0 with
/// Im s ≤ 0.
pub fn validate_s(s: C64) -> Result<()> {
    if s == Complex64::new(0.0, 0.0) {
        return Ok(());
    }
    if s.re > 0.0 && s.im <= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid_parameter(
            "s",
            format!("augmentation needs Re s > 0 and Im s ≤ 0, got {s}"),
        ))
    }
}

// ---------------------------------------------------------------------------
// sparsity patterns

fn node_adjacency(space: &FeSpace) -> Vec<Vec<u32>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); space.n_nodes()];
    for nodes in &space.elem_nodes {
        for &a in nodes {
            for &b in nodes {
                adj[a as usize].push(b);
            }
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

fn vector_pattern(space: &FeSpace) -> Vec<Vec<u32>> {
    let adj = node_adjacency(space);
    let mut rows = Vec::with_capacity(3 * adj.len());
    for list in &adj {
        let cols: Vec<u32> = list
            .iter()
            .flat_map(|&n| [3 * n, 3 * n + 1, 3 * n + 2])
            .collect();
        rows.push(cols.clone());
        rows.push(cols.clone());
        rows.push(cols);
    }
    rows
}

fn scalar_vector_pattern(space: &FeSpace) -> Vec<Vec<u32>> {
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); space.n_scalar_dofs()];
    for (t, nodes) in space.elem_nodes.iter().enumerate() {
        let vs = space.mesh.tets[t];
        for &v in &vs {
            for &n in nodes {
                adj[v as usize].push(n);
            }
        }
    }
    adj.into_iter()
        .map(|mut list| {
            list.sort_unstable();
            list.dedup();
            list.into_iter()
                .flat_map(|n| [3 * n, 3 * n + 1, 3 * n + 2])
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// element kernel

struct ElemMats {
    a: Vec<C64>,    // 30×30 (row = test dof, col = trial dof)
    b: Vec<C64>,    // 4×30
    beta: Vec<C64>, // 4×30
    rhs_v: [C64; 30],
    rhs_s: [C64; 4],
    min_im: f64,
    max_abs: f64,
}

#[allow(clippy::too_many_arguments)]
fn element_kernel(
    space: &FeSpace,
    coeff: &CoefficientMap,
    rule: &TetRule,
    k_nodes: &[Mat3c],
    t: usize,
    s: C64,
    f: VectorFn,
    g: ScalarFn,
) -> Result<ElemMats> {
    let mesh = &space.mesh;
    let geom = ElemGeom::new(mesh, t);
    let nodes = space.elem_nodes[t];
    let env = coeff.env;
    let w2c2 = env.omega * env.omega / (env.constants.c * env.constants.c);

    let zero = Complex64::new(0.0, 0.0);
    let mut out = ElemMats {
        a: vec![zero; 900],
        b: vec![zero; 120],
        beta: vec![zero; 120],
        rhs_v: [zero; 30],
        rhs_s: [zero; 4],
        min_im: f64::INFINITY,
        max_abs: 0.0,
    };

    for (q, &lam) in rule.points.iter().enumerate() {
        let x = mesh.point_of(t, lam);
        let w = rule.weights[q] * geom.volume;
        let phi = p2_values(lam);
        let gphi = p2_gradients(lam, &geom);

        let tensor = coeff.tensor(x, t)?;
        let kq = tensor.k;
        for lamb in tensor.eigenvalues() {
            out.min_im = out.min_im.min(lamb.im);
            out.max_abs = out.max_abs.max(lamb.norm());
        }

        // P2 interpolant of K and its gradient at this point
        let mut ktilde = Mat3c::zeros();
        let mut kgrad = [[Vec3c::zeros(); 3]; 3]; // kgrad[i][j] = ∇(K̃_ij)
        for (m, &node) in nodes.iter().enumerate() {
            let kn = &k_nodes[node as usize];
            for i in 0..3 {
                for j in 0..3 {
                    ktilde[(i, j)] += kn[(i, j)] * phi[m];
                    for d in 0..3 {
                        kgrad[i][j][d] += kn[(i, j)] * gphi[m][d];
                    }
                }
            }
        }
        // Σ_i ∂_i K̃_ik per column k
        let divcol = [
            kgrad[0][0][0] + kgrad[1][0][1] + kgrad[2][0][2],
            kgrad[0][1][0] + kgrad[1][1][1] + kgrad[2][1][2],
            kgrad[0][2][0] + kgrad[1][2][1] + kgrad[2][2][2],
        ];

        // div(K φ_n e_k) and curl(φ_n e_k) for all 30 basis fields
        let mut div_b = [[zero; 3]; 10];
        let mut curl_b = [[Vec3::zeros(); 3]; 10];
        for n in 0..10 {
            let gv = gphi[n];
            for k in 0..3 {
                let mut d = divcol[k] * phi[n];
                for i in 0..3 {
                    d += ktilde[(i, k)] * gv[i];
                }
                div_b[n][k] = d;
            }
            curl_b[n][0] = Vec3::new(0.0, gv[2], -gv[1]);
            curl_b[n][1] = Vec3::new(-gv[2], 0.0, gv[0]);
            curl_b[n][2] = Vec3::new(gv[1], -gv[0], 0.0);
        }

        let fw = f(x);
        let gw = g(x);

        for m in 0..10 {
            for l in 0..3 {
                let row = 3 * m + l;
                let ddag = div_b[m][l].conj();
                for n in 0..10 {
                    let phnm = phi[n] * phi[m];
                    for k in 0..3 {
                        let col = 3 * n + k;
                        let curl_term = curl_b[n][k].dot(&curl_b[m][l]);
                        let mass = kq[(l, k)] * phnm;
                        let mut val = Complex64::new(curl_term, 0.0) - w2c2 * mass;
                        if s != zero {
                            val += s * div_b[n][k] * ddag;
                        }
                        out.a[row * 30 + col] += w * val;
                    }
                }
                out.rhs_v[row] += w * (fw[l] * phi[m] + s * gw * ddag);
            }
        }
        for m in 0..4 {
            let p1 = lam[m];
            out.rhs_s[m] += w * gw * p1;
            for n in 0..10 {
                for k in 0..3 {
                    let col = 3 * n + k;
                    out.b[m * 30 + col] += w * div_b[n][k] * p1;
                    // β(v,q) = −(K v | ∇q): exact K at the point
                    let mut kcol = zero;
                    for i in 0..3 {
                        kcol += kq[(i, k)] * geom.grads[m][i];
                    }
                    out.beta[m * 30 + col] -= w * phi[n] * kcol;
                }
            }
        }
    }
    Ok(out)
}

fn tensor_node_cache(space: &FeSpace, coeff: &CoefficientMap) -> Result<Vec<Mat3c>> {
    let mut rep = vec![usize::MAX; space.n_nodes()];
    for (t, nodes) in space.elem_nodes.iter().enumerate() {
        for &n in nodes {
            if rep[n as usize] == usize::MAX {
                rep[n as usize] = t;
            }
        }
    }
    (0..space.n_nodes())
        .into_par_iter()
        .map(|n| {
            let t = rep[n];
            if t == usize::MAX {
                return Ok(Mat3c::identity());
            }
            let x = space.node_position(n as u32);
            Ok(coeff.tensor(x, t)?.k)
        })
        .collect()
}

/// Drives the element loop: assembles a_s, b, β and both right-hand sides
/// in one pass. Deterministic: elements are processed in batches computed
/// in parallel but inserted in element order.
pub fn assemble_all(
    space: &FeSpace,
    coeff: &CoefficientMap,
    src: &SourceData,
    s: C64,
    gate: AbsorptionGate,
) -> Result<AssembledSystem> {
    validate_s(s)?;
    let rule = tet_degree4();
    let k_nodes = tensor_node_cache(space, coeff)?;

    let nvec = space.n_vector_dofs();
    let nsc = space.n_scalar_dofs();
    let mut a_s = CsrComplex::from_pattern(nvec, nvec, vector_pattern(space));
    let sv_pattern = scalar_vector_pattern(space);
    let mut b = CsrComplex::from_pattern(nsc, nvec, sv_pattern.clone());
    let mut b_beta = CsrComplex::from_pattern(nsc, nvec, sv_pattern);
    let mut rhs_vector = vec![Complex64::new(0.0, 0.0); nvec];
    let mut rhs_scalar = vec![Complex64::new(0.0, 0.0); nsc];
    let mut zeta = f64::INFINITY;
    let mut eta: f64 = 0.0;

    let n_tets = space.mesh.tets.len();
    const BATCH: usize = 256;
    for start in (0..n_tets).step_by(BATCH) {
        let end = (start + BATCH).min(n_tets);
        let batch: Result<Vec<ElemMats>> = (start..end)
            .into_par_iter()
            .map(|t| element_kernel(space, coeff, &rule, &k_nodes, t, s, src.f, src.g))
            .collect();
        let mats = batch?;
        for (off, em) in mats.iter().enumerate() {
            let t = start + off;
            let nodes = space.elem_nodes[t];
            let vs = space.mesh.tets[t];
            zeta = zeta.min(em.min_im);
            eta = eta.max(em.max_abs);
            for m in 0..10 {
                for l in 0..3 {
                    let row = 3 * nodes[m] as usize + l;
                    rhs_vector[row] += em.rhs_v[3 * m + l];
                    for n in 0..10 {
                        for k in 0..3 {
                            let col = 3 * nodes[n] + k as u32;
                            a_s.add(row, col, em.a[(3 * m + l) * 30 + 3 * n + k]);
                        }
                    }
                }
            }
            for m in 0..4 {
                let row = vs[m] as usize;
                rhs_scalar[row] += em.rhs_s[m];
                for n in 0..10 {
                    for k in 0..3 {
                        let col = 3 * nodes[n] + k as u32;
                        b.add(row, col, em.b[m * 30 + 3 * n + k]);
                        b_beta.add(row, col, em.beta[m * 30 + 3 * n + k]);
                    }
                }
            }
        }
    }

    if gate == AbsorptionGate::Enforce && !(zeta > 0.0) {
        return Err(Error::AbsorptionMissing { zeta });
    }

    // antenna natural condition: l(v) += iωμ₀ ⟨j_A, v_⊤⟩ over Γ_A
    if let Some(j_a) = src.j_a {
        antenna_rhs(space, coeff.env, j_a, &mut rhs_vector)?;
    }

    Ok(AssembledSystem {
        a_s,
        b,
        b_beta,
        rhs_vector,
        rhs_scalar,
        s,
        dirichlet: DirichletPlan::empty(space.n_nodes()),
        zeta,
        eta,
    })
}

/// Assembles the form a_s alone (the plain form a when s = 0).
pub fn assemble_a_s(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    s: C64,
    gate: AbsorptionGate,
) -> Result<CsrComplex> {
    let src = SourceData::zero();
    Ok(assemble_all(space, &CoefficientMap::new(env), &src, s, gate)?.a_s)
}

/// Assembles the divergence coupling b(v, q) = (div(K v) | q).
pub fn assemble_b(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    gate: AbsorptionGate,
) -> Result<CsrComplex> {
    let src = SourceData::zero();
    Ok(assemble_all(
        space,
        &CoefficientMap::new(env),
        &src,
        Complex64::new(0.0, 0.0),
        gate,
    )?
    .b)
}

/// Assembles the gradient coupling β(v, q) = −(K v | grad q).
pub fn assemble_beta(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    gate: AbsorptionGate,
) -> Result<CsrComplex> {
    let src = SourceData::zero();
    Ok(assemble_all(
        space,
        &CoefficientMap::new(env),
        &src,
        Complex64::new(0.0, 0.0),
        gate,
    )?
    .b_beta)
}

/// Assembles the right-hand sides (L_s, ℓ).
pub fn assemble_rhs(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    s: C64,
    gate: AbsorptionGate,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let sys = assemble_all(space, &CoefficientMap::new(env), src, s, gate)?;
    Ok((sys.rhs_vector, sys.rhs_scalar))
}

fn antenna_rhs(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    j_a: VectorFn,
    rhs: &mut [C64],
) -> Result<()> {
    let rule = tri_degree4();
    let i_omega_mu0 = Complex64::new(0.0, env.omega * env.constants.mu0);
    for bt in space
        .mesh
        .boundary_tris
        .iter()
        .filter(|bt| bt.tag == BoundaryTag::GammaA)
    {
        let nodes = space.tri_nodes(bt.vertices);
        let (area, normal) = space.mesh.tri_area_normal(bt.vertices);
        let verts: Vec<Vec3> = bt
            .vertices
            .iter()
            .map(|&v| space.mesh.vertices[v as usize])
            .collect();
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = lam[0] * verts[0] + lam[1] * verts[1] + lam[2] * verts[2];
            let jv = j_a(x);
            let jn = (jv[0] * normal[0] + jv[1] * normal[1] + jv[2] * normal[2]).norm();
            if jn > 1e-10 * jv.norm().max(1e-300) {
                return Err(Error::InvalidData(format!(
                    "antenna current has a normal component ({jn:.3e}) at {x:?}"
                )));
            }
            let w = rule.weights[q] * area;
            let phi = tri_p2_values(lam);
            for (m, &node) in nodes.iter().enumerate() {
                for l in 0..3 {
                    rhs[3 * node as usize + l] += i_omega_mu0 * w * jv[l] * phi[m];
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// essential boundary conditions

/// Constraint plan: per-node rotation frames plus the list of constrained
/// (rotated) vector dofs and their values.
#[derive(Debug, Clone)]
pub struct DirichletPlan {
    pub frames: Vec<Option<nalgebra::Matrix3<f64>>>,
    pub constrained: Vec<(usize, C64)>,
}

impl DirichletPlan {
    pub fn empty(n_nodes: usize) -> DirichletPlan {
        DirichletPlan {
            frames: vec![None; n_nodes],
            constrained: Vec::new(),
        }
    }

    /// Number of constrained vector dofs.
    pub fn n_constrained(&self) -> usize {
        self.constrained.len()
    }

    /// True if the rotated dof is constrained.
    pub fn is_constrained(&self, dof: usize) -> bool {
        self.constrained.iter().any(|&(d, _)| d == dof)
    }
}

fn dotc_real(t: Vec3, v: Vec3c) -> C64 {
    t[0] * v[0] + t[1] * v[1] + t[2] * v[2]
}

/// Builds the essential-condition plan for a boundary mode.
pub fn essential_bc_plan(space: &FeSpace, mode: &BcMode) -> Result<DirichletPlan> {
    let mut plan = DirichletPlan::empty(space.n_nodes());
    for node in 0..space.n_nodes() {
        let x = space.node_position(node as u32);
        // active tangential conditions: (face normal, boundary value)
        let mut active: Vec<(Vec3, Vec3c)> = Vec::new();
        let mut collect = |normal: Vec3, tag: BoundaryTag, active: &mut Vec<(Vec3, Vec3c)>| {
            match (mode, tag) {
                (BcMode::Dirichlet { e_a }, BoundaryTag::GammaA) => {
                    let v = e_a.map_or(Vec3c::zeros(), |f| f(x));
                    active.push((normal, v));
                }
                (BcMode::Dirichlet { .. }, BoundaryTag::GammaC) => {
                    active.push((normal, Vec3c::zeros()));
                }
                (BcMode::Antenna, BoundaryTag::GammaC) => {
                    active.push((normal, Vec3c::zeros()));
                }
                (BcMode::Antenna, BoundaryTag::GammaA) => {}
            }
        };
        match &space.node_class[node] {
            NodeClass::Interior => {}
            NodeClass::Face { tag, normal } => collect(*normal, *tag, &mut active),
            NodeClass::EdgeCorner { clusters } => {
                for (normal, tag) in clusters {
                    collect(*normal, *tag, &mut active);
                }
            }
        }
        match active.len() {
            0 => {}
            1 => {
                let (normal, value) = active[0];
                let (t1, t2) = crate::plasma::orthonormal_complement(normal);
                plan.frames[node] = Some(nalgebra::Matrix3::from_rows(&[
                    t1.transpose(),
                    t2.transpose(),
                    normal.transpose(),
                ]));
                plan.constrained.push((3 * node, dotc_real(t1, value)));
                plan.constrained.push((3 * node + 1, dotc_real(t2, value)));
            }
            _ => {
                // all components constrained: least-squares value honoring
                // every tangential condition
                let mut ata = nalgebra::Matrix3::<f64>::zeros();
                let mut atb = Vec3c::zeros();
                for (normal, value) in &active {
                    let (t1, t2) = crate::plasma::orthonormal_complement(*normal);
                    for t in [t1, t2] {
                        ata += t * t.transpose();
                        let rhs = dotc_real(t, *value);
                        for c in 0..3 {
                            atb[c] += t[c] * rhs;
                        }
                    }
                }
                let atac = ata.map(|v| Complex64::new(v, 0.0));
                let sol = atac.lu().solve(&atb).ok_or_else(|| {
                    Error::InvalidData(format!(
                        "degenerate tangential constraints at node {node} ({x:?})"
                    ))
                })?;
                for c in 0..3 {
                    plan.constrained.push((3 * node + c, sol[c]));
                }
            }
        }
    }
    Ok(plan)
}

/// Rotates a rhs/solution-like vector into frame coordinates (u = T x).
pub fn rotate_to_frames(plan: &DirichletPlan, x: &mut [C64]) {
    for (node, fr) in plan.frames.iter().enumerate() {
        let Some(r) = fr else { continue };
        let base = 3 * node;
        if base + 2 >= x.len() {
            break;
        }
        let old = [x[base], x[base + 1], x[base + 2]];
        for i in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, o) in old.iter().enumerate() {
                acc += r[(i, j)] * o;
            }
            x[base + i] = acc;
        }
    }
}

/// Rotates a frame-coordinate vector back to Cartesian components
/// (x = Tᵀ u).
pub fn rotate_from_frames(plan: &DirichletPlan, x: &mut [C64]) {
    for (node, fr) in plan.frames.iter().enumerate() {
        let Some(r) = fr else { continue };
        let base = 3 * node;
        if base + 2 >= x.len() {
            break;
        }
        let old = [x[base], x[base + 1], x[base + 2]];
        for i in 0..3 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, o) in old.iter().enumerate() {
                acc += r[(j, i)] * o;
            }
            x[base + i] = acc;
        }
    }
}

/// Applies the essential conditions to an assembled (possibly saddle)
/// system in place: rotates the vector block to local frames, then
/// eliminates constrained dofs. `extra_constraints` carries scalar-block
/// constraints with indices already offset into the system.
pub fn apply_essential_bc(
    mat: &mut CsrComplex,
    rhs: &mut [C64],
    plan: &DirichletPlan,
    extra_constraints: &[(usize, C64)],
) {
    mat.rotate_node_blocks(&plan.frames);
    rotate_to_frames(plan, rhs);
    let mut all = plan.constrained.clone();
    all.extend_from_slice(extra_constraints);
    mat.eliminate_dirichlet(rhs, &all);
}

/// Zero-Dirichlet constraints for the P1 scalar space (H¹₀): every
/// boundary vertex pinned to zero. `offset` shifts indices into a saddle
/// system.
pub fn scalar_zero_constraints_p1(space: &FeSpace, offset: usize) -> Vec<(usize, C64)> {
    space
        .boundary_vertices()
        .into_iter()
        .map(|v| (offset + v as usize, Complex64::new(0.0, 0.0)))
        .collect()
}

/// Zero-Dirichlet constraints for the P2 scalar space (vertices + edges).
pub fn scalar_zero_constraints_p2(space: &FeSpace, offset: usize) -> Vec<(usize, C64)> {
    (0..space.n_nodes())
        .filter(|&n| space.node_class[n].is_boundary())
        .map(|n| (offset + n, Complex64::new(0.0, 0.0)))
        .collect()
}

// ---------------------------------------------------------------------------
// scalar elliptic assembly (for div(K grad·) solves)

/// Which scalar space the elliptic solver uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScalarSpaceKind {
    P1,
    P2,
}

impl ScalarSpaceKind {
    pub fn n_dofs(&self, space: &FeSpace) -> usize {
        match self {
            ScalarSpaceKind::P1 => space.n_scalar_dofs(),
            ScalarSpaceKind::P2 => space.n_nodes(),
        }
    }
}

/// Assembles 𝔞(φ,ψ) = (K grad φ | grad ψ) on the chosen scalar space.
/// With `adjoint` the tensor is replaced by K*.
pub fn assemble_k_laplacian(
    space: &FeSpace,
    coeff: &CoefficientMap,
    kind: ScalarSpaceKind,
    adjoint: bool,
    gate: AbsorptionGate,
) -> Result<CsrComplex> {
    let rule = tet_degree4();
    let n = kind.n_dofs(space);
    let pattern: Vec<Vec<u32>> = match kind {
        ScalarSpaceKind::P1 => {
            let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
            for vs in &space.mesh.tets {
                for &a in vs {
                    for &b in vs {
                        adj[a as usize].push(b);
                    }
                }
            }
            adj.into_iter()
                .map(|mut l| {
                    l.sort_unstable();
                    l.dedup();
                    l
                })
                .collect()
        }
        ScalarSpaceKind::P2 => node_adjacency(space),
    };
    let mut mat = CsrComplex::from_pattern(n, n, pattern);
    let mut zeta = f64::INFINITY;

    for t in 0..space.mesh.tets.len() {
        let geom = ElemGeom::new(&space.mesh, t);
        let (dofs, nloc): (&[u32], usize) = match kind {
            ScalarSpaceKind::P1 => (&space.mesh.tets[t], 4),
            ScalarSpaceKind::P2 => (&space.elem_nodes[t], 10),
        };
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = space.mesh.point_of(t, lam);
            let w = rule.weights[q] * geom.volume;
            let tensor = coeff.tensor(x, t)?;
            for l in tensor.eigenvalues() {
                zeta = zeta.min(l.im);
            }
            let k = if adjoint { tensor.k.adjoint() } else { tensor.k };
            let grads: Vec<Vec3> = match kind {
                ScalarSpaceKind::P1 => geom.grads.to_vec(),
                ScalarSpaceKind::P2 => p2_gradients(lam, &geom).to_vec(),
            };
            for m in 0..nloc {
                for nn in 0..nloc {
                    // (K ∇φ_n | ∇ψ_m) = Σ_ij K_ij ∂_jφ_n ∂_iψ_m
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..3 {
                        for j in 0..3 {
                            acc += k[(i, j)] * grads[nn][j] * grads[m][i];
                        }
                    }
                    mat.add(dofs[m] as usize, dofs[nn], w * acc);
                }
            }
        }
    }
    if gate == AbsorptionGate::Enforce && !(zeta > 0.0) {
        return Err(Error::AbsorptionMissing { zeta });
    }
    Ok(mat)
}

/// Right-hand side (f | ψ) for the scalar elliptic problem.
pub fn scalar_rhs_l2(space: &FeSpace, kind: ScalarSpaceKind, f: ScalarFn) -> Vec<C64> {
    let rule = tet_degree4();
    let mut rhs = vec![Complex64::new(0.0, 0.0); kind.n_dofs(space)];
    for t in 0..space.mesh.tets.len() {
        let geom = ElemGeom::new(&space.mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = space.mesh.point_of(t, lam);
            let w = rule.weights[q] * geom.volume;
            let fv = f(x);
            match kind {
                ScalarSpaceKind::P1 => {
                    for m in 0..4 {
                        rhs[space.mesh.tets[t][m] as usize] += w * fv * lam[m];
                    }
                }
                ScalarSpaceKind::P2 => {
                    let phi = p2_values(lam);
                    for m in 0..10 {
                        rhs[space.elem_nodes[t][m] as usize] += w * fv * phi[m];
                    }
                }
            }
        }
    }
    rhs
}

/// Right-hand side (F | grad ψ) for divergence-form scalar data.
pub fn scalar_rhs_grad_weighted(
    space: &FeSpace,
    kind: ScalarSpaceKind,
    f: VectorFn,
) -> Vec<C64> {
    let rule = tet_degree4();
    let mut rhs = vec![Complex64::new(0.0, 0.0); kind.n_dofs(space)];
    for t in 0..space.mesh.tets.len() {
        let geom = ElemGeom::new(&space.mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = space.mesh.point_of(t, lam);
            let w = rule.weights[q] * geom.volume;
            let fv = f(x);
            let grads: Vec<Vec3> = match kind {
                ScalarSpaceKind::P1 => geom.grads.to_vec(),
                ScalarSpaceKind::P2 => p2_gradients(lam, &geom).to_vec(),
            };
            let dofs: &[u32] = match kind {
                ScalarSpaceKind::P1 => &space.mesh.tets[t],
                ScalarSpaceKind::P2 => &space.elem_nodes[t],
            };
            for (m, &dof) in dofs.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    acc += fv[i] * grads[m][i];
                }
                rhs[dof as usize] += w * acc;
            }
        }
    }
    rhs
}

/// Right-hand side (K u | grad ψ) used by the Helmholtz decomposition;
/// `u` is evaluated per-tet at barycentric points.
pub fn scalar_rhs_k_weighted(
    space: &FeSpace,
    coeff: &CoefficientMap,
    kind: ScalarSpaceKind,
    u: &dyn Fn(usize, [f64; 4], Vec3) -> Vec3c,
) -> Result<Vec<C64>> {
    let rule = tet_degree4();
    let mut rhs = vec![Complex64::new(0.0, 0.0); kind.n_dofs(space)];
    for t in 0..space.mesh.tets.len() {
        let geom = ElemGeom::new(&space.mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = space.mesh.point_of(t, lam);
            let w = rule.weights[q] * geom.volume;
            let k = coeff.tensor(x, t)?.k;
            let uv = u(t, lam, x);
            let ku = k * uv;
            let grads: Vec<Vec3> = match kind {
                ScalarSpaceKind::P1 => geom.grads.to_vec(),
                ScalarSpaceKind::P2 => p2_gradients(lam, &geom).to_vec(),
            };
            let dofs: &[u32] = match kind {
                ScalarSpaceKind::P1 => &space.mesh.tets[t],
                ScalarSpaceKind::P2 => &space.elem_nodes[t],
            };
            for (m, &dof) in dofs.iter().enumerate() {
                // (K u | ∇ψ_m): real test gradient
                let mut acc = Complex64::new(0.0, 0.0);
                for i in 0..3 {
                    acc += ku[i] * grads[m][i];
                }
                rhs[dof as usize] += w * acc;
            }
        }
    }
    Ok(rhs)
}
