//! One-domain solves of the four variational formulations, the
//! `div(K grad·)` elliptic solver and the K-weighted Helmholtz
//! decomposition.
//!
//! All systems are solved by sparse LU with one step of iterative
//! refinement; Krylov methods are reserved for the interface system of the
//! decomposed solver. Every entry point refuses environments without
//! absorption (ζ ≤ 0), where the continuous problem itself is ill-posed.

use num_complex::Complex64;

use crate::assemble::{
    apply_essential_bc, assemble_all, assemble_k_laplacian, essential_bc_plan,
    rotate_from_frames, scalar_rhs_grad_weighted, scalar_rhs_k_weighted, scalar_rhs_l2,
    scalar_zero_constraints_p1,
    scalar_zero_constraints_p2, validate_s, AbsorptionGate, BcMode, CoefficientMap, ScalarFn,
    ScalarSpaceKind, SourceData, VectorFn,
};
use crate::error::Error;
use crate::fieldops::{
    eval_scalar_p1_grad, eval_scalar_p2_grad, eval_vector, h1_seminorm_scalar_p1,
    l2_norm_scalar_p1, p2_gradients, p2_values, ElemGeom,
};
use crate::linsolve::{solve_refined, FactorizedLu};
use crate::plasma::PlasmaEnvironment;
use crate::quadrature::tet_degree5;
use crate::space::FeSpace;
use crate::sparse::saddle;
use crate::{Mat3c, Result, Vec3, Vec3c, C64};

/// The four variational formulations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Formulation {
    Plain,
    Augmented,
    MixedUnaugmented,
    MixedAugmented,
}

impl Formulation {
    pub fn is_mixed(&self) -> bool {
        matches!(self, Formulation::MixedUnaugmented | Formulation::MixedAugmented)
    }

    pub fn is_augmented(&self) -> bool {
        matches!(self, Formulation::Augmented | Formulation::MixedAugmented)
    }
}

/// Solver parameters.
#[derive(Debug, Clone)]
pub struct SolverOptions {
    /// Augmentation parameter (augmented formulations only).
    pub s: C64,
    /// Relative residual contract for the direct solve.
    pub tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            s: Complex64::new(1.0, 0.0),
            tolerance: 1e-10,
        }
    }
}

/// A solved field: complex vector dofs, the multiplier for mixed
/// formulations, and the achieved residual.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub e: Vec<C64>,
    pub p: Option<Vec<C64>>,
    pub residual_norm: f64,
    pub formulation: Formulation,
}

/// Solve diagnostics (serialized as the run report).
#[derive(Debug, Clone, serde::Serialize)]
pub struct SolveReport {
    pub formulation: Formulation,
    pub n_unknowns: usize,
    pub nnz: usize,
    pub refinement_steps: usize,
    pub residual_norm: f64,
    /// ‖p‖_{L²} for mixed formulations.
    pub p_l2: Option<f64>,
    /// ‖p‖_{H¹} seminorm for the unaugmented mixed formulation.
    pub p_h1: Option<f64>,
    /// ‖div(K E) − g‖_{L²} (interpolated-tensor convention).
    pub divergence_residual: f64,
    /// Spectral bounds sampled at assembly quadrature points.
    pub zeta: f64,
    pub eta: f64,
}

/// Solves one of the four formulations on a single domain.
///
/// The boundary mode is inferred from the sources: a present `j_a` selects
/// the antenna (natural) condition, otherwise the Dirichlet condition with
/// datum `e_a` (zero datum when absent) is applied.
pub fn solve(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    formulation: Formulation,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    let coeff = CoefficientMap::new(env);
    solve_with_map(space, &coeff, src, formulation, opts)
}

/// Like [`solve`], with an explicit coefficient map (submesh assembly).
pub fn solve_with_map(
    space: &FeSpace,
    coeff: &CoefficientMap,
    src: &SourceData,
    formulation: Formulation,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    if src.j_a.is_some() && src.e_a.is_some() {
        return Err(Error::InvalidData(
            "exactly one boundary mode: give either j_a (antenna) or e_a (Dirichlet)".into(),
        ));
    }
    let s_eff = if formulation.is_augmented() {
        validate_s(opts.s)?;
        if opts.s == Complex64::new(0.0, 0.0) {
            return Err(Error::invalid_parameter(
                "s",
                "augmented formulations need Re s > 0",
            ));
        }
        opts.s
    } else {
        Complex64::new(0.0, 0.0)
    };

    let sys = assemble_all(space, coeff, src, s_eff, AbsorptionGate::Enforce)?;
    let mode = if src.j_a.is_some() {
        BcMode::Antenna
    } else {
        BcMode::Dirichlet { e_a: src.e_a }
    };
    let plan = essential_bc_plan(space, &mode)?;

    let nvec = space.n_vector_dofs();
    let (mut mat, mut rhs, scalar_constraints) = match formulation {
        Formulation::Plain | Formulation::Augmented => {
            (sys.a_s.clone(), sys.rhs_vector.clone(), Vec::new())
        }
        Formulation::MixedAugmented => {
            let m = saddle(&sys.a_s, &sys.b)?;
            let mut rhs = sys.rhs_vector.clone();
            rhs.extend_from_slice(&sys.rhs_scalar);
            (m, rhs, Vec::new())
        }
        Formulation::MixedUnaugmented => {
            let m = saddle(&sys.a_s, &sys.b_beta)?;
            let mut rhs = sys.rhs_vector.clone();
            rhs.extend_from_slice(&sys.rhs_scalar);
            // the multiplier lives in H¹₀: pin boundary vertices
            (m, rhs, scalar_zero_constraints_p1(space, nvec))
        }
    };

    apply_essential_bc(&mut mat, &mut rhs, &plan, &scalar_constraints);
    let lu = FactorizedLu::factor(&mat)?;
    let refined = solve_refined(&mat, &lu, &rhs, opts.tolerance)?;

    let mut x = refined.x;
    rotate_from_frames(&plan, &mut x);
    let (e, p) = if formulation.is_mixed() {
        let p = x.split_off(nvec);
        (x, Some(p))
    } else {
        (x, None)
    };

    let p_l2 = p.as_ref().map(|p| l2_norm_scalar_p1(space, p));
    let p_h1 = if formulation == Formulation::MixedUnaugmented {
        p.as_ref().map(|p| h1_seminorm_scalar_p1(space, p))
    } else {
        None
    };
    let divergence_residual = div_k_residual_l2(space, coeff, &e, src.g)?;

    let report = SolveReport {
        formulation,
        n_unknowns: mat.nrows,
        nnz: mat.nnz(),
        refinement_steps: refined.refinement_steps,
        residual_norm: refined.rel_residual,
        p_l2,
        p_h1,
        divergence_residual,
        zeta: sys.zeta,
        eta: sys.eta,
    };
    Ok((
        SolutionField {
            e,
            p,
            residual_norm: refined.rel_residual,
            formulation,
        },
        report,
    ))
}

/// Plain formulation: a(E, F) = l(F).
pub fn solve_plain(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    solve(space, env, src, Formulation::Plain, opts)
}

/// Augmented formulation: a_s(E, F) = l(F).
pub fn solve_augmented(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    solve(space, env, src, Formulation::Augmented, opts)
}

/// Mixed unaugmented formulation with the β coupling and p ∈ H¹₀.
pub fn solve_mixed_unaugmented(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    solve(space, env, src, Formulation::MixedUnaugmented, opts)
}

/// Mixed augmented formulation with the b coupling and p ∈ L².
pub fn solve_mixed_augmented(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    src: &SourceData,
    opts: &SolverOptions,
) -> Result<(SolutionField, SolveReport)> {
    solve(space, env, src, Formulation::MixedAugmented, opts)
}

/// ‖div(K E_h) − g‖_{L²} with div(K·) from the per-element P2 interpolant
/// of K (the assembly convention).
pub fn div_k_residual_l2(
    space: &FeSpace,
    coeff: &CoefficientMap,
    e: &[C64],
    g: ScalarFn,
) -> Result<f64> {
    let rule = tet_degree5();
    let mesh = &space.mesh;
    // K at nodes (same cache layout as assembly)
    let mut rep = vec![usize::MAX; space.n_nodes()];
    for (t, nodes) in space.elem_nodes.iter().enumerate() {
        for &n in nodes {
            if rep[n as usize] == usize::MAX {
                rep[n as usize] = t;
            }
        }
    }
    let k_nodes: Result<Vec<Mat3c>> = (0..space.n_nodes())
        .map(|n| {
            let x = space.node_position(n as u32);
            Ok(coeff.tensor(x, rep[n])?.k)
        })
        .collect();
    let k_nodes = k_nodes?;

    let mut acc = 0.0;
    for t in 0..mesh.tets.len() {
        let geom = ElemGeom::new(mesh, t);
        let nodes = space.elem_nodes[t];
        for (q, &lam) in rule.points.iter().enumerate() {
            let x = mesh.point_of(t, lam);
            let w = rule.weights[q] * geom.volume;
            let phi = p2_values(lam);
            let gphi = p2_gradients(lam, &geom);
            let mut div = Complex64::new(0.0, 0.0);
            // div(K̃ E) = Σ_ij ∂_i(K̃_ij) E_j + K̃_ij ∂_i E_j
            let mut ktilde = Mat3c::zeros();
            let mut kdiv = [Complex64::new(0.0, 0.0); 3]; // Σ_i ∂_i K̃_ij
            for (m, &node) in nodes.iter().enumerate() {
                let kn = &k_nodes[node as usize];
                for i in 0..3 {
                    for j in 0..3 {
                        ktilde[(i, j)] += kn[(i, j)] * phi[m];
                        kdiv[j] += kn[(i, j)] * gphi[m][i];
                    }
                }
            }
            let ev = eval_vector(space, e, t, lam);
            let mut grad_e = [[Complex64::new(0.0, 0.0); 3]; 3]; // grad_e[i][j] = ∂_i E_j
            for (m, &node) in nodes.iter().enumerate() {
                for j in 0..3 {
                    let dof = e[3 * node as usize + j];
                    for i in 0..3 {
                        grad_e[i][j] += dof * gphi[m][i];
                    }
                }
            }
            for j in 0..3 {
                div += kdiv[j] * ev[j];
                for i in 0..3 {
                    div += ktilde[(i, j)] * grad_e[i][j];
                }
            }
            acc += w * (div - g(x)).norm_sqr();
        }
    }
    Ok(acc.sqrt())
}

// ---------------------------------------------------------------------------
// scalar elliptic solver and Helmholtz decomposition

/// Right-hand side of the scalar elliptic problem −div(K grad φ) = f.
pub enum ScalarRhs<'a> {
    /// f ∈ L²: ⟨f, ψ⟩ = (f | ψ).
    L2(ScalarFn<'a>),
    /// f = div F as a functional: ⟨f, ψ⟩ = −(F | grad ψ).
    DivForm(VectorFn<'a>),
}

/// Report of a `div(K grad·)` solve.
#[derive(Debug, Clone, serde::Serialize)]
pub struct KLaplacianReport {
    pub n_unknowns: usize,
    pub residual_norm: f64,
    /// ‖φ‖_{H¹} (seminorm + L² part).
    pub phi_h1: f64,
    /// ‖φ‖_{H¹}/‖data‖: the stability constant estimate (reported, not
    /// asserted — the continuous constant is not quantified).
    pub stability_ratio: f64,
}

/// Solves −div(K grad φ) = f with φ = 0 on ∂Ω, on P1 or P2 scalars. With
/// `adjoint` the operator uses K* instead.
pub fn solve_k_laplacian(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    rhs: &ScalarRhs,
    kind: ScalarSpaceKind,
    adjoint: bool,
    tolerance: f64,
) -> Result<(Vec<C64>, KLaplacianReport)> {
    let coeff = CoefficientMap::new(env);
    solve_k_laplacian_gated(space, &coeff, rhs, kind, adjoint, tolerance, AbsorptionGate::Enforce)
}

/// Like [`solve_k_laplacian`] with an explicit absorption gate. Only
/// diagnostics (such as the K = I Poisson comparison) should pass
/// [`AbsorptionGate::Diagnostic`].
pub fn solve_k_laplacian_gated(
    space: &FeSpace,
    coeff: &CoefficientMap,
    rhs: &ScalarRhs,
    kind: ScalarSpaceKind,
    adjoint: bool,
    tolerance: f64,
    gate: AbsorptionGate,
) -> Result<(Vec<C64>, KLaplacianReport)> {
    let mut mat = assemble_k_laplacian(space, coeff, kind, adjoint, gate)?;
    let mut load = match rhs {
        ScalarRhs::L2(f) => scalar_rhs_l2(space, kind, *f),
        ScalarRhs::DivForm(fv) => {
            // ⟨div F, ψ⟩ = −(F | grad ψ)
            let mut r = scalar_rhs_grad_weighted(space, kind, *fv);
            for v in &mut r {
                *v = -*v;
            }
            r
        }
    };
    let data_norm = norm2(&load);
    let constraints = match kind {
        ScalarSpaceKind::P1 => scalar_zero_constraints_p1(space, 0),
        ScalarSpaceKind::P2 => scalar_zero_constraints_p2(space, 0),
    };
    mat.eliminate_dirichlet(&mut load, &constraints);
    let lu = FactorizedLu::factor(&mat)?;
    let refined = solve_refined(&mat, &lu, &load, tolerance)?;
    let phi = refined.x;

    let phi_h1 = scalar_h1_norm(space, &phi, kind);
    let report = KLaplacianReport {
        n_unknowns: mat.nrows,
        residual_norm: refined.rel_residual,
        phi_h1,
        stability_ratio: if data_norm > 0.0 { phi_h1 / data_norm } else { 0.0 },
    };
    Ok((phi, report))
}

fn norm2(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn scalar_h1_norm(space: &FeSpace, phi: &[C64], kind: ScalarSpaceKind) -> f64 {
    let rule = tet_degree5();
    let mesh = &space.mesh;
    let mut acc = 0.0;
    for t in 0..mesh.tets.len() {
        let geom = ElemGeom::new(mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geom.volume;
            let (v, g) = match kind {
                ScalarSpaceKind::P1 => (
                    crate::fieldops::eval_scalar_p1(mesh, phi, t, lam),
                    eval_scalar_p1_grad(mesh, phi, t, &geom),
                ),
                ScalarSpaceKind::P2 => (
                    crate::fieldops::eval_scalar_p2(space, phi, t, lam),
                    eval_scalar_p2_grad(space, phi, t, lam, &geom),
                ),
            };
            acc += w * (v.norm_sqr() + g.norm_squared());
        }
    }
    acc.sqrt()
}

/// Result of the K-weighted Helmholtz decomposition u = grad φ + u_T.
#[derive(Debug, Clone)]
pub struct HelmholtzDecomposition {
    /// Scalar potential dofs (P1 or P2 per `kind`), zero on ∂Ω.
    pub phi: Vec<C64>,
    pub kind: ScalarSpaceKind,
    /// ‖grad φ‖_{L²} (bound reported per the continuous estimate).
    pub grad_phi_l2: f64,
    /// ‖u_T‖_{L²}.
    pub u_t_l2: f64,
    /// Relative weak residual max_ψ |(K u_T | grad ψ)| over the rhs scale.
    pub weak_residual: f64,
}

/// Splits an evaluable field u into grad φ + u_T with div(K u_T) = 0
/// weakly against the chosen scalar space.
pub fn helmholtz_decompose(
    space: &FeSpace,
    env: &PlasmaEnvironment,
    u: &(dyn Fn(usize, [f64; 4], Vec3) -> Vec3c + Sync),
    kind: ScalarSpaceKind,
    tolerance: f64,
) -> Result<HelmholtzDecomposition> {
    let coeff = CoefficientMap::new(env);
    let mut mat = assemble_k_laplacian(space, &coeff, kind, false, AbsorptionGate::Enforce)?;
    let mut rhs = scalar_rhs_k_weighted(space, &coeff, kind, u)?;
    let rhs_scale = norm2(&rhs).max(f64::MIN_POSITIVE);
    let constraints = match kind {
        ScalarSpaceKind::P1 => scalar_zero_constraints_p1(space, 0),
        ScalarSpaceKind::P2 => scalar_zero_constraints_p2(space, 0),
    };
    mat.eliminate_dirichlet(&mut rhs, &constraints);
    let lu = FactorizedLu::factor(&mat)?;
    let refined = solve_refined(&mat, &lu, &rhs, tolerance)?;
    let phi = refined.x;

    // u_T := u − grad φ, evaluated pointwise
    let grad_phi = |t: usize, lam: [f64; 4], geom: &ElemGeom| -> Vec3c {
        match kind {
            ScalarSpaceKind::P1 => eval_scalar_p1_grad(&space.mesh, &phi, t, geom),
            ScalarSpaceKind::P2 => eval_scalar_p2_grad(space, &phi, t, lam, geom),
        }
    };

    // weak residual of div(K u_T) against every test function
    let resid = scalar_rhs_k_weighted(space, &coeff, kind, &|t, lam, x| {
        let geom = ElemGeom::new(&space.mesh, t);
        u(t, lam, x) - grad_phi(t, lam, &geom)
    })?;
    // constrained rows are not part of the test space
    let mut rnorm2 = 0.0;
    let fixed: std::collections::HashSet<usize> =
        constraints.iter().map(|&(d, _)| d).collect();
    for (i, v) in resid.iter().enumerate() {
        if !fixed.contains(&i) {
            rnorm2 += v.norm_sqr();
        }
    }
    let weak_residual = rnorm2.sqrt() / rhs_scale;

    // L² norms of the two parts
    let rule = tet_degree5();
    let mut gnorm = 0.0;
    let mut tnorm = 0.0;
    for t in 0..space.mesh.tets.len() {
        let geom = ElemGeom::new(&space.mesh, t);
        for (q, &lam) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * geom.volume;
            let x = space.mesh.point_of(t, lam);
            let gp = grad_phi(t, lam, &geom);
            let ut = u(t, lam, x) - gp;
            gnorm += w * gp.norm_squared();
            tnorm += w * ut.norm_squared();
        }
    }

    Ok(HelmholtzDecomposition {
        phi,
        kind,
        grad_phi_l2: gnorm.sqrt(),
        u_t_l2: tnorm.sqrt(),
        weak_residual,
    })
}
