//! Plasma response tensor: Stix coefficients, absorption terms, and the
//! spectral bounds that make the propagation problem well-posed.
//!
//! For each species ς the plasma and cyclotron frequencies are
//!
//! ```text
//! ω_pς = sqrt(n_ς q_ς² / (ε₀ m_ς)),      ω_cς = |q_ς| |B₀| / m_ς,
//! ```
//!
//! and with α = ω + iν_c the Stix coefficients read
//!
//! ```text
//! S = 1 - (α/ω) Σ_ς ω_pς²/(α² - ω_cς²),
//! D = (1/ω) Σ_ς δ_ς ω_cς ω_pς²/(α² - ω_cς²),      δ_ς = sign(q_ς),
//! P = 1 - Σ_ς ω_pς²/(ω α).
//! ```
//!
//! The response tensor in the local Stix frame (e₁, e₂, b), b = B₀/|B₀|, is
//!
//! ```text
//!     [  S  -iD   0 ]
//! K = [ iD    S   0 ]     with K₃₃ = P + i γ_e/(ε₀ ω),
//!     [  0    0  K₃₃]
//! ```
//!
//! where γ_e ≥ 0 is the electron Landau damping conductivity. `K` is normal
//! with eigenvalues (S+D, S−D, P + iγ_e/(ε₀ω)); collisions and Landau
//! damping push the imaginary parts strictly above zero, producing the
//! coercivity constants (ζ, η) used by every solver entry point.

use std::sync::Arc;

use num_complex::Complex64;

use crate::constants::PhysicalConstants;
use crate::error::Error;
use crate::fields::{MeshContext, ScalarProfile, VectorProfile};
use crate::mesh::Mesh;
use crate::{Mat3c, Result, Vec3, Vec3c, C64};

/// One charged particle species.
#[derive(Debug, Clone)]
pub struct Species {
    /// Display label, e.g. "e" or "D+".
    pub name: String,
    /// Signed charge number δ_ς·|Z| (electrons: -1).
    pub charge_number: i32,
    /// Particle mass (kg).
    pub mass: f64,
    /// Number density n_ς⁰ (m⁻³).
    pub density: ScalarProfile,
}

impl Species {
    pub fn new(
        name: impl Into<String>,
        charge_number: i32,
        mass: f64,
        density: ScalarProfile,
    ) -> Result<Self> {
        if !(mass > 0.0) {
            return Err(Error::invalid_parameter("mass", "must be strictly positive"));
        }
        if charge_number == 0 {
            return Err(Error::invalid_parameter("charge_number", "must be nonzero"));
        }
        Ok(Species {
            name: name.into(),
            charge_number,
            mass,
            density,
        })
    }

    /// Species from the built-in table (`e`, `H+`, `D+`, `T+`, `He2+`).
    pub fn builtin(
        constants: &PhysicalConstants,
        label: &str,
        density: ScalarProfile,
    ) -> Result<Self> {
        let (mass, z) = constants.builtin_species(label).ok_or_else(|| {
            Error::invalid_parameter("species", format!("unknown built-in label `{label}`"))
        })?;
        Species::new(label, z, mass, density)
    }

    /// Signed charge q_ς = Z·q_e (C).
    pub fn charge(&self, constants: &PhysicalConstants) -> f64 {
        self.charge_number as f64 * constants.q_e
    }

    pub fn is_electron(&self) -> bool {
        self.charge_number < 0
    }
}

/// The physics input: wave frequency, static field, species, profiles and
/// absorption switches.
#[derive(Debug, Clone)]
pub struct PlasmaEnvironment {
    pub constants: PhysicalConstants,
    /// Wave angular frequency ω (rad/s), > 0.
    pub omega: f64,
    /// Static magnetic field B₀ (T).
    pub b0: VectorProfile,
    pub species: Vec<Species>,
    /// Electron temperature (K).
    pub t_e: ScalarProfile,
    /// Parallel wavenumber k_∥ (m⁻¹) used by the Landau term. Supplied by
    /// the user: a full-wave computation has no single wave vector, so the
    /// local plane-wave value must come from outside.
    pub k_parallel: ScalarProfile,
    pub landau_enabled: bool,
    pub collisions_enabled: bool,
    /// Mesh carrying nodal profiles, when any profile is tabulated.
    pub mesh: Option<Arc<Mesh>>,
}

impl PlasmaEnvironment {
    /// Environment with no species: K = I everywhere (vacuum diagnostic).
    pub fn vacuum(omega: f64, b0: Vec3) -> Self {
        PlasmaEnvironment {
            constants: PhysicalConstants::default(),
            omega,
            b0: VectorProfile::Constant(b0),
            species: Vec::new(),
            t_e: ScalarProfile::Constant(1.0),
            k_parallel: ScalarProfile::Constant(1.0),
            landau_enabled: false,
            collisions_enabled: false,
            mesh: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.constants.validate()?;
        if !(self.omega > 0.0) {
            return Err(Error::invalid_parameter("omega", "must be strictly positive"));
        }
        for (i, sp) in self.species.iter().enumerate() {
            if !(sp.mass > 0.0) {
                return Err(Error::invalid_parameter(
                    format!("species[{i}].mass"),
                    "must be strictly positive",
                ));
            }
            if sp.charge_number == 0 {
                return Err(Error::invalid_parameter(
                    format!("species[{i}].charge_number"),
                    "must be nonzero",
                ));
            }
        }
        Ok(())
    }

    fn ctx(&self, tet: Option<usize>) -> Option<MeshContext<'_>> {
        self.mesh.as_deref().map(|m| MeshContext { mesh: m, tet })
    }

    /// Stix coefficients at a point.
    pub fn stix_at(&self, x: Vec3) -> Result<StixCoefficients> {
        self.stix_at_hint(x, None)
    }

    /// Stix coefficients at a point, with a known containing tetrahedron
    /// (used by assembly loops to avoid point location).
    pub fn stix_at_hint(&self, x: Vec3, tet: Option<usize>) -> Result<StixCoefficients> {
        let consts = &self.constants;
        let omega = self.omega;
        let ctx = self.ctx(tet);
        let ctx_ref = ctx.as_ref();

        // Electron data drives both absorption channels.
        let electron = self.species.iter().find(|s| s.is_electron());
        let (nu_c, lambda_coulomb) = if self.collisions_enabled {
            match electron {
                Some(e) => {
                    let n_e = self.positive_density(e, x, ctx_ref)?;
                    let t_e = self.positive_t_e(x, ctx_ref)?;
                    let z_eff = self.effective_ion_charge(x, ctx_ref)?;
                    let (nu, lam) = collision_frequency_full(consts, n_e, t_e, z_eff)?;
                    (nu, Some(lam))
                }
                None => (0.0, None),
            }
        } else {
            (0.0, None)
        };
        let gamma_e = if self.landau_enabled {
            match electron {
                Some(e) => {
                    let n_e = self.positive_density(e, x, ctx_ref)?;
                    let t_e = self.positive_t_e(x, ctx_ref)?;
                    let k_par = self.k_parallel.eval(x, ctx_ref)?;
                    landau_coefficient(consts, n_e, t_e, k_par, omega)?
                }
                None => 0.0,
            }
        } else {
            0.0
        };

        let alpha = Complex64::new(omega, nu_c);
        let bmag = self.b0.eval(x, ctx_ref)?.norm();

        let mut beta_c = Complex64::new(0.0, 0.0);
        let mut gamma_sum = Complex64::new(0.0, 0.0);
        let mut delta_c = Complex64::new(0.0, 0.0);
        for sp in &self.species {
            let n = self.positive_density(sp, x, ctx_ref)?;
            let q = sp.charge(consts);
            let w_p = plasma_frequency(consts, n, q, sp.mass)?;
            let w_c = cyclotron_frequency(consts, q, sp.mass, bmag)?;
            let wp2 = w_p * w_p;
            let denom = alpha * alpha - Complex64::new(w_c * w_c, 0.0);
            if denom.norm() <= 1e-14 * (alpha.norm_sqr() + w_c * w_c) {
                return Err(Error::SingularResonance {
                    species: sp.name.clone(),
                });
            }
            beta_c += wp2 / (omega * alpha);
            gamma_sum += wp2 / denom;
            delta_c += (sp.charge_number.signum() as f64) * w_c * wp2 / denom / omega;
        }
        let gamma_c = alpha / omega * gamma_sum;

        Ok(StixCoefficients {
            s: Complex64::new(1.0, 0.0) - gamma_c,
            d: delta_c,
            p: Complex64::new(1.0, 0.0) - beta_c,
            gamma_e,
            nu_c,
            alpha,
            lambda_coulomb,
            beta_c,
            gamma_c,
            delta_c,
            omega,
            eps0: consts.eps0,
        })
    }

    /// Response tensor K(x) in the lab frame.
    pub fn tensor_at(&self, x: Vec3) -> Result<ResponseTensor> {
        self.tensor_at_hint(x, None)
    }

    pub fn tensor_at_hint(&self, x: Vec3, tet: Option<usize>) -> Result<ResponseTensor> {
        let ctx = self.ctx(tet);
        let b0 = self.b0.eval(x, ctx.as_ref())?;
        let bmag = b0.norm();
        if bmag == 0.0 {
            return Err(Error::DegenerateField {
                x: x[0],
                y: x[1],
                z: x[2],
            });
        }
        let b = b0 / bmag;
        let coeffs = self.stix_at_hint(x, tet)?;
        let k = lab_frame_tensor(&coeffs, b);
        Ok(ResponseTensor {
            k,
            b,
            coeffs,
            position: x,
        })
    }

    /// Imaginary parts of the three eigenvalues, evaluated from the direct
    /// per-species sums rather than from S, D, P. With collisions every
    /// summand is positive, which is the mechanism behind ζ > 0.
    pub fn im_lambda_direct_at(&self, x: Vec3, tet: Option<usize>) -> Result<[f64; 3]> {
        let ctx = self.ctx(tet);
        let ctx_ref = ctx.as_ref();
        let coeffs = self.stix_at_hint(x, tet)?;
        let omega = self.omega;
        let nu = coeffs.nu_c;
        let bmag = self.b0.eval(x, ctx_ref)?.norm();
        let consts = &self.constants;

        let mut sum1 = 0.0;
        let mut sum2 = 0.0;
        let mut sum3 = 0.0;
        for sp in &self.species {
            let n = self.positive_density(sp, x, ctx_ref)?;
            let q = sp.charge(consts);
            let w_p2 = plasma_frequency(consts, n, q, sp.mass)?.powi(2);
            let w_c = cyclotron_frequency(consts, q, sp.mass, bmag)?;
            let delta = sp.charge_number.signum() as f64;
            let denom = (w_c * w_c - omega * omega + nu * nu).powi(2) + 4.0 * omega * omega * nu * nu;
            sum1 += w_p2 / denom * ((omega - delta * w_c).powi(2) + nu * nu);
            sum2 += w_p2 / denom * ((omega + delta * w_c).powi(2) + nu * nu);
            sum3 += w_p2;
        }
        let im1 = nu / omega * sum1;
        let im2 = nu / omega * sum2;
        let im3 = nu / (omega * (omega * omega + nu * nu)) * sum3
            + coeffs.gamma_e / (consts.eps0 * omega);
        Ok([im1, im2, im3])
    }

    fn positive_density(
        &self,
        sp: &Species,
        x: Vec3,
        ctx: Option<&MeshContext>,
    ) -> Result<f64> {
        let n = sp.density.eval(x, ctx)?;
        if !(n > 0.0) {
            return Err(Error::invalid_parameter(
                format!("species `{}` density", sp.name),
                format!("must be strictly positive, got {n:.3e} at {x:?}"),
            ));
        }
        Ok(n)
    }

    fn positive_t_e(&self, x: Vec3, ctx: Option<&MeshContext>) -> Result<f64> {
        let t = self.t_e.eval(x, ctx)?;
        if !(t > 0.0) {
            return Err(Error::invalid_parameter(
                "T_e",
                format!("must be strictly positive, got {t:.3e} at {x:?}"),
            ));
        }
        Ok(t)
    }

    /// Density-weighted effective ion charge Σ n_i Z_i² / Σ n_i Z_i.
    fn effective_ion_charge(&self, x: Vec3, ctx: Option<&MeshContext>) -> Result<f64> {
        let mut num = 0.0;
        let mut den = 0.0;
        for sp in self.species.iter().filter(|s| s.charge_number > 0) {
            let n = self.positive_density(sp, x, ctx)?;
            let z = sp.charge_number as f64;
            num += n * z * z;
            den += n * z;
        }
        if den == 0.0 {
            return Err(Error::invalid_parameter(
                "species",
                "collisions require at least one ion species",
            ));
        }
        Ok(num / den)
    }
}

/// Stix coefficients and absorption data at one point.
#[derive(Debug, Clone, Copy)]
pub struct StixCoefficients {
    pub s: C64,
    pub d: C64,
    pub p: C64,
    /// Landau damping conductivity γ_e (A·V⁻¹·m⁻¹), ≥ 0.
    pub gamma_e: f64,
    /// Collision frequency ν_c (s⁻¹), ≥ 0.
    pub nu_c: f64,
    /// α = ω + iν_c (rad/s).
    pub alpha: C64,
    /// Coulomb logarithm argument Λ, when collisions are evaluated.
    pub lambda_coulomb: Option<f64>,
    /// Intermediate β with P = 1 − β.
    pub beta_c: C64,
    /// Intermediate γ with S = 1 − γ.
    pub gamma_c: C64,
    /// Intermediate δ with D = δ.
    pub delta_c: C64,
    omega: f64,
    eps0: f64,
}

impl StixCoefficients {
    /// The (3,3) Stix-frame entry P + iγ_e/(ε₀ω).
    pub fn parallel_entry(&self) -> C64 {
        self.p + Complex64::new(0.0, self.gamma_e / (self.eps0 * self.omega))
    }

    /// Closed-form eigenvalues (S+D, S−D, P + iγ_e/(ε₀ω)).
    pub fn eigenvalues(&self) -> [C64; 3] {
        [self.s + self.d, self.s - self.d, self.parallel_entry()]
    }

    /// The Stix-frame matrix (b = e₃).
    pub fn stix_frame_matrix(&self) -> Mat3c {
        let zero = Complex64::new(0.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        Mat3c::new(
            self.s,
            -i * self.d,
            zero,
            i * self.d,
            self.s,
            zero,
            zero,
            zero,
            self.parallel_entry(),
        )
    }
}

/// The lab-frame response tensor at one point.
#[derive(Debug, Clone)]
pub struct ResponseTensor {
    /// 3×3 complex matrix in lab coordinates.
    pub k: Mat3c,
    /// Unit field direction b = B₀/|B₀|.
    pub b: Vec3,
    pub coeffs: StixCoefficients,
    /// Evaluation point (m).
    pub position: Vec3,
}

impl ResponseTensor {
    /// Closed-form eigenvalues (S+D, S−D, P + iγ_e/(ε₀ω)); no iterative
    /// eigensolver is involved.
    pub fn eigenvalues(&self) -> [C64; 3] {
        self.coeffs.eigenvalues()
    }
}

/// Coordinate-free lab-frame tensor
/// `K = S (I - bbᵀ) + (P + iγ_e/(ε₀ω)) bbᵀ + iD · cross(b)`.
///
/// This equals the Stix-frame matrix conjugated by any rotation taking e₃
/// to b, so no choice of the in-plane frame vectors (e₁, e₂) is needed.
pub fn lab_frame_tensor(coeffs: &StixCoefficients, b: Vec3) -> Mat3c {
    let i = Complex64::new(0.0, 1.0);
    let mut k = Mat3c::zeros();
    let par = coeffs.parallel_entry();
    let bb = b * b.transpose();
    for r in 0..3 {
        for c in 0..3 {
            let id = if r == c { 1.0 } else { 0.0 };
            k[(r, c)] = coeffs.s * (id - bb[(r, c)]) + par * bb[(r, c)];
        }
    }
    // cross-product matrix of b
    let cx = nalgebra::Matrix3::new(0.0, -b[2], b[1], b[2], 0.0, -b[0], -b[1], b[0], 0.0);
    for r in 0..3 {
        for c in 0..3 {
            k[(r, c)] += i * coeffs.d * cx[(r, c)];
        }
    }
    k
}

/// Spectral coercivity data: ζ ≤ Im(z*Kz)/|z|² and |z*Kz| ≤ η|z|² at the
/// sampled points.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityBounds {
    pub zeta: f64,
    pub eta: f64,
    /// Sample point attaining the minimum of Im λ.
    pub argmin_location: Vec3,
}

/// Plasma frequency ω_pς = sqrt(n q²/(ε₀ m)) (rad/s).
pub fn plasma_frequency(constants: &PhysicalConstants, n: f64, q: f64, m: f64) -> Result<f64> {
    if !(m > 0.0) {
        return Err(Error::invalid_parameter("mass", "must be strictly positive"));
    }
    if n < 0.0 {
        return Err(Error::invalid_parameter("density", "must be nonnegative"));
    }
    Ok((n * q * q / (constants.eps0 * m)).sqrt())
}

/// Cyclotron frequency ω_cς = |q| B / m (rad/s).
pub fn cyclotron_frequency(constants: &PhysicalConstants, q: f64, m: f64, bmag: f64) -> Result<f64> {
    let _ = constants;
    if !(m > 0.0) {
        return Err(Error::invalid_parameter("mass", "must be strictly positive"));
    }
    if bmag < 0.0 {
        return Err(Error::invalid_parameter("bmag", "must be nonnegative"));
    }
    Ok(q.abs() * bmag / m)
}

/// Ion–electron collision frequency (s⁻¹) from the two-step formula
/// Λ = (12π/Z)·n_e·(ε₀ k_B T_e/(n_e q_e²))^{3/2},
/// ν_c = sqrt(2/π)·ω_pe·lnΛ/Λ.
pub fn collision_frequency(
    constants: &PhysicalConstants,
    n_e: f64,
    t_e: f64,
    z: f64,
) -> Result<f64> {
    collision_frequency_full(constants, n_e, t_e, z).map(|(nu, _)| nu)
}

/// Collision frequency together with the Coulomb logarithm argument Λ.
pub fn collision_frequency_full(
    constants: &PhysicalConstants,
    n_e: f64,
    t_e: f64,
    z: f64,
) -> Result<(f64, f64)> {
    if !(n_e > 0.0) {
        return Err(Error::invalid_parameter("n_e", "must be strictly positive"));
    }
    if !(t_e > 0.0) {
        return Err(Error::invalid_parameter("T_e", "must be strictly positive"));
    }
    if z < 1.0 {
        return Err(Error::invalid_parameter("Z", "must be at least 1"));
    }
    let debye = constants.eps0 * constants.k_b * t_e / (n_e * constants.q_e * constants.q_e);
    let lambda = 12.0 * std::f64::consts::PI / z * n_e * debye.powf(1.5);
    if lambda <= 1.0 {
        return Err(Error::NotAPlasma { lambda });
    }
    if lambda < 10.0 {
        log::warn!("Coulomb logarithm argument Λ = {lambda:.3} is small; collision model marginal");
    }
    let w_pe = plasma_frequency(constants, n_e, constants.q_e, constants.m_e)?;
    let nu_c = (2.0 / std::f64::consts::PI).sqrt() * w_pe * lambda.ln() / lambda;
    Ok((nu_c, lambda))
}

/// Electron Landau damping conductivity γ_e ≥ 0 (A·V⁻¹·m⁻¹):
/// ε₀ ω sqrt(π/2) (ω_pe² ω/|k_∥|³)(m_e/(k_B T_e))^{3/2}
/// exp(−ω² m_e/(2 k_∥² k_B T_e)).
///
/// |k_∥|³ is used in the denominator so the result is nonnegative for
/// either sign of k_∥.
pub fn landau_coefficient(
    constants: &PhysicalConstants,
    n_e: f64,
    t_e: f64,
    k_par: f64,
    omega: f64,
) -> Result<f64> {
    if k_par == 0.0 {
        return Err(Error::invalid_parameter("k_parallel", "must be nonzero"));
    }
    if !(t_e > 0.0) {
        return Err(Error::invalid_parameter("T_e", "must be strictly positive"));
    }
    if !(omega > 0.0) {
        return Err(Error::invalid_parameter("omega", "must be strictly positive"));
    }
    let w_pe2 = plasma_frequency(constants, n_e, constants.q_e, constants.m_e)?.powi(2);
    let thermal = constants.m_e / (constants.k_b * t_e);
    let k3 = k_par.abs().powi(3);
    let arg = -omega * omega * thermal / (2.0 * k_par * k_par);
    Ok(constants.eps0
        * omega
        * (std::f64::consts::PI / 2.0).sqrt()
        * (w_pe2 * omega / k3)
        * thermal.powf(1.5)
        * arg.exp())
}

/// Minimum Im λ and maximum |λ| of K over the sample set. Since K is
/// normal its numerical range is the convex hull of the eigenvalues, so
/// `Im(z*Kz) ≥ ζ|z|²` and `|z*Kz| ≤ η|z|²` hold for every z at the
/// sampled points.
///
/// Fails with [`Error::AbsorptionMissing`] when ζ ≤ 0: without absorption
/// the propagation model is ill-posed.
pub fn coercivity_bounds(env: &PlasmaEnvironment, samples: &[Vec3]) -> Result<CoercivityBounds> {
    coercivity_bounds_hinted(env, samples.iter().map(|&x| (x, None)))
}

/// Same as [`coercivity_bounds`] but with per-sample tetrahedron hints
/// (quadrature points of a mesh).
pub fn coercivity_bounds_hinted(
    env: &PlasmaEnvironment,
    samples: impl IntoIterator<Item = (Vec3, Option<usize>)>,
) -> Result<CoercivityBounds> {
    let mut zeta = f64::INFINITY;
    let mut eta: f64 = 0.0;
    let mut argmin = Vec3::zeros();
    let mut seen = false;
    for (x, tet) in samples {
        seen = true;
        let t = env.tensor_at_hint(x, tet)?;
        for lam in t.eigenvalues() {
            if lam.im < zeta {
                zeta = lam.im;
                argmin = x;
            }
            eta = eta.max(lam.norm());
        }
    }
    if !seen {
        return Err(Error::InvalidData("empty sample set".into()));
    }
    if !(zeta > 0.0) {
        return Err(Error::AbsorptionMissing { zeta });
    }
    Ok(CoercivityBounds {
        zeta,
        eta,
        argmin_location: argmin,
    })
}

/// Deterministic orthonormal completion (t₁, t₂) of a unit vector n, so
/// that (t₁, t₂, n) is a right-handed frame.
pub fn orthonormal_complement(n: Vec3) -> (Vec3, Vec3) {
    let mut k = 0;
    for i in 1..3 {
        if n[i].abs() < n[k].abs() {
            k = i;
        }
    }
    let mut e = Vec3::zeros();
    e[k] = 1.0;
    let t1 = n.cross(&e).normalize();
    let t2 = n.cross(&t1);
    (t1, t2)
}

/// Quadratic form z* K z for a complex vector z.
pub fn sesquilinear_form(k: &Mat3c, z: &Vec3c) -> C64 {
    let kz = k * z;
    z.dotc(&kz)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{CODATA_2018, M_DEUTERON};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn consts() -> PhysicalConstants {
        CODATA_2018
    }

    fn two_species_env() -> PlasmaEnvironment {
        // e- + D+ at n = 1e19 m^-3, B0 = 3.5 T ez, T_e = 1e7 K,
        // omega = 2π·3.7 GHz (above the lower-hybrid range).
        let n = ScalarProfile::Constant(1e19);
        PlasmaEnvironment {
            constants: consts(),
            omega: 2.0 * std::f64::consts::PI * 3.7e9,
            b0: VectorProfile::Constant(Vec3::new(0.0, 0.0, 3.5)),
            species: vec![
                Species::builtin(&consts(), "e", n.clone()).unwrap(),
                Species::builtin(&consts(), "D+", n).unwrap(),
            ],
            t_e: ScalarProfile::Constant(1e7),
            k_parallel: ScalarProfile::Constant(200.0),
            landau_enabled: false,
            collisions_enabled: true,
            mesh: None,
        }
    }

    // Frozen by high-precision (40-digit) evaluation of the defining
    // formulas with CODATA-2018 constants.
    const WPE_1E19: f64 = 178398636597.90839;
    const WCE_1T: f64 = 175882001077.21634;
    const LAMBDA_1E19_1E7: f64 = 123893338.65258972;
    const NUC_1E19_1E7: f64 = 21409.742237993269;
    const GAMMA_E_FROZEN: f64 = 4.6877160771462573;

    #[test]
    fn plasma_frequency_zero_density() {
        assert_eq!(plasma_frequency(&consts(), 0.0, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn plasma_frequency_electron_1e19() {
        let w = plasma_frequency(&consts(), 1e19, consts().q_e, consts().m_e).unwrap();
        assert_relative_eq!(w, WPE_1E19, max_relative = 1e-13);
    }

    #[test]
    fn plasma_frequency_sqrt_homogeneity() {
        let w1 = plasma_frequency(&consts(), 2.5e18, consts().q_e, consts().m_e).unwrap();
        let w4 = plasma_frequency(&consts(), 4.0 * 2.5e18, consts().q_e, consts().m_e).unwrap();
        assert_relative_eq!(w4, 2.0 * w1, max_relative = 1e-14);
    }

    #[test]
    fn plasma_frequency_bad_mass() {
        assert!(plasma_frequency(&consts(), 1e19, 1.0, 0.0).is_err());
        assert!(plasma_frequency(&consts(), 1e19, 1.0, -1.0).is_err());
    }

    #[test]
    fn cyclotron_zero_field() {
        assert_eq!(
            cyclotron_frequency(&consts(), consts().q_e, consts().m_e, 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn cyclotron_electron_1t() {
        let w = cyclotron_frequency(&consts(), -consts().q_e, consts().m_e, 1.0).unwrap();
        assert_relative_eq!(w, WCE_1T, max_relative = 1e-13);
    }

    #[test]
    fn cyclotron_linearity_and_errors() {
        let w1 = cyclotron_frequency(&consts(), consts().q_e, M_DEUTERON, 1.7).unwrap();
        let w2 = cyclotron_frequency(&consts(), consts().q_e, M_DEUTERON, 3.4).unwrap();
        assert_relative_eq!(w2, 2.0 * w1, max_relative = 1e-14);
        assert!(cyclotron_frequency(&consts(), 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn collision_frequency_frozen() {
        let (nu, lam) = collision_frequency_full(&consts(), 1e19, 1e7, 1.0).unwrap();
        assert_relative_eq!(lam, LAMBDA_1E19_1E7, max_relative = 1e-13);
        assert_relative_eq!(nu, NUC_1E19_1E7, max_relative = 1e-13);
    }

    #[test]
    fn collision_frequency_scales_with_wpe_at_fixed_lambda() {
        // Λ ∝ n^{-1/2} T^{3/2}: scaling (n, T) → (4n, 4^{1/3}T) keeps Λ
        // fixed while doubling ω_pe.
        let (nu1, lam1) = collision_frequency_full(&consts(), 1e19, 1e7, 1.0).unwrap();
        let (nu2, lam2) =
            collision_frequency_full(&consts(), 4e19, 1e7 * 4f64.powf(1.0 / 3.0), 1.0).unwrap();
        assert_relative_eq!(lam2, lam1, max_relative = 1e-12);
        assert_relative_eq!(nu2, 2.0 * nu1, max_relative = 1e-12);
    }

    #[test]
    fn collision_frequency_cold_gas_rejected() {
        match collision_frequency(&consts(), 1e19, 10.0, 1.0) {
            Err(Error::NotAPlasma { lambda }) => assert!(lambda <= 1.0),
            other => panic!("expected NotAPlasma, got {other:?}"),
        }
    }

    #[test]
    fn landau_frozen_value() {
        let g = landau_coefficient(
            &consts(),
            1e19,
            1e8,
            200.0,
            2.0 * std::f64::consts::PI * 3.7e9,
        )
        .unwrap();
        assert_relative_eq!(g, GAMMA_E_FROZEN, max_relative = 1e-12);
    }

    #[test]
    fn landau_cold_limit_and_linearity() {
        let om = 2.0 * std::f64::consts::PI * 3.7e9;
        // the exponential wins over the T^{-3/2} prefactor as T_e → 0⁺
        let g_cold = landau_coefficient(&consts(), 1e19, 1.0, 200.0, om).unwrap();
        let g_100 = landau_coefficient(&consts(), 1e19, 100.0, 200.0, om).unwrap();
        assert!(g_cold >= 0.0 && g_cold <= g_100);
        assert_eq!(g_cold, 0.0); // underflows: the limit value
        let g_1e6 = landau_coefficient(&consts(), 1e19, 1e6, 200.0, om).unwrap();
        let g_warm = landau_coefficient(&consts(), 1e19, 1e7, 200.0, om).unwrap();
        assert!(g_1e6 > 0.0 && g_1e6 < g_warm);
        let g1 = landau_coefficient(&consts(), 1e19, 1e8, 200.0, om).unwrap();
        let g2 = landau_coefficient(&consts(), 2e19, 1e8, 200.0, om).unwrap();
        assert_relative_eq!(g2, 2.0 * g1, max_relative = 1e-13);
        // sign convention: |k_par|^3 keeps the coefficient nonnegative
        let gm = landau_coefficient(&consts(), 1e19, 1e8, -200.0, om).unwrap();
        assert_relative_eq!(gm, g1, max_relative = 1e-15);
        assert!(landau_coefficient(&consts(), 1e19, 1e8, 0.0, om).is_err());
    }

    #[test]
    fn stix_vacuum() {
        let env = PlasmaEnvironment::vacuum(1e9, Vec3::new(0.0, 0.0, 1.0));
        let c = env.stix_at(Vec3::zeros()).unwrap();
        assert_eq!(c.s, Complex64::new(1.0, 0.0));
        assert_eq!(c.d, Complex64::new(0.0, 0.0));
        assert_eq!(c.p, Complex64::new(1.0, 0.0));
        assert_eq!(c.gamma_e, 0.0);
    }

    #[test]
    fn stix_two_species_frozen() {
        // Frozen by 40-digit evaluation of the S/D/P sums with α = ω + iν_c.
        let env = two_species_env();
        let c = env.stix_at(Vec3::zeros()).unwrap();
        let s_ref = Complex64::new(1.068061181784583, 9.2454311458720116e-8);
        let d_ref = Complex64::new(2.2271754778931337, 5.6454273774453603e-9);
        let p_ref = Complex64::new(-57.903104069609878, 5.424603852009725e-5);
        assert!((c.s - s_ref).norm() <= 1e-12 * s_ref.norm());
        assert!((c.d - d_ref).norm() <= 1e-12 * d_ref.norm());
        assert!((c.p - p_ref).norm() <= 1e-12 * p_ref.norm());
        assert_relative_eq!(c.nu_c, NUC_1E19_1E7, max_relative = 1e-13);
        // assembled exactly from the intermediates
        assert_eq!(c.s, Complex64::new(1.0, 0.0) - c.gamma_c);
        assert_eq!(c.p, Complex64::new(1.0, 0.0) - c.beta_c);
        assert_eq!(c.d, c.delta_c);
        // collisional absorption shows up in Im S and Im P
        assert!(c.s.im > 0.0 && c.p.im > 0.0);
    }

    #[test]
    fn stix_charge_flip_parity() {
        // flipping every charge sign maps D → −D and leaves S, P unchanged
        let env = two_species_env();
        let mut flipped = env.clone();
        for sp in &mut flipped.species {
            sp.charge_number = -sp.charge_number;
        }
        let a = env.stix_at(Vec3::zeros()).unwrap();
        let b = flipped.stix_at(Vec3::zeros()).unwrap();
        assert!((a.s - b.s).norm() <= 1e-15 * a.s.norm());
        assert!((a.p - b.p).norm() <= 1e-15 * a.p.norm());
        assert!((a.d + b.d).norm() <= 1e-15 * a.d.norm());
    }

    #[test]
    fn collisionless_resonance_detected() {
        let c = consts();
        let b = 1.0;
        let w_ce = cyclotron_frequency(&c, c.q_e, c.m_e, b).unwrap();
        let env = PlasmaEnvironment {
            constants: c,
            omega: w_ce, // exactly on resonance, no collisions
            b0: VectorProfile::Constant(Vec3::new(0.0, 0.0, b)),
            species: vec![
                Species::builtin(&c, "e", ScalarProfile::Constant(1e19)).unwrap(),
            ],
            t_e: ScalarProfile::Constant(1e7),
            k_parallel: ScalarProfile::Constant(200.0),
            landau_enabled: false,
            collisions_enabled: false,
            mesh: None,
        };
        match env.stix_at(Vec3::zeros()) {
            Err(Error::SingularResonance { .. }) => {}
            other => panic!("expected SingularResonance, got {other:?}"),
        }
    }

    #[test]
    fn tensor_stix_frame_b_e3() {
        // b = e3 must reproduce the Stix-frame matrix entrywise
        let env = two_species_env();
        let t = env.tensor_at(Vec3::zeros()).unwrap();
        let m = t.coeffs.stix_frame_matrix();
        for r in 0..3 {
            for c in 0..3 {
                assert!((t.k[(r, c)] - m[(r, c)]).norm() <= 1e-14 * m.norm());
            }
        }
    }

    #[test]
    fn tensor_rotation_b_e1() {
        // b = e1: the lab tensor equals R·K_stix·Rᵀ with R the rotation
        // mapping e3 → e1 (and e1 → e2, e2 → e3).
        let mut env = two_species_env();
        env.b0 = VectorProfile::Constant(Vec3::new(3.5, 0.0, 0.0));
        let t = env.tensor_at(Vec3::zeros()).unwrap();
        let ks = t.coeffs.stix_frame_matrix();
        let r = nalgebra::Matrix3::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0);
        let rc = r.map(|v| Complex64::new(v, 0.0));
        let expect = rc * ks * rc.transpose();
        assert!((t.k - expect).norm() <= 1e-13 * expect.norm());
    }

    #[test]
    fn tensor_vacuum_identity() {
        let env = PlasmaEnvironment::vacuum(1e9, Vec3::new(0.3, -0.2, 0.9));
        let t = env.tensor_at(Vec3::zeros()).unwrap();
        assert!((t.k - Mat3c::identity()).norm() <= 1e-15);
    }

    #[test]
    fn tensor_degenerate_field() {
        let env = PlasmaEnvironment::vacuum(1e9, Vec3::zeros());
        match env.tensor_at(Vec3::new(0.1, 0.2, 0.3)) {
            Err(Error::DegenerateField { .. }) => {}
            other => panic!("expected DegenerateField, got {other:?}"),
        }
    }

    #[test]
    fn eigenvalues_closed_form() {
        let env = two_species_env();
        let t = env.tensor_at(Vec3::zeros()).unwrap();
        let [l1, l2, _l3] = t.eigenvalues();
        // λ1 − λ2 = 2D
        assert!((l1 - l2 - 2.0 * t.coeffs.d).norm() <= 1e-14 * t.coeffs.d.norm());
        // vacuum: (1,1,1)
        let v = PlasmaEnvironment::vacuum(1e9, Vec3::new(0.0, 0.0, 1.0));
        let tv = v.tensor_at(Vec3::zeros()).unwrap();
        for lam in tv.eigenvalues() {
            assert_eq!(lam, Complex64::new(1.0, 0.0));
        }
    }

    /// Independent oracle: eigenvalues of a 3×3 complex matrix as roots of
    /// the characteristic polynomial (Cardano), no closed Stix form used.
    fn char_poly_eigenvalues(k: &Mat3c) -> [C64; 3] {
        let tr = k[(0, 0)] + k[(1, 1)] + k[(2, 2)];
        let mut sum2 = Complex64::new(0.0, 0.0);
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            sum2 += k[(i, i)] * k[(j, j)] - k[(i, j)] * k[(j, i)];
        }
        let det = k[(0, 0)] * (k[(1, 1)] * k[(2, 2)] - k[(1, 2)] * k[(2, 1)])
            - k[(0, 1)] * (k[(1, 0)] * k[(2, 2)] - k[(1, 2)] * k[(2, 0)])
            + k[(0, 2)] * (k[(1, 0)] * k[(2, 1)] - k[(1, 1)] * k[(2, 0)]);
        // λ³ − tr λ² + sum2 λ − det = 0; depressed cubic via λ = t + tr/3
        let p = sum2 - tr * tr / 3.0;
        let q = -2.0 * tr * tr * tr / 27.0 + tr * sum2 / 3.0 - det;
        let disc = (q / 2.0) * (q / 2.0) + (p / 3.0) * (p / 3.0) * (p / 3.0);
        let sq = disc.sqrt();
        let u3 = if (-q / 2.0 + sq).norm() >= (-q / 2.0 - sq).norm() {
            -q / 2.0 + sq
        } else {
            -q / 2.0 - sq
        };
        let u = u3.powf(1.0 / 3.0);
        let omega_c = Complex64::new(-0.5, 3f64.sqrt() / 2.0);
        let mut roots = [Complex64::new(0.0, 0.0); 3];
        for (m, slot) in roots.iter_mut().enumerate() {
            let um = u * omega_c.powu(m as u32);
            let t = if um.norm() > 0.0 {
                um - p / (3.0 * um)
            } else {
                Complex64::new(0.0, 0.0)
            };
            *slot = t + tr / 3.0;
        }
        roots
    }

    fn match_multiset(a: &[C64; 3], b: &[C64; 3], tol: f64) {
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let mut used = [false; 3];
        for x in a {
            let mut best = usize::MAX;
            let mut bestd = f64::INFINITY;
            for (j, y) in b.iter().enumerate() {
                if !used[j] {
                    let d = (x - y).norm();
                    if d < bestd {
                        bestd = d;
                        best = j;
                    }
                }
            }
            assert!(
                bestd <= tol * scale,
                "eigenvalue mismatch: {x:?} vs {:?} (dist {bestd:.3e}, scale {scale:.3e})",
                b[best]
            );
            used[best] = true;
        }
    }

    #[test]
    fn eigenvalues_match_general_eigensolve() {
        let mut env = two_species_env();
        env.landau_enabled = true;
        env.b0 = VectorProfile::Constant(Vec3::new(1.1, -2.0, 2.9));
        let t = env.tensor_at(Vec3::new(0.2, 0.3, 0.4)).unwrap();
        let closed = t.eigenvalues();
        let oracle = char_poly_eigenvalues(&t.k);
        match_multiset(&closed, &oracle, 1e-10);
    }

    #[test]
    fn im_lambda_formulas_match() {
        let mut env = two_species_env();
        env.landau_enabled = true;
        let x = Vec3::new(0.1, 0.2, 0.3);
        let direct = env.im_lambda_direct_at(x, None).unwrap();
        let t = env.tensor_at(x).unwrap();
        let eig = t.eigenvalues();
        for i in 0..3 {
            assert_relative_eq!(direct[i], eig[i].im, max_relative = 1e-10);
        }
        // with collisions on, all positive
        for v in direct {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn tensor_is_normal_and_hermitian_defect() {
        let mut env = two_species_env();
        env.landau_enabled = true;
        let t = env.tensor_at(Vec3::zeros()).unwrap();
        let k = &t.k;
        let comm = k.adjoint() * k - k * k.adjoint();
        assert!(comm.norm() <= 1e-12 * k.norm() * k.norm());
        // diagnostic mode: both absorption channels off → K Hermitian exactly
        let mut diag = two_species_env();
        diag.collisions_enabled = false;
        diag.landau_enabled = false;
        let td = diag.tensor_at(Vec3::zeros()).unwrap();
        assert_eq!(td.k, td.k.adjoint());
    }

    #[test]
    fn coercivity_bounds_basic() {
        let mut env = two_species_env();
        env.landau_enabled = true;
        let samples: Vec<Vec3> = (0..10)
            .map(|i| Vec3::new(0.1 * i as f64, 0.05 * i as f64, 0.02 * i as f64))
            .collect();
        let b = coercivity_bounds(&env, &samples).unwrap();
        assert!(b.zeta > 0.0);
        assert!(b.eta >= b.zeta);

        // random-sampling oracle: 1000 random unit z per sample
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &x in &samples {
            let t = env.tensor_at(x).unwrap();
            for _ in 0..100 {
                let z = Vec3c::new(
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                    Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5),
                );
                let n2 = z.norm_squared();
                if n2 == 0.0 {
                    continue;
                }
                let q = sesquilinear_form(&t.k, &z);
                assert!(q.im >= b.zeta * 0.999999 * n2);
                assert!(q.norm() <= b.eta * 1.000001 * n2);
            }
        }
    }

    #[test]
    fn coercivity_rejects_collisionless() {
        let mut env = two_species_env();
        env.collisions_enabled = false;
        env.landau_enabled = false;
        match coercivity_bounds(&env, &[Vec3::zeros()]) {
            Err(Error::AbsorptionMissing { .. }) => {}
            other => panic!("expected AbsorptionMissing, got {other:?}"),
        }
    }

    #[test]
    fn frame_independence_random_b() {
        // coordinate-free formula equals rotation construction
        let env = two_species_env();
        let coeffs = env.stix_at(Vec3::zeros()).unwrap();
        let ks = coeffs.stix_frame_matrix();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let b = Vec3::new(
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
                rng.random::<f64>() - 0.5,
            )
            .normalize();
            let (t1, t2) = orthonormal_complement(b);
            // rotation with columns (t1, t2, b) maps e3 to b
            let r = nalgebra::Matrix3::from_columns(&[t1, t2, b]);
            let rc = r.map(|v| Complex64::new(v, 0.0));
            let expect = rc * ks * rc.transpose();
            let k = lab_frame_tensor(&coeffs, b);
            assert!(
                (k - expect).norm() <= 1e-12 * expect.norm(),
                "frame mismatch for b = {b:?}"
            );
        }
    }
}
