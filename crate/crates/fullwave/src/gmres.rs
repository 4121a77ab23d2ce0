//! Restarted GMRES for complex, non-Hermitian operators.
//!
//! Used on the interface Schur-complement system of the decomposed solver,
//! where each operator application performs a cached direct solve per
//! subdomain. Arnoldi with modified Gram–Schmidt and complex Givens
//! rotations; optional left diagonal preconditioning.

use num_complex::Complex64;

use crate::error::Error;
use crate::{Result, C64};

/// Abstract linear operator y = A x.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>>;
}

/// GMRES parameters.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct GmresConfig {
    /// Krylov subspace size before a restart.
    pub restart: usize,
    /// Total iteration budget across restarts.
    pub max_iterations: usize,
    /// Relative residual target.
    pub tolerance: f64,
    /// Left diagonal preconditioning.
    #[serde(default)]
    pub diagonal_preconditioner: bool,
}

impl Default for GmresConfig {
    fn default() -> Self {
        GmresConfig {
            restart: 30,
            max_iterations: 500,
            tolerance: 1e-10,
            diagonal_preconditioner: false,
        }
    }
}

impl GmresConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restart < 1 {
            return Err(Error::invalid_parameter("restart", "must be at least 1"));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid_parameter("tolerance", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Iteration outcome; `x` is the best iterate whether or not the tolerance
/// was reached.
#[derive(Debug, Clone)]
pub struct GmresResult {
    pub x: Vec<C64>,
    /// Relative preconditioned residual after every iteration.
    pub residual_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl GmresResult {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }

    /// Errors when the tolerance was not reached.
    pub fn ensure_converged(&self) -> Result<()> {
        if self.converged {
            Ok(())
        } else {
            Err(Error::Convergence {
                iterations: self.iterations,
                residual: self.final_residual(),
            })
        }
    }
}

fn complex_givens(f: C64, g: C64) -> (f64, C64) {
    let gn = g.norm();
    if gn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    let fn_ = f.norm();
    if fn_ == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = (fn_ * fn_ + gn * gn).sqrt();
    let c = fn_ / r;
    let s = (f / fn_) * g.conj() / r;
    (c, s)
}

/// Restarted GMRES. `diag` supplies the operator diagonal when diagonal
/// preconditioning is requested.
pub fn gmres(
    op: &dyn LinearOperator,
    b: &[C64],
    cfg: &GmresConfig,
    diag: Option<&[C64]>,
) -> Result<GmresResult> {
    cfg.validate()?;
    let n = op.dim();
    if b.len() != n {
        return Err(Error::InvalidData(format!(
            "gmres rhs length {} vs operator dim {n}",
            b.len()
        )));
    }
    if n == 0 {
        return Ok(GmresResult {
            x: Vec::new(),
            residual_history: Vec::new(),
            iterations: 0,
            converged: true,
        });
    }
    let minv: Option<Vec<C64>> = if cfg.diagonal_preconditioner {
        let d = diag.ok_or_else(|| {
            Error::InvalidData("diagonal preconditioning requested without a diagonal".into())
        })?;
        Some(
            d.iter()
                .map(|&v| {
                    if v.norm() > 0.0 {
                        Complex64::new(1.0, 0.0) / v
                    } else {
                        Complex64::new(1.0, 0.0)
                    }
                })
                .collect(),
        )
    } else {
        None
    };
    let precond = |v: &mut Vec<C64>| {
        if let Some(m) = &minv {
            for i in 0..v.len() {
                v[i] *= m[i];
            }
        }
    };

    let mut pb = b.to_vec();
    precond(&mut pb);
    let bnorm = norm(&pb).max(f64::MIN_POSITIVE);

    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut history = Vec::new();
    let mut total_iters = 0usize;

    loop {
        let ax = op.apply(&x)?;
        let mut r: Vec<C64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        precond(&mut r);
        let rnorm = norm(&r);
        if rnorm / bnorm <= cfg.tolerance {
            return Ok(GmresResult {
                x,
                residual_history: history,
                iterations: total_iters,
                converged: true,
            });
        }
        if total_iters >= cfg.max_iterations {
            return Ok(GmresResult {
                x,
                residual_history: history,
                iterations: total_iters,
                converged: false,
            });
        }

        let m = cfg.restart;
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        let mut h = vec![vec![Complex64::new(0.0, 0.0); m]; m + 1];
        let mut cs = vec![0.0f64; m];
        let mut sn = vec![Complex64::new(0.0, 0.0); m];
        let mut g = vec![Complex64::new(0.0, 0.0); m + 1];
        g[0] = Complex64::new(rnorm, 0.0);
        basis.push(scale(&r, 1.0 / rnorm));

        let mut k_done = 0usize;
        for k in 0..m {
            total_iters += 1;
            let mut w = op.apply(&basis[k])?;
            precond(&mut w);
            // modified Gram–Schmidt
            for (j, vj) in basis.iter().enumerate() {
                let hjk = dotc(vj, &w);
                h[j][k] = hjk;
                for i in 0..n {
                    w[i] -= hjk * vj[i];
                }
            }
            let wnorm = norm(&w);
            h[k + 1][k] = Complex64::new(wnorm, 0.0);
            if wnorm > 0.0 {
                basis.push(scale(&w, 1.0 / wnorm));
            } else {
                basis.push(w);
            }

            // apply stored rotations to the new column
            for j in 0..k {
                let t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
                h[j + 1][k] = -sn[j].conj() * h[j][k] + cs[j] * h[j + 1][k];
                h[j][k] = t;
            }
            let (c, s) = complex_givens(h[k][k], h[k + 1][k]);
            cs[k] = c;
            sn[k] = s;
            h[k][k] = c * h[k][k] + s * h[k + 1][k];
            h[k + 1][k] = Complex64::new(0.0, 0.0);
            let t = c * g[k] + s * g[k + 1];
            g[k + 1] = -s.conj() * g[k] + c * g[k + 1];
            g[k] = t;

            k_done = k + 1;
            let res = g[k_done].norm() / bnorm;
            history.push(res);
            if res <= cfg.tolerance || total_iters >= cfg.max_iterations {
                break;
            }
        }

        // back-substitution for the Krylov coefficients
        let mut y = vec![Complex64::new(0.0, 0.0); k_done];
        for i in (0..k_done).rev() {
            let mut sum = g[i];
            for j in (i + 1)..k_done {
                sum -= h[i][j] * y[j];
            }
            y[i] = sum / h[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            for i in 0..n {
                x[i] += yj * basis[j][i];
            }
        }
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dotc(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn scale(v: &[C64], a: f64) -> Vec<C64> {
    v.iter().map(|z| z * a).collect()
}
