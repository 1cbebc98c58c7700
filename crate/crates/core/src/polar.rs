//! Newton iteration `X_{k+1} = (X_k + X_k^{-T}) / 2` for the orthogonal polar
//! factor, with the a-priori bounds `sigma(omega^(k)(t0))` for `gamma = 1`.
//!
//! Starting from `A = W S V^T` every iterate is `W S_k V^T` with `S_k`
//! diagonal, so the bound is attained with equality for every `k >= 1`.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rates::{self, RateParams};
use crate::trace::{IterationTrace, StepRecord};

pub use crate::trace::{verify_sharpness, SharpnessReport};

/// Relative smallest-singular-value threshold below which `A` is treated as
/// singular.
pub const SINGULAR_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarOptions {
    /// Stop once `||X_k - X_{k+1}|| <= tol * ||X_k||`.
    pub tol: f64,
    pub maxit: usize,
    /// Iterate on the diagonal `S` from the SVD of `A` (error `||I - X_k||`)
    /// rather than on `A` itself (error `||W V^T - X_k||`).
    pub on_sigma: bool,
}

impl Default for PolarOptions {
    fn default() -> Self {
        Self { tol: 1e-14, maxit: 100, on_sigma: true }
    }
}

#[derive(Debug, Clone)]
pub struct PolarResult {
    /// Orthogonal polar factor.
    pub u: Matrix,
    /// Symmetric positive semidefinite factor, `sym(U^T A)`.
    pub h: Matrix,
    pub t0: f64,
    pub gamma: f64,
    pub trace: IterationTrace,
}

/// `t0 = max_j |s_j - 1/s_j| / 2`.
pub fn polar_t0(singular_values: &[f64]) -> Result<f64> {
    let mut t0 = 0.0f64;
    for &s in singular_values {
        t0 = t0.max(f_g(s)?.0);
    }
    Ok(t0)
}

/// `f(s) = |s - 1/s| / 2` and `g(s) = f^2 / (2 (f^2 + 1)^(1/2))`: the
/// one-step distances of the scalar iteration before and after a step.
pub fn f_g(s: f64) -> Result<(f64, f64)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::Domain(format!("singular value must be finite and > 0, got {s}")));
    }
    let f = 0.5 * (s - 1.0 / s).abs();
    let g = if f == 0.0 { 0.0 } else { rates::omega(f, RateParams::polar())? };
    Ok((f, g))
}

/// One Newton step `G(X) = (X + X^{-T}) / 2`.
pub fn polar_step(x: &Matrix) -> Result<Matrix> {
    let inv_t = linalg::invert(x)?.transpose();
    Ok(x.add(&inv_t)?.scale(0.5))
}

pub fn newton_polar(a: &Matrix, opts: PolarOptions) -> Result<PolarResult> {
    let n = a.n();
    let svd = linalg::svd(a)?;
    let smax = svd.s[0];
    let smin = svd.s[n - 1];
    if !(smin > SINGULAR_RTOL * smax) {
        return Err(Error::SingularMatrix { pivot: smin, threshold: SINGULAR_RTOL * smax });
    }
    let t0 = polar_t0(&svd.s)?;
    let bounds = if t0 > 0.0 {
        Some(rates::bound_sequence(t0, opts.maxit + 1, RateParams::polar())?)
    } else {
        None
    };
    let bound_at = |k: usize| match &bounds {
        Some(b) => (b.get(k), b.step(k)),
        None => (Some(0.0), Some(0.0)),
    };

    let (x0, limit) = if opts.on_sigma {
        (Matrix::from_diag(&svd.s), Matrix::identity(n))
    } else {
        (a.clone(), svd.u.matmul(&svd.v.transpose())?)
    };

    let mut steps = Vec::new();
    let mut x = x0;
    let mut converged = false;
    let mut k = 0;
    while k < opts.maxit {
        let next = polar_step(&x)?;
        if !next.is_finite() {
            return Err(Error::NoConvergence { iterations: k });
        }
        let step = linalg::spectral_norm(&x.sub(&next)?)?;
        let error = linalg::spectral_norm(&limit.sub(&x)?)?;
        let (bound, step_bound) = bound_at(k);
        if next == x {
            // X_k is already a fixed point, so it is the final iterate
            steps.push(StepRecord { k, step_distance: None, error, bound, step_bound });
            converged = true;
            break;
        }
        steps.push(StepRecord { k, step_distance: Some(step), error, bound, step_bound });
        let xnorm = linalg::spectral_norm(&x)?;
        x = next;
        k += 1;
        if step <= opts.tol * xnorm {
            let error = linalg::spectral_norm(&limit.sub(&x)?)?;
            let (bound, step_bound) = bound_at(k);
            steps.push(StepRecord { k, step_distance: None, error, bound, step_bound });
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { iterations: opts.maxit });
    }

    let u = if opts.on_sigma {
        svd.u.matmul(&x)?.matmul(&svd.v.transpose())?
    } else {
        x
    };
    let h = u.transpose().matmul(a)?.symmetrize();
    Ok(PolarResult {
        u,
        h,
        t0,
        gamma: 1.0,
        trace: IterationTrace { steps, converged, iterations: k },
    })
}
