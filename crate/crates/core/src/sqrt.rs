//! Newton iteration `X_{k+1} = (X_k + X_k^{-1} A) / 2` for a matrix square
//! root, in plain form and in the incremental ("IN") form
//!
//! ```text
//! E_0 = (X_0^{-1} A - X_0) / 2
//! X_{k+1} = X_k + E_k,   E_{k+1} = -E_k X_{k+1}^{-1} E_k / 2
//! ```
//!
//! A start `X_0` that commutes with `A` and satisfies
//! `sigma_min(X_0) >= ||X_0^{-1} A - X_0|| = 2 t0` yields the bounds
//! `||X_* - X_k|| <= sigma(omega^(k)(t0))` with
//! `gamma_0 = (sigma_min(X_0) (sigma_min(X_0) - 2 t0))^(1/2)`.

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::rates::{self, RateParams};
use crate::trace::{IterationTrace, StepRecord};

/// Commutator ratio accepted as "commutes".
pub const COMMUTE_RTOL: f64 = 1e-10;
/// Commutator ratio above which the start is rejected outright.
pub const COMMUTE_HARD_RTOL: f64 = 1e-6;
/// Stop tolerance used for the error reference `X_*`.
pub const REFERENCE_TOL: f64 = 1e-14;
/// Slack in the set-membership test.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Plain,
    /// Incremental form, numerically stable.
    In,
}

impl Default for Variant {
    fn default() -> Self {
        Variant::In
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqrtOptions {
    pub variant: Variant,
    /// Stop once `||X_{k+1} - X_k|| <= tol * ||X_{k+1}||`.
    pub tol: f64,
    pub maxit: usize,
}

impl Default for SqrtOptions {
    fn default() -> Self {
        Self { variant: Variant::In, tol: 1e-14, maxit: 100 }
    }
}

/// Feasibility of a starting matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    /// `||X_0^{-1} A - X_0|| / 2`.
    pub t0: f64,
    pub two_t0: f64,
    pub sigma_min_x0: f64,
    /// `sigma_min(X_0) >= 2 t0` and the start commutes with `A`.
    pub feasible: bool,
    /// `(sigma_min (sigma_min - 2 t0))^(1/2)`, only when feasible.
    pub gamma0: Option<f64>,
    pub commutes_ok: bool,
    pub invertible_ok: bool,
    /// `||A X_0 - X_0 A||_F / (||A||_F ||X_0||_F)`.
    pub commutator: f64,
}

#[derive(Debug, Clone)]
pub struct SqrtResult {
    pub x_star: Matrix,
    pub report: ConditionReport,
    pub trace: IterationTrace,
    pub variant: Variant,
    /// Bounds were attached to the trace.
    pub bound_available: bool,
    /// `||A - X_*^2||` (spectral).
    pub residual: f64,
}

pub fn check_condition(a: &Matrix, x0: &Matrix) -> Result<ConditionReport> {
    let x0_inv = linalg::invert(x0)?;
    let m = x0_inv.matmul(a)?.sub(x0)?;
    // gamma0^2 = s (s - 2 t0) cancels heavily when X_0 sits on the boundary of
    // the feasible set, so 2 t0 is carried to double-double precision.
    let two_t0_dd = match scalar_start(x0) {
        // X_0^{-1} A - X_0 = (A - alpha^2 I) / alpha
        Some(alpha) => linalg::spectral_norm_shifted_square(a, alpha)?.div_f64(alpha.abs()),
        None => linalg::spectral_norm_refined(&m)?,
    };
    let two_t0 = two_t0_dd.hi;
    let sigma_min_x0 = linalg::sigma_min(x0)?;
    let commutator = linalg::commutator_ratio(a, x0)?;
    let commutes_ok = commutator <= COMMUTE_RTOL;
    let margin = two_t0_dd.sub_from(sigma_min_x0);
    let feasible = commutes_ok && margin >= 0.0;
    let gamma0 = feasible.then(|| (sigma_min_x0 * margin).sqrt());
    Ok(ConditionReport {
        t0: 0.5 * two_t0,
        two_t0,
        sigma_min_x0,
        feasible,
        gamma0,
        commutes_ok,
        invertible_ok: true,
        commutator,
    })
}

fn scalar_start(x0: &Matrix) -> Option<f64> {
    let d = x0.diag();
    (x0.is_diagonal() && d.iter().all(|&v| v == d[0])).then_some(d[0])
}

/// Smallest `|alpha|` for which `alpha I` satisfies the start condition of a
/// symmetric positive semidefinite matrix: `((lambda_min + lambda_max)/2)^(1/2)`.
pub fn alpha_identity_lower_bound(lambda_min: f64, lambda_max: f64) -> Result<f64> {
    if !(lambda_min >= 0.0 && lambda_max > 0.0 && lambda_min <= lambda_max) || !lambda_max.is_finite() {
        return Err(Error::Domain(format!(
            "need 0 <= lambda_min <= lambda_max, lambda_max > 0; got ({lambda_min}, {lambda_max})"
        )));
    }
    Ok((0.5 * (lambda_min + lambda_max)).sqrt())
}

/// `alpha_j = 2^j (||A|| / 2)^(1/2)`.
pub fn alpha_schedule(a: &Matrix, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::Domain("alpha schedule index starts at 1".into()));
    }
    let norm = linalg::spectral_norm(a)?;
    Ok(2f64.powi(j as i32) * (0.5 * norm).sqrt())
}

/// One plain Newton step `G(X) = (X + X^{-1} A) / 2`.
pub fn sqrt_step(a: &Matrix, x: &Matrix) -> Result<Matrix> {
    Ok(x.add(&linalg::invert(x)?.matmul(a)?)?.scale(0.5))
}

/// `X` lies in the approximate-solution set of radius `t`: it commutes with
/// `A`, `sigma_min(X) >= h(t)` and `||X - G(X)|| <= t`.
pub fn z_membership(a: &Matrix, x: &Matrix, t: f64, p: RateParams) -> Result<bool> {
    let ht = rates::h(t, p)?;
    let gx = sqrt_step(a, x)?;
    if !linalg::commutes(a, x, COMMUTE_RTOL)? {
        return Ok(false);
    }
    let smin = linalg::sigma_min(x)?;
    let dist = linalg::spectral_norm(&x.sub(&gx)?)?;
    Ok(smin >= ht - MEMBERSHIP_TOL && dist <= t + MEMBERSHIP_TOL)
}

/// Iterates `X_0, ..., X_K` until the step criterion or `maxit`.
/// Returns the iterates and whether the criterion was met.
pub fn sqrt_iterates(a: &Matrix, x0: &Matrix, opts: SqrtOptions) -> Result<(Vec<Matrix>, bool)> {
    let mut xs = vec![x0.clone()];
    let mut x = x0.clone();
    let mut e = match opts.variant {
        Variant::In => Some(linalg::invert(x0)?.matmul(a)?.sub(x0)?.scale(0.5)),
        Variant::Plain => None,
    };
    for _ in 0..opts.maxit {
        let (next, step) = match &e {
            Some(ek) => {
                let next = x.add(ek)?;
                let step = linalg::spectral_norm(ek)?;
                (next, step)
            }
            None => {
                let next = sqrt_step(a, &x)?;
                let step = linalg::spectral_norm(&next.sub(&x)?)?;
                (next, step)
            }
        };
        if !next.is_finite() || !step.is_finite() {
            return Err(Error::NoConvergence { iterations: xs.len() - 1 });
        }
        let done = step <= opts.tol * linalg::spectral_norm(&next)?;
        let unchanged = next == x;
        if unchanged {
            return Ok((xs, true));
        }
        xs.push(next.clone());
        if done {
            return Ok((xs, true));
        }
        if let Some(ek) = &e {
            let inv = linalg::invert(&next)?;
            e = Some(ek.matmul(&inv)?.matmul(ek)?.scale(-0.5));
        }
        x = next;
    }
    Ok((xs, false))
}

pub fn newton_sqrt(a: &Matrix, x0: &Matrix, opts: SqrtOptions) -> Result<SqrtResult> {
    if a.n() != x0.n() {
        return Err(Error::DimensionMismatch { left: a.n(), right: x0.n() });
    }
    let report = check_condition(a, x0)?;
    if report.commutator > COMMUTE_HARD_RTOL {
        return Err(Error::NonCommutingStart(report.commutator));
    }

    // The iterates are kept, so the converged X_* is available for the
    // error column without a second run. X_* always comes from the tight
    // reference tolerance; a looser `opts.tol` only shortens the trace.
    let reference = SqrtOptions { tol: opts.tol.min(REFERENCE_TOL), ..opts };
    let (mut xs, converged) = sqrt_iterates(a, x0, reference)?;
    if !converged {
        return Err(Error::NoConvergence { iterations: opts.maxit });
    }
    let x_star = xs.last().expect("at least X_0").clone();
    if opts.tol > reference.tol {
        let mut keep = xs.len();
        for k in 0..xs.len() - 1 {
            let step = linalg::spectral_norm(&xs[k + 1].sub(&xs[k])?)?;
            if step <= opts.tol * linalg::spectral_norm(&xs[k + 1])? {
                keep = k + 2;
                break;
            }
        }
        xs.truncate(keep);
    }

    let bounds = match report.gamma0 {
        Some(g0) if report.t0 > 0.0 => {
            Some(rates::bound_sequence(report.t0, xs.len(), RateParams::new(g0)?)?)
        }
        _ => None,
    };
    let bound_available = report.feasible;
    let bound_at = |k: usize| -> (Option<f64>, Option<f64>) {
        match (&bounds, bound_available) {
            (Some(b), _) => (b.get(k), b.step(k)),
            (None, true) => (Some(0.0), Some(0.0)),
            (None, false) => (None, None),
        }
    };

    let mut steps = Vec::with_capacity(xs.len());
    for (k, xk) in xs.iter().enumerate() {
        let step_distance = match xs.get(k + 1) {
            Some(next) => Some(linalg::spectral_norm(&next.sub(xk)?)?),
            None => None,
        };
        let error = linalg::spectral_norm(&x_star.sub(xk)?)?;
        let (bound, step_bound) = bound_at(k);
        steps.push(StepRecord { k, step_distance, error, bound, step_bound });
    }
    let residual = linalg::spectral_norm(&a.sub(&x_star.matmul(&x_star)?)?)?;
    Ok(SqrtResult {
        x_star,
        report,
        trace: IterationTrace { steps, converged, iterations: xs.len() - 1 },
        variant: opts.variant,
        bound_available,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(gamma: f64) -> RateParams {
        RateParams::new(gamma).unwrap()
    }

    #[test]
    fn identity_start_on_identity() {
        let rep = check_condition(&Matrix::identity(3), &Matrix::identity(3)).unwrap();
        assert_eq!(rep.t0, 0.0);
        assert!(rep.feasible);
        assert_eq!(rep.gamma0, Some(1.0));
        let r = newton_sqrt(&Matrix::identity(3), &Matrix::identity(3), SqrtOptions::default()).unwrap();
        assert_eq!(r.trace.iterations, 0);
        assert_eq!(r.x_star, Matrix::identity(3));
    }

    #[test]
    fn diag_1_4_condition() {
        let a = Matrix::from_diag(&[1.0, 4.0]);
        let alpha = 2.5f64.sqrt();
        let rep = check_condition(&a, &Matrix::scaled_identity(2, alpha)).unwrap();
        assert!((rep.t0 - 0.75 / alpha).abs() < 1e-15);
        assert!((rep.t0 - 0.4743416).abs() < 1e-7);
        assert!(rep.feasible);
        assert!((rep.gamma0.unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn singular_start_rejected() {
        let a = Matrix::identity(2);
        assert!(matches!(check_condition(&a, &Matrix::zeros(2)), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn alpha_lower_bound_examples() {
        assert_eq!(alpha_identity_lower_bound(0.0, 2.0).unwrap(), 1.0);
        assert!((alpha_identity_lower_bound(1.0, 4.0).unwrap() - 1.5811388).abs() < 1e-7);
        assert!((alpha_identity_lower_bound(0.0, 39.0).unwrap() - 4.4158804).abs() < 1e-7);
        assert!(alpha_identity_lower_bound(-1.0, 4.0).is_err());
        assert!(alpha_identity_lower_bound(4.0, 1.0).is_err());
    }

    #[test]
    fn alpha_schedule_examples() {
        let a = Matrix::from_diag(&[2.0, 1.0]);
        assert_eq!(alpha_schedule(&a, 1).unwrap(), 2.0);
        assert_eq!(alpha_schedule(&a, 3).unwrap(), 8.0);
        assert!(alpha_schedule(&a, 0).is_err());
    }

    #[test]
    fn diag_1_4_run_is_sharp_from_k0() {
        let a = Matrix::from_diag(&[1.0, 4.0]);
        let alpha = 2.5f64.sqrt();
        let r = newton_sqrt(&a, &Matrix::scaled_identity(2, alpha), SqrtOptions::default()).unwrap();
        assert!(r.x_star.sub(&Matrix::from_diag(&[1.0, 2.0])).unwrap().max_abs() < 1e-15);
        let s0 = r.trace.steps[0];
        assert!((s0.error - (alpha - 1.0)).abs() < 1e-15);
        assert!((s0.bound.unwrap() - (alpha - 1.0)).abs() < 1e-14);
        let rep = crate::trace::sharpness_from(&r.trace, 0, 1e-8).unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn loose_tol_shortens_trace_only() {
        let a = Matrix::from_diag(&[1.0, 4.0, 9.0]);
        let x0 = Matrix::scaled_identity(3, 5.0);
        let tight = newton_sqrt(&a, &x0, SqrtOptions::default()).unwrap();
        let loose = newton_sqrt(&a, &x0, SqrtOptions { tol: 1e-2, ..Default::default() }).unwrap();
        assert!(loose.trace.steps.len() < tight.trace.steps.len());
        assert_eq!(loose.x_star, tight.x_star);
        for (l, t) in loose.trace.steps.iter().zip(&tight.trace.steps) {
            assert_eq!(l.error, t.error);
            assert_eq!(l.bound, t.bound);
        }
        assert!(loose.trace.steps.last().unwrap().step_distance.is_none());
    }

    #[test]
    fn non_commuting_start_is_rejected() {
        let a = Matrix::from_diag(&[1.0, 4.0]);
        let x0 = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(matches!(newton_sqrt(&a, &x0, SqrtOptions::default()), Err(Error::NonCommutingStart(_))));
    }

    #[test]
    fn membership_examples() {
        let i = Matrix::identity(2);
        assert!(!z_membership(&i, &i, 0.1, g(1.0)).unwrap());

        let a = Matrix::from_diag(&[1.0, 4.0]);
        let alpha = 2.5f64.sqrt();
        let x0 = Matrix::scaled_identity(2, alpha);
        assert!(z_membership(&a, &x0, 0.75 / alpha, g(1.0)).unwrap());

        let x = Matrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 2.0]]).unwrap();
        assert!(!z_membership(&a, &x, 10.0, g(0.0)).unwrap());
    }

    #[test]
    fn infeasible_start_has_no_bounds() {
        // eigenvalue -1: no real square root, alpha I can never be feasible
        let a = Matrix::from_diag(&[4.0, 9.0]);
        let x0 = Matrix::scaled_identity(2, 0.5);
        let r = newton_sqrt(&a, &x0, SqrtOptions::default()).unwrap();
        assert!(!r.bound_available);
        assert!(r.trace.steps.iter().all(|s| s.bound.is_none()));
        assert!(r.x_star.sub(&Matrix::from_diag(&[2.0, 3.0])).unwrap().max_abs() < 1e-14);
    }
}
