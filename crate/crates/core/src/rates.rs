//! The one-parameter family of rates of convergence
//!
//! ```text
//! omega(t) = t^2 / (2 (t^2 + gamma^2)^(1/2))
//! sigma(t) = t - gamma + (t^2 + gamma^2)^(1/2)  = sum_k omega^(k)(t)
//! h(t)     = gamma + sigma(t)
//! ```
//!
//! `gamma = 1` is the polar-factor rate; the square-root iteration uses the
//! `gamma_0` of its starting matrix. For `gamma = 0` the rate is linear,
//! `omega(t) = t/2` and `sigma(t) = 2t`.

use crate::error::{Error, Result};

/// Bound values below this are not emitted by [`bound_sequence`].
pub const UNDERFLOW_FLOOR: f64 = 1e-300;

/// Selects the member `gamma >= 0` of the rate family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    gamma: f64,
}

impl RateParams {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::Domain(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        Ok(Self { gamma })
    }

    /// The polar-decomposition rate, `gamma = 1`.
    pub fn polar() -> Self {
        Self { gamma: 1.0 }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("t must be finite and > 0, got {t}")))
    }
}

// Factored as t * (t / |(t, gamma)|) / 2 so large t does not lose digits.
fn omega_raw(t: f64, gamma: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    0.5 * t * (t / t.hypot(gamma))
}

// sqrt(t^2 + g^2) - g rewritten as t^2 / (sqrt(t^2 + g^2) + g): no cancellation
// for t << gamma.
fn sigma_raw(t: f64, gamma: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    t + t * (t / (t.hypot(gamma) + gamma))
}

/// `omega(t; gamma)`.
pub fn omega(t: f64, p: RateParams) -> Result<f64> {
    check_t(t)?;
    Ok(omega_raw(t, p.gamma))
}

/// Closed form of the series `sum_k omega^(k)(t)`.
pub fn sigma_series(t: f64, p: RateParams) -> Result<f64> {
    check_t(t)?;
    Ok(sigma_raw(t, p.gamma))
}

/// `h(t) = gamma + sigma(t)`, the lower bound on the smallest singular value
/// of square-root iterates.
pub fn h(t: f64, p: RateParams) -> Result<f64> {
    Ok(p.gamma + sigma_series(t, p)?)
}

/// k-th iterate of omega, `omega^(0)(t0) = t0`.
pub fn omega_iter(t0: f64, k: usize, p: RateParams) -> Result<f64> {
    check_t(t0)?;
    Ok((0..k).fold(t0, |t, _| omega_raw(t, p.gamma)))
}

/// A-priori error bounds `sigma(omega^(k)(t0))`, k = 0..=kmax.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSequence {
    pub t0: f64,
    pub params: RateParams,
    /// `sigma(omega^(k)(t0))`, truncated once a value drops below
    /// [`UNDERFLOW_FLOOR`].
    pub values: Vec<f64>,
    /// `omega^(k)(t0)`, the matching step-distance bounds.
    pub steps: Vec<f64>,
    /// True when the sequence was cut short by the underflow floor.
    pub truncated: bool,
}

impl BoundSequence {
    pub fn get(&self, k: usize) -> Option<f64> {
        self.values.get(k).copied()
    }

    pub fn step(&self, k: usize) -> Option<f64> {
        self.steps.get(k).copied()
    }
}

pub fn bound_sequence(t0: f64, kmax: usize, p: RateParams) -> Result<BoundSequence> {
    check_t(t0)?;
    let mut values = Vec::with_capacity(kmax + 1);
    let mut steps = Vec::with_capacity(kmax + 1);
    let mut t = t0;
    let mut truncated = false;
    for _ in 0..=kmax {
        let v = sigma_raw(t, p.gamma);
        if v < UNDERFLOW_FLOOR {
            truncated = true;
            break;
        }
        values.push(v);
        steps.push(t);
        t = omega_raw(t, p.gamma);
    }
    Ok(BoundSequence { t0, params: p, values, steps, truncated })
}

/// Checks `h(t) - t >= h(omega(t))` and `t^2 / (2 (h(t) - t)) <= omega(t)`,
/// both up to `1e-12 * max(1, t)`.
pub fn check_functional_inequalities(t: f64, p: RateParams) -> Result<bool> {
    check_t(t)?;
    let eps = 1e-12 * t.max(1.0);
    let w = omega_raw(t, p.gamma);
    let ht = p.gamma + sigma_raw(t, p.gamma);
    let hw = p.gamma + sigma_raw(w, p.gamma);
    let first = ht - t >= hw - eps;
    let second = 0.5 * t * t / (ht - t) <= w + eps;
    Ok(first && second)
}
