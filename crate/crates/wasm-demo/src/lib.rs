//! wasm-bindgen bindings for `www/index.html`. Each export returns a JSON
//! string; the plain functions underneath are what the native tests call.

use ndi_core::gallery::{self, GallerySpec};
use ndi_core::linalg::Matrix;
use ndi_core::polar::{self, PolarOptions};
use ndi_core::rates::{self, RateParams};
use ndi_core::sqrt::{self, SqrtOptions};
use ndi_core::trace::IterationTrace;
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Keeps a single run interactive in the browser.
pub const MAX_DIM: usize = 120;

#[derive(Debug, Serialize)]
pub struct Point {
    pub k: usize,
    pub error: f64,
    pub bound: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct TraceView {
    pub matrix: String,
    pub t0: f64,
    pub gamma: Option<f64>,
    pub feasible: bool,
    pub sigma_min_x0: Option<f64>,
    pub two_t0: Option<f64>,
    pub iterations: usize,
    pub points: Vec<Point>,
}

#[derive(Debug, Serialize)]
pub struct RateCurve {
    pub t0: f64,
    pub gamma: f64,
    /// `omega^(k)(t0)`, k = 0..
    pub steps: Vec<f64>,
    /// `sigma(omega^(k)(t0))`, k = 0..
    pub bounds: Vec<f64>,
}

fn parse(spec: &str) -> Result<(GallerySpec, Matrix), String> {
    let spec: GallerySpec = spec.trim().parse().map_err(|e: ndi_core::Error| e.to_string())?;
    if spec.n() > MAX_DIM {
        return Err(format!("dimension {} exceeds the demo limit of {MAX_DIM}", spec.n()));
    }
    let a = gallery::build(&spec).map_err(|e| e.to_string())?;
    Ok((spec, a))
}

fn points(trace: &IterationTrace) -> Vec<Point> {
    trace.steps.iter().map(|s| Point { k: s.k, error: s.error, bound: s.bound }).collect()
}

pub fn polar_view(spec: &str) -> Result<TraceView, String> {
    let (spec, a) = parse(spec)?;
    let r = polar::newton_polar(&a, PolarOptions::default()).map_err(|e| e.to_string())?;
    Ok(TraceView {
        matrix: spec.to_string(),
        t0: r.t0,
        gamma: Some(r.gamma),
        feasible: true,
        sigma_min_x0: None,
        two_t0: None,
        iterations: r.trace.iterations,
        points: points(&r.trace),
    })
}

pub fn sqrt_view(spec: &str, j: u32) -> Result<TraceView, String> {
    let (spec, a) = parse(spec)?;
    let alpha = sqrt::alpha_schedule(&a, j).map_err(|e| e.to_string())?;
    let x0 = Matrix::scaled_identity(a.n(), alpha);
    let r = sqrt::newton_sqrt(&a, &x0, SqrtOptions::default()).map_err(|e| e.to_string())?;
    Ok(TraceView {
        matrix: spec.to_string(),
        t0: r.report.t0,
        gamma: r.report.gamma0,
        feasible: r.report.feasible,
        sigma_min_x0: Some(r.report.sigma_min_x0),
        two_t0: Some(r.report.two_t0),
        iterations: r.trace.iterations,
        points: points(&r.trace),
    })
}

pub fn rate_view(t0: f64, gamma: f64, kmax: usize) -> Result<RateCurve, String> {
    let p = RateParams::new(gamma).map_err(|e| e.to_string())?;
    let b = rates::bound_sequence(t0, kmax.min(500), p).map_err(|e| e.to_string())?;
    Ok(RateCurve { t0, gamma, steps: b.steps, bounds: b.values })
}

fn to_js<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

/// Polar iteration on a gallery matrix, e.g. `moler:16`.
#[wasm_bindgen]
pub fn polar_trace(spec: &str) -> Result<String, JsError> {
    to_js(polar_view(spec))
}

/// Square-root iteration from `alpha_j I`.
#[wasm_bindgen]
pub fn sqrt_trace(spec: &str, j: u32) -> Result<String, JsError> {
    to_js(sqrt_view(spec, j))
}

/// The bound sequence of the rate family member `gamma`, independent of any matrix.
#[wasm_bindgen]
pub fn rate_curve(t0: f64, gamma: f64, kmax: usize) -> Result<String, JsError> {
    to_js(rate_view(t0, gamma, kmax))
}
