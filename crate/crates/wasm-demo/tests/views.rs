use ndi_wasm_demo::{polar_view, rate_view, sqrt_view, MAX_DIM};

#[test]
fn polar_view_has_bounds_on_every_point() {
    let v = polar_view("frank:12").unwrap();
    assert!((v.t0 / 4.4698e7 - 1.0).abs() < 1e-4);
    assert_eq!(v.points.len(), v.iterations + 1);
    assert!(v.points.iter().all(|p| p.bound.is_some()));
    let json = serde_json::to_value(&v).unwrap();
    assert_eq!(json["matrix"], "frank:12");
    assert!(json["points"][0]["error"].is_number());
}

#[test]
fn infeasible_sqrt_view_has_no_bounds() {
    let v = sqrt_view("frank:12", 1).unwrap();
    assert!(!v.feasible);
    assert_eq!(v.gamma, None);
    assert!(v.points.iter().all(|p| p.bound.is_none()));
    assert_eq!(format!("{:.4}", v.two_t0.unwrap()), "10.1148");
}

#[test]
fn singular_sqrt_view_halves() {
    let v = sqrt_view("singdiag:40", 1).unwrap();
    assert_eq!(v.gamma, Some(0.0));
    let b: Vec<f64> = v.points.iter().filter_map(|p| p.bound).collect();
    assert!(b.windows(2).all(|w| w[1] == w[0] / 2.0));
}

#[test]
fn rate_view_matches_linear_member() {
    let c = rate_view(4.0, 0.0, 3).unwrap();
    assert_eq!(c.steps, vec![4.0, 2.0, 1.0, 0.5]);
    assert_eq!(c.bounds, vec![8.0, 4.0, 2.0, 1.0]);
    assert!(rate_view(0.0, 1.0, 3).is_err());
    assert!(rate_view(1.0, -1.0, 3).is_err());
}

#[test]
fn bad_specs_are_reported() {
    assert!(polar_view("hilbert:4").is_err());
    assert!(polar_view(&format!("moler:{}", MAX_DIM + 1)).unwrap_err().contains("limit"));
    assert!(sqrt_view("moler:4", 0).is_err());
    assert!(polar_view("singdiag:4").is_err());
}
