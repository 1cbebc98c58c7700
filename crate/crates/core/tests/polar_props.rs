mod common;

use common::*;
use ndi_core::linalg::{self, Matrix};
use ndi_core::polar::{self, PolarOptions};
use ndi_core::trace;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn f_and_g_peak_at_the_same_entry(s in prop::collection::vec(1e-4..1e4f64, 1..20)) {
        let fg: Vec<(f64, f64)> = s.iter().map(|&v| polar::f_g(v).unwrap()).collect();
        let j_star = (0..s.len()).max_by(|&a, &b| fg[a].0.total_cmp(&fg[b].0)).unwrap();
        let g_max = fg.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        prop_assert!((g_max - fg[j_star].1).abs() <= 1e-14 * g_max.max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn one_step_rate_law(n in 2..=10usize, seed in any::<u64>()) {
        let mut r = rng(seed);
        // one value well away from 1 keeps both distances far above roundoff
        let mut s: Vec<f64> = (0..n).map(|_| r.gen_range(0.2..5.0)).collect();
        s[0] = r.gen_range(3.0..5.0);
        let x = with_singular_values(&mut r, &s);
        let gx = polar::polar_step(&x).unwrap();
        let ggx = polar::polar_step(&gx).unwrap();
        let t = linalg::spectral_norm(&x.sub(&gx).unwrap()).unwrap();
        let next = linalg::spectral_norm(&gx.sub(&ggx).unwrap()).unwrap();
        let expected = t * t / (2.0 * (t * t + 1.0).sqrt());
        prop_assert!(rel(next, expected) <= 1e-12, "next={next} expected={expected}");
    }

    #[test]
    fn errors_decrease_and_bounds_are_sharp(n in 1..=12usize, seed in any::<u64>(), on_sigma in any::<bool>()) {
        let mut r = rng(seed);
        let s: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(-3.0..3.0))).collect();
        let a = with_singular_values(&mut r, &s);
        let res = polar::newton_polar(&a, PolarOptions { on_sigma, ..Default::default() }).unwrap();
        let e: Vec<f64> = res.trace.errors().into_iter().filter(|&e| e > 1e-10).collect();
        prop_assert!(e.windows(2).skip(1).all(|w| w[1] < w[0]), "{e:?}");
        // direct mode iterates on A itself and carries eps * cond(A) roundoff
        let floor = if on_sigma { 1e-8 } else { 1e-6 };
        let ub = trace::check_upper_bound(&res.trace, floor).unwrap();
        prop_assert!(ub.pass, "{ub:?}");
        if on_sigma {
            let sh = polar::verify_sharpness(&res.trace, 1e-10).unwrap();
            prop_assert!(sh.pass, "{sh:?}");
        }
    }

    #[test]
    fn diagonal_matches_scalar_recurrence(d in prop::collection::vec(prop_oneof![1e-3..1e3f64, -1e3..-1e-3f64], 1..12)) {
        let mut x = Matrix::from_diag(&d);
        let mut scalar = d.clone();
        for _ in 0..15 {
            x = polar::polar_step(&x).unwrap();
            scalar.iter_mut().for_each(|v| *v = 0.5 * (*v + 1.0 / *v));
            for (i, v) in scalar.iter().enumerate() {
                prop_assert!((x[(i, i)] - v).abs() <= 1e-12 * v.abs().max(1.0));
            }
            prop_assert!(x.is_diagonal());
        }
    }
}

#[test]
fn direct_mode_agrees_with_sigma_mode() {
    let mut r = rng(11);
    let s: Vec<f64> = (0..6).map(|_| r.gen_range(0.1..10.0)).collect();
    let a = with_singular_values(&mut r, &s);
    let sig = polar::newton_polar(&a, PolarOptions::default()).unwrap();
    let dir = polar::newton_polar(&a, PolarOptions { on_sigma: false, ..Default::default() }).unwrap();
    assert!(rel_matrix(&dir.u, &sig.u) <= 1e-12);
    assert_eq!(sig.t0, dir.t0);
}
