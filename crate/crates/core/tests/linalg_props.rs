mod common;

use common::*;
use ndi_core::linalg::{self, Matrix};
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn inverse_of_moderately_conditioned(n in 1..=20usize, seed in any::<u64>(), log_cond in 0.0..6.0f64) {
        let mut r = rng(seed);
        // singular values spread log-uniformly over [1, 10^log_cond)
        let s: Vec<f64> = (0..n).map(|_| 10f64.powf(r.gen_range(0.0..log_cond.max(1e-9)))).collect();
        let a = with_singular_values(&mut r, &s);
        let prod = linalg::invert(&a).unwrap().matmul(&a).unwrap();
        let err = prod.sub(&Matrix::identity(n)).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-8, "n={n} err={err:e}");
    }

    #[test]
    fn svd_reconstructs_and_is_orthogonal(n in 1..=30usize, seed in any::<u64>()) {
        let a = random_matrix(&mut rng(seed), n);
        let f = linalg::svd(&a).unwrap();
        let scale = a.frobenius_norm().max(1.0);
        prop_assert!(f.reconstruct().sub(&a).unwrap().frobenius_norm() <= 1e-12 * scale * n as f64);
        let eye = Matrix::identity(n);
        prop_assert!(f.u.transpose().matmul(&f.u).unwrap().sub(&eye).unwrap().max_abs() <= 1e-12 * n as f64);
        prop_assert!(f.v.transpose().matmul(&f.v).unwrap().sub(&eye).unwrap().max_abs() <= 1e-12 * n as f64);
        prop_assert!(f.s.windows(2).all(|w| w[0] >= w[1]));
        prop_assert!(f.s.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn spectral_norm_is_homogeneous(n in 1..=12usize, seed in any::<u64>(), alpha in -1e3..1e3f64) {
        let a = random_matrix(&mut rng(seed), n);
        let lhs = linalg::spectral_norm(&a.scale(alpha)).unwrap();
        let rhs = alpha.abs() * linalg::spectral_norm(&a).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn orthogonal_matrices_have_unit_norm(n in 1..=20usize, seed in any::<u64>()) {
        let q = random_orthogonal(&mut rng(seed), n);
        prop_assert!((linalg::spectral_norm(&q).unwrap() - 1.0).abs() <= 1e-10);
        prop_assert!((linalg::sigma_min(&q).unwrap() - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn symmetric_eigenvalues_match_construction(n in 2..=10usize, seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = random_orthogonal(&mut r, n);
        // distinct magnitudes so signs are unambiguous
        let mut d: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) * if r.gen_bool(0.5) { 1.0 } else { -1.0 }).collect();
        let got = linalg::symmetric_eigenvalues(&with_eigenvalues(&q, &d)).unwrap();
        let mut got = got;
        got.sort_by(f64::total_cmp);
        d.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&d) {
            prop_assert!((g - e).abs() <= 1e-10 * n as f64);
        }
    }
}

#[test]
fn refined_norm_agrees_with_plain_norm() {
    let mut r = rng(7);
    for n in [1, 3, 8, 16] {
        let a = random_matrix(&mut r, n);
        let plain = linalg::spectral_norm(&a).unwrap();
        let refined = linalg::spectral_norm_refined(&a).unwrap();
        assert!(rel(refined.hi, plain) <= 1e-14, "n={n}");
        assert!(refined.lo.abs() <= f64::EPSILON * refined.hi);
    }
}

#[test]
fn graded_singular_values_keep_relative_accuracy() {
    let mut r = rng(3);
    let s = [1e4, 1.0, 1e-4, 1e-8];
    let a = with_singular_values(&mut r, &s);
    let got = linalg::singular_values(&a).unwrap();
    // absolute accuracy eps * ||A|| is all that can be promised for a
    // general dense matrix; the leading three are far above that
    for (g, e) in got.iter().zip(&s).take(3) {
        assert!(rel(*g, *e) <= 1e-8, "{g} vs {e}");
    }
    assert!((got[3] - s[3]).abs() <= 1e-10);
}
