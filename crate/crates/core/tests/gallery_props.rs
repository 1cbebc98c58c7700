use ndi_core::gallery::{build, GallerySpec};
use ndi_core::linalg;

#[test]
fn moler_16_is_spd_with_one_tiny_eigenvalue() {
    let a = build(&GallerySpec::Moler(16)).unwrap();
    assert_eq!(a, a.transpose());
    let mut ev = linalg::symmetric_eigenvalues(&a).unwrap();
    ev.sort_by(f64::total_cmp);
    assert!(ev.iter().all(|&l| l > 0.0), "{ev:?}");
    assert!(ev[0] > 1e-10 && ev[0] < 1e-8, "{}", ev[0]);
    assert!(ev[1..].iter().all(|&l| (2.0..=88.0).contains(&l)), "{ev:?}");
}

#[test]
fn moler_is_spd_up_to_32() {
    for n in [1, 2, 5, 10, 20, 32] {
        let a = build(&GallerySpec::Moler(n)).unwrap();
        let ev = linalg::symmetric_eigenvalues(&a).unwrap();
        assert!(ev.iter().all(|&l| l > 0.0), "n={n} {ev:?}");
    }
}

#[test]
fn fiedler_88_inertia() {
    let a = build(&GallerySpec::Fiedler(88)).unwrap();
    assert_eq!(a, a.transpose());
    let ev = linalg::symmetric_eigenvalues(&a).unwrap();
    assert_eq!(ev.iter().filter(|&&l| l > 0.0).count(), 1);
    assert_eq!(ev.iter().filter(|&&l| l < 0.0).count(), 87);
}

#[test]
fn frank_12_norm() {
    // matches numpy.linalg.norm(A, 2) on the same entries
    let a = build(&GallerySpec::Frank(12)).unwrap();
    let norm = linalg::spectral_norm(&a).unwrap();
    assert!((norm - 47.736016520).abs() < 1e-6, "{norm}");
}

#[test]
fn frank_is_upper_hessenberg() {
    let a = build(&GallerySpec::Frank(12)).unwrap();
    for i in 0..12 {
        for j in 0..12 {
            if i > j + 1 {
                assert_eq!(a[(i, j)], 0.0);
            } else {
                assert!(a[(i, j)] > 0.0);
            }
        }
    }
}

#[test]
fn jordan_blocks_have_the_given_spectrum() {
    let spec: GallerySpec = "jordan:50x1.5,50x2.5".parse().unwrap();
    let a = build(&spec).unwrap();
    assert_eq!(a.n(), 100);
    assert_eq!(a.diag().iter().filter(|&&d| d == 1.5).count(), 50);
    assert_eq!(a.diag().iter().filter(|&&d| d == 2.5).count(), 50);
    // no coupling between the two blocks
    assert_eq!(a[(49, 50)], 0.0);
    assert_eq!(a[(48, 49)], 1.0);
}

#[test]
fn singdiag_is_singular() {
    let a = build(&GallerySpec::SingularDiag(40)).unwrap();
    assert_eq!(linalg::sigma_min(&a).unwrap(), 0.0);
    assert_eq!(linalg::spectral_norm(&a).unwrap(), 39.0);
    assert!(linalg::invert(&a).is_err());
}
