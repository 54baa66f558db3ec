//! Self-checks of the independent test oracles in `common`.

mod common;

use common::*;

#[test]
fn gauss_legendre_is_exact_for_polynomials() {
    let rule = gauss_legendre(8);
    let got = integrate(|x| x.powi(15) + 3.0 * x.powi(4), 0.0, 2.0, 1, &rule);
    let want = 2f64.powi(16) / 16.0 + 3.0 * 2f64.powi(5) / 5.0;
    assert!((got - want).abs() < 1e-10 * want);
    let w: f64 = rule.iter().map(|(_, w)| w).sum();
    assert!((w - 2.0).abs() < 1e-14);
}

#[test]
fn stable_series_at_index_two_is_brownian() {
    // ψ(θ) = θ² is Brownian motion with σ = √2 and no drift
    let s = Scalar::new(Family::Stable { alpha: 2.0 }, 1.7);
    let b = Scalar::new(Family::Bm { sigma: 2f64.sqrt(), gamma: 0.0 }, 1.7);
    for x in [0.1, 0.5, 1.0, 2.5] {
        assert!(close(s.w(x), b.w(x), 1e-13), "{x}");
        assert!(close(s.w_prime(x), b.w_prime(x), 1e-13), "{x}");
        assert!(close(s.w_int(x), b.w_int(x), 1e-13), "{x}");
        assert!(close(s.w_disc_int(0.8, x), b.w_disc_int(0.8, x), 1e-12), "{x}");
    }
    assert!(close(s.phi(), b.phi(), 1e-14));
}

#[test]
fn stable_series_matches_quadrature() {
    let s = Scalar::new(Family::Stable { alpha: 1.5 }, 0.9);
    let rule = gauss_legendre(30);
    // y = u² removes the square-root behavior at the origin
    let x: f64 = 1.3;
    let quad = integrate(|u| 2.0 * u * (-0.7 * u * u).exp() * s.w(u * u), 0.0, x.sqrt(), 4, &rule);
    assert!(close(s.w_disc_int(0.7, x), quad, 1e-12));
    let h = 1e-5;
    let fd = (s.w(x + h) - s.w(x - h)) / (2.0 * h);
    assert!(close(s.w_prime(x), fd, 1e-8));
}

#[test]
fn rational_scale_functions_invert_the_exponent() {
    let fams = [
        Family::Bm { sigma: 0.8, gamma: 0.3 },
        Family::Cl { c: 3.0, lambda: 1.0, mu: 1.0 },
    ];
    for f in fams {
        let s = Scalar::new(f, 0.6);
        let theta = s.phi() + 1.5;
        let laplace = s.w_disc_int(theta, 80.0);
        assert!(close(laplace, 1.0 / (f.psi(theta) - 0.6), 1e-12), "{f:?}");
        assert!(close(f.psi(s.phi()), 0.6, 1e-13));
        assert!(close(s.w(0.0), f.w_zero(), 1e-13));
        assert!((s.z(1.0, 0.0) - 1.0).abs() < 1e-15);
        assert!(close(s.z(0.0, 0.7), 1.0 + 0.6 * s.w_int(0.7), 1e-13));
    }
}

#[test]
fn matrix_helpers() {
    let a = vec![vec![4.0, 1.0, 0.5], vec![0.3, 3.0, -0.2], vec![0.1, 0.4, 2.0]];
    let r = sqrtm(&a);
    assert!(max_diff(&mat_mul(&r, &r), &a) < 1e-13);
    assert!(max_diff(&mat_mul(&a, &mat_inv(&a)), &identity(3)) < 1e-14);
    let d = det(&a);
    let want = 4.0 * (6.0 + 0.08) - 1.0 * (0.6 + 0.02) + 0.5 * (0.12 - 0.3);
    assert!((d - want).abs() < 1e-12);
}
