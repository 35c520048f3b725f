use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ptimp::numerics::{c64, interpolate_matrix_polynomial, kron, linear_fit, logspace, permutation_operator, svd, svd_full, CMatrix};
use ptimp::Complex64;

fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

#[test]
fn cubic_matrix_polynomial_is_recovered_from_four_nodes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let coeffs: Vec<CMatrix> = (0..4).map(|_| random_matrix(&mut rng, 3, 3)).collect();
    let eval = |u: Complex64| {
        let mut acc = CMatrix::zeros(3, 3);
        for c in coeffs.iter().rev() {
            acc = &acc.scale(u) + c;
        }
        acc
    };
    let nodes = [c64(0.3, 0.0), c64(-0.2, 0.5), c64(0.1, -0.4), c64(-0.6, -0.1)];
    let samples: Vec<CMatrix> = nodes.iter().map(|&u| eval(u)).collect();
    let p = interpolate_matrix_polynomial(&nodes, &samples, 3).unwrap();
    assert_eq!(p.degree(), 3);
    for (got, want) in p.coeffs.iter().zip(&coeffs) {
        assert!((got - want).max_abs() <= 1e-10);
    }
    let u = c64(0.7, 0.2);
    assert!((&p.evaluate(u) - &eval(u)).max_abs() <= 1e-10);
}

#[test]
fn singular_values_of_known_matrices() {
    let d = CMatrix::diag(&[c64(0.0, 3.0), c64(-1.0, 0.0), c64(0.0, 0.0)]);
    let s = svd(&d).unwrap();
    assert_eq!(s.singular_values.len(), 3);
    assert!((s.max() - 3.0).abs() < 1e-15);
    assert!((s.singular_values[1] - 1.0).abs() < 1e-15);
    assert_eq!(s.min(), 0.0);
    assert!(s.condition().is_infinite());
    let jordan = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let s = svd(&jordan).unwrap();
    assert!((s.max() - 1.0).abs() < 1e-15 && s.min().abs() < 1e-15);
}

#[test]
fn full_svd_reconstructs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let m = random_matrix(&mut rng, 5, 5);
    let (u, s, v) = svd_full(&m).unwrap();
    let sig = CMatrix::diag(&s.iter().map(|&x| c64(x, 0.0)).collect::<Vec<_>>());
    assert!((&(&(&u * &sig) * &v.adjoint()) - &m).max_abs() < 1e-13);
    assert!((&(&u.adjoint() * &u) - &CMatrix::identity(5)).max_abs() < 1e-13);
    assert!(s.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn swap_operator_exchanges_factors() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let a = random_matrix(&mut rng, 2, 2);
    let b = random_matrix(&mut rng, 2, 2);
    let p = permutation_operator(2).unwrap();
    let lhs = &(&p * &kron(&a, &b)) * &p;
    assert!((&lhs - &kron(&b, &a)).max_abs() < 1e-15);
    assert!((&(&p * &p) - &CMatrix::identity(4)).max_abs() == 0.0);
}

#[test]
fn solve_and_inverse_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = &random_matrix(&mut rng, 4, 4) + &CMatrix::identity(4).scale_re(3.0);
    let b = random_matrix(&mut rng, 4, 2);
    let x = a.solve(&b).unwrap();
    assert!((&(&a * &x) - &b).max_abs() < 1e-13);
    assert!((&(&a.inverse().unwrap() * &b) - &x).max_abs() < 1e-13);
    assert!(CMatrix::zeros(2, 2).inverse().is_err());
    assert!(random_matrix(&mut rng, 2, 3).inverse().is_err());
}

#[test]
fn logspace_endpoints() {
    let g = logspace(1e-6, 1e-1, 21);
    assert_eq!(g.len(), 21);
    assert!((g[0] - 1e-6).abs() < 1e-20 && (g[20] - 1e-1).abs() < 1e-16);
    assert!((g[4] - 1e-5).abs() < 1e-19);
}

proptest! {
    #[test]
    fn line_fit_is_exact_on_lines(a in -5.0..5.0f64, b in -3.0..3.0f64) {
        let x: Vec<f64> = (0..7).map(|i| i as f64 * 0.5 - 1.0).collect();
        let y: Vec<f64> = x.iter().map(|v| a + b * v).collect();
        let (slope, icept, se) = linear_fit(&x, &y);
        prop_assert!((slope - b).abs() < 1e-12 && (icept - a).abs() < 1e-12 && se < 1e-12);
    }

    #[test]
    fn kron_is_multiplicative(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c, d) = (
            random_matrix(&mut rng, 2, 2),
            random_matrix(&mut rng, 3, 3),
            random_matrix(&mut rng, 2, 2),
            random_matrix(&mut rng, 3, 3),
        );
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        prop_assert!((&lhs - &kron(&(&a * &c), &(&b * &d))).max_abs() < 1e-13);
    }
}
