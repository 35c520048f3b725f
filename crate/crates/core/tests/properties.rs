use proptest::prelude::*;

use ptimp::bethe::{biorthogonal_overlap, permutation_parity, phase, phase_derivative, smatrix_tl_form, smatrix_value};
use ptimp::impurity::{build_himp, pseudo_hermiticity_check, spectral_data, ImpurityParams};
use ptimp::numerics::{c64, CMatrix};
use ptimp::schur::{adjoint_pairing_residual, schur_complement, split_hermitian, BlockSystem};
use ptimp::tl_algebra::{build_contact_generator, universal_generator, verify_tl_relations, Basis};
use ptimp::Complex64;

fn cplx() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| c64(a, b))
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = CMatrix> {
    proptest::collection::vec(cplx(), r * c).prop_map(move |v| CMatrix::new(r, c, v).unwrap())
}

fn hermitian(n: usize) -> impl Strategy<Value = CMatrix> {
    matrix(n, n).prop_map(|m| (&m + &m.adjoint()).scale_re(0.5))
}

/// Impurity parameters away from the exceptional point.
fn params() -> impl Strategy<Value = ImpurityParams> {
    (-1.0..1.0f64, 0.5..2.0f64, 0.0..1.5f64, prop_oneof![0.0..0.9f64, 1.1..2.0f64])
        .prop_map(|(e, g, j, f)| ImpurityParams::new(e, f * g.hypot(j / 2.0), g, j).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn smatrix_is_unimodular_on_real_axis(u in -20.0..20.0f64, w in 0.01..5.0f64) {
        let s = smatrix_value(c64(u, 0.0), c64(w, 0.0)).unwrap();
        prop_assert!((s.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn smatrix_is_exp_of_phase(u in -5.0..5.0f64, w in 0.1..3.0f64) {
        let s = smatrix_value(c64(u, 0.0), c64(w, 0.0)).unwrap();
        let d = phase(c64(u, 0.0), c64(w, 0.0)).unwrap();
        prop_assert!((s - (-Complex64::i() * d).exp()).norm() < 1e-13);
        let (_, tl) = smatrix_tl_form(c64(u, 0.0), c64(w, 0.0)).unwrap();
        prop_assert!(tl < 1e-14);
    }

    #[test]
    fn phase_derivative_matches_difference(u in -3.0..3.0f64, w in 0.2..3.0f64) {
        let h = 1e-6;
        let w = c64(w, 0.0);
        let fd = (phase(c64(u + h, 0.0), w).unwrap() - phase(c64(u - h, 0.0), w).unwrap()) / (2.0 * h);
        prop_assert!((fd - phase_derivative(c64(u, 0.0), w).unwrap()).norm() < 1e-7);
    }

    #[test]
    fn split_reconstructs(m in matrix(3, 3)) {
        let (a, b) = split_hermitian(&m).unwrap();
        prop_assert!((&(&a + &b) - &m).max_abs() < 1e-15);
        prop_assert!((&a - &a.adjoint()).max_abs() < 1e-15);
        prop_assert!((&b + &b.adjoint()).max_abs() < 1e-15);
    }

    #[test]
    fn hermitian_schur_complement_pairs_under_adjoint(
        hpp in hermitian(2), hqq in hermitian(3), hpq in matrix(2, 3), re in -3.0..3.0f64, im in 0.2..2.0f64,
    ) {
        let sys = BlockSystem::hermitian(hpp, hpq, hqq).unwrap();
        let z = c64(re, im);
        let scale = schur_complement(&sys, z).unwrap().max_abs().max(1.0);
        prop_assert!(adjoint_pairing_residual(&sys, z).unwrap() <= 1e-12 * scale);
    }

    #[test]
    fn impurity_spectrum_and_metric(p in params()) {
        let h = build_himp(p).unwrap();
        prop_assert!(pseudo_hermiticity_check(&h.matrix).unwrap() < 1e-14);
        let sd = spectral_data(&h).unwrap();
        let s = p.s_eff();
        let eps = c64(p.epsilon, 0.0);
        let mut want = [eps + s, eps - s];
        let mut got = sd.eigenvalues;
        let key = |z: &Complex64| (z.re, z.im);
        want.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        got.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap());
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).norm() < 1e-12);
        }
        prop_assert!(sd.biorthogonality_defect() < 1e-12);
    }

    #[test]
    fn contact_generator_is_universal(p in params()) {
        let g = build_contact_generator(&p, Basis::Biorthogonal).unwrap();
        prop_assert!((&g.matrix - &universal_generator()).max_abs() < 1e-13);
        prop_assert!(verify_tl_relations(&p, 3).unwrap().max() < 1e-11);
    }

    #[test]
    fn parity_is_multiplicative(a in Just((0..6).collect::<Vec<usize>>()).prop_shuffle(),
                                b in Just((0..6).collect::<Vec<usize>>()).prop_shuffle()) {
        let ab: Vec<usize> = (0..6).map(|i| a[b[i]]).collect();
        prop_assert_eq!(permutation_parity(&ab), permutation_parity(&a) * permutation_parity(&b));
    }

    #[test]
    fn overlap_is_half_inverse(s in 1e-3..1e3f64) {
        prop_assert!((biorthogonal_overlap(s).unwrap() * 2.0 * s - 1.0).abs() < 1e-15);
    }
}
