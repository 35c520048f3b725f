use ptimp::impurity::ImpurityParams;
use ptimp::numerics::{c64, permutation_operator, CMatrix};
use ptimp::tl_algebra::{
    boundary_residual, build_contact_generator, ep_linear_baxterization, ep_nilpotent_contact, ep_rescaled_generator, extract_charges,
    tl_residuals, transfer_commutator, Basis, BaxterizedR, ChainAlgebra, SpectralFn,
};

#[test]
fn explicit_biorthogonal_generator() {
    let p = ImpurityParams::new(0.0, 0.6, 1.0, 0.0).unwrap();
    let g = build_contact_generator(&p, Basis::Biorthogonal).unwrap();
    let want = CMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, -1.0, 0.0],
        &[0.0, -1.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
    ]);
    assert!((&g.matrix - &want).max_abs() < 1e-14);
    let spin = build_contact_generator(&p, Basis::Spin).unwrap();
    let omega = [c64(0.0, 0.0), c64(1.6, 0.0), c64(-1.6, 0.0), c64(0.0, 0.0)];
    for (a, b) in spin.omega.iter().zip(&omega) {
        assert!((a - b).norm() < 1e-14);
    }
}

#[test]
fn broken_phase_generator_is_real_hermitian() {
    let p = ImpurityParams::new(0.0, 1.25, 1.0, 0.0).unwrap();
    let e = build_contact_generator(&p, Basis::Spin).unwrap().matrix;
    assert!((&e - &e.adjoint()).max_abs() < 1e-12);
    assert!(e.as_slice().iter().all(|z| z.im.abs() < 1e-12));
    assert!(tl_residuals(&e, 3).unwrap().max() < 1e-12);
}

#[test]
fn contracted_chain_has_constant_transfer_matrix() {
    let limit = ep_rescaled_generator(1.0, &[1e-5]).unwrap().limit().clone();
    assert!(limit.max_abs() <= 1e-9);
    let zero = CMatrix::zeros(4, 4);
    let chain = ChainAlgebra::new(BaxterizedR::new(zero, SpectralFn::Rational), 3).unwrap();
    let t0 = chain.transfer(c64(0.0, 0.0)).unwrap();
    for u in [c64(0.3, 0.0), c64(-0.2, 0.4)] {
        assert!((&chain.transfer(u).unwrap() - &t0).max_abs() < 1e-15);
    }
    let near = ChainAlgebra::new(BaxterizedR::new(limit, SpectralFn::Rational), 3).unwrap();
    let d = (&near.transfer(c64(0.3, 0.0)).unwrap() - &near.transfer(c64(-0.2, 0.4)).unwrap()).max_abs();
    assert!(d < 1e-8);
}

#[test]
fn nilpotent_lift_has_unit_determinant() {
    let x = ep_nilpotent_contact(1.0).unwrap();
    for (u, v) in [(c64(0.3, 0.0), c64(-0.7, 0.2)), (c64(2.0, 1.0), c64(0.5, -0.5))] {
        assert!(ep_linear_baxterization(0.8, u, v, &x).unwrap() < 1e-12);
    }
}

#[test]
fn regularity_in_every_phase() {
    for beta in [0.3, 0.999, 1.7] {
        let p = ImpurityParams::new(0.1, beta, 1.0, 0.4).unwrap();
        let r = BaxterizedR::from_params(&p).unwrap();
        assert!(boundary_residual(&r).unwrap() < 1e-15);
        assert!((&r.ordinary(c64(0.0, 0.0)).unwrap() - &permutation_operator(2).unwrap()).max_abs() < 1e-15);
    }
}

#[test]
fn charges_commute_on_longer_chain() {
    let p = ImpurityParams::new(0.0, 0.6, 1.0, 0.0).unwrap();
    let chain = ChainAlgebra::build(&p, 3).unwrap();
    let q = extract_charges(&chain, 3).unwrap();
    assert!(q.pairwise_commutator() <= 1e-9);
    assert!(q.commutator_with(&chain.transfer(c64(0.21, -0.13)).unwrap()) <= 1e-9);
    let samples: Vec<_> = (0..20)
        .map(|k| (c64(0.03 * k as f64 - 0.3, 0.1), c64(0.2, -0.02 * k as f64)))
        .collect();
    assert!(transfer_commutator(&ChainAlgebra::build(&p, 4).unwrap(), &samples).unwrap() <= 1e-10);
}
