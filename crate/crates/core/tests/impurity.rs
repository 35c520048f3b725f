use ptimp::impurity::diagnostics::{default_grids, resolvent_pole_order};
use ptimp::impurity::{build_himp, jordan_data, projectors, su2_generators, ImpurityParams, Su2Generators};
use ptimp::numerics::{c64, logspace, CMatrix};

fn himp(e: f64, b: f64, g: f64, j: f64) -> ptimp::impurity::ImpurityHamiltonian {
    build_himp(ImpurityParams::new(e, b, g, j).unwrap()).unwrap()
}

#[test]
fn ladder_closes_away_from_ep() {
    let h = himp(0.0, 0.6, 1.0, 0.0);
    let g = su2_generators(&h).unwrap();
    assert!(g.commutator_residual() <= 1e-13);
    let [pp, pm] = projectors(&h).unwrap();
    let Su2Generators::Regular { s_plus, s_minus, s_z, .. } = &g else {
        panic!("regular ladder expected")
    };
    // P± = ½ ± Sᶻ and S± move between the two eigenspaces.
    let half = CMatrix::identity(2).scale_re(0.5);
    assert!((&(&half + s_z) - &pp).max_abs() < 1e-14);
    assert!((&(&half - s_z) - &pm).max_abs() < 1e-14);
    assert!((&(&pp * s_plus) - s_plus).max_abs() < 1e-14);
    assert!((&(&pm * s_minus) - s_minus).max_abs() < 1e-14);
    assert!((s_plus * s_plus).max_abs() < 1e-14);
}

#[test]
fn ladder_contracts_at_ep() {
    let ep = himp(0.0, 1.0, 1.0, 0.0);
    let g = su2_generators(&ep).unwrap();
    assert!(matches!(g, Su2Generators::Contracted { .. }));
    assert!(g.commutator_residual() <= 1e-13);
    let n = &jordan_data(&ep).unwrap();
    let nil = &(&n.transform * &n.nilpotent) * &n.transform.inverse().unwrap();
    assert!((&nil - &ep.traceless()).max_abs() < 1e-14);

    // s·S⁺ → c·N with |c| = γ/2; the unit phase of c follows the
    // normalisation of the right eigenvectors.
    let n_ep = ep.traceless();
    for (s, tol) in [(1e-3, 1e-5), (1e-4, 1e-7)] {
        let beta = (1.0f64 - s * s).sqrt();
        let h = himp(0.0, beta, 1.0, 0.0);
        let s = h.s_eff.re;
        let Su2Generators::Regular { s_plus, .. } = su2_generators(&h).unwrap() else {
            panic!("regular ladder expected")
        };
        let scaled = s_plus.scale_re(s);
        let c = scaled[(1, 0)] / n_ep[(1, 0)];
        assert!((c.norm() - 0.5).abs() < tol);
        assert!((&scaled - &n_ep.scale(c)).max_abs() < 2.0 * s);
    }
}

#[test]
fn scaled_projector_tends_to_nilpotent_limit() {
    // s·P₊ = (H − ε + s)/2 exactly, so it approaches N/2 with N² = 0 at rate s.
    let n_ep = himp(0.0, 1.0, 1.0, 0.0).traceless();
    assert!((&n_ep * &n_ep).max_abs() <= 1e-15);
    for s in logspace(1e-6, 1e-2, 5) {
        let beta = (1.0f64 - s * s).sqrt();
        let h = himp(0.0, beta, 1.0, 0.0);
        let s = h.s_eff.re;
        let [pp, _] = projectors(&h).unwrap();
        let scaled = pp.scale_re(s);
        let dev = (&scaled - &n_ep.scale_re(0.5)).max_abs();
        assert!(dev <= s, "s = {s}: {dev:e}");
        assert!(((&scaled * &scaled) - scaled.scale_re(s)).max_abs() <= 1e-12);
    }
}

#[test]
fn near_ep_pole_order_is_transient() {
    // s ≈ 0.045: probing at distances ≫ s sees the double pole, ≪ s the simple one.
    let h = himp(0.0, 0.999, 1.0, 0.0);
    let far = resolvent_pole_order(&h, &logspace(1.0, 3.0, 9));
    let near = resolvent_pole_order(&h, &logspace(1e-6, 1e-4, 9));
    assert!(far < -1.0 && far > -2.05, "far {far}");
    assert!((near + 1.0).abs() < 0.05, "near {near}");
    let (dist, _) = default_grids();
    let mid = resolvent_pole_order(&h, &dist);
    assert!((-2.05..=-0.95).contains(&mid), "mid {mid}");
}

#[test]
fn exceptional_vector_with_coupling() {
    let b = 1.25f64.sqrt();
    let jd = jordan_data(&himp(0.0, b, 1.0, 1.0)).unwrap();
    let r = &jd.r_ep;
    let ratio = r[0] / r[1];
    assert!((ratio - c64(0.0, 1.0)).norm() < 1e-12);
    assert!(jd.residual < 1e-12);
}
