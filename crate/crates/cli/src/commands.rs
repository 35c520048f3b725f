//! Subcommand bodies. Each returns the report, CSV tables and any extra
//! JSON documents; nothing here touches the filesystem.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use ptimp::bethe::{
    ep_sweep, gaudin, ground_state_seed, kondo_string_gaudin, monodromy_loop, monodromy_loop_about, newton_solve, quantum_number_audit,
    BetheModel, Sector, WidthLaw,
};
use ptimp::impurity::diagnostics::diagnostic_row;
use ptimp::impurity::{ImpurityParams, Phase};
use ptimp::numerics::{c64, linear_fit};
use ptimp::schur::{
    assemble_effective, continuum_path, drive_block_model, error_bound_scan, minimal_drive_model, pt_covariance_check, schur_complement,
    split_hermitian, time_average_null_test, DriveParams, Vertex,
};
use ptimp::tl_algebra::{
    build_contact_generator, ep_rescaled_generator, extract_charges, identity_suite, random_params, random_spectral_pair,
    universal_generator, Basis, ChainAlgebra,
};
use ptimp::Complex64;

use crate::config::{DiagnosticRowConfig, ScenarioConfig, WidthLawName};
use crate::report::{Bound, Invariant, Report, Table};

pub type NumResult<T> = Result<T, String>;

pub struct Outcome {
    pub report: Report,
    pub tables: Vec<Table>,
    pub extra: Vec<(String, serde_json::Value)>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report values serialise")
}

fn width_law(name: WidthLawName) -> WidthLaw {
    match name {
        WidthLawName::JordanPair => WidthLaw::JordanPair,
        WidthLawName::BreitWigner => WidthLaw::BreitWigner,
    }
}

fn bethe_model(cfg: &ScenarioConfig, epsilon: f64, gamma: f64, j_coupling: f64, delta: f64) -> NumResult<BetheModel> {
    let p = ImpurityParams::near_ep(epsilon, gamma, j_coupling, delta).map_err(err)?;
    BetheModel::new(
        cfg.bethe.length,
        cfg.bethe.n_particles,
        cfg.bethe.gamma0,
        p,
        width_law(cfg.bethe.width_law),
    )
    .map_err(err)
}

fn desk_model(cfg: &ScenarioConfig, delta: f64) -> NumResult<BetheModel> {
    let i = &cfg.impurity;
    bethe_model(cfg, i.epsilon, i.gamma, i.j_coupling, delta)
}

fn solve_at(model: &BetheModel, delta: f64, max_iter: usize, tol: f64) -> NumResult<(BetheModel, ptimp::bethe::SolveReport)> {
    let seed = ground_state_seed(model, delta).map_err(err)?;
    let m = model.with_delta(delta).map_err(err)?;
    let rep = newton_solve(&seed, &m, tol, max_iter).map_err(err)?;
    Ok((m, rep))
}

fn cplx(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

pub fn verify_algebra(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let tol = &cfg.tolerances;
    let a = &cfg.algebra;
    let suite = identity_suite(cfg.seed, a.draws, a.samples_per_draw).map_err(err)?;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let e = universal_generator();
    let mut universality: f64 = 0.0;
    for d in 0..a.draws {
        let p = random_params(&mut rng, d);
        let g = build_contact_generator(&p, Basis::Biorthogonal).map_err(err)?;
        universality = universality.max((&g.matrix - &e).max_abs());
    }

    let ep = ep_rescaled_generator(1.0, &[1e-1, 1e-2, 1e-3, 1e-5]).map_err(err)?;
    let centre = ep.centre_block_errors()[..3].iter().copied().fold(0.0, f64::max);
    let tail = ep.max_entries[3];

    let p = ImpurityParams::near_ep(cfg.impurity.epsilon, cfg.impurity.gamma, cfg.impurity.j_coupling, cfg.bethe.delta).map_err(err)?;
    let chain = ChainAlgebra::build(&p, a.charge_sites).map_err(err)?;
    let charges = extract_charges(&chain, a.charge_order).map_err(err)?;
    let pairwise = charges.pairwise_commutator();
    let mut with_transfer: f64 = 0.0;
    for _ in 0..5 {
        let (u, _) = random_spectral_pair(&mut rng);
        with_transfer = with_transfer.max(charges.commutator_with(&chain.transfer(u).map_err(err)?));
    }

    let invariants = vec![
        Invariant::new("tl_relations", suite.tl, Bound::AtMost(tol.algebra_small)),
        Invariant::new("ybe_ordinary", suite.ybe_ordinary, Bound::AtMost(tol.algebra_small)),
        Invariant::new("ybe_braid", suite.ybe_braid, Bound::AtMost(tol.algebra_small)),
        Invariant::new("unitarity", suite.unitarity, Bound::AtMost(tol.algebra_small)),
        Invariant::new("regularity_r0_permutation", suite.boundary, Bound::AtMost(tol.algebra_small)),
        Invariant::new("rll", suite.rll, Bound::AtMost(tol.algebra_small)),
        Invariant::new("rtt_n1", suite.rtt[0], Bound::AtMost(tol.algebra_small)),
        Invariant::new("rtt_n2", suite.rtt[1], Bound::AtMost(tol.algebra_large)),
        Invariant::new("rtt_n3", suite.rtt[2], Bound::AtMost(tol.algebra_large)),
        Invariant::new("rtt_n4", suite.rtt[3], Bound::AtMost(tol.algebra_large)),
        Invariant::new("transfer_commutator", suite.transfer_commutator, Bound::AtMost(tol.algebra_large)),
        Invariant::new("generator_universality", universality, Bound::AtMost(tol.universality)),
        Invariant::new("ep_centre_block", centre, Bound::AtMost(tol.ep_contraction)),
        Invariant::new("ep_rescaled_max_entry", tail, Bound::AtMost(1e-9)),
        Invariant::new("charges_pairwise_commutator", pairwise, Bound::AtMost(tol.charges)),
        Invariant::new("charges_transfer_commutator", with_transfer, Bound::AtMost(tol.charges)),
    ];
    let results = json!({
        "suite": to_json(&suite),
        "universality_max_deviation": universality,
        "ep_rescaling": {
            "s_values": ep.s_values,
            "centre_block_errors": ep.centre_block_errors(),
            "max_entries": ep.max_entries,
            "nilpotency_residuals": ep.nilpotency_residuals,
        },
        "charges": {"sites": a.charge_sites, "order": a.charge_order, "pairwise": pairwise, "with_transfer": with_transfer},
    });
    Ok(Outcome {
        report: Report::new("verify-algebra", cfg, invariants, results),
        tables: Vec::new(),
        extra: Vec::new(),
    })
}

pub fn sweep_ep(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let model = desk_model(cfg, cfg.sweep.delta_max)?;
    let r = ep_sweep(&model, &cfg.sweep.grid()).map_err(err)?;
    let last = r.points.last().ok_or("empty sweep")?;
    let all_converged = r.points.iter().all(|p| p.converged);
    let invariants = vec![
        Invariant::flag("all_points_converged", all_converged),
        Invariant::new("max_residual", r.max_residual, Bound::AtMost(cfg.tolerances.bethe_residual)),
        Invariant::new(
            "separation_exponent",
            r.separation_fit.exponent,
            Bound::Within {
                target: 0.5,
                tolerance: 0.05,
            },
        ),
        Invariant::flag("sigma_min_strictly_decreasing", r.sigma_min_strictly_decreasing),
        Invariant::new(
            "sigma_min_over_sigma_next_at_smallest_delta",
            last.sigma_min / last.sigma_rest_min,
            Bound::AtMost(1e-3),
        ),
        Invariant::new("sigma_rest_ratio", r.sigma_rest_ratio, Bound::AtMost(3.0)),
    ];
    let mut table = Table::new("sweep_ep.csv", &["delta", "separation", "sigma_min", "sigma_rest_min"]);
    for p in &r.points {
        table.push(vec![p.delta, p.separation, p.sigma_min, p.sigma_rest_min]);
    }
    Ok(Outcome {
        report: Report::new("sweep-ep", cfg, invariants, to_json(&r)),
        tables: vec![table],
        extra: Vec::new(),
    })
}

pub fn solve_bethe(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let tol = &cfg.tolerances;
    let delta = cfg.bethe.delta;
    let model = desk_model(cfg, delta)?;
    let (m, rep) = solve_at(&model, delta, cfg.bethe.max_iterations, tol.bethe_residual)?;
    let g = gaudin(&rep.roots, &m).map_err(err)?;
    let audit = quantum_number_audit(&rep.roots, &m).map_err(err)?;
    let (ml, left) = solve_at(
        &model.clone().with_sector(Sector::L),
        delta,
        cfg.bethe.max_iterations,
        tol.bethe_residual,
    )?;
    let left_audit = quantum_number_audit(&left.roots, &ml).map_err(err)?;
    let lr = audit
        .values
        .iter()
        .zip(&left_audit.values)
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let conj = rep.roots.conjugate().max_distance(&left.roots);

    let mut invariants = vec![
        Invariant::new("bethe_residual", rep.residual, Bound::AtMost(tol.bethe_residual)),
        Invariant::new("sector_l_residual", left.residual, Bound::AtMost(tol.bethe_residual)),
        Invariant::new("sector_l_is_conjugate", conj, Bound::AtMost(tol.quantum_numbers)),
        Invariant::new("quantum_number_lr_mismatch", lr, Bound::AtMost(tol.quantum_numbers)),
        Invariant::new(
            "conjugate_pairing_defect",
            audit.conjugate_pairing_defect,
            Bound::AtMost(tol.quantum_numbers),
        ),
    ];
    if m.impurity.phase() == Phase::Unbroken {
        invariants.push(Invariant::new(
            "quantum_number_imaginary_defect",
            audit.max_imaginary_defect,
            Bound::AtMost(tol.quantum_numbers),
        ));
        invariants.push(Invariant::new(
            "quantum_number_lattice_defect",
            audit.lattice_defect,
            Bound::AtMost(tol.quantum_numbers),
        ));
        if let Some(d) = &audit.pair_drift {
            invariants.push(Invariant::new("pair_phase_drift_mismatch", d.mismatch, Bound::AtMost(1e-6)));
        }
    }

    let mut roots = Table::new("roots.csv", &["index", "re", "im", "quantum_number_re", "quantum_number_im"]);
    for (j, (k, i)) in rep.roots.rapidities.iter().zip(&audit.values).enumerate() {
        roots.push(vec![j as f64, k.re, k.im, i.re, i.im]);
    }
    let mut history = Table::new("sweep_newton.csv", &["iteration", "residual"]);
    for (n, r) in rep.history.iter().enumerate() {
        history.push(vec![n as f64, *r]);
    }
    let results = json!({
        "delta": delta,
        "roots": rep.roots.rapidities.iter().map(|&z| cplx(z)).collect::<Vec<_>>(),
        "classification": to_json(&rep.roots.classification),
        "iterations": rep.iterations,
        "least_squares_steps": rep.least_squares_steps,
        "residual": rep.residual,
        "gaudin_singular_values": g.sigma.singular_values,
        "gaudin_abs_det": g.abs_det(),
        "audit": to_json(&audit),
        "sector_l_audit": to_json(&left_audit),
    });
    Ok(Outcome {
        report: Report::new("solve-bethe", cfg, invariants, results),
        tables: vec![roots, history],
        extra: Vec::new(),
    })
}

pub fn monodromy(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let model = desk_model(cfg, cfg.bethe.delta)?;
    let mut invariants = Vec::new();
    let mut loops = Vec::new();
    let mut table = Table::new("monodromy_trace.csv", &["radius", "steps", "theta", "root", "re", "im"]);
    for &radius in &cfg.monodromy.radii {
        for &steps in &cfg.monodromy.steps {
            let t = monodromy_loop(&model, radius, steps).map_err(err)?;
            let tag = format!("r={radius:e},steps={steps}");
            invariants.push(Invariant::flag(format!("pair_transposition[{tag}]"), t.is_pair_transposition));
            invariants.push(Invariant::new(format!("parity[{tag}]"), t.parity as f64, Bound::AtMost(-1.0)));
            invariants.push(Invariant::new(
                format!("spectator_return[{tag}]"),
                t.spectator_return,
                Bound::AtMost(cfg.tolerances.spectator_return),
            ));
            invariants.push(Invariant::new(
                format!("max_residual[{tag}]"),
                t.max_residual,
                Bound::AtMost(cfg.tolerances.bethe_residual),
            ));
            for (theta, roots) in t.thetas.iter().zip(&t.trajectories) {
                for (j, k) in roots.iter().enumerate() {
                    table.push(vec![radius, steps as f64, *theta, j as f64, k.re, k.im]);
                }
            }
            loops.push(to_json(&t));
        }
    }
    Ok(Outcome {
        report: Report::new("monodromy", cfg, invariants, json!({ "loops": loops })),
        tables: vec![table],
        extra: Vec::new(),
    })
}

pub fn schur_scan(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let s = &cfg.schur;
    let tol = &cfg.tolerances;
    let base = DriveParams::new(s.v0, 0.0, s.delta_o, s.bandwidth, 0.0).map_err(err)?;
    let g0 = base.g0();
    let mut coef_err: f64 = 0.0;
    let mut phi_table = Table::new(
        "sweep_schur_phi.csv",
        &[
            "phi",
            "epsilon_eff",
            "beta_eff",
            "epsilon_measured",
            "beta_measured",
            "antihermitian_norm",
        ],
    );
    for k in 0..s.phi_samples {
        let phi = 2.0 * PI * k as f64 / s.phi_samples as f64;
        let d = base.with_phi(phi);
        let h = schur_complement(&minimal_drive_model(&d, s.epsilon, s.gamma).map_err(err)?, c64(0.0, 0.0)).map_err(err)?;
        let eps_m = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
        let beta_m = 0.5 * (h[(1, 1)].im - h[(0, 0)].im);
        let c = assemble_effective(&d, s.epsilon, s.gamma).map_err(err)?.coefficients;
        coef_err = coef_err
            .max((eps_m - c.epsilon_eff).abs() / g0)
            .max((beta_m - c.beta_eff).abs() / g0);
        let anti = split_hermitian(&h).map_err(err)?.1.max_abs();
        phi_table.push(vec![phi, c.epsilon_eff, c.beta_eff, eps_m, beta_m, anti]);
    }
    let scan = error_bound_scan(s.epsilon, s.gamma, &base.with_phi(s.scan_phi), &s.delta_o_grid).map_err(err)?;
    let mut err_table = Table::new("sweep_schur_error.csv", &["delta_o", "error"]);
    for (d, e) in scan.delta_o.iter().zip(&scan.errors) {
        err_table.push(vec![*d, *e]);
    }
    let avg = time_average_null_test(&base, s.epsilon, s.gamma, s.phi_samples).map_err(err)?;
    let averaged_anti = split_hermitian(&avg).map_err(err)?.1.max_abs();
    let d = base.with_phi(s.scan_phi);
    let sys = drive_block_model(&d, s.epsilon, s.gamma, 16, 0.3, Vertex::Coherent, d.phi_eff()).map_err(err)?;
    let pt = pt_covariance_check(&sys, c64(0.1, 0.01)).map_err(err)?;
    let continuum = continuum_path(&d, s.epsilon, s.gamma, 0.3, 64, 0.0, 0.05).map_err(err)?;
    let eff = assemble_effective(&d, s.epsilon, s.gamma).map_err(err)?;

    let invariants = vec![
        Invariant::new("coefficient_relative_error", coef_err, Bound::AtMost(tol.coefficients)),
        Invariant::new(
            "error_bound_exponent",
            scan.exponent,
            Bound::Within {
                target: 1.0,
                tolerance: 0.1,
            },
        ),
        Invariant::new(
            "time_averaged_antihermitian_part",
            averaged_anti,
            Bound::AtMost(tol.coefficients * 1e-2),
        ),
        Invariant::new("pt_covariance", pt, Bound::AtMost(tol.coefficients * 1e-2)),
        Invariant::new(
            "pseudo_hermiticity_residual",
            eff.pseudo_hermiticity_residual,
            Bound::AtMost(tol.coefficients),
        ),
    ];
    let results = json!({
        "g0": g0,
        "coefficients_at_scan_phi": to_json(&eff.coefficients),
        "self_energy_sign_residual": eff.self_energy_sign_residual,
        "exchanged_self_energy_residual": eff.exchanged_self_energy_residual,
        "error_scan": to_json(&scan),
        "continuum_path": to_json(&continuum),
    });
    Ok(Outcome {
        report: Report::new("schur-scan", cfg, invariants, results),
        tables: vec![phi_table, err_table],
        extra: Vec::new(),
    })
}

/// One table cell: a measured number, what it is compared against, and
/// the verdict it supports.
#[derive(Debug, Clone, Serialize)]
struct Cell {
    value: f64,
    bound: Bound,
    pass: bool,
    verdict: String,
}

impl Cell {
    fn new(value: f64, bound: Bound, verdict: &str) -> Self {
        Self {
            value,
            pass: bound.holds(value),
            bound,
            verdict: verdict.into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
struct Column {
    label: String,
    params: ImpurityParams,
    resolvent_pole_order: Cell,
    pseudospectrum_exponent: Cell,
    det_g_trend: Cell,
    sigma_n_trend: Cell,
    coalescence: Cell,
    monodromy_group: Cell,
    jordan_block_size: Cell,
}

impl Column {
    fn cells(&self) -> [(&'static str, &Cell); 7] {
        [
            ("resolvent_pole_order", &self.resolvent_pole_order),
            ("pseudospectrum_exponent", &self.pseudospectrum_exponent),
            ("det_g_trend", &self.det_g_trend),
            ("sigma_n_trend", &self.sigma_n_trend),
            ("coalescence", &self.coalescence),
            ("monodromy_group", &self.monodromy_group),
            ("jordan_block_size", &self.jordan_block_size),
        ]
    }
}

fn params_of(row: &DiagnosticRowConfig) -> NumResult<ImpurityParams> {
    ImpurityParams::new(row.epsilon, row.beta, row.gamma, row.j_coupling).map_err(err)
}

fn impurity_cells(label: &str, p: ImpurityParams, tol: f64, at_ep: bool) -> NumResult<(Cell, Cell, Cell)> {
    let d = diagnostic_row(label, p).map_err(err)?;
    if at_ep {
        let jordan = d.jordan_residual.ok_or("exceptional column is not at an exceptional point")?;
        Ok((
            Cell::new(
                -d.pole_order,
                Bound::Within {
                    target: 2.0,
                    tolerance: 0.1,
                },
                "2",
            ),
            Cell::new(
                d.pseudospectrum_exponent,
                Bound::Within {
                    target: 0.5,
                    tolerance: 0.05,
                },
                "eps^(1/2)",
            ),
            Cell::new(jordan, Bound::AtMost(tol), "2"),
        ))
    } else {
        let cond = d.eigenvector_condition.ok_or("regular column sits at an exceptional point")?;
        Ok((
            Cell::new(
                -d.pole_order,
                Bound::Within {
                    target: 1.0,
                    tolerance: 0.05,
                },
                "1",
            ),
            Cell::new(
                d.pseudospectrum_exponent,
                Bound::Within {
                    target: 1.0,
                    tolerance: 0.05,
                },
                "eps",
            ),
            Cell::new(cond, Bound::AtMost(1e3), "1"),
        ))
    }
}

/// Loop about `δ_row` that stays clear of both `δ = 0` and `δ = γ_eff`.
fn regular_loop(cfg: &ScenarioConfig, p: &ImpurityParams, steps: usize) -> NumResult<Cell> {
    let delta = p.delta();
    let radius = 0.5 * delta.min(p.gamma_eff() - delta);
    let model = bethe_model(cfg, p.epsilon, p.gamma, p.j_coupling, delta)?;
    let t = monodromy_loop_about(&model, delta, radius, steps).map_err(err)?;
    let moved = t.permutation.iter().enumerate().filter(|(j, &k)| *j != k).count();
    Ok(Cell::new(moved as f64, Bound::AtMost(0.0), "trivial"))
}

fn geometric_mean_sigma(g: &ptimp::bethe::GaudinMatrix) -> f64 {
    let n = g.sigma.singular_values.len() as f64;
    g.abs_det().powf(1.0 / n)
}

pub fn diagnostics_table(cfg: &ScenarioConfig) -> NumResult<Outcome> {
    let tol = cfg.tolerances.jordan;
    let diag = &cfg.diagnostics;
    let length = cfg.bethe.length;
    let o1 = Bound::AtLeast(0.1 * length);
    let steps = cfg.monodromy.steps[0];
    let mut curves = Table::new("sweep_diagnostics.csv", &["delta", "abs_det_g", "sigma_min", "separation"]);

    let ep_p = params_of(&diag.ep)?;
    if ep_p.phase() != Phase::Exceptional {
        return Err(format!("diagnostics.ep is not exceptional: γ_eff − β = {:e}", ep_p.delta()));
    }
    let (pole, ps, jordan) = impurity_cells(&diag.ep.label, ep_p, tol, true)?;
    let ep_model = bethe_model(cfg, ep_p.epsilon, ep_p.gamma, ep_p.j_coupling, cfg.sweep.delta_max)?;
    let sweep = ep_sweep(&ep_model, &cfg.sweep.grid()).map_err(err)?;
    let mut log_d = Vec::new();
    let mut log_det = Vec::new();
    for pt in &sweep.points {
        let det: f64 = pt.singular_values.iter().product();
        curves.push(vec![pt.delta, det, pt.sigma_min, pt.separation]);
        log_d.push(pt.delta.ln());
        log_det.push(det.ln());
    }
    let (det_exponent, _, _) = linear_fit(&log_d, &log_det);
    let loop_ep = monodromy_loop(&ep_model, cfg.monodromy.radii[0], steps).map_err(err)?;
    let ep_col = Column {
        label: diag.ep.label.clone(),
        params: ep_p,
        resolvent_pole_order: pole,
        pseudospectrum_exponent: ps,
        det_g_trend: Cell::new(
            det_exponent,
            Bound::Within {
                target: 1.0,
                tolerance: 0.1,
            },
            "-> 0",
        ),
        sigma_n_trend: Cell::new(
            sweep.sigma_min_fit.exponent,
            Bound::Within {
                target: 1.0,
                tolerance: 0.1,
            },
            "-> 0",
        ),
        coalescence: Cell::new(
            sweep.separation_fit.exponent,
            Bound::Within {
                target: 0.5,
                tolerance: 0.05,
            },
            "k_* = k_*+1",
        ),
        monodromy_group: Cell::new(
            if loop_ep.is_pair_transposition {
                loop_ep.parity as f64
            } else {
                0.0
            },
            Bound::Within {
                target: -1.0,
                tolerance: 0.0,
            },
            "Z2",
        ),
        jordan_block_size: jordan,
    };

    let un_p = params_of(&diag.unbroken)?;
    if un_p.phase() != Phase::Unbroken {
        return Err("diagnostics.unbroken must satisfy β < γ_eff".into());
    }
    let (pole, ps, jordan) = impurity_cells(&diag.unbroken.label, un_p, tol, false)?;
    let un_model = bethe_model(cfg, un_p.epsilon, un_p.gamma, un_p.j_coupling, un_p.delta())?;
    let (m, rep) = solve_at(&un_model, un_p.delta(), cfg.bethe.max_iterations, cfg.tolerances.bethe_residual)?;
    let g = gaudin(&rep.roots, &m).map_err(err)?;
    let k = &rep.roots.rapidities;
    let min_gap = (0..k.len())
        .flat_map(|i| (i + 1..k.len()).map(move |j| (i, j)))
        .map(|(i, j)| (k[i] - k[j]).norm())
        .fold(f64::INFINITY, f64::min);
    let un_col = Column {
        label: diag.unbroken.label.clone(),
        params: un_p,
        resolvent_pole_order: pole,
        pseudospectrum_exponent: ps,
        det_g_trend: Cell::new(geometric_mean_sigma(&g), o1, "O(1)"),
        sigma_n_trend: Cell::new(g.sigma_min(), o1, "O(1)"),
        coalescence: Cell::new(min_gap * length / (2.0 * PI), Bound::AtLeast(1e-2), "distinct"),
        monodromy_group: regular_loop(cfg, &un_p, steps)?,
        jordan_block_size: jordan,
    };

    let ko_p = params_of(&diag.kondo)?;
    if ko_p.phase() != Phase::Unbroken {
        return Err("diagnostics.kondo must satisfy β < γ_eff".into());
    }
    let (pole, ps, jordan) = impurity_cells(&diag.kondo.label, ko_p, tol, false)?;
    let ko_model = bethe_model(cfg, ko_p.epsilon, ko_p.gamma, ko_p.j_coupling, ko_p.delta())?;
    let gk = kondo_string_gaudin(&ko_model, diag.kondo_string_width).map_err(err)?;
    let ko_col = Column {
        label: diag.kondo.label.clone(),
        params: ko_p,
        resolvent_pole_order: pole,
        pseudospectrum_exponent: ps,
        det_g_trend: Cell::new(geometric_mean_sigma(&gk), o1, "O(1)"),
        sigma_n_trend: Cell::new(gk.sigma_min(), o1, "O(1)"),
        coalescence: Cell::new(diag.kondo_string_width, Bound::AtLeast(f64::MIN_POSITIVE), "string"),
        monodromy_group: regular_loop(cfg, &ko_p, steps)?,
        jordan_block_size: jordan,
    };

    let columns = [ep_col, un_col, ko_col];
    let mut invariants = Vec::new();
    for c in &columns {
        for (name, cell) in c.cells() {
            invariants.push(Invariant::new(format!("{}.{name}", c.label), cell.value, cell.bound));
        }
    }
    let table = json!({
        "columns": columns.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
        "rows": ["resolvent_pole_order", "pseudospectrum_exponent", "det_g_trend", "sigma_n_trend", "coalescence", "monodromy_group", "jordan_block_size"],
        "cells": to_json(&columns),
    });
    let mut report = Report::new("diagnostics-table", cfg, invariants, table.clone());
    let mut doc = table;
    doc["config_hash"] = json!(report.config_hash);
    doc["version"] = json!(report.version);
    doc["passed"] = json!(report.passed);
    report.results["ep_sweep"] = to_json(&sweep);
    Ok(Outcome {
        report,
        tables: vec![curves],
        extra: vec![("diagnostics_table.json".into(), doc)],
    })
}
