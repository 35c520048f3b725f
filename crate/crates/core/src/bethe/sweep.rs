use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::phase::PhaseBranches;
use super::solver::{gaudin, ground_state_seed, newton_solve, newton_solve_with_branches};
use super::{BetheError, BetheModel, RootSet};
use crate::numerics::linear_fit;

/// Residual tolerance used by sweeps and loops.
pub const SWEEP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub delta: f64,
    pub converged: bool,
    pub residual: f64,
    pub iterations: usize,
    /// `|k_⋆ − k_{⋆+1}|`.
    pub separation: f64,
    pub sigma_min: f64,
    /// `σ_{N−1}`.
    pub sigma_rest_min: f64,
    /// Full singular spectrum, descending.
    pub singular_values: Vec<f64>,
    #[serde(skip)]
    pub roots: Option<RootSet>,
}

/// Log-log fit `y ∝ δ^slope` with the standard error of the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub stderr: f64,
    pub prefactor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub points: Vec<SweepPoint>,
    pub separation_fit: PowerFit,
    pub sigma_min_fit: PowerFit,
    /// Puiseux coefficient `α` in `k_⋆ − k₀ ≈ ±α δ^{1/2}` from a fit with
    /// the exponent fixed to ½.
    pub puiseux_coefficient: f64,
    /// Largest over `j < N` of `max_δ σ_j / min_δ σ_j`.
    pub sigma_rest_ratio: f64,
    pub sigma_min_strictly_decreasing: bool,
    pub max_residual: f64,
}

fn power_fit(x: &[f64], y: &[f64]) -> PowerFit {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (exponent, icept, stderr) = linear_fit(&lx, &ly);
    PowerFit {
        exponent,
        stderr,
        prefactor: icept.exp(),
    }
}

/// Solves the ground state at each `δ` of a decreasing positive grid.
/// Points that fail to converge are kept, flagged and left out of fits.
pub fn ep_sweep(model: &BetheModel, delta_grid: &[f64]) -> Result<SweepResult, BetheError> {
    let (a, b) = model
        .pair
        .ok_or_else(|| BetheError::InvalidModel("sweep needs an impurity pair".into()))?;
    if delta_grid.len() < 3 {
        return Err(BetheError::InvalidInput("sweep needs at least three points".into()));
    }
    if delta_grid.iter().any(|&d| !(d.is_finite() && d > 0.0)) || delta_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(BetheError::InvalidInput(
            "delta grid must be positive and strictly decreasing".into(),
        ));
    }
    let mut points = Vec::with_capacity(delta_grid.len());
    for &d in delta_grid {
        let m = model.with_delta(d)?;
        let seed = ground_state_seed(model, d)?;
        let point = match newton_solve(&seed, &m, SWEEP_TOL, 60).and_then(|rep| Ok((gaudin(&rep.roots, &m)?, rep))) {
            Ok((g, rep)) => SweepPoint {
                delta: d,
                converged: true,
                residual: rep.residual,
                iterations: rep.iterations,
                separation: (rep.roots.rapidities[a] - rep.roots.rapidities[b]).norm(),
                sigma_min: g.sigma_min(),
                sigma_rest_min: g.sigma_next(),
                singular_values: g.sigma.singular_values.clone(),
                roots: Some(rep.roots),
            },
            Err(BetheError::Divergence { iterations, residual }) => SweepPoint {
                delta: d,
                converged: false,
                residual,
                iterations,
                separation: f64::NAN,
                sigma_min: f64::NAN,
                sigma_rest_min: f64::NAN,
                singular_values: Vec::new(),
                roots: None,
            },
            Err(e) => return Err(e),
        };
        points.push(point);
    }
    let ok: Vec<&SweepPoint> = points.iter().filter(|p| p.converged).collect();
    if ok.len() < 3 {
        return Err(BetheError::Divergence {
            iterations: 0,
            residual: f64::NAN,
        });
    }
    let ds: Vec<f64> = ok.iter().map(|p| p.delta).collect();
    let seps: Vec<f64> = ok.iter().map(|p| p.separation).collect();
    let smins: Vec<f64> = ok.iter().map(|p| p.sigma_min).collect();
    let separation_fit = power_fit(&ds, &seps);
    let sigma_min_fit = power_fit(&ds, &smins);
    let puiseux_coefficient = {
        let mean_log: f64 = ds.iter().zip(&seps).map(|(d, s)| (0.5 * s / d.sqrt()).ln()).sum::<f64>() / ds.len() as f64;
        mean_log.exp()
    };
    let n = model.n_particles;
    let mut sigma_rest_ratio: f64 = 1.0;
    for j in 0..n - 1 {
        let vals = ok.iter().map(|p| p.singular_values[j]);
        let hi = vals.clone().fold(0.0, f64::max);
        let lo = vals.fold(f64::INFINITY, f64::min);
        sigma_rest_ratio = sigma_rest_ratio.max(hi / lo);
    }
    Ok(SweepResult {
        sigma_min_strictly_decreasing: points.iter().all(|p| p.converged) && smins.windows(2).all(|w| w[1] < w[0]),
        max_residual: ok.iter().map(|p| p.residual).fold(0.0, f64::max),
        points,
        separation_fit,
        sigma_min_fit,
        puiseux_coefficient,
        sigma_rest_ratio,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonodromyTrace {
    pub centre: f64,
    pub delta0: f64,
    pub n_steps: usize,
    /// `θ_n = n/n_steps`, including both endpoints.
    pub thetas: Vec<f64>,
    /// Roots at each `θ_n`, in the labelling of `θ = 0`.
    #[serde(skip)]
    pub trajectories: Vec<Vec<Complex64>>,
    /// `permutation[j]` is the initial label closest to final root `j`.
    pub permutation: Vec<usize>,
    pub parity: i32,
    pub is_pair_transposition: bool,
    /// Largest `|k_m(1) − k_m(0)|` over the spectators.
    pub spectator_return: f64,
    /// Angle of `(k_⋆ − k_{⋆+1})(θ = ½) / (k_⋆ − k_{⋆+1})(0)`.
    pub half_loop_rotation: f64,
    pub max_residual: f64,
    pub rejected_steps: usize,
}

/// Permutation parity from the cycle decomposition.
pub fn permutation_parity(perm: &[usize]) -> i32 {
    let mut seen = vec![false; perm.len()];
    let mut parity = 1;
    for start in 0..perm.len() {
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = perm[j];
            len += 1;
        }
        if len > 0 && len % 2 == 0 {
            parity = -parity;
        }
    }
    parity
}

/// Matches final roots to initial labels, closest pairs first.
fn match_roots(initial: &[Complex64], fin: &[Complex64]) -> Vec<usize> {
    let n = initial.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for (j, f) in fin.iter().enumerate() {
        for (i, k) in initial.iter().enumerate() {
            pairs.push(((f - k).norm(), j, i));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut perm = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for (_, j, i) in pairs {
        if perm[j] == usize::MAX && !used[i] {
            perm[j] = i;
            used[i] = true;
        }
    }
    perm
}

/// Continues the ground state along `δ(θ) = δ₀·e^{2πiθ}` with a secant
/// predictor and Newton corrector, halving rejected steps.
pub fn monodromy_loop(model: &BetheModel, delta0: f64, n_steps: usize) -> Result<MonodromyTrace, BetheError> {
    monodromy_loop_about(model, 0.0, delta0, n_steps)
}

/// Same continuation along `δ(θ) = c + r·e^{2πiθ}`. Loops with `|c| > r`
/// do not enclose the exceptional point.
pub fn monodromy_loop_about(model: &BetheModel, centre: f64, radius: f64, n_steps: usize) -> Result<MonodromyTrace, BetheError> {
    let (a, b) = model
        .pair
        .ok_or_else(|| BetheError::InvalidModel("monodromy needs an impurity pair".into()))?;
    if n_steps < 64 {
        return Err(BetheError::InvalidInput(format!("n_steps must be at least 64, got {n_steps}")));
    }
    let g = model.impurity.gamma_eff();
    if !(radius > 0.0 && centre.is_finite() && centre.abs() + radius < g) {
        return Err(BetheError::InvalidInput(format!(
            "loop |δ − {centre}| = {radius} must stay inside |δ| < γ_eff = {g}"
        )));
    }
    let delta0 = centre + radius;
    let m0 = model.with_delta(delta0)?;
    let seed = ground_state_seed(model, delta0)?;
    let start = newton_solve(&seed, &m0, SWEEP_TOL, 60)?;
    let at = |theta: f64| m0.with_complex_delta(centre + radius * Complex64::from_polar(1.0, 2.0 * PI * theta));

    let mut k = start.roots.rapidities.clone();
    let mut branches = PhaseBranches::anchored(&k, &m0.width_table()?)?;
    let mut k_prev: Option<(Vec<Complex64>, f64)> = None;
    let mut theta = 0.0;
    let nominal = 1.0 / n_steps as f64;
    let mut h_try = nominal;
    let mut rejected = 0;
    let mut max_residual = start.residual;
    let mut thetas = vec![0.0];
    let mut traj = vec![k.clone()];

    for step in 1..=n_steps {
        let target = step as f64 / n_steps as f64;
        while target - theta > 1e-15 {
            let h = h_try.min(target - theta);
            let pred: Vec<Complex64> = match &k_prev {
                Some((kp, hp)) => k.iter().zip(kp).map(|(x, y)| x + (x - y) * (h / hp)).collect(),
                None => k.clone(),
            };
            let mt = at(theta + h);
            let sep = (k[a] - k[b]).norm();
            let guess = RootSet::new(pred.clone(), mt.sector, mt.pair, 1e-8);
            let outcome = newton_solve_with_branches(&guess, &mt, &branches, SWEEP_TOL, 30);
            let accepted = match outcome {
                Ok(rep) => {
                    let jump = rep
                        .roots
                        .rapidities
                        .iter()
                        .zip(&pred)
                        .map(|(x, y)| (x - y).norm())
                        .fold(0.0, f64::max);
                    (jump <= 0.25 * sep).then_some(rep)
                }
                Err(_) => None,
            };
            match accepted {
                Some(rep) => {
                    max_residual = max_residual.max(rep.residual);
                    k_prev = Some((k, h));
                    k = rep.roots.rapidities;
                    branches.advance(&k, &mt.width_table()?)?;
                    theta += h;
                    h_try = (2.0 * h).min(nominal);
                }
                None => {
                    rejected += 1;
                    h_try = 0.5 * h;
                    if h_try < nominal / 4096.0 {
                        return Err(BetheError::TrackingLoss { theta });
                    }
                }
            }
        }
        theta = target;
        thetas.push(target);
        traj.push(k.clone());
    }

    let initial = &traj[0];
    let permutation = match_roots(initial, &k);
    let parity = permutation_parity(&permutation);
    let n = k.len();
    let is_pair_transposition = (0..n).all(|j| {
        let want = if j == a {
            b
        } else if j == b {
            a
        } else {
            j
        };
        permutation[j] == want
    });
    let spectator_return = (0..n)
        .filter(|&j| j != a && j != b)
        .map(|j| (k[j] - initial[j]).norm())
        .fold(0.0, f64::max);
    let half = &traj[n_steps / 2];
    let half_loop_rotation = ((half[a] - half[b]) / (initial[a] - initial[b])).arg();
    Ok(MonodromyTrace {
        centre,
        delta0: radius,
        n_steps,
        thetas,
        trajectories: traj,
        permutation,
        parity,
        is_pair_transposition,
        spectator_return,
        half_loop_rotation,
        max_residual,
        rejected_steps: rejected,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::WidthLaw;
    use crate::impurity::ImpurityParams;
    use crate::numerics::logspace;

    fn model(n: usize) -> BetheModel {
        let p = ImpurityParams::near_ep(0.0, 1.0, 0.0, 0.1).unwrap();
        BetheModel::new(50.0, n, 1.0, p, WidthLaw::JordanPair).unwrap()
    }

    #[test]
    fn parity_of_permutations() {
        assert_eq!(permutation_parity(&[0, 1, 2]), 1);
        assert_eq!(permutation_parity(&[1, 0, 2]), -1);
        assert_eq!(permutation_parity(&[1, 2, 0]), 1);
        assert_eq!(
            match_roots(
                &[Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0)],
                &[Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0)]
            ),
            vec![1, 0]
        );
    }

    #[test]
    fn sweep_scaling() {
        let mut grid = logspace(1e-6, 1e-1, 11);
        grid.reverse();
        for n in [4, 6, 8] {
            let r = ep_sweep(&model(n), &grid).unwrap();
            assert!(r.max_residual <= 1e-12, "n = {n}");
            assert!(
                (0.45..=0.55).contains(&r.separation_fit.exponent),
                "n = {n}: {:?}",
                r.separation_fit
            );
            assert!(r.sigma_min_strictly_decreasing, "n = {n}");
            assert!(r.sigma_rest_ratio <= 3.0, "n = {n}: {}", r.sigma_rest_ratio);
        }
    }

    #[test]
    fn sweep_rejects_bad_grids() {
        assert!(ep_sweep(&model(4), &[1e-2, 1e-1, 1e-3]).is_err());
        assert!(ep_sweep(&model(4), &[1e-1, 0.0, -1e-3]).is_err());
    }

    #[test]
    fn loop_exchanges_the_pair() {
        let t = monodromy_loop(&model(8), 1e-2, 64).unwrap();
        assert!(t.is_pair_transposition, "{:?}", t.permutation);
        assert_eq!(t.parity, -1);
        assert!(t.spectator_return <= 1e-8);
        assert!((t.half_loop_rotation.abs() - PI / 2.0).abs() < 0.1, "{}", t.half_loop_rotation);
        assert!(monodromy_loop(&model(8), 1e-2, 32).is_err());
    }
}
