use std::f64::consts::PI;

use num_complex::Complex64;

use super::phase::{phase, phase_derivative, PhaseBranches};
use super::{BetheError, BetheModel, EpReference, RootSet, WidthLaw};
use crate::impurity::EP_THRESHOLD;
use crate::numerics::{c64, svd, svd_full, CMatrix, Svd};

/// Below this `σ_min` Newton switches to a truncated-SVD least-squares step.
pub const LEAST_SQUARES_SWITCH: f64 = 1e-6;

/// Jacobian of the logarithmic Bethe map and its singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct GaudinMatrix {
    pub matrix: CMatrix,
    pub sigma: Svd,
}

impl GaudinMatrix {
    pub fn sigma_min(&self) -> f64 {
        self.sigma.min()
    }

    /// Second-smallest singular value `σ_{N−1}`.
    pub fn sigma_next(&self) -> f64 {
        let s = &self.sigma.singular_values;
        if s.len() >= 2 {
            s[s.len() - 2]
        } else {
            f64::NAN
        }
    }

    pub fn condition(&self) -> f64 {
        self.sigma.condition()
    }

    /// `|det G|` as the product of singular values.
    pub fn abs_det(&self) -> f64 {
        self.sigma.singular_values.iter().product()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub roots: RootSet,
    /// `max_j |F_j|` at the returned roots.
    pub residual: f64,
    pub iterations: usize,
    /// Residual before each iteration and after the last one.
    pub history: Vec<f64>,
    pub least_squares_steps: usize,
}

fn check_len(k: &[Complex64], model: &BetheModel) -> Result<(), BetheError> {
    if k.len() != model.n_particles {
        return Err(BetheError::InvalidInput(format!(
            "expected {} rapidities, got {}",
            model.n_particles,
            k.len()
        )));
    }
    if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(BetheError::InvalidInput("non-finite rapidity".into()));
    }
    Ok(())
}

fn map_with_table(k: &[Complex64], model: &BetheModel, table: &[Complex64], br: &PhaseBranches) -> Result<Vec<Complex64>, BetheError> {
    let n = k.len();
    (0..n)
        .map(|j| {
            let mut f = k[j] * model.length - 2.0 * PI * model.quantum_numbers[j];
            for l in (0..n).filter(|&l| l != j) {
                f += br.continued(j, l, phase(k[j] - k[l], table[j * n + l])?);
            }
            Ok(f)
        })
        .collect()
}

fn jacobian_with_table(k: &[Complex64], model: &BetheModel, table: &[Complex64]) -> Result<CMatrix, BetheError> {
    let n = k.len();
    let mut g = CMatrix::zeros(n, n);
    for j in 0..n {
        g[(j, j)] = c64(model.length, 0.0);
        for l in (0..n).filter(|&l| l != j) {
            let d = phase_derivative(k[j] - k[l], table[j * n + l])?;
            g[(j, j)] += d;
            g[(j, l)] = -d;
        }
    }
    Ok(g)
}

/// `F_j = k_j L + Σ_{ℓ≠j} δ(k_j − k_ℓ) − 2π I_j` on the principal branch.
pub fn bethe_map(roots: &RootSet, model: &BetheModel) -> Result<Vec<Complex64>, BetheError> {
    bethe_map_with_branches(roots, model, &PhaseBranches::new(model.n_particles))
}

/// Bethe map with continued phases `δ + 2π·m_jℓ`.
pub fn bethe_map_with_branches(roots: &RootSet, model: &BetheModel, branches: &PhaseBranches) -> Result<Vec<Complex64>, BetheError> {
    check_len(&roots.rapidities, model)?;
    map_with_table(&roots.rapidities, model, &model.width_table()?, branches)
}

pub fn gaudin(roots: &RootSet, model: &BetheModel) -> Result<GaudinMatrix, BetheError> {
    check_len(&roots.rapidities, model)?;
    let matrix = jacobian_with_table(&roots.rapidities, model, &model.width_table()?)?;
    let sigma = svd(&matrix)?;
    Ok(GaudinMatrix { matrix, sigma })
}

/// Central finite differences of the Bethe map along real directions.
pub fn gaudin_finite_difference(roots: &RootSet, model: &BetheModel, h: f64) -> Result<CMatrix, BetheError> {
    let n = model.n_particles;
    let mut out = CMatrix::zeros(n, n);
    for l in 0..n {
        let mut plus = roots.clone();
        let mut minus = roots.clone();
        plus.rapidities[l] += h;
        minus.rapidities[l] -= h;
        let fp = bethe_map(&plus, model)?;
        let fm = bethe_map(&minus, model)?;
        for j in 0..n {
            out[(j, l)] = (fp[j] - fm[j]) / (2.0 * h);
        }
    }
    Ok(out)
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn newton_solve(seed: &RootSet, model: &BetheModel, tol: f64, max_iter: usize) -> Result<SolveReport, BetheError> {
    newton_solve_with_branches(seed, model, &PhaseBranches::new(model.n_particles), tol, max_iter)
}

/// Damped Newton on the Bethe map with the Gaudin matrix as Jacobian.
pub fn newton_solve_with_branches(
    seed: &RootSet,
    model: &BetheModel,
    branches: &PhaseBranches,
    tol: f64,
    max_iter: usize,
) -> Result<SolveReport, BetheError> {
    check_len(&seed.rapidities, model)?;
    let table = model.width_table()?;
    let eval = |k: &[Complex64]| map_with_table(k, model, &table, branches);
    let mut k = seed.rapidities.clone();
    let mut f = eval(&k)?;
    let mut res = max_abs(&f);
    if !res.is_finite() {
        return Err(BetheError::InvalidInput("seed residual is not finite".into()));
    }
    let mut history = vec![res];
    let mut ls_steps = 0;
    let mut it = 0;
    while res > tol {
        if it == max_iter {
            return Err(BetheError::Divergence {
                iterations: it,
                residual: res,
            });
        }
        it += 1;
        let g = jacobian_with_table(&k, model, &table)?;
        let rhs: Vec<Complex64> = f.iter().map(|z| -z).collect();
        let step = match least_squares_if_needed(&g, &rhs)? {
            Some(dk) => {
                ls_steps += 1;
                dk
            }
            None => g
                .solve(&CMatrix::column(&rhs))
                .map_err(|e| BetheError::JacobianBreakdown(e.to_string()))?
                .col(0),
        };
        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= 1.0 / 1024.0 {
            let trial: Vec<Complex64> = k.iter().zip(&step).map(|(a, d)| a + lambda * d).collect();
            if let Ok(ft) = eval(&trial) {
                let rt = max_abs(&ft);
                if rt.is_finite() && (rt < res || rt <= tol) {
                    accepted = Some((trial, ft, rt));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((kt, ft, rt)) => {
                k = kt;
                f = ft;
                res = rt;
                history.push(res);
            }
            None => {
                return Err(BetheError::Divergence {
                    iterations: it,
                    residual: res,
                })
            }
        }
    }
    Ok(SolveReport {
        roots: RootSet::new(k, model.sector, model.pair, 1e-8),
        residual: res,
        iterations: it,
        history,
        least_squares_steps: ls_steps,
    })
}

/// Minimum-norm least-squares step with singular values below
/// `1e-13·σ_max` truncated, used when `σ_min < LEAST_SQUARES_SWITCH`.
fn least_squares_if_needed(g: &CMatrix, rhs: &[Complex64]) -> Result<Option<Vec<Complex64>>, BetheError> {
    let s = svd(g)?;
    if s.min() >= LEAST_SQUARES_SWITCH {
        return Ok(None);
    }
    let (u, sv, v) = svd_full(g)?;
    let cut = 1e-13 * sv[0];
    let n = rhs.len();
    let mut dk = vec![c64(0.0, 0.0); n];
    for (i, &si) in sv.iter().enumerate() {
        if si <= cut {
            continue;
        }
        let coef: Complex64 = (0..n).map(|r| u[(r, i)].conj() * rhs[r]).sum::<Complex64>() / si;
        for (r, d) in dk.iter_mut().enumerate() {
            *d += v[(r, i)] * coef;
        }
    }
    if dk.iter().all(|z| z.norm() == 0.0) {
        return Err(BetheError::JacobianBreakdown("least-squares step vanished".into()));
    }
    Ok(Some(dk))
}

/// Merged EP configuration: solves the Bethe equations with the pair
/// constrained to a common real root. `δ(0) = π` for any width, so the
/// result does not depend on the pair width.
pub(super) fn ep_reference(model: &BetheModel) -> Result<EpReference, BetheError> {
    let (a, b) = model
        .pair
        .ok_or_else(|| BetheError::InvalidModel("model has no impurity pair".into()))?;
    let n = model.n_particles;
    let nu = (n as f64 - 1.0) / 2.0;
    let gb = c64(model.bath_width(), 0.0);
    let table: Vec<Complex64> = vec![gb; n * n];
    let br = PhaseBranches::new(n);
    let expand = |y: &[f64]| -> Vec<Complex64> {
        let mut k: Vec<Complex64> = y.iter().map(|&v| c64(v, 0.0)).collect();
        k.insert(b, k[a]);
        k
    };
    let mut y: Vec<f64> = model
        .quantum_numbers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != b)
        .map(|(_, q)| 2.0 * PI * (q - nu) / model.length)
        .collect();
    let mut converged = false;
    for _ in 0..100 {
        let k = expand(&y);
        let f = map_with_table(&k, model, &table, &br)?;
        let fr: Vec<Complex64> = f.iter().enumerate().filter(|&(i, _)| i != b).map(|(_, z)| *z).collect();
        if max_abs(&fr) <= 1e-13 {
            converged = true;
            break;
        }
        let g = jacobian_with_table(&k, model, &table)?;
        let rows: Vec<usize> = (0..n).filter(|&i| i != b).collect();
        let m = n - 1;
        let jr = CMatrix::from_fn(m, m, |r, c| {
            let col = if c < b { c } else { c + 1 };
            let mut v = g[(rows[r], col)];
            if col == a {
                v += g[(rows[r], b)];
            }
            v
        });
        let rhs: Vec<Complex64> = fr.iter().map(|z| -z).collect();
        let dy = jr
            .solve(&CMatrix::column(&rhs))
            .map_err(|e| BetheError::JacobianBreakdown(e.to_string()))?
            .col(0);
        for (v, d) in y.iter_mut().zip(&dy) {
            *v += d.re;
        }
    }
    if !converged {
        return Err(BetheError::Divergence {
            iterations: 100,
            residual: f64::NAN,
        });
    }
    let roots: Vec<f64> = expand(&y).iter().map(|z| z.re).collect();
    let mut l_eff = model.length;
    for m in (0..n).filter(|&m| m != a && m != b) {
        l_eff += phase_derivative(c64(roots[a] - roots[m], 0.0), gb)?.re;
    }
    if l_eff <= 0.0 {
        return Err(BetheError::InvalidModel(format!("effective length {l_eff} is not positive")));
    }
    Ok(EpReference {
        roots,
        effective_length: l_eff,
        critical_width: 4.0 / l_eff,
    })
}

/// Bisection for the root of a monotone function on `(lo, hi)`.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let increasing = f(hi) > f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Half-splitting of an isolated pair with mutual width `w` on a line of
/// effective length `l_eff`: imaginary `v` with `v·L_eff = 2·artanh(2v/w)`
/// when `L_eff·w/4 > 1`, real `x` with `x·L_eff = 2·arctan(2x/w)` otherwise.
pub(super) fn isolated_pair_split(l_eff: f64, w: f64) -> Complex64 {
    let a = l_eff * w / 4.0;
    if (a - 1.0).abs() < 1e-15 {
        c64(0.0, 0.0)
    } else if a > 1.0 {
        let t = bisect(1e-300, 1.0 - 1e-16, |t| t.atanh() / t - a);
        c64(0.0, t * w / 2.0)
    } else {
        let t = bisect(1e-300, 1e16, |t| t.atan() / t - a);
        c64(t * w / 2.0, 0.0)
    }
}

/// Ground-state seed at control distance `delta`: spectators on their
/// merged-EP positions (Jordan-pair law) or free Fermi momenta
/// `2π(I_j − (N−1)/2)/L`, and the pair at `k₀ ± i·v` (unbroken),
/// `k₀ ± x` (broken) or a double root at `k₀` (EP).
pub fn ground_state_seed(model: &BetheModel, delta: f64) -> Result<RootSet, BetheError> {
    let m = model.with_delta(delta)?;
    let n = m.n_particles;
    let nu = (n as f64 - 1.0) / 2.0;
    let mut k: Vec<Complex64> = match m.reference() {
        Some(r) => r.roots.iter().map(|&x| c64(x, 0.0)).collect(),
        None => m.quantum_numbers.iter().map(|q| c64(2.0 * PI * (q - nu) / m.length, 0.0)).collect(),
    };
    if let Some((a, b)) = m.pair {
        let k0 = m.pair_centre();
        let s = m.impurity.s_eff();
        let split = if s.norm() <= EP_THRESHOLD {
            c64(0.0, 0.0)
        } else {
            match (m.width_law, m.reference()) {
                (WidthLaw::JordanPair, Some(r)) => isolated_pair_split(r.effective_length, m.pair_width()?.re),
                _ => c64(s.im, s.re),
            }
        };
        // a takes +i·v (unbroken) or −x (broken) so that real parts stay ordered
        let (ka, kb) = if split.im != 0.0 {
            (k0 + split, k0 - split)
        } else {
            (k0 - split, k0 + split)
        };
        k[a] = ka;
        k[b] = kb;
    }
    let k = match m.sector {
        super::Sector::R => k,
        super::Sector::L => k.iter().map(|z| z.conj()).collect(),
    };
    Ok(RootSet::new(k, m.sector, m.pair, 1e-8))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::{Sector, WidthLaw};
    use crate::impurity::ImpurityParams;

    fn desk(delta: f64) -> BetheModel {
        let p = ImpurityParams::near_ep(0.0, 1.0, 0.0, delta).unwrap();
        BetheModel::new(50.0, 8, 1.0, p, WidthLaw::JordanPair).unwrap()
    }

    fn solve(m: &BetheModel, delta: f64) -> SolveReport {
        let seed = ground_state_seed(m, delta).unwrap();
        newton_solve(&seed, &m.with_delta(delta).unwrap().with_sector(seed.sector), 1e-12, 50).unwrap()
    }

    #[test]
    fn single_particle() {
        let p = ImpurityParams::new(0.0, 0.5, 1.0, 0.0).unwrap();
        let m = BetheModel::new(10.0, 1, 1.0, p, WidthLaw::JordanPair).unwrap();
        let k = RootSet::new(vec![c64(0.3, 0.0)], Sector::R, None, 1e-8);
        let f = bethe_map(&k, &m).unwrap();
        assert!((f[0] - c64(3.0, 0.0)).norm() < 1e-15);
        let g = gaudin(&k, &m).unwrap();
        assert!((g.matrix[(0, 0)] - 10.0).norm() == 0.0);
    }

    #[test]
    fn narrow_width_is_free() {
        // Γ₀ → 0: δ(u) → 0 for u > 0, so roots sit at 2π(I_j − #{ℓ: k_ℓ > k_j})/L.
        let p = ImpurityParams::new(0.0, 0.5, 1.0, 0.0).unwrap();
        let m = BetheModel::new(20.0, 2, 1e-9, p, WidthLaw::BreitWigner).unwrap();
        let exact = [2.0 * PI * (0.0 - 1.0) / 20.0, 2.0 * PI / 20.0];
        let seed = RootSet::new(vec![c64(exact[0] + 1e-3, 0.0), c64(exact[1] - 1e-3, 0.0)], Sector::R, None, 1e-8);
        let rep = newton_solve(&seed, &m, 1e-12, 50).unwrap();
        assert!(rep.iterations <= 3, "{rep:?}");
        for (k, e) in rep.roots.rapidities.iter().zip(exact) {
            assert!((k - e).norm() < 1e-8);
        }
    }

    #[test]
    fn seed_quality_and_structure() {
        let m = desk(0.2);
        let seed = ground_state_seed(&m, 0.2).unwrap();
        let f = bethe_map(&seed, &m).unwrap();
        assert!(max_abs(&f) < 1.0);
        assert!(seed.rapidities[3].im > 0.0 && seed.rapidities[4].im < 0.0);
        let broken = ground_state_seed(&m, -0.1).unwrap();
        assert_eq!(broken.count_real(0.0), 8);
        assert!(broken.rapidities[3].re < broken.rapidities[4].re);
        let ep = ground_state_seed(&m, 0.0).unwrap();
        assert_eq!(ep.rapidities[3], ep.rapidities[4]);
    }

    #[test]
    fn gaudin_matches_finite_differences() {
        for delta in [0.3, 1e-3, -0.05] {
            let m = desk(delta);
            let rep = solve(&m, delta);
            let g = gaudin(&rep.roots, &m).unwrap();
            let fd = gaudin_finite_difference(&rep.roots, &m, 1e-6).unwrap();
            assert!((&g.matrix - &fd).max_abs() < 1e-6, "delta = {delta}");
        }
    }

    #[test]
    fn ground_state_at_beta_06() {
        let m = desk(0.4);
        let rep = solve(&m, 0.4);
        assert!(rep.residual <= 1e-12);
        let k = &rep.roots.rapidities;
        assert_eq!(rep.roots.count_real(1e-10), 6);
        assert!((k[3] - k[4].conj()).norm() < 1e-12 && k[3].im > 0.0);
        let g = gaudin(&rep.roots, &m).unwrap();
        assert!((g.matrix[(3, 4)] - g.matrix[(4, 3)].conj()).norm() < 1e-12);
        // quadratic convergence away from the EP
        let h = &rep.history;
        for w in h.windows(2).filter(|w| w[0] < 1e-2 && w[1] > 1e-14) {
            assert!(w[1] / (w[0] * w[0]) < 1e3, "{h:?}");
        }
    }

    #[test]
    fn left_sector_is_conjugate() {
        let m = desk(0.05);
        let right = solve(&m, 0.05);
        let ml = m.clone().with_sector(Sector::L);
        let seed = ground_state_seed(&ml, 0.05).unwrap();
        let left = newton_solve(&seed, &ml, 1e-12, 50).unwrap();
        assert!(left.roots.max_distance(&right.roots.conjugate()) < 1e-10);
    }

    #[test]
    fn least_squares_near_ep() {
        let m = desk(1e-9);
        let rep = solve(&m, 1e-9);
        assert!(rep.residual <= 1e-12);
        let g = gaudin(&rep.roots, &m).unwrap();
        assert!(g.sigma_min() < 1e-3);
    }

    #[test]
    fn isolated_split() {
        let v = isolated_pair_split(40.0, 0.2);
        assert!(v.re == 0.0 && (v.im * 40.0 - 2.0 * (2.0 * v.im / 0.2).atanh()).abs() < 1e-12);
        let x = isolated_pair_split(40.0, 0.05);
        assert!(x.im == 0.0 && (x.re * 40.0 - 2.0 * (2.0 * x.re / 0.05).atan()).abs() < 1e-12);
    }
}
