use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::phase::phase;
use super::solver::{gaudin, ground_state_seed, newton_solve, GaudinMatrix};
use super::sweep::SWEEP_TOL;
use super::{BetheError, BetheModel, RootSet, WidthLaw};
use crate::numerics::c64;

/// `δ` of the EP side of the Kondo contrast.
pub const EP_CONTRAST_DELTA: f64 = 1e-6;

/// Phase of the impurity pair recovered from a solved state, against the
/// closed form `π − 2i·artanh(2v/W)` for a pair `k₀ ± iv`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairDrift {
    pub recovered: Complex64,
    pub formula: Complex64,
    pub mismatch: f64,
    /// `|δ_pair/2π − ½|`, the distance to the merged half-integer shift.
    pub distance_to_merged: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumNumberAudit {
    /// `I_j = (k_j L + Σ_{ℓ≠j} δ_jℓ)/2π`.
    pub values: Vec<Complex64>,
    pub real_parts: Vec<f64>,
    pub imaginary_defects: Vec<f64>,
    pub max_imaginary_defect: f64,
    /// `frac((N−1)/2)`: 0 for integer, ½ for half-integer lattices.
    pub lattice_offset: f64,
    /// Largest distance of `Re I_j` from `ℤ + lattice_offset`.
    pub lattice_defect: f64,
    /// Largest `|I_j − (assigned I_j)|`.
    pub assignment_defect: f64,
    pub conjugate_pairing_defect: f64,
    pub pair_drift: Option<PairDrift>,
}

impl QuantumNumberAudit {
    /// Real, on the (half-)integer lattice, within `tol`.
    pub fn closed(&self, tol: f64) -> bool {
        self.max_imaginary_defect <= tol && self.lattice_defect <= tol
    }
}

/// `max_j min_k |I_k − conj(I_j)|`: zero iff the multiset is closed under
/// complex conjugation.
pub fn conjugate_pairing_defect(values: &[Complex64]) -> f64 {
    values
        .iter()
        .map(|v| values.iter().map(|w| (w - v.conj()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max)
}

pub fn quantum_number_audit(roots: &RootSet, model: &BetheModel) -> Result<QuantumNumberAudit, BetheError> {
    let n = model.n_particles;
    if roots.len() != n {
        return Err(BetheError::InvalidInput(format!("expected {n} rapidities, got {}", roots.len())));
    }
    let table = model.width_table()?;
    let k = &roots.rapidities;
    let mut values = Vec::with_capacity(n);
    for j in 0..n {
        let mut acc = k[j] * model.length;
        for l in (0..n).filter(|&l| l != j) {
            acc += phase(k[j] - k[l], table[j * n + l])?;
        }
        values.push(acc / (2.0 * PI));
    }
    let lattice_offset = ((n as f64 - 1.0) / 2.0).fract();
    let lattice_defect = values
        .iter()
        .map(|v| {
            let x = v.re - lattice_offset;
            (x - x.round()).abs()
        })
        .fold(0.0, f64::max);
    let imaginary_defects: Vec<f64> = values.iter().map(|v| v.im.abs()).collect();
    let assignment_defect = values
        .iter()
        .zip(&model.quantum_numbers)
        .map(|(v, q)| (v - q).norm())
        .fold(0.0, f64::max);
    let pair_drift = match model.pair {
        Some((a, b)) => {
            let mut spect = k[a] * model.length;
            for m in (0..n).filter(|&m| m != a && m != b) {
                spect += phase(k[a] - k[m], table[a * n + m])?;
            }
            let recovered = 2.0 * PI * model.quantum_numbers[a] - spect;
            let v = 0.5 * (k[a] - k[b]).im;
            let w = table[a * n + b];
            let formula = c64(PI, 0.0) - 2.0 * c64(0.0, 1.0) * (2.0 * v / w).atanh();
            Some(PairDrift {
                recovered,
                formula,
                mismatch: (recovered - formula).norm(),
                distance_to_merged: (recovered / (2.0 * PI) - 0.5).norm(),
            })
        }
        None => None,
    };
    Ok(QuantumNumberAudit {
        real_parts: values.iter().map(|v| v.re).collect(),
        max_imaginary_defect: imaginary_defects.iter().copied().fold(0.0, f64::max),
        imaginary_defects,
        lattice_offset,
        lattice_defect,
        assignment_defect,
        conjugate_pairing_defect: conjugate_pairing_defect(&values),
        pair_drift,
        values,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KondoContrast {
    pub gamma_k: f64,
    /// Breit-Wigner width `Γ̃` used in every channel of the surrogate.
    pub width: f64,
    pub length: f64,
    pub kondo_sigma_min: f64,
    pub kondo_bound_holds: bool,
    pub ep_delta: f64,
    pub ep_sigma_min: f64,
    pub ep_collapsed: bool,
    /// `(Γ_K, σ_min)` for a shrinking string, reported only.
    pub shrinking_string: Vec<(f64, f64)>,
}

fn string_gaudin(model: &BetheModel, bw: &BetheModel, spectators: &[f64], gamma_k: f64) -> Result<GaudinMatrix, BetheError> {
    let (a, b) = model
        .pair
        .ok_or_else(|| BetheError::InvalidModel("needs an impurity pair".into()))?;
    let k0 = spectators[a];
    let mut k: Vec<Complex64> = spectators.iter().map(|&x| c64(x, 0.0)).collect();
    k[a] = c64(k0, 0.0);
    k[b] = c64(k0, gamma_k);
    let roots = RootSet::new(k, bw.sector, None, 1e-8);
    gaudin(&roots, bw)
}

fn kondo_sigma(model: &BetheModel, bw: &BetheModel, spectators: &[f64], gamma_k: f64) -> Result<f64, BetheError> {
    Ok(string_gaudin(model, bw, spectators, gamma_k)?.sigma_min())
}

/// Gaudin matrix of the Kondo-string surrogate used by
/// [`kondo_string_scenario`].
pub fn kondo_string_gaudin(model: &BetheModel, gamma_k: f64) -> Result<GaudinMatrix, BetheError> {
    let jp = model.with_width_law(WidthLaw::JordanPair)?;
    let bw = model.with_width_law(WidthLaw::BreitWigner)?;
    let spectators = jp
        .reference()
        .ok_or_else(|| BetheError::InvalidModel("needs an impurity pair".into()))?
        .roots
        .clone();
    string_gaudin(&jp, &bw, &spectators, gamma_k)
}

/// Gaudin matrix of a Kondo-string surrogate `{k₀, k₀ + iΓ_K}` among the
/// merged-EP spectators, all channels at the Breit-Wigner width of the
/// model's `δ`, contrasted with the solved Jordan-pair state at
/// `δ = 1e-6`.
pub fn kondo_string_scenario(model: &BetheModel, gamma_k: f64) -> Result<(f64, KondoContrast), BetheError> {
    if !(gamma_k > 0.0 && gamma_k.is_finite()) {
        return Err(BetheError::InvalidInput(format!("gamma_k must be positive, got {gamma_k}")));
    }
    let jp = model.with_width_law(WidthLaw::JordanPair)?;
    let bw = model.with_width_law(WidthLaw::BreitWigner)?;
    let width = bw.breit_wigner_width()?;
    if width.im.abs() > 1e-12 * width.norm() {
        return Err(BetheError::InvalidModel("Kondo surrogate needs the unbroken phase".into()));
    }
    let spectators = jp
        .reference()
        .ok_or_else(|| BetheError::InvalidModel("needs an impurity pair".into()))?
        .roots
        .clone();
    let sigma = kondo_sigma(&jp, &bw, &spectators, gamma_k)?;
    let shrinking_string = [1.0, 0.1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&f| Ok((gamma_k * f, kondo_sigma(&jp, &bw, &spectators, gamma_k * f)?)))
        .collect::<Result<Vec<_>, BetheError>>()?;
    let ep_model = jp.with_delta(EP_CONTRAST_DELTA)?;
    let seed = ground_state_seed(&jp, EP_CONTRAST_DELTA)?;
    let ep = newton_solve(&seed, &ep_model, SWEEP_TOL, 60)?;
    let ep_sigma_min = gaudin(&ep.roots, &ep_model)?.sigma_min();
    let report = KondoContrast {
        gamma_k,
        width: width.re,
        length: model.length,
        kondo_sigma_min: sigma,
        kondo_bound_holds: sigma >= 0.1 * model.length,
        ep_delta: EP_CONTRAST_DELTA,
        ep_sigma_min,
        ep_collapsed: ep_sigma_min <= 1e-3 * model.length,
        shrinking_string,
    };
    Ok((sigma, report))
}

/// Unnormalised bound-state self-overlap `∫₀^∞ e^{−2sy} dy = 1/(2s)`.
pub fn biorthogonal_overlap(s: f64) -> Result<f64, BetheError> {
    if !(s.is_finite() && s > 0.0) {
        return Err(BetheError::InvalidInput(format!("s must be positive, got {s}")));
    }
    Ok(1.0 / (2.0 * s))
}
