//! Biorthogonal Bethe equations with Breit-Wigner scattering.
//!
//! Rapidities `k_j` of sector R solve the logarithmic Bethe map
//! `F_j = k_j L + Σ_{ℓ≠j} δ(k_j − k_ℓ; W_jℓ) − 2π I_j = 0` with
//! `δ(u; W) = π − 2·arctan(u/W)`. Sector L uses the conjugate widths.
//!
//! Two width laws are available:
//!
//! * [`WidthLaw::JordanPair`] (default): bath channels scatter with
//!   `Γ_b = Γ₀ + J/2`; the impurity pair scatters with
//!   `W(s²) = W_c·(1 + s²/Γ₀²)`, where `W_c = 4/L_eff` is the width at
//!   which the pair merges into a double real root. The pair shares one
//!   quantum number, so at `δ = 0` it collapses into a Jordan string and
//!   the Gaudin matrix becomes singular.
//! * [`WidthLaw::BreitWigner`]: every channel uses `Γ̃ = Γ₀/s_eff + J/2`.
//!   All quantum numbers are distinct and the Jacobian stays regular.

mod audit;
mod phase;
mod solver;
mod sweep;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::impurity::{ImpurityError, ImpurityParams, EP_THRESHOLD};
use crate::numerics::{c64, NumericsError};

pub use audit::{
    biorthogonal_overlap, conjugate_pairing_defect, kondo_string_gaudin, kondo_string_scenario, quantum_number_audit, KondoContrast,
    PairDrift, QuantumNumberAudit, EP_CONTRAST_DELTA,
};
pub use phase::{nearest_branch, phase, phase_derivative, smatrix_tl_form, smatrix_value, PhaseBranches, POLE_GUARD};
pub use solver::{
    bethe_map, bethe_map_with_branches, gaudin, gaudin_finite_difference, ground_state_seed, newton_solve, newton_solve_with_branches,
    GaudinMatrix, SolveReport,
};
pub use sweep::{
    ep_sweep, monodromy_loop, monodromy_loop_about, permutation_parity, MonodromyTrace, PowerFit, SweepPoint, SweepResult, SWEEP_TOL,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BetheError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("relative rapidity {0} hits an S-matrix pole")]
    PoleCollision(Complex64),
    #[error("Newton diverged after {iterations} iterations (residual {residual:e})")]
    Divergence { iterations: usize, residual: f64 },
    #[error("Jacobian breakdown: {0}")]
    JacobianBreakdown(String),
    #[error("root tracking lost at theta = {theta}")]
    TrackingLoss { theta: f64 },
    #[error("width undefined at the exceptional point")]
    AtExceptionalPoint,
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sector {
    R,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum WidthLaw {
    #[default]
    JordanPair,
    BreitWigner,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    Scattering,
    Bound,
    Resonance,
    ImpurityPair,
}

/// Merged configuration at the EP: the pair sits on one double real root.
#[derive(Debug, Clone, PartialEq)]
pub struct EpReference {
    pub roots: Vec<f64>,
    /// `L + Σ_m δ'(k₀ − k_m; Γ_b)` over the spectators.
    pub effective_length: f64,
    /// `4/L_eff`.
    pub critical_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheModel {
    pub length: f64,
    pub n_particles: usize,
    pub gamma0: f64,
    pub impurity: ImpurityParams,
    pub sector: Sector,
    pub quantum_numbers: Vec<f64>,
    pub width_law: WidthLaw,
    /// Indices `(⋆, ⋆+1)` of the impurity pair.
    pub pair: Option<(usize, usize)>,
    delta: Complex64,
    reference: Option<EpReference>,
}

/// Slot pattern relative to the Fermi sea centre: consecutive integers
/// symmetric about 0, with the pair's slot doubled for the Jordan-pair law.
fn slots(n: usize, law: WidthLaw) -> (Vec<f64>, Option<(usize, usize)>) {
    if n == 1 {
        return (vec![0.0], None);
    }
    match law {
        WidthLaw::BreitWigner => {
            let c = (n as f64 - 1.0) / 2.0;
            let pa = (n - 1) / 2;
            ((0..n).map(|i| i as f64 - c).collect(), Some((pa, pa + 1)))
        }
        WidthLaw::JordanPair => {
            let m = n - 1;
            let c = (m as f64 - 1.0) / 2.0;
            let mut distinct: Vec<f64> = (0..m).map(|i| i as f64 - c).collect();
            let pa = (m - 1) / 2;
            distinct.insert(pa + 1, distinct[pa]);
            (distinct, Some((pa, pa + 1)))
        }
    }
}

impl BetheModel {
    /// Ground-state model at the impurity's own `δ = γ_eff − β`.
    pub fn new(length: f64, n_particles: usize, gamma0: f64, impurity: ImpurityParams, width_law: WidthLaw) -> Result<Self, BetheError> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(BetheError::InvalidModel(format!("length must be positive, got {length}")));
        }
        if n_particles == 0 || n_particles > 64 {
            return Err(BetheError::InvalidModel(format!(
                "n_particles must be in 1..=64, got {n_particles}"
            )));
        }
        if !(gamma0 > 0.0 && gamma0.is_finite()) {
            return Err(BetheError::InvalidModel(format!("gamma0 must be positive, got {gamma0}")));
        }
        impurity.validate()?;
        let (slot, pair) = slots(n_particles, width_law);
        let nu = (n_particles as f64 - 1.0) / 2.0;
        let mut model = Self {
            length,
            n_particles,
            gamma0,
            impurity,
            sector: Sector::R,
            quantum_numbers: slot.iter().map(|s| s + nu).collect(),
            width_law,
            pair,
            delta: c64(impurity.delta(), 0.0),
            reference: None,
        };
        if width_law == WidthLaw::JordanPair && pair.is_some() {
            model.reference = Some(solver::ep_reference(&model)?);
        }
        Ok(model)
    }

    /// Replaces the quantum numbers (sorted by real part on input).
    pub fn with_quantum_numbers(mut self, qn: Vec<f64>) -> Result<Self, BetheError> {
        if qn.len() != self.n_particles {
            return Err(BetheError::InvalidModel(format!(
                "expected {} quantum numbers, got {}",
                self.n_particles,
                qn.len()
            )));
        }
        if qn.windows(2).any(|w| w[1] < w[0]) {
            return Err(BetheError::InvalidModel("quantum numbers must be nondecreasing".into()));
        }
        self.quantum_numbers = qn;
        if self.width_law == WidthLaw::JordanPair && self.pair.is_some() {
            self.reference = Some(solver::ep_reference(&self)?);
        }
        Ok(self)
    }

    pub fn with_sector(mut self, sector: Sector) -> Self {
        self.sector = sector;
        self
    }

    pub fn with_width_law(&self, law: WidthLaw) -> Result<Self, BetheError> {
        let mut m = Self::new(self.length, self.n_particles, self.gamma0, self.impurity, law)?;
        m.sector = self.sector;
        m.delta = self.delta;
        Ok(m)
    }

    /// Moves the control distance to a real `δ`, updating `β = γ_eff − δ`.
    pub fn with_delta(&self, delta: f64) -> Result<Self, BetheError> {
        let mut m = self.clone();
        let p = self.impurity;
        m.impurity = ImpurityParams::new(p.epsilon, p.gamma_eff() - delta, p.gamma, p.j_coupling)?;
        m.delta = c64(delta, 0.0);
        Ok(m)
    }

    /// Complex control distance, used on loops around the EP. `β` keeps
    /// its last real value.
    pub fn with_complex_delta(&self, delta: Complex64) -> Self {
        let mut m = self.clone();
        m.delta = delta;
        m
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    /// `s² = δ(2γ_eff − δ)`.
    pub fn s_squared(&self) -> Complex64 {
        self.delta * (2.0 * self.impurity.gamma_eff() - self.delta)
    }

    pub fn reference(&self) -> Option<&EpReference> {
        self.reference.as_ref()
    }

    pub fn bath_width(&self) -> f64 {
        self.gamma0 + 0.5 * self.impurity.j_coupling
    }

    /// `Γ̃ = Γ₀/s + J/2` on the principal branch of `s`.
    pub fn breit_wigner_width(&self) -> Result<Complex64, BetheError> {
        let s = self.s_squared().sqrt();
        if s.norm() <= EP_THRESHOLD {
            return Err(BetheError::AtExceptionalPoint);
        }
        Ok(self.gamma0 / s + 0.5 * self.impurity.j_coupling)
    }

    /// Width of the impurity pair channel in sector R.
    pub fn pair_width(&self) -> Result<Complex64, BetheError> {
        match (self.width_law, &self.reference) {
            (WidthLaw::JordanPair, Some(r)) => {
                let w = r.critical_width * (1.0 + self.s_squared() / (self.gamma0 * self.gamma0));
                if w.re <= 0.0 && w.im.abs() <= 1e-15 {
                    return Err(BetheError::InvalidModel(format!("pair width {w} is not positive")));
                }
                Ok(w)
            }
            _ => self.breit_wigner_width(),
        }
    }

    fn is_pair(&self, j: usize, l: usize) -> bool {
        matches!(self.pair, Some((a, b)) if (j == a && l == b) || (j == b && l == a))
    }

    /// Sector-R width table `W_jℓ`.
    pub fn width_table(&self) -> Result<Vec<Complex64>, BetheError> {
        let n = self.n_particles;
        let mut out = vec![c64(0.0, 0.0); n * n];
        let (bath, pair) = match self.width_law {
            WidthLaw::JordanPair => (
                c64(self.bath_width(), 0.0),
                if self.pair.is_some() { self.pair_width()? } else { c64(0.0, 0.0) },
            ),
            WidthLaw::BreitWigner => {
                let w = self.breit_wigner_width()?;
                (w, w)
            }
        };
        for j in 0..n {
            for l in 0..n {
                if j != l {
                    let w = if self.is_pair(j, l) { pair } else { bath };
                    out[j * n + l] = match self.sector {
                        Sector::R => w,
                        Sector::L => w.conj(),
                    };
                }
            }
        }
        Ok(out)
    }

    /// Pair-centre momentum `k₀`: the middle quantum number's Fermi-point value.
    pub fn pair_centre(&self) -> f64 {
        match (&self.reference, self.pair) {
            (Some(r), Some((a, _))) => r.roots[a],
            (_, Some((a, b))) => {
                let nu = (self.n_particles as f64 - 1.0) / 2.0;
                PI * (self.quantum_numbers[a] + self.quantum_numbers[b] - 2.0 * nu) / self.length
            }
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootSet {
    pub rapidities: Vec<Complex64>,
    pub sector: Sector,
    pub classification: Vec<RootKind>,
}

impl RootSet {
    pub fn new(rapidities: Vec<Complex64>, sector: Sector, pair: Option<(usize, usize)>, tol: f64) -> Self {
        let classification = classify(&rapidities, pair, tol);
        Self {
            rapidities,
            sector,
            classification,
        }
    }

    pub fn len(&self) -> usize {
        self.rapidities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rapidities.is_empty()
    }

    /// Elementwise conjugate in the opposite sector.
    pub fn conjugate(&self) -> Self {
        Self {
            rapidities: self.rapidities.iter().map(|k| k.conj()).collect(),
            sector: match self.sector {
                Sector::R => Sector::L,
                Sector::L => Sector::R,
            },
            classification: self.classification.clone(),
        }
    }

    pub fn max_distance(&self, other: &RootSet) -> f64 {
        self.rapidities
            .iter()
            .zip(&other.rapidities)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn count_real(&self, tol: f64) -> usize {
        self.rapidities.iter().filter(|k| k.im.abs() <= tol).count()
    }
}

/// Root labels: the impurity pair, real scattering states, and other
/// complex roots as bound (Im > 0) or resonance (Im < 0) states.
pub fn classify(roots: &[Complex64], pair: Option<(usize, usize)>, tol: f64) -> Vec<RootKind> {
    roots
        .iter()
        .enumerate()
        .map(|(j, k)| {
            if matches!(pair, Some((a, b)) if j == a || j == b) {
                RootKind::ImpurityPair
            } else if k.im.abs() <= tol {
                RootKind::Scattering
            } else if k.im > 0.0 {
                RootKind::Bound
            } else {
                RootKind::Resonance
            }
        })
        .collect()
}

/// `S(k, k')` with the model's channel width between roots `j` and `l`.
pub fn smatrix(k: Complex64, kp: Complex64, model: &BetheModel, j: usize, l: usize) -> Result<Complex64, BetheError> {
    let table = model.width_table()?;
    smatrix_value(k - kp, table[j * model.n_particles + l])
}
