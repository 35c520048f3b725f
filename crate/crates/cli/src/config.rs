//! Scenario configuration. JSON, strict schema, every field defaulted.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config key `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    pub scenario: String,
    pub seed: u64,
    pub impurity: ImpuritySection,
    pub bethe: BetheSection,
    pub sweep: SweepSection,
    pub monodromy: MonodromySection,
    pub algebra: AlgebraSection,
    pub schur: SchurSection,
    pub diagnostics: DiagnosticsSection,
    pub tolerances: Tolerances,
    /// Not serialised, so reports and hashes do not depend on where they
    /// are written.
    #[serde(skip_serializing)]
    pub output: OutputSection,
}

/// Impurity used for the Bethe model; `β = γ_eff − bethe.delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImpuritySection {
    pub epsilon: f64,
    pub gamma: f64,
    pub j_coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthLawName {
    JordanPair,
    BreitWigner,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BetheSection {
    pub length: f64,
    pub n_particles: usize,
    pub gamma0: f64,
    pub width_law: WidthLawName,
    /// Distance below the EP for `solve-bethe`.
    pub delta: f64,
    pub max_iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
}

impl SweepSection {
    /// Log-spaced grid, largest `δ` first.
    pub fn grid(&self) -> Vec<f64> {
        let mut g = ptimp::numerics::logspace(self.delta_min, self.delta_max, self.points);
        g.reverse();
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonodromySection {
    pub radii: Vec<f64>,
    pub steps: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AlgebraSection {
    pub draws: usize,
    pub samples_per_draw: usize,
    pub charge_sites: usize,
    pub charge_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchurSection {
    pub v0: f64,
    pub delta_o: f64,
    pub bandwidth: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub phi_samples: usize,
    pub delta_o_grid: Vec<f64>,
    pub scan_phi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticRowConfig {
    pub label: String,
    pub epsilon: f64,
    pub beta: f64,
    pub gamma: f64,
    pub j_coupling: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsSection {
    /// Exactly three columns: exceptional point, unbroken phase, Kondo.
    pub ep: DiagnosticRowConfig,
    pub unbroken: DiagnosticRowConfig,
    pub kondo: DiagnosticRowConfig,
    /// Imaginary extent `Γ_K` of the Kondo string.
    pub kondo_string_width: f64,
}

/// Residual tolerances. `--tol` overrides every entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub algebra_small: f64,
    pub algebra_large: f64,
    pub universality: f64,
    pub ep_contraction: f64,
    pub charges: f64,
    pub bethe_residual: f64,
    pub spectator_return: f64,
    pub coefficients: f64,
    pub jordan: f64,
    pub quantum_numbers: f64,
}

impl Tolerances {
    pub fn override_all(&mut self, tol: f64) {
        for t in [
            &mut self.algebra_small,
            &mut self.algebra_large,
            &mut self.universality,
            &mut self.ep_contraction,
            &mut self.charges,
            &mut self.bethe_residual,
            &mut self.spectator_return,
            &mut self.coefficients,
            &mut self.jordan,
            &mut self.quantum_numbers,
        ] {
            *t = tol;
        }
    }

    fn entries(&self) -> [(&'static str, f64); 10] {
        [
            ("tolerances.algebra_small", self.algebra_small),
            ("tolerances.algebra_large", self.algebra_large),
            ("tolerances.universality", self.universality),
            ("tolerances.ep_contraction", self.ep_contraction),
            ("tolerances.charges", self.charges),
            ("tolerances.bethe_residual", self.bethe_residual),
            ("tolerances.spectator_return", self.spectator_return),
            ("tolerances.coefficients", self.coefficients),
            ("tolerances.jordan", self.jordan),
            ("tolerances.quantum_numbers", self.quantum_numbers),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scenario: "desk".into(),
            seed: 20_240_601,
            impurity: ImpuritySection::default(),
            bethe: BetheSection::default(),
            sweep: SweepSection::default(),
            monodromy: MonodromySection::default(),
            algebra: AlgebraSection::default(),
            schur: SchurSection::default(),
            diagnostics: DiagnosticsSection::default(),
            tolerances: Tolerances::default(),
            output: OutputSection::default(),
        }
    }
}

impl Default for ImpuritySection {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            gamma: 1.0,
            j_coupling: 0.0,
        }
    }
}

impl Default for BetheSection {
    fn default() -> Self {
        Self {
            length: 50.0,
            n_particles: 8,
            gamma0: 1.0,
            width_law: WidthLawName::JordanPair,
            delta: 0.1,
            max_iterations: 60,
        }
    }
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            delta_min: 1e-6,
            delta_max: 1e-1,
            points: 21,
        }
    }
}

impl Default for MonodromySection {
    fn default() -> Self {
        Self {
            radii: vec![1e-2, 1e-3],
            steps: vec![64, 256],
        }
    }
}

impl Default for AlgebraSection {
    fn default() -> Self {
        Self {
            draws: 100,
            samples_per_draw: 20,
            charge_sites: 4,
            charge_order: 4,
        }
    }
}

impl Default for SchurSection {
    fn default() -> Self {
        Self {
            v0: 1.0,
            delta_o: 20.0,
            bandwidth: 0.5,
            epsilon: 0.3,
            gamma: 0.8,
            phi_samples: 32,
            delta_o_grid: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            scan_phi: 0.4,
        }
    }
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        let row = |label: &str, epsilon, beta, gamma, j_coupling| DiagnosticRowConfig {
            label: label.into(),
            epsilon,
            beta,
            gamma,
            j_coupling,
        };
        Self {
            ep: row("EP", 0.0, 1.0, 1.0, 0.0),
            unbroken: row("PT-unbroken", 0.0, 0.5, 1.0, 0.0),
            kondo: row("Kondo", -0.5, 0.3, 1.0, 1.0),
            kondo_string_width: 1.0,
        }
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            algebra_small: 1e-11,
            algebra_large: 1e-10,
            universality: 1e-13,
            ep_contraction: 1e-12,
            charges: 1e-9,
            bethe_residual: 1e-12,
            spectator_return: 1e-8,
            coefficients: 1e-10,
            jordan: 1e-10,
            quantum_numbers: 1e-8,
        }
    }
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out") }
    }
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.into(),
        reason: reason.into(),
    }
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be positive and finite, got {v}")))
    }
}

fn finite(key: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(key, format!("must be finite, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        for (k, v) in self.tolerances.entries() {
            positive(k, v)?;
        }
        finite("impurity.epsilon", self.impurity.epsilon)?;
        positive("impurity.gamma", self.impurity.gamma)?;
        finite("impurity.j_coupling", self.impurity.j_coupling)?;
        positive("bethe.length", self.bethe.length)?;
        positive("bethe.gamma0", self.bethe.gamma0)?;
        positive("bethe.delta", self.bethe.delta)?;
        if self.bethe.n_particles < 2 {
            return Err(invalid("bethe.n_particles", "need at least two particles"));
        }
        if self.bethe.max_iterations == 0 {
            return Err(invalid("bethe.max_iterations", "must be nonzero"));
        }
        positive("sweep.delta_min", self.sweep.delta_min)?;
        positive("sweep.delta_max", self.sweep.delta_max)?;
        if self.sweep.delta_min >= self.sweep.delta_max {
            return Err(invalid("sweep.delta_min", "must be below sweep.delta_max"));
        }
        if self.sweep.points < 3 {
            return Err(invalid("sweep.points", "need at least 3 grid points"));
        }
        if self.monodromy.radii.is_empty() {
            return Err(invalid("monodromy.radii", "grid is empty"));
        }
        for &r in &self.monodromy.radii {
            positive("monodromy.radii", r)?;
        }
        if self.monodromy.steps.is_empty() {
            return Err(invalid("monodromy.steps", "grid is empty"));
        }
        if self.monodromy.steps.iter().any(|&s| s < 64) {
            return Err(invalid("monodromy.steps", "every loop needs at least 64 steps"));
        }
        if self.algebra.draws == 0 {
            return Err(invalid("algebra.draws", "must be nonzero"));
        }
        if self.algebra.samples_per_draw == 0 {
            return Err(invalid("algebra.samples_per_draw", "must be nonzero"));
        }
        if !(2..=6).contains(&self.algebra.charge_sites) {
            return Err(invalid("algebra.charge_sites", "must lie in 2..=6"));
        }
        if self.algebra.charge_order < 2 {
            return Err(invalid("algebra.charge_order", "must be at least 2"));
        }
        positive("schur.v0", self.schur.v0)?;
        positive("schur.delta_o", self.schur.delta_o)?;
        positive("schur.bandwidth", self.schur.bandwidth)?;
        finite("schur.epsilon", self.schur.epsilon)?;
        finite("schur.gamma", self.schur.gamma)?;
        finite("schur.scan_phi", self.schur.scan_phi)?;
        if self.schur.phi_samples < 8 {
            return Err(invalid("schur.phi_samples", "need at least 8 samples"));
        }
        if self.schur.delta_o_grid.len() < 2 {
            return Err(invalid("schur.delta_o_grid", "need at least 2 gaps"));
        }
        for &d in &self.schur.delta_o_grid {
            positive("schur.delta_o_grid", d)?;
        }
        if self.schur.delta_o_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("schur.delta_o_grid", "must be strictly increasing"));
        }
        for (name, row) in [
            ("diagnostics.ep", &self.diagnostics.ep),
            ("diagnostics.unbroken", &self.diagnostics.unbroken),
            ("diagnostics.kondo", &self.diagnostics.kondo),
        ] {
            finite(&format!("{name}.epsilon"), row.epsilon)?;
            finite(&format!("{name}.beta"), row.beta)?;
            positive(&format!("{name}.gamma"), row.gamma)?;
            finite(&format!("{name}.j_coupling"), row.j_coupling)?;
        }
        positive("diagnostics.kondo_string_width", self.diagnostics.kondo_string_width)?;
        Ok(())
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&canonical))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_gives_defaults() {
        let c = ScenarioConfig::from_json("{}").unwrap();
        assert_eq!(c, ScenarioConfig::default());
        c.validate().unwrap();
    }

    #[test]
    fn unknown_key_is_named() {
        let e = ScenarioConfig::from_json(r#"{"bethe": {"lenght": 40}}"#).unwrap_err();
        assert!(e.to_string().contains("lenght"), "{e}");
    }

    #[test]
    fn nonpositive_tolerance_is_named() {
        let c = ScenarioConfig::from_json(r#"{"tolerances": {"jordan": 0}}"#).unwrap();
        let e = c.validate().unwrap_err();
        assert!(e.to_string().contains("tolerances.jordan"), "{e}");
    }

    #[test]
    fn hash_tracks_content() {
        let a = ScenarioConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.output.dir = PathBuf::from("elsewhere");
        assert_eq!(a.hash(), b.hash());
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
