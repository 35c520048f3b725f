//! Feshbach-Schur reduction of a driven impurity coupled to a gapped
//! auxiliary mode.
//!
//! Every block model is laid out spin-major: the P sector holds
//! `[imp, bath_1..bath_nb]` for spin up, then the same for spin down; the
//! Q sector holds the auxiliary mode(s) per spin in the same order.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{c64, linear_fit, pauli, CMatrix, NumericsError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchurError {
    #[error("invalid drive parameter {name} = {value}: {reason}")]
    InvalidDrive {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("block shapes do not fit: {0}")]
    Shape(String),
    #[error("block {0} is not Hermitian (residual {1:e})")]
    NotHermitian(&'static str, f64),
    #[error("z = {0} is an eigenvalue of the auxiliary block")]
    SingularResolvent(Complex64),
    #[error("grid violates the gap assumption: {0}")]
    GapViolation(String),
    #[error("system lacks the spin-exchange structure")]
    StructureMismatch,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

/// Drive data. `G₀ = V₀²/Δ_O` and `φ_eff = 2φ` are derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveParams {
    pub v0: f64,
    pub phi: f64,
    pub delta_o: f64,
    pub bandwidth: f64,
    #[serde(default)]
    pub omega_drive: f64,
}

impl DriveParams {
    pub fn new(v0: f64, phi: f64, delta_o: f64, bandwidth: f64, omega_drive: f64) -> Result<Self, SchurError> {
        let d = Self {
            v0,
            phi,
            delta_o,
            bandwidth,
            omega_drive,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<(), SchurError> {
        let bad = |name, value, reason| Err(SchurError::InvalidDrive { name, value, reason });
        for (name, value) in [
            ("v0", self.v0),
            ("phi", self.phi),
            ("delta_o", self.delta_o),
            ("bandwidth", self.bandwidth),
            ("omega_drive", self.omega_drive),
        ] {
            if !value.is_finite() {
                return bad(name, value, "must be finite");
            }
        }
        if self.delta_o <= 0.0 {
            return bad("delta_o", self.delta_o, "must be positive");
        }
        if self.bandwidth <= 0.0 {
            return bad("bandwidth", self.bandwidth, "must be positive");
        }
        if self.bandwidth >= self.delta_o {
            return bad("bandwidth", self.bandwidth, "must be below the auxiliary gap");
        }
        if self.omega_drive < 0.0 {
            return bad("omega_drive", self.omega_drive, "must be non-negative");
        }
        Ok(())
    }

    pub fn g0(&self) -> f64 {
        self.v0 * self.v0 / self.delta_o
    }

    pub fn phi_eff(&self) -> f64 {
        2.0 * self.phi
    }

    /// True when `Δ_O/D < 10`, where the Markovian form is only marginal.
    pub fn gap_warning(&self) -> bool {
        self.delta_o / self.bandwidth < 10.0
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// Same `G₀` at a new gap (`V₀² = G₀Δ_O`).
    pub fn with_gap_fixed_g0(&self, delta_o: f64) -> Result<Self, SchurError> {
        Self::new((self.g0() * delta_o).sqrt(), self.phi, delta_o, self.bandwidth, self.omega_drive)
    }
}

/// How the drive vertex enters the Q → P coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vertex {
    /// `H_QP = H_PQ†`: the full Hamiltonian is Hermitian.
    Hermitian,
    /// The drive phase appears on both vertices, `H_QP = H_PQᵀ`.
    Coherent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlockSystem {
    pub h_pp: CMatrix,
    pub h_pq: CMatrix,
    pub h_qp: CMatrix,
    pub h_qq: CMatrix,
    /// Both sectors split into equal spin-up / spin-down halves.
    pub spin_resolved: bool,
}

fn herm_residual(m: &CMatrix) -> f64 {
    (m - &m.adjoint()).max_abs()
}

impl BlockSystem {
    /// Hermitian system with `H_QP = H_PQ†`.
    pub fn hermitian(h_pp: CMatrix, h_pq: CMatrix, h_qq: CMatrix) -> Result<Self, SchurError> {
        let h_qp = h_pq.adjoint();
        let sys = Self::general(h_pp, h_pq, h_qp, h_qq)?;
        for (name, m) in [("h_pp", &sys.h_pp), ("h_qq", &sys.h_qq)] {
            let r = herm_residual(m);
            if r > 1e-14 {
                return Err(SchurError::NotHermitian(name, r));
            }
        }
        Ok(sys)
    }

    pub fn general(h_pp: CMatrix, h_pq: CMatrix, h_qp: CMatrix, h_qq: CMatrix) -> Result<Self, SchurError> {
        let (p, q) = (h_pp.rows(), h_qq.rows());
        if !h_pp.is_square() || !h_qq.is_square() || h_pq.shape() != (p, q) || h_qp.shape() != (q, p) {
            return Err(SchurError::Shape(format!(
                "pp {:?}, pq {:?}, qp {:?}, qq {:?}",
                h_pp.shape(),
                h_pq.shape(),
                h_qp.shape(),
                h_qq.shape()
            )));
        }
        Ok(Self {
            h_pp,
            h_pq,
            h_qp,
            h_qq,
            spin_resolved: false,
        })
    }

    pub fn p_dim(&self) -> usize {
        self.h_pp.rows()
    }

    pub fn q_dim(&self) -> usize {
        self.h_qq.rows()
    }

    /// Full `(P ⊕ Q)` Hamiltonian.
    pub fn assemble(&self) -> CMatrix {
        let (p, q) = (self.p_dim(), self.q_dim());
        CMatrix::from_fn(p + q, p + q, |i, j| match (i < p, j < p) {
            (true, true) => self.h_pp[(i, j)],
            (true, false) => self.h_pq[(i, j - p)],
            (false, true) => self.h_qp[(i - p, j)],
            (false, false) => self.h_qq[(i - p, j - p)],
        })
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        herm_residual(&self.assemble()) <= tol
    }
}

/// `H_eff(z) = H_PP + H_PQ (z − H_QQ)⁻¹ H_QP`.
pub fn schur_complement(sys: &BlockSystem, z: Complex64) -> Result<CMatrix, SchurError> {
    let q = sys.q_dim();
    let resolvent = &CMatrix::identity(q).scale(z) - &sys.h_qq;
    let x = resolvent.solve(&sys.h_qp).map_err(|_| SchurError::SingularResolvent(z))?;
    if x.as_slice().iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(SchurError::SingularResolvent(z));
    }
    Ok(&sys.h_pp + &(&sys.h_pq * &x))
}

/// `‖H_eff(z)† − H_eff(z*)‖_max`, zero for Hermitian systems.
pub fn adjoint_pairing_residual(sys: &BlockSystem, z: Complex64) -> Result<f64, SchurError> {
    Ok((&schur_complement(sys, z)?.adjoint() - &schur_complement(sys, z.conj())?).max_abs())
}

/// `Σ = −G₀·diag(e^{iφ_eff}, e^{−iφ_eff})`.
pub fn markovian_self_energy(drive: &DriveParams) -> CMatrix {
    let e = Complex64::from_polar(1.0, drive.phi_eff());
    CMatrix::diag(&[-drive.g0() * e, -drive.g0() * e.conj()])
}

/// `((m + m†)/2, (m − m†)/2)`.
pub fn split_hermitian(m: &CMatrix) -> Result<(CMatrix, CMatrix), SchurError> {
    if !m.is_square() {
        return Err(SchurError::Shape(format!("split needs a square matrix, got {:?}", m.shape())));
    }
    let a = m.adjoint();
    Ok(((m + &a).scale_re(0.5), (m - &a).scale_re(0.5)))
}

/// Spin-resolved drive model: impurity level `ε`, spin flip `γ`, one
/// auxiliary mode per spin at `Δ_O` reached with vertex phase
/// `e^{i s_σ φ_v}`, and `n_bath` bath levels per spin uniformly spaced
/// in `[−D, D]` hybridised with the impurity by `bath_coupling/√n_bath`.
pub fn drive_block_model(
    drive: &DriveParams,
    epsilon: f64,
    gamma: f64,
    n_bath: usize,
    bath_coupling: f64,
    vertex: Vertex,
    vertex_phase: f64,
) -> Result<BlockSystem, SchurError> {
    drive.validate()?;
    let per = 1 + n_bath;
    let p = 2 * per;
    let mut h_pp = CMatrix::zeros(p, p);
    let levels: Vec<f64> = match n_bath {
        0 => vec![],
        1 => vec![0.0],
        n => (0..n)
            .map(|i| -drive.bandwidth + 2.0 * drive.bandwidth * i as f64 / (n - 1) as f64)
            .collect(),
    };
    let t = if n_bath > 0 { bath_coupling / (n_bath as f64).sqrt() } else { 0.0 };
    for spin in 0..2 {
        let imp = spin * per;
        h_pp[(imp, imp)] = c64(epsilon, 0.0);
        for (b, &e) in levels.iter().enumerate() {
            let k = imp + 1 + b;
            h_pp[(k, k)] = c64(e, 0.0);
            h_pp[(imp, k)] = c64(t, 0.0);
            h_pp[(k, imp)] = c64(t, 0.0);
        }
    }
    h_pp[(0, per)] = c64(gamma, 0.0);
    h_pp[(per, 0)] = c64(gamma, 0.0);
    let h_qq = CMatrix::diag(&[c64(drive.delta_o, 0.0), c64(drive.delta_o, 0.0)]);
    let mut h_pq = CMatrix::zeros(p, 2);
    for (spin, s) in [(0usize, 0.5f64), (1, -0.5)] {
        h_pq[(spin * per, spin)] = drive.v0 * Complex64::from_polar(1.0, s * vertex_phase);
    }
    let mut sys = match vertex {
        Vertex::Hermitian => BlockSystem::hermitian(h_pp, h_pq, h_qq)?,
        Vertex::Coherent => {
            let h_qp = h_pq.transpose();
            BlockSystem::general(h_pp, h_pq, h_qp, h_qq)?
        }
    };
    sys.spin_resolved = true;
    Ok(sys)
}

/// Minimal two-level-per-spin coherent model realising the Markovian
/// self-energy: per-vertex phase `e^{i s_σ φ_eff}`.
pub fn minimal_drive_model(drive: &DriveParams, epsilon: f64, gamma: f64) -> Result<BlockSystem, SchurError> {
    drive_block_model(drive, epsilon, gamma, 0, 0.0, Vertex::Coherent, drive.phi_eff())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Coefficients {
    pub epsilon_eff: f64,
    pub beta_eff: f64,
    pub gamma_eff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub drive: DriveParams,
    pub system: BlockSystem,
    /// `[[ε_eff + iβ_eff, γ], [γ, ε_eff − iβ_eff]]`.
    pub markovian: CMatrix,
    pub coefficients: Coefficients,
    /// `‖markovian − (H_PP + Σ)‖`: the self-energy puts `−iβ_eff` on spin up.
    pub self_energy_sign_residual: f64,
    /// `‖markovian − (H_PP + σˣΣσˣ)‖`.
    pub exchanged_self_energy_residual: f64,
    /// `‖H† − σˣHσˣ‖₂` of the Markovian block.
    pub pseudo_hermiticity_residual: f64,
}

impl EffectiveHamiltonian {
    /// Exact Schur complement of the minimal model at energy `ω`.
    pub fn at_omega(&self, omega: f64) -> Result<CMatrix, SchurError> {
        schur_complement(&self.system, c64(omega, 0.0))
    }
}

pub fn emergent_matrix(c: &Coefficients) -> CMatrix {
    CMatrix::from_rows(&[
        vec![c64(c.epsilon_eff, c.beta_eff), c64(c.gamma_eff, 0.0)],
        vec![c64(c.gamma_eff, 0.0), c64(c.epsilon_eff, -c.beta_eff)],
    ])
}

pub fn assemble_effective(drive: &DriveParams, epsilon: f64, gamma: f64) -> Result<EffectiveHamiltonian, SchurError> {
    drive.validate()?;
    let g0 = drive.g0();
    let coefficients = Coefficients {
        epsilon_eff: epsilon - g0 * drive.phi_eff().cos(),
        beta_eff: g0 * drive.phi_eff().sin(),
        gamma_eff: gamma,
    };
    let markovian = emergent_matrix(&coefficients);
    let h_pp = &CMatrix::identity(2).scale_re(epsilon) + &pauli::x().scale_re(gamma);
    let sigma = markovian_self_energy(drive);
    let sx = pauli::x();
    let direct = &h_pp + &sigma;
    let exchanged = &h_pp + &(&(&sx * &sigma) * &sx);
    let ph = (&markovian.adjoint() - &(&(&sx * &markovian) * &sx)).norm2();
    Ok(EffectiveHamiltonian {
        drive: *drive,
        system: minimal_drive_model(drive, epsilon, gamma)?,
        self_energy_sign_residual: (&markovian - &direct).norm2(),
        exchanged_self_energy_residual: (&markovian - &exchanged).norm2(),
        pseudo_hermiticity_residual: ph,
        markovian,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorScan {
    pub delta_o: Vec<f64>,
    /// `sup_{|ω| ≤ D} ‖H_eff(ω) − H_eff^{(0)}‖₂`.
    pub errors: Vec<f64>,
    /// `p` in `error ∝ Δ_O^{−p}`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    /// `max error·Δ_O/D`.
    pub constant: f64,
    pub passes: bool,
}

/// Exact Schur complement of the coherent block model (with bath) against
/// its Markovian leading form over `|ω| ≤ D`, at fixed `G₀`.
pub fn error_bound_scan(epsilon: f64, gamma: f64, drive_base: &DriveParams, delta_o_grid: &[f64]) -> Result<ErrorScan, SchurError> {
    error_bound_scan_with_bath(epsilon, gamma, drive_base, delta_o_grid, 64, 0.3)
}

pub fn error_bound_scan_with_bath(
    epsilon: f64,
    gamma: f64,
    drive_base: &DriveParams,
    delta_o_grid: &[f64],
    n_bath: usize,
    bath_coupling: f64,
) -> Result<ErrorScan, SchurError> {
    if delta_o_grid.len() < 2 || delta_o_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SchurError::InvalidInput(
            "delta_o grid must be strictly increasing with ≥ 2 points".into(),
        ));
    }
    if delta_o_grid[0] <= drive_base.bandwidth {
        return Err(SchurError::GapViolation(format!(
            "D = {} is not below min Δ_O = {}",
            drive_base.bandwidth, delta_o_grid[0]
        )));
    }
    let d = drive_base.bandwidth;
    let omegas: Vec<f64> = (0..=32).map(|i| -d + 2.0 * d * i as f64 / 32.0).collect();
    let mut errors = Vec::with_capacity(delta_o_grid.len());
    for &gap in delta_o_grid {
        let drive = drive_base.with_gap_fixed_g0(gap)?;
        let sys = drive_block_model(&drive, epsilon, gamma, n_bath, bath_coupling, Vertex::Coherent, drive.phi_eff())?;
        let mut leading = sys.h_pp.clone();
        let sigma = markovian_self_energy(&drive);
        let per = 1 + n_bath;
        leading[(0, 0)] += sigma[(0, 0)];
        leading[(per, per)] += sigma[(1, 1)];
        let mut worst: f64 = 0.0;
        for &w in &omegas {
            let h = schur_complement(&sys, c64(w, 0.0))?;
            worst = worst.max((&h - &leading).norm2());
        }
        errors.push(worst);
    }
    let (exponent, stderr, constant, passes) = if errors.iter().all(|&e| e == 0.0) {
        (f64::NAN, f64::NAN, 0.0, true)
    } else {
        let lx: Vec<f64> = delta_o_grid.iter().map(|x| x.ln()).collect();
        let ly: Vec<f64> = errors.iter().map(|x| x.ln()).collect();
        let (slope, _, se) = linear_fit(&lx, &ly);
        let c = errors.iter().zip(delta_o_grid).map(|(e, g)| e * g / d).fold(0.0, f64::max);
        (-slope, se, c, (0.9..=1.1).contains(&-slope))
    };
    Ok(ErrorScan {
        delta_o: delta_o_grid.to_vec(),
        errors,
        exponent,
        exponent_stderr: stderr,
        constant,
        passes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotatedSystem {
    pub system: BlockSystem,
    /// `D < Δ_O − Ω`.
    pub valid: bool,
}

/// Static rotating-frame system: auxiliary energies `ε_m → ε_m + mΩ`.
pub fn rotating_frame(drive: &DriveParams, base: &BlockSystem, angular_charges: &[i32]) -> Result<RotatedSystem, SchurError> {
    drive.validate()?;
    if drive.omega_drive >= drive.delta_o {
        return Err(SchurError::InvalidDrive {
            name: "omega_drive",
            value: drive.omega_drive,
            reason: "must be below the auxiliary gap",
        });
    }
    if angular_charges.len() != base.q_dim() {
        return Err(SchurError::Shape(format!(
            "{} angular charges for {} auxiliary modes",
            angular_charges.len(),
            base.q_dim()
        )));
    }
    let mut sys = base.clone();
    for (i, &m) in angular_charges.iter().enumerate() {
        sys.h_qq[(i, i)] += m as f64 * drive.omega_drive;
    }
    Ok(RotatedSystem {
        system: sys,
        valid: drive.bandwidth < drive.delta_o - drive.omega_drive,
    })
}

/// Average of the emergent block over `n` equally spaced phases in `[0, 2π)`.
pub fn time_average_null_test(drive: &DriveParams, epsilon: f64, gamma: f64, n_phase_samples: usize) -> Result<CMatrix, SchurError> {
    if n_phase_samples < 8 {
        return Err(SchurError::InvalidInput(format!(
            "need at least 8 phase samples, got {n_phase_samples}"
        )));
    }
    let mut acc = CMatrix::zeros(2, 2);
    for k in 0..n_phase_samples {
        let phi = 2.0 * PI * k as f64 / n_phase_samples as f64;
        acc = &acc + &assemble_effective(&drive.with_phi(phi), epsilon, gamma)?.markovian;
    }
    Ok(acc.scale_re(1.0 / n_phase_samples as f64))
}

/// `Θ = (spin exchange)∘K` acting by similarity on a spin-major matrix.
fn theta_similarity(m: &CMatrix) -> CMatrix {
    let n = m.rows();
    let h = n / 2;
    let flip = |i: usize| if i < h { i + h } else { i - h };
    CMatrix::from_fn(n, n, |i, j| m[(flip(i), flip(j))].conj())
}

/// `‖Θ H_eff(z) Θ⁻¹ − H_eff(z*)‖_max`.
pub fn pt_covariance_check(sys: &BlockSystem, z: Complex64) -> Result<f64, SchurError> {
    if !sys.spin_resolved || !sys.p_dim().is_multiple_of(2) || !sys.q_dim().is_multiple_of(2) {
        return Err(SchurError::StructureMismatch);
    }
    let full = sys.assemble();
    let (p, q) = (sys.p_dim(), sys.q_dim());
    // Θ must also be a symmetry of the full model, sector by sector.
    let sector = |m: &CMatrix, lo: usize, n: usize| CMatrix::from_fn(n, n, |i, j| m[(lo + i, lo + j)]);
    let pp = sector(&full, 0, p);
    let qq = sector(&full, p, q);
    if (&theta_similarity(&pp) - &pp).max_abs() > 1e-12 || (&theta_similarity(&qq) - &qq).max_abs() > 1e-12 {
        return Err(SchurError::StructureMismatch);
    }
    let lhs = theta_similarity(&schur_complement(sys, z)?);
    Ok((&lhs - &schur_complement(sys, z.conj())?).max_abs())
}

/// `‖σˣ H* σˣ − H‖_max` for a 2x2 block.
pub fn pt_symmetry_residual(h: &CMatrix) -> Result<f64, SchurError> {
    if h.shape() != (2, 2) {
        return Err(SchurError::Shape(format!("expected 2x2, got {:?}", h.shape())));
    }
    let sx = pauli::x();
    Ok((&(&(&sx * &h.conj()) * &sx) - h).max_abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuumPath {
    pub phi: f64,
    /// `G₀ sin 2φ` from the gapped-mode path.
    pub beta_gapped: f64,
    /// `−Im(Σ_↑ − Σ_↓)/2` from the auxiliary mode hybridised with a bath
    /// continuum, per-vertex phase `e^{i s_σ φ}`.
    pub beta_continuum: f64,
    pub ratio_to_sin_phi: f64,
    pub ratio_to_sin_two_phi: f64,
}

/// Continuum path: P is the impurity doublet; Q holds, per spin, the
/// auxiliary mode at `Δ_O` coupled by `g/√n` to `n` bath levels in
/// `[−D, D]`. The self-energy is evaluated at `ω + iη`.
pub fn continuum_path(
    drive: &DriveParams,
    epsilon: f64,
    gamma: f64,
    g: f64,
    n_bath: usize,
    omega: f64,
    eta: f64,
) -> Result<ContinuumPath, SchurError> {
    drive.validate()?;
    if n_bath < 2 || eta.is_nan() || eta <= 0.0 {
        return Err(SchurError::InvalidInput("continuum path needs n_bath ≥ 2 and η > 0".into()));
    }
    let per = 1 + n_bath;
    let q = 2 * per;
    let h_pp = &CMatrix::identity(2).scale_re(epsilon) + &pauli::x().scale_re(gamma);
    let mut h_qq = CMatrix::zeros(q, q);
    let t = g / (n_bath as f64).sqrt();
    for spin in 0..2 {
        let aux = spin * per;
        h_qq[(aux, aux)] = c64(drive.delta_o, 0.0);
        for b in 0..n_bath {
            let k = aux + 1 + b;
            h_qq[(k, k)] = c64(-drive.bandwidth + 2.0 * drive.bandwidth * b as f64 / (n_bath - 1) as f64, 0.0);
            h_qq[(aux, k)] = c64(t, 0.0);
            h_qq[(k, aux)] = c64(t, 0.0);
        }
    }
    let mut h_pq = CMatrix::zeros(2, q);
    for (spin, s) in [(0usize, 0.5f64), (1, -0.5)] {
        h_pq[(spin, spin * per)] = drive.v0 * Complex64::from_polar(1.0, s * drive.phi);
    }
    let h_qp = h_pq.transpose();
    let sys = BlockSystem::general(h_pp.clone(), h_pq, h_qp, h_qq)?;
    let sigma = &schur_complement(&sys, c64(omega, eta))? - &h_pp;
    let beta_continuum = -(sigma[(0, 0)] - sigma[(1, 1)]).im / 2.0;
    Ok(ContinuumPath {
        phi: drive.phi,
        beta_gapped: drive.g0() * drive.phi_eff().sin(),
        beta_continuum,
        ratio_to_sin_phi: beta_continuum / drive.phi.sin(),
        ratio_to_sin_two_phi: beta_continuum / drive.phi_eff().sin(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drive(phi: f64) -> DriveParams {
        DriveParams::new(1.0, phi, 20.0, 0.5, 0.0).unwrap()
    }

    #[test]
    fn scalar_and_decoupled_schur() {
        let s = BlockSystem::hermitian(
            CMatrix::from_real_rows(&[&[0.0]]),
            CMatrix::from_real_rows(&[&[0.7]]),
            CMatrix::from_real_rows(&[&[2.0]]),
        )
        .unwrap();
        let h = schur_complement(&s, c64(0.0, 0.0)).unwrap();
        assert!((h[(0, 0)] + 0.49 / 2.0).norm() < 1e-15);
        let pp = CMatrix::from_real_rows(&[&[1.0, 0.2], &[0.2, -1.0]]);
        let d = BlockSystem::hermitian(pp.clone(), CMatrix::zeros(2, 1), CMatrix::from_real_rows(&[&[3.0]])).unwrap();
        assert_eq!(schur_complement(&d, c64(0.4, 0.1)).unwrap(), pp);
        assert!(matches!(schur_complement(&s, c64(2.0, 0.0)), Err(SchurError::SingularResolvent(_))));
    }

    #[test]
    fn markovian_examples() {
        let g0 = drive(0.0).g0();
        assert!((&markovian_self_energy(&drive(0.0)) + &CMatrix::identity(2).scale_re(g0)).max_abs() < 1e-15);
        let quarter = markovian_self_energy(&drive(PI / 4.0));
        assert!((&quarter + &pauli::z().scale(c64(0.0, g0))).max_abs() < 1e-15);
        let half = markovian_self_energy(&drive(PI / 2.0));
        assert!((&half - &CMatrix::identity(2).scale_re(g0)).max_abs() < 1e-15);
    }

    #[test]
    fn minimal_model_reproduces_markovian() {
        for phi in [0.0, 0.3, PI / 4.0, 1.2] {
            let d = drive(phi);
            let sys = minimal_drive_model(&d, 0.2, 0.7).unwrap();
            let h = schur_complement(&sys, c64(0.0, 0.0)).unwrap();
            let h_pp = &CMatrix::identity(2).scale_re(0.2) + &pauli::x().scale_re(0.7);
            let sigma = &h - &h_pp;
            let rel = (&sigma - &markovian_self_energy(&d)).norm2() / d.g0();
            assert!(rel <= d.bandwidth / d.delta_o && rel < 1e-14);
        }
    }

    #[test]
    fn splitting() {
        let h = pauli::x();
        let (a, b) = split_hermitian(&h).unwrap();
        assert_eq!(a, h);
        assert_eq!(b.max_abs(), 0.0);
        let isz = pauli::z().scale(c64(0.0, 1.0));
        let (a, b) = split_hermitian(&isz).unwrap();
        assert_eq!(a.max_abs(), 0.0);
        assert_eq!(b, isz);
        let d = drive(PI / 6.0);
        let (a, b) = split_hermitian(&markovian_self_energy(&d)).unwrap();
        let g0 = d.g0();
        // φ_eff = π/3
        assert!((&a + &CMatrix::identity(2).scale_re(g0 * 0.5)).max_abs() < 1e-14);
        assert!((&b + &pauli::z().scale(c64(0.0, g0 * 3f64.sqrt() / 2.0))).max_abs() < 1e-14);
        assert!(split_hermitian(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn effective_coefficients() {
        let d = drive(PI / 4.0);
        let e = assemble_effective(&d, 0.0, 0.8).unwrap();
        let expect = &pauli::z().scale(c64(0.0, d.g0())) + &pauli::x().scale_re(0.8);
        assert!((&e.markovian - &expect).max_abs() < 1e-15);
        assert!(e.pseudo_hermiticity_residual < 1e-14);
        assert!(e.exchanged_self_energy_residual < 1e-14);
        assert!((e.self_energy_sign_residual - 2.0 * d.g0()).abs() < 1e-14);
        let z = assemble_effective(&drive(0.0), 0.5, 0.8).unwrap();
        assert!((z.coefficients.epsilon_eff - (0.5 - d.g0())).abs() < 1e-15);
        assert!((&z.markovian - &z.markovian.adjoint()).max_abs() == 0.0);
        assert!(pt_symmetry_residual(&e.markovian).unwrap() < 1e-15);
    }

    #[test]
    fn error_scan_decays_linearly() {
        let base = DriveParams::new(1.0, 0.4, 20.0, 0.5, 0.0).unwrap();
        let grid = [10.0, 20.0, 40.0, 80.0, 160.0];
        let scan = error_bound_scan(0.1, 0.7, &base, &grid).unwrap();
        assert!(scan.passes, "{scan:?}");
        for w in scan.errors.windows(2) {
            assert!((w[0] / w[1] - 2.0).abs() < 0.4);
        }
        let decoupled = DriveParams::new(0.0, 0.4, 20.0, 0.5, 0.0).unwrap();
        let zero = error_bound_scan(0.1, 0.7, &decoupled, &grid).unwrap();
        assert!(zero.errors.iter().all(|&e| e == 0.0));
        assert!(error_bound_scan(0.1, 0.7, &base, &[0.4, 10.0]).is_err());
    }

    #[test]
    fn rotating_frame_shifts() {
        let d = DriveParams::new(1.0, 0.3, 10.0, 0.5, 2.0).unwrap();
        let base = BlockSystem::hermitian(
            CMatrix::zeros(1, 1),
            CMatrix::from_real_rows(&[&[0.1, 0.1]]),
            CMatrix::diag(&[c64(10.0, 0.0), c64(10.0, 0.0)]),
        )
        .unwrap();
        let r = rotating_frame(&d, &base, &[1, -1]).unwrap();
        assert_eq!(r.system.h_qq[(0, 0)].re, 12.0);
        assert_eq!(r.system.h_qq[(1, 1)].re, 8.0);
        assert!(r.valid);
        let still = rotating_frame(&DriveParams { omega_drive: 0.0, ..d }, &base, &[1, -1]).unwrap();
        assert_eq!(still.system, base);
        let edge = DriveParams::new(1.0, 0.3, 10.0, 8.0, 2.0).unwrap();
        assert!(!rotating_frame(&edge, &base, &[1, -1]).unwrap().valid);
        let fast = DriveParams { omega_drive: 10.0, ..d };
        assert!(rotating_frame(&fast, &base, &[1, -1]).is_err());
    }

    #[test]
    fn time_average_is_hermitian() {
        let avg = time_average_null_test(&drive(0.0), 0.3, 0.9, 32).unwrap();
        let (_, anti) = split_hermitian(&avg).unwrap();
        assert!(anti.max_abs() <= 1e-12);
        assert!((avg[(0, 0)] - 0.3).norm() < 1e-12 && (avg[(1, 1)] - 0.3).norm() < 1e-12);
        assert!((avg[(0, 1)] - 0.9).norm() < 1e-12);
        let half: f64 = (0..16).map(|k| (2.0 * PI * k as f64 / 16.0).sin()).sum::<f64>() / 16.0;
        assert!(half.abs() < 1e-14);
        assert!(time_average_null_test(&drive(0.0), 0.3, 0.9, 4).is_err());
    }

    #[test]
    fn pt_covariance() {
        for vertex in [Vertex::Hermitian, Vertex::Coherent] {
            let d = drive(0.37);
            let sys = drive_block_model(&d, 0.1, 0.6, 8, 0.3, vertex, d.phi_eff()).unwrap();
            assert!(pt_covariance_check(&sys, c64(0.1, 0.01)).unwrap() <= 1e-12);
            assert!(pt_covariance_check(&sys, c64(0.2, 0.0)).unwrap() <= 1e-12);
        }
        let plain = BlockSystem::hermitian(CMatrix::zeros(1, 1), CMatrix::zeros(1, 1), CMatrix::identity(1)).unwrap();
        assert_eq!(pt_covariance_check(&plain, c64(0.0, 0.0)), Err(SchurError::StructureMismatch));
    }

    #[test]
    fn hermitian_model_is_hermitian_on_the_real_axis() {
        let d = drive(0.8);
        let sys = drive_block_model(&d, 0.1, 0.6, 16, 0.3, Vertex::Hermitian, d.phi_eff()).unwrap();
        assert!(sys.is_hermitian(0.0));
        for w in [-0.4, 0.0, 0.25] {
            let (_, anti) = split_hermitian(&schur_complement(&sys, c64(w, 0.0)).unwrap()).unwrap();
            assert!(anti.max_abs() <= 1e-12);
        }
        assert!(adjoint_pairing_residual(&sys, c64(0.1, 0.05)).unwrap() < 1e-13);
    }

    #[test]
    fn continuum_path_is_reported() {
        let d = DriveParams::new(1.0, 0.5, 10.0, 1.0, 0.0).unwrap();
        let a = continuum_path(&d, 0.0, 0.5, 0.5, 200, 0.0, 0.05).unwrap();
        let b = continuum_path(&d.with_phi(0.9), 0.0, 0.5, 0.5, 200, 0.0, 0.05).unwrap();
        assert!(a.beta_continuum.is_finite() && b.beta_continuum.is_finite());
        assert!((a.ratio_to_sin_phi - b.ratio_to_sin_phi).abs() < 1e-12 * a.ratio_to_sin_phi.abs().max(1.0));
    }
}
