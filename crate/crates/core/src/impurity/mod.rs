//! Two-level PT-symmetric impurity `H = ε·1 + iβσᶻ + γ_eff σˣ` with
//! `γ_eff = sqrt(γ² + (J/2)²)`.
//!
//! The module covers the biorthogonal spectral data, the Jordan normal form
//! at the exceptional point (EP), the biorthogonal su(2) ladder, the
//! discrete-symmetry checks and the EP locus / Kondo scale. Resolvent and
//! pseudospectrum diagnostics live in [`diagnostics`].

pub mod diagnostics;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numerics::{c64, pauli, vnorm, CMatrix, NumericsError};

/// `|s_eff|` at or below this value is treated as the EP.
pub const EP_THRESHOLD: f64 = 1e-10;
/// Largest `|γ_eff − β|` accepted by [`jordan_data`].
pub const JORDAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ImpurityError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("operation undefined at the exceptional point (|s_eff| = {0:e})")]
    AtExceptionalPoint(f64),
    #[error("projectors diverge at the exceptional point (|s_eff| = {0:e})")]
    ProjectorDivergence(f64),
    #[error("not at the exceptional point: |γ_eff − β| = {0:e}")]
    NotAtExceptionalPoint(f64),
    #[error("expected a 2x2 matrix, got {0:?}")]
    NotTwoByTwo((usize, usize)),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpurityParams {
    pub epsilon: f64,
    pub beta: f64,
    pub gamma: f64,
    #[serde(default)]
    pub j_coupling: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Unbroken,
    Exceptional,
    Broken,
}

impl ImpurityParams {
    pub fn new(epsilon: f64, beta: f64, gamma: f64, j_coupling: f64) -> Result<Self, ImpurityError> {
        let p = Self {
            epsilon,
            beta,
            gamma,
            j_coupling,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), ImpurityError> {
        for (name, value) in [
            ("epsilon", self.epsilon),
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("j_coupling", self.j_coupling),
        ] {
            if !value.is_finite() {
                return Err(ImpurityError::InvalidParameter {
                    name,
                    value,
                    reason: "must be finite",
                });
            }
        }
        if self.gamma <= 0.0 {
            return Err(ImpurityError::InvalidParameter {
                name: "gamma",
                value: self.gamma,
                reason: "must be positive",
            });
        }
        if self.j_coupling < 0.0 {
            return Err(ImpurityError::InvalidParameter {
                name: "j_coupling",
                value: self.j_coupling,
                reason: "must be non-negative",
            });
        }
        Ok(())
    }

    pub fn gamma_eff(&self) -> f64 {
        gamma_eff(self.gamma, self.j_coupling)
    }

    /// Principal branch of `sqrt(γ_eff² − β²)`; `i·s'` in the broken phase.
    pub fn s_eff(&self) -> Complex64 {
        let g = self.gamma_eff();
        let s2 = (g - self.beta) * (g + self.beta);
        c64(s2, 0.0).sqrt()
    }

    /// Signed distance `γ_eff − β` to the EP.
    pub fn delta(&self) -> f64 {
        self.gamma_eff() - self.beta
    }

    pub fn phase(&self) -> Phase {
        let s = self.s_eff();
        if s.norm() <= EP_THRESHOLD {
            Phase::Exceptional
        } else if s.im != 0.0 {
            Phase::Broken
        } else {
            Phase::Unbroken
        }
    }

    /// Parameters at distance `delta` below the EP (`β = γ_eff − δ`).
    pub fn near_ep(epsilon: f64, gamma: f64, j_coupling: f64, delta: f64) -> Result<Self, ImpurityError> {
        Self::new(epsilon, gamma_eff(gamma, j_coupling) - delta, gamma, j_coupling)
    }
}

pub fn gamma_eff(gamma: f64, j_coupling: f64) -> f64 {
    gamma.hypot(0.5 * j_coupling)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpurityHamiltonian {
    pub params: ImpurityParams,
    pub matrix: CMatrix,
    pub s_eff: Complex64,
    pub phase: Phase,
}

impl ImpurityHamiltonian {
    /// `H − ε·1`.
    pub fn traceless(&self) -> CMatrix {
        &self.matrix - &CMatrix::identity(2).scale_re(self.params.epsilon)
    }
}

pub fn build_himp(params: ImpurityParams) -> Result<ImpurityHamiltonian, ImpurityError> {
    params.validate()?;
    let (e, b, g) = (params.epsilon, params.beta, params.gamma_eff());
    let matrix = CMatrix::from_rows(&[vec![c64(e, b), c64(g, 0.0)], vec![c64(g, 0.0), c64(e, -b)]]);
    Ok(ImpurityHamiltonian {
        params,
        matrix,
        s_eff: params.s_eff(),
        phase: params.phase(),
    })
}

/// Biorthogonal eigensystem. Right vectors keep the unnormalised form
/// `(±s + iβ, γ_eff)`; left covectors are scaled so that `⟨l_a|r_b⟩ = δ_ab`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralData {
    pub eigenvalues: [Complex64; 2],
    pub right: [Vec<Complex64>; 2],
    pub left: [Vec<Complex64>; 2],
    /// `⟨l̃_±|r_±⟩ = ±2sγ_eff` before rescaling.
    pub raw_overlaps: [Complex64; 2],
}

impl SpectralData {
    /// Eigenvector condition number `‖r‖‖l‖/|⟨l|r⟩|` of the `+` branch.
    pub fn eigenvector_condition(&self) -> f64 {
        vnorm(&self.right[0]) * vnorm(&self.left[0])
    }

    /// Biorthonormality defect `max |⟨l_a|r_b⟩ − δ_ab|`.
    pub fn biorthogonality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let ov: Complex64 = self.left[a].iter().zip(&self.right[b]).map(|(l, r)| l * r).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((ov - target).norm());
            }
        }
        worst
    }
}

fn raw_vectors(p: &ImpurityParams, s: Complex64) -> ([Vec<Complex64>; 2], [Vec<Complex64>; 2]) {
    let ib = c64(0.0, p.beta);
    let g = c64(p.gamma_eff(), 0.0);
    let right = [vec![s + ib, g], vec![-s + ib, g]];
    let left = [vec![g, s - ib], vec![g, -s - ib]];
    (right, left)
}

pub fn spectral_data(h: &ImpurityHamiltonian) -> Result<SpectralData, ImpurityError> {
    let s = h.s_eff;
    if s.norm() <= EP_THRESHOLD {
        return Err(ImpurityError::AtExceptionalPoint(s.norm()));
    }
    let (right, left_raw) = raw_vectors(&h.params, s);
    let g = h.params.gamma_eff();
    let raw_overlaps = [2.0 * s * g, -2.0 * s * g];
    let left = [
        left_raw[0].iter().map(|z| z / raw_overlaps[0]).collect(),
        left_raw[1].iter().map(|z| z / raw_overlaps[1]).collect(),
    ];
    let e = c64(h.params.epsilon, 0.0);
    Ok(SpectralData {
        eigenvalues: [e + s, e - s],
        right,
        left,
        raw_overlaps,
    })
}

fn outer(r: &[Complex64], l: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(r.len(), l.len(), |i, j| r[i] * l[j])
}

/// Spectral projectors `P_± = |r_±⟩⟨l_±|`.
pub fn projectors(h: &ImpurityHamiltonian) -> Result<[CMatrix; 2], ImpurityError> {
    let sd = spectral_data(h).map_err(|e| match e {
        ImpurityError::AtExceptionalPoint(x) => ImpurityError::ProjectorDivergence(x),
        other => other,
    })?;
    Ok([outer(&sd.right[0], &sd.left[0]), outer(&sd.right[1], &sd.left[1])])
}

/// Jordan data at the EP: `P⁻¹ (H − ε) P = N` with `P = [r_EP v_EP]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JordanData {
    pub r_ep: Vec<Complex64>,
    pub v_ep: Vec<Complex64>,
    pub transform: CMatrix,
    pub nilpotent: CMatrix,
    pub residual: f64,
}

impl JordanData {
    /// Gauge-fixed pair `(r̂, v̂)` with `Θr̂ = r̂`, `Θv̂ = −v̂` and
    /// `(H − ε)v̂ = i r̂`, where `Θ = σˣ∘K`.
    pub fn pt_covariant_chain(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let lam = theta_eigenvalue(&self.r_ep);
        let mu = lam.sqrt();
        let r_hat: Vec<Complex64> = self.r_ep.iter().map(|z| z * mu).collect();
        let w: Vec<Complex64> = self.v_ep.iter().map(|z| z * mu * c64(0.0, 1.0)).collect();
        let tw = theta(&w);
        let sum: Vec<Complex64> = tw.iter().zip(&w).map(|(a, b)| a + b).collect();
        let c = inner(&r_hat, &sum) / inner(&r_hat, &r_hat);
        let v_hat = w.iter().zip(&r_hat).map(|(a, r)| a - 0.5 * c.re * r).collect();
        (r_hat, v_hat)
    }
}

pub fn jordan_data(h: &ImpurityHamiltonian) -> Result<JordanData, ImpurityError> {
    let d = h.params.delta();
    if d.abs() > JORDAN_TOLERANCE {
        return Err(ImpurityError::NotAtExceptionalPoint(d.abs()));
    }
    let b = h.params.beta;
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let r_ep = vec![c64(0.0, r2), c64(r2, 0.0)];
    let v_ep = vec![c64(r2 / b, 0.0), c64(0.0, 0.0)];
    let transform = CMatrix::from_rows(&[vec![r_ep[0], v_ep[0]], vec![r_ep[1], v_ep[1]]]);
    let nilpotent = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    let conj = &(&transform.inverse()? * &h.traceless()) * &transform;
    let residual = (&conj - &nilpotent).norm2();
    Ok(JordanData {
        r_ep,
        v_ep,
        transform,
        nilpotent,
        residual,
    })
}

/// Biorthogonal su(2) ladder. Away from the EP `S⁺ = |r₊⟩⟨l₋|`,
/// `S⁻ = |r₋⟩⟨l₊|`, `Sᶻ = (P₊ − P₋)/2`; at the EP only the contracted
/// pair `(N, Sᶻ)` with `[Sᶻ, N] = N` survives.
#[derive(Debug, Clone, PartialEq)]
pub enum Su2Generators {
    Regular {
        s_plus: CMatrix,
        s_minus: CMatrix,
        s_z: CMatrix,
        /// `‖½·1 + Sᶻ + (γ/s)(S⁺ + S⁻) − P₊‖`, reported only.
        literal_reconstruction_residual: f64,
        /// `‖σˣ (S⁺)† σˣ − S⁻‖`, reported only.
        eta_adjoint_residual: f64,
    },
    Contracted {
        nilpotent: CMatrix,
        s_z: CMatrix,
    },
}

impl Su2Generators {
    pub fn s_z(&self) -> &CMatrix {
        match self {
            Self::Regular { s_z, .. } | Self::Contracted { s_z, .. } => s_z,
        }
    }

    /// Largest residual among `[Sᶻ,S±] = ±S±` and `[S⁺,S⁻] = 2Sᶻ`
    /// (or `[Sᶻ,N] = N` when contracted).
    pub fn commutator_residual(&self) -> f64 {
        match self {
            Self::Regular { s_plus, s_minus, s_z, .. } => {
                let a = (&s_z.commutator(s_plus) - s_plus).norm2();
                let b = (&s_z.commutator(s_minus) + s_minus).norm2();
                let c = (&s_plus.commutator(s_minus) - &s_z.scale_re(2.0)).norm2();
                a.max(b).max(c)
            }
            Self::Contracted { nilpotent, s_z } => (&s_z.commutator(nilpotent) - nilpotent).norm2(),
        }
    }
}

pub fn su2_generators(h: &ImpurityHamiltonian) -> Result<Su2Generators, ImpurityError> {
    if h.s_eff.norm() <= EP_THRESHOLD {
        let jd = jordan_data(h)?;
        let pinv = jd.transform.inverse()?;
        let sz0 = CMatrix::from_real_rows(&[&[0.5, 0.0], &[0.0, -0.5]]);
        return Ok(Su2Generators::Contracted {
            nilpotent: &(&jd.transform * &jd.nilpotent) * &pinv,
            s_z: &(&jd.transform * &sz0) * &pinv,
        });
    }
    let sd = spectral_data(h)?;
    let [pp, pm] = projectors(h)?;
    let s_plus = outer(&sd.right[0], &sd.left[1]);
    let s_minus = outer(&sd.right[1], &sd.left[0]);
    let s_z = (&pp - &pm).scale_re(0.5);
    let g = h.params.gamma_eff();
    let literal = &(&CMatrix::identity(2).scale_re(0.5) + &s_z) + &(&s_plus + &s_minus).scale(g / h.s_eff);
    let sx = pauli::x();
    let eta_adj = &(&sx * &s_plus.adjoint()) * &sx;
    Ok(Su2Generators::Regular {
        literal_reconstruction_residual: (&literal - &pp).norm2(),
        eta_adjoint_residual: (&eta_adj - &s_minus).norm2(),
        s_plus,
        s_minus,
        s_z,
    })
}

/// Antiunitary `Θ = σˣ∘K` on a two-component vector.
pub fn theta(v: &[Complex64]) -> Vec<Complex64> {
    vec![v[1].conj(), v[0].conj()]
}

fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `⟨v, Θv⟩ / ⟨v, v⟩`, the Θ-eigenvalue when `v` is a Θ-eigenvector.
pub fn theta_eigenvalue(v: &[Complex64]) -> Complex64 {
    inner(v, &theta(v)) / inner(v, v)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpParity {
    pub eigenvector_eigenvalue: Complex64,
    pub chain_vector_eigenvalue: Complex64,
    pub eigenvector_residual: f64,
    pub chain_vector_residual: f64,
    /// `‖(H − ε)v̂ − i r̂‖`.
    pub chain_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub pt_residual: f64,
    pub pt_holds: bool,
    pub t_residual: f64,
    pub t_broken: bool,
    pub c_residual: f64,
    pub c_maps_to_adjoint: bool,
    /// `‖σᶻH₀σᶻ + H₀‖`, recorded without a verdict.
    pub gamma_action_residual: f64,
    pub class_label: String,
    pub ep_parity: Option<EpParity>,
}

pub fn symmetry_report(h: &ImpurityHamiltonian) -> Result<SymmetryReport, ImpurityError> {
    let m = &h.matrix;
    let (sx, sy, sz) = (pauli::x(), pauli::y(), pauli::z());
    let tol = 1e-12 * m.norm2().max(1.0);
    let pt_residual = (&(&sx * &m.conj()) * &sx - m).norm2();
    let t_residual = (&(&sy * &m.conj()) * &sy - m).norm2();
    let c_residual = (&(&sx * &m.transpose()) * &sx - &m.adjoint()).norm2();
    let h0 = h.traceless();
    let gamma_action_residual = (&(&sz * &h0) * &sz + &h0).norm2();
    let ep_parity = if h.params.delta().abs() <= JORDAN_TOLERANCE {
        let jd = jordan_data(h)?;
        let (r, v) = jd.pt_covariant_chain();
        let tr = theta(&r);
        let tv = theta(&v);
        let hv = h0.apply(&v);
        let diff = |a: &[Complex64], b: &[Complex64], s: Complex64| vnorm(&a.iter().zip(b).map(|(x, y)| x - s * y).collect::<Vec<_>>());
        Some(EpParity {
            eigenvector_eigenvalue: theta_eigenvalue(&r),
            chain_vector_eigenvalue: theta_eigenvalue(&v),
            eigenvector_residual: diff(&tr, &r, c64(1.0, 0.0)),
            chain_vector_residual: diff(&tv, &v, c64(-1.0, 0.0)),
            chain_residual: diff(&hv, &r, c64(0.0, 1.0)),
        })
    } else {
        None
    };
    Ok(SymmetryReport {
        pt_residual,
        pt_holds: pt_residual <= tol,
        t_residual,
        t_broken: t_residual > tol,
        c_residual,
        c_maps_to_adjoint: c_residual <= tol,
        gamma_action_residual,
        class_label: "non-Hermitian class D".to_string(),
        ep_parity,
    })
}

/// `‖h† − σˣ h σˣ‖₂` for a 2x2 matrix.
pub fn pseudo_hermiticity_check(h: &CMatrix) -> Result<f64, ImpurityError> {
    if h.shape() != (2, 2) {
        return Err(ImpurityError::NotTwoByTwo(h.shape()));
    }
    let sx = pauli::x();
    Ok((&h.adjoint() - &(&(&sx * h) * &sx)).norm2())
}

/// EP locus `β* = sqrt(γ² + J²/4)`.
pub fn ep_locus(gamma: f64, j_coupling: f64) -> Result<f64, ImpurityError> {
    ImpurityParams::new(0.0, 0.0, gamma, j_coupling)?;
    Ok(gamma_eff(gamma, j_coupling))
}

/// Locates the EP in `β` from the built matrices alone: bisection on the
/// sign of the discriminant `((h₀₀ − h₁₁)/2)² + h₀₁h₁₀ = s_eff²`.
pub fn detect_ep_onset(gamma: f64, j_coupling: f64) -> Result<f64, ImpurityError> {
    let disc = |beta: f64| -> Result<f64, ImpurityError> {
        let m = build_himp(ImpurityParams::new(0.0, beta, gamma, j_coupling)?)?.matrix;
        let half = (m[(0, 0)] - m[(1, 1)]) * 0.5;
        Ok((half * half + m[(0, 1)] * m[(1, 0)]).re)
    };
    let mut lo = 0.0;
    let mut hi = 1.0 + 2.0 * gamma.abs() + j_coupling.abs();
    if disc(lo)? <= 0.0 || disc(hi)? >= 0.0 {
        return Err(ImpurityError::InvalidParameter {
            name: "gamma",
            value: gamma,
            reason: "no sign change of the discriminant",
        });
    }
    while hi - lo > 4.0 * f64::EPSILON * hi {
        let mid = 0.5 * (lo + hi);
        if disc(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Kondo-scale estimate `prefactor · exp(−|ε|/γ_eff)`.
pub fn kondo_scale(params: &ImpurityParams, prefactor: f64) -> Result<f64, ImpurityError> {
    params.validate()?;
    if !(prefactor > 0.0 && prefactor.is_finite()) {
        return Err(ImpurityError::InvalidParameter {
            name: "prefactor",
            value: prefactor,
            reason: "must be positive",
        });
    }
    Ok(prefactor * (-params.epsilon.abs() / params.gamma_eff()).exp())
}
