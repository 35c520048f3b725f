//! Temperley-Lieb contact algebra and the integrable hierarchy built on it.
//!
//! The two-particle generator `e₁₂ = |Ω⟩⟨Ω̃|` is formed from the
//! antisymmetrised right/left impurity eigenvectors. It obeys the TL
//! relations with loop weight 2 and is Baxterised as
//! `Ř(u) = 1 + f(u) e₁₂`, `R(u) = Π Ř(u)`, `f(u) = u/(1 − u)`.

mod chain;
mod charges;
mod ep;
mod suite;

pub use chain::{
    apply_two_site, apply_two_site_right, embed_two_site, rll_residual, rtt_residual, transfer_commutator, ChainAlgebra, MAX_SITES,
};
pub use charges::{extract_charges, ChargeSeries};
pub use ep::{ep_linear_baxterization, ep_nilpotent_contact, ep_rescaled_generator, jordan_pair_generator, EpRescaling};
pub use suite::{identity_suite, random_params, random_spectral_pair, SuiteReport};

use num_complex::Complex64;
use thiserror::Error;

use crate::impurity::{build_himp, spectral_data, ImpurityError, ImpurityParams, EP_THRESHOLD};
use crate::numerics::{c64, kron, permutation_operator, CMatrix, NumericsError};

/// Minimum distance to a pole of `f` accepted by the residual checks.
pub const POLE_GUARD: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("spectral parameter {0} is within the pole guard of u = 1")]
    PoleProximity(Complex64),
    #[error("contact generator is undefined at the exceptional point (|s_eff| = {0:e})")]
    AtExceptionalPoint(f64),
    #[error("chain length {0} outside 1..={MAX_SITES}")]
    DimensionCap(usize),
    #[error("matrix is not nilpotent: ‖X²‖ = {0:e}")]
    NotNilpotent(f64),
    #[error("t̂(0) is not invertible")]
    NonInvertible,
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Impurity(#[from] ImpurityError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Spin,
    Biorthogonal,
}

/// `e₁₂ = |Ω⟩⟨Ω̃|` with `⟨Ω̃|Ω⟩ = 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactGenerator {
    pub matrix: CMatrix,
    pub omega: Vec<Complex64>,
    pub omega_dual: Vec<Complex64>,
    pub normalization: Complex64,
}

impl ContactGenerator {
    pub fn from_vectors(omega: Vec<Complex64>, omega_dual: Vec<Complex64>) -> Self {
        let normalization = omega_dual.iter().zip(&omega).map(|(a, b)| a * b).sum();
        let matrix = CMatrix::from_fn(4, 4, |i, j| omega[i] * omega_dual[j]);
        Self {
            matrix,
            omega,
            omega_dual,
            normalization,
        }
    }

    /// `‖e² − 2e‖_F`.
    pub fn tl_defect(&self) -> f64 {
        (&(&self.matrix * &self.matrix) - &self.matrix.scale_re(2.0)).norm_fro()
    }
}

/// The parameter-independent matrix `[[0,0,0,0],[0,1,−1,0],[0,−1,1,0],[0,0,0,0]]`.
pub fn universal_generator() -> CMatrix {
    CMatrix::from_real_rows(&[
        &[0.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, -1.0, 0.0],
        &[0.0, -1.0, 1.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0],
    ])
}

fn wedge(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(4);
    for i in 0..2 {
        for j in 0..2 {
            out.push(a[i] * b[j] - b[i] * a[j]);
        }
    }
    out
}

pub fn build_contact_generator(p: &ImpurityParams, basis: Basis) -> Result<ContactGenerator, AlgebraError> {
    let h = build_himp(*p)?;
    if h.s_eff.norm() <= EP_THRESHOLD {
        return Err(AlgebraError::AtExceptionalPoint(h.s_eff.norm()));
    }
    match basis {
        Basis::Spin => {
            let sd = spectral_data(&h)?;
            Ok(ContactGenerator::from_vectors(
                wedge(&sd.right[0], &sd.right[1]),
                wedge(&sd.left[0], &sd.left[1]),
            ))
        }
        Basis::Biorthogonal => {
            let e0 = [c64(1.0, 0.0), c64(0.0, 0.0)];
            let e1 = [c64(0.0, 0.0), c64(1.0, 0.0)];
            Ok(ContactGenerator::from_vectors(wedge(&e0, &e1), wedge(&e0, &e1)))
        }
    }
}

/// Matrix elements `⟨l_a l_b| e₁₂ |r_c r_d⟩` of the spin-basis generator,
/// computed by explicit change of basis.
pub fn biorthogonal_matrix_elements(p: &ImpurityParams) -> Result<CMatrix, AlgebraError> {
    let h = build_himp(*p)?;
    let sd = spectral_data(&h)?;
    let e = build_contact_generator(p, Basis::Spin)?.matrix;
    let rmat = CMatrix::from_fn(2, 2, |i, a| sd.right[a][i]);
    let lmat = CMatrix::from_fn(2, 2, |a, i| sd.left[a][i]);
    let r2 = kron(&rmat, &rmat);
    let l2 = kron(&lmat, &lmat);
    Ok(&(&l2 * &e) * &r2)
}

/// Residuals of the TL relations on `(C²)^⊗n`.
#[derive(Debug, Clone, Copy, PartialEq, Default, serde::Serialize)]
pub struct TlResiduals {
    pub idempotent: f64,
    pub braid: f64,
    pub far_commutation: f64,
}

impl TlResiduals {
    pub fn max(&self) -> f64 {
        self.idempotent.max(self.braid).max(self.far_commutation)
    }
}

pub fn verify_tl_relations(p: &ImpurityParams, n_sites: usize) -> Result<TlResiduals, AlgebraError> {
    let e = build_contact_generator(p, Basis::Spin)?.matrix;
    tl_residuals(&e, n_sites)
}

/// TL residuals of an arbitrary 4x4 generator on `n_sites` factors.
pub fn tl_residuals(e: &CMatrix, n_sites: usize) -> Result<TlResiduals, AlgebraError> {
    if !(2..=MAX_SITES + 2).contains(&n_sites) {
        return Err(AlgebraError::DimensionCap(n_sites));
    }
    let gens: Vec<CMatrix> = (0..n_sites - 1).map(|i| embed_two_site(e, i, i + 1, n_sites)).collect();
    let mut r = TlResiduals::default();
    for (i, ei) in gens.iter().enumerate() {
        r.idempotent = r.idempotent.max((&(ei * ei) - &ei.scale_re(2.0)).norm_fro());
        for (j, ej) in gens.iter().enumerate() {
            let gap = i.abs_diff(j);
            if gap == 1 {
                r.braid = r.braid.max((&(&(ei * ej) * ei) - ei).norm_fro());
            } else if gap >= 2 {
                r.far_commutation = r.far_commutation.max(ei.commutator(ej).norm_fro());
            }
        }
    }
    Ok(r)
}

/// Scalar weight multiplying the generator in `Ř(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectralFn {
    /// `f(u) = u/(1 − u)`.
    Rational,
    /// `g(u) = c·u`.
    Linear(f64),
}

impl SpectralFn {
    pub fn eval(&self, u: Complex64) -> Result<Complex64, AlgebraError> {
        match *self {
            Self::Rational => {
                let d = 1.0 - u;
                if d.norm() < POLE_GUARD {
                    return Err(AlgebraError::PoleProximity(u));
                }
                Ok(u / d)
            }
            Self::Linear(c) => Ok(u * c),
        }
    }
}

/// `Ř(u) = 1 + w(u)·e` and `R(u) = Π Ř(u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BaxterizedR {
    pub generator: CMatrix,
    pub spectral_fn: SpectralFn,
    perm: CMatrix,
}

impl BaxterizedR {
    pub fn new(generator: CMatrix, spectral_fn: SpectralFn) -> Self {
        Self {
            generator,
            spectral_fn,
            perm: permutation_operator(2).expect("d = 2"),
        }
    }

    pub fn from_params(p: &ImpurityParams) -> Result<Self, AlgebraError> {
        Ok(Self::new(build_contact_generator(p, Basis::Spin)?.matrix, SpectralFn::Rational))
    }

    pub fn braid(&self, u: Complex64) -> Result<CMatrix, AlgebraError> {
        let w = self.spectral_fn.eval(u)?;
        Ok(&CMatrix::identity(4) + &self.generator.scale(w))
    }

    pub fn ordinary(&self, u: Complex64) -> Result<CMatrix, AlgebraError> {
        Ok(&self.perm * &self.braid(u)?)
    }
}

/// Residual of `f(u+v) = (f(u) + f(v) + 2f(u)f(v)) / (1 − f(u)f(v))`.
pub fn baxter_functional_residual(u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let f = SpectralFn::Rational;
    let (fu, fv, fuv) = (f.eval(u)?, f.eval(v)?, f.eval(u + v)?);
    Ok((fuv - (fu + fv + 2.0 * fu * fv) / (1.0 - fu * fv)).norm())
}

/// Ordinary-form YBE residual `‖R₁₂(u−v)R₁₃(u)R₂₃(v) − R₂₃(v)R₁₃(u)R₁₂(u−v)‖_F`.
pub fn ybe_residual(r: &BaxterizedR, u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let r12 = embed_two_site(&r.ordinary(u - v)?, 0, 1, 3);
    let r13 = embed_two_site(&r.ordinary(u)?, 0, 2, 3);
    let r23 = embed_two_site(&r.ordinary(v)?, 1, 2, 3);
    let lhs = &(&r12 * &r13) * &r23;
    let rhs = &(&r23 * &r13) * &r12;
    Ok((&lhs - &rhs).norm_fro())
}

/// Braid-form YBE residual `‖Ř₁(u)Ř₂(u+v)Ř₁(v) − Ř₂(v)Ř₁(u+v)Ř₂(u)‖_F`.
pub fn braid_ybe_residual(r: &BaxterizedR, u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let b1 = |x| r.braid(x).map(|m| embed_two_site(&m, 0, 1, 3));
    let b2 = |x| r.braid(x).map(|m| embed_two_site(&m, 1, 2, 3));
    let lhs = &(&b1(u)? * &b2(u + v)?) * &b1(v)?;
    let rhs = &(&b2(v)? * &b1(u + v)?) * &b2(u)?;
    Ok((&lhs - &rhs).norm_fro())
}

/// `‖Ř(u)Ř(−u) − 1‖_F`.
pub fn unitarity_check(r: &BaxterizedR, u: Complex64) -> Result<f64, AlgebraError> {
    if (1.0 + u).norm() < POLE_GUARD {
        return Err(AlgebraError::PoleProximity(-u));
    }
    Ok((&(&r.braid(u)? * &r.braid(-u)?) - &CMatrix::identity(4)).norm_fro())
}

/// `‖R(0) − Π‖_F`.
pub fn boundary_residual(r: &BaxterizedR) -> Result<f64, AlgebraError> {
    Ok((&r.ordinary(c64(0.0, 0.0))? - &permutation_operator(2)?).norm_fro())
}
