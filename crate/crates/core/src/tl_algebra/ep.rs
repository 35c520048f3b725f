use num_complex::Complex64;

use super::{
    braid_ybe_residual, build_contact_generator, tl_residuals, AlgebraError, Basis, BaxterizedR, ContactGenerator, SpectralFn, TlResiduals,
};
use crate::impurity::{build_himp, jordan_data, ImpurityParams};
use crate::numerics::{kron, CMatrix};

/// `s²·e₁₂(s)` along a sequence `s → 0` at `J = 0`, `β = sqrt(γ² − s²)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpRescaling {
    pub s_values: Vec<f64>,
    pub matrices: Vec<CMatrix>,
    /// `max |entry|` of each rescaled matrix.
    pub max_entries: Vec<f64>,
    /// `‖(s²e)²‖_F`.
    pub nilpotency_residuals: Vec<f64>,
}

impl EpRescaling {
    /// Relative error of the centre block against `s²·[[1,−1],[−1,1]]`.
    pub fn centre_block_errors(&self) -> Vec<f64> {
        self.s_values
            .iter()
            .zip(&self.matrices)
            .map(|(&s, m)| {
                let s2 = s * s;
                let expect = [[s2, -s2], [-s2, s2]];
                let mut worst: f64 = 0.0;
                for a in 0..2 {
                    for b in 0..2 {
                        worst = worst.max((m[(1 + a, 1 + b)] - expect[a][b]).norm() / s2);
                    }
                }
                worst
            })
            .collect()
    }

    /// The last matrix, the best available approximation of the limit.
    pub fn limit(&self) -> &CMatrix {
        self.matrices.last().expect("non-empty")
    }
}

pub fn ep_rescaled_generator(gamma: f64, s_values: &[f64]) -> Result<EpRescaling, AlgebraError> {
    if s_values.is_empty() || s_values.iter().any(|&s| !(s > 0.0 && s < gamma)) {
        return Err(AlgebraError::InvalidInput("s values must lie in (0, γ)".into()));
    }
    if s_values.windows(2).any(|w| w[1] >= w[0]) {
        return Err(AlgebraError::InvalidInput("s values must decrease".into()));
    }
    let mut matrices = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let beta = (gamma * gamma - s * s).sqrt();
        let p = ImpurityParams::new(0.0, beta, gamma, 0.0)?;
        let e = build_contact_generator(&p, Basis::Spin)?.matrix;
        matrices.push(e.scale_re(s * s));
    }
    Ok(EpRescaling {
        s_values: s_values.to_vec(),
        max_entries: matrices.iter().map(CMatrix::max_abs).collect(),
        nilpotency_residuals: matrices.iter().map(|m| (m * m).norm_fro()).collect(),
        matrices,
    })
}

/// Contact generator `|r_EP ∧ v_EP⟩⟨l_r ∧ l_v|` from the Jordan pair
/// (c = 0 gauge) and its dual rows of `P_EP⁻¹`, unnormalised, together
/// with its TL residuals on three sites.
pub fn jordan_pair_generator(gamma: f64) -> Result<(ContactGenerator, TlResiduals), AlgebraError> {
    let h = build_himp(ImpurityParams::new(0.0, gamma, gamma, 0.0)?)?;
    let jd = jordan_data(&h)?;
    let pinv = jd.transform.inverse()?;
    let lr = [pinv[(0, 0)], pinv[(0, 1)]];
    let lv = [pinv[(1, 0)], pinv[(1, 1)]];
    let wedge =
        |a: &[Complex64], b: &[Complex64]| -> Vec<Complex64> { (0..4).map(|k| a[k / 2] * b[k % 2] - b[k / 2] * a[k % 2]).collect() };
    let g = ContactGenerator::from_vectors(wedge(&jd.r_ep, &jd.v_ep), wedge(&lr, &lv));
    let res = tl_residuals(&g.matrix, 3)?;
    Ok((g, res))
}

/// Two-site lift `N_s ⊗ N_s` of the spin-basis Jordan block
/// `N_s = (H_EP − ε)/β`; squares to zero.
pub fn ep_nilpotent_contact(gamma: f64) -> Result<CMatrix, AlgebraError> {
    let h = build_himp(ImpurityParams::new(0.0, gamma, gamma, 0.0)?)?;
    let ns = h.traceless().scale_re(1.0 / gamma);
    Ok(kron(&ns, &ns))
}

/// Linear Baxterisation `Ř(u) = 1 + c·u·X` of a nilpotent `X`: returns the
/// largest of the additivity defect, `|det Ř(u) − 1|` and the braid YBE
/// residual.
pub fn ep_linear_baxterization(c: f64, u: Complex64, v: Complex64, nilpotent: &CMatrix) -> Result<f64, AlgebraError> {
    if nilpotent.shape() != (4, 4) {
        return Err(AlgebraError::InvalidInput("nilpotent must be 4x4".into()));
    }
    let sq = (nilpotent * nilpotent).norm_fro();
    if sq > 1e-12 * nilpotent.norm_fro().powi(2).max(1.0) {
        return Err(AlgebraError::NotNilpotent(sq));
    }
    let g = SpectralFn::Linear(c);
    let additivity = (g.eval(u + v)? - g.eval(u)? - g.eval(v)?).norm();
    let r = BaxterizedR::new(nilpotent.clone(), g);
    let det = r.braid(u)?.to_nalgebra().determinant();
    let ybe = braid_ybe_residual(&r, u, v)?;
    Ok(additivity.max((det - 1.0).norm()).max(ybe))
}
