use num_complex::Complex64;

use super::{AlgebraError, BaxterizedR};
use crate::impurity::ImpurityParams;
use crate::numerics::{kron, pauli, CMatrix};

/// Largest number of quantum sites accepted by [`ChainAlgebra`].
pub const MAX_SITES: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

fn site_index(x: usize, shift_i: usize, shift_j: usize) -> usize {
    (((x >> shift_i) & 1) << 1) | ((x >> shift_j) & 1)
}

fn with_bits(x: usize, shift_i: usize, shift_j: usize, ab: usize) -> usize {
    let cleared = x & !(1 << shift_i) & !(1 << shift_j);
    cleared | (((ab >> 1) & 1) << shift_i) | ((ab & 1) << shift_j)
}

fn apply(op: &CMatrix, i: usize, j: usize, n_factors: usize, m: &CMatrix, side: Side) -> CMatrix {
    assert_eq!(op.shape(), (4, 4), "two-site operator must be 4x4");
    assert!(i != j && i < n_factors && j < n_factors, "invalid factor pair");
    let dim = 1usize << n_factors;
    let (si, sj) = (n_factors - 1 - i, n_factors - 1 - j);
    let mut out = CMatrix::zeros(m.rows(), m.cols());
    match side {
        Side::Left => {
            assert_eq!(m.rows(), dim);
            for x in 0..dim {
                let xi = site_index(x, si, sj);
                for ab in 0..4 {
                    let w = op[(xi, ab)];
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    let y = with_bits(x, si, sj, ab);
                    for c in 0..m.cols() {
                        out[(x, c)] += w * m[(y, c)];
                    }
                }
            }
        }
        Side::Right => {
            assert_eq!(m.cols(), dim);
            for x in 0..dim {
                let xi = site_index(x, si, sj);
                for ab in 0..4 {
                    let w = op[(ab, xi)];
                    if w.re == 0.0 && w.im == 0.0 {
                        continue;
                    }
                    let y = with_bits(x, si, sj, ab);
                    for r in 0..m.rows() {
                        out[(r, x)] += m[(r, y)] * w;
                    }
                }
            }
        }
    }
    out
}

/// `X_{ij} · m` where `X` is a 4x4 operator acting on tensor factors
/// `i` (first slot) and `j` (second slot) of `n_factors` qubits; factor 0
/// is the most significant.
pub fn apply_two_site(op: &CMatrix, i: usize, j: usize, n_factors: usize, m: &CMatrix) -> CMatrix {
    apply(op, i, j, n_factors, m, Side::Left)
}

/// `m · X_{ij}`.
pub fn apply_two_site_right(op: &CMatrix, i: usize, j: usize, n_factors: usize, m: &CMatrix) -> CMatrix {
    apply(op, i, j, n_factors, m, Side::Right)
}

/// Dense embedding of a two-site operator.
pub fn embed_two_site(op: &CMatrix, i: usize, j: usize, n_factors: usize) -> CMatrix {
    apply_two_site(op, i, j, n_factors, &CMatrix::identity(1 << n_factors))
}

/// Partial trace over the leading tensor factor.
fn trace_first_factor(m: &CMatrix) -> CMatrix {
    let half = m.rows() / 2;
    CMatrix::from_fn(half, half, |x, y| m[(x, y)] + m[(half + x, half + y)])
}

/// Lax operators `𝓛_{a,j}(u) = R_{a,j}(u)`, monodromy
/// `𝓣_a(u) = 𝓛_{a,N}(u)⋯𝓛_{a,1}(u)` and transfer matrix `t(u) = tr_a 𝓣_a(u)`.
/// The auxiliary space is tensor factor 0, site `j` is factor `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainAlgebra {
    pub n_sites: usize,
    pub r: BaxterizedR,
}

impl ChainAlgebra {
    pub fn new(r: BaxterizedR, n_sites: usize) -> Result<Self, AlgebraError> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(AlgebraError::DimensionCap(n_sites));
        }
        Ok(Self { n_sites, r })
    }

    pub fn build(p: &ImpurityParams, n_sites: usize) -> Result<Self, AlgebraError> {
        Self::new(BaxterizedR::from_params(p)?, n_sites)
    }

    /// Dense `𝓛_{a,site}(u)` on `V_a ⊗ V^⊗N`, `site ∈ 1..=N`.
    pub fn lax(&self, site: usize, u: Complex64) -> Result<CMatrix, AlgebraError> {
        if site == 0 || site > self.n_sites {
            return Err(AlgebraError::InvalidInput(format!("site {site} outside 1..={}", self.n_sites)));
        }
        Ok(embed_two_site(&self.r.ordinary(u)?, 0, site, self.n_sites + 1))
    }

    pub fn monodromy(&self, u: Complex64) -> Result<CMatrix, AlgebraError> {
        let rm = self.r.ordinary(u)?;
        let nf = self.n_sites + 1;
        let mut t = CMatrix::identity(1 << nf);
        for j in 1..=self.n_sites {
            t = apply_two_site(&rm, 0, j, nf, &t);
        }
        Ok(t)
    }

    pub fn transfer(&self, u: Complex64) -> Result<CMatrix, AlgebraError> {
        Ok(trace_first_factor(&self.monodromy(u)?))
    }

    /// Metric `(σˣ)^⊗N`.
    pub fn metric(&self) -> CMatrix {
        let sx = pauli::x();
        (1..self.n_sites).fold(sx.clone(), |acc, _| kron(&acc, &sx))
    }
}

/// `‖R₁₂(u−v)𝓛₁q(u)𝓛₂q(v) − 𝓛₂q(v)𝓛₁q(u)R₁₂(u−v)‖_F` on `C²⊗C²⊗C²`.
pub fn rll_residual(p: &ImpurityParams, u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let r = BaxterizedR::from_params(p)?;
    rll_residual_for(&r, u, v)
}

pub(crate) fn rll_residual_for(r: &BaxterizedR, u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let r12 = embed_two_site(&r.ordinary(u - v)?, 0, 1, 3);
    let l1 = embed_two_site(&r.ordinary(u)?, 0, 2, 3);
    let l2 = embed_two_site(&r.ordinary(v)?, 1, 2, 3);
    let lhs = &(&r12 * &l1) * &l2;
    let rhs = &(&l2 * &l1) * &r12;
    Ok((&lhs - &rhs).norm_fro())
}

/// `‖R₁₂(u−v)𝓣₁(u)𝓣₂(v) − 𝓣₂(v)𝓣₁(u)R₁₂(u−v)‖_F` with two auxiliary
/// spaces (factors 0, 1) and the chain on factors `2..N+2`.
pub fn rtt_residual(chain: &ChainAlgebra, u: Complex64, v: Complex64) -> Result<f64, AlgebraError> {
    let n = chain.n_sites;
    let nf = n + 2;
    let (ru, rv, ruv) = (chain.r.ordinary(u)?, chain.r.ordinary(v)?, chain.r.ordinary(u - v)?);
    let id = CMatrix::identity(1 << nf);
    let mut t1 = id.clone();
    let mut t2 = id;
    for j in 0..n {
        t1 = apply_two_site(&ru, 0, 2 + j, nf, &t1);
        t2 = apply_two_site(&rv, 1, 2 + j, nf, &t2);
    }
    let lhs = apply_two_site(&ruv, 0, 1, nf, &(&t1 * &t2));
    let rhs = apply_two_site_right(&ruv, 0, 1, nf, &(&t2 * &t1));
    Ok((&lhs - &rhs).norm_fro())
}

/// Largest `‖[t(u), t(v)]‖_F` over the samples.
pub fn transfer_commutator(chain: &ChainAlgebra, samples: &[(Complex64, Complex64)]) -> Result<f64, AlgebraError> {
    let mut worst: f64 = 0.0;
    for &(u, v) in samples {
        let (tu, tv) = (chain.transfer(u)?, chain.transfer(v)?);
        worst = worst.max(tu.commutator(&tv).norm_fro());
    }
    Ok(worst)
}
