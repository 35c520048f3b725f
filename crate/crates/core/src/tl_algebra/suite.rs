use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::chain::rll_residual_for;
use super::{
    boundary_residual, braid_ybe_residual, rtt_residual, tl_residuals, transfer_commutator, unitarity_check, ybe_residual, AlgebraError,
    BaxterizedR, ChainAlgebra,
};
use crate::impurity::{gamma_eff, ImpurityParams};

/// Worst residual per identity family over a randomised sweep. All norms
/// are Frobenius norms.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct SuiteReport {
    pub seed: u64,
    pub draws: usize,
    pub samples_per_draw: usize,
    pub tl: f64,
    pub ybe_ordinary: f64,
    pub ybe_braid: f64,
    pub unitarity: f64,
    pub boundary: f64,
    pub rll: f64,
    /// `rtt[n − 1]` for chains of `n = 1..=4` sites.
    pub rtt: [f64; 4],
    /// Transfer-matrix commutators for `N = 2..=4`.
    pub transfer_commutator: f64,
}

impl SuiteReport {
    /// Largest residual over operators of dimension ≤ 8.
    pub fn small_dim_max(&self) -> f64 {
        [
            self.tl,
            self.ybe_ordinary,
            self.ybe_braid,
            self.unitarity,
            self.boundary,
            self.rll,
            self.rtt[0],
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Largest residual over operators of dimension > 8.
    pub fn large_dim_max(&self) -> f64 {
        [self.rtt[1], self.rtt[2], self.rtt[3], self.transfer_commutator]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, small_tol: f64, large_tol: f64) -> bool {
        self.small_dim_max() <= small_tol && self.large_dim_max() <= large_tol
    }
}

/// Draws cycle through the unbroken, near-EP (`δ = 1e-4`) and broken regimes.
pub fn random_params(rng: &mut impl Rng, index: usize) -> ImpurityParams {
    let gamma = rng.random_range(0.5..2.0);
    let j = rng.random_range(0.0..1.0);
    let eps = rng.random_range(-1.0..1.0);
    let g = gamma_eff(gamma, j);
    let beta = match index % 3 {
        0 => rng.random_range(0.0..0.95) * g,
        1 => g - 1e-4,
        _ => rng.random_range(1.05..2.0) * g,
    };
    ImpurityParams::new(eps, beta, gamma, j).expect("valid by construction")
}

/// Complex spectral pair kept at distance ≥ 0.2 from every pole that
/// the checks touch.
pub fn random_spectral_pair(rng: &mut impl Rng) -> (Complex64, Complex64) {
    loop {
        let u = Complex64::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        let v = Complex64::new(rng.random_range(-0.6..0.6), rng.random_range(-0.6..0.6));
        let risky = [u, v, u - v, u + v, -u, -v];
        if risky.iter().all(|x| (1.0 - x).norm() >= 0.2) {
            return (u, v);
        }
    }
}

pub fn identity_suite(seed: u64, draws: usize, samples_per_draw: usize) -> Result<SuiteReport, AlgebraError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SuiteReport {
        seed,
        draws,
        samples_per_draw,
        ..Default::default()
    };
    for d in 0..draws {
        let p = random_params(&mut rng, d);
        let r = BaxterizedR::from_params(&p)?;
        rep.tl = rep.tl.max(tl_residuals(&r.generator, 3)?.max());
        rep.boundary = rep.boundary.max(boundary_residual(&r)?);
        let chains = (1..=4).map(|n| ChainAlgebra::new(r.clone(), n)).collect::<Result<Vec<_>, _>>()?;
        for _ in 0..samples_per_draw {
            let (u, v) = random_spectral_pair(&mut rng);
            rep.ybe_ordinary = rep.ybe_ordinary.max(ybe_residual(&r, u, v)?);
            rep.ybe_braid = rep.ybe_braid.max(braid_ybe_residual(&r, u, v)?);
            rep.unitarity = rep.unitarity.max(unitarity_check(&r, u)?);
            rep.rll = rep.rll.max(rll_residual_for(&r, u, v)?);
            for (k, ch) in chains.iter().enumerate() {
                rep.rtt[k] = rep.rtt[k].max(rtt_residual(ch, u, v)?);
            }
            for ch in &chains[1..] {
                rep.transfer_commutator = rep.transfer_commutator.max(transfer_commutator(ch, &[(u, v)])?);
            }
        }
    }
    Ok(rep)
}
