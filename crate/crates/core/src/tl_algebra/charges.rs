use num_complex::Complex64;

use super::{AlgebraError, ChainAlgebra};
use crate::numerics::{interpolate_matrix_polynomial, CMatrix};

/// Taylor coefficients `Q_n` of `log(t̂(u) t̂(u₀)⁻¹)` at `u₀ = base_point`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargeSeries {
    pub charges: Vec<CMatrix>,
    pub base_point: Complex64,
}

impl ChargeSeries {
    /// Largest `‖[Q_n, Q_m]‖_F`.
    pub fn pairwise_commutator(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.charges.iter().enumerate() {
            for b in &self.charges[i + 1..] {
                worst = worst.max(a.commutator(b).norm_fro());
            }
        }
        worst
    }

    /// Largest `‖[Q_n, m]‖_F`.
    pub fn commutator_with(&self, m: &CMatrix) -> f64 {
        self.charges.iter().map(|q| q.commutator(m).norm_fro()).fold(0.0, f64::max)
    }
}

fn series_mul(a: &[CMatrix], b: &[CMatrix], order: usize) -> Vec<CMatrix> {
    let dim = a[0].rows();
    (0..=order)
        .map(|n| {
            let mut acc = CMatrix::zeros(dim, dim);
            for k in 0..=n {
                if k < a.len() && n - k < b.len() {
                    acc = &acc + &(&a[k] * &b[n - k]);
                }
            }
            acc
        })
        .collect()
}

/// Builds `t̂(u) = (1 − u)^N t(u)` by interpolation at `N + 1` nodes and
/// expands `log(t̂(u) t̂(0)⁻¹) = Σ_n Q_n uⁿ` to `max_order`.
pub fn extract_charges(chain: &ChainAlgebra, max_order: usize) -> Result<ChargeSeries, AlgebraError> {
    if max_order == 0 {
        return Err(AlgebraError::InvalidInput("max_order must be positive".into()));
    }
    let n = chain.n_sites;
    let nodes: Vec<Complex64> = (0..=n)
        .map(|k| Complex64::from_polar(0.5, 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / (n as f64 + 1.0)))
        .collect();
    let samples = nodes
        .iter()
        .map(|&u| Ok(chain.transfer(u)?.scale((1.0 - u).powu(n as u32))))
        .collect::<Result<Vec<_>, AlgebraError>>()?;
    let poly = interpolate_matrix_polynomial(&nodes, &samples, n)?;
    let t0_inv = poly.coeffs[0].inverse().map_err(|_| AlgebraError::NonInvertible)?;
    let dim = t0_inv.rows();
    // X(u) = t̂(u) t̂(0)⁻¹ − 1 has no constant term.
    let mut x: Vec<CMatrix> = vec![CMatrix::zeros(dim, dim)];
    for k in 1..=max_order {
        x.push(match poly.coeffs.get(k) {
            Some(c) => c * &t0_inv,
            None => CMatrix::zeros(dim, dim),
        });
    }
    let mut log = vec![CMatrix::zeros(dim, dim); max_order + 1];
    let mut power = x.clone();
    for k in 1..=max_order {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
        for (l, p) in log.iter_mut().zip(&power) {
            *l = &*l + &p.scale_re(sign);
        }
        power = series_mul(&power, &x, max_order);
    }
    Ok(ChargeSeries {
        charges: log.into_iter().skip(1).collect(),
        base_point: Complex64::new(0.0, 0.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::impurity::ImpurityParams;
    use crate::numerics::{c64, permutation_operator};
    use crate::tl_algebra::embed_two_site;

    fn chain(n: usize) -> ChainAlgebra {
        ChainAlgebra::build(&ImpurityParams::new(0.0, 0.6, 1.0, 0.0).unwrap(), n).unwrap()
    }

    #[test]
    fn charges_commute() {
        let q = extract_charges(&chain(3), 3).unwrap();
        assert_eq!(q.charges.len(), 3);
        assert!(q.pairwise_commutator() <= 1e-9);
        let t = chain(3).transfer(c64(0.17, -0.3)).unwrap();
        assert!(q.commutator_with(&t) <= 1e-9);
    }

    #[test]
    fn first_charge_is_nearest_neighbour_sum() {
        // Independent oracle: Q₁ = −Σ_j Π_{j,j+1} on the periodic chain.
        for n in 2..=4 {
            let q = extract_charges(&chain(n), 1).unwrap();
            let swap = permutation_operator(2).unwrap();
            let mut expect = CMatrix::zeros(1 << n, 1 << n);
            for j in 0..n {
                let pj = embed_two_site(&swap, j, (j + 1) % n, n);
                expect = &expect - &pj;
            }
            assert!((&q.charges[0] - &expect).max_abs() < 1e-10, "n = {n}");
        }
    }
}
