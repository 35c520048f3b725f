//! Resolvent pole order, pseudospectral scaling and the summary table.

use num_complex::Complex64;
use serde::Serialize;

use super::{build_himp, jordan_data, spectral_data, ImpurityError, ImpurityHamiltonian, ImpurityParams, Phase};
use crate::numerics::{c64, linear_fit, logspace, CMatrix};

/// Direction of approach to the eigenvalue in the complex plane.
const RAY_ANGLE: f64 = 0.3;

/// Smallest singular value of a 2x2 matrix from `|det|` and `‖A‖_F`.
pub fn smin_2x2(a: &CMatrix) -> f64 {
    let det = a[(0, 0)] * a[(1, 1)] - a[(0, 1)] * a[(1, 0)];
    let f2 = a.as_slice().iter().map(|z| z.norm_sqr()).sum::<f64>();
    let d = det.norm();
    let smax2 = 0.5 * (f2 + (f2 * f2 - 4.0 * d * d).max(0.0).sqrt());
    if smax2 == 0.0 {
        0.0
    } else {
        d / smax2.sqrt()
    }
}

fn shifted(h: &ImpurityHamiltonian, z: Complex64) -> CMatrix {
    &h.matrix - &CMatrix::identity(2).scale(z)
}

/// `‖(z − H)⁻¹‖₂`.
pub fn resolvent_norm(h: &ImpurityHamiltonian, z: Complex64) -> f64 {
    1.0 / smin_2x2(&shifted(h, z))
}

fn upper_eigenvalue(h: &ImpurityHamiltonian) -> Complex64 {
    c64(h.params.epsilon, 0.0) + h.s_eff
}

fn ray(t: f64) -> Complex64 {
    Complex64::from_polar(t, RAY_ANGLE)
}

/// Distance along a fixed ray from `E₊` at which `s_min(H − z)` reaches `eps`.
pub fn pseudospectrum_radius(h: &ImpurityHamiltonian, eps: f64) -> f64 {
    let e = upper_eigenvalue(h);
    let f = |t: f64| smin_2x2(&shifted(h, e + ray(t))) - eps;
    let mut hi = eps.sqrt().min(eps) * 1e-3;
    while f(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Log-log slope of the pseudospectral radius against `eps`.
pub fn pseudospectrum_exponent(h: &ImpurityHamiltonian, eps_grid: &[f64]) -> f64 {
    let x: Vec<f64> = eps_grid.iter().map(|e| e.ln()).collect();
    let y: Vec<f64> = eps_grid.iter().map(|&e| pseudospectrum_radius(h, e).ln()).collect();
    linear_fit(&x, &y).0
}

/// Log-log slope of `‖(z − H)⁻¹‖` against `|z − E₊|`.
pub fn resolvent_pole_order(h: &ImpurityHamiltonian, distances: &[f64]) -> f64 {
    let e = upper_eigenvalue(h);
    let x: Vec<f64> = distances.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = distances.iter().map(|&d| resolvent_norm(h, e + ray(d)).ln()).collect();
    linear_fit(&x, &y).0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticRow {
    pub label: String,
    pub params: ImpurityParams,
    pub phase: Phase,
    pub pole_order: f64,
    pub pseudospectrum_exponent: f64,
    pub jordan_residual: Option<f64>,
    pub eigenvector_condition: Option<f64>,
}

/// Default probe grids: resolvent distances and pseudospectral levels.
pub fn default_grids() -> (Vec<f64>, Vec<f64>) {
    (logspace(1e-6, 1e-4, 9), logspace(1e-12, 1e-8, 9))
}

pub fn diagnostic_row(label: &str, params: ImpurityParams) -> Result<DiagnosticRow, ImpurityError> {
    let h = build_himp(params)?;
    let (dist, eps) = default_grids();
    let at_ep = h.phase == Phase::Exceptional;
    Ok(DiagnosticRow {
        label: label.to_string(),
        params,
        phase: h.phase,
        pole_order: resolvent_pole_order(&h, &dist),
        pseudospectrum_exponent: pseudospectrum_exponent(&h, &eps),
        jordan_residual: if at_ep { Some(jordan_data(&h)?.residual) } else { None },
        eigenvector_condition: if at_ep {
            None
        } else {
            Some(spectral_data(&h)?.eigenvector_condition())
        },
    })
}

pub fn diagnostics_table(scenarios: &[(String, ImpurityParams)]) -> Result<Vec<DiagnosticRow>, ImpurityError> {
    scenarios.iter().map(|(l, p)| diagnostic_row(l, *p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smin_matches_svd() {
        let a = CMatrix::from_rows(&[vec![c64(0.3, 1.0), c64(-2.0, 0.1)], vec![c64(0.5, 0.5), c64(1.5, -0.7)]]);
        let s = crate::numerics::svd(&a).unwrap();
        assert!((smin_2x2(&a) - s.min()).abs() < 1e-14);
    }

    #[test]
    fn pole_orders() {
        let (d, eps) = default_grids();
        let ep = build_himp(ImpurityParams::new(0.0, 1.0, 1.0, 0.0).unwrap()).unwrap();
        assert!((resolvent_pole_order(&ep, &d) + 2.0).abs() < 0.05);
        assert!((pseudospectrum_exponent(&ep, &eps) - 0.5).abs() < 0.02);
        let off = build_himp(ImpurityParams::new(0.0, 0.5, 1.0, 0.0).unwrap()).unwrap();
        assert!((resolvent_pole_order(&off, &d) + 1.0).abs() < 0.02);
        assert!((pseudospectrum_exponent(&off, &eps) - 1.0).abs() < 0.02);
    }
}
