//! Two-body S-matrix, its scattering phase and branch bookkeeping.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::BetheError;
use crate::numerics::c64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Relative distance to an S-matrix pole treated as a collision.
pub const POLE_GUARD: f64 = 1e-10;

/// Breit-Wigner amplitude `S(u) = (u − iW)/(u + iW)`.
pub fn smatrix_value(u: Complex64, width: Complex64) -> Result<Complex64, BetheError> {
    let den = u + I * width;
    if den.norm() <= POLE_GUARD * width.norm().max(1.0) {
        return Err(BetheError::PoleCollision(u));
    }
    Ok((u - I * width) / den)
}

/// TL form of the amplitude: `f(u) = −iW/(u + iW)` and the residual of
/// `S = 1 + 2f` on the antisymmetric line (`e₁₂ = 2P₋`).
pub fn smatrix_tl_form(u: Complex64, width: Complex64) -> Result<(Complex64, f64), BetheError> {
    let s = smatrix_value(u, width)?;
    let f = -I * width / (u + I * width);
    Ok((f, (1.0 + 2.0 * f - s).norm()))
}

/// `δ(u) = π − 2·arctan(u/W)` on the principal branch of `arctan`.
pub fn phase(u: Complex64, width: Complex64) -> Result<Complex64, BetheError> {
    let z = u / width;
    let near = |p: Complex64| (z - p).norm() <= POLE_GUARD;
    if !z.re.is_finite() || !z.im.is_finite() || near(I) || near(-I) {
        return Err(BetheError::PoleCollision(u));
    }
    Ok(c64(PI, 0.0) - 2.0 * z.atan())
}

/// `∂δ/∂u = −2W/(u² + W²)`.
pub fn phase_derivative(u: Complex64, width: Complex64) -> Result<Complex64, BetheError> {
    let den = u * u + width * width;
    if den.norm() <= POLE_GUARD * width.norm_sqr().max(1.0) {
        return Err(BetheError::PoleCollision(u));
    }
    Ok(-2.0 * width / den)
}

/// Phase continuation state. Without anchors phases stay on the principal
/// branch; with anchors each `δ_jℓ` is shifted by the multiple of 2π that
/// brings it closest to the anchor, the continued value at the previous
/// point of a path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseBranches {
    n: usize,
    anchors: Vec<Complex64>,
}

impl PhaseBranches {
    /// Principal-branch phases for `n` roots.
    pub fn new(n: usize) -> Self {
        Self { n, anchors: Vec::new() }
    }

    /// Anchors at the principal values of a root configuration.
    pub fn anchored(k: &[Complex64], widths: &[Complex64]) -> Result<Self, BetheError> {
        let mut b = Self::new(k.len());
        b.advance(k, widths)?;
        Ok(b)
    }

    pub fn is_principal(&self) -> bool {
        self.anchors.is_empty()
    }

    /// Continued value of the phase between roots `j` and `l`.
    pub fn continued(&self, j: usize, l: usize, principal: Complex64) -> Complex64 {
        match self.anchors.get(j * self.n + l) {
            Some(&a) => principal + 2.0 * PI * nearest_branch(principal, a),
            None => principal,
        }
    }

    /// Moves the anchors to the continued phases at a new configuration.
    pub fn advance(&mut self, k: &[Complex64], widths: &[Complex64]) -> Result<(), BetheError> {
        let n = k.len();
        let mut next = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for l in (0..n).filter(|&l| l != j) {
                next[j * n + l] = self.continued(j, l, phase(k[j] - k[l], widths[j * n + l])?);
            }
        }
        self.n = n;
        self.anchors = next;
        Ok(())
    }

    /// Net number of 2π windings accumulated by the continued phases.
    pub fn windings(&self, k: &[Complex64], widths: &[Complex64]) -> Result<Vec<f64>, BetheError> {
        let n = k.len();
        let mut out = vec![0.0; n * n];
        if self.is_principal() {
            return Ok(out);
        }
        for j in 0..n {
            for l in (0..n).filter(|&l| l != j) {
                let p = phase(k[j] - k[l], widths[j * n + l])?;
                out[j * n + l] = nearest_branch(p, self.anchors[j * n + l]);
            }
        }
        Ok(out)
    }
}

/// Offset `m` such that `principal + 2πm` is closest to `anchor`.
pub fn nearest_branch(principal: Complex64, anchor: Complex64) -> f64 {
    ((anchor.re - principal.re) / (2.0 * PI)).round()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        c64(x, 0.0)
    }

    #[test]
    fn smatrix_examples() {
        assert!((smatrix_value(r(0.0), r(1.3)).unwrap() + 1.0).norm() < 1e-15);
        assert!((smatrix_value(r(1e12), r(1.3)).unwrap() - 1.0).norm() < 1e-11);
        let s = smatrix_value(r(1.3), r(1.3)).unwrap();
        assert!((s - c64(0.0, -1.0)).norm() < 1e-15);
        assert!(smatrix_value(c64(0.0, -1.3), r(1.3)).is_err());
        for x in [-3.0, -0.2, 0.7, 5.0] {
            assert!((smatrix_value(r(x), r(0.8)).unwrap().norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn tl_form() {
        let (f, res) = smatrix_tl_form(r(0.0), r(2.0)).unwrap();
        assert!((f + 1.0).norm() < 1e-15 && res < 1e-15);
        let (u, w) = (c64(0.3, -0.2), c64(1.1, 0.4));
        let (f, res) = smatrix_tl_form(u, w).unwrap();
        let lambda = 2.0 * I * w / (u + I * w);
        assert!((lambda + 2.0 * f).norm() < 1e-15 && res < 1e-12);
        let (f, _) = smatrix_tl_form(r(1e12), r(1.0)).unwrap();
        assert!(f.norm() < 1e-11);
    }

    #[test]
    fn phase_examples() {
        assert!((phase(r(0.0), r(1.0)).unwrap() - PI).norm() < 1e-15);
        assert!((phase(r(0.7), r(0.7)).unwrap() - PI / 2.0).norm() < 1e-15);
        let s = 1e-4;
        let p = phase(c64(0.0, 2.0 * s), r(1.0)).unwrap();
        assert!((p - PI).norm() < 1e-3);
        // closed-form derivative against a central difference
        let (u, w, h) = (c64(0.4, 0.1), c64(0.9, -0.2), 1e-6);
        let fd = (phase(u + h, w).unwrap() - phase(u - h, w).unwrap()) / (2.0 * h);
        assert!((fd - phase_derivative(u, w).unwrap()).norm() < 1e-8);
    }

    #[test]
    fn continued_phase_follows_anchor() {
        let w = [r(0.0), r(1.0), r(1.0), r(0.0)];
        let k0 = [c64(0.0, 0.0), c64(0.5, 0.0)];
        let mut b = PhaseBranches::anchored(&k0, &w).unwrap();
        let p = phase(r(-0.5), r(1.0)).unwrap();
        assert_eq!(b.continued(0, 1, p), p);
        assert_eq!(b.continued(0, 1, p - 2.0 * PI), p);
        // wind the relative rapidity around the pole at u = i·W
        let steps = 64;
        for n in 1..=steps {
            let th = 2.0 * PI * n as f64 / steps as f64;
            let u = c64(0.0, 1.0) + 0.5 * Complex64::from_polar(1.0, th - PI / 2.0);
            b.advance(&[u, c64(0.0, 0.0)], &w).unwrap();
        }
        let wind = b.windings(&[c64(0.0, 0.5), c64(0.0, 0.0)], &w).unwrap();
        assert_eq!(wind[1].abs(), 1.0);
    }

    #[test]
    fn phase_is_minus_i_log_of_conjugate_amplitude() {
        // δ(u) = +i·ln S(u) = −i·ln S(u)* for real u and real width.
        for x in [-2.0, -0.3, 0.5, 4.0] {
            let d = phase(r(x), r(1.2)).unwrap();
            let s = smatrix_value(r(x), r(1.2)).unwrap();
            assert!((Complex64::from_polar(1.0, d.re) - s.conj()).norm() < 1e-14);
        }
    }
}
