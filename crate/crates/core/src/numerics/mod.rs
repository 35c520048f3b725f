//! Dense complex linear algebra shared by the other modules: the `CMatrix`
//! type, Kronecker products, the swap operator, singular values and
//! entrywise polynomial interpolation of matrix-valued functions.

mod interp;
mod matrix;

pub use interp::{interpolate_matrix_polynomial, MatrixPolynomial};
pub use matrix::{c64, kron, permutation_operator, CMatrix};

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericsError {
    #[error("{op}: shape mismatch {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("matrix is not square: {0:?}")]
    NotSquare((usize, usize)),
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,
    #[error("empty input")]
    Empty,
    #[error("interpolation nodes {0} and {1} coincide")]
    DuplicateNodes(usize, usize),
    #[error("degree {degree} needs at least {} nodes, got {nodes}", degree + 1)]
    InsufficientNodes { degree: usize, nodes: usize },
    #[error("samples have inconsistent shapes or count")]
    InconsistentSamples,
}

/// Singular values in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Svd {
    pub singular_values: Vec<f64>,
}

impl Svd {
    pub fn max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `σ_max / σ_min`, infinite for a rank-deficient matrix.
    pub fn condition(&self) -> f64 {
        let lo = self.min();
        if lo == 0.0 {
            f64::INFINITY
        } else {
            self.max() / lo
        }
    }
}

/// Singular values of `m` (Golub-Kahan bidiagonalisation via `nalgebra`).
pub fn svd(m: &CMatrix) -> Result<Svd, NumericsError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(NumericsError::Empty);
    }
    if m.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(NumericsError::SvdNoConvergence);
    }
    let dec = nalgebra::linalg::SVD::try_new(m.to_nalgebra(), false, false, f64::EPSILON, 10_000).ok_or(NumericsError::SvdNoConvergence)?;
    let mut sv: Vec<f64> = dec.singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    Ok(Svd { singular_values: sv })
}

/// Full SVD `m = U Σ V†`, singular values descending.
pub fn svd_full(m: &CMatrix) -> Result<(CMatrix, Vec<f64>, CMatrix), NumericsError> {
    if m.rows() == 0 || m.cols() == 0 {
        return Err(NumericsError::Empty);
    }
    let dec = nalgebra::linalg::SVD::try_new(m.to_nalgebra(), true, true, f64::EPSILON, 10_000).ok_or(NumericsError::SvdNoConvergence)?;
    let u = dec.u.ok_or(NumericsError::SvdNoConvergence)?;
    let vt = dec.v_t.ok_or(NumericsError::SvdNoConvergence)?;
    let k = dec.singular_values.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| dec.singular_values[b].total_cmp(&dec.singular_values[a]));
    let u_sorted = CMatrix::from_fn(u.nrows(), k, |i, j| u[(i, order[j])]);
    let vt_sorted = CMatrix::from_fn(k, vt.ncols(), |i, j| vt[(order[i], j)]);
    let s = order.iter().map(|&i| dec.singular_values[i]).collect();
    Ok((u_sorted, s, vt_sorted.adjoint()))
}

/// Least-squares fit of a line `y = a + b x`; returns `(b, a, stderr_b)`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icept = my - slope * mx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - icept - slope * a).powi(2)).sum();
    let se = if x.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    (slope, icept, se)
}

/// `n` log-spaced points between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n).map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64)).collect()
}

/// Pauli matrices and the 2x2 identity.
pub mod pauli {
    use super::{c64, CMatrix};

    pub fn id() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_rows(&[vec![c64(0.0, 0.0), c64(0.0, -1.0)], vec![c64(0.0, 1.0), c64(0.0, 0.0)]])
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, -1.0]])
    }
}

/// Euclidean norm of a complex vector.
pub fn vnorm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
