use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{CMatrix, NumericsError};

/// `P(u) = Σ_k coeffs[k] u^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixPolynomial {
    pub coeffs: Vec<CMatrix>,
}

impl MatrixPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn evaluate(&self, u: Complex64) -> CMatrix {
        let mut acc = self.coeffs.last().expect("non-empty polynomial").clone();
        for c in self.coeffs.iter().rev().skip(1) {
            acc = &acc.scale(u) + c;
        }
        acc
    }
}

/// Entrywise interpolation of `samples[i] = P(nodes[i])` by a matrix
/// polynomial of the given degree. With more nodes than `degree + 1` the
/// fit is least squares.
pub fn interpolate_matrix_polynomial(nodes: &[Complex64], samples: &[CMatrix], degree: usize) -> Result<MatrixPolynomial, NumericsError> {
    let m = nodes.len();
    if m == 0 {
        return Err(NumericsError::Empty);
    }
    if samples.len() != m {
        return Err(NumericsError::InconsistentSamples);
    }
    if m < degree + 1 {
        return Err(NumericsError::InsufficientNodes { degree, nodes: m });
    }
    let shape = samples[0].shape();
    if samples.iter().any(|s| s.shape() != shape) {
        return Err(NumericsError::InconsistentSamples);
    }
    let scale = nodes.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..m {
        for j in i + 1..m {
            if (nodes[i] - nodes[j]).norm() <= 1e-14 * scale {
                return Err(NumericsError::DuplicateNodes(i, j));
            }
        }
    }
    let (r, c) = shape;
    let vander = DMatrix::from_fn(m, degree + 1, |i, k| nodes[i].powu(k as u32));
    let rhs = DMatrix::from_fn(m, r * c, |i, e| samples[i].as_slice()[e]);
    let sol = if m == degree + 1 {
        vander.lu().solve(&rhs).ok_or(NumericsError::Singular)?
    } else {
        let dec = vander.svd(true, true);
        dec.solve(&rhs, 1e-14).map_err(|_| NumericsError::Singular)?
    };
    let coeffs = (0..=degree)
        .map(|k| {
            let data = (0..r * c).map(|e| sol[(k, e)]).collect();
            CMatrix::new(r, c, data).expect("consistent shape")
        })
        .collect();
    Ok(MatrixPolynomial { coeffs })
}
