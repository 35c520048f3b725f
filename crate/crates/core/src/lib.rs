//! Numerical toolkit for a PT-symmetric two-level Kondo impurity.
//!
//! * [`numerics`]: dense complex linear algebra.
//! * [`impurity`]: the impurity Hamiltonian, its exceptional point and diagnostics.
//! * [`tl_algebra`]: Temperley-Lieb generator, Baxterised R-matrix, transfer matrices and charges.
//! * [`bethe`]: Bethe equations, Gaudin matrix, EP sweeps and monodromy.
//! * [`schur`]: Feshbach-Schur reduction of a driven block model.

pub mod bethe;
pub mod impurity;
pub mod numerics;
pub mod schur;
pub mod tl_algebra;

pub use num_complex::Complex64;
