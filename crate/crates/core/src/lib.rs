//! Semi-infinite quasi-Toeplitz (QT) matrices and solvers for Sylvester and
//! Stein equations whose coefficients are QT matrices.
//!
//! A QT matrix is `T(a) + E`: a semi-infinite Toeplitz matrix with entries
//! `T(a)[i][j] = a_{j-i}` (positive powers of `z` on the first row) plus a
//! compact correction `E = U V*` stored by its factors.

pub mod error;
pub mod experiments;
pub mod linalg;
pub mod operator;
pub mod qt;
pub mod rational_krylov;
pub mod stein;
pub mod symbol;
pub mod sylvester;

pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use operator::LinearOperator;
pub use qt::{BlockVector, Correction, NormKind, QtMatrix};
pub use symbol::LaurentSymbol;
pub use sylvester::{Pole, PoleSequence, SolveOptions, SolveReport, SolveStatus};
