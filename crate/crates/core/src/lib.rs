//! Numerical toolkit for linear statistics of Ginibre-type random matrices.

pub mod clt;
pub mod ensembles;
pub mod error;
pub mod hermitization;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod quatpfaff;
pub mod special;
pub mod testfn;

pub use error::{Error, Result};
pub use num_complex::Complex64;
