//! Numerical kernels shared by the estimators.

pub mod gamma;
pub mod quad;
pub mod sum;
