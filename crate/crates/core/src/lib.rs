//! Probability that a uniform random permutation has no cycle longer than `r`.
//!
//! Exact values come from [`exactcount`]. Three asymptotic regimes provide
//! estimates of `P(ℓ_r(Z) = n) = ν(n, r)·e^{−H_r}`, where `ℓ_r(Z) = Σ j Z_j`
//! for independent Poisson `Z_j` with mean `1/j`:
//!
//! * small `r` (`r ≤ ln n`): the explicit expansion in [`series`],
//! * intermediate `r`: the saddle-point form in [`saddle`],
//! * large `r` (`r ≥ √(n ln n)`): the Dickman-function form in [`dickman`].
//!
//! [`harness`] picks the regime, compares against exact values and writes
//! error tables.

// Range checks are written `!(x >= lo)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dickman;
pub mod error;
pub mod exactcount;
pub mod harness;
pub mod logvalue;
pub mod numeric;
pub mod saddle;
pub mod series;

pub use dickman::{DickmanContext, DickmanTable, RhoMethod, XiValue};
pub use error::{Error, Result};
pub use exactcount::{CycleBoundCount, HarmonicFactor};
pub use harness::{ComparisonRecord, ExactMode, Format, GridSpec, RRule, Regime};
pub use logvalue::LogValue;
pub use saddle::SaddleSolution;
pub use series::{CoeffTable, RegimeChecked};
