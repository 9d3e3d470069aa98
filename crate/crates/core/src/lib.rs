//! Degenerated third-order linear recurrences.
//!
//! A recurrence `U_n = a1 U_{n-1} + a2 U_{n-2} + a3 U_{n-3}` is *degenerated*
//! when its characteristic roots are real and simple with two of equal
//! absolute value: `-lambda3 < lambda2 < lambda3` and the third root is
//! `-lambda3`. For such sequences the ratio of consecutive terms splits into
//! an even-index limit `L1` and an odd-index limit `L2` with
//! `L1 * L2 = lambda3^2`, and a quadratic in `u2` picks out the initial
//! conditions for which the ratio converges outright.
//!
//! All identities can be checked on an exact rational backend; empirical
//! ratio estimators run on the float backend.

pub mod binet;
pub mod convergence;
pub mod limits;
pub mod numerics;
pub mod recurrence;

pub use binet::{BinetCoefficients, CoefficientMatrix};
pub use convergence::{ConvergedLimit, ConvergenceSolutions};
pub use limits::{LimitReport, Regime};
pub use numerics::{Backend, NumericsError, Scalar, Tolerance};
pub use recurrence::{ClassTag, Classification, DegenerateRoots, RecurrenceSpec};
