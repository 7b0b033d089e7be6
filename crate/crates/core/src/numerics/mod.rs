//! Scalar representations and bivariate jet arithmetic.
//!
//! Every derivative quoted elsewhere in the crate is read off a [`Jet2`]: a
//! truncated Taylor expansion in two variables. Jets come in two scalar
//! kinds, exact rationals ([`ExactScalar`]) and `f64`, through the
//! [`JetScalar`] trait. [`finite_difference_check`] is the independent
//! pointwise oracle the jets are validated against.

mod exact;
mod finite_diff;
mod jet;
mod logmag;

pub use exact::{
    factorial, ln_biguint, ln_rational, pow_rational, rational_from_f64, rational_to_string,
    root_floor, ExactScalar,
};
pub use finite_diff::{finite_difference_check, DEFAULT_STEP};
pub use jet::{multi_factorial, Jet2, JetScalar, MultiIndex, ScalarKind};
pub use logmag::{log_sum_exp, LogMagnitude};
