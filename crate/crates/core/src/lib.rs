//! Weight-sequence analysis for Denjoy-Carleman classes, Ostrowski functions,
//! brick/block/flat function constructions under the polar blow-up, and exact
//! or high-precision certification of their finite-order derivative bounds.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: log-domain magnitudes, exact rationals and bivariate jets.
//! * [`weights`]: weight sequences and the class diagnostics built on them.
//! * [`ostrowski`]: the Ostrowski function of a weight sequence.
//! * [`bricks`], [`blocks`], [`flat`]: the function constructions and their
//!   bound checks.
//! * [`counterexample`]: the slow step sequence with a strict square/shift gap.
//! * [`report`], [`selftest`]: machine-readable reports and the bundled checks.

pub mod blocks;
pub mod bricks;
pub mod counterexample;
pub mod error;
pub mod flat;
pub mod numerics;
pub mod ostrowski;
pub mod report;
pub mod sampling;
pub mod selftest;
pub mod weights;

pub use error::{Error, Result};
pub use numerics::{ExactScalar, Jet2, JetScalar, LogMagnitude};
pub use weights::WeightSequence;
