//! Online search on monotone cost curves, with and without predictions.
//!
//! The problem: an input of unknown length keeps going, and the algorithm
//! must always hold a solution covering the prefix seen so far. Solutions of
//! every length can be bought at the offline-optimal price `opt(t)`, which is
//! positive and nondecreasing; when the input stops at length `T`, the
//! algorithm's total spend is judged against `opt(T)`.
//!
//! The crate provides:
//! - [`curve`]: the `opt` step curves, built from breakpoints, coupon menus
//!   (generalized ski rental), or analytic shapes;
//! - [`algorithms`]: the 4-competitive doubling strategy, its
//!   prediction-augmented variant, and generic threshold schedules;
//! - [`loss`]: the asymmetric competitive loss for training log-cost
//!   predictors, plus the symmetric losses it is compared against;
//! - [`learn`]: hypothesis families, empirical loss minimization, agnostic
//!   gap estimation, sample-complexity bounds, and a brute-force optimal
//!   stopping policy;
//! - [`distributions`]: discrete instance distributions and the adversarial
//!   fixtures used by the experiments;
//! - [`harness`]: configurable experiment suites with CSV/JSON reporting;
//! - [`exec`]: the parallel/sequential trial runner.

pub mod algorithms;
pub mod curve;
pub mod distributions;
pub mod error;
pub mod exec;
pub mod harness;
pub mod learn;
pub mod loss;

pub use error::{Error, Result};
