//! Training losses for log-cost prediction.
//!
//! The competitive loss scores a predicted log-cost `y_hat` against the true
//! log-cost `y` the way the downstream search strategy will pay for it:
//! under-predictions cost exponentially (the strategy falls back to
//! doubling), slight over-predictions cost linearly, and anything past the
//! tolerated overshoot costs a flat 1. It is asymmetric by design — the
//! symmetric losses below are kept for comparison experiments.

use crate::distributions::{DiscreteDistribution, Feature, Sample};
use crate::error::{Error, Result};

fn check_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must be finite and positive, got {eps}"),
        });
    }
    Ok(())
}

/// Competitive loss of predicting `y_hat` when the truth is `y`, at trust
/// level `eps`.
///
/// Piecewise in the signed error `y - y_hat`:
/// - at or below `-ln(5/eps)`: flat `5/eps - 1` (maximal under-prediction);
/// - in `(-ln(5/eps), 0]`: `exp(y_hat - y) - 1`;
/// - in `(0, ln(1 + eps/5)]`: `(y - y_hat) / eps`;
/// - above: flat 1.
///
/// Bounded by `[0, 5/eps - 1]`, zero only at `y = y_hat`.
pub fn competitive_loss(y: f64, y_hat: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    if !y.is_finite() || !y_hat.is_finite() {
        return Err(Error::InvalidArgument {
            name: "y",
            reason: "log-costs must be finite".into(),
        });
    }
    let value = if y <= y_hat - (5.0 / eps).ln() {
        5.0 / eps - 1.0
    } else if y <= y_hat {
        (y_hat - y).exp() - 1.0
    } else if y <= y_hat + (eps / 5.0).ln_1p() {
        (y - y_hat) / eps
    } else {
        1.0
    };
    Ok(value)
}

/// `|y - y_hat|`.
pub fn absolute_loss(y: f64, y_hat: f64) -> f64 {
    (y - y_hat).abs()
}

/// `(y - y_hat)^2`.
pub fn squared_loss(y: f64, y_hat: f64) -> f64 {
    (y - y_hat) * (y - y_hat)
}

/// Mean competitive loss of a predictor over a sample set.
pub fn sample_error(
    predict: impl Fn(&Feature) -> f64,
    samples: &[Sample],
    eps: f64,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::EmptyInput { what: "sample set" });
    }
    let mut total = 0.0;
    for s in samples {
        total += competitive_loss(s.y, predict(&s.x), eps)?;
    }
    Ok(total / samples.len() as f64)
}

/// Expected competitive loss of a predictor under a distribution, computed
/// exactly over the atoms.
pub fn dist_error(
    predict: impl Fn(&Feature) -> f64,
    dist: &DiscreteDistribution,
    eps: f64,
) -> Result<f64> {
    check_eps(eps)?;
    let mut total = 0.0;
    for (s, p) in dist.atoms() {
        total += p * competitive_loss(s.y, predict(&s.x), eps)?;
    }
    Ok(total)
}

/// Probability-weighted mean of the log-costs: the squared-loss minimizer
/// among constant predictors.
pub fn weighted_mean(dist: &DiscreteDistribution) -> f64 {
    dist.expectation(|s| s.y)
}

/// Probability-weighted median of the log-costs: an absolute-loss minimizer
/// among constant predictors.
///
/// Convention when the mass splits exactly in half at an atom boundary: the
/// midpoint of the two straddling values (so a symmetric two-atom
/// distribution yields its center).
pub fn weighted_median(dist: &DiscreteDistribution) -> f64 {
    let mut atoms: Vec<(f64, f64)> = dist.atoms().iter().map(|(s, p)| (s.y, *p)).collect();
    atoms.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite log-costs"));
    let mut acc = 0.0;
    for (i, &(y, p)) in atoms.iter().enumerate() {
        acc += p;
        if acc >= 0.5 {
            if acc == 0.5 && i + 1 < atoms.len() {
                return (y + atoms[i + 1].0) / 2.0;
            }
            return y;
        }
    }
    atoms.last().expect("nonempty").0
}
