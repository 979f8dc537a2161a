//! Online strategies for the search problem.
//!
//! All strategies buy solutions of growing length as the input keeps going,
//! and must hold a feasible solution (one covering the current prefix) at
//! every step. A run is summarized by its purchase trace and judged by the
//! competitive ratio against `opt(T)` at the realized stopping time `T`.

use serde::{Deserialize, Serialize};

use crate::curve::OptCurve;
use crate::error::{Error, Result};

/// One purchase made during a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Purchase {
    /// Time step at which the purchase is made.
    pub time: u32,
    /// The bought solution covers prefixes up to this length.
    pub covered_until: u32,
    pub cost: f64,
}

/// Full trace of a strategy on one input.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub purchases: Vec<Purchase>,
    pub total_cost: f64,
    /// Realized input length.
    pub stopping_time: u32,
}

impl RunRecord {
    fn new(stopping_time: u32) -> Self {
        Self {
            purchases: Vec::new(),
            total_cost: 0.0,
            stopping_time,
        }
    }

    fn buy(&mut self, time: u32, covered_until: u32, cost: f64) {
        debug_assert!(
            self.purchases.last().map_or(true, |p| p.time < time),
            "purchase times must increase"
        );
        self.purchases.push(Purchase {
            time,
            covered_until,
            cost,
        });
        self.total_cost += cost;
    }

    /// True when every step up to the stopping time was covered by a solution
    /// bought at or before it.
    pub fn is_feasible(&self) -> bool {
        let mut covered = 0u32;
        let mut next = self.purchases.iter().peekable();
        for t in 1..=self.stopping_time {
            while next.peek().is_some_and(|p| p.time <= t) {
                let p = next.next().expect("peeked");
                covered = covered.max(p.covered_until);
            }
            if covered < t {
                return false;
            }
        }
        true
    }

    /// Total cost relative to the offline optimum at the stopping time.
    pub fn competitive_ratio(&self, curve: &OptCurve) -> Result<f64> {
        Ok(self.total_cost / curve.opt_at(self.stopping_time)?)
    }

    pub fn summary(&self, curve: &OptCurve) -> Result<RunSummary> {
        Ok(RunSummary {
            purchases: self
                .purchases
                .iter()
                .map(|p| PurchaseSummary {
                    t: p.time,
                    covered: p.covered_until,
                    cost: p.cost,
                })
                .collect(),
            total: self.total_cost,
            stopping_time: self.stopping_time,
            cr: self.competitive_ratio(curve)?,
        })
    }
}

/// Serializable view of a purchase, as written by the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurchaseSummary {
    pub t: u32,
    pub covered: u32,
    pub cost: f64,
}

/// Serializable view of a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub purchases: Vec<PurchaseSummary>,
    pub total: f64,
    #[serde(rename = "T")]
    pub stopping_time: u32,
    pub cr: f64,
}

/// Shared doubling loop: starting from milestone `tau`, repeatedly buy the
/// solution that lasts until cost would have to double, until the input stops,
/// a milestone reaches `milestone_limit` (exclusive), or the curve tops out.
///
/// When no length ever costs twice the current milestone's cost, the curve is
/// flat from here on; buy the full-horizon solution and stop.
fn doubling_from(
    curve: &OptCurve,
    record: &mut RunRecord,
    start: u32,
    milestone_limit: u32,
    t_stop: u32,
) -> Result<()> {
    let mut tau = start;
    while tau <= t_stop && tau < milestone_limit {
        match curve.min_length(2.0, tau)? {
            Some(next) => {
                // opt(next) >= 2 opt(tau) > opt(tau) forces next > tau.
                record.buy(tau, next - 1, curve.opt_at(next - 1)?);
                tau = next;
            }
            None => {
                record.buy(tau, curve.horizon(), curve.opt_at(curve.horizon())?);
                break;
            }
        }
    }
    Ok(())
}

fn check_stop_time(curve: &OptCurve, t_stop: u32) -> Result<()> {
    if t_stop < 1 || t_stop > curve.horizon() {
        return Err(Error::LengthOutOfRange {
            t: t_stop,
            horizon: curve.horizon(),
        });
    }
    Ok(())
}

/// Doubling strategy: buy ever-longer solutions so that each purchase at
/// least doubles the covered cost level. Never worse than 4-competitive on
/// any monotone curve.
pub fn run_double(curve: &OptCurve, t_stop: u32) -> Result<RunRecord> {
    check_stop_time(curve, t_stop)?;
    let mut record = RunRecord::new(t_stop);
    doubling_from(curve, &mut record, 1, curve.horizon() + 1, t_stop)?;
    debug_assert!(record.is_feasible());
    Ok(record)
}

/// Prediction-augmented doubling.
///
/// Given a predicted stopping time `t_hat` and a trust parameter
/// `epsilon` in `(0, 1]`, the run has three phases:
/// 1. plain doubling while milestones stay below `t1`, the shortest length
///    costing at least `epsilon/5 * opt(t_hat)`;
/// 2. at `t1`, one purchase covering `t2`, the longest length costing at most
///    `(1 + epsilon/5) * opt(t_hat)`;
/// 3. if the input outlives `t2`, doubling resumes from `t2 + 1`.
///
/// Costs at most `(1 + epsilon) * opt(T)` when the prediction is accurate
/// (`T = t_hat`) and at most `5 * (1 + 1/epsilon) * opt(T)` always.
pub fn run_predict_and_double(
    curve: &OptCurve,
    t_stop: u32,
    t_hat: u32,
    epsilon: f64,
) -> Result<RunRecord> {
    check_stop_time(curve, t_stop)?;
    if t_hat < 1 || t_hat > curve.horizon() {
        return Err(Error::LengthOutOfRange {
            t: t_hat,
            horizon: curve.horizon(),
        });
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon > 1.0 {
        return Err(Error::InvalidArgument {
            name: "epsilon",
            reason: format!("must lie in (0, 1], got {epsilon}"),
        });
    }

    let t1 = curve
        .min_length(epsilon / 5.0, t_hat)?
        .expect("target is below opt(t_hat), so some length reaches it");
    let t2 = curve.max_length(1.0 + epsilon / 5.0, t_hat)?;
    debug_assert!(t1 <= t_hat && t_hat <= t2);

    let mut record = RunRecord::new(t_stop);
    // Phase 1: cheap doubling below the prediction's cost scale.
    doubling_from(curve, &mut record, 1, t1, t_stop)?;
    // Phase 2: one purchase sized to the prediction.
    if t_stop >= t1 {
        record.buy(t1, t2, curve.opt_at(t2)?);
    }
    // Phase 3: the prediction was too low; fall back to doubling.
    if t_stop > t2 {
        doubling_from(curve, &mut record, t2 + 1, curve.horizon() + 1, t_stop)?;
    }
    debug_assert!(record.is_feasible());
    Ok(record)
}

/// A deterministic buy-schedule: thresholds `tau_0 < tau_1 < ...` with
/// `tau_0 >= 2`. The run buys `opt(tau_0 - 1)` up front and, whenever the
/// input reaches a threshold, extends to just below the next one.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdStrategy {
    thresholds: Vec<u32>,
}

impl ThresholdStrategy {
    pub fn new(thresholds: Vec<u32>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::EmptyInput {
                what: "threshold list",
            });
        }
        if thresholds[0] < 2 {
            return Err(Error::InvalidArgument {
                name: "thresholds",
                reason: format!("first threshold must be at least 2, got {}", thresholds[0]),
            });
        }
        if thresholds.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument {
                name: "thresholds",
                reason: "thresholds must be strictly increasing".into(),
            });
        }
        Ok(Self { thresholds })
    }

    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }
}

/// Runs a threshold strategy. Each threshold may be at most `horizon + 1`;
/// a final threshold of `horizon + 1` makes the previous purchase cover the
/// whole curve. Errors if the input passes the last threshold.
pub fn run_thresholds(
    curve: &OptCurve,
    t_stop: u32,
    strategy: &ThresholdStrategy,
) -> Result<RunRecord> {
    check_stop_time(curve, t_stop)?;
    let ths = strategy.thresholds();
    if let Some(&too_big) = ths.iter().find(|&&tau| tau > curve.horizon() + 1) {
        return Err(Error::InvalidArgument {
            name: "thresholds",
            reason: format!(
                "threshold {too_big} exceeds horizon + 1 = {}",
                curve.horizon() + 1
            ),
        });
    }

    let mut record = RunRecord::new(t_stop);
    record.buy(1, ths[0] - 1, curve.opt_at(ths[0] - 1)?);
    for (i, &tau) in ths.iter().enumerate() {
        if tau > t_stop {
            break;
        }
        let next = *ths
            .get(i + 1)
            .ok_or(Error::StrategyExhausted { t: t_stop })?;
        record.buy(tau, next - 1, curve.opt_at(next - 1)?);
    }
    debug_assert!(record.is_feasible());
    Ok(record)
}

/// A probability mixture over threshold strategies.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomizedStrategy {
    arms: Vec<(f64, ThresholdStrategy)>,
}

impl RandomizedStrategy {
    pub fn new(arms: Vec<(f64, ThresholdStrategy)>) -> Result<Self> {
        if arms.is_empty() {
            return Err(Error::EmptyInput {
                what: "strategy mixture",
            });
        }
        let mut total = 0.0;
        for (p, _) in &arms {
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidArgument {
                    name: "arm probability",
                    reason: format!("must be finite and positive, got {p}"),
                });
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument {
                name: "arm probability",
                reason: format!("probabilities must sum to 1, got {total}"),
            });
        }
        Ok(Self { arms })
    }

    pub fn deterministic(strategy: ThresholdStrategy) -> Self {
        Self {
            arms: vec![(1.0, strategy)],
        }
    }

    pub fn arms(&self) -> &[(f64, ThresholdStrategy)] {
        &self.arms
    }

    /// Expected competitive ratio at a fixed stopping time.
    pub fn expected_cr(&self, curve: &OptCurve, t_stop: u32) -> Result<f64> {
        let mut acc = 0.0;
        for (p, strategy) in &self.arms {
            acc += p * run_thresholds(curve, t_stop, strategy)?.competitive_ratio(curve)?;
        }
        Ok(acc)
    }
}

/// Length a cost prediction `y_hat = ln(predicted opt)` translates to: the
/// longest prefix affordable at `exp(y_hat)`, clamped up to 1 when even the
/// shortest solution costs more.
pub fn predicted_length(curve: &OptCurve, y_hat: f64) -> u32 {
    curve.max_length_at_cost(y_hat.exp()).unwrap_or(1)
}
