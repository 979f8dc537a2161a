//! Monotone cost curves for online search.
//!
//! An [`OptCurve`] stores `opt(t)`, the cheapest cost of a feasible solution
//! covering a prefix of length `t`, for `t` in `[1, horizon]`. Costs are
//! positive, nondecreasing step functions represented by their breakpoints.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Step function `t -> opt(t)` on the integer domain `[1, horizon]`.
///
/// Invariants, enforced at construction:
/// - the first breakpoint is at length 1;
/// - breakpoint lengths are strictly increasing and at most `horizon`;
/// - costs are finite, positive, and nondecreasing.
#[derive(Clone, Debug, PartialEq)]
pub struct OptCurve {
    /// `(length, cost)` pairs; the cost holds until the next breakpoint.
    steps: Vec<(u32, f64)>,
    horizon: u32,
}

impl OptCurve {
    pub fn from_breakpoints(steps: Vec<(u32, f64)>, horizon: u32) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidCurve("no breakpoints".into()));
        }
        if steps[0].0 != 1 {
            return Err(Error::InvalidCurve(format!(
                "first breakpoint must be at length 1, got {}",
                steps[0].0
            )));
        }
        for pair in steps.windows(2) {
            if pair[1].0 <= pair[0].0 {
                return Err(Error::InvalidCurve(format!(
                    "breakpoint lengths must be strictly increasing, got {} then {}",
                    pair[0].0, pair[1].0
                )));
            }
            if pair[1].1 < pair[0].1 {
                return Err(Error::InvalidCurve(format!(
                    "costs must be nondecreasing, got {} then {}",
                    pair[0].1, pair[1].1
                )));
            }
        }
        for &(t, c) in &steps {
            if !c.is_finite() || c <= 0.0 {
                return Err(Error::InvalidCurve(format!(
                    "cost at length {t} must be finite and positive, got {c}"
                )));
            }
        }
        let last = steps.last().expect("nonempty").0;
        if last > horizon {
            return Err(Error::InvalidCurve(format!(
                "last breakpoint {last} exceeds horizon {horizon}"
            )));
        }
        Ok(Self { steps, horizon })
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn breakpoints(&self) -> &[(u32, f64)] {
        &self.steps
    }

    /// Cheapest cost of the first breakpoint, i.e. `opt(1)`.
    pub fn min_cost(&self) -> f64 {
        self.steps[0].1
    }

    /// Cost at the horizon, i.e. `opt(horizon)`.
    pub fn max_cost(&self) -> f64 {
        self.steps.last().expect("nonempty").1
    }

    /// `opt(t)` for `t` in `[1, horizon]`.
    pub fn opt_at(&self, t: u32) -> Result<f64> {
        if t < 1 || t > self.horizon {
            return Err(Error::LengthOutOfRange {
                t,
                horizon: self.horizon,
            });
        }
        // Last breakpoint with length <= t.
        let idx = self.steps.partition_point(|&(len, _)| len <= t) - 1;
        Ok(self.steps[idx].1)
    }

    /// Smallest `t` with `opt(t) >= target`, or `None` if even `opt(horizon)`
    /// falls short.
    fn first_length_costing_at_least(&self, target: f64) -> Option<u32> {
        let idx = self.steps.partition_point(|&(_, c)| c < target);
        self.steps.get(idx).map(|&(len, _)| len)
    }

    /// Largest `t` with `opt(t) <= budget`, or `None` if even `opt(1)` is too
    /// expensive.
    fn last_length_costing_at_most(&self, budget: f64) -> Option<u32> {
        let idx = self.steps.partition_point(|&(_, c)| c <= budget);
        if idx == 0 {
            return None;
        }
        // The cost at breakpoint idx-1 holds until the next breakpoint.
        Some(match self.steps.get(idx) {
            Some(&(next_len, _)) => next_len - 1,
            None => self.horizon,
        })
    }

    /// Smallest length whose cost reaches `alpha * opt(tau)`, or `None` when
    /// the whole curve stays below that target.
    ///
    /// `alpha` may be below 1, in which case the result can be smaller than
    /// `tau` (it is 1 whenever the target is at most `opt(1)`).
    pub fn min_length(&self, alpha: f64, tau: u32) -> Result<Option<u32>> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidArgument {
                name: "alpha",
                reason: format!("must be finite and positive, got {alpha}"),
            });
        }
        let target = alpha * self.opt_at(tau)?;
        Ok(self.first_length_costing_at_least(target))
    }

    /// Largest length whose cost stays within `alpha * opt(tau)`.
    ///
    /// Errors when even `opt(1)` exceeds the budget, so a successful result
    /// is always a usable prefix length.
    pub fn max_length(&self, alpha: f64, tau: u32) -> Result<u32> {
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::InvalidArgument {
                name: "alpha",
                reason: format!("must be finite and positive, got {alpha}"),
            });
        }
        let budget = alpha * self.opt_at(tau)?;
        self.last_length_costing_at_most(budget)
            .ok_or(Error::NoFeasibleLength {
                budget,
                min_cost: self.min_cost(),
            })
    }

    /// Largest length affordable within an absolute `budget`, or `None` when
    /// even `opt(1)` exceeds it. Used to turn cost predictions into lengths.
    pub fn max_length_at_cost(&self, budget: f64) -> Option<u32> {
        self.last_length_costing_at_most(budget)
    }
}

/// A purchasable coupon: pay `cost` to extend coverage by `duration` steps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coupon {
    pub cost: f64,
    pub duration: u32,
}

/// The coupon menu of a generalized ski-rental instance.
#[derive(Clone, Debug, PartialEq)]
pub struct CouponSet {
    coupons: Vec<Coupon>,
}

impl CouponSet {
    pub fn new(coupons: Vec<Coupon>) -> Result<Self> {
        if coupons.is_empty() {
            return Err(Error::EmptyInput { what: "coupon set" });
        }
        for c in &coupons {
            if !c.cost.is_finite() || c.cost <= 0.0 {
                return Err(Error::InvalidArgument {
                    name: "coupon cost",
                    reason: format!("must be finite and positive, got {}", c.cost),
                });
            }
            if c.duration == 0 {
                return Err(Error::InvalidArgument {
                    name: "coupon duration",
                    reason: "must be at least 1".into(),
                });
            }
        }
        Ok(Self { coupons })
    }

    /// Classic ski rental: rent one day for 1, or buy for `buy_cost` and be
    /// covered until the horizon.
    pub fn classic_ski(buy_cost: f64, horizon: u32) -> Result<Self> {
        Self::new(vec![
            Coupon {
                cost: 1.0,
                duration: 1,
            },
            Coupon {
                cost: buy_cost,
                duration: horizon,
            },
        ])
    }

    pub fn coupons(&self) -> &[Coupon] {
        &self.coupons
    }
}

/// Cheapest-cover curve of a coupon menu: `opt(t)` is the least total cost of
/// a coupon multiset whose durations sum to at least `t`.
pub fn ski_rental_curve(coupons: &CouponSet, horizon: u32) -> Result<OptCurve> {
    if horizon == 0 {
        return Err(Error::InvalidArgument {
            name: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    let mut opt = vec![0.0_f64; horizon as usize + 1];
    for t in 1..=horizon as usize {
        let mut best = f64::INFINITY;
        for c in coupons.coupons() {
            let rest = t.saturating_sub(c.duration as usize);
            best = best.min(c.cost + opt[rest]);
        }
        opt[t] = best;
    }
    let mut steps = Vec::new();
    for t in 1..=horizon as usize {
        if steps.is_empty() || opt[t] != opt[t - 1] {
            steps.push((t as u32, opt[t]));
        }
    }
    OptCurve::from_breakpoints(steps, horizon)
}

/// Parametric curve families used by experiments and the CLI.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum CurveShape {
    /// `opt(t) = t`.
    Linear { horizon: u32 },
    /// `opt(t) = base^(t-1)` for `base > 1`.
    Exponential { base: f64, horizon: u32 },
    /// Explicit breakpoints, validated like any other curve.
    Custom {
        breakpoints: Vec<(u32, f64)>,
        horizon: u32,
    },
}

/// Builds a [`CurveShape`] and checks all costs lie in `[1, exp(max_log_cost)]`,
/// the value range the learning pipeline can represent.
pub fn analytic_curve(shape: &CurveShape, max_log_cost: f64) -> Result<OptCurve> {
    if !max_log_cost.is_finite() || max_log_cost <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "max_log_cost",
            reason: format!("must be finite and positive, got {max_log_cost}"),
        });
    }
    let curve = match shape {
        CurveShape::Linear { horizon } => {
            if *horizon == 0 {
                return Err(Error::InvalidArgument {
                    name: "horizon",
                    reason: "must be at least 1".into(),
                });
            }
            let steps = (1..=*horizon).map(|t| (t, f64::from(t))).collect();
            OptCurve::from_breakpoints(steps, *horizon)?
        }
        CurveShape::Exponential { base, horizon } => {
            if !base.is_finite() || *base <= 1.0 {
                return Err(Error::InvalidArgument {
                    name: "base",
                    reason: format!("must be finite and greater than 1, got {base}"),
                });
            }
            if *horizon == 0 {
                return Err(Error::InvalidArgument {
                    name: "horizon",
                    reason: "must be at least 1".into(),
                });
            }
            let steps = (1..=*horizon)
                .map(|t| (t, base.powi(t as i32 - 1)))
                .collect();
            OptCurve::from_breakpoints(steps, *horizon)?
        }
        CurveShape::Custom {
            breakpoints,
            horizon,
        } => OptCurve::from_breakpoints(breakpoints.clone(), *horizon)?,
    };
    let cap = max_log_cost.exp();
    if curve.min_cost() < 1.0 || curve.max_cost() > cap {
        return Err(Error::InvalidCurve(format!(
            "costs must lie in [1, {cap:.6}], got [{}, {}]",
            curve.min_cost(),
            curve.max_cost()
        )));
    }
    Ok(curve)
}

/// An offline benchmark that overpays by a fixed factor: `buy(t)` returns
/// `ratio * opt(t)`. With `ratio = 1` this is the exact offline optimum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OfflineOracle {
    ratio: f64,
}

impl OfflineOracle {
    pub fn new(ratio: f64) -> Result<Self> {
        if !ratio.is_finite() || ratio < 1.0 {
            return Err(Error::InvalidArgument {
                name: "ratio",
                reason: format!("must be finite and at least 1, got {ratio}"),
            });
        }
        Ok(Self { ratio })
    }

    pub fn exact() -> Self {
        Self { ratio: 1.0 }
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    /// Cost this oracle charges for a solution of length `t`.
    pub fn buy(&self, curve: &OptCurve, t: u32) -> Result<f64> {
        Ok(self.ratio * curve.opt_at(t)?)
    }
}

/// Wire format for curves: either explicit breakpoints or a coupon menu to
/// run through the ski-rental solver.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CurveSpec {
    Breakpoints {
        breakpoints: Vec<(u32, f64)>,
        horizon: Option<u32>,
    },
    Coupons {
        coupons: Vec<(f64, u32)>,
        horizon: u32,
    },
}

impl CurveSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn build(&self) -> Result<OptCurve> {
        match self {
            CurveSpec::Breakpoints {
                breakpoints,
                horizon,
            } => {
                let fallback = breakpoints.last().map(|&(t, _)| t).unwrap_or(0);
                OptCurve::from_breakpoints(breakpoints.clone(), horizon.unwrap_or(fallback))
            }
            CurveSpec::Coupons { coupons, horizon } => {
                let set = CouponSet::new(
                    coupons
                        .iter()
                        .map(|&(cost, duration)| Coupon { cost, duration })
                        .collect(),
                )?;
                ski_rental_curve(&set, *horizon)
            }
        }
    }
}
