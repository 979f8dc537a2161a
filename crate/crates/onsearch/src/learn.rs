//! Training predictors for the search strategies.
//!
//! Hypothesis families are finite, explicitly enumerable sets of log-cost
//! predictors. Training minimizes the empirical competitive loss; the other
//! exports bound the sample complexity of doing so, estimate how far a family
//! is from realizing a distribution, and brute-force the best stopping policy
//! a distribution admits at all.

use serde::{Deserialize, Serialize};

use crate::algorithms::{
    predicted_length, run_predict_and_double, run_thresholds, RunRecord, ThresholdStrategy,
};
use crate::curve::OptCurve;
use crate::distributions::{DiscreteDistribution, Feature, Sample};
use crate::error::{Error, Result};
use crate::loss::{competitive_loss, sample_error};

/// Largest family size [`HypothesisFamily::enumerate`] will materialize.
pub const MAX_ENUMERATION: u64 = 200_000;

/// Most distinct outcome levels [`optimal_policy_bruteforce`] will accept
/// per feature (it enumerates all `2^(k-1)` level subsets).
pub const MAX_POLICY_LEVELS: usize = 12;

/// Evenly spaced values `lo, lo + step, ..., hi`.
///
/// The last value is clamped to exactly `hi` so grids stay inside the stated
/// range despite rounding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct ValueGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    lo: f64,
    hi: f64,
    step: f64,
}

impl TryFrom<RawGrid> for ValueGrid {
    type Error = Error;
    fn try_from(raw: RawGrid) -> Result<Self> {
        ValueGrid::new(raw.lo, raw.hi, raw.step)
    }
}

impl From<ValueGrid> for RawGrid {
    fn from(g: ValueGrid) -> Self {
        RawGrid {
            lo: g.lo,
            hi: g.hi,
            step: g.step,
        }
    }
}

impl ValueGrid {
    pub fn new(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidArgument {
                name: "grid range",
                reason: format!("need finite lo <= hi, got [{lo}, {hi}]"),
            });
        }
        if !step.is_finite() || step <= 0.0 {
            return Err(Error::InvalidArgument {
                name: "grid step",
                reason: format!("must be finite and positive, got {step}"),
            });
        }
        let len = ((hi - lo) / step + 1e-9).floor() as u64 + 1;
        if len > MAX_ENUMERATION {
            return Err(Error::CapacityExceeded {
                what: "value grid",
                size: len,
                limit: MAX_ENUMERATION,
            });
        }
        Ok(Self { lo, hi, step })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        (((self.hi - self.lo) / self.step + 1e-9).floor() as usize) + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len())
            .map(|k| {
                let v = self.lo + k as f64 * self.step;
                if v > self.hi {
                    self.hi
                } else {
                    v
                }
            })
            .collect()
    }
}

/// The structural form of a hypothesis family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilyKind {
    /// One shared prediction for every feature.
    Constant { grid: ValueGrid },
    /// An independent grid value per key; unseen features get the grid's
    /// first value.
    Lookup { keys: Vec<u32>, grid: ValueGrid },
    /// A monotone step: one value below a threshold, a value at least as
    /// large at or above it.
    MonotoneStep {
        thresholds: Vec<f64>,
        grid: ValueGrid,
    },
    /// `clamp(intercept + slope * x, 0, cap)` over real features.
    Affine {
        intercepts: ValueGrid,
        slopes: Vec<f64>,
        cap: f64,
    },
}

/// A finite set of predictors with a declared pseudo-dimension, used by the
/// sample-complexity bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyKind", into = "FamilyKind")]
pub struct HypothesisFamily {
    kind: FamilyKind,
    pseudo_dimension: u32,
}

impl TryFrom<FamilyKind> for HypothesisFamily {
    type Error = Error;
    fn try_from(kind: FamilyKind) -> Result<Self> {
        HypothesisFamily::from_kind(kind)
    }
}

impl From<HypothesisFamily> for FamilyKind {
    fn from(f: HypothesisFamily) -> Self {
        f.kind
    }
}

impl HypothesisFamily {
    pub fn from_kind(kind: FamilyKind) -> Result<Self> {
        match &kind {
            FamilyKind::Constant { .. } => {}
            FamilyKind::Lookup { keys, .. } => {
                if keys.is_empty() {
                    return Err(Error::EmptyInput { what: "key list" });
                }
                if keys.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(Error::InvalidArgument {
                        name: "keys",
                        reason: "must be strictly increasing".into(),
                    });
                }
            }
            FamilyKind::MonotoneStep { thresholds, .. } => {
                if thresholds.is_empty() {
                    return Err(Error::EmptyInput {
                        what: "threshold list",
                    });
                }
                if thresholds.iter().any(|t| !t.is_finite()) {
                    return Err(Error::InvalidArgument {
                        name: "thresholds",
                        reason: "must be finite".into(),
                    });
                }
            }
            FamilyKind::Affine { slopes, cap, .. } => {
                if slopes.is_empty() {
                    return Err(Error::EmptyInput { what: "slope list" });
                }
                if slopes.iter().any(|s| !s.is_finite()) {
                    return Err(Error::InvalidArgument {
                        name: "slopes",
                        reason: "must be finite".into(),
                    });
                }
                if !cap.is_finite() || *cap <= 0.0 {
                    return Err(Error::InvalidArgument {
                        name: "cap",
                        reason: format!("must be finite and positive, got {cap}"),
                    });
                }
            }
        }
        let pseudo_dimension = match &kind {
            FamilyKind::Constant { .. } => 1,
            FamilyKind::Lookup { keys, .. } => keys.len() as u32,
            FamilyKind::MonotoneStep { .. } => 2,
            FamilyKind::Affine { .. } => 2,
        };
        Ok(Self {
            kind,
            pseudo_dimension,
        })
    }

    pub fn constant(grid: ValueGrid) -> Result<Self> {
        Self::from_kind(FamilyKind::Constant { grid })
    }

    pub fn lookup(keys: Vec<u32>, grid: ValueGrid) -> Result<Self> {
        Self::from_kind(FamilyKind::Lookup { keys, grid })
    }

    pub fn monotone_step(thresholds: Vec<f64>, grid: ValueGrid) -> Result<Self> {
        Self::from_kind(FamilyKind::MonotoneStep { thresholds, grid })
    }

    pub fn affine(intercepts: ValueGrid, slopes: Vec<f64>, cap: f64) -> Result<Self> {
        Self::from_kind(FamilyKind::Affine {
            intercepts,
            slopes,
            cap,
        })
    }

    /// Overrides the declared pseudo-dimension (it feeds the sample bounds,
    /// not the enumeration).
    pub fn with_pseudo_dimension(mut self, d: u32) -> Self {
        self.pseudo_dimension = d;
        self
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.kind
    }

    pub fn pseudo_dimension(&self) -> u32 {
        self.pseudo_dimension
    }

    /// Number of members enumeration would produce.
    pub fn size(&self) -> Result<u64> {
        let too_big = || Error::CapacityExceeded {
            what: "hypothesis family",
            size: u64::MAX,
            limit: MAX_ENUMERATION,
        };
        Ok(match &self.kind {
            FamilyKind::Constant { grid } => grid.len() as u64,
            FamilyKind::Lookup { keys, grid } => (grid.len() as u64)
                .checked_pow(u32::try_from(keys.len()).map_err(|_| too_big())?)
                .ok_or_else(too_big)?,
            FamilyKind::MonotoneStep { thresholds, grid } => {
                let g = grid.len() as u64;
                (thresholds.len() as u64)
                    .checked_mul(g.checked_mul(g + 1).ok_or_else(too_big)? / 2)
                    .ok_or_else(too_big)?
            }
            FamilyKind::Affine {
                intercepts, slopes, ..
            } => (intercepts.len() as u64)
                .checked_mul(slopes.len() as u64)
                .ok_or_else(too_big)?,
        })
    }

    /// Materializes every member, in a fixed canonical order (ties in
    /// training break toward the earliest member).
    pub fn enumerate(&self) -> Result<Vec<Predictor>> {
        let size = self.size()?;
        if size > MAX_ENUMERATION {
            return Err(Error::CapacityExceeded {
                what: "hypothesis family",
                size,
                limit: MAX_ENUMERATION,
            });
        }
        let mut out = Vec::with_capacity(size as usize);
        match &self.kind {
            FamilyKind::Constant { grid } => {
                for v in grid.values() {
                    out.push(Predictor::Constant(v));
                }
            }
            FamilyKind::Lookup { keys, grid } => {
                let values = grid.values();
                let g = values.len();
                let k = keys.len();
                // Odometer over value indices, first key most significant.
                for idx in 0..size {
                    let mut digits = Vec::with_capacity(k);
                    let mut rest = idx;
                    for _ in 0..k {
                        digits.push((rest % g as u64) as usize);
                        rest /= g as u64;
                    }
                    digits.reverse();
                    out.push(Predictor::Lookup {
                        keys: keys.clone(),
                        values: digits.iter().map(|&d| values[d]).collect(),
                        fallback: values[0],
                    });
                }
            }
            FamilyKind::MonotoneStep { thresholds, grid } => {
                let values = grid.values();
                for &threshold in thresholds {
                    for (i, &below) in values.iter().enumerate() {
                        for &at_or_above in &values[i..] {
                            out.push(Predictor::Step {
                                threshold,
                                below,
                                at_or_above,
                            });
                        }
                    }
                }
            }
            FamilyKind::Affine {
                intercepts,
                slopes,
                cap,
            } => {
                for intercept in intercepts.values() {
                    for &slope in slopes {
                        out.push(Predictor::Affine {
                            intercept,
                            slope,
                            cap: *cap,
                        });
                    }
                }
            }
        }
        Ok(out)
    }
}

/// A concrete log-cost predictor.
#[derive(Clone, Debug, PartialEq)]
pub enum Predictor {
    Constant(f64),
    Lookup {
        keys: Vec<u32>,
        values: Vec<f64>,
        fallback: f64,
    },
    Step {
        threshold: f64,
        below: f64,
        at_or_above: f64,
    },
    Affine {
        intercept: f64,
        slope: f64,
        cap: f64,
    },
}

impl Predictor {
    /// Keys act as their integer coordinate for the parametric predictors.
    fn coordinate(x: &Feature) -> f64 {
        match *x {
            Feature::Key(k) => f64::from(k),
            Feature::Real(v) => v,
        }
    }

    pub fn predict(&self, x: &Feature) -> f64 {
        match self {
            Predictor::Constant(v) => *v,
            Predictor::Lookup {
                keys,
                values,
                fallback,
            } => match x {
                Feature::Key(k) => match keys.binary_search(k) {
                    Ok(i) => values[i],
                    Err(_) => *fallback,
                },
                Feature::Real(_) => *fallback,
            },
            Predictor::Step {
                threshold,
                below,
                at_or_above,
            } => {
                if Self::coordinate(x) < *threshold {
                    *below
                } else {
                    *at_or_above
                }
            }
            Predictor::Affine {
                intercept,
                slope,
                cap,
            } => (intercept + slope * Self::coordinate(x)).clamp(0.0, *cap),
        }
    }
}

/// Result of a training run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainedPredictor {
    pub predictor: Predictor,
    /// Trust level the competitive loss was evaluated at.
    pub epsilon: f64,
    /// Mean (or expected) competitive loss the chosen member attains.
    pub training_error: f64,
}

fn check_training_eps(eps: f64) -> Result<()> {
    if !eps.is_finite() || eps <= 0.0 || eps > 2.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must lie in (0, 2], got {eps}"),
        });
    }
    Ok(())
}

/// Label paired with its sample weight.
type WeightedLabel = (f64, f64);

/// First grid value minimizing the weighted competitive loss over `items`.
fn best_grid_value(values: &[f64], items: &[WeightedLabel], eps: f64) -> Result<(f64, f64)> {
    let mut best_v = values[0];
    let mut best_loss = f64::INFINITY;
    for &v in values {
        let mut loss = 0.0;
        for &(y, w) in items {
            loss += w * competitive_loss(y, v, eps)?;
        }
        if loss < best_loss {
            best_loss = loss;
            best_v = v;
        }
    }
    Ok((best_v, best_loss))
}

/// Weighted items grouped by lookup key, with anything unmatched pooled for
/// the fallback value.
fn bucket_by_key<'a>(
    keys: &[u32],
    items: impl Iterator<Item = (&'a Feature, f64, f64)>,
) -> (Vec<Vec<WeightedLabel>>, Vec<WeightedLabel>) {
    let mut buckets: Vec<Vec<WeightedLabel>> = vec![Vec::new(); keys.len()];
    let mut leftover = Vec::new();
    for (x, y, w) in items {
        match x {
            Feature::Key(k) => match keys.binary_search(k) {
                Ok(i) => buckets[i].push((y, w)),
                Err(_) => leftover.push((y, w)),
            },
            Feature::Real(_) => leftover.push((y, w)),
        }
    }
    (buckets, leftover)
}

/// Per-key minimization for lookup families: the joint loss decomposes over
/// keys, so the first global minimizer is the per-key first minimizer.
fn lookup_minimize(
    keys: &[u32],
    grid: &ValueGrid,
    buckets: &[Vec<WeightedLabel>],
    leftover: &[WeightedLabel],
    eps: f64,
) -> Result<(Predictor, f64)> {
    let values = grid.values();
    let fallback = values[0];
    let mut chosen = Vec::with_capacity(keys.len());
    let mut total = 0.0;
    for bucket in buckets {
        if bucket.is_empty() {
            chosen.push(values[0]);
        } else {
            let (v, loss) = best_grid_value(&values, bucket, eps)?;
            chosen.push(v);
            total += loss;
        }
    }
    for &(y, w) in leftover {
        total += w * competitive_loss(y, fallback, eps)?;
    }
    Ok((
        Predictor::Lookup {
            keys: keys.to_vec(),
            values: chosen,
            fallback,
        },
        total,
    ))
}

/// Minimizes the mean competitive loss over the family, breaking ties toward
/// the earliest member in enumeration order.
pub fn sem_minimize(
    family: &HypothesisFamily,
    samples: &[Sample],
    eps: f64,
) -> Result<TrainedPredictor> {
    check_training_eps(eps)?;
    if samples.is_empty() {
        return Err(Error::EmptyInput { what: "sample set" });
    }
    let m = samples.len() as f64;
    if let FamilyKind::Lookup { keys, grid } = &family.kind {
        let (buckets, leftover) =
            bucket_by_key(keys, samples.iter().map(|s| (&s.x, s.y, 1.0)));
        let (predictor, total) = lookup_minimize(keys, grid, &buckets, &leftover, eps)?;
        return Ok(TrainedPredictor {
            predictor,
            epsilon: eps,
            training_error: total / m,
        });
    }
    let mut best: Option<TrainedPredictor> = None;
    for p in family.enumerate()? {
        let err = sample_error(|x| p.predict(x), samples, eps)?;
        if best.as_ref().map_or(true, |b| err < b.training_error) {
            best = Some(TrainedPredictor {
                predictor: p,
                epsilon: eps,
                training_error: err,
            });
        }
    }
    Ok(best.expect("family enumeration is never empty"))
}

/// Distribution analogue of [`sem_minimize`]: minimizes the exact expected
/// competitive loss over the atoms.
pub fn sem_minimize_dist(
    family: &HypothesisFamily,
    dist: &DiscreteDistribution,
    eps: f64,
) -> Result<TrainedPredictor> {
    check_training_eps(eps)?;
    if let FamilyKind::Lookup { keys, grid } = &family.kind {
        let (buckets, leftover) =
            bucket_by_key(keys, dist.atoms().iter().map(|(s, p)| (&s.x, s.y, *p)));
        let (predictor, total) = lookup_minimize(keys, grid, &buckets, &leftover, eps)?;
        return Ok(TrainedPredictor {
            predictor,
            epsilon: eps,
            training_error: total,
        });
    }
    let mut best: Option<TrainedPredictor> = None;
    for p in family.enumerate()? {
        let err = crate::loss::dist_error(|x| p.predict(x), dist, eps)?;
        if best.as_ref().map_or(true, |b| err < b.training_error) {
            best = Some(TrainedPredictor {
                predictor: p,
                epsilon: eps,
                training_error: err,
            });
        }
    }
    Ok(best.expect("family enumeration is never empty"))
}

/// Least expected competitive loss any member of the family attains.
pub fn min_dist_error(
    family: &HypothesisFamily,
    dist: &DiscreteDistribution,
    eps: f64,
) -> Result<f64> {
    Ok(sem_minimize_dist(family, dist, eps)?.training_error)
}

/// Agnostic gap of a family on a distribution: the fixed point of
/// `eps -> min_f E[loss_eps(f)]`.
///
/// The map is nonincreasing in `eps` while the identity increases, so the
/// crossing is unique; it is found by bisection on `[1e-6, 2]` to within
/// `tol`. A realizable pair returns the lower end.
pub fn delta_f_bruteforce(
    family: &HypothesisFamily,
    dist: &DiscreteDistribution,
    tol: f64,
) -> Result<f64> {
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "tol",
            reason: format!("must be finite and positive, got {tol}"),
        });
    }
    let chi = |eps: f64| min_dist_error(family, dist, eps);
    let mut lo = 1e-6;
    let mut hi = 2.0;
    if chi(lo)? <= lo {
        return Ok(lo);
    }
    // chi(2) <= 5/2 - 1 < 2, so the crossing lies in (lo, hi).
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if chi(mid)? > mid {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Estimates the agnostic gap from samples alone by doubling the trust
/// level until the trained error drops below it. Starts at `eps0` (typically
/// from [`accuracy_for_sample_size`]) and is capped at 2, where the loss
/// bound guarantees termination.
pub fn estimate_delta(
    family: &HypothesisFamily,
    samples: &[Sample],
    eps0: f64,
) -> Result<f64> {
    check_training_eps(eps0)?;
    let mut eps = eps0;
    loop {
        let trained = sem_minimize(family, samples, eps)?;
        if trained.training_error < eps {
            return Ok(eps);
        }
        if eps >= 2.0 {
            // Unreachable: at eps = 2 the loss is at most 3/2 < 2.
            return Ok(2.0);
        }
        eps = (2.0 * eps).min(2.0);
    }
}

fn check_bound_args(h: f64, d: u32, delta: f64, c: f64) -> Result<()> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "h",
            reason: format!("must be finite and positive, got {h}"),
        });
    }
    if d == 0 {
        return Err(Error::InvalidArgument {
            name: "d",
            reason: "pseudo-dimension must be at least 1".into(),
        });
    }
    if !delta.is_finite() || delta <= 0.0 || delta >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "delta",
            reason: format!("must lie strictly inside (0, 1), got {delta}"),
        });
    }
    if !c.is_finite() || c <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "c",
            reason: format!("must be finite and positive, got {c}"),
        });
    }
    Ok(())
}

/// Samples sufficient to train to accuracy `eps` with confidence `1 - delta`:
/// `ceil(c * h * d * ln(1/eps) * ln(1/delta) / eps)`, linear in the
/// pseudo-dimension `d` and the log-cost range `h`.
pub fn sample_complexity_bound(h: f64, d: u32, eps: f64, delta: f64, c: f64) -> Result<u64> {
    check_bound_args(h, d, delta, c)?;
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must lie strictly inside (0, 1), got {eps}"),
        });
    }
    let m = c * h * f64::from(d) * (1.0 / eps).ln() * (1.0 / delta).ln() / eps;
    Ok(m.ceil() as u64)
}

/// Inverse of [`sample_complexity_bound`] in `eps`: the accuracy a budget of
/// `m` samples affords. Bisects the strictly decreasing map on `(0, 1)`.
pub fn accuracy_for_sample_size(m: u64, h: f64, d: u32, delta: f64, c: f64) -> Result<f64> {
    check_bound_args(h, d, delta, c)?;
    if m == 0 {
        return Err(Error::InvalidArgument {
            name: "m",
            reason: "need at least one sample".into(),
        });
    }
    let need = |eps: f64| c * h * f64::from(d) * (1.0 / eps).ln() * (1.0 / delta).ln() / eps;
    let target = m as f64;
    let mut lo = 1e-12;
    let mut hi = 1.0;
    if need(lo) < target {
        return Ok(lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if need(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Best stopping policy per feature and its overall expected ratio.
#[derive(Clone, Debug)]
pub struct PolicySolution {
    /// Expected competitive ratio of the best policy, over the whole
    /// distribution.
    pub expected_cr: f64,
    /// The minimizing threshold strategy for each feature, in first-seen
    /// order.
    pub per_feature: Vec<(Feature, ThresholdStrategy)>,
}

/// Exhaustively finds, per feature, the deterministic threshold strategy
/// minimizing the expected competitive ratio over that feature's outcomes.
///
/// Only strategies whose purchases end exactly at outcome stop times matter:
/// any other endpoint can be moved down to the previous outcome without
/// covering less or paying more. Randomized strategies are mixtures of
/// deterministic ones, so the deterministic minimum is the true optimum.
pub fn optimal_policy_bruteforce(
    dist: &DiscreteDistribution,
    curve: &OptCurve,
) -> Result<PolicySolution> {
    // Group outcomes by feature, keeping joint probabilities.
    let mut groups: Vec<(Feature, Vec<(u32, f64)>)> = Vec::new();
    for (sample, p) in dist.atoms() {
        let t = predicted_length(curve, sample.y);
        match groups.iter_mut().find(|(x, _)| *x == sample.x) {
            Some((_, outcomes)) => match outcomes.iter_mut().find(|(lt, _)| *lt == t) {
                Some((_, q)) => *q += p,
                None => outcomes.push((t, *p)),
            },
            None => groups.push((sample.x, vec![(t, *p)])),
        }
    }

    let mut expected_cr = 0.0;
    let mut per_feature = Vec::with_capacity(groups.len());
    for (feature, mut outcomes) in groups {
        outcomes.sort_by_key(|&(t, _)| t);
        let k = outcomes.len();
        if k > MAX_POLICY_LEVELS {
            return Err(Error::CapacityExceeded {
                what: "policy outcome levels",
                size: k as u64,
                limit: MAX_POLICY_LEVELS as u64,
            });
        }
        let top = outcomes[k - 1].0;
        let mut best: Option<(f64, ThresholdStrategy)> = None;
        // Every subset of the lower levels, top level always included.
        for mask in 0u32..(1 << (k - 1)) {
            let mut thresholds: Vec<u32> = (0..k - 1)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| outcomes[i].0 + 1)
                .collect();
            thresholds.push(top + 1);
            let strategy = ThresholdStrategy::new(thresholds)?;
            let mut exp = 0.0;
            for &(t, p) in &outcomes {
                let rec = run_thresholds(curve, t, &strategy)?;
                exp += p * rec.competitive_ratio(curve)?;
            }
            if best.as_ref().map_or(true, |(b, _)| exp < *b) {
                best = Some((exp, strategy));
            }
        }
        let (exp, strategy) = best.expect("at least the top-only strategy exists");
        expected_cr += exp;
        per_feature.push((feature, strategy));
    }
    Ok(PolicySolution {
        expected_cr,
        per_feature,
    })
}

/// Full pipeline on one test instance: train on the samples, predict the
/// test feature's log-cost, turn it into a stop-time prediction, and run
/// prediction-augmented doubling against the true stop time.
pub fn lts_train_and_run(
    family: &HypothesisFamily,
    train: &[Sample],
    eps: f64,
    curve: &OptCurve,
    test: &Sample,
) -> Result<(TrainedPredictor, RunRecord)> {
    let trained = sem_minimize(family, train, eps)?;
    let y_hat = trained.predictor.predict(&test.x);
    let t_hat = predicted_length(curve, y_hat);
    let t_true = predicted_length(curve, test.y);
    let record = run_predict_and_double(curve, t_true, t_hat, eps)?;
    Ok((trained, record))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{
        make_standard_instance, make_two_point, two_point_curve, SHARED_FEATURE,
    };

    fn sample(x: Feature, y: f64) -> Sample {
        Sample { x, y }
    }

    #[test]
    fn grid_values_cover_the_range_exactly() {
        let g = ValueGrid::new(0.0, 5.0, 0.1).unwrap();
        let values = g.values();
        assert_eq!(values.len(), 51);
        assert_eq!(values[0], 0.0);
        assert_eq!(*values.last().unwrap(), 5.0);
        assert!(values.windows(2).all(|w| w[1] > w[0]));

        let g = ValueGrid::new(1.0, 1.0, 0.5).unwrap();
        assert_eq!(g.values(), vec![1.0]);

        assert!(ValueGrid::new(0.0, 1.0, 0.0).is_err());
        assert!(ValueGrid::new(1.0, 0.0, 0.1).is_err());
        assert!(ValueGrid::new(0.0, 1e9, 1e-3).is_err());
    }

    #[test]
    fn grid_json_round_trips_with_validation() {
        let g: ValueGrid = serde_json::from_str(r#"{"lo":0.0,"hi":2.0,"step":0.5}"#).unwrap();
        assert_eq!(g.values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
        assert!(serde_json::from_str::<ValueGrid>(r#"{"lo":2.0,"hi":0.0,"step":0.5}"#).is_err());
        assert!(
            serde_json::from_str::<ValueGrid>(r#"{"lo":0.0,"hi":2.0,"step":0.5,"x":1}"#).is_err()
        );
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<ValueGrid>(&text).unwrap(), g);
    }

    #[test]
    fn family_json_uses_kind_tags() {
        let f: HypothesisFamily =
            serde_json::from_str(r#"{"kind":"constant","grid":{"lo":0.0,"hi":1.0,"step":0.5}}"#)
                .unwrap();
        assert_eq!(f.pseudo_dimension(), 1);
        let f: HypothesisFamily = serde_json::from_str(
            r#"{"kind":"lookup","keys":[0,1,2],"grid":{"lo":0.0,"hi":1.0,"step":0.5}}"#,
        )
        .unwrap();
        assert_eq!(f.pseudo_dimension(), 3);
        // Unsorted keys are rejected on deserialization.
        assert!(serde_json::from_str::<HypothesisFamily>(
            r#"{"kind":"lookup","keys":[1,0],"grid":{"lo":0.0,"hi":1.0,"step":0.5}}"#
        )
        .is_err());
    }

    #[test]
    fn lookup_enumeration_is_lexicographic() {
        let grid = ValueGrid::new(0.0, 2.0, 1.0).unwrap();
        let family = HypothesisFamily::lookup(vec![3, 7], grid).unwrap();
        let members = family.enumerate().unwrap();
        assert_eq!(members.len(), 9);
        let as_pair = |p: &Predictor| match p {
            Predictor::Lookup { values, .. } => (values[0], values[1]),
            other => panic!("unexpected member {other:?}"),
        };
        assert_eq!(as_pair(&members[0]), (0.0, 0.0));
        assert_eq!(as_pair(&members[1]), (0.0, 1.0));
        assert_eq!(as_pair(&members[2]), (0.0, 2.0));
        assert_eq!(as_pair(&members[3]), (1.0, 0.0));
        assert_eq!(as_pair(&members[8]), (2.0, 2.0));
        // Unknown keys and real features fall back to the first grid value.
        assert_eq!(members[8].predict(&Feature::Key(5)), 0.0);
        assert_eq!(members[8].predict(&Feature::Real(3.0)), 0.0);
    }

    #[test]
    fn enumeration_respects_the_capacity_limit() {
        let grid = ValueGrid::new(0.0, 5.0, 0.1).unwrap();
        let family = HypothesisFamily::lookup((0..8).collect(), grid).unwrap();
        // 51^8 members: size() reports it, enumerate() refuses.
        assert!(family.size().unwrap() > MAX_ENUMERATION);
        assert!(matches!(
            family.enumerate(),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn monotone_step_members_keep_below_at_most_above() {
        let grid = ValueGrid::new(1.0, 3.0, 1.0).unwrap();
        let family = HypothesisFamily::monotone_step(vec![2.5], grid).unwrap();
        let members = family.enumerate().unwrap();
        // Pairs (below, at_or_above) with below <= at_or_above: 6 of them.
        assert_eq!(members.len(), 6);
        for m in &members {
            let below = m.predict(&Feature::Real(2.0));
            let above = m.predict(&Feature::Real(2.5));
            assert!(below <= above);
        }
        assert_eq!(family.pseudo_dimension(), 2);
    }

    #[test]
    fn affine_members_clamp_to_range() {
        let intercepts = ValueGrid::new(0.0, 1.0, 1.0).unwrap();
        let family = HypothesisFamily::affine(intercepts, vec![-1.0, 2.0], 3.0).unwrap();
        let members = family.enumerate().unwrap();
        assert_eq!(members.len(), 4);
        for m in &members {
            for x in [-10.0, 0.0, 1.7, 10.0] {
                let y = m.predict(&Feature::Real(x));
                assert!((0.0..=3.0).contains(&y));
            }
        }
        // Keys act as their integer coordinate.
        let p = Predictor::Affine {
            intercept: 0.0,
            slope: 1.0,
            cap: 10.0,
        };
        assert_eq!(p.predict(&Feature::Key(4)), 4.0);
    }

    #[test]
    fn sem_fast_path_matches_enumeration() {
        use rand::{Rng, SeedableRng};
        let grid = ValueGrid::new(0.0, 2.0, 0.5).unwrap();
        let family = HypothesisFamily::lookup(vec![0, 1], grid).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..20 {
            let samples: Vec<Sample> = (0..12)
                .map(|_| {
                    sample(
                        Feature::Key(rng.gen_range(0..3)), // key 2 exercises the fallback
                        rng.gen_range(0.0..2.0),
                    )
                })
                .collect();
            let eps = rng.gen_range(0.1..2.0);
            let fast = sem_minimize(&family, &samples, eps).unwrap();

            // Reference: enumerate members and take the first minimum.
            let mut best: Option<(f64, Predictor)> = None;
            for p in family.enumerate().unwrap() {
                let err = sample_error(|x| p.predict(x), &samples, eps).unwrap();
                if best.as_ref().map_or(true, |(b, _)| err < *b) {
                    best = Some((err, p));
                }
            }
            let (want_err, want_p) = best.unwrap();
            assert!((fast.training_error - want_err).abs() < 1e-12);
            assert_eq!(fast.predictor, want_p);
        }
    }

    #[test]
    fn sem_breaks_ties_toward_the_earlier_member() {
        // With eps = 2 and y far below both grid values, both predictions sit
        // on the flat under-prediction cap, so the losses tie exactly.
        let grid = ValueGrid::new(2.0, 6.0, 4.0).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        let samples = vec![sample(SHARED_FEATURE, 0.0)];
        let trained = sem_minimize(&family, &samples, 2.0).unwrap();
        assert_eq!(trained.predictor, Predictor::Constant(2.0));
        assert_eq!(trained.training_error, 1.5);
    }

    #[test]
    fn sem_requires_samples_and_valid_eps() {
        let grid = ValueGrid::new(0.0, 1.0, 1.0).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        assert!(sem_minimize(&family, &[], 1.0).is_err());
        let samples = vec![sample(SHARED_FEATURE, 0.5)];
        assert!(sem_minimize(&family, &samples, 0.0).is_err());
        assert!(sem_minimize(&family, &samples, 2.5).is_err());
    }

    #[test]
    fn dist_training_matches_sample_training_on_atom_weights() {
        // Exact expectations equal the limit of empirical means, checked here
        // by handing the atoms themselves in proportionate counts.
        let dist = make_two_point(0.25).unwrap();
        let grid = ValueGrid::new(0.0, 4.0_f64.ln(), 4.0_f64.ln() / 4.0).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        let mut samples = Vec::new();
        for (s, p) in dist.atoms() {
            for _ in 0..((p * 4.0).round() as usize) {
                samples.push(*s);
            }
        }
        for eps in [0.3, 0.9, 2.0] {
            let a = sem_minimize_dist(&family, &dist, eps).unwrap();
            let b = sem_minimize(&family, &samples, eps).unwrap();
            assert_eq!(a.predictor, b.predictor);
            assert!((a.training_error - b.training_error).abs() < 1e-12);
        }
    }

    #[test]
    fn realizable_families_have_vanishing_gap() {
        let inst = make_standard_instance(3, 2.0, 0.5, 5).unwrap();
        // The truth is a family member, so min error is 0 at every eps.
        assert_eq!(min_dist_error(&inst.family, &inst.dist, 1.0).unwrap(), 0.0);
        let gap = delta_f_bruteforce(&inst.family, &inst.dist, 1e-6).unwrap();
        assert!(gap <= 1e-6);
    }

    #[test]
    fn agnostic_gap_equals_the_unfittable_mass() {
        // Two atoms at one feature: the best the family can do is predict the
        // heavy atom and eat the flat loss 1 on the light one, so
        // chi(eps) = q for all eps and the fixed point is exactly q.
        let grid = ValueGrid::new(0.0, 5.0, 0.05).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        for q in [0.1, 0.25, 0.4] {
            let dist = DiscreteDistribution::new(
                vec![
                    (sample(SHARED_FEATURE, 1.0), 1.0 - q),
                    (sample(SHARED_FEATURE, 2.75), q),
                ],
                5.0,
            )
            .unwrap();
            assert_eq!(min_dist_error(&family, &dist, 0.5).unwrap(), q);
            let gap = delta_f_bruteforce(&family, &dist, 1e-6).unwrap();
            assert!((gap - q).abs() < 1e-5, "q = {q}, gap = {gap}");
        }
    }

    #[test]
    fn bisection_agrees_with_a_dense_scan() {
        let grid = ValueGrid::new(0.0, 5.0, 0.05).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        let dist = DiscreteDistribution::new(
            vec![
                (sample(SHARED_FEATURE, 1.5), 0.7),
                (sample(SHARED_FEATURE, 3.2), 0.3),
            ],
            5.0,
        )
        .unwrap();
        let gap = delta_f_bruteforce(&family, &dist, 1e-6).unwrap();
        // Independent check: scan eps on a fine grid for the sign change of
        // chi(eps) - eps.
        let mut crossing = None;
        let mut prev = (1e-3, min_dist_error(&family, &dist, 1e-3).unwrap());
        let mut e = 2e-3;
        while e <= 2.0 {
            let chi = min_dist_error(&family, &dist, e).unwrap();
            if prev.1 > prev.0 && chi <= e {
                crossing = Some(e);
                break;
            }
            prev = (e, chi);
            e += 1e-3;
        }
        let crossing = crossing.expect("scan finds the fixed point");
        assert!(
            (gap - crossing).abs() <= 2e-3,
            "bisection {gap} vs scan {crossing}"
        );
    }

    #[test]
    fn estimate_delta_stops_once_error_drops_below_eps() {
        let grid = ValueGrid::new(0.0, 5.0, 0.05).unwrap();
        let family = HypothesisFamily::constant(grid).unwrap();
        // Realizable samples: the error is 0, so the first eps wins.
        let samples = vec![sample(SHARED_FEATURE, 1.0); 10];
        assert_eq!(estimate_delta(&family, &samples, 0.01).unwrap(), 0.01);

        // Mixed samples: 30% unfittable mass, so the estimate doubles from
        // 0.01 until it clears 0.3: returned value is 0.01 * 2^5 = 0.32.
        let mut samples = vec![sample(SHARED_FEATURE, 1.0); 7];
        samples.extend(vec![sample(SHARED_FEATURE, 2.75); 3]);
        let est = estimate_delta(&family, &samples, 0.01).unwrap();
        assert!((est - 0.32).abs() < 1e-12);
        // Exit invariant: the trained error at the returned eps is below it.
        let trained = sem_minimize(&family, &samples, est).unwrap();
        assert!(trained.training_error < est);
    }

    #[test]
    fn complexity_bound_frozen_value_and_scaling() {
        // h = 10, d = 4, eps = delta = 0.1, c = 1:
        // 10 * 4 * ln(10)^2 / 0.1 = 2120.76 -> 2121.
        let m = sample_complexity_bound(10.0, 4, 0.1, 0.1, 1.0).unwrap();
        assert_eq!(m, 2121);
        // Doubling the pseudo-dimension doubles the bound here.
        let m2 = sample_complexity_bound(10.0, 8, 0.1, 0.1, 1.0).unwrap();
        assert_eq!(m2, 4242);
        // Tighter accuracy needs more samples.
        assert!(
            sample_complexity_bound(10.0, 4, 0.05, 0.1, 1.0).unwrap()
                > sample_complexity_bound(10.0, 4, 0.2, 0.1, 1.0).unwrap()
        );
        assert!(sample_complexity_bound(10.0, 4, 0.0, 0.1, 1.0).is_err());
        assert!(sample_complexity_bound(10.0, 0, 0.1, 0.1, 1.0).is_err());
        assert!(sample_complexity_bound(-1.0, 4, 0.1, 0.1, 1.0).is_err());
    }

    #[test]
    fn accuracy_inverts_the_complexity_bound() {
        let m = sample_complexity_bound(10.0, 4, 0.1, 0.1, 1.0).unwrap();
        let eps = accuracy_for_sample_size(m, 10.0, 4, 0.1, 1.0).unwrap();
        assert!((eps - 0.1).abs() < 1e-3, "got {eps}");
        // More samples buy better accuracy.
        let tighter = accuracy_for_sample_size(10 * m, 10.0, 4, 0.1, 1.0).unwrap();
        assert!(tighter < eps);
        assert!(accuracy_for_sample_size(0, 10.0, 4, 0.1, 1.0).is_err());
    }

    #[test]
    fn optimal_policy_on_the_two_point_distribution() {
        // Uniform over stop times {1, 2} on the curve with costs {2, 4}:
        // buying straight to the top costs E[CR] = 1.5, hedging costs 1.25.
        let dist = make_two_point(0.5).unwrap();
        let curve = two_point_curve();
        let solution = optimal_policy_bruteforce(&dist, &curve).unwrap();
        assert!((solution.expected_cr - 1.25).abs() < 1e-12);
        assert_eq!(solution.per_feature.len(), 1);
        assert_eq!(solution.per_feature[0].1.thresholds(), &[2, 3]);

        // At p = 1/3 both strategies tie at 4/3.
        let dist = make_two_point(1.0 / 3.0).unwrap();
        let solution = optimal_policy_bruteforce(&dist, &curve).unwrap();
        assert!((solution.expected_cr - 4.0 / 3.0).abs() < 1e-12);

        // Trusting wins when stopping early is rare.
        let dist = make_two_point(0.05).unwrap();
        let solution = optimal_policy_bruteforce(&dist, &curve).unwrap();
        assert!((solution.expected_cr - 1.05).abs() < 1e-12);
        assert_eq!(solution.per_feature[0].1.thresholds(), &[3]);
    }

    #[test]
    fn optimal_policy_rejects_too_many_levels() {
        // 13 outcome levels at one feature exceed the subset-enumeration cap.
        let steps: Vec<(u32, f64)> = (0..13).map(|k| (k + 1, (f64::from(k) * 0.3).exp())).collect();
        let curve = OptCurve::from_breakpoints(steps, 13).unwrap();
        let atoms: Vec<(Sample, f64)> = (0..13)
            .map(|k| (sample(SHARED_FEATURE, f64::from(k) * 0.3), 1.0 / 13.0))
            .collect();
        let dist = DiscreteDistribution::new(atoms, 4.0).unwrap();
        assert!(matches!(
            optimal_policy_bruteforce(&dist, &curve),
            Err(Error::CapacityExceeded { .. })
        ));
    }

    #[test]
    fn optimal_policy_handles_multiple_features_independently() {
        // Feature 0 stops at 1 or 2; feature 1 always at 2. The best policy
        // hedges for feature 0 and trusts for feature 1.
        let curve = two_point_curve();
        let y1 = 2.0_f64.ln();
        let y2 = 4.0_f64.ln();
        let dist = DiscreteDistribution::new(
            vec![
                (sample(Feature::Key(0), y1), 0.25),
                (sample(Feature::Key(0), y2), 0.25),
                (sample(Feature::Key(1), y2), 0.5),
            ],
            y2,
        )
        .unwrap();
        let solution = optimal_policy_bruteforce(&dist, &curve).unwrap();
        // Feature 0 contributes 0.5 * 1.25, feature 1 contributes 0.5 * 1.
        assert!((solution.expected_cr - (0.625 + 0.5)).abs() < 1e-12);
        assert_eq!(solution.per_feature.len(), 2);
        assert_eq!(solution.per_feature[0].1.thresholds(), &[2, 3]);
        assert_eq!(solution.per_feature[1].1.thresholds(), &[3]);
    }

    #[test]
    fn pipeline_trains_predicts_and_runs() {
        let inst = make_standard_instance(4, 3.0, 0.5, 21).unwrap();
        let curve = crate::curve::analytic_curve(
            &crate::curve::CurveShape::Exponential {
                base: 1.05,
                horizon: 60,
            },
            3.0,
        )
        .unwrap();
        let train = crate::distributions::draw_samples(&inst.dist, 200, 9).unwrap();
        let test = inst.dist.atoms()[0].0;
        let (trained, record) =
            lts_train_and_run(&inst.family, &train, 0.5, &curve, &test).unwrap();
        assert!(record.is_feasible());
        assert!(trained.training_error <= 1e-12, "realizable training");
        let cr = record.competitive_ratio(&curve).unwrap();
        assert!(cr <= 1.5 + 1e-12, "consistent run, got {cr}");
    }
}
