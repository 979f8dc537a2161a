//! Discrete distributions over labeled instances.
//!
//! An instance is a feature paired with the log-cost `y = ln(opt(T))` of its
//! optimal solution; stop times are recovered from `y` through a cost curve.
//! Besides the generic container, this module builds the named fixture
//! families used by the experiments: realizable lookup instances and the
//! small adversarial distributions that separate training losses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::curve::OptCurve;
use crate::error::{Error, Result};
use crate::learn::{HypothesisFamily, ValueGrid};

/// Default log-cost range: log-costs live in `[0, 10]` unless stated.
pub const DEFAULT_LOG_RANGE: f64 = 10.0;

/// Instance feature: either a categorical key or a real coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Feature {
    Key(u32),
    Real(f64),
}

/// A labeled instance: feature plus log-cost of its optimal solution.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub x: Feature,
    pub y: f64,
}

/// Finitely supported distribution over samples.
///
/// Probabilities are positive and sum to 1 (within 1e-12); log-costs lie in
/// `[0, log_range]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDistribution {
    atoms: Vec<(Sample, f64)>,
    log_range: f64,
}

impl DiscreteDistribution {
    pub fn new(atoms: Vec<(Sample, f64)>, log_range: f64) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::EmptyInput {
                what: "distribution support",
            });
        }
        if !log_range.is_finite() || log_range <= 0.0 {
            return Err(Error::InvalidArgument {
                name: "log_range",
                reason: format!("must be finite and positive, got {log_range}"),
            });
        }
        let mut total = 0.0;
        for (sample, p) in &atoms {
            if !p.is_finite() || *p <= 0.0 {
                return Err(Error::InvalidArgument {
                    name: "atom probability",
                    reason: format!("must be finite and positive, got {p}"),
                });
            }
            if !sample.y.is_finite() || sample.y < 0.0 || sample.y > log_range {
                return Err(Error::InvalidArgument {
                    name: "atom log-cost",
                    reason: format!("must lie in [0, {log_range}], got {}", sample.y),
                });
            }
            if let Feature::Real(v) = sample.x {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument {
                        name: "atom feature",
                        reason: "real features must be finite".into(),
                    });
                }
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument {
                name: "atom probability",
                reason: format!("probabilities must sum to 1, got {total}"),
            });
        }
        Ok(Self { atoms, log_range })
    }

    pub fn atoms(&self) -> &[(Sample, f64)] {
        &self.atoms
    }

    pub fn log_range(&self) -> f64 {
        self.log_range
    }

    /// Exact expectation of `f` under the distribution.
    pub fn expectation(&self, f: impl Fn(&Sample) -> f64) -> f64 {
        self.atoms.iter().map(|(s, p)| p * f(s)).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let wire: DistributionWire = serde_json::from_str(text)?;
        Self::new(
            wire.atoms
                .into_iter()
                .map(|(x, y, p)| (Sample { x, y }, p))
                .collect(),
            wire.log_range,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        let wire = DistributionWire {
            atoms: self
                .atoms
                .iter()
                .map(|(s, p)| (s.x, s.y, *p))
                .collect(),
            log_range: self.log_range,
        };
        Ok(serde_json::to_string(&wire)?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DistributionWire {
    atoms: Vec<(Feature, f64, f64)>,
    #[serde(rename = "H")]
    log_range: f64,
}

/// Draws `m` samples with a fresh RNG seeded by `seed`. Same seed, same
/// samples — independent of where or how often the worker runs.
pub fn draw_samples(dist: &DiscreteDistribution, m: usize, seed: u64) -> Result<Vec<Sample>> {
    if m == 0 {
        return Err(Error::InvalidArgument {
            name: "m",
            reason: "must draw at least one sample".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(m);
    for _ in 0..m {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut chosen = dist.atoms.last().expect("nonempty").0;
        for (sample, p) in &dist.atoms {
            acc += p;
            if u < acc {
                chosen = *sample;
                break;
            }
        }
        out.push(chosen);
    }
    Ok(out)
}

/// A realizable learning instance: a lookup family, a ground-truth member,
/// and the uniform distribution over its keys.
#[derive(Clone, Debug)]
pub struct StandardInstance {
    pub dist: DiscreteDistribution,
    pub family: HypothesisFamily,
    /// Ground-truth log-cost per key, all drawn from the family's grid.
    pub truth: Vec<f64>,
}

/// Uniform distribution over `d` keys whose labels are grid values chosen at
/// random, so the generating lookup family can fit them exactly.
pub fn make_standard_instance(
    d: u32,
    log_range: f64,
    grid_step: f64,
    seed: u64,
) -> Result<StandardInstance> {
    if d == 0 {
        return Err(Error::InvalidArgument {
            name: "d",
            reason: "need at least one key".into(),
        });
    }
    let grid = ValueGrid::new(0.0, log_range, grid_step)?;
    let keys: Vec<u32> = (0..d).collect();
    let family = HypothesisFamily::lookup(keys.clone(), grid.clone())?;
    let values = grid.values();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth: Vec<f64> = (0..d)
        .map(|_| values[rng.gen_range(0..values.len())])
        .collect();
    let p = 1.0 / f64::from(d);
    let atoms = keys
        .iter()
        .zip(&truth)
        .map(|(&k, &y)| {
            (
                Sample {
                    x: Feature::Key(k),
                    y,
                },
                p,
            )
        })
        .collect();
    Ok(StandardInstance {
        dist: DiscreteDistribution::new(atoms, log_range)?,
        family,
        truth,
    })
}

/// All adversarial fixtures share one uninformative feature, so predictors
/// cannot tell the atoms apart.
pub const SHARED_FEATURE: Feature = Feature::Key(0);

/// Two equally likely log-costs at `center - delta` and `center + delta`.
/// Symmetric-loss training lands exactly between them.
pub fn make_symmetric(center: f64, delta: f64) -> Result<DiscreteDistribution> {
    if !center.is_finite() || !delta.is_finite() || delta < 0.0 || delta > center {
        return Err(Error::InvalidArgument {
            name: "delta",
            reason: format!("need 0 <= delta <= center, got center {center}, delta {delta}"),
        });
    }
    DiscreteDistribution::new(
        vec![
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: center - delta,
                },
                0.5,
            ),
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: center + delta,
                },
                0.5,
            ),
        ],
        center + delta,
    )
}

/// Three-level curve matching [`make_symmetric`]: lengths 1, 2, 3 cost
/// exactly the exponentials of the low, middle, and high log-costs.
pub fn symmetric_curve(center: f64, delta: f64) -> Result<OptCurve> {
    OptCurve::from_breakpoints(
        vec![
            (1, (center - delta).exp()),
            (2, center.exp()),
            (3, (center + delta).exp()),
        ],
        3,
    )
}

/// Stop time 1 with probability `p`, else 2, on the two-level curve with
/// costs 2 and 4.
pub fn make_two_point(p: f64) -> Result<DiscreteDistribution> {
    if !p.is_finite() || p <= 0.0 || p >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "p",
            reason: format!("must lie strictly inside (0, 1), got {p}"),
        });
    }
    DiscreteDistribution::new(
        vec![
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: 2.0_f64.ln(),
                },
                p,
            ),
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: 4.0_f64.ln(),
                },
                1.0 - p,
            ),
        ],
        4.0_f64.ln(),
    )
}

/// Companion curve for [`make_two_point`]: `opt(1) = 2`, `opt(2) = 4`.
pub fn two_point_curve() -> OptCurve {
    OptCurve::from_breakpoints(vec![(1, 2.0_f64.ln().exp()), (2, 4.0_f64.ln().exp())], 2)
        .expect("fixed valid curve")
}

/// Adversary against absolute-loss training: log-cost 1 with probability
/// `1 - sqrt(eps)`, else `1 + sqrt(eps)`. The best absolute-loss predictor
/// has expected loss about `eps`, yet no strategy beats expected ratio
/// `1 + sqrt(eps)/2`.
pub fn make_absloss_adversary(eps: f64) -> Result<DiscreteDistribution> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must lie strictly inside (0, 1), got {eps}"),
        });
    }
    let r = eps.sqrt();
    DiscreteDistribution::new(
        vec![
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: 1.0,
                },
                1.0 - r,
            ),
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: 1.0 + r,
                },
                r,
            ),
        ],
        1.0 + r,
    )
}

/// Companion curve for [`make_absloss_adversary`].
pub fn absloss_curve(eps: f64) -> Result<OptCurve> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must lie strictly inside (0, 1), got {eps}"),
        });
    }
    let r = eps.sqrt();
    OptCurve::from_breakpoints(vec![(1, 1.0_f64.exp()), (2, (1.0 + r).exp())], 2)
}

/// Hard case for prediction efficiency: the true log-cost equals the
/// prediction `y_hat` with probability `1 - eps` and exceeds it by factor
/// `1 + eps` otherwise. The constant predictor `y_hat` has expected
/// competitive training loss exactly `eps`, but every strategy pays expected
/// ratio at least `1 + eps/2` (for small `eps`).
pub fn make_efficiency_lowerbound(eps: f64, y_hat: f64) -> Result<DiscreteDistribution> {
    if !eps.is_finite() || eps <= 0.0 || eps >= 1.0 {
        return Err(Error::InvalidArgument {
            name: "eps",
            reason: format!("must lie strictly inside (0, 1), got {eps}"),
        });
    }
    if !y_hat.is_finite() || y_hat <= 0.0 {
        return Err(Error::InvalidArgument {
            name: "y_hat",
            reason: format!("must be finite and positive, got {y_hat}"),
        });
    }
    DiscreteDistribution::new(
        vec![
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: y_hat,
                },
                1.0 - eps,
            ),
            (
                Sample {
                    x: SHARED_FEATURE,
                    y: y_hat * (1.0 + eps),
                },
                eps,
            ),
        ],
        y_hat * (1.0 + eps),
    )
}

/// Companion curve for [`make_efficiency_lowerbound`].
pub fn efficiency_lowerbound_curve(eps: f64, y_hat: f64) -> Result<OptCurve> {
    let dist = make_efficiency_lowerbound(eps, y_hat)?;
    let lo = dist.atoms()[0].0.y;
    let hi = dist.atoms()[1].0.y;
    OptCurve::from_breakpoints(vec![(1, lo.exp()), (2, hi.exp())], 2)
}

/// Serializable description of a fixture generator, as accepted by configs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    StandardRealizable {
        d: u32,
        log_range: f64,
        grid_step: f64,
        seed: u64,
    },
    SymmetricGap {
        center: f64,
        delta: f64,
    },
    TwoPoint {
        p: f64,
    },
    AbslossAdversary {
        eps: f64,
    },
    EfficiencyLowerbound {
        eps: f64,
        y_hat: f64,
    },
}

impl GeneratorSpec {
    /// Instantiates the distribution this spec describes.
    pub fn build(&self) -> Result<DiscreteDistribution> {
        match *self {
            GeneratorSpec::StandardRealizable {
                d,
                log_range,
                grid_step,
                seed,
            } => Ok(make_standard_instance(d, log_range, grid_step, seed)?.dist),
            GeneratorSpec::SymmetricGap { center, delta } => make_symmetric(center, delta),
            GeneratorSpec::TwoPoint { p } => make_two_point(p),
            GeneratorSpec::AbslossAdversary { eps } => make_absloss_adversary(eps),
            GeneratorSpec::EfficiencyLowerbound { eps, y_hat } => {
                make_efficiency_lowerbound(eps, y_hat)
            }
        }
    }

    /// The cost curve each adversarial fixture is played on, if it has one.
    pub fn companion_curve(&self) -> Result<Option<OptCurve>> {
        Ok(match *self {
            GeneratorSpec::StandardRealizable { .. } => None,
            GeneratorSpec::SymmetricGap { center, delta } => {
                Some(symmetric_curve(center, delta)?)
            }
            GeneratorSpec::TwoPoint { .. } => Some(two_point_curve()),
            GeneratorSpec::AbslossAdversary { eps } => Some(absloss_curve(eps)?),
            GeneratorSpec::EfficiencyLowerbound { eps, y_hat } => {
                Some(efficiency_lowerbound_curve(eps, y_hat)?)
            }
        })
    }
}

/// Random monotone step curve for stress tests: start at cost 1, then at each
/// length keep the current cost with probability `plateau_prob` or multiply
/// it by a factor drawn from `[1, max_jump)`, capped at `exp(log_range)`.
pub fn random_monotone_curve(
    rng: &mut impl Rng,
    horizon: u32,
    log_range: f64,
    plateau_prob: f64,
    max_jump: f64,
) -> Result<OptCurve> {
    if horizon == 0 {
        return Err(Error::InvalidArgument {
            name: "horizon",
            reason: "must be at least 1".into(),
        });
    }
    if !(0.0..1.0).contains(&plateau_prob) {
        return Err(Error::InvalidArgument {
            name: "plateau_prob",
            reason: format!("must lie in [0, 1), got {plateau_prob}"),
        });
    }
    if !max_jump.is_finite() || max_jump <= 1.0 {
        return Err(Error::InvalidArgument {
            name: "max_jump",
            reason: format!("must be finite and greater than 1, got {max_jump}"),
        });
    }
    let cap = log_range.exp();
    let mut steps = vec![(1u32, 1.0_f64)];
    let mut cost = 1.0;
    for t in 2..=horizon {
        if rng.gen::<f64>() >= plateau_prob {
            cost = (cost * rng.gen_range(1.0..max_jump)).min(cap);
            steps.push((t, cost));
        }
    }
    OptCurve::from_breakpoints(steps, horizon)
}
