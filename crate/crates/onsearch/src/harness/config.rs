//! Experiment configuration.
//!
//! Configs arrive as JSON objects with a `kind` tag naming the suite and
//! kind-specific parameters, all optional with stated defaults. Unknown
//! fields are rejected so typos fail loudly instead of silently running the
//! default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The six experiment suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Worst-case ratio of plain doubling over random curves.
    DoubleBound,
    /// Consistency/robustness frontier of prediction-augmented doubling.
    PadFrontier,
    /// Expected ratio of the trained pipeline as sample size grows.
    StandardSweep,
    /// Agnostic-gap estimation against the brute-force fixed point.
    AgnosticDelta,
    /// Competitive vs. symmetric training losses on adversarial fixtures.
    LossCompare,
    /// Optimal-policy lower bounds on small distributions.
    LowerboundDemo,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::DoubleBound,
        ExperimentKind::PadFrontier,
        ExperimentKind::StandardSweep,
        ExperimentKind::AgnosticDelta,
        ExperimentKind::LossCompare,
        ExperimentKind::LowerboundDemo,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            ExperimentKind::DoubleBound => "double-bound",
            ExperimentKind::PadFrontier => "pad-frontier",
            ExperimentKind::StandardSweep => "standard-sweep",
            ExperimentKind::AgnosticDelta => "agnostic-delta",
            ExperimentKind::LossCompare => "loss-compare",
            ExperimentKind::LowerboundDemo => "lowerbound-demo",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.tag() == tag)
    }
}

/// Worst-case doubling sweep parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DoubleBoundConfig {
    pub seed: u64,
    /// Number of random curves; each is checked at every stopping time.
    pub curves: u32,
    pub horizon_min: u32,
    pub horizon_max: u32,
    /// Costs stay within `[1, exp(log_range)]`.
    pub log_range: f64,
    /// Chance that a curve keeps its cost flat at each length.
    pub plateau_prob: f64,
    /// Cost jump factors are drawn from `[1, max_jump)`.
    pub max_jump: f64,
}

impl Default for DoubleBoundConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            curves: 10_000,
            horizon_min: 20,
            horizon_max: 300,
            log_range: 10.0,
            plateau_prob: 0.5,
            max_jump: 2.5,
        }
    }
}

/// Consistency/robustness frontier parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PadFrontierConfig {
    pub seed: u64,
    /// Trust levels to profile, each in `(0, 1]`.
    pub epsilons: Vec<f64>,
    /// Base of the exponential cost curve.
    pub base: f64,
    pub horizon: u32,
    pub log_range: f64,
    /// The (fixed) predicted stopping time.
    pub t_hat: u32,
}

impl Default for PadFrontierConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            epsilons: vec![0.1, 0.2, 0.5, 1.0],
            base: 1.001,
            horizon: 12_000,
            log_range: 12.01,
            t_hat: 6_000,
        }
    }
}

/// Trained-pipeline sweep parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StandardSweepConfig {
    pub seed: u64,
    pub trials: u32,
    /// Training-set sizes, strictly increasing. Each trial draws the largest
    /// size once and trains on prefixes, so bigger budgets see supersets.
    pub sample_sizes: Vec<u64>,
    /// Trust level for both training and the run, in `(0, 1]`.
    pub epsilon: f64,
    /// Number of lookup keys.
    pub features: u32,
    pub log_range: f64,
    /// Grid pitch of the hypothesis family; at most `epsilon / 2` so grid
    /// rounding cannot eat the trust budget.
    pub grid_step: f64,
    pub base: f64,
    pub horizon: u32,
}

impl Default for StandardSweepConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 200,
            sample_sizes: vec![10, 30, 100, 300, 1000],
            epsilon: 0.2,
            features: 8,
            log_range: 5.0,
            grid_step: 0.1,
            base: 1.001,
            horizon: 5_003,
        }
    }
}

/// Agnostic-gap estimation parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgnosticDeltaConfig {
    pub seed: u64,
    /// Number of random two-atom fixtures.
    pub fixtures: u32,
    /// Training samples per fixture.
    pub samples: u64,
    /// Range of the unfittable mass `q` (the true gap), within `(0, 0.5]`.
    pub q_min: f64,
    pub q_max: f64,
    /// At least 4.5, so fixture log-costs fit below the range.
    pub log_range: f64,
    pub grid_step: f64,
    /// Confidence parameter fed to the sample-size inversion.
    pub confidence: f64,
    /// Leading constant of the sample-complexity bound.
    pub complexity_const: f64,
    /// Bisection tolerance for the brute-force gap.
    pub tolerance: f64,
}

impl Default for AgnosticDeltaConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            fixtures: 20,
            samples: 5_000,
            q_min: 0.08,
            q_max: 0.5,
            log_range: 5.0,
            grid_step: 0.05,
            confidence: 0.1,
            complexity_const: 1.0,
            tolerance: 1e-6,
        }
    }
}

/// Loss-comparison parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossCompareConfig {
    pub seed: u64,
    /// Center of the symmetric two-atom fixtures.
    pub center: f64,
    /// Half-gaps of the symmetric fixtures, each in `(0, center]`.
    pub deltas: Vec<f64>,
    /// Adversary strengths for the absolute-loss fixtures, each in
    /// `(0, 0.25]`.
    pub abs_eps: Vec<f64>,
    /// Trust level for competitive training and the augmented run.
    pub epsilon: f64,
    /// Grid pitch of the constant hypothesis family.
    pub grid_step: f64,
}

impl Default for LossCompareConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            center: 5.0,
            deltas: vec![4.0, 0.5],
            abs_eps: vec![0.01, 0.04, 0.25],
            epsilon: 0.5,
            grid_step: 0.05,
        }
    }
}

/// Optimal-policy lower-bound parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowerboundDemoConfig {
    pub seed: u64,
    /// Early-stop probabilities for the two-point fixtures, each in (0, 1).
    pub p_values: Vec<f64>,
    /// Adversary strengths for the efficiency fixtures, each in (0, 0.5].
    pub eff_eps: Vec<f64>,
    /// Prediction the efficiency fixtures are built around.
    pub eff_y_hat: f64,
}

impl Default for LowerboundDemoConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            p_values: vec![0.1, 1.0 / 3.0, 0.5, 0.9],
            eff_eps: vec![0.05, 0.1, 0.2],
            eff_y_hat: 1.0,
        }
    }
}

/// A fully specified experiment.
#[derive(Clone, Debug, PartialEq)]
pub enum ExperimentConfig {
    DoubleBound(DoubleBoundConfig),
    PadFrontier(PadFrontierConfig),
    StandardSweep(StandardSweepConfig),
    AgnosticDelta(AgnosticDeltaConfig),
    LossCompare(LossCompareConfig),
    LowerboundDemo(LowerboundDemoConfig),
}

fn bad(field: &str, reason: impl std::fmt::Display) -> Error {
    Error::InvalidConfig(format!("{field}: {reason}"))
}

fn check_unit_open(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 || v >= 1.0 {
        return Err(bad(field, format_args!("must lie strictly inside (0, 1), got {v}")));
    }
    Ok(())
}

fn check_positive(field: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(bad(field, format_args!("must be finite and positive, got {v}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        match self {
            ExperimentConfig::DoubleBound(_) => ExperimentKind::DoubleBound,
            ExperimentConfig::PadFrontier(_) => ExperimentKind::PadFrontier,
            ExperimentConfig::StandardSweep(_) => ExperimentKind::StandardSweep,
            ExperimentConfig::AgnosticDelta(_) => ExperimentKind::AgnosticDelta,
            ExperimentConfig::LossCompare(_) => ExperimentKind::LossCompare,
            ExperimentConfig::LowerboundDemo(_) => ExperimentKind::LowerboundDemo,
        }
    }

    pub fn default_for(kind: ExperimentKind) -> Self {
        match kind {
            ExperimentKind::DoubleBound => Self::DoubleBound(Default::default()),
            ExperimentKind::PadFrontier => Self::PadFrontier(Default::default()),
            ExperimentKind::StandardSweep => Self::StandardSweep(Default::default()),
            ExperimentKind::AgnosticDelta => Self::AgnosticDelta(Default::default()),
            ExperimentKind::LossCompare => Self::LossCompare(Default::default()),
            ExperimentKind::LowerboundDemo => Self::LowerboundDemo(Default::default()),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            ExperimentConfig::DoubleBound(c) => c.seed,
            ExperimentConfig::PadFrontier(c) => c.seed,
            ExperimentConfig::StandardSweep(c) => c.seed,
            ExperimentConfig::AgnosticDelta(c) => c.seed,
            ExperimentConfig::LossCompare(c) => c.seed,
            ExperimentConfig::LowerboundDemo(c) => c.seed,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            ExperimentConfig::DoubleBound(c) => c.seed = seed,
            ExperimentConfig::PadFrontier(c) => c.seed = seed,
            ExperimentConfig::StandardSweep(c) => c.seed = seed,
            ExperimentConfig::AgnosticDelta(c) => c.seed = seed,
            ExperimentConfig::LossCompare(c) => c.seed = seed,
            ExperimentConfig::LowerboundDemo(c) => c.seed = seed,
        }
    }

    /// Parses and validates a JSON config. The `kind` field selects the
    /// suite; all other fields must belong to that suite.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let obj = value
            .as_object_mut()
            .ok_or_else(|| Error::InvalidConfig("top level must be a JSON object".into()))?;
        let kind_value = obj
            .remove("kind")
            .ok_or_else(|| Error::InvalidConfig("missing required field `kind`".into()))?;
        let tag = kind_value
            .as_str()
            .ok_or_else(|| Error::InvalidConfig("`kind` must be a string".into()))?
            .to_owned();
        let kind = ExperimentKind::from_tag(&tag).ok_or_else(|| {
            Error::InvalidConfig(format!(
                "unknown kind `{tag}`; expected one of {}",
                ExperimentKind::ALL.map(|k| k.tag()).join(", ")
            ))
        })?;
        let config = match kind {
            ExperimentKind::DoubleBound => {
                ExperimentConfig::DoubleBound(serde_json::from_value(value)?)
            }
            ExperimentKind::PadFrontier => {
                ExperimentConfig::PadFrontier(serde_json::from_value(value)?)
            }
            ExperimentKind::StandardSweep => {
                ExperimentConfig::StandardSweep(serde_json::from_value(value)?)
            }
            ExperimentKind::AgnosticDelta => {
                ExperimentConfig::AgnosticDelta(serde_json::from_value(value)?)
            }
            ExperimentKind::LossCompare => {
                ExperimentConfig::LossCompare(serde_json::from_value(value)?)
            }
            ExperimentKind::LowerboundDemo => {
                ExperimentConfig::LowerboundDemo(serde_json::from_value(value)?)
            }
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut value = match self {
            ExperimentConfig::DoubleBound(c) => serde_json::to_value(c)?,
            ExperimentConfig::PadFrontier(c) => serde_json::to_value(c)?,
            ExperimentConfig::StandardSweep(c) => serde_json::to_value(c)?,
            ExperimentConfig::AgnosticDelta(c) => serde_json::to_value(c)?,
            ExperimentConfig::LossCompare(c) => serde_json::to_value(c)?,
            ExperimentConfig::LowerboundDemo(c) => serde_json::to_value(c)?,
        };
        value
            .as_object_mut()
            .expect("configs serialize to objects")
            .insert("kind".into(), self.kind().tag().into());
        Ok(serde_json::to_string_pretty(&value)?)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ExperimentConfig::DoubleBound(c) => {
                if c.curves == 0 {
                    return Err(bad("curves", "need at least one curve"));
                }
                if c.horizon_min < 1 || c.horizon_min > c.horizon_max {
                    return Err(bad(
                        "horizon_min",
                        format_args!(
                            "need 1 <= horizon_min <= horizon_max, got [{}, {}]",
                            c.horizon_min, c.horizon_max
                        ),
                    ));
                }
                if c.horizon_max > 100_000 {
                    return Err(bad("horizon_max", "must be at most 100000"));
                }
                check_positive("log_range", c.log_range)?;
                if !(0.0..1.0).contains(&c.plateau_prob) {
                    return Err(bad(
                        "plateau_prob",
                        format_args!("must lie in [0, 1), got {}", c.plateau_prob),
                    ));
                }
                if !c.max_jump.is_finite() || c.max_jump <= 1.0 {
                    return Err(bad(
                        "max_jump",
                        format_args!("must be finite and greater than 1, got {}", c.max_jump),
                    ));
                }
            }
            ExperimentConfig::PadFrontier(c) => {
                if c.epsilons.is_empty() {
                    return Err(bad("epsilons", "need at least one trust level"));
                }
                for &e in &c.epsilons {
                    if !e.is_finite() || e <= 0.0 || e > 1.0 {
                        return Err(bad(
                            "epsilons",
                            format_args!("each must lie in (0, 1], got {e}"),
                        ));
                    }
                }
                if !c.base.is_finite() || c.base <= 1.0 {
                    return Err(bad("base", "must be finite and greater than 1"));
                }
                if c.horizon < 1 {
                    return Err(bad("horizon", "must be at least 1"));
                }
                if c.t_hat < 1 || c.t_hat > c.horizon {
                    return Err(bad(
                        "t_hat",
                        format_args!("must lie in [1, horizon], got {}", c.t_hat),
                    ));
                }
                check_positive("log_range", c.log_range)?;
            }
            ExperimentConfig::StandardSweep(c) => {
                if c.trials == 0 {
                    return Err(bad("trials", "need at least one trial"));
                }
                if c.sample_sizes.is_empty() {
                    return Err(bad("sample_sizes", "need at least one size"));
                }
                if c.sample_sizes[0] == 0 {
                    return Err(bad("sample_sizes", "sizes must be at least 1"));
                }
                if c.sample_sizes.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(bad("sample_sizes", "sizes must be strictly increasing"));
                }
                if *c.sample_sizes.last().expect("nonempty") > 1_000_000 {
                    return Err(bad("sample_sizes", "sizes must be at most 1000000"));
                }
                if !c.epsilon.is_finite() || c.epsilon <= 0.0 || c.epsilon > 1.0 {
                    return Err(bad(
                        "epsilon",
                        format_args!("must lie in (0, 1], got {}", c.epsilon),
                    ));
                }
                if c.features == 0 {
                    return Err(bad("features", "need at least one key"));
                }
                check_positive("log_range", c.log_range)?;
                check_positive("grid_step", c.grid_step)?;
                if c.grid_step > c.epsilon / 2.0 {
                    return Err(bad(
                        "grid_step",
                        format_args!(
                            "must be at most epsilon/2 = {}, got {}",
                            c.epsilon / 2.0,
                            c.grid_step
                        ),
                    ));
                }
                if !c.base.is_finite() || c.base <= 1.0 {
                    return Err(bad("base", "must be finite and greater than 1"));
                }
                if c.horizon < 1 {
                    return Err(bad("horizon", "must be at least 1"));
                }
            }
            ExperimentConfig::AgnosticDelta(c) => {
                if c.fixtures == 0 {
                    return Err(bad("fixtures", "need at least one fixture"));
                }
                if c.samples == 0 {
                    return Err(bad("samples", "need at least one sample"));
                }
                if !c.q_min.is_finite()
                    || !c.q_max.is_finite()
                    || c.q_min <= 0.0
                    || c.q_min > c.q_max
                    || c.q_max > 0.5
                {
                    return Err(bad(
                        "q_min",
                        format_args!(
                            "need 0 < q_min <= q_max <= 0.5, got [{}, {}]",
                            c.q_min, c.q_max
                        ),
                    ));
                }
                if !c.log_range.is_finite() || c.log_range < 4.5 {
                    return Err(bad("log_range", "must be at least 4.5"));
                }
                check_positive("grid_step", c.grid_step)?;
                check_unit_open("confidence", c.confidence)?;
                check_positive("complexity_const", c.complexity_const)?;
                check_positive("tolerance", c.tolerance)?;
            }
            ExperimentConfig::LossCompare(c) => {
                check_positive("center", c.center)?;
                if c.deltas.is_empty() {
                    return Err(bad("deltas", "need at least one half-gap"));
                }
                for &d in &c.deltas {
                    if !d.is_finite() || d <= 0.0 || d > c.center {
                        return Err(bad(
                            "deltas",
                            format_args!("each must lie in (0, center], got {d}"),
                        ));
                    }
                }
                if c.abs_eps.is_empty() {
                    return Err(bad("abs_eps", "need at least one strength"));
                }
                for &e in &c.abs_eps {
                    if !e.is_finite() || e <= 0.0 || e > 0.25 {
                        return Err(bad(
                            "abs_eps",
                            format_args!("each must lie in (0, 0.25], got {e}"),
                        ));
                    }
                }
                if !c.epsilon.is_finite() || c.epsilon <= 0.0 || c.epsilon > 1.0 {
                    return Err(bad(
                        "epsilon",
                        format_args!("must lie in (0, 1], got {}", c.epsilon),
                    ));
                }
                check_positive("grid_step", c.grid_step)?;
            }
            ExperimentConfig::LowerboundDemo(c) => {
                if c.p_values.is_empty() {
                    return Err(bad("p_values", "need at least one probability"));
                }
                for &p in &c.p_values {
                    check_unit_open("p_values", p)?;
                }
                if c.eff_eps.is_empty() {
                    return Err(bad("eff_eps", "need at least one strength"));
                }
                for &e in &c.eff_eps {
                    if !e.is_finite() || e <= 0.0 || e > 0.5 {
                        return Err(bad(
                            "eff_eps",
                            format_args!("each must lie in (0, 0.5], got {e}"),
                        ));
                    }
                }
                check_positive("eff_y_hat", c.eff_y_hat)?;
            }
        }
        Ok(())
    }
}
