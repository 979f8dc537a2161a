//! The experiment suites behind each config kind.
//!
//! Every suite is a pure function from a validated config to report rows:
//! all randomness flows through per-trial seeds derived from the config
//! seed, so reruns (and thread-count changes) reproduce rows exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algorithms::{
    predicted_length, run_double, run_predict_and_double, run_thresholds, ThresholdStrategy,
};
use crate::curve::{analytic_curve, CurveShape, OptCurve};
use crate::distributions::{
    absloss_curve, draw_samples, make_absloss_adversary, make_efficiency_lowerbound,
    make_standard_instance, make_symmetric, make_two_point, random_monotone_curve,
    symmetric_curve, two_point_curve, DiscreteDistribution, Feature, Sample,
    SHARED_FEATURE,
};
use crate::error::{Error, Result};
use crate::exec;
use crate::harness::config::{
    AgnosticDeltaConfig, DoubleBoundConfig, ExperimentConfig, ExperimentKind, LossCompareConfig,
    LowerboundDemoConfig, PadFrontierConfig, StandardSweepConfig,
};
use crate::harness::report::{self, ReportRow};
use crate::learn::{
    accuracy_for_sample_size, delta_f_bruteforce, estimate_delta, optimal_policy_bruteforce,
    sem_minimize, sem_minimize_dist, HypothesisFamily, ValueGrid,
};
use crate::loss::{absolute_loss, dist_error, weighted_mean, weighted_median};

/// Added to a trial seed when drawing samples, so sample draws and instance
/// construction never share a stream.
const DRAW_SEED_OFFSET: u64 = 0x9E37_79B9_7F4A_7C15;

/// Runs the suite a config names and returns its rows, sorted and checked.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ReportRow>> {
    config.validate()?;
    let mut rows = match config {
        ExperimentConfig::DoubleBound(c) => double_bound(c)?,
        ExperimentConfig::PadFrontier(c) => pad_frontier(c)?,
        ExperimentConfig::StandardSweep(c) => standard_sweep(c)?,
        ExperimentConfig::AgnosticDelta(c) => agnostic_delta(c)?,
        ExperimentConfig::LossCompare(c) => loss_compare(c)?,
        ExperimentConfig::LowerboundDemo(c) => lowerbound_demo(c)?,
    };
    report::sort_rows(&mut rows);
    report::validate_rows(&rows)?;
    Ok(rows)
}

/// Expected ratio of the prediction-augmented run over a distribution's
/// atoms, with predictions supplied per feature.
fn expected_pad_cr(
    curve: &OptCurve,
    dist: &DiscreteDistribution,
    predict: impl Fn(&Feature) -> f64,
    eps: f64,
) -> Result<f64> {
    let mut total = 0.0;
    for (s, p) in dist.atoms() {
        let t_true = predicted_length(curve, s.y);
        let t_hat = predicted_length(curve, predict(&s.x));
        let record = run_predict_and_double(curve, t_true, t_hat, eps)?;
        total += p * record.competitive_ratio(curve)?;
    }
    Ok(total)
}

/// Expected ratio of a fixed threshold strategy over a distribution's atoms.
fn expected_threshold_cr(
    curve: &OptCurve,
    dist: &DiscreteDistribution,
    strategy: &ThresholdStrategy,
) -> Result<f64> {
    let mut total = 0.0;
    for (s, p) in dist.atoms() {
        let t = predicted_length(curve, s.y);
        total += p * run_thresholds(curve, t, strategy)?.competitive_ratio(curve)?;
    }
    Ok(total)
}

/// Exponential curve with log-cost resolution 0.01 up to `max_log_cost`,
/// fine enough that stop-time rounding is negligible.
fn dense_exponential(max_log_cost: f64) -> Result<OptCurve> {
    let resolution = 0.01;
    let horizon = (max_log_cost / resolution).floor() as u32 + 1;
    analytic_curve(
        &CurveShape::Exponential {
            base: resolution.exp(),
            horizon,
        },
        max_log_cost,
    )
}

/// Worst-case doubling over random monotone curves: every curve is checked
/// at every stopping time and the worst ratio is reported per curve.
fn double_bound(cfg: &DoubleBoundConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::DoubleBound.tag();
    let per_curve = exec::map_indexed(cfg.curves as usize, |i| -> Result<(u32, u32, f64)> {
        let trial_seed = cfg.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        let horizon = rng.gen_range(cfg.horizon_min..=cfg.horizon_max);
        let curve = random_monotone_curve(
            &mut rng,
            horizon,
            cfg.log_range,
            cfg.plateau_prob,
            cfg.max_jump,
        )?;
        let mut worst_t = 1;
        let mut max_cr = f64::NEG_INFINITY;
        for t in 1..=horizon {
            let cr = run_double(&curve, t)?.competitive_ratio(&curve)?;
            if cr > max_cr {
                max_cr = cr;
                worst_t = t;
            }
        }
        Ok((horizon, worst_t, max_cr))
    });

    let mut rows = Vec::with_capacity(cfg.curves as usize + 1);
    let mut overall = f64::NEG_INFINITY;
    for (i, result) in per_curve.into_iter().enumerate() {
        let (horizon, worst_t, max_cr) = result?;
        overall = overall.max(max_cr);
        rows.push(ReportRow::new(
            tag,
            i as u64,
            format!("horizon={horizon};worst_t={worst_t}"),
            "max_cr",
            max_cr,
            cfg.seed.wrapping_add(i as u64),
        ));
    }
    rows.push(ReportRow::new(
        tag,
        u64::from(cfg.curves),
        "scope=aggregate",
        "max_cr_overall",
        overall,
        cfg.seed,
    ));
    Ok(rows)
}

/// Consistency and worst-case ratio of the augmented run per trust level,
/// against a fixed prediction on one exponential curve.
fn pad_frontier(cfg: &PadFrontierConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::PadFrontier.tag();
    let curve = analytic_curve(
        &CurveShape::Exponential {
            base: cfg.base,
            horizon: cfg.horizon,
        },
        cfg.log_range,
    )?;

    let mut rows = Vec::new();
    for (i, &eps) in cfg.epsilons.iter().enumerate() {
        let consistency = run_predict_and_double(&curve, cfg.t_hat, cfg.t_hat, eps)?
            .competitive_ratio(&curve)?;
        let ratios = exec::map_indexed(cfg.horizon as usize, |idx| -> Result<f64> {
            run_predict_and_double(&curve, idx as u32 + 1, cfg.t_hat, eps)?
                .competitive_ratio(&curve)
        });
        let mut max_cr = f64::NEG_INFINITY;
        let mut worst_t = 1;
        for (idx, ratio) in ratios.into_iter().enumerate() {
            let cr = ratio?;
            if cr > max_cr {
                max_cr = cr;
                worst_t = idx as u32 + 1;
            }
        }

        let params = format!("eps={eps};t_hat={}", cfg.t_hat);
        let trial = i as u64;
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "consistency_cr",
            consistency,
            cfg.seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "consistency_bound",
            1.0 + eps,
            cfg.seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "max_cr",
            max_cr,
            cfg.seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "robustness_bound",
            5.0 * (1.0 + 1.0 / eps),
            cfg.seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params,
            "worst_t",
            f64::from(worst_t),
            cfg.seed,
        ));
    }
    Ok(rows)
}

/// Train-then-run over random realizable lookup instances for growing
/// training budgets. Each trial draws the largest budget once and trains on
/// prefixes; the reported value is the exact expected ratio over the atoms.
fn standard_sweep(cfg: &StandardSweepConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::StandardSweep.tag();
    let curve = analytic_curve(
        &CurveShape::Exponential {
            base: cfg.base,
            horizon: cfg.horizon,
        },
        cfg.log_range,
    )?;
    let max_m = *cfg.sample_sizes.last().expect("validated nonempty") as usize;

    let per_trial = exec::map_indexed(cfg.trials as usize, |i| -> Result<Vec<f64>> {
        let trial_seed = cfg.seed.wrapping_add(i as u64);
        let instance =
            make_standard_instance(cfg.features, cfg.log_range, cfg.grid_step, trial_seed)?;
        let samples = draw_samples(
            &instance.dist,
            max_m,
            trial_seed.wrapping_add(DRAW_SEED_OFFSET),
        )?;
        cfg.sample_sizes
            .iter()
            .map(|&m| {
                let trained =
                    sem_minimize(&instance.family, &samples[..m as usize], cfg.epsilon)?;
                expected_pad_cr(
                    &curve,
                    &instance.dist,
                    |x| trained.predictor.predict(x),
                    cfg.epsilon,
                )
            })
            .collect()
    });

    let mut rows = Vec::new();
    let mut sums = vec![0.0; cfg.sample_sizes.len()];
    for (i, result) in per_trial.into_iter().enumerate() {
        let ratios = result?;
        for (j, (&m, &cr)) in cfg.sample_sizes.iter().zip(&ratios).enumerate() {
            sums[j] += cr;
            rows.push(ReportRow::new(
                tag,
                i as u64,
                format!("m={m}"),
                "expected_cr",
                cr,
                cfg.seed.wrapping_add(i as u64),
            ));
        }
    }
    for (&m, &sum) in cfg.sample_sizes.iter().zip(&sums) {
        rows.push(ReportRow::new(
            tag,
            u64::from(cfg.trials),
            format!("m={m};scope=aggregate"),
            "mean_expected_cr",
            sum / f64::from(cfg.trials),
            cfg.seed,
        ));
    }
    Ok(rows)
}

/// Agnostic-gap estimation on random two-atom fixtures. Each fixture's true
/// gap is computed by brute force and the sample-based estimate must bracket
/// it within constant factors.
fn agnostic_delta(cfg: &AgnosticDeltaConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::AgnosticDelta.tag();
    let grid = ValueGrid::new(0.0, cfg.log_range, cfg.grid_step)?;
    let family = HypothesisFamily::constant(grid.clone())?;
    let eps0 = accuracy_for_sample_size(
        cfg.samples,
        cfg.log_range,
        family.pseudo_dimension(),
        cfg.confidence,
        cfg.complexity_const,
    )?;

    // The lighter atom sits on the grid in the lower half of the range and
    // the heavier one a fixed gap above it, far enough that no single value
    // fits both: the best tradeoff flattens at exactly the light mass.
    let values = grid.values();
    let lo_min = (0.1 * cfg.log_range / cfg.grid_step).ceil() as usize;
    let lo_max = (0.5 * cfg.log_range / cfg.grid_step).floor() as usize;
    if lo_min > lo_max {
        return Err(Error::InvalidConfig(format!(
            "grid_step {} is too coarse for log_range {}",
            cfg.grid_step, cfg.log_range
        )));
    }

    let per_fixture =
        exec::map_indexed(cfg.fixtures as usize, |i| -> Result<(f64, f64, f64)> {
            let fixture_seed = cfg.seed.wrapping_add(i as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(fixture_seed);
            let q = rng.gen_range(cfg.q_min..=cfg.q_max);
            let y_lo = values[rng.gen_range(lo_min..=lo_max)];
            let y_hi = y_lo + rng.gen_range(1.5..=2.0);
            let dist = DiscreteDistribution::new(
                vec![
                    (Sample { x: SHARED_FEATURE, y: y_lo }, 1.0 - q),
                    (Sample { x: SHARED_FEATURE, y: y_hi }, q),
                ],
                cfg.log_range,
            )?;
            let delta_f = delta_f_bruteforce(&family, &dist, cfg.tolerance)?;
            let samples = draw_samples(
                &dist,
                cfg.samples as usize,
                fixture_seed.wrapping_add(DRAW_SEED_OFFSET),
            )?;
            let eps_hat = estimate_delta(&family, &samples, eps0)?;
            Ok((q, delta_f, eps_hat))
        });

    let mut rows = Vec::new();
    let mut hits = 0u32;
    for (i, result) in per_fixture.into_iter().enumerate() {
        let (q, delta_f, eps_hat) = result?;
        let bracket_ok = 5.0 / 36.0 * eps_hat <= delta_f && delta_f <= 17.0 / 8.0 * eps_hat;
        hits += u32::from(bracket_ok);
        let trial = i as u64;
        let params = format!("q={q};m={}", cfg.samples);
        let seed = cfg.seed.wrapping_add(trial);
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "delta_f",
            delta_f,
            seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params.clone(),
            "epsilon_hat",
            eps_hat,
            seed,
        ));
        rows.push(ReportRow::new(
            tag,
            trial,
            params,
            "bracket_ok",
            f64::from(u8::from(bracket_ok)),
            seed,
        ));
    }
    rows.push(ReportRow::new(
        tag,
        u64::from(cfg.fixtures),
        format!("scope=aggregate;eps0={eps0}"),
        "bracket_hit_rate",
        f64::from(hits) / f64::from(cfg.fixtures),
        cfg.seed,
    ));
    Ok(rows)
}

/// Competitive-loss training against mean and median predictors on fixtures
/// where symmetric losses are maximally misleading.
fn loss_compare(cfg: &LossCompareConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::LossCompare.tag();
    let mut rows = Vec::new();
    let mut trial = 0u64;

    let push = |rows: &mut Vec<ReportRow>, trial, params: &str, metric, value| {
        rows.push(ReportRow::new(tag, trial, params, metric, value, cfg.seed));
    };

    for &delta in &cfg.deltas {
        let dist = make_symmetric(cfg.center, delta)?;
        let branch_curve = symmetric_curve(cfg.center, delta)?;
        let params = format!("fixture=symmetric;center={};delta={delta}", cfg.center);

        // Symmetric losses cannot see the gap: mean and median both land at
        // the center, leaving only a bad choice between trusting the cheap
        // level and hedging upward.
        let y_mean = weighted_mean(&dist);
        let y_median = weighted_median(&dist);
        let trust = ThresholdStrategy::new(vec![3, 4])?;
        let hedge = ThresholdStrategy::new(vec![2, 3, 4])?;
        let trust_cr = expected_threshold_cr(&branch_curve, &dist, &trust)?;
        let hedge_cr = expected_threshold_cr(&branch_curve, &dist, &hedge)?;

        // Competitive training picks the cheap level instead; run the full
        // augmented pipeline on a finely resolved curve.
        let grid = ValueGrid::new(0.0, cfg.center + delta, cfg.grid_step)?;
        let family = HypothesisFamily::constant(grid)?;
        let trained = sem_minimize_dist(&family, &dist, cfg.epsilon)?;
        let y_comp = trained.predictor.predict(&SHARED_FEATURE);
        let dense = dense_exponential(cfg.center + delta)?;
        let pipeline_cr = expected_pad_cr(&dense, &dist, |_| y_comp, cfg.epsilon)?;

        push(&mut rows, trial, &params, "mean_prediction", y_mean);
        push(&mut rows, trial, &params, "median_prediction", y_median);
        push(&mut rows, trial, &params, "competitive_prediction", y_comp);
        push(&mut rows, trial, &params, "trust_cr", trust_cr);
        push(
            &mut rows,
            trial,
            &params,
            "trust_floor",
            (1.0 + delta.exp()) / 2.0,
        );
        push(&mut rows, trial, &params, "hedge_cr", hedge_cr);
        push(
            &mut rows,
            trial,
            &params,
            "hedge_floor",
            1.0 + (-delta).exp() / 2.0,
        );
        push(&mut rows, trial, &params, "competitive_cr", pipeline_cr);
        trial += 1;
    }

    for &eps in &cfg.abs_eps {
        let dist = make_absloss_adversary(eps)?;
        let curve = absloss_curve(eps)?;
        let params = format!("fixture=absolute;eps={eps}");

        // Absolute-loss training is nearly perfect here, yet even the best
        // stopping policy pays a ratio growing with sqrt(eps).
        let y_median = weighted_median(&dist);
        let abs_error = dist.expectation(|s| absolute_loss(s.y, y_median));
        let best = optimal_policy_bruteforce(&dist, &curve)?;

        // The competitive pipeline hedges upward on its own and stays under
        // the global cap.
        let top = 1.0 + eps.sqrt();
        let grid = ValueGrid::new(0.0, top, cfg.grid_step)?;
        let family = HypothesisFamily::constant(grid)?;
        let trained = sem_minimize_dist(&family, &dist, cfg.epsilon)?;
        let y_comp = trained.predictor.predict(&SHARED_FEATURE);
        let dense = dense_exponential(top)?;
        let pipeline_cr = expected_pad_cr(&dense, &dist, |_| y_comp, cfg.epsilon)?;

        push(&mut rows, trial, &params, "median_prediction", y_median);
        push(&mut rows, trial, &params, "median_abs_error", abs_error);
        push(
            &mut rows,
            trial,
            &params,
            "best_expected_cr",
            best.expected_cr,
        );
        push(&mut rows, trial, &params, "cr_floor", 1.0 + eps.sqrt() / 2.0);
        push(&mut rows, trial, &params, "competitive_prediction", y_comp);
        push(&mut rows, trial, &params, "competitive_cr", pipeline_cr);
        trial += 1;
    }
    Ok(rows)
}

/// Exact optimal stopping policies on small fixtures, next to their closed
/// forms and the training error that fails to predict them.
fn lowerbound_demo(cfg: &LowerboundDemoConfig) -> Result<Vec<ReportRow>> {
    let tag = ExperimentKind::LowerboundDemo.tag();
    let mut rows = Vec::new();
    let mut trial = 0u64;

    let push = |rows: &mut Vec<ReportRow>, trial, params: &str, metric, value| {
        rows.push(ReportRow::new(tag, trial, params, metric, value, cfg.seed));
    };

    let curve = two_point_curve();
    let trust = ThresholdStrategy::new(vec![3])?;
    let hedge = ThresholdStrategy::new(vec![2, 3])?;
    for &p in &cfg.p_values {
        let dist = make_two_point(p)?;
        let params = format!("fixture=two-point;p={p}");
        let best = optimal_policy_bruteforce(&dist, &curve)?;
        let trust_cr = expected_threshold_cr(&curve, &dist, &trust)?;
        let hedge_cr = expected_threshold_cr(&curve, &dist, &hedge)?;

        push(&mut rows, trial, &params, "rho_star", best.expected_cr);
        push(
            &mut rows,
            trial,
            &params,
            "closed_form",
            (1.0 + p).min(1.5 - 0.5 * p),
        );
        push(&mut rows, trial, &params, "trust_cr", trust_cr);
        push(&mut rows, trial, &params, "hedge_cr", hedge_cr);
        trial += 1;
    }

    for &eps in &cfg.eff_eps {
        let dist = make_efficiency_lowerbound(eps, cfg.eff_y_hat)?;
        let curve = crate::distributions::efficiency_lowerbound_curve(eps, cfg.eff_y_hat)?;
        let params = format!("fixture=efficiency;eps={eps};y_hat={}", cfg.eff_y_hat);

        // A constant prediction at y_hat looks excellent under the training
        // loss, but the best policy still pays at least 1 + eps/2.
        let prediction_error = dist_error(|_| cfg.eff_y_hat, &dist, eps)?;
        let best = optimal_policy_bruteforce(&dist, &curve)?;

        push(
            &mut rows,
            trial,
            &params,
            "prediction_error",
            prediction_error,
        );
        push(&mut rows, trial, &params, "rho_star", best.expected_cr);
        push(&mut rows, trial, &params, "rho_floor", 1.0 + eps / 2.0);
        trial += 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;

    fn rows_for(text: &str) -> Vec<ReportRow> {
        let config = ExperimentConfig::from_json_str(text).unwrap();
        run_experiment(&config).unwrap()
    }

    fn value_of<'a>(rows: &'a [ReportRow], trial: u64, metric: &str) -> &'a ReportRow {
        rows.iter()
            .find(|r| r.trial == trial && r.metric == metric)
            .unwrap_or_else(|| panic!("no row for trial {trial}, metric {metric}"))
    }

    #[test]
    fn double_bound_rows_stay_under_four_and_rerun_identically() {
        let text = r#"{"kind":"double-bound","curves":40,"horizon_min":5,"horizon_max":60}"#;
        let rows = rows_for(text);
        assert_eq!(rows.len(), 41);
        for row in &rows {
            assert!(row.value <= 4.0, "{row:?}");
            assert!(row.value >= 1.0);
        }
        let aggregate = value_of(&rows, 40, "max_cr_overall");
        assert_eq!(aggregate.params, "scope=aggregate");
        assert_eq!(rows, rows_for(text));
    }

    #[test]
    fn double_bound_is_thread_count_invariant() {
        let text = r#"{"kind":"double-bound","curves":16,"horizon_min":5,"horizon_max":40}"#;
        let one = exec::with_thread_limit(Some(1), || rows_for(text));
        let four = exec::with_thread_limit(Some(4), || rows_for(text));
        assert_eq!(one, four);
    }

    #[test]
    fn pad_frontier_rows_respect_their_bounds() {
        let rows = rows_for(
            r#"{"kind":"pad-frontier","epsilons":[0.2,1.0],"base":1.01,"horizon":900,"log_range":9.0,"t_hat":450}"#,
        );
        for trial in 0..2 {
            let consistency = value_of(&rows, trial, "consistency_cr").value;
            let consistency_bound = value_of(&rows, trial, "consistency_bound").value;
            let max_cr = value_of(&rows, trial, "max_cr").value;
            let robustness_bound = value_of(&rows, trial, "robustness_bound").value;
            assert!(consistency <= consistency_bound + 1e-12);
            assert!(max_cr <= robustness_bound + 1e-12);
            assert!(consistency <= max_cr + 1e-12);
        }
    }

    #[test]
    fn standard_sweep_reports_per_trial_and_aggregate_rows() {
        let text = r#"{"kind":"standard-sweep","trials":3,"sample_sizes":[5,40],
                       "features":3,"log_range":3.0,"base":1.01,"horizon":300}"#;
        let rows = rows_for(text);
        // 3 trials x 2 sizes + 2 aggregates.
        assert_eq!(rows.len(), 8);
        let aggregates: Vec<_> = rows.iter().filter(|r| r.trial == 3).collect();
        assert_eq!(aggregates.len(), 2);
        for row in &rows {
            assert!(row.value >= 1.0 - 1e-12, "{row:?}");
            assert!(row.value <= 10.0 + 1.0 / 0.2, "{row:?}");
        }
        let small = value_of(&rows, 3, "mean_expected_cr");
        assert!(small.params.starts_with("m=5"));
    }

    #[test]
    fn agnostic_delta_estimates_bracket_the_true_gap() {
        let text = r#"{"kind":"agnostic-delta","fixtures":3,"samples":400,
                       "q_min":0.2,"q_max":0.4,"tolerance":1e-5}"#;
        let rows = rows_for(text);
        assert_eq!(rows.len(), 10);
        for trial in 0..3 {
            let delta_f = value_of(&rows, trial, "delta_f").value;
            let eps_hat = value_of(&rows, trial, "epsilon_hat").value;
            assert!(delta_f > 0.0 && delta_f < 0.5);
            assert!(eps_hat > 0.0 && eps_hat <= 2.0);
            assert_eq!(value_of(&rows, trial, "bracket_ok").value, 1.0);
        }
        assert_eq!(value_of(&rows, 3, "bracket_hit_rate").value, 1.0);
    }

    #[test]
    fn loss_compare_shows_the_symmetric_training_penalty() {
        let rows = rows_for(r#"{"kind":"loss-compare","deltas":[2.0],"abs_eps":[0.25]}"#);
        let trust_cr = value_of(&rows, 0, "trust_cr").value;
        let hedge_cr = value_of(&rows, 0, "hedge_cr").value;
        assert!(trust_cr >= value_of(&rows, 0, "trust_floor").value - 1e-12);
        assert!(hedge_cr >= value_of(&rows, 0, "hedge_floor").value - 1e-12);
        // Mean and median stay blind at the center; competitive training
        // finds the cheap level and the pipeline stays under the global cap.
        assert!((value_of(&rows, 0, "mean_prediction").value - 5.0).abs() < 1e-12);
        assert!((value_of(&rows, 0, "median_prediction").value - 5.0).abs() < 1e-12);
        assert!((value_of(&rows, 0, "competitive_prediction").value - 3.0).abs() < 1e-12);
        assert!(value_of(&rows, 0, "competitive_cr").value <= 4.0);

        let best = value_of(&rows, 1, "best_expected_cr").value;
        assert!(best >= value_of(&rows, 1, "cr_floor").value - 1e-12);
        assert!(value_of(&rows, 1, "median_abs_error").value <= 0.25 + 1e-12);
        assert!(value_of(&rows, 1, "competitive_cr").value <= 4.0);
    }

    #[test]
    fn lowerbound_demo_matches_closed_forms() {
        let rows = rows_for(
            r#"{"kind":"lowerbound-demo","p_values":[0.5],"eff_eps":[0.2],"eff_y_hat":1.0}"#,
        );
        let rho = value_of(&rows, 0, "rho_star").value;
        assert!((rho - 1.25).abs() < 1e-12);
        assert!((value_of(&rows, 0, "closed_form").value - 1.25).abs() < 1e-12);
        assert!((value_of(&rows, 0, "trust_cr").value - 1.5).abs() < 1e-12);
        assert!((value_of(&rows, 0, "hedge_cr").value - 1.25).abs() < 1e-12);

        let eff_rho = value_of(&rows, 1, "rho_star").value;
        assert!(eff_rho >= value_of(&rows, 1, "rho_floor").value - 1e-12);
        assert!((value_of(&rows, 1, "prediction_error").value - 0.2).abs() < 1e-12);
    }

    #[test]
    fn rows_come_out_sorted_by_trial() {
        let rows = rows_for(r#"{"kind":"lowerbound-demo"}"#);
        let trials: Vec<_> = rows.iter().map(|r| r.trial).collect();
        let mut sorted = trials.clone();
        sorted.sort_unstable();
        assert_eq!(trials, sorted);
    }
}
