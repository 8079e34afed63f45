//! The acceptance gate: nine end-to-end checks tying estimators, policies,
//! bounds, and the harness together. Every test prints a one-line verdict
//! before asserting so that a red run still reports each outcome.
//!
//! The three regret experiments behind checks 3, 4, and 8 dominate the
//! runtime; they execute once and are shared through a fixture.

use std::sync::OnceLock;

use heavytail::bounds::{
    expected_pulls_bound, prop1_free_bound, prop1_gap_bound, thm_catoni_bound, thm_mom_bound,
    thm_truncated_bound, BoundInput,
};
use heavytail::distributions::{
    lemma1_tightness_instance, lower_bound_pair, ArmDistribution, BanditInstance,
};
use heavytail::estimators::{
    catoni_alpha, confidence_radius, empirical_mean, EstimatorKind, EstimatorSpec, MomentParams,
    Sample,
};
use heavytail::harness::{
    run_concentration, run_experiment_with_workers, write_trace, DeviationProbe, EstimatorConfig,
    ExperimentConfig, InstanceConfig, OutputConfig, OutputFormat, PolicyConfig, RegretTrace,
};
use heavytail::policies::{PolicyState, PolicyVariant};
use heavytail::rng::{experiment_stream, trial_stream};
use rand::Rng;

fn verdict(number: u32, name: &str, pass: bool, detail: &str) {
    let word = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {number} {name}: {word} [{detail}]");
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn raw_spec(kind: EstimatorKind, epsilon: f64, u: f64) -> EstimatorSpec {
    let params = MomentParams::new(epsilon).unwrap().with_raw_bound(u).unwrap();
    EstimatorSpec::new(kind, params).unwrap()
}

fn central_spec(kind: EstimatorKind, epsilon: f64, v: f64) -> EstimatorSpec {
    let params = MomentParams::new(epsilon).unwrap().with_central_bound(v).unwrap();
    EstimatorSpec::new(kind, params).unwrap()
}

struct RegretRun {
    label: &'static str,
    config: ExperimentConfig,
    trace: RegretTrace,
}

/// The shared two-arm experiments: gap 0.2 pair, horizon 2e4, 200
/// repetitions, one run per robust policy, all on a single worker.
fn regret_runs() -> &'static Vec<RegretRun> {
    static RUNS: OnceLock<Vec<RegretRun>> = OnceLock::new();
    RUNS.get_or_init(|| {
        let table: [(&'static str, PolicyVariant, EstimatorConfig); 3] = [
            (
                "truncated",
                PolicyVariant::RobustUcb,
                EstimatorConfig {
                    kind: EstimatorKind::Truncated,
                    epsilon: 1.0,
                    raw_bound_u: Some(1.0),
                    central_bound_v: None,
                },
            ),
            (
                "median_of_means",
                PolicyVariant::RobustUcb,
                EstimatorConfig {
                    kind: EstimatorKind::MedianOfMeans,
                    epsilon: 1.0,
                    raw_bound_u: None,
                    central_bound_v: Some(0.84),
                },
            ),
            (
                "catoni",
                PolicyVariant::ModifiedRobustUcb,
                EstimatorConfig {
                    kind: EstimatorKind::Catoni,
                    epsilon: 1.0,
                    raw_bound_u: None,
                    central_bound_v: Some(0.84),
                },
            ),
        ];
        table
            .into_iter()
            .map(|(label, variant, estimator)| {
                let (nu1, nu2) = lower_bound_pair(0.2, 1.0).unwrap();
                let config = ExperimentConfig {
                    instance: InstanceConfig { arms: vec![nu1, nu2] },
                    policy: PolicyConfig { variant, estimator },
                    horizon: 20_000,
                    repetitions: 200,
                    master_seed: 17,
                    output: OutputConfig { path: "trace.csv".into(), format: OutputFormat::Csv },
                    checkpoints: None,
                    record_arms: false,
                };
                let trace = run_experiment_with_workers(&config, 1).unwrap();
                RegretRun { label, config, trace }
            })
            .collect()
    })
}

/// Deterministic policy rollout against one instance, rewards drawn from
/// per-arm streams of the given seed.
fn pull_sequence(
    variant: PolicyVariant,
    spec: EstimatorSpec,
    instance: &BanditInstance,
    horizon: u64,
    seed: u64,
) -> Vec<usize> {
    let arms = instance.arms();
    let mut state = PolicyState::new(variant, spec, arms.len()).unwrap();
    let mut streams: Vec<_> =
        (0..arms.len()).map(|arm| experiment_stream(seed, 0, arm as u64)).collect();
    let mut sequence = Vec::with_capacity(horizon as usize);
    for t in 1..=horizon {
        let arm = state.select_arm(t).unwrap();
        let reward = arms[arm].sample(&mut streams[arm]);
        state.update(arm, reward).unwrap();
        sequence.push(arm);
    }
    sequence
}

#[test]
fn c1_estimator_deviations_stay_within_their_confidence_levels() {
    let (nu1, nu2) = lower_bound_pair(0.2, 1.0).unwrap();
    let heavy = ArmDistribution::pareto(2.5, 1.0).unwrap();
    let centered = ArmDistribution::shifted(heavy.clone(), -heavy.mean()).unwrap();
    let cells: Vec<(&str, EstimatorSpec, ArmDistribution)> = vec![
        ("truncated/two_point_hi", raw_spec(EstimatorKind::Truncated, 1.0, 1.0), nu1),
        ("truncated/two_point_lo", raw_spec(EstimatorKind::Truncated, 1.0, 1.0), nu2),
        (
            "truncated/pareto",
            raw_spec(EstimatorKind::Truncated, 1.0, 11.0),
            ArmDistribution::pareto(2.2, 1.0).unwrap(),
        ),
        (
            "mom/pareto",
            central_spec(EstimatorKind::MedianOfMeans, 1.0, 7.64),
            ArmDistribution::pareto(2.2, 1.0).unwrap(),
        ),
        (
            "mom/shifted_pareto",
            central_spec(EstimatorKind::MedianOfMeans, 1.0, 7.64),
            ArmDistribution::shifted(ArmDistribution::pareto(2.2, 1.0).unwrap(), 100.0).unwrap(),
        ),
        (
            "mom/gaussian",
            central_spec(EstimatorKind::MedianOfMeans, 1.0, 1.0),
            ArmDistribution::gaussian(0.0, 1.0).unwrap(),
        ),
        (
            "catoni/gaussian",
            central_spec(EstimatorKind::Catoni, 1.0, 1.0),
            ArmDistribution::gaussian(0.0, 1.0).unwrap(),
        ),
        ("catoni/centered_pareto", central_spec(EstimatorKind::Catoni, 1.0, 2.25), centered),
    ];

    let trials = 10_000u64;
    let mut cell_count = 0u32;
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    let mut seed = 100u64;
    for (label, spec, dist) in &cells {
        for n in [50u64, 500, 5000] {
            for delta in [0.1, 0.01] {
                let report = run_concentration(
                    spec,
                    dist,
                    n,
                    DeviationProbe::Confidence { delta },
                    trials,
                    seed,
                )
                .unwrap();
                seed += 1;
                cell_count += 1;
                let limit = delta + 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
                let rate = report.upper_rate().max(report.lower_rate());
                worst = worst.max(rate / limit);
                if rate > limit {
                    failures.push(format!(
                        "{label} n={n} delta={delta}: rate {rate:.4} above {limit:.4}"
                    ));
                }
            }
        }
    }
    let pass = failures.is_empty();
    let detail = if pass {
        format!("{cell_count} cells, worst rate/limit {worst:.3}")
    } else {
        failures.join("; ")
    };
    verdict(1, "estimator deviations stay within their confidence levels", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c2_empirical_mean_upper_tail_sits_inside_the_predicted_window() {
    let n = 100u64;
    let eta = 0.2f64;
    let trials = 100_000u64;
    let law = lemma1_tightness_instance(n, eta, 1.0).unwrap();
    let spec = central_spec(EstimatorKind::Empirical, 1.0, 1.0);
    let report =
        run_concentration(&spec, &law, n, DeviationProbe::Threshold { eta }, trials, 4).unwrap();
    let nf = n as f64;
    let ceiling = 3.0 / (nf * eta * eta);
    let floor = 1.0 / (nf * (2.0 * eta) * (2.0 * eta)) - 3.0 * report.binomial_stderr;
    let rate = report.upper_rate();
    let pass = rate >= floor && rate <= ceiling;
    let detail = format!(
        "rate {rate:.5} inside [{floor:.5}, {ceiling:.3}], lower tail {:.5}",
        report.lower_rate()
    );
    verdict(2, "empirical mean upper tail sits inside the predicted window", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c3_regret_curves_stay_under_the_closed_form_bounds() {
    let mut pass = true;
    let mut details = Vec::new();
    for run in regret_runs() {
        let est = &run.config.policy.estimator;
        let spec = est.to_spec().unwrap();
        let instance = BanditInstance::new(run.config.instance.arms.clone()).unwrap();
        let gaps = instance.gaps();
        let mut worst_ratio = 0.0f64;
        for (j, &t) in run.trace.checkpoints.iter().enumerate() {
            let input = BoundInput {
                epsilon: est.epsilon,
                u: est.raw_bound_u,
                v: est.central_bound_v,
                c: None,
                gaps: gaps.clone(),
                n: t as f64,
                k: None,
            };
            let bound = match est.kind {
                EstimatorKind::Truncated => thm_truncated_bound(&input),
                EstimatorKind::MedianOfMeans => thm_mom_bound(&input),
                EstimatorKind::Catoni => thm_catoni_bound(&input),
                EstimatorKind::Empirical => unreachable!(),
            }
            .unwrap();
            let regret = run.trace.regret_mean[j];
            worst_ratio = worst_ratio.max(regret / bound);
            if regret > bound {
                pass = false;
                details.push(format!(
                    "{} t={t}: regret {regret:.1} above bound {bound:.1}",
                    run.label
                ));
            }
        }
        let pull_cap = expected_pulls_bound(
            gaps[1],
            est.epsilon,
            spec.v_policy,
            spec.c_policy,
            run.config.horizon as f64,
        )
        .unwrap();
        let pulls = run.trace.mean_final_pulls[1];
        let slack = 3.0 * run.trace.final_pulls_stderr[1];
        if pulls > pull_cap + slack {
            pass = false;
            details.push(format!(
                "{}: suboptimal pulls {pulls:.0} above cap {pull_cap:.0} + {slack:.1}",
                run.label
            ));
        }
        details.push(format!(
            "{}: peak regret/bound {worst_ratio:.2}, pulls {pulls:.0} vs cap {pull_cap:.0}",
            run.label
        ));
    }
    let detail = details.join("; ");
    verdict(3, "regret curves stay under the closed-form bounds", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c4_regret_over_log_t_flattens_across_the_last_decade() {
    let mut pass = true;
    let mut details = Vec::new();
    for run in regret_runs() {
        let floor_t = run.config.horizon / 10;
        let ratios: Vec<f64> = run
            .trace
            .checkpoints
            .iter()
            .zip(&run.trace.regret_mean)
            .filter(|(&t, _)| t >= floor_t)
            .map(|(&t, &regret)| regret / (t as f64).ln())
            .collect();
        assert!(ratios.len() >= 5, "too few checkpoints past {floor_t}");
        let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
        let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = (hi - lo) / mean;
        if spread.is_nan() || spread >= 0.25 {
            pass = false;
        }
        details.push(format!("{} spread {:.0}%", run.label, spread * 100.0));
    }
    let detail = details.join(", ");
    verdict(4, "regret over log t flattens across the last decade", pass, &detail);
    assert!(pass, "relative spread of regret/log t reached [{detail}], wanted below 25%");
}

#[test]
fn c5_near_uniform_instance_respects_the_distribution_free_bound() {
    let k = 5usize;
    let horizon = 10_000u64;
    let delta_gap = (k as f64 / horizon as f64).sqrt();
    let (nu1, nu2) = lower_bound_pair(delta_gap, 1.0).unwrap();
    let mut arms = vec![nu1];
    arms.extend(vec![nu2; k - 1]);
    let config = ExperimentConfig {
        instance: InstanceConfig { arms },
        policy: PolicyConfig {
            variant: PolicyVariant::RobustUcb,
            estimator: EstimatorConfig {
                kind: EstimatorKind::MedianOfMeans,
                epsilon: 1.0,
                raw_bound_u: None,
                central_bound_v: Some(1.0),
            },
        },
        horizon,
        repetitions: 100,
        master_seed: 23,
        output: OutputConfig { path: "trace.csv".into(), format: OutputFormat::Csv },
        checkpoints: Some(vec![horizon]),
        record_arms: false,
    };
    let trace = run_experiment_with_workers(&config, 1).unwrap();
    let spec = config.policy.estimator.to_spec().unwrap();
    let instance = BanditInstance::new(config.instance.arms.clone()).unwrap();
    let input = BoundInput {
        epsilon: 1.0,
        u: None,
        v: Some(spec.v_policy),
        c: Some(spec.c_policy),
        gaps: instance.gaps(),
        n: horizon as f64,
        k: Some(k as u64),
    };
    let bound = prop1_free_bound(&input).unwrap();
    let regret = *trace.regret_mean.last().unwrap();
    let pass = regret > 0.0 && regret <= bound;
    let detail = format!("gap {delta_gap:.4}, regret {regret:.1} vs bound {bound:.0}");
    verdict(5, "near-uniform instance respects the distribution-free bound", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c6_selections_survive_a_common_shift_except_under_truncation() {
    const SHIFT: f64 = 1e6;
    let horizon = 300u64;
    let cases = 100u64;
    let mut mom_matches = 0u32;
    let mut catoni_matches = 0u32;
    let mut truncated_differs = 0u32;
    for case in 0..cases {
        let mut rng = trial_stream(7000, case);
        let k = rng.gen_range(2..=4usize);
        let mut arms = Vec::with_capacity(k);
        for i in 0..k {
            let target = i as f64 * 0.4 + 0.2 * rng.gen::<f64>();
            let law = match rng.gen_range(0..3u32) {
                0 => ArmDistribution::gaussian(target, 1.0 + rng.gen::<f64>()).unwrap(),
                1 => {
                    let p = 0.1 + 0.4 * rng.gen::<f64>();
                    let hi = 1.0 + 2.0 * rng.gen::<f64>();
                    let base = ArmDistribution::two_point(p, hi).unwrap();
                    let offset = target - base.mean();
                    ArmDistribution::shifted(base, offset).unwrap()
                }
                _ => {
                    let shape = 2.3 + 0.75 * rng.gen::<f64>();
                    let base = ArmDistribution::pareto(shape, 1.0).unwrap();
                    let offset = target - base.mean();
                    ArmDistribution::shifted(base, offset).unwrap()
                }
            };
            arms.push(law);
        }
        let instance = BanditInstance::new(arms).unwrap();
        let lifted = instance.shifted(SHIFT).unwrap();
        let seed = 7100 + case;

        let mom = central_spec(EstimatorKind::MedianOfMeans, 1.0, 5.0);
        if pull_sequence(PolicyVariant::RobustUcb, mom, &instance, horizon, seed)
            == pull_sequence(PolicyVariant::RobustUcb, mom, &lifted, horizon, seed)
        {
            mom_matches += 1;
        }
        let catoni = central_spec(EstimatorKind::Catoni, 1.0, 5.0);
        if pull_sequence(PolicyVariant::ModifiedRobustUcb, catoni, &instance, horizon, seed)
            == pull_sequence(PolicyVariant::ModifiedRobustUcb, catoni, &lifted, horizon, seed)
        {
            catoni_matches += 1;
        }
        let truncated = raw_spec(EstimatorKind::Truncated, 1.0, 5.0);
        if pull_sequence(PolicyVariant::RobustUcb, truncated, &instance, horizon, seed)
            != pull_sequence(PolicyVariant::RobustUcb, truncated, &lifted, horizon, seed)
        {
            truncated_differs += 1;
        }
    }
    let pass =
        mom_matches == cases as u32 && catoni_matches == cases as u32 && truncated_differs >= 1;
    let detail = format!(
        "mom identical {mom_matches}/{cases}, catoni identical {catoni_matches}/{cases}, truncated differing {truncated_differs}/{cases}"
    );
    verdict(6, "selections survive a common shift except under truncation", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c7_cached_policies_and_estimators_match_reference_reimplementations() {
    // Half one: the cached policy path against a stateless recomputation of
    // every index, compared bitwise, plus the resulting selection.
    let mut index_mismatches = 0u32;
    let mut select_mismatches = 0u32;
    for case in 0..1000u64 {
        let mut rng = trial_stream(9000, case);
        let (variant, kind) = match case % 5 {
            0 => (PolicyVariant::RobustUcb, EstimatorKind::Empirical),
            1 => (PolicyVariant::RobustUcb, EstimatorKind::Truncated),
            2 => (PolicyVariant::RobustUcb, EstimatorKind::MedianOfMeans),
            3 => (PolicyVariant::ModifiedRobustUcb, EstimatorKind::Catoni),
            _ => (PolicyVariant::BaselineUcb, EstimatorKind::Empirical),
        };
        let epsilon = if kind == EstimatorKind::Catoni {
            1.0
        } else {
            [0.3, 0.5, 1.0][rng.gen_range(0..3usize)]
        };
        let params = MomentParams::new(epsilon)
            .unwrap()
            .with_raw_bound(3.0)
            .unwrap()
            .with_central_bound(2.0)
            .unwrap();
        let spec = EstimatorSpec::new(kind, params).unwrap();
        let k = rng.gen_range(2..=4usize);
        let mut state = PolicyState::new(variant, spec, k).unwrap();
        for arm in 0..k {
            for _ in 0..rng.gen_range(0..=30u32) {
                state.update(arm, 6.0 * rng.gen::<f64>() - 3.0).unwrap();
            }
        }
        let t = if kind == EstimatorKind::Catoni {
            rng.gen_range(2..=20u64)
        } else {
            rng.gen_range(2..=200u64)
        };
        let chosen = state.select_arm(t).unwrap();

        let mut reference = Vec::with_capacity(k);
        for arm in 0..k {
            let pulls = state.pull_count(arm);
            let value = if pulls == 0 {
                f64::INFINITY
            } else {
                let tf = t as f64;
                match variant {
                    PolicyVariant::BaselineUcb => {
                        empirical_mean(state.history(arm)).unwrap()
                            + (4.0 * 2.0 * tf.ln() / pulls as f64).sqrt()
                    }
                    PolicyVariant::ModifiedRobustUcb if (pulls as f64) < 8.0 * tf.ln() => {
                        f64::INFINITY
                    }
                    _ => {
                        let delta = 1.0 / (tf * tf);
                        spec.estimate(state.history(arm), delta).unwrap()
                            + confidence_radius(&spec, pulls, delta).unwrap()
                    }
                }
            };
            reference.push(value);
        }
        let expected = reference
            .iter()
            .position(|value| value.is_infinite())
            .unwrap_or_else(|| {
                let mut best = 0usize;
                for arm in 1..k {
                    if reference[arm] > reference[best] {
                        best = arm;
                    }
                }
                best
            });
        if chosen != expected {
            select_mismatches += 1;
        }
        for (arm, expected_value) in reference.iter().enumerate() {
            let lib = state.index(arm, t).unwrap().value();
            if lib.to_bits() != expected_value.to_bits() {
                index_mismatches += 1;
            }
        }
    }

    // Half two: each estimator against an independent reimplementation on
    // short samples, with the Catoni root checked through its residual.
    let mut value_failures = 0u32;
    let mut radius_failures = 0u32;
    let mut catoni_failures = 0u32;
    for case in 0..500u64 {
        let mut rng = trial_stream(9100, case);
        let delta: f64 = [0.1, 0.05, 0.01][rng.gen_range(0..3usize)];
        let ell = (1.0 / delta).ln();
        match case % 4 {
            0 => {
                let epsilon = [0.3, 0.5, 1.0][rng.gen_range(0..3usize)];
                let u = 3.0;
                let n = rng.gen_range(1..=12usize);
                let values: Vec<f64> = (0..n).map(|_| 6.0 * rng.gen::<f64>() - 3.0).collect();
                let sample = Sample::from_values(values.clone()).unwrap();
                let spec = raw_spec(EstimatorKind::Truncated, epsilon, u);
                let lib = spec.estimate(&sample, delta).unwrap();
                let mut acc = 0.0;
                for (i, &x) in values.iter().enumerate() {
                    let cutoff = (u * (i as f64 + 1.0) / ell).powf(1.0 / (1.0 + epsilon));
                    if x.abs() <= cutoff {
                        acc += x;
                    }
                }
                let oracle = acc / n as f64;
                if !close(lib, oracle, 1e-12) {
                    value_failures += 1;
                }
                let lib_radius = confidence_radius(&spec, n as u64, delta).unwrap();
                let c = 4f64.powf((1.0 + epsilon) / epsilon);
                let oracle_radius = u.powf(1.0 / (1.0 + epsilon))
                    * (c * ell / n as f64).powf(epsilon / (1.0 + epsilon));
                if !close(lib_radius, oracle_radius, 1e-12) {
                    radius_failures += 1;
                }
            }
            1 => {
                let epsilon = [0.3, 0.5, 1.0][rng.gen_range(0..3usize)];
                let v = 2.0;
                let n = rng.gen_range(1..=12usize);
                let values: Vec<f64> = (0..n).map(|_| 6.0 * rng.gen::<f64>() - 3.0).collect();
                let sample = Sample::from_values(values.clone()).unwrap();
                let spec = central_spec(EstimatorKind::MedianOfMeans, epsilon, v);
                let lib = spec.estimate(&sample, delta).unwrap();
                let blocks = (((8.0 * (0.125 + ell)).min(n as f64 / 2.0).floor() as usize).max(1))
                    .min(n);
                let width = n / blocks;
                let mut means: Vec<f64> = (0..blocks)
                    .map(|j| values[j * width..(j + 1) * width].iter().sum::<f64>() / width as f64)
                    .collect();
                means.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let oracle = if blocks % 2 == 1 {
                    means[blocks / 2]
                } else {
                    0.5 * (means[blocks / 2 - 1] + means[blocks / 2])
                };
                if !close(lib, oracle, 1e-12) {
                    value_failures += 1;
                }
                let lib_radius = confidence_radius(&spec, n as u64, delta).unwrap();
                let oracle_radius = (12.0 * v).powf(1.0 / (1.0 + epsilon))
                    * (16.0 * (0.125 + ell) / n as f64).powf(epsilon / (1.0 + epsilon));
                if !close(lib_radius, oracle_radius, 1e-12) {
                    radius_failures += 1;
                }
            }
            2 => {
                let v = 2.0;
                let min_n = (2.0 * ell).floor() as u64 + 1;
                let n = rng.gen_range(min_n..=12u64);
                let values: Vec<f64> =
                    (0..n).map(|_| 6.0 * rng.gen::<f64>() - 3.0).collect();
                let sample = Sample::from_values(values.clone()).unwrap();
                let spec = central_spec(EstimatorKind::Catoni, 1.0, v);
                let lib = spec.estimate(&sample, delta).unwrap();
                let nf = n as f64;
                let alpha = (2.0 * ell / (nf * (v + 2.0 * v * ell / (nf - 2.0 * ell)))).sqrt();
                if !close(catoni_alpha(n, delta, v).unwrap(), alpha, 1e-12) {
                    radius_failures += 1;
                }
                let psi = |x: f64| {
                    if x >= 0.0 {
                        (1.0 + x + 0.5 * x * x).ln()
                    } else {
                        -(1.0 - x + 0.5 * x * x).ln()
                    }
                };
                let objective =
                    |m: f64| values.iter().map(|&x| psi(alpha * (x - m))).sum::<f64>();
                let span = values.iter().cloned().fold(f64::MIN, f64::max)
                    - values.iter().cloned().fold(f64::MAX, f64::min);
                let residual_cap = 1e-9 * nf * (alpha * span).max(1.0);
                if objective(lib).abs() > residual_cap {
                    catoni_failures += 1;
                }
                let mut lo = values.iter().cloned().fold(f64::MAX, f64::min) - 1.0;
                let mut hi = values.iter().cloned().fold(f64::MIN, f64::max) + 1.0;
                let mut mid = 0.5 * (lo + hi);
                for _ in 0..200 {
                    mid = 0.5 * (lo + hi);
                    if mid == lo || mid == hi {
                        break;
                    }
                    if objective(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                if !close(lib, mid, 1e-6) {
                    catoni_failures += 1;
                }
            }
            _ => {
                let epsilon = [0.3, 1.0][rng.gen_range(0..2usize)];
                let v = 2.0;
                let n = rng.gen_range(1..=12usize);
                let values: Vec<f64> = (0..n).map(|_| 6.0 * rng.gen::<f64>() - 3.0).collect();
                let sample = Sample::from_values(values.clone()).unwrap();
                let spec = central_spec(EstimatorKind::Empirical, epsilon, v);
                let lib = spec.estimate(&sample, delta).unwrap();
                let oracle = values.iter().sum::<f64>() / n as f64;
                if !close(lib, oracle, 1e-12) {
                    value_failures += 1;
                }
                let lib_radius = confidence_radius(&spec, n as u64, delta).unwrap();
                let oracle_radius = (3.0 * v / (delta * (n as f64).powf(epsilon)))
                    .powf(1.0 / (1.0 + epsilon));
                if !close(lib_radius, oracle_radius, 1e-12) {
                    radius_failures += 1;
                }
            }
        }
    }

    let pass = index_mismatches == 0
        && select_mismatches == 0
        && value_failures == 0
        && radius_failures == 0
        && catoni_failures == 0;
    let detail = format!(
        "1000 policy states: {index_mismatches} index / {select_mismatches} selection mismatches; 500 samples: {value_failures} value, {radius_failures} radius, {catoni_failures} catoni root failures"
    );
    verdict(7, "cached policies and estimators match reference reimplementations", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c8_trace_files_are_byte_identical_across_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for run in regret_runs() {
        let rerun = run_experiment_with_workers(&run.config, 8).unwrap();
        let one = dir.path().join(format!("{}_w1.csv", run.label));
        let eight = dir.path().join(format!("{}_w8.csv", run.label));
        write_trace(&run.trace, &one, OutputFormat::Csv).unwrap();
        write_trace(&rerun, &eight, OutputFormat::Csv).unwrap();
        let bytes_one = std::fs::read(&one).unwrap();
        let bytes_eight = std::fs::read(&eight).unwrap();
        let identical = rerun == run.trace && bytes_one == bytes_eight;
        if !identical {
            pass = false;
        }
        details.push(format!(
            "{}: {} ({} bytes)",
            run.label,
            if identical { "identical" } else { "diverged" },
            bytes_one.len()
        ));
    }
    let detail = details.join(", ");
    verdict(8, "trace files are byte-identical across worker counts", pass, &detail);
    assert!(pass, "{detail}");
}

#[test]
fn c9_specialized_bounds_match_the_general_gap_form() {
    let mut worst = 0.0f64;
    let mut failures = 0u32;
    for i in 0..100u32 {
        let epsilon = 0.05 + 0.95 * i as f64 / 99.0;
        let n = 100.0 + 60.0 * i as f64;
        let gaps = vec![0.0, 0.3, 1.7];
        let u = 2.5;
        let v = 0.7;

        let truncated = thm_truncated_bound(&BoundInput {
            epsilon,
            u: Some(u),
            v: None,
            c: None,
            gaps: gaps.clone(),
            n,
            k: None,
        })
        .unwrap();
        let truncated_general = prop1_gap_bound(&BoundInput {
            epsilon,
            u: None,
            v: Some(u),
            c: Some(4f64.powf((1.0 + epsilon) / epsilon)),
            gaps: gaps.clone(),
            n,
            k: None,
        })
        .unwrap();
        let rel = (truncated - truncated_general).abs() / truncated.abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-12 {
            failures += 1;
        }

        let mom = thm_mom_bound(&BoundInput {
            epsilon,
            u: None,
            v: Some(v),
            c: None,
            gaps: gaps.clone(),
            n,
            k: None,
        })
        .unwrap();
        let mom_general = prop1_gap_bound(&BoundInput {
            epsilon,
            u: None,
            v: Some(12.0 * v),
            c: Some(16.0),
            gaps,
            n,
            k: None,
        })
        .unwrap();
        let rel = (mom - mom_general).abs() / mom.abs().max(1.0);
        worst = worst.max(rel);
        if rel > 1e-12 {
            failures += 1;
        }
    }
    let pass = failures == 0;
    let detail = format!("100-point grid, worst relative difference {worst:.2e}");
    verdict(9, "specialized bounds match the general gap form", pass, &detail);
    assert!(pass, "{detail}");
}
