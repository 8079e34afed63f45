//! Monte Carlo experiment runner.
//!
//! Each repetition derives one reward stream per arm from
//! (master_seed, repetition, arm), plays the policy for the full horizon,
//! and records cumulative pseudo-regret (true gaps, not realized rewards)
//! at the configured checkpoints. Repetitions may run on a worker pool;
//! results are collected and aggregated in repetition order, so the output
//! is byte-identical whatever the worker count.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::policies::PolicyState;
use crate::rng::experiment_stream;

use super::config::ExperimentConfig;

/// Aggregated result of one experiment, plus the per-repetition data it
/// was aggregated from.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RegretTrace {
    pub checkpoints: Vec<u64>,
    /// Mean cumulative pseudo-regret at each checkpoint.
    pub regret_mean: Vec<f64>,
    /// Standard error of the mean at each checkpoint; zero for a single
    /// repetition.
    pub regret_stderr: Vec<f64>,
    /// Mean pull count per arm at each checkpoint, indexed [checkpoint][arm].
    pub mean_pulls_at_checkpoints: Vec<Vec<f64>>,
    /// Mean pull count per arm at the horizon.
    pub mean_final_pulls: Vec<f64>,
    pub final_pulls_stderr: Vec<f64>,
    /// Cumulative pseudo-regret per repetition, indexed [repetition][checkpoint].
    pub per_repetition_regret: Vec<Vec<f64>>,
    /// Final pull counts per repetition, indexed [repetition][arm].
    pub per_repetition_final_pulls: Vec<Vec<u64>>,
    /// Arm chosen at every round of every repetition, when recorded.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub arm_sequences: Option<Vec<Vec<u32>>>,
}

struct Repetition {
    regret: Vec<f64>,
    pulls: Vec<Vec<u64>>,
    final_pulls: Vec<u64>,
    arms: Option<Vec<u32>>,
}

/// Run with the worker count from `HEAVYTAIL_WORKERS`, defaulting to the
/// available parallelism.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RegretTrace> {
    run_experiment_with_workers(config, configured_workers()?)
}

pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<RegretTrace> {
    if workers < 1 {
        return Err(Error::invalid_input("worker count must be at least 1"));
    }
    let prepared = config.prepare()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::invalid_input(format!("failed to build worker pool: {e}")))?;
    let repetitions: Vec<Repetition> = pool.install(|| {
        (0..config.repetitions)
            .into_par_iter()
            .map(|rep| run_repetition(config, &prepared, rep))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(aggregate(&prepared.checkpoints, repetitions))
}

fn run_repetition(
    config: &ExperimentConfig,
    prepared: &super::config::PreparedExperiment,
    rep: u64,
) -> Result<Repetition> {
    let k = prepared.instance.num_arms();
    let gaps = prepared.instance.gaps();
    let mut streams: Vec<_> = (0..k)
        .map(|arm| experiment_stream(config.master_seed, rep, arm as u64))
        .collect();
    let mut policy = PolicyState::new(prepared.variant, prepared.spec, k)?;
    let mut arms_played = config.record_arms.then(|| Vec::with_capacity(config.horizon as usize));

    let checkpoints = &prepared.checkpoints;
    let mut regret = Vec::with_capacity(checkpoints.len());
    let mut pulls = Vec::with_capacity(checkpoints.len());
    let mut next_checkpoint = 0usize;
    let mut running_regret = 0.0;
    for t in 1..=config.horizon {
        let arm = policy.select_arm(t)?;
        let reward = prepared.instance.arms()[arm].sample(&mut streams[arm]);
        policy.update(arm, reward)?;
        running_regret += gaps[arm];
        if let Some(seq) = arms_played.as_mut() {
            seq.push(arm as u32);
        }
        if next_checkpoint < checkpoints.len() && t == checkpoints[next_checkpoint] {
            regret.push(running_regret);
            pulls.push(policy.pull_counts());
            next_checkpoint += 1;
        }
    }
    Ok(Repetition { regret, pulls, final_pulls: policy.pull_counts(), arms: arms_played })
}

fn mean_and_stderr(values: impl Iterator<Item = f64> + Clone, count: usize) -> (f64, f64) {
    let n = count as f64;
    let mean = values.clone().sum::<f64>() / n;
    if count < 2 {
        return (mean, 0.0);
    }
    let var = values.map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn aggregate(checkpoints: &[u64], repetitions: Vec<Repetition>) -> RegretTrace {
    let reps = repetitions.len();
    let k = repetitions[0].final_pulls.len();
    let mut regret_mean = Vec::with_capacity(checkpoints.len());
    let mut regret_stderr = Vec::with_capacity(checkpoints.len());
    let mut mean_pulls_at_checkpoints = Vec::with_capacity(checkpoints.len());
    for j in 0..checkpoints.len() {
        let (mean, stderr) = mean_and_stderr(repetitions.iter().map(|r| r.regret[j]), reps);
        regret_mean.push(mean);
        regret_stderr.push(stderr);
        let pulls = (0..k)
            .map(|arm| repetitions.iter().map(|r| r.pulls[j][arm] as f64).sum::<f64>() / reps as f64)
            .collect();
        mean_pulls_at_checkpoints.push(pulls);
    }
    let mut mean_final_pulls = Vec::with_capacity(k);
    let mut final_pulls_stderr = Vec::with_capacity(k);
    for arm in 0..k {
        let (mean, stderr) =
            mean_and_stderr(repetitions.iter().map(|r| r.final_pulls[arm] as f64), reps);
        mean_final_pulls.push(mean);
        final_pulls_stderr.push(stderr);
    }
    let arm_sequences = repetitions
        .first()
        .and_then(|r| r.arms.as_ref())
        .map(|_| repetitions.iter().map(|r| r.arms.clone().unwrap()).collect());
    RegretTrace {
        checkpoints: checkpoints.to_vec(),
        regret_mean,
        regret_stderr,
        mean_pulls_at_checkpoints,
        mean_final_pulls,
        final_pulls_stderr,
        per_repetition_regret: repetitions.iter().map(|r| r.regret.clone()).collect(),
        per_repetition_final_pulls: repetitions.iter().map(|r| r.final_pulls.clone()).collect(),
        arm_sequences,
    }
}

fn configured_workers() -> Result<usize> {
    match std::env::var("HEAVYTAIL_WORKERS") {
        Ok(text) => text
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|w| *w >= 1)
            .ok_or_else(|| {
                Error::invalid_input(format!(
                    "HEAVYTAIL_WORKERS must be a positive integer, got {text:?}"
                ))
            }),
        Err(std::env::VarError::NotPresent) => Ok(rayon::current_num_threads()),
        Err(e) => Err(Error::invalid_input(format!("HEAVYTAIL_WORKERS is unreadable: {e}"))),
    }
}
