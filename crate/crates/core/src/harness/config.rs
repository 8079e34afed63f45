//! Experiment configuration: JSON schema, loading, and semantic validation.
//!
//! A config names an instance, a policy/estimator pairing, a horizon,
//! repetition and seed counts, and where results go. Validation is strict
//! on two fronts: unknown JSON fields are rejected by name, and every
//! declared moment bound is checked against the instance's true moments, so
//! a run can never quietly operate under a false assumption.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::distributions::{ArmDistribution, BanditInstance};
use crate::error::{Error, Result};
use crate::estimators::{EstimatorKind, EstimatorSpec, MomentParams};
use crate::policies::{PolicyState, PolicyVariant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub arms: Vec<ArmDistribution>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub epsilon: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_bound_u: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub central_bound_v: Option<f64>,
}

impl EstimatorConfig {
    pub fn to_spec(&self) -> Result<EstimatorSpec> {
        let mut params = MomentParams::new(self.epsilon)?;
        if let Some(u) = self.raw_bound_u {
            params = params.with_raw_bound(u)?;
        }
        if let Some(v) = self.central_bound_v {
            params = params.with_central_bound(v)?;
        }
        EstimatorSpec::new(self.kind, params)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub variant: PolicyVariant,
    pub estimator: EstimatorConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: PathBuf,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub instance: InstanceConfig,
    pub policy: PolicyConfig,
    pub horizon: u64,
    pub repetitions: u64,
    pub master_seed: u64,
    pub output: OutputConfig,
    /// Rounds at which cumulative regret is recorded; defaults to a
    /// 50-point geometric grid ending at the horizon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<u64>>,
    /// Record the full arm-selection sequence of every repetition.
    #[serde(default)]
    pub record_arms: bool,
}

/// Everything a run needs, extracted from a config that passed validation.
#[derive(Clone, Debug)]
pub struct PreparedExperiment {
    pub instance: BanditInstance,
    pub spec: EstimatorSpec,
    pub variant: PolicyVariant,
    pub checkpoints: Vec<u64>,
}

impl ExperimentConfig {
    /// Full semantic validation; the returned pieces are what the runner
    /// consumes.
    pub fn prepare(&self) -> Result<PreparedExperiment> {
        let instance = BanditInstance::new(self.instance.arms.clone())?;
        let spec = self.policy.estimator.to_spec()?;
        // constructing a throwaway policy applies the pairing rules
        PolicyState::new(self.policy.variant, spec, instance.num_arms())?;
        if self.horizon < instance.num_arms() as u64 {
            return Err(Error::validation(format!(
                "horizon {} is below the arm count {}",
                self.horizon,
                instance.num_arms()
            )));
        }
        if self.repetitions < 1 {
            return Err(Error::validation("repetitions must be at least 1"));
        }
        check_declared_moments(&instance, &spec)?;
        let checkpoints = match &self.checkpoints {
            Some(list) => {
                if list.is_empty() {
                    return Err(Error::validation("checkpoints must not be empty when given"));
                }
                for pair in list.windows(2) {
                    if pair[1] <= pair[0] {
                        return Err(Error::validation(format!(
                            "checkpoints must be strictly increasing, got {} then {}",
                            pair[0], pair[1]
                        )));
                    }
                }
                if list[0] < 1 || *list.last().unwrap() > self.horizon {
                    return Err(Error::validation(format!(
                        "checkpoints must lie in [1, {}]",
                        self.horizon
                    )));
                }
                list.clone()
            }
            None => default_checkpoints(self.horizon),
        };
        Ok(PreparedExperiment {
            instance,
            spec,
            variant: self.policy.variant,
            checkpoints,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.prepare().map(|_| ())
    }
}

/// Every moment bound the config declares must dominate the true moment of
/// every arm (tiny relative slack for quadrature error in the truth).
fn check_declared_moments(instance: &BanditInstance, spec: &EstimatorSpec) -> Result<()> {
    let eps = spec.params.epsilon;
    for (i, arm) in instance.arms().iter().enumerate() {
        let m = arm.moments(eps)?;
        if let Some(u) = spec.params.raw_bound_u {
            if m.raw.is_nan() || m.raw > u * (1.0 + 1e-9) {
                return Err(Error::validation(format!(
                    "arm {i} has raw (1+eps)-moment {} above the declared bound u = {u}",
                    m.raw
                )));
            }
        }
        if let Some(v) = spec.params.central_bound_v {
            if m.central.is_nan() || m.central > v * (1.0 + 1e-9) {
                return Err(Error::validation(format!(
                    "arm {i} has central (1+eps)-moment {} above the declared bound v = {v}",
                    m.central
                )));
            }
        }
    }
    Ok(())
}

/// Geometric grid of up to 50 distinct rounds from 1 to n inclusive.
pub fn default_checkpoints(n: u64) -> Vec<u64> {
    let points = 50;
    let mut grid: Vec<u64> = (0..points)
        .map(|i| {
            let frac = i as f64 / (points - 1) as f64;
            ((n as f64).powf(frac)).round() as u64
        })
        .map(|c| c.clamp(1, n))
        .collect();
    grid.dedup();
    grid
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let config: ExperimentConfig = serde_json::from_str(&text)?;
    config.validate()?;
    Ok(config)
}
