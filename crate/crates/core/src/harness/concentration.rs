//! Monte Carlo concentration bench.
//!
//! Each trial draws a fresh n-sample from one distribution, computes the
//! configured estimate, and counts how often it lands outside the probed
//! deviation band around the true mean. The probe is either the
//! estimator's own confidence radius at level delta, or a fixed threshold
//! eta (empirical mean only, where the polynomial tail makes a fixed
//! threshold the interesting question).
//!
//! Runs on a distribution whose true moments exceed the declared bounds
//! are refused up front: such a report would test nothing.

use serde::Serialize;

use crate::distributions::ArmDistribution;
use crate::error::{Error, Result};
use crate::estimators::{catoni_alpha, confidence_radius, empirical_mean, EstimatorKind, EstimatorSpec, Sample};
use crate::rng::trial_stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviationProbe {
    Confidence { delta: f64 },
    Threshold { eta: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConcentrationReport {
    pub estimator: &'static str,
    pub distribution: ArmDistribution,
    pub n: u64,
    pub probe: DeviationProbe,
    pub trials: u64,
    /// Half-width of the deviation band that was probed.
    pub radius: f64,
    pub upper_violations: u64,
    pub lower_violations: u64,
    /// For a confidence probe, the binomial standard error at rate delta;
    /// for a threshold probe, the standard error of the measured upper rate.
    pub binomial_stderr: f64,
}

impl ConcentrationReport {
    pub fn upper_rate(&self) -> f64 {
        self.upper_violations as f64 / self.trials as f64
    }

    pub fn lower_rate(&self) -> f64 {
        self.lower_violations as f64 / self.trials as f64
    }
}

pub fn run_concentration(
    spec: &EstimatorSpec,
    dist: &ArmDistribution,
    n: u64,
    probe: DeviationProbe,
    trials: u64,
    seed: u64,
) -> Result<ConcentrationReport> {
    if n < 1 {
        return Err(Error::invalid_input("n must be at least 1"));
    }
    if trials < 1 {
        return Err(Error::invalid_input("trials must be at least 1"));
    }
    check_declared_moments(dist, spec)?;
    let radius = match probe {
        DeviationProbe::Confidence { delta } => {
            if spec.kind == EstimatorKind::Catoni {
                // fail before the first trial rather than inside it
                catoni_alpha(n, delta, spec.params.central_bound()?)?;
            }
            confidence_radius(spec, n, delta)?
        }
        DeviationProbe::Threshold { eta } => {
            if spec.kind != EstimatorKind::Empirical {
                return Err(Error::validation(format!(
                    "threshold probe applies to the empirical mean only, not {}",
                    spec.kind.name()
                )));
            }
            if !(eta.is_finite() && eta > 0.0) {
                return Err(Error::invalid_input(format!("eta must be positive, got {eta}")));
            }
            eta
        }
    };
    let mu = dist.mean();
    let mut upper = 0u64;
    let mut lower = 0u64;
    let mut draws = Vec::with_capacity(n as usize);
    for trial in 0..trials {
        let mut rng = trial_stream(seed, trial);
        draws.clear();
        for _ in 0..n {
            draws.push(dist.sample(&mut rng));
        }
        let sample = Sample::from_values(draws.clone())?;
        let estimate = match probe {
            DeviationProbe::Confidence { delta } => spec.estimate(&sample, delta)?,
            DeviationProbe::Threshold { .. } => empirical_mean(&sample)?,
        };
        if estimate > mu + radius {
            upper += 1;
        }
        if estimate < mu - radius {
            lower += 1;
        }
    }
    let binomial_stderr = match probe {
        DeviationProbe::Confidence { delta } => (delta * (1.0 - delta) / trials as f64).sqrt(),
        DeviationProbe::Threshold { .. } => {
            let p = upper as f64 / trials as f64;
            (p * (1.0 - p) / trials as f64).sqrt()
        }
    };
    Ok(ConcentrationReport {
        estimator: spec.kind.name(),
        distribution: dist.clone(),
        n,
        probe,
        trials,
        radius,
        upper_violations: upper,
        lower_violations: lower,
        binomial_stderr,
    })
}

fn check_declared_moments(dist: &ArmDistribution, spec: &EstimatorSpec) -> Result<()> {
    let m = dist.moments(spec.params.epsilon)?;
    if let Some(u) = spec.params.raw_bound_u {
        if m.raw.is_nan() || m.raw > u * (1.0 + 1e-9) {
            return Err(Error::validation(format!(
                "true raw (1+eps)-moment {} exceeds the declared bound u = {u}",
                m.raw
            )));
        }
    }
    if let Some(v) = spec.params.central_bound_v {
        if m.central.is_nan() || m.central > v * (1.0 + 1e-9) {
            return Err(Error::validation(format!(
                "true central (1+eps)-moment {} exceeds the declared bound v = {v}",
                m.central
            )));
        }
    }
    Ok(())
}
