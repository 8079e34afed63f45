//! Upper-confidence-bound policies over heavy-tailed reward streams.
//!
//! The core policy keeps a full reward history per arm and scores arm i at
//! round t by
//!
//!   index = estimate(history_i, delta = t^-2) + radius(T_i, t^-2)
//!
//! with estimate and radius supplied by an [`EstimatorSpec`]. A never-pulled
//! arm scores +infinity. The modified variant exists because Catoni's
//! M-estimator is only defined once T_i > 2 log t^2; it scores an arm
//! +infinity until T_i >= 8 log t, which keeps the estimator strictly inside
//! its domain. The sub-Gaussian baseline (empirical mean plus
//! sqrt(4 v log t / T_i)) is the reference point the robust variants are
//! measured against.
//!
//! Estimates are memoized per arm under a key capturing everything they
//! depend on besides the history itself; a key mismatch recomputes, so a
//! cached value never outlives the state that produced it. The per-arm
//! history is additionally mirrored as sorted (value, multiplicity) groups
//! when the estimator is Catoni, collapsing repeated rewards to one
//! influence-function evaluation inside the root solve.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimators::{
    catoni_alpha, catoni_root, confidence_radius, empirical_mean, log_inverse, mom_block_count,
    EstimatorKind, EstimatorSpec, Sample,
};

/// Rewards with magnitude beyond this are rejected at update time so power
/// computations inside the estimators cannot overflow.
pub const MAX_ABS_REWARD: f64 = 1e300;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyVariant {
    /// Estimate plus deviation radius, any non-Catoni estimator.
    RobustUcb,
    /// The Catoni policy: same index, plus the T_i >= 8 log t gate.
    ModifiedRobustUcb,
    /// Empirical mean plus sqrt(4 v log t / T_i).
    BaselineUcb,
}

impl PolicyVariant {
    pub fn name(&self) -> &'static str {
        match self {
            PolicyVariant::RobustUcb => "robust_ucb",
            PolicyVariant::ModifiedRobustUcb => "modified_robust_ucb",
            PolicyVariant::BaselineUcb => "baseline_ucb",
        }
    }
}

/// An arm's score: finite, or +infinity for a never-pulled arm and for a
/// Catoni arm still below the sample-size gate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IndexValue {
    Infinite,
    Finite(f64),
}

impl IndexValue {
    pub fn is_infinite(&self) -> bool {
        matches!(self, IndexValue::Infinite)
    }

    pub fn value(&self) -> f64 {
        match self {
            IndexValue::Infinite => f64::INFINITY,
            IndexValue::Finite(x) => *x,
        }
    }

    fn beats(&self, other: &IndexValue) -> bool {
        self.value() > other.value()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum CacheKey {
    Empirical { pulls: u64 },
    Truncated { pulls: u64, log_term_bits: u64 },
    MedianOfMeans { pulls: u64, blocks: u64 },
    Catoni { pulls: u64, t: u64 },
}

#[derive(Clone, Copy, Debug)]
struct CacheEntry {
    key: CacheKey,
    estimate: f64,
}

#[derive(Clone, Debug)]
struct ArmState {
    history: Sample,
    /// Ascending (value, multiplicity) mirror of the history, maintained
    /// only under the Catoni estimator.
    grouped: Vec<(f64, u64)>,
    cache: Option<CacheEntry>,
}

impl ArmState {
    fn new() -> Self {
        ArmState { history: Sample::new(), grouped: Vec::new(), cache: None }
    }
}

/// Sequential state of one policy run: per-arm histories, the round counter,
/// and the estimator configuration.
#[derive(Clone, Debug)]
pub struct PolicyState {
    variant: PolicyVariant,
    spec: EstimatorSpec,
    arms: Vec<ArmState>,
    rounds: u64,
}

impl PolicyState {
    /// Rejects estimator/variant pairings that cannot work: Catoni needs the
    /// modified variant's gate to stay inside its domain, the modified
    /// variant's gate is Catoni-specific, and the baseline needs the plain
    /// empirical mean plus a variance factor.
    pub fn new(variant: PolicyVariant, spec: EstimatorSpec, num_arms: usize) -> Result<Self> {
        if num_arms < 2 {
            return Err(Error::invalid_input(format!(
                "a policy needs at least two arms, got {num_arms}"
            )));
        }
        match variant {
            PolicyVariant::RobustUcb => {
                if spec.kind == EstimatorKind::Catoni {
                    return Err(Error::invalid_input(
                        "the catoni estimator is undefined at small sample sizes; pair it with the modified variant",
                    ));
                }
            }
            PolicyVariant::ModifiedRobustUcb => {
                if spec.kind != EstimatorKind::Catoni {
                    return Err(Error::invalid_input(format!(
                        "the modified variant's sample gate is specific to the catoni estimator, got {}",
                        spec.kind.name()
                    )));
                }
            }
            PolicyVariant::BaselineUcb => {
                if spec.kind != EstimatorKind::Empirical {
                    return Err(Error::invalid_input(format!(
                        "the baseline runs on the empirical mean, got {}",
                        spec.kind.name()
                    )));
                }
                spec.params.central_bound()?;
            }
        }
        Ok(PolicyState {
            variant,
            spec,
            arms: (0..num_arms).map(|_| ArmState::new()).collect(),
            rounds: 0,
        })
    }

    pub fn variant(&self) -> PolicyVariant {
        self.variant
    }

    pub fn spec(&self) -> &EstimatorSpec {
        &self.spec
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    /// Rounds completed so far; equals the sum of all pull counts.
    pub fn rounds_completed(&self) -> u64 {
        self.rounds
    }

    pub fn pull_count(&self, arm: usize) -> u64 {
        self.arms[arm].history.len() as u64
    }

    pub fn pull_counts(&self) -> Vec<u64> {
        self.arms.iter().map(|a| a.history.len() as u64).collect()
    }

    pub fn history(&self, arm: usize) -> &Sample {
        &self.arms[arm].history
    }

    fn check_arm(&self, arm: usize) -> Result<()> {
        if arm >= self.arms.len() {
            return Err(Error::invalid_input(format!(
                "arm {arm} out of range for {} arms",
                self.arms.len()
            )));
        }
        Ok(())
    }

    fn check_round(&self, t: u64) -> Result<()> {
        if t == 0 {
            return Err(Error::invalid_input("rounds are counted from 1"));
        }
        Ok(())
    }

    /// Score of one arm at round t.
    ///
    /// The only error paths are an invalid arm, t = 0, and hand-built states
    /// holding observations at t = 1 (where delta = t^-2 = 1 leaves the
    /// delta-dependent estimators undefined); a state advanced purely
    /// through [`select_arm`] and [`update`] never hits the latter.
    pub fn index(&mut self, arm: usize, t: u64) -> Result<IndexValue> {
        self.check_arm(arm)?;
        self.check_round(t)?;
        let pulls = self.arms[arm].history.len() as u64;
        if pulls == 0 {
            return Ok(IndexValue::Infinite);
        }
        let tf = t as f64;
        match self.variant {
            PolicyVariant::BaselineUcb => {
                self.subgaussian_index(arm, t, self.spec.params.central_bound()?)
            }
            PolicyVariant::ModifiedRobustUcb => {
                if (pulls as f64) < 8.0 * tf.ln() {
                    return Ok(IndexValue::Infinite);
                }
                let delta = 1.0 / (tf * tf);
                let estimate = self.estimate(arm, t, delta)?;
                let radius = confidence_radius(&self.spec, pulls, delta)?;
                Ok(IndexValue::Finite(estimate + radius))
            }
            PolicyVariant::RobustUcb => {
                let delta = 1.0 / (tf * tf);
                let estimate = self.estimate(arm, t, delta)?;
                let radius = confidence_radius(&self.spec, pulls, delta)?;
                Ok(IndexValue::Finite(estimate + radius))
            }
        }
    }

    /// Empirical mean plus sqrt(4 variance_factor log t / T_i), +infinity
    /// for a never-pulled arm. Usable on any state since it touches only
    /// the history.
    pub fn subgaussian_index(&self, arm: usize, t: u64, variance_factor: f64) -> Result<IndexValue> {
        self.check_arm(arm)?;
        self.check_round(t)?;
        if !(variance_factor.is_finite() && variance_factor > 0.0) {
            return Err(Error::invalid_input(format!(
                "variance factor must be positive, got {variance_factor}"
            )));
        }
        let pulls = self.arms[arm].history.len() as u64;
        if pulls == 0 {
            return Ok(IndexValue::Infinite);
        }
        let mean = empirical_mean(&self.arms[arm].history)?;
        let radius = (4.0 * variance_factor * (t as f64).ln() / pulls as f64).sqrt();
        Ok(IndexValue::Finite(mean + radius))
    }

    /// Arm with the highest index at round t; ties, including several
    /// infinite scores, go to the lowest arm index. An infinite score wins
    /// outright, so scoring stops at the first one.
    pub fn select_arm(&mut self, t: u64) -> Result<usize> {
        self.check_round(t)?;
        let mut best_arm = 0usize;
        let mut best = self.index(0, t)?;
        if best.is_infinite() {
            return Ok(0);
        }
        for arm in 1..self.arms.len() {
            let candidate = self.index(arm, t)?;
            if candidate.is_infinite() {
                return Ok(arm);
            }
            if candidate.beats(&best) {
                best = candidate;
                best_arm = arm;
            }
        }
        Ok(best_arm)
    }

    /// Record the reward observed after pulling `arm`, advancing the round
    /// counter.
    pub fn update(&mut self, arm: usize, reward: f64) -> Result<()> {
        self.check_arm(arm)?;
        if !reward.is_finite() || reward.abs() > MAX_ABS_REWARD {
            return Err(Error::invalid_input(format!(
                "reward magnitude must be finite and at most {MAX_ABS_REWARD:e}, got {reward}"
            )));
        }
        let state = &mut self.arms[arm];
        state.history.push(reward)?;
        if self.spec.kind == EstimatorKind::Catoni {
            push_grouped(&mut state.grouped, reward);
        }
        state.cache = None;
        self.rounds += 1;
        Ok(())
    }

    fn cache_key(&self, pulls: u64, t: u64, delta: f64) -> CacheKey {
        match self.spec.kind {
            EstimatorKind::Empirical => CacheKey::Empirical { pulls },
            EstimatorKind::Truncated => {
                CacheKey::Truncated { pulls, log_term_bits: log_inverse(delta).to_bits() }
            }
            EstimatorKind::MedianOfMeans => {
                CacheKey::MedianOfMeans { pulls, blocks: mom_block_count(pulls, delta) }
            }
            EstimatorKind::Catoni => CacheKey::Catoni { pulls, t },
        }
    }

    /// Memoized estimate for one arm. The key pins down every input of the
    /// estimate other than the history (whose length it carries), so a hit
    /// is exactly a recomputation avoided.
    fn estimate(&mut self, arm: usize, t: u64, delta: f64) -> Result<f64> {
        let pulls = self.arms[arm].history.len() as u64;
        let key = self.cache_key(pulls, t, delta);
        if let Some(entry) = &self.arms[arm].cache {
            if entry.key == key {
                return Ok(entry.estimate);
            }
        }
        let estimate = if self.spec.kind == EstimatorKind::Catoni {
            let alpha = catoni_alpha(pulls, delta, self.spec.params.central_bound()?)?;
            catoni_root(&self.arms[arm].grouped, pulls, alpha)
        } else {
            self.spec.estimate(&self.arms[arm].history, delta)?
        };
        self.arms[arm].cache = Some(CacheEntry { key, estimate });
        Ok(estimate)
    }
}

fn push_grouped(groups: &mut Vec<(f64, u64)>, x: f64) {
    match groups.binary_search_by(|(value, _)| value.partial_cmp(&x).unwrap()) {
        Ok(i) => groups[i].1 += 1,
        Err(i) => groups.insert(i, (x, 1)),
    }
}
