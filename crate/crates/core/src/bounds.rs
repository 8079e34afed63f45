//! Closed-form regret bounds and lower-bound reference values.
//!
//! Everything here is a pure formula evaluation. The generic gap-dependent
//! bound takes the estimator's deviation constants (v, c); the per-estimator
//! bounds bake those constants in and must agree with the generic form
//! exactly, which the tests check as an algebraic identity. Lower-bound
//! values are references for reporting only: the guarantee behind them is
//! asymptotic, so no finite-horizon run is ever asserted against them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters shared by the bound evaluators. Moment bounds and constants
/// are optional because each bound needs a different subset; evaluators
/// reject inputs missing what they use.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundInput {
    /// Tail order parameter, in (0, 1].
    pub epsilon: f64,
    /// Bound on the raw (1+eps)-moment.
    #[serde(default)]
    pub u: Option<f64>,
    /// Bound on the central (1+eps)-moment.
    #[serde(default)]
    pub v: Option<f64>,
    /// Deviation-radius constant of the estimator.
    #[serde(default)]
    pub c: Option<f64>,
    /// Per-arm suboptimality gaps; optimal arms carry 0.
    pub gaps: Vec<f64>,
    /// Horizon. Real-valued since only its logarithm enters the formulas.
    pub n: f64,
    /// Arm count, needed only by the distribution-free bound.
    #[serde(default)]
    pub k: Option<u64>,
}

impl BoundInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid_input(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if !(self.n.is_finite() && self.n >= 1.0) {
            return Err(Error::invalid_input(format!("horizon must be at least 1, got {}", self.n)));
        }
        for (i, gap) in self.gaps.iter().enumerate() {
            if !(gap.is_finite() && *gap >= 0.0) {
                return Err(Error::invalid_input(format!("gap {i} must be finite and >= 0, got {gap}")));
            }
        }
        for (name, value) in [("u", self.u), ("v", self.v), ("c", self.c)] {
            if let Some(x) = value {
                if !(x.is_finite() && x > 0.0) {
                    return Err(Error::invalid_input(format!("{name} must be positive, got {x}")));
                }
            }
        }
        if let Some(k) = self.k {
            if k < 2 {
                return Err(Error::invalid_input(format!("arm count must be at least 2, got {k}")));
            }
        }
        Ok(())
    }

    fn need(&self, field: Option<f64>, name: &str) -> Result<f64> {
        field.ok_or_else(|| Error::invalid_input(format!("this bound needs {name}, none given")))
    }
}

/// Sum over suboptimal arms of `coeff_fn(gap) * log n + 5 gap`, the shape
/// every gap-dependent bound takes.
fn gap_sum<F: Fn(f64) -> f64>(input: &BoundInput, coeff_fn: F) -> f64 {
    let log_n = input.n.ln();
    input
        .gaps
        .iter()
        .filter(|gap| **gap > 0.0)
        .map(|&gap| coeff_fn(gap) * log_n + 5.0 * gap)
        .sum()
}

/// Gap-dependent regret bound for a policy built on any estimator with
/// deviation constants (v, c):
///
///   sum over suboptimal arms of  2 c (v / gap)^(1/eps) log n + 5 gap.
pub fn prop1_gap_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let v = input.need(input.v, "v")?;
    let c = input.need(input.c, "c")?;
    let inv_eps = 1.0 / input.epsilon;
    Ok(gap_sum(input, |gap| 2.0 * c * (v / gap).powf(inv_eps)))
}

/// Distribution-free companion of the gap-dependent bound,
///
///   n^(1/(1+eps)) (4 K c log n)^(eps/(1+eps)) v^(1/(1+eps)),
///
/// valid only once the horizon satisfies
/// log n >= 5 gap^((1+eps)/eps) / (2 c v^(1/eps)) for every gap; a horizon
/// below that threshold is a precondition error naming the offending gap.
pub fn prop1_free_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let v = input.need(input.v, "v")?;
    let c = input.need(input.c, "c")?;
    let k = input
        .k
        .ok_or_else(|| Error::invalid_input("this bound needs the arm count k, none given"))?;
    let eps = input.epsilon;
    let log_n = input.n.ln();
    for (i, &gap) in input.gaps.iter().enumerate() {
        if gap == 0.0 {
            continue;
        }
        let threshold = 5.0 * gap.powf((1.0 + eps) / eps) / (2.0 * c * v.powf(1.0 / eps));
        if log_n < threshold {
            return Err(Error::precondition(format!(
                "horizon too small for the distribution-free bound: gap {i} = {gap} needs log n >= {threshold}, got {log_n}"
            )));
        }
    }
    let outer = eps / (1.0 + eps);
    Ok(input.n.powf(1.0 / (1.0 + eps)) * (4.0 * k as f64 * c * log_n).powf(outer) * v.powf(1.0 / (1.0 + eps)))
}

/// Regret bound for the policy built on the truncated mean:
/// sum of 8 (4u / gap)^(1/eps) log n + 5 gap over suboptimal arms.
pub fn thm_truncated_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let u = input.need(input.u, "u")?;
    let inv_eps = 1.0 / input.epsilon;
    Ok(gap_sum(input, |gap| 8.0 * (4.0 * u / gap).powf(inv_eps)))
}

/// Regret bound for the policy built on median-of-means:
/// sum of 32 (12v / gap)^(1/eps) log n + 5 gap over suboptimal arms.
pub fn thm_mom_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let v = input.need(input.v, "v")?;
    let inv_eps = 1.0 / input.epsilon;
    Ok(gap_sum(input, |gap| 32.0 * (12.0 * v / gap).powf(inv_eps)))
}

/// Regret bound for the modified policy built on the Catoni estimator,
/// which only exists at eps = 1:
/// sum of (8v / gap + 8 gap) log n + 5 gap over suboptimal arms.
pub fn thm_catoni_bound(input: &BoundInput) -> Result<f64> {
    input.validate()?;
    let v = input.need(input.v, "v")?;
    if input.epsilon != 1.0 {
        return Err(Error::invalid_input(format!(
            "the Catoni bound requires epsilon = 1, got {}",
            input.epsilon
        )));
    }
    Ok(gap_sum(input, |gap| 8.0 * v / gap + 8.0 * gap))
}

/// Bound on the expected pull count of one suboptimal arm under a policy
/// with deviation constants (v, c):
///
///   2 c v^(1/eps) gap^(-(1+eps)/eps) log n + 5.
///
/// Multiplying by the gap recovers that arm's term in `prop1_gap_bound`.
pub fn expected_pulls_bound(gap: f64, epsilon: f64, v: f64, c: f64, n: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(gap.is_finite() && gap > 0.0) {
        return Err(Error::invalid_input(format!("gap must be positive, got {gap}")));
    }
    for (name, x) in [("v", v), ("c", c)] {
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid_input(format!("{name} must be positive, got {x}")));
        }
    }
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::invalid_input(format!("horizon must be at least 1, got {n}")));
    }
    let inv_eps = 1.0 / epsilon;
    Ok(2.0 * c * v.powf(inv_eps) * gap.powf(-(1.0 + epsilon) * inv_eps) * n.ln() + 5.0)
}

/// Coefficient of log n in the asymptotic gap-dependent lower bound,
/// 0.4 / gap^(1/eps). Requires gap in (0, 1/4).
pub fn lower_gap_coefficient(delta_gap: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(delta_gap > 0.0 && delta_gap < 0.25) {
        return Err(Error::invalid_input(format!("gap must lie in (0, 1/4), got {delta_gap}")));
    }
    Ok(0.4 / delta_gap.powf(1.0 / epsilon))
}

/// Distribution-free lower-bound value, 0.01 K^(eps/(1+eps)) n^(1/(1+eps)).
pub fn lower_free_bound(k: u64, n: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if k < 1 {
        return Err(Error::invalid_input("arm count must be at least 1"));
    }
    if !(n.is_finite() && n >= 1.0) {
        return Err(Error::invalid_input(format!("horizon must be at least 1, got {n}")));
    }
    let eps = epsilon;
    Ok(0.01 * (k as f64).powf(eps / (1.0 + eps)) * n.powf(1.0 / (1.0 + eps)))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct PullsParams {
    gap: f64,
    epsilon: f64,
    v: f64,
    c: f64,
    n: f64,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerGapParams {
    gap: f64,
    epsilon: f64,
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct LowerFreeParams {
    k: u64,
    n: f64,
    epsilon: f64,
}

/// Evaluate one bound by its surface name on JSON-encoded parameters; the
/// dispatch table the CLI and the C ABI both use. The five regret bounds
/// take a [`BoundInput`] object, the scalar bounds take
/// `{"gap", "epsilon", "v", "c", "n"}`, `{"gap", "epsilon"}`, and
/// `{"k", "n", "epsilon"}` respectively.
pub fn evaluate_named(which: &str, params_json: &str) -> Result<f64> {
    match which {
        "prop1_gap" | "prop1_free" | "thm_truncated" | "thm_mom" | "thm_catoni" => {
            let input: BoundInput = serde_json::from_str(params_json)?;
            match which {
                "prop1_gap" => prop1_gap_bound(&input),
                "prop1_free" => prop1_free_bound(&input),
                "thm_truncated" => thm_truncated_bound(&input),
                "thm_mom" => thm_mom_bound(&input),
                _ => thm_catoni_bound(&input),
            }
        }
        "expected_pulls" => {
            let p: PullsParams = serde_json::from_str(params_json)?;
            expected_pulls_bound(p.gap, p.epsilon, p.v, p.c, p.n)
        }
        "lower_gap" => {
            let p: LowerGapParams = serde_json::from_str(params_json)?;
            lower_gap_coefficient(p.gap, p.epsilon)
        }
        "lower_free" => {
            let p: LowerFreeParams = serde_json::from_str(params_json)?;
            lower_free_bound(p.k, p.n, p.epsilon)
        }
        other => Err(Error::invalid_input(format!(
            "unknown bound {other:?}; expected prop1_gap, prop1_free, thm_truncated, thm_mom, \
             thm_catoni, expected_pulls, lower_gap, or lower_free"
        ))),
    }
}
