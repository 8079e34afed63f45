//! Mean estimators for heavy-tailed samples and their confidence radii.
//!
//! Rewards are only assumed to have a finite moment of order 1 + epsilon for
//! some epsilon in (0, 1]; variances may be infinite. Under that assumption
//! three robust estimators (truncated mean, median of means, Catoni's
//! M-estimator) concentrate like
//!
//!   |estimate - mean|  <=  v^(1/(1+eps)) (c log(1/delta) / n)^(eps/(1+eps))
//!
//! with probability 1 - delta, each with its own constants (v, c). The plain
//! empirical mean is kept as the baseline; its radius is polynomial in
//! 1/delta rather than logarithmic, which is exactly the gap the robust
//! estimators close.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// inputs
// ---------------------------------------------------------------------------

/// Moment assumptions a caller stands behind when invoking an estimator.
///
/// `raw_bound_u` bounds E|X|^(1+eps), `central_bound_v` bounds
/// E|X - mean|^(1+eps). Which one is required depends on the estimator:
/// truncation needs the raw bound, Catoni and the empirical radius need the
/// central bound, median of means needs neither for the estimate itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentParams {
    pub epsilon: f64,
    pub raw_bound_u: Option<f64>,
    pub central_bound_v: Option<f64>,
}

impl MomentParams {
    pub fn new(epsilon: f64) -> Result<Self> {
        let params = MomentParams { epsilon, raw_bound_u: None, central_bound_v: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_raw_bound(mut self, u: f64) -> Result<Self> {
        self.raw_bound_u = Some(u);
        self.validate()?;
        Ok(self)
    }

    pub fn with_central_bound(mut self, v: f64) -> Result<Self> {
        self.central_bound_v = Some(v);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::invalid_input(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        for (name, bound) in [("raw_bound_u", self.raw_bound_u), ("central_bound_v", self.central_bound_v)] {
            if let Some(b) = bound {
                if !(b.is_finite() && b > 0.0) {
                    return Err(Error::invalid_input(format!(
                        "{name} must be positive and finite, got {b}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn raw_bound(&self) -> Result<f64> {
        self.raw_bound_u
            .ok_or_else(|| Error::invalid_input("estimator needs raw_bound_u, none given"))
    }

    pub(crate) fn central_bound(&self) -> Result<f64> {
        self.central_bound_v
            .ok_or_else(|| Error::invalid_input("estimator needs central_bound_v, none given"))
    }
}

/// Arrival-ordered observations. Values must be finite; an empty sample is
/// legal to hold but not to estimate from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
}

impl Sample {
    pub fn new() -> Self {
        Sample { values: Vec::new() }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        for v in &values {
            if !v.is_finite() {
                return Err(Error::invalid_input(format!("sample value {v} is not finite")));
            }
        }
        Ok(Sample { values })
    }

    pub fn push(&mut self, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::invalid_input(format!("sample value {value} is not finite")));
        }
        self.values.push(value);
        Ok(())
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    Empirical,
    Truncated,
    MedianOfMeans,
    Catoni,
}

impl EstimatorKind {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::Empirical => "empirical",
            EstimatorKind::Truncated => "truncated",
            EstimatorKind::MedianOfMeans => "median_of_means",
            EstimatorKind::Catoni => "catoni",
        }
    }
}

/// An estimator together with the deviation constants its index needs.
///
/// `v_policy` and `c_policy` are the (v, c) pair of the radius formula in
/// the module header, matched to the estimator:
///
///   Truncated:      v = u,    c = 4^((1+eps)/eps)
///   MedianOfMeans:  v = 12 v, c = 16   (log(1/delta) picks up a +1/8)
///   Catoni:         v = v,    c = 4    (requires eps = 1)
///
/// `Empirical` keeps v = v, c = 3 and routes its radius through
/// [`empirical_radius`] instead of the logarithmic formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimatorSpec {
    pub kind: EstimatorKind,
    pub params: MomentParams,
    pub v_policy: f64,
    pub c_policy: f64,
}

impl EstimatorSpec {
    pub fn new(kind: EstimatorKind, params: MomentParams) -> Result<Self> {
        params.validate()?;
        let eps = params.epsilon;
        let (v_policy, c_policy) = match kind {
            EstimatorKind::Truncated => (params.raw_bound()?, 4f64.powf((1.0 + eps) / eps)),
            EstimatorKind::MedianOfMeans => (12.0 * params.central_bound()?, 16.0),
            EstimatorKind::Catoni => {
                if eps != 1.0 {
                    return Err(Error::invalid_input(format!(
                        "catoni requires epsilon = 1, got {eps}"
                    )));
                }
                (params.central_bound()?, 4.0)
            }
            EstimatorKind::Empirical => (params.central_bound()?, 3.0),
        };
        if !(v_policy.is_finite() && v_policy > 0.0 && c_policy.is_finite() && c_policy > 0.0) {
            return Err(Error::invalid_input(format!(
                "derived policy constants v = {v_policy}, c = {c_policy} are not positive finite"
            )));
        }
        Ok(EstimatorSpec { kind, params, v_policy, c_policy })
    }

    /// Point estimate of the mean at confidence level delta.
    pub fn estimate(&self, sample: &Sample, delta: f64) -> Result<f64> {
        match self.kind {
            EstimatorKind::Empirical => empirical_mean(sample),
            EstimatorKind::Truncated => truncated_mean(sample, delta, &self.params),
            EstimatorKind::MedianOfMeans => median_of_means(sample, delta),
            EstimatorKind::Catoni => catoni_mean(sample, delta, &self.params),
        }
    }
}

// ---------------------------------------------------------------------------
// estimators
// ---------------------------------------------------------------------------

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid_input(format!(
            "delta must lie strictly inside (0, 1), got {delta}"
        )));
    }
    Ok(())
}

fn check_nonempty(sample: &Sample) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::invalid_input("cannot estimate from an empty sample"));
    }
    Ok(())
}

pub(crate) fn log_inverse(delta: f64) -> f64 {
    -delta.ln()
}

// exponent 1/2 is the eps = 1 case and by far the hottest path
pub(crate) fn root_pow(base: f64, exponent: f64) -> f64 {
    debug_assert!(base >= 0.0);
    if exponent == 0.5 {
        base.sqrt()
    } else {
        base.powf(exponent)
    }
}

/// Arithmetic mean of the sample.
pub fn empirical_mean(sample: &Sample) -> Result<f64> {
    check_nonempty(sample)?;
    let sum: f64 = sample.values().iter().sum();
    Ok(sum / sample.len() as f64)
}

/// Deviation radius of the empirical mean under a finite central
/// (1+eps)-moment: (3 v / (delta n^eps))^(1/(1+eps)).
///
/// Polynomial in 1/delta. Chebyshev-style, and essentially tight for
/// heavy-tailed laws, which is what makes the empirical mean unusable
/// inside an upper confidence bound at delta = t^-2.
pub fn empirical_radius(n: u64, delta: f64, params: &MomentParams) -> Result<f64> {
    params.validate()?;
    let v = params.central_bound()?;
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::invalid_input("radius needs at least one sample"));
    }
    let eps = params.epsilon;
    let base = 3.0 * v / (delta * (n as f64).powf(eps));
    Ok(root_pow(base, 1.0 / (1.0 + eps)))
}

/// Truncated mean: observation t (1-based arrival order) is kept only when
/// |x_t| <= (u t / log(1/delta))^(1/(1+eps)); discarded values contribute
/// zero to the average.
///
/// The cutoff grows with the arrival index, so early observations face the
/// harshest truncation. Truncation is applied around zero, not around the
/// mean, which is why this estimator is not translation equivariant.
pub fn truncated_mean(sample: &Sample, delta: f64, params: &MomentParams) -> Result<f64> {
    params.validate()?;
    let u = params.raw_bound()?;
    check_delta(delta)?;
    check_nonempty(sample)?;
    let l = log_inverse(delta);
    let inv = 1.0 / (1.0 + params.epsilon);
    let mut acc = 0.0;
    for (i, &x) in sample.values().iter().enumerate() {
        let t = (i + 1) as f64;
        let cutoff = root_pow(u * t / l, inv);
        if x.abs() <= cutoff {
            acc += x;
        }
    }
    Ok(acc / sample.len() as f64)
}

/// Number of blocks used by [`median_of_means`] at sample size n and
/// confidence delta: max(1, floor(min(8 log(e^(1/8)/delta), n/2))).
pub(crate) fn mom_block_count(n: u64, delta: f64) -> u64 {
    let by_confidence = 8.0 * (0.125 + log_inverse(delta));
    let k = by_confidence.min(n as f64 / 2.0).floor();
    (k as u64).max(1)
}

/// Median of means: the sample is cut into k disjoint blocks of
/// N = floor(n/k) consecutive observations (trailing remainder discarded),
/// and the estimate is the median of the k block means, averaging the two
/// middle ones when k is even.
///
/// The estimate needs no moment bound at all; delta only sets the block
/// count.
pub fn median_of_means(sample: &Sample, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    check_nonempty(sample)?;
    let n = sample.len() as u64;
    let k = mom_block_count(n, delta);
    let block = (n / k) as usize;
    let values = sample.values();
    let mut means: Vec<f64> = (0..k as usize)
        .map(|j| {
            let chunk = &values[j * block..(j + 1) * block];
            chunk.iter().sum::<f64>() / block as f64
        })
        .collect();
    means.sort_unstable_by(f64::total_cmp);
    let k = k as usize;
    if k % 2 == 1 {
        Ok(means[k / 2])
    } else {
        Ok(0.5 * (means[k / 2 - 1] + means[k / 2]))
    }
}

/// Catoni's influence function: log(1 + x + x^2/2) for x >= 0, mirrored
/// oddly for x < 0. The tightest choice satisfying the two-sided envelope
/// -log(1 - x + x^2/2) <= psi(x) <= log(1 + x + x^2/2).
pub(crate) fn catoni_psi(x: f64) -> f64 {
    if x >= 0.0 {
        (x + 0.5 * x * x).ln_1p()
    } else {
        -((-x + 0.5 * x * x).ln_1p())
    }
}

/// Scale parameter of Catoni's estimator:
/// alpha = sqrt(2 log(1/delta) / (n (v + 2 v log(1/delta) / (n - 2 log(1/delta))))).
///
/// Requires n > 2 log(1/delta); below that the estimator is undefined.
pub fn catoni_alpha(n: u64, delta: f64, v: f64) -> Result<f64> {
    check_delta(delta)?;
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::invalid_input(format!("variance bound must be positive, got {v}")));
    }
    let l = log_inverse(delta);
    let nf = n as f64;
    if nf <= 2.0 * l {
        return Err(Error::precondition(format!(
            "catoni needs n > 2 log(1/delta): n = {n}, 2 log(1/delta) = {}",
            2.0 * l
        )));
    }
    Ok((2.0 * l / (nf * (v + 2.0 * v * l / (nf - 2.0 * l)))).sqrt())
}

/// Catoni's M-estimator: the root of m -> sum_i psi(alpha (x_i - m)).
///
/// The objective is strictly decreasing with a sign change on
/// [min x, max x], so the root is found by bisection on that bracket
/// (geometrically expanded in the degenerate case where rounding pushes a
/// sign outside). Iteration stops after 200 halvings or when the residual
/// |sum psi| drops below 1e-9 n max(1, alpha range). Only defined for
/// eps = 1 and requires n > 2 log(1/delta).
pub fn catoni_mean(sample: &Sample, delta: f64, params: &MomentParams) -> Result<f64> {
    params.validate()?;
    if params.epsilon != 1.0 {
        return Err(Error::invalid_input(format!(
            "catoni requires epsilon = 1, got {}",
            params.epsilon
        )));
    }
    let v = params.central_bound()?;
    check_delta(delta)?;
    check_nonempty(sample)?;
    let alpha = catoni_alpha(sample.len() as u64, delta, v)?;
    let mut sorted = sample.values().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let groups = group_sorted(&sorted);
    Ok(catoni_root(&groups, sample.len() as u64, alpha))
}

/// Run-length encode an ascending slice into (value, multiplicity) pairs.
pub(crate) fn group_sorted(sorted: &[f64]) -> Vec<(f64, u64)> {
    let mut groups: Vec<(f64, u64)> = Vec::new();
    for &x in sorted {
        match groups.last_mut() {
            Some((value, count)) if *value == x => *count += 1,
            _ => groups.push((x, 1)),
        }
    }
    groups
}

/// Bisection solve of sum_i psi(alpha (x_i - m)) = 0 over grouped values.
///
/// Repeated observations collapse to one psi evaluation apiece, which is
/// what keeps the policy loop affordable on two-point reward laws.
pub(crate) fn catoni_root(groups: &[(f64, u64)], n: u64, alpha: f64) -> f64 {
    let lo0 = groups[0].0;
    let hi0 = groups[groups.len() - 1].0;
    if lo0 == hi0 {
        return lo0;
    }
    let objective = |m: f64| -> f64 {
        let mut acc = 0.0;
        for &(x, count) in groups {
            acc += count as f64 * catoni_psi(alpha * (x - m));
        }
        acc
    };
    let tol = 1e-9 * n as f64 * (alpha * (hi0 - lo0)).max(1.0);

    let mut lo = lo0;
    let mut hi = hi0;
    let mut span = hi - lo;
    while objective(lo) < 0.0 {
        lo -= span;
        span *= 2.0;
    }
    span = hi - lo;
    while objective(hi) > 0.0 {
        hi += span;
        span *= 2.0;
    }

    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let g = objective(mid);
        if g.abs() <= tol {
            return mid;
        }
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    mid
}

/// Deviation radius matched to the estimator in `spec` after s observations:
/// v^(1/(1+eps)) (c log(1/delta) / s)^(eps/(1+eps)), with (v, c) the spec's
/// policy constants and log(1/delta) replaced by 1/8 + log(1/delta) for
/// median of means. The empirical kind delegates to [`empirical_radius`].
pub fn confidence_radius(spec: &EstimatorSpec, s: u64, delta: f64) -> Result<f64> {
    if spec.kind == EstimatorKind::Empirical {
        return empirical_radius(s, delta, &spec.params);
    }
    check_delta(delta)?;
    if s == 0 {
        return Err(Error::invalid_input("radius needs at least one sample"));
    }
    let eps = spec.params.epsilon;
    let l = match spec.kind {
        EstimatorKind::MedianOfMeans => 0.125 + log_inverse(delta),
        _ => log_inverse(delta),
    };
    let one_plus = 1.0 + eps;
    let radius = root_pow(spec.v_policy, 1.0 / one_plus)
        * root_pow(spec.c_policy * l / s as f64, eps / one_plus);
    Ok(radius)
}
