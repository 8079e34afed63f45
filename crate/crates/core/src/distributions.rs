//! Reward laws, bandit instances, and the adversarial constructions used to
//! probe tightness.
//!
//! Laws are deliberately few: two discrete families (Bernoulli, two-point),
//! three continuous ones (Pareto, Student-t, Gaussian), and a shift wrapper.
//! Sampling goes through the inverse CDF wherever a closed form exists so
//! that runs driven by the same stream stay coupled draw for draw; the shift
//! wrapper delegates to its inner law, which makes shifted and unshifted
//! runs consume streams identically.
//!
//! `moments` reports the mean together with the raw and central absolute
//! moments of order 1 + eps, returning infinity when the tail exponent rules
//! the moment out. Discrete laws, Pareto raw moments, and every second
//! moment come out in closed form; the rest is double-exponential quadrature
//! at relative tolerance 1e-8.

use rand::Rng;
use rand_distr::{Distribution, OpenClosed01, StandardNormal, StudentT as StudentTSampler};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::quad::{integrate_finite, integrate_upper};

const QUAD_REL_TOL: f64 = 1e-8;

/// One arm's reward law.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum ArmDistribution {
    /// Mass p at 1, mass 1-p at 0.
    Bernoulli { p: f64 },
    /// Mass p_hi at hi, mass 1-p_hi at 0.
    TwoPoint { p_hi: f64, hi: f64 },
    /// Density shape scale^shape x^-(shape+1) on [scale, inf); shape > 1 so
    /// the mean exists.
    Pareto { shape: f64, scale: f64 },
    /// Student's t with dof > 1 degrees of freedom.
    StudentT { dof: f64 },
    Gaussian { mean: f64, variance: f64 },
    /// inner + offset, sampled by drawing from inner and adding.
    Shifted { inner: Box<ArmDistribution>, offset: f64 },
}

/// Mean plus absolute moments of order 1 + eps. `raw` is E|X|^(1+eps),
/// `central` is E|X - mean|^(1+eps); either may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub raw: f64,
    pub central: f64,
}

impl ArmDistribution {
    pub fn bernoulli(p: f64) -> Result<Self> {
        let d = ArmDistribution::Bernoulli { p };
        d.validate()?;
        Ok(d)
    }

    pub fn two_point(p_hi: f64, hi: f64) -> Result<Self> {
        let d = ArmDistribution::TwoPoint { p_hi, hi };
        d.validate()?;
        Ok(d)
    }

    pub fn pareto(shape: f64, scale: f64) -> Result<Self> {
        let d = ArmDistribution::Pareto { shape, scale };
        d.validate()?;
        Ok(d)
    }

    pub fn student_t(dof: f64) -> Result<Self> {
        let d = ArmDistribution::StudentT { dof };
        d.validate()?;
        Ok(d)
    }

    pub fn gaussian(mean: f64, variance: f64) -> Result<Self> {
        let d = ArmDistribution::Gaussian { mean, variance };
        d.validate()?;
        Ok(d)
    }

    pub fn shifted(inner: ArmDistribution, offset: f64) -> Result<Self> {
        let d = ArmDistribution::Shifted { inner: Box::new(inner), offset };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ArmDistribution::Bernoulli { p } => {
                if !(*p >= 0.0 && *p <= 1.0) {
                    return Err(Error::invalid_input(format!("bernoulli p must lie in [0, 1], got {p}")));
                }
            }
            ArmDistribution::TwoPoint { p_hi, hi } => {
                if !(*p_hi >= 0.0 && *p_hi <= 1.0) {
                    return Err(Error::invalid_input(format!("two_point p_hi must lie in [0, 1], got {p_hi}")));
                }
                if !hi.is_finite() {
                    return Err(Error::invalid_input(format!("two_point hi must be finite, got {hi}")));
                }
            }
            ArmDistribution::Pareto { shape, scale } => {
                if !(shape.is_finite() && *shape > 1.0) {
                    return Err(Error::invalid_input(format!("pareto shape must exceed 1, got {shape}")));
                }
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::invalid_input(format!("pareto scale must be positive, got {scale}")));
                }
            }
            ArmDistribution::StudentT { dof } => {
                if !(dof.is_finite() && *dof > 1.0) {
                    return Err(Error::invalid_input(format!("student_t dof must exceed 1, got {dof}")));
                }
            }
            ArmDistribution::Gaussian { mean, variance } => {
                if !mean.is_finite() {
                    return Err(Error::invalid_input(format!("gaussian mean must be finite, got {mean}")));
                }
                if !(variance.is_finite() && *variance > 0.0) {
                    return Err(Error::invalid_input(format!("gaussian variance must be positive, got {variance}")));
                }
            }
            ArmDistribution::Shifted { inner, offset } => {
                if !offset.is_finite() {
                    return Err(Error::invalid_input(format!("shift offset must be finite, got {offset}")));
                }
                inner.validate()?;
            }
        }
        Ok(())
    }

    /// One draw. Identical stream state reproduces the identical value.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            ArmDistribution::Bernoulli { p } => {
                let u: f64 = rng.gen();
                if u < *p { 1.0 } else { 0.0 }
            }
            ArmDistribution::TwoPoint { p_hi, hi } => {
                let u: f64 = rng.gen();
                if u < *p_hi { *hi } else { 0.0 }
            }
            ArmDistribution::Pareto { shape, scale } => {
                let u: f64 = rng.sample(OpenClosed01);
                scale * u.powf(-1.0 / shape)
            }
            ArmDistribution::StudentT { dof } => {
                StudentTSampler::new(*dof).expect("dof validated > 1").sample(rng)
            }
            ArmDistribution::Gaussian { mean, variance } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + variance.sqrt() * z
            }
            ArmDistribution::Shifted { inner, offset } => inner.sample(rng) + offset,
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            ArmDistribution::Bernoulli { p } => *p,
            ArmDistribution::TwoPoint { p_hi, hi } => p_hi * hi,
            ArmDistribution::Pareto { shape, scale } => shape * scale / (shape - 1.0),
            ArmDistribution::StudentT { .. } => 0.0,
            ArmDistribution::Gaussian { mean, .. } => *mean,
            ArmDistribution::Shifted { inner, offset } => inner.mean() + offset,
        }
    }

    /// Supremum of the orders q with E|X|^q finite.
    fn moment_order_limit(&self) -> f64 {
        match self {
            ArmDistribution::Pareto { shape, .. } => *shape,
            ArmDistribution::StudentT { dof } => *dof,
            ArmDistribution::Shifted { inner, .. } => inner.moment_order_limit(),
            _ => f64::INFINITY,
        }
    }

    /// Mean and absolute moments of order 1 + eps.
    pub fn moments(&self, epsilon: f64) -> Result<Moments> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        let p = 1.0 + epsilon;
        let mean = self.mean();
        Ok(Moments { mean, raw: self.abs_moment(p, 0.0), central: self.abs_moment(p, -mean) })
    }

    /// E|X + shift|^p, or infinity when the tail exponent rules it out.
    fn abs_moment(&self, p: f64, shift: f64) -> f64 {
        if p >= self.moment_order_limit() {
            return f64::INFINITY;
        }
        match self {
            ArmDistribution::Bernoulli { p: prob } => {
                (1.0 - prob) * shift.abs().powf(p) + prob * (1.0 + shift).abs().powf(p)
            }
            ArmDistribution::TwoPoint { p_hi, hi } => {
                (1.0 - p_hi) * shift.abs().powf(p) + p_hi * (hi + shift).abs().powf(p)
            }
            ArmDistribution::Gaussian { mean, variance } => {
                if p == 2.0 {
                    variance + (mean + shift) * (mean + shift)
                } else {
                    let sd = variance.sqrt();
                    let lo = mean - 14.0 * sd;
                    let hi = mean + 14.0 * sd;
                    let f = |x: f64| (x + shift).abs().powf(p) * gaussian_pdf(x, *mean, sd);
                    split_integral_finite(&f, lo, hi, -shift)
                }
            }
            ArmDistribution::Pareto { shape, scale } => {
                if shift == 0.0 {
                    shape * scale.powf(p) / (shape - p)
                } else if p == 2.0 {
                    let ex = self.mean();
                    let ex2 = shape * scale * scale / (shape - 2.0);
                    ex2 + 2.0 * shift * ex + shift * shift
                } else {
                    let f = |x: f64| {
                        (x + shift).abs().powf(p) * shape * scale.powf(*shape) * x.powf(-shape - 1.0)
                    };
                    let kink = -shift;
                    if kink > *scale {
                        integrate_finite(f, *scale, kink, QUAD_REL_TOL)
                            + integrate_upper(f, kink, QUAD_REL_TOL)
                    } else {
                        integrate_upper(f, *scale, QUAD_REL_TOL)
                    }
                }
            }
            ArmDistribution::StudentT { dof } => {
                let log_norm = ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (dof * std::f64::consts::PI).ln();
                let norm = log_norm.exp();
                let density = move |x: f64| norm * (1.0 + x * x / dof).powf(-0.5 * (dof + 1.0));
                let f = |x: f64| (x + shift).abs().powf(p) * density(x);
                let cut = 50.0;
                let body = split_integral_finite(&f, -cut, cut, -shift);
                let upper = integrate_upper(f, cut, QUAD_REL_TOL);
                let lower = integrate_upper(|x: f64| (shift - x).abs().powf(p) * density(x), cut, QUAD_REL_TOL);
                body + upper + lower
            }
            ArmDistribution::Shifted { inner, offset } => inner.abs_moment(p, shift + offset),
        }
    }
}

fn gaussian_pdf(x: f64, mean: f64, sd: f64) -> f64 {
    let z = (x - mean) / sd;
    (-0.5 * z * z).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt())
}

/// Integrate over (lo, hi), splitting at the |.|^p kink when it lies inside.
fn split_integral_finite<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, kink: f64) -> f64 {
    if kink > lo && kink < hi {
        integrate_finite(f, lo, kink, QUAD_REL_TOL) + integrate_finite(f, kink, hi, QUAD_REL_TOL)
    } else {
        integrate_finite(f, lo, hi, QUAD_REL_TOL)
    }
}

// ---------------------------------------------------------------------------
// instances
// ---------------------------------------------------------------------------

/// A fixed set of at least two arms with cached means and gaps.
#[derive(Clone, Debug, PartialEq)]
pub struct BanditInstance {
    arms: Vec<ArmDistribution>,
    means: Vec<f64>,
}

impl BanditInstance {
    pub fn new(arms: Vec<ArmDistribution>) -> Result<Self> {
        if arms.len() < 2 {
            return Err(Error::invalid_input(format!(
                "an instance needs at least two arms, got {}",
                arms.len()
            )));
        }
        for arm in &arms {
            arm.validate()?;
        }
        let means: Vec<f64> = arms.iter().map(ArmDistribution::mean).collect();
        for (i, m) in means.iter().enumerate() {
            if !m.is_finite() {
                return Err(Error::invalid_input(format!("arm {i} has non-finite mean {m}")));
            }
        }
        Ok(BanditInstance { arms, means })
    }

    pub fn arms(&self) -> &[ArmDistribution] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn best_mean(&self) -> f64 {
        self.means.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Lowest index attaining the best mean.
    pub fn optimal_arm(&self) -> usize {
        let best = self.best_mean();
        self.means.iter().position(|&m| m == best).unwrap()
    }

    /// Per-arm suboptimality gaps, zero at every optimal arm.
    pub fn gaps(&self) -> Vec<f64> {
        let best = self.best_mean();
        self.means.iter().map(|m| best - m).collect()
    }

    /// The same instance with every arm translated by `offset`. Gaps are
    /// preserved; reward streams stay coupled draw for draw.
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        let arms = self
            .arms
            .iter()
            .map(|arm| ArmDistribution::shifted(arm.clone(), offset))
            .collect::<Result<Vec<_>>>()?;
        BanditInstance::new(arms)
    }
}

/// Hardest two-arm pair at gap `delta_gap`: with gamma = (2 delta_gap)^(1/eps),
/// both arms put mass near zero and a sliver at 1/gamma,
///
///   nu1 = TwoPoint(gamma^(1+eps), 1/gamma)    mean 2 delta_gap
///   nu2 = TwoPoint(gamma^(1+eps) - delta_gap gamma, 1/gamma)  mean delta_gap
///
/// so the means differ by exactly delta_gap while both raw (1+eps)-moments
/// stay at most 1. Requires 0 < delta_gap < 1/4.
pub fn lower_bound_pair(delta_gap: f64, epsilon: f64) -> Result<(ArmDistribution, ArmDistribution)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if !(delta_gap > 0.0 && delta_gap < 0.25) {
        return Err(Error::precondition(format!(
            "gap must lie in (0, 1/4), got {delta_gap}"
        )));
    }
    let gamma = (2.0 * delta_gap).powf(1.0 / epsilon);
    let p_hi = gamma.powf(1.0 + epsilon);
    let nu1 = ArmDistribution::two_point(p_hi, 1.0 / gamma)?;
    let nu2 = ArmDistribution::two_point(p_hi - delta_gap * gamma, 1.0 / gamma)?;
    Ok((nu1, nu2))
}

/// Single law witnessing that the empirical mean's polynomial radius cannot
/// be improved: with gamma = 1/(2 n eta), the law TwoPoint(gamma^(1+eps),
/// 1/gamma) has mean gamma^eps < eta, yet one extreme draw among n already
/// pushes the empirical mean eta above the mean, which happens with
/// probability of order 1/(n^eps (2 eta)^(1+eps)). Requires
/// eta > n^(-eps/(1+eps)).
pub fn lemma1_tightness_instance(n: u64, eta: f64, epsilon: f64) -> Result<ArmDistribution> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::invalid_input(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    if n == 0 {
        return Err(Error::invalid_input("n must be at least 1"));
    }
    if !(eta.is_finite() && eta > 0.0) {
        return Err(Error::invalid_input(format!("eta must be positive, got {eta}")));
    }
    let threshold = (n as f64).powf(-epsilon / (1.0 + epsilon));
    if eta <= threshold {
        return Err(Error::precondition(format!(
            "eta must exceed n^(-eps/(1+eps)) = {threshold}, got {eta}"
        )));
    }
    let gamma = 1.0 / (2.0 * n as f64 * eta);
    ArmDistribution::two_point(gamma.powf(1.0 + epsilon), 1.0 / gamma)
}
