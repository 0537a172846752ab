//! Conjugate Gamma-Poisson update for one (context, interval) cell.
//!
//! The evidence enters as an observed total `exposure * evidence_rate` over
//! `exposure` units of effort. The prior is `Gamma(deficit * prior_rate,
//! deficit)` in shape/rate form, so its mean is `prior_rate` and its weight is
//! the missing effort. The posterior is
//! `Gamma(t·E + τ·y, t + τ)`, whose mean is the effort-weighted average of
//! the observed rate and the prior rate.

pub mod special;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use special::SpecialError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("invalid rate cell: {0}")]
    InvalidCell(String),

    #[error("invalid gamma argument: {0}")]
    InvalidArgument(String),

    #[error("credible level must lie in (0, 1), got {0}")]
    InvalidLevel(f64),

    #[error("prior bracket is inverted: low {low} > high {high}")]
    InvertedBracket { low: f64, high: f64 },

    #[error(transparent)]
    Special(#[from] SpecialError),
}

/// Inputs to one conjugate update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateCell {
    /// Observed rate `E[X]_j` per unit of effort.
    pub evidence_rate: f64,
    /// Effective effort `t_i` behind the observation.
    pub exposure: f64,
    /// Missing effort `τ_i` filled in by the prior.
    pub deficit: f64,
    /// Prior guess `y_j` for the rate.
    pub prior_rate: f64,
}

impl RateCell {
    pub fn new(evidence_rate: f64, exposure: f64, deficit: f64, prior_rate: f64) -> Result<Self, InferenceError> {
        let cell = RateCell {
            evidence_rate,
            exposure,
            deficit,
            prior_rate,
        };
        cell.validate()?;
        Ok(cell)
    }

    pub fn validate(&self) -> Result<(), InferenceError> {
        let bad = |what: &str, v: f64| Err(InferenceError::InvalidCell(format!("{what} = {v}")));
        if !(self.exposure.is_finite() && self.exposure > 0.0) {
            return bad("exposure", self.exposure);
        }
        if !(self.deficit.is_finite() && self.deficit >= 0.0) {
            return bad("deficit", self.deficit);
        }
        if !(self.evidence_rate.is_finite() && self.evidence_rate >= 0.0) {
            return bad("evidence rate", self.evidence_rate);
        }
        if !(self.prior_rate.is_finite() && self.prior_rate >= 0.0) {
            return bad("prior rate", self.prior_rate);
        }
        Ok(())
    }

    pub fn with_prior(self, prior_rate: f64) -> Self {
        RateCell { prior_rate, ..self }
    }

    /// Observed total `t · E`.
    pub fn observed_total(&self) -> f64 {
        self.exposure * self.evidence_rate
    }

    /// Prior distribution `Gamma(τ·y, τ)`; `None` when the deficit is zero.
    pub fn prior(&self) -> Option<GammaPosterior> {
        (self.deficit > 0.0).then(|| GammaPosterior::new_unchecked(self.deficit * self.prior_rate, self.deficit))
    }
}

/// Gamma distribution in shape/rate form.
///
/// `shape == 0` is the point mass at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaPosterior {
    shape: f64,
    rate: f64,
    mean: f64,
}

impl GammaPosterior {
    pub fn new(shape: f64, rate: f64) -> Result<Self, InferenceError> {
        if !(shape.is_finite() && shape >= 0.0) {
            return Err(InferenceError::InvalidArgument(format!("shape = {shape}")));
        }
        if !(rate.is_finite() && rate > 0.0) {
            return Err(InferenceError::InvalidArgument(format!("rate = {rate}")));
        }
        Ok(Self::new_unchecked(shape, rate))
    }

    fn new_unchecked(shape: f64, rate: f64) -> Self {
        GammaPosterior {
            shape,
            rate,
            mean: shape / rate,
        }
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn variance(&self) -> f64 {
        self.shape / (self.rate * self.rate)
    }

    pub fn is_degenerate(&self) -> bool {
        self.shape == 0.0
    }

    pub fn cdf(&self, x: f64) -> Result<f64, InferenceError> {
        if self.is_degenerate() {
            return if x.is_nan() || x < 0.0 {
                Err(InferenceError::InvalidArgument(format!("x = {x}")))
            } else {
                Ok(1.0)
            };
        }
        gamma_cdf(self.shape, self.rate, x)
    }

    pub fn quantile(&self, q: f64) -> Result<f64, InferenceError> {
        if self.is_degenerate() {
            check_probability(q)?;
            return Ok(0.0);
        }
        gamma_quantile(self.shape, self.rate, q)
    }
}

/// Conjugate update: `Gamma(t·E + τ·y, t + τ)`.
///
/// The stored mean is evaluated as `E + τ/(t + τ) · (y − E)` and kept inside
/// `[min(E, y), max(E, y)]`, which `shape / rate` can miss by an ulp.
pub fn posterior(cell: &RateCell) -> Result<GammaPosterior, InferenceError> {
    cell.validate()?;
    let t = cell.exposure;
    let tau = cell.deficit;
    let e = cell.evidence_rate;
    let y = cell.prior_rate;

    let shape = t * e + tau * y;
    let rate = t + tau;
    let pull = tau / rate;
    let mean = (e + pull * (y - e)).clamp(e.min(y), e.max(y));
    Ok(GammaPosterior { shape, rate, mean })
}

pub fn posterior_mean(p: &GammaPosterior) -> f64 {
    p.mean()
}

fn check_probability(q: f64) -> Result<(), InferenceError> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(InferenceError::InvalidArgument(format!("probability {q} outside (0, 1)")))
    }
}

fn check_shape_rate(shape: f64, rate: f64) -> Result<(), InferenceError> {
    if !(shape.is_finite() && shape > 0.0) {
        return Err(InferenceError::InvalidArgument(format!("shape = {shape}")));
    }
    if !(rate.is_finite() && rate > 0.0) {
        return Err(InferenceError::InvalidArgument(format!("rate = {rate}")));
    }
    Ok(())
}

/// `P(X <= x)` for `X ~ Gamma(shape, rate)`.
pub fn gamma_cdf(shape: f64, rate: f64, x: f64) -> Result<f64, InferenceError> {
    check_shape_rate(shape, rate)?;
    if !(x.is_finite() && x >= 0.0) {
        return Err(InferenceError::InvalidArgument(format!("x = {x}")));
    }
    let z = rate * x;
    Ok(special::regularized_gamma_p(shape, z)?)
}

/// The `q`-quantile of `Gamma(shape, rate)`.
pub fn gamma_quantile(shape: f64, rate: f64, q: f64) -> Result<f64, InferenceError> {
    check_shape_rate(shape, rate)?;
    check_probability(q)?;
    Ok(special::regularized_gamma_p_inv(shape, q)? / rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CredibleInterval {
    pub low: f64,
    pub high: f64,
    /// Set when the posterior is the point mass at zero.
    pub degenerate: bool,
}

/// Equal-tailed interval holding `level` of the posterior mass.
pub fn credible_interval(p: &GammaPosterior, level: f64) -> Result<CredibleInterval, InferenceError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(InferenceError::InvalidLevel(level));
    }
    if p.is_degenerate() {
        return Ok(CredibleInterval {
            low: 0.0,
            high: 0.0,
            degenerate: true,
        });
    }
    let tail = 0.5 * (1.0 - level);
    Ok(CredibleInterval {
        low: gamma_quantile(p.shape, p.rate, tail)?,
        high: gamma_quantile(p.shape, p.rate, 1.0 - tail)?,
        degenerate: false,
    })
}

/// Posterior means under two prior guesses, e.g. zero and a ceiling.
pub fn interval_estimate(cell: &RateCell, y_low: f64, y_high: f64) -> Result<(f64, f64), InferenceError> {
    if y_low.is_nan() || y_high.is_nan() || y_low > y_high {
        return Err(InferenceError::InvertedBracket { low: y_low, high: y_high });
    }
    let low = posterior(&cell.with_prior(y_low))?.mean();
    let high = posterior(&cell.with_prior(y_high))?.mean();
    Ok((low, high))
}
