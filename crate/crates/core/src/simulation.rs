//! Synthetic assemblages with known rates, a brute-force posterior oracle and
//! Monte Carlo coverage experiments.
//!
//! Every replicate draws from its own ChaCha8 stream selected by
//! `(seed, replicate index)`, so replicates can run in any order or in
//! parallel and still produce identical numbers.
//!
//! Poisson variates use sequential inversion below a mean of 30 and Hörmann's
//! PTRS transformed rejection at or above it.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chronology::{AoristicSeries, ContextId};
use crate::inference::special::ln_gamma;
use crate::inference::{self, CredibleInterval, GammaPosterior, InferenceError, RateCell};
use crate::intensity::{compute_deficits, ContextRecord, IntensityError};
use crate::priors::{elicit, PriorError, PriorStrategy};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimulationError {
    #[error("invalid simulation spec: {0}")]
    InvalidSpec(String),

    #[error("posterior is a point mass at zero; nothing to integrate")]
    Degenerate,

    #[error("oracle resolution must be at least {min} points, got {got}")]
    Resolution { got: usize, min: usize },

    #[error(transparent)]
    Inference(#[from] InferenceError),

    #[error(transparent)]
    Intensity(#[from] IntensityError),

    #[error(transparent)]
    Prior(#[from] PriorError),
}

/// Ground truth and design of a simulated study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSpec {
    /// True rate per interval, shared by every context.
    pub true_rates: Vec<f64>,
    /// Effective effort per context.
    pub exposures: Vec<f64>,
    pub prior_strategy: PriorStrategy,
    pub replicates: usize,
    pub seed: u64,
}

impl SimulationSpec {
    pub fn validate(&self) -> Result<(), SimulationError> {
        let bad = |m: String| Err(SimulationError::InvalidSpec(m));
        if self.replicates == 0 {
            return bad("replicates must be >= 1".into());
        }
        if self.true_rates.is_empty() {
            return bad("at least one interval rate is required".into());
        }
        if self.exposures.is_empty() {
            return bad("at least one context exposure is required".into());
        }
        if let Some(r) = self.true_rates.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return bad(format!("true rate {r} must be finite and >= 0"));
        }
        if let Some(t) = self.exposures.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("exposure {t} must be finite and > 0"));
        }
        self.prior_strategy.validate()?;
        Ok(())
    }

    pub fn intervals(&self) -> usize {
        self.true_rates.len()
    }

    pub fn contexts(&self) -> usize {
        self.exposures.len()
    }

    /// Synthetic context ids `C1, C2, ...`, zero-padded so they sort in order.
    pub fn context_ids(&self) -> Vec<ContextId> {
        let width = self.contexts().to_string().len();
        (1..=self.contexts())
            .map(|i| ContextId(format!("C{i:0width$}")))
            .collect()
    }

    fn context_records(&self) -> Vec<ContextRecord> {
        self.context_ids()
            .into_iter()
            .zip(&self.exposures)
            .map(|(id, &t)| ContextRecord {
                context_id: id,
                duration: t,
                staffing: 1.0,
            })
            .collect()
    }
}

/// Independent random stream for one replicate.
pub fn replicate_rng(seed: u64, replicate: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replicate);
    rng
}

/// Uniform draw on `[0, 1)` with 53 random bits.
fn uniform(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

pub fn sample_poisson(rng: &mut impl RngCore, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    if mean < 30.0 {
        poisson_inversion(rng, mean)
    } else {
        poisson_ptrs(rng, mean)
    }
}

fn poisson_inversion(rng: &mut impl RngCore, mean: f64) -> u64 {
    let u = uniform(rng);
    let mut k = 0u64;
    let mut p = (-mean).exp();
    let mut cdf = p;
    while u > cdf {
        k += 1;
        p *= mean / k as f64;
        cdf += p;
        if p == 0.0 && cdf < u {
            // Round-off left u above the representable cdf; we are deep in
            // the tail already.
            break;
        }
    }
    k
}

fn poisson_ptrs(rng: &mut impl RngCore, mean: f64) -> u64 {
    let slam = mean.sqrt();
    let loglam = mean.ln();
    let b = 0.931 + 2.53 * slam;
    let a = -0.059 + 0.02483 * b;
    let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    let vr = 0.9277 - 3.6224 / (b - 2.0);
    loop {
        let u = uniform(rng) - 0.5;
        let v = 1.0 - uniform(rng);
        let us = 0.5 - u.abs();
        let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
        if us >= 0.07 && v <= vr {
            return k as u64;
        }
        if k < 0.0 || (us < 0.013 && v > us) {
            continue;
        }
        let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
        let rhs = -mean + k * loglam - ln_gamma(k + 1.0);
        if lhs <= rhs {
            return k as u64;
        }
    }
}

/// Counts indexed `[replicate][context][interval]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulatedCounts {
    pub counts: Vec<Vec<Vec<u64>>>,
}

fn draw_replicate(spec: &SimulationSpec, replicate: usize) -> Vec<Vec<u64>> {
    let mut rng = replicate_rng(spec.seed, replicate as u64);
    spec.exposures
        .iter()
        .map(|&t| spec.true_rates.iter().map(|&lam| sample_poisson(&mut rng, lam * t)).collect())
        .collect()
}

/// Poisson counts with mean `true_rate[j] * exposure[i]` for every replicate.
pub fn simulate_counts(spec: &SimulationSpec) -> Result<SimulatedCounts, SimulationError> {
    spec.validate()?;
    let counts = (0..spec.replicates)
        .into_par_iter()
        .map(|r| draw_replicate(spec, r))
        .collect();
    Ok(SimulatedCounts { counts })
}

/// One analyzed (context, interval) cell of a replicate.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCell {
    pub context: usize,
    pub interval: usize,
    pub count: u64,
    pub cell: RateCell,
    pub posterior: GammaPosterior,
    pub interval_estimate: CredibleInterval,
}

/// Runs the conjugate analysis on one replicate's counts, with deficits taken
/// from `spec.exposures` and the prior elicited from this replicate.
pub fn analyze_replicate(
    spec: &SimulationSpec,
    counts: &[Vec<u64>],
    level: f64,
) -> Result<Vec<SimulatedCell>, SimulationError> {
    let profile = compute_deficits(&spec.context_records())?;
    let ids = spec.context_ids();
    let series: Vec<AoristicSeries> = ids
        .iter()
        .zip(counts)
        .zip(&spec.exposures)
        .map(|((id, row), &t)| AoristicSeries {
            context_id: id.clone(),
            expected: row.iter().map(|&n| n as f64 / t).collect(),
            clipped_mass: 0.0,
        })
        .collect();
    let priors = elicit(&spec.prior_strategy, &series, spec.intervals())?;

    let mut out = Vec::with_capacity(spec.contexts() * spec.intervals());
    for (i, (id, s)) in ids.iter().zip(&series).enumerate() {
        let intensity = profile.get(id).expect("profile covers every context");
        for (j, (&e, &y)) in s.expected.iter().zip(&priors).enumerate() {
            let cell = RateCell::new(e, intensity.effective_duration, intensity.deficit, y)?;
            let posterior = inference::posterior(&cell)?;
            let interval_estimate = inference::credible_interval(&posterior, level)?;
            out.push(SimulatedCell {
                context: i,
                interval: j,
                count: counts[i][j],
                cell,
                posterior,
                interval_estimate,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub context_id: ContextId,
    pub interval_index: usize,
    pub true_rate: f64,
    pub exposure: f64,
    pub deficit: f64,
    pub replicates: usize,
    /// Share of replicates whose interval contains the true rate.
    pub coverage: f64,
    pub mean_posterior_mean: f64,
    /// Mean |posterior mean − prior rate| over replicates.
    pub posterior_deviation_from_prior: f64,
    /// Mean |raw evidence rate − prior rate| over replicates.
    pub raw_deviation_from_prior: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub level: f64,
    pub cells: Vec<CoverageCell>,
}

#[derive(Default, Clone, Copy)]
struct Tally {
    hits: u64,
    mean: f64,
    post_dev: f64,
    raw_dev: f64,
}

/// Empirical coverage of `level` credible intervals per (context, interval).
pub fn coverage_experiment(spec: &SimulationSpec, level: f64) -> Result<CoverageReport, SimulationError> {
    spec.validate()?;
    if !(level > 0.0 && level < 1.0) {
        return Err(InferenceError::InvalidLevel(level).into());
    }

    let per_replicate: Vec<Vec<SimulatedCell>> = (0..spec.replicates)
        .into_par_iter()
        .map(|r| analyze_replicate(spec, &draw_replicate(spec, r), level))
        .collect::<Result<_, _>>()?;

    // Fixed-order reduction.
    let n_cells = spec.contexts() * spec.intervals();
    let mut tallies = vec![Tally::default(); n_cells];
    for cells in &per_replicate {
        for (tally, c) in tallies.iter_mut().zip(cells) {
            let truth = spec.true_rates[c.interval];
            if c.interval_estimate.low <= truth && truth <= c.interval_estimate.high {
                tally.hits += 1;
            }
            tally.mean += c.posterior.mean();
            tally.post_dev += (c.posterior.mean() - c.cell.prior_rate).abs();
            tally.raw_dev += (c.cell.evidence_rate - c.cell.prior_rate).abs();
        }
    }

    let n = spec.replicates as f64;
    let ids = spec.context_ids();
    let first = &per_replicate[0];
    let cells = tallies
        .iter()
        .zip(first)
        .map(|(t, c)| CoverageCell {
            context_id: ids[c.context].clone(),
            interval_index: c.interval,
            true_rate: spec.true_rates[c.interval],
            exposure: c.cell.exposure,
            deficit: c.cell.deficit,
            replicates: spec.replicates,
            coverage: t.hits as f64 / n,
            mean_posterior_mean: t.mean / n,
            posterior_deviation_from_prior: t.post_dev / n,
            raw_deviation_from_prior: t.raw_dev / n,
        })
        .collect();
    Ok(CoverageReport { level, cells })
}

/// Posterior moments from numerical integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleMoments {
    pub mean: f64,
    pub variance: f64,
}

pub const MIN_ORACLE_RESOLUTION: usize = 10_000;
const MAX_ORACLE_POINTS: usize = 5_000_000;

/// Brute-force Bayes: multiplies the Gamma prior density by the Poisson
/// likelihood of the observed total on a grid and integrates numerically.
///
/// The grid covers `λ ∈ (0, max(mean + 12 sd, (α + 60)/β)]` through the substitution
/// `λ = e^s`, which removes the `λ^(α-1)` endpoint singularity so the
/// trapezoidal rule converges geometrically. A zero deficit uses the
/// `λ^-1` limit of the prior.
pub fn grid_posterior_oracle(
    evidence_rate: f64,
    exposure: f64,
    deficit: f64,
    prior_rate: f64,
    resolution: usize,
) -> Result<OracleMoments, SimulationError> {
    RateCell::new(evidence_rate, exposure, deficit, prior_rate)?;
    if resolution < MIN_ORACLE_RESOLUTION {
        return Err(SimulationError::Resolution {
            got: resolution,
            min: MIN_ORACLE_RESOLUTION,
        });
    }

    let total = exposure * evidence_rate;
    let prior_shape = deficit * prior_rate;
    let prior_rate_param = deficit;

    let log_prior = |lam: f64, ln_lam: f64| -> f64 {
        if prior_shape > 0.0 {
            prior_shape * prior_rate_param.ln() - ln_gamma(prior_shape) + (prior_shape - 1.0) * ln_lam
                - prior_rate_param * lam
        } else {
            -ln_lam - prior_rate_param * lam
        }
    };
    let ln_total_fact = ln_gamma(total + 1.0);
    let log_lik = |lam: f64, ln_lam: f64| -> f64 {
        let mu = exposure * lam;
        let ln_mu = exposure.ln() + ln_lam;
        if total > 0.0 {
            total * ln_mu - mu - ln_total_fact
        } else {
            -mu
        }
    };

    // Integration range from the posterior's location and spread.
    let alpha = total + prior_shape;
    if alpha <= 0.0 {
        return Err(SimulationError::Degenerate);
    }
    let beta = exposure + deficit;
    let center = alpha / beta;
    // Twelve standard deviations leave too much tail mass for shapes near
    // zero; also reach the point where the kernel has decayed by ~e^-60.
    let upper = (center + 12.0 * alpha.sqrt() / beta).max((alpha + 60.0) / beta);
    let s_hi = upper.ln();
    let s_lo = center.ln() - 1.0 - 40.0 / alpha;

    let span = s_hi - s_lo;
    let h_cap = 0.01_f64.min(0.02 / alpha.sqrt());
    let points = resolution
        .max((span / h_cap).ceil() as usize + 1)
        .min(MAX_ORACLE_POINTS);
    let h = span / (points - 1) as f64;

    let mut log_w = Vec::with_capacity(points);
    let mut lams = Vec::with_capacity(points);
    for k in 0..points {
        let s = s_lo + k as f64 * h;
        let lam = s.exp();
        // dλ = λ ds
        log_w.push(log_prior(lam, s) + log_lik(lam, s) + s);
        lams.push(lam);
    }
    let peak = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_w
        .iter()
        .enumerate()
        .map(|(k, lw)| {
            let end = if k == 0 || k == points - 1 { 0.5 } else { 1.0 };
            end * (lw - peak).exp()
        })
        .collect();

    let mass: f64 = weights.iter().sum();
    let mean = weights.iter().zip(&lams).map(|(w, l)| w * l).sum::<f64>() / mass;
    let variance = weights
        .iter()
        .zip(&lams)
        .map(|(w, l)| w * (l - mean) * (l - mean))
        .sum::<f64>()
        / mass;
    Ok(OracleMoments { mean, variance })
}
