//! End-to-end analysis: aoristic series, deficits, prior elicitation and the
//! conjugate update for every (context, interval) cell.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::chronology::{expected_values_for, AoristicSeries, ContextId, FindRecord, TimeGrid};
use crate::error::{Error, Result};
use crate::inference::{credible_interval, posterior, RateCell};
use crate::intensity::{compute_deficits_with_baseline, ContextRecord};
use crate::io::report::{AoristicRow, OutputFormat, RankingRow, ResultRow, SimulatedRow};
use crate::priors::{elicit, PriorStrategy};
use crate::simulation::SimulatedCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub start_year: i64,
    pub end_year: i64,
    pub interval_width: i64,
}

impl GridSpec {
    pub fn build(&self) -> Result<TimeGrid> {
        Ok(TimeGrid::new(self.start_year, self.end_year, self.interval_width)?)
    }
}

pub const DEFAULT_CREDIBLE_LEVEL: f64 = 0.95;

fn default_level() -> f64 {
    DEFAULT_CREDIBLE_LEVEL
}

fn default_prior() -> PriorStrategy {
    PriorStrategy::RegionalMean
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub grid: GridSpec,
    #[serde(default = "default_prior")]
    pub prior: PriorStrategy,
    #[serde(default = "default_level")]
    pub credible_level: f64,
    #[serde(default)]
    pub baseline_override: Option<f64>,
    #[serde(default)]
    pub output_format: OutputFormat,
    #[serde(default)]
    pub emit_plots: bool,
}

impl AnalysisConfig {
    pub fn new(grid: GridSpec, prior: PriorStrategy) -> Self {
        AnalysisConfig {
            grid,
            prior,
            credible_level: DEFAULT_CREDIBLE_LEVEL,
            baseline_override: None,
            output_format: OutputFormat::Csv,
            emit_plots: false,
        }
    }

    pub fn validate(&self) -> Result<TimeGrid> {
        let grid = self.grid.build()?;
        if !(self.credible_level > 0.0 && self.credible_level < 1.0) {
            return Err(Error::Config(format!(
                "credible_level must lie in (0, 1), got {}",
                self.credible_level
            )));
        }
        if let Some(b) = self.baseline_override {
            if !(b.is_finite() && b > 0.0) {
                return Err(Error::Config(format!("baseline_override must be > 0, got {b}")));
            }
        }
        self.prior.validate()?;
        Ok(grid)
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

fn check_references(finds: &[FindRecord], contexts: &[ContextRecord]) -> Result<()> {
    let known: BTreeSet<&ContextId> = contexts.iter().map(|c| &c.context_id).collect();
    let dangling: BTreeSet<&ContextId> = finds
        .iter()
        .map(|f| &f.context_id)
        .filter(|id| !known.contains(id))
        .collect();
    if dangling.is_empty() {
        Ok(())
    } else {
        Err(Error::DanglingContexts(dangling.into_iter().cloned().collect()))
    }
}

/// Aoristic series for every declared context.
pub fn aoristic_series(
    grid: &TimeGrid,
    finds: &[FindRecord],
    contexts: &[ContextRecord],
) -> Result<BTreeMap<ContextId, AoristicSeries>> {
    check_references(finds, contexts)?;
    Ok(expected_values_for(finds, grid, contexts.iter().map(|c| &c.context_id))?)
}

pub fn aoristic_rows(grid: &TimeGrid, series: &BTreeMap<ContextId, AoristicSeries>) -> Vec<AoristicRow> {
    series
        .values()
        .flat_map(|s| {
            s.expected.iter().enumerate().map(move |(j, &e)| AoristicRow {
                context_id: s.context_id.clone(),
                interval_index: j,
                interval_label: grid.label(j),
                evidence_rate: e,
                clipped_mass: s.clipped_mass,
            })
        })
        .collect()
}

/// Full normalization, rows ordered by `(context_id, interval_index)`.
pub fn run_analysis(config: &AnalysisConfig, finds: &[FindRecord], contexts: &[ContextRecord]) -> Result<Vec<ResultRow>> {
    let grid = config.validate()?;
    let series = aoristic_series(&grid, finds, contexts)?;
    let profile = compute_deficits_with_baseline(contexts, config.baseline_override)?;
    let all: Vec<AoristicSeries> = series.values().cloned().collect();
    let priors = elicit(&config.prior, &all, grid.interval_count())?;

    let mut rows = Vec::with_capacity(series.len() * grid.interval_count());
    for (id, s) in &series {
        let intensity = profile.get(id).expect("deficits cover every declared context");
        for (j, (&e, &y)) in s.expected.iter().zip(&priors).enumerate() {
            let cell = RateCell::new(e, intensity.effective_duration, intensity.deficit, y)?;
            let post = posterior(&cell)?;
            let ci = credible_interval(&post, config.credible_level)?;
            rows.push(ResultRow {
                context_id: id.clone(),
                interval_index: j,
                interval_label: grid.label(j),
                evidence_rate: e,
                exposure: cell.exposure,
                deficit: cell.deficit,
                prior: y,
                posterior_shape: post.shape(),
                posterior_rate: post.rate(),
                posterior_mean: post.mean(),
                ci_low: ci.low,
                ci_high: ci.high,
                degenerate_flag: ci.degenerate,
            });
        }
    }
    Ok(rows)
}

/// Per-interval ranking of contexts by posterior mean, highest first; ties
/// fall back to context id.
pub fn rank_contexts(rows: &[ResultRow]) -> Vec<RankingRow> {
    let mut by_interval: BTreeMap<usize, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        by_interval.entry(r.interval_index).or_default().push(r);
    }
    let mut out = Vec::with_capacity(rows.len());
    for (j, mut group) in by_interval {
        group.sort_by(|a, b| {
            b.posterior_mean
                .total_cmp(&a.posterior_mean)
                .then_with(|| a.context_id.cmp(&b.context_id))
        });
        for (k, r) in group.into_iter().enumerate() {
            out.push(RankingRow {
                interval_index: j,
                interval_label: r.interval_label.clone(),
                rank: k + 1,
                context_id: r.context_id.clone(),
                posterior_mean: r.posterior_mean,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
            });
        }
    }
    out
}

/// Report rows for one simulated replicate, labelled with `label(j)`.
pub fn simulated_rows(
    replicate: usize,
    ids: &[ContextId],
    true_rates: &[f64],
    cells: &[SimulatedCell],
    label: impl Fn(usize) -> String,
) -> Vec<SimulatedRow> {
    cells
        .iter()
        .map(|c| SimulatedRow {
            replicate,
            row: ResultRow {
                context_id: ids[c.context].clone(),
                interval_index: c.interval,
                interval_label: label(c.interval),
                evidence_rate: c.cell.evidence_rate,
                exposure: c.cell.exposure,
                deficit: c.cell.deficit,
                prior: c.cell.prior_rate,
                posterior_shape: c.posterior.shape(),
                posterior_rate: c.posterior.rate(),
                posterior_mean: c.posterior.mean(),
                ci_low: c.interval_estimate.low,
                ci_high: c.interval_estimate.high,
                degenerate_flag: c.interval_estimate.degenerate,
            },
            true_rate: true_rates[c.interval],
        })
        .collect()
}
