//! Time grid construction and aoristic weighting of date-ranged finds.
//!
//! Years live on a continuous signed axis supplied by the caller. A find dated
//! `use_start..=use_end` occupies the half-open year span
//! `[use_start, use_end + 1)`, and each grid interval `j` covers
//! `[start_year + j * width, start_year + (j + 1) * width)`. A find's weight on
//! an interval is the share of its years falling inside it; when the date
//! range aligns with whole intervals this is `1 / (intervals covered)`.
//!
//! Mass falling outside the grid is reported as `clipped` and never folded
//! back into the in-grid weights.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Identifier of a single find record.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FindId(pub String);

/// Identifier of a collection context (site, trench, stratigraphic unit).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ContextId(pub String);

impl fmt::Display for FindId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FindId {
    fn from(s: &str) -> Self {
        FindId(s.to_owned())
    }
}

impl From<&str> for ContextId {
    fn from(s: &str) -> Self {
        ContextId(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChronologyError {
    #[error("interval width must be at least 1 year, got {0}")]
    InvalidWidth(i64),

    #[error("grid end {end} must be after grid start {start}")]
    EmptySpan { start: i64, end: i64 },

    #[error("grid span {span} is not divisible by interval width {width} (remainder {remainder})")]
    IndivisibleSpan { span: i64, width: i64, remainder: i64 },

    #[error("find {find}: count must be a finite non-negative number, got {count}")]
    InvalidCount { find: FindId, count: f64 },

    #[error("find {find}: use start {start} is after use end {end}")]
    InvertedRange { find: FindId, start: i64, end: i64 },

    #[error("find {find}: date range {start}..{end} lies entirely outside the grid {grid_start}..{grid_end}")]
    OutsideGrid {
        find: FindId,
        start: i64,
        end: i64,
        grid_start: i64,
        grid_end: i64,
    },
}

/// Contiguous equal-width half-open year intervals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    start_year: i64,
    interval_width: i64,
    interval_count: usize,
}

impl TimeGrid {
    /// Builds a grid over `[start_year, end_year)` cut into intervals of
    /// `interval_width` years. The span must divide evenly.
    pub fn new(start_year: i64, end_year: i64, interval_width: i64) -> Result<Self, ChronologyError> {
        if interval_width < 1 {
            return Err(ChronologyError::InvalidWidth(interval_width));
        }
        if end_year <= start_year {
            return Err(ChronologyError::EmptySpan {
                start: start_year,
                end: end_year,
            });
        }
        let span = end_year - start_year;
        let remainder = span % interval_width;
        if remainder != 0 {
            return Err(ChronologyError::IndivisibleSpan {
                span,
                width: interval_width,
                remainder,
            });
        }
        Ok(TimeGrid {
            start_year,
            interval_width,
            interval_count: (span / interval_width) as usize,
        })
    }

    pub fn start_year(&self) -> i64 {
        self.start_year
    }

    /// Exclusive upper bound of the last interval.
    pub fn end_year(&self) -> i64 {
        self.start_year + self.span()
    }

    pub fn interval_width(&self) -> i64 {
        self.interval_width
    }

    pub fn interval_count(&self) -> usize {
        self.interval_count
    }

    pub fn span(&self) -> i64 {
        self.interval_width * self.interval_count as i64
    }

    /// Half-open year bounds `[lo, hi)` of interval `j`.
    pub fn bounds(&self, j: usize) -> (i64, i64) {
        let lo = self.start_year + j as i64 * self.interval_width;
        (lo, lo + self.interval_width)
    }

    /// Inclusive year-span label, e.g. `"1..25"` for `[1, 26)`.
    pub fn label(&self, j: usize) -> String {
        let (lo, hi) = self.bounds(j);
        format!("{}..{}", lo, hi - 1)
    }

    /// The same span at half the interval width, if the width is even.
    pub fn halved(&self) -> Option<TimeGrid> {
        if self.interval_width % 2 != 0 {
            return None;
        }
        TimeGrid::new(self.start_year, self.end_year(), self.interval_width / 2).ok()
    }
}

/// Convenience wrapper matching the CLI's `(start, end, width)` triple.
pub fn build_grid(start_year: i64, end_year: i64, interval_width: i64) -> Result<TimeGrid, ChronologyError> {
    TimeGrid::new(start_year, end_year, interval_width)
}

/// One dated find class: `count` items in use somewhere in `use_start..=use_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FindRecord {
    pub find_id: FindId,
    pub context_id: ContextId,
    pub count: f64,
    pub use_start: i64,
    pub use_end: i64,
}

impl FindRecord {
    pub fn new(
        find_id: impl Into<FindId>,
        context_id: impl Into<ContextId>,
        count: f64,
        use_start: i64,
        use_end: i64,
    ) -> Result<Self, ChronologyError> {
        let rec = FindRecord {
            find_id: find_id.into(),
            context_id: context_id.into(),
            count,
            use_start,
            use_end,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), ChronologyError> {
        if !self.count.is_finite() || self.count < 0.0 {
            return Err(ChronologyError::InvalidCount {
                find: self.find_id.clone(),
                count: self.count,
            });
        }
        if self.use_start > self.use_end {
            return Err(ChronologyError::InvertedRange {
                find: self.find_id.clone(),
                start: self.use_start,
                end: self.use_end,
            });
        }
        Ok(())
    }

    /// Number of calendar years in the inclusive use range.
    pub fn use_years(&self) -> i64 {
        self.use_end - self.use_start + 1
    }
}

impl From<String> for FindId {
    fn from(s: String) -> Self {
        FindId(s)
    }
}

impl From<String> for ContextId {
    fn from(s: String) -> Self {
        ContextId(s)
    }
}

/// Per-interval probability that a find was in use.
#[derive(Debug, Clone, PartialEq)]
pub struct AoristicWeights {
    pub find_id: FindId,
    pub weights: Vec<f64>,
    /// Share of the find's date range falling outside the grid.
    pub clipped: f64,
}

impl AoristicWeights {
    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }
}

pub fn aoristic_weights(find: &FindRecord, grid: &TimeGrid) -> Result<AoristicWeights, ChronologyError> {
    find.validate()?;
    let lo = find.use_start;
    let hi = find.use_end + 1;
    if hi <= grid.start_year() || lo >= grid.end_year() {
        return Err(ChronologyError::OutsideGrid {
            find: find.find_id.clone(),
            start: find.use_start,
            end: find.use_end,
            grid_start: grid.start_year(),
            grid_end: grid.end_year(),
        });
    }

    let years = find.use_years() as f64;
    let mut weights = vec![0.0; grid.interval_count()];
    let mut inside = 0i64;
    for (j, w) in weights.iter_mut().enumerate() {
        let (a, b) = grid.bounds(j);
        let overlap = hi.min(b) - lo.max(a);
        if overlap > 0 {
            inside += overlap;
            *w = overlap as f64 / years;
        }
    }
    let outside = find.use_years() - inside;
    Ok(AoristicWeights {
        find_id: find.find_id.clone(),
        weights,
        clipped: outside as f64 / years,
    })
}

/// Aoristic expected values `E[X]_j` for one context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoristicSeries {
    pub context_id: ContextId,
    pub expected: Vec<f64>,
    /// Count mass that fell outside the grid, summed over contributing finds.
    pub clipped_mass: f64,
}

impl AoristicSeries {
    pub fn zeros(context_id: ContextId, intervals: usize) -> Self {
        AoristicSeries {
            context_id,
            expected: vec![0.0; intervals],
            clipped_mass: 0.0,
        }
    }

    pub fn total(&self) -> f64 {
        self.expected.iter().sum()
    }
}

/// Sums `count * weight` per interval, one series per context seen in `finds`.
///
/// Finds are accumulated in `(context_id, find_id, input position)` order so
/// the result does not depend on how the input was shuffled.
pub fn expected_values(
    finds: &[FindRecord],
    grid: &TimeGrid,
) -> Result<BTreeMap<ContextId, AoristicSeries>, ChronologyError> {
    expected_values_for(finds, grid, std::iter::empty())
}

/// Like [`expected_values`], but also emits zero series for every declared
/// context that has no finds.
pub fn expected_values_for<'a>(
    finds: &[FindRecord],
    grid: &TimeGrid,
    declared: impl IntoIterator<Item = &'a ContextId>,
) -> Result<BTreeMap<ContextId, AoristicSeries>, ChronologyError> {
    let mut out: BTreeMap<ContextId, AoristicSeries> = declared
        .into_iter()
        .map(|c| (c.clone(), AoristicSeries::zeros(c.clone(), grid.interval_count())))
        .collect();

    let mut order: Vec<&FindRecord> = finds.iter().collect();
    order.sort_by(|a, b| {
        (&a.context_id, &a.find_id, a.use_start, a.use_end)
            .cmp(&(&b.context_id, &b.find_id, b.use_start, b.use_end))
            .then(a.count.total_cmp(&b.count))
    });

    for find in order {
        let w = aoristic_weights(find, grid)?;
        let series = out
            .entry(find.context_id.clone())
            .or_insert_with(|| AoristicSeries::zeros(find.context_id.clone(), grid.interval_count()));
        for (e, p) in series.expected.iter_mut().zip(&w.weights) {
            *e += find.count * p;
        }
        series.clipped_mass += find.count * w.clipped;
    }
    Ok(out)
}
