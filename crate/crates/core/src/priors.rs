//! Prior rate elicitation per interval.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chronology::{AoristicSeries, ContextId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PriorError {
    #[error("strategy {0} needs at least one context series")]
    NoSeries(&'static str),

    #[error("series for contexts {contexts:?} do not share a {expected}-interval grid")]
    GridMismatch { expected: usize, contexts: Vec<ContextId> },

    #[error("fixed prior values must be finite and >= 0, got {0}")]
    InvalidFixed(f64),

    #[error("fixed prior has {got} values but the grid has {expected} intervals")]
    FixedLength { got: usize, expected: usize },
}

/// Externally supplied prior rates: one constant or one value per interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FixedPrior {
    Constant(f64),
    PerInterval(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PriorStrategy {
    Zero,
    RegionalMean,
    MaxExpected,
    Fixed { value: FixedPrior },
}

impl PriorStrategy {
    pub fn name(&self) -> &'static str {
        match self {
            PriorStrategy::Zero => "zero",
            PriorStrategy::RegionalMean => "regional-mean",
            PriorStrategy::MaxExpected => "max-expected",
            PriorStrategy::Fixed { .. } => "fixed",
        }
    }

    pub fn validate(&self) -> Result<(), PriorError> {
        if let PriorStrategy::Fixed { value } = self {
            let vals: &[f64] = match value {
                FixedPrior::Constant(v) => std::slice::from_ref(v),
                FixedPrior::PerInterval(v) => v,
            };
            if let Some(&bad) = vals.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
                return Err(PriorError::InvalidFixed(bad));
            }
        }
        Ok(())
    }
}

/// Per-interval prior rates `y_j` for a grid of `intervals` intervals.
///
/// Data-driven strategies pool every series passed in, including the one
/// later being normalized.
pub fn elicit(strategy: &PriorStrategy, series: &[AoristicSeries], intervals: usize) -> Result<Vec<f64>, PriorError> {
    strategy.validate()?;
    let mismatched: Vec<ContextId> = series
        .iter()
        .filter(|s| s.expected.len() != intervals)
        .map(|s| s.context_id.clone())
        .collect();
    if !mismatched.is_empty() {
        return Err(PriorError::GridMismatch {
            expected: intervals,
            contexts: mismatched,
        });
    }

    match strategy {
        PriorStrategy::Zero => Ok(vec![0.0; intervals]),
        PriorStrategy::Fixed { value: FixedPrior::Constant(v) } => Ok(vec![*v; intervals]),
        PriorStrategy::Fixed { value: FixedPrior::PerInterval(v) } => {
            if v.len() != intervals {
                return Err(PriorError::FixedLength {
                    got: v.len(),
                    expected: intervals,
                });
            }
            Ok(v.clone())
        }
        PriorStrategy::RegionalMean => {
            if series.is_empty() {
                return Err(PriorError::NoSeries(strategy.name()));
            }
            let n = series.len() as f64;
            Ok((0..intervals)
                .map(|j| {
                    let col = sorted_column(series, j);
                    let max = col[col.len() - 1];
                    (col.iter().sum::<f64>() / n).min(max)
                })
                .collect())
        }
        PriorStrategy::MaxExpected => {
            if series.is_empty() {
                return Err(PriorError::NoSeries(strategy.name()));
            }
            Ok((0..intervals)
                .map(|j| series.iter().map(|s| s.expected[j]).fold(f64::NEG_INFINITY, f64::max))
                .collect())
        }
    }
}

// Summing in sorted order makes the mean independent of context order.
fn sorted_column(series: &[AoristicSeries], j: usize) -> Vec<f64> {
    let mut col: Vec<f64> = series.iter().map(|s| s.expected[j]).collect();
    col.sort_by(f64::total_cmp);
    col
}
