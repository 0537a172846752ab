//! Collection contexts, effective fieldwork durations and intensity deficits.
//!
//! A context's effective duration is `duration * staffing`. Its deficit is the
//! gap between the comparison baseline (by default the largest effective
//! duration in the set) and its own effective duration.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chronology::ContextId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntensityError {
    #[error("context {context}: duration must be finite and > 0, got {value}")]
    InvalidDuration { context: ContextId, value: f64 },

    #[error("context {context}: staffing must be finite and > 0, got {value}")]
    InvalidStaffing { context: ContextId, value: f64 },

    #[error("at least one context is required")]
    NoContexts,

    #[error("duplicate context id {0}")]
    DuplicateContext(ContextId),

    #[error("baseline {baseline} is below the largest effective duration {max}")]
    BaselineBelowMax { baseline: f64, max: f64 },
}

/// A collection context with its fieldwork effort.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextRecord {
    pub context_id: ContextId,
    pub duration: f64,
    #[serde(default = "default_staffing")]
    pub staffing: f64,
}

fn default_staffing() -> f64 {
    1.0
}

impl ContextRecord {
    pub fn new(context_id: impl Into<ContextId>, duration: f64, staffing: f64) -> Result<Self, IntensityError> {
        let rec = ContextRecord {
            context_id: context_id.into(),
            duration,
            staffing,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<(), IntensityError> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(IntensityError::InvalidDuration {
                context: self.context_id.clone(),
                value: self.duration,
            });
        }
        if !(self.staffing.is_finite() && self.staffing > 0.0) {
            return Err(IntensityError::InvalidStaffing {
                context: self.context_id.clone(),
                value: self.staffing,
            });
        }
        Ok(())
    }

    /// Person-time: duration scaled by the staffing factor.
    pub fn effective_duration(&self) -> f64 {
        self.duration * self.staffing
    }
}

pub fn effective_duration(context: &ContextRecord) -> f64 {
    context.effective_duration()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intensity {
    pub effective_duration: f64,
    pub deficit: f64,
}

/// Effective durations and deficits keyed by context.
#[derive(Debug, Clone, PartialEq)]
pub struct IntensityProfile {
    baseline: f64,
    entries: BTreeMap<ContextId, Intensity>,
}

impl IntensityProfile {
    /// The effort level every context is being equalized to.
    pub fn baseline(&self) -> f64 {
        self.baseline
    }

    pub fn get(&self, id: &ContextId) -> Option<&Intensity> {
        self.entries.get(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&ContextId, &Intensity)> {
        self.entries.iter()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Deficits against the largest effective duration in `contexts`.
pub fn compute_deficits(contexts: &[ContextRecord]) -> Result<IntensityProfile, IntensityError> {
    compute_deficits_with_baseline(contexts, None)
}

/// Deficits against `baseline` when supplied; it must be at least the
/// largest effective duration in the set.
pub fn compute_deficits_with_baseline(
    contexts: &[ContextRecord],
    baseline: Option<f64>,
) -> Result<IntensityProfile, IntensityError> {
    if contexts.is_empty() {
        return Err(IntensityError::NoContexts);
    }
    let mut seen = BTreeSet::new();
    for c in contexts {
        c.validate()?;
        if !seen.insert(&c.context_id) {
            return Err(IntensityError::DuplicateContext(c.context_id.clone()));
        }
    }

    let max = contexts
        .iter()
        .map(ContextRecord::effective_duration)
        .fold(f64::NEG_INFINITY, f64::max);
    let baseline = match baseline {
        Some(b) if !b.is_finite() || b < max => {
            return Err(IntensityError::BaselineBelowMax { baseline: b, max });
        }
        Some(b) => b,
        None => max,
    };

    let entries = contexts
        .iter()
        .map(|c| {
            let eff = c.effective_duration();
            (
                c.context_id.clone(),
                Intensity {
                    effective_duration: eff,
                    deficit: baseline - eff,
                },
            )
        })
        .collect();
    Ok(IntensityProfile { baseline, entries })
}
