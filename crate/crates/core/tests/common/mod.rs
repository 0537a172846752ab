#![allow(dead_code)]

use aoristic::chronology::{FindRecord, TimeGrid};
use aoristic::inference::RateCell;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.0.next_u64() % (hi - lo + 1) as u64) as i64
    }

    /// Log-uniform on `[lo, hi]`.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        (lo.ln() + (hi.ln() - lo.ln()) * self.unit()).exp()
    }
}

/// Random cell with `E ∈ [0,20]`, `t ∈ [0.5,50]`, `τ ∈ [0,50]`, `y ∈ [0,20]`.
/// A few draws land exactly on zero evidence or zero deficit.
pub fn random_cell(rng: &mut Rng) -> RateCell {
    let e = if rng.unit() < 0.05 { 0.0 } else { rng.uniform(0.0, 20.0) };
    let t = rng.uniform(0.5, 50.0);
    let tau = if rng.unit() < 0.05 { 0.0 } else { rng.uniform(0.0, 50.0) };
    let y = rng.uniform(0.0, 20.0);
    RateCell::new(e, t, tau, y).unwrap()
}

/// Cells whose posterior is a proper Gamma.
pub fn random_proper_cells(seed: u64, n: usize) -> Vec<RateCell> {
    let mut rng = Rng::new(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let c = random_cell(&mut rng);
        if c.exposure * c.evidence_rate + c.deficit * c.prior_rate > 0.0 {
            out.push(c);
        }
    }
    out
}

pub const CORPUS_CONTEXTS: usize = 7;

/// A corpus of `n` finds overlapping the grid, some straddling its edges,
/// with fractional counts.
pub fn random_corpus(seed: u64, n: usize, grid: &TimeGrid) -> Vec<FindRecord> {
    let mut rng = Rng::new(seed);
    let (lo, hi) = (grid.start_year(), grid.end_year());
    let margin = grid.span() / 10;
    (0..n)
        .map(|i| {
            let start = rng.int(lo - margin, hi - 1);
            let end = (start + rng.int(0, grid.span() / 3)).max(lo);
            let count = if rng.unit() < 0.5 {
                rng.int(1, 20) as f64
            } else {
                rng.uniform(0.0, 12.0)
            };
            let ctx = format!("K{}", rng.int(0, CORPUS_CONTEXTS as i64 - 1));
            FindRecord::new(format!("F{i:04}"), ctx, count, start, end).unwrap()
        })
        .collect()
}
