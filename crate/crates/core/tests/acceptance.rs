//! Exit criteria for the crate, run in sequence with one PASS/FAIL line each.
//!
//! `cargo test --test acceptance -- --nocapture` shows the report.

mod common;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use aoristic::chronology::{aoristic_weights, expected_values, FindRecord, TimeGrid};
use aoristic::inference::special::normal_quantile;
use aoristic::inference::{gamma_cdf, gamma_quantile, posterior, RateCell};
use aoristic::priors::{FixedPrior, PriorStrategy};
use aoristic::simulation::{coverage_experiment, grid_posterior_oracle, SimulationSpec, MIN_ORACLE_RESOLUTION};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Outcome {
            passed,
            detail: detail.into(),
        }
    }
}

struct Criterion {
    id: u8,
    name: &'static str,
    limit: Duration,
    run: fn() -> Outcome,
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn worked_example() -> Outcome {
    let grid = TimeGrid::new(1, 101, 25).unwrap();
    let find = FindRecord::new("F1", "C1", 1.0, 1, 100).unwrap();
    let w = aoristic_weights(&find, &grid).unwrap();
    let ok = w.weights == [0.25; 4] && w.clipped == 0.0;
    Outcome::new(ok, format!("weights {:?}, clipped {}", w.weights, w.clipped))
}

fn conjugacy_vs_oracle() -> Outcome {
    let cells = common::random_proper_cells(0xC0_17_06, 1000);
    let (mut worst_mean, mut worst_var) = (0.0f64, 0.0f64);
    for c in &cells {
        let p = posterior(c).unwrap();
        let o = grid_posterior_oracle(c.evidence_rate, c.exposure, c.deficit, c.prior_rate, MIN_ORACLE_RESOLUTION)
            .unwrap();
        worst_mean = worst_mean.max(rel(p.mean(), o.mean));
        worst_var = worst_var.max(rel(p.variance(), o.variance));
    }
    Outcome::new(
        worst_mean <= 1e-6 && worst_var <= 1e-6,
        format!(
            "{} cells, worst relative error mean {worst_mean:.2e}, variance {worst_var:.2e} (limit 1e-6)",
            cells.len()
        ),
    )
}

fn convergence_and_monotonicity() -> Outcome {
    let mut rng = common::Rng::new(0x07A0);
    let mut taus = vec![0.0];
    taus.extend((0..49).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 48.0)));
    let mut failures = Vec::new();
    for i in 0..100 {
        let e = rng.uniform(0.0, 20.0);
        let t = rng.uniform(0.5, 50.0);
        let y = rng.uniform(0.0, 20.0);
        let means: Vec<f64> = taus
            .iter()
            .map(|&tau| posterior(&RateCell::new(e, t, tau, y).unwrap()).unwrap().mean())
            .collect();
        if (means[0] - e).abs() > f64::EPSILON * e {
            failures.push(format!("triple {i}: mean at zero deficit {} != E {e}", means[0]));
        }
        let toward_y = means.windows(2).all(|w| if y >= e { w[0] <= w[1] } else { w[0] >= w[1] });
        if !toward_y {
            failures.push(format!("triple {i}: not monotone toward y"));
        }
        for (&tau, &m) in taus.iter().zip(&means) {
            let slack = 4.0 * f64::EPSILON * (e.abs() + y.abs());
            if (m - e).abs() > tau * (y - e).abs() / t + slack {
                failures.push(format!("triple {i}: drift bound broken at deficit {tau}"));
                break;
            }
        }
    }
    Outcome::new(
        failures.is_empty(),
        if failures.is_empty() {
            format!("100 triples x {} deficits", taus.len())
        } else {
            failures.join("; ")
        },
    )
}

fn convex_bound() -> Outcome {
    let mut rng = common::Rng::new(0xB0_0D);
    let mut violations = 0;
    for _ in 0..10_000 {
        let c = common::random_cell(&mut rng);
        let m = posterior(&c).unwrap().mean();
        let (lo, hi) = (c.evidence_rate.min(c.prior_rate), c.evidence_rate.max(c.prior_rate));
        if !(lo <= m && m <= hi) {
            violations += 1;
        }
    }
    Outcome::new(violations == 0, format!("10000 cells, {violations} violations"))
}

fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect()
}

fn special_kernel() -> Outcome {
    let mut worst_exp = 0.0f64;
    for i in 0..=3000 {
        let x = i as f64 * 0.01;
        let exact = -(-x).exp_m1();
        worst_exp = worst_exp.max((gamma_cdf(1.0, 1.0, x).unwrap() - exact).abs());
    }
    let mut worst_trip = 0.0f64;
    for &k in &log_grid(1e-1, 1e5, 13) {
        for &r in &log_grid(1e-2, 1e2, 9) {
            for q in [0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99] {
                let x = gamma_quantile(k, r, q).unwrap();
                worst_trip = worst_trip.max((gamma_cdf(k, r, x).unwrap() - q).abs());
            }
        }
    }
    Outcome::new(
        worst_exp <= 1e-12 && worst_trip <= 1e-8,
        format!("shape-1 worst {worst_exp:.2e} (limit 1e-12), round-trip worst {worst_trip:.2e} (limit 1e-8)"),
    )
}

fn coverage() -> Outcome {
    let true_rates = vec![2.0, 5.0];
    let spec = SimulationSpec {
        prior_strategy: PriorStrategy::Fixed {
            value: FixedPrior::PerInterval(true_rates.clone()),
        },
        true_rates,
        exposures: vec![10.0, 6.0, 4.0],
        replicates: 10_000,
        seed: 20_240_601,
    };
    let level = 0.9;
    let report = coverage_experiment(&spec, level).unwrap();
    let z = normal_quantile(0.5 + level / 2.0);
    let mut passed = true;
    let mut cells = Vec::new();
    for c in &report.cells {
        let inside = (c.coverage - 0.90).abs() <= 0.03;
        passed &= inside;
        // Large-count coverage of a prior centred on the truth: P(|Z| < z * sqrt((t + tau) / t)).
        let a = z * ((c.exposure + c.deficit) / c.exposure).sqrt();
        let expected = gamma_cdf(0.5, 0.5, a * a).unwrap();
        cells.push(format!(
            "{}/j{} deficit {} coverage {:.4} (approx. expected {:.3}){}",
            c.context_id,
            c.interval_index,
            c.deficit,
            c.coverage,
            expected,
            if inside { "" } else { " OUTSIDE 0.90 +/- 0.03" }
        ));
    }
    Outcome::new(passed, cells.join("; "))
}

fn mass_and_refinement() -> Outcome {
    let coarse = TimeGrid::new(-500, 1500, 50).unwrap();
    let fine = coarse.halved().unwrap();
    let finds = common::random_corpus(0x500, 500, &coarse);
    let a = expected_values(&finds, &coarse).unwrap();
    let b = expected_values(&finds, &fine).unwrap();

    let placed: f64 = a.values().map(|s| s.total() + s.clipped_mass).sum();
    let counted: f64 = finds.iter().map(|f| f.count).sum();
    let mass_err = rel(placed, counted);

    let mut refine_err = 0.0f64;
    for (id, s) in &a {
        for (j, &e) in s.expected.iter().enumerate() {
            let back = b[id].expected[2 * j] + b[id].expected[2 * j + 1];
            refine_err = refine_err.max((e - back).abs() / e.abs().max(1.0));
        }
    }
    Outcome::new(
        mass_err <= 1e-9 && refine_err <= 1e-9,
        format!("mass error {mass_err:.2e}, refinement error {refine_err:.2e} (limit 1e-9)"),
    )
}

fn golden_files() -> Outcome {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let data = root.join("data");
    let golden = root.join("tests").join("golden");
    let out = tempfile::tempdir().unwrap();
    let run = |extra: &[&str]| {
        let status = Command::new(env!("CARGO_BIN_EXE_aoristic"))
            .arg("normalize")
            .arg("--finds")
            .arg(data.join("finds.csv"))
            .arg("--contexts")
            .arg(data.join("contexts.csv"))
            .arg("--config")
            .arg(data.join("config.json"))
            .args(extra)
            .status()
            .unwrap();
        status.success()
    };
    let csv = out.path().join("normalize.csv");
    let json = out.path().join("normalize.json");
    let plots = out.path().join("plots");
    let ran = run(&[
        "--output",
        csv.to_str().unwrap(),
        "--plots",
        "--plot-dir",
        plots.to_str().unwrap(),
    ]) && run(&["--format", "json", "--output", json.to_str().unwrap()]);
    if !ran {
        return Outcome::new(false, "normalize exited with an error");
    }
    let pairs = [
        ("normalize.csv", csv),
        ("normalize.json", json),
        ("SiteA.svg", plots.join("SiteA.svg")),
        ("SiteB.svg", plots.join("SiteB.svg")),
    ];
    let mismatched: Vec<&str> = pairs
        .iter()
        .filter(|(name, got)| fs::read(golden.join(name)).ok() != fs::read(got).ok())
        .map(|(name, _)| *name)
        .collect();
    Outcome::new(
        mismatched.is_empty(),
        if mismatched.is_empty() {
            "csv, json and 2 svg files identical".to_owned()
        } else {
            format!("differs: {}", mismatched.join(", "))
        },
    )
}

const CRITERIA: [Criterion; 8] = [
    Criterion {
        id: 1,
        name: "worked example, 1..100 on a quarter-century grid",
        limit: Duration::from_millis(1),
        run: worked_example,
    },
    Criterion {
        id: 2,
        name: "conjugate moments vs quadrature oracle",
        limit: Duration::from_secs(60),
        run: conjugacy_vs_oracle,
    },
    Criterion {
        id: 3,
        name: "zero-deficit convergence and monotone shrinkage",
        limit: Duration::from_secs(1),
        run: convergence_and_monotonicity,
    },
    Criterion {
        id: 4,
        name: "convex-combination bound",
        limit: Duration::from_secs(1),
        run: convex_bound,
    },
    Criterion {
        id: 5,
        name: "incomplete gamma kernel",
        limit: Duration::from_secs(5),
        run: special_kernel,
    },
    Criterion {
        id: 6,
        name: "Monte Carlo coverage of 90% intervals",
        limit: Duration::from_secs(120),
        run: coverage,
    },
    Criterion {
        id: 7,
        name: "mass conservation and grid refinement",
        limit: Duration::from_secs(1),
        run: mass_and_refinement,
    },
    Criterion {
        id: 8,
        name: "end-to-end golden files",
        limit: Duration::from_secs(1),
        run: golden_files,
    },
];

#[test]
fn acceptance_criteria() {
    let mut failed = Vec::new();
    for c in &CRITERIA {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_time = elapsed <= c.limit;
        let pass = outcome.passed && in_time;
        println!(
            "criterion {} {}: {} ({:.3?}, limit {:?}{}) {}",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            elapsed,
            c.limit,
            if in_time { "" } else { ", too slow" },
            outcome.detail
        );
        if !pass {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
