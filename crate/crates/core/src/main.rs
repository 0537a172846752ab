use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use aoristic::chronology::{expected_values, TimeGrid};
use aoristic::error::{Error, Result};
use aoristic::io::plot::emit_plot;
use aoristic::io::report::{emit_report, OutputFormat};
use aoristic::io::{load_contexts, load_finds};
use aoristic::pipeline::{
    aoristic_rows, aoristic_series, rank_contexts, run_analysis, simulated_rows, AnalysisConfig, GridSpec,
    DEFAULT_CREDIBLE_LEVEL,
};
use aoristic::priors::{FixedPrior, PriorStrategy};
use aoristic::simulation::{analyze_replicate, coverage_experiment, simulate_counts, SimulationSpec};

const SEED_ENV: &str = "AORISTIC_SEED";

#[derive(Parser)]
#[command(name = "aoristic", version, about = "Effort-normalized rates for date-ranged find counts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the aoristic expected-value series only.
    Aoristic(DataArgs),
    /// Run the full normalization pipeline.
    Normalize(DataArgs),
    /// Normalize, then rank contexts within each interval.
    Compare {
        #[command(flatten)]
        data: DataArgs,
        /// Also write the full result rows here.
        #[arg(long)]
        results_output: Option<PathBuf>,
    },
    /// Monte Carlo coverage experiment on synthetic counts.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorKind {
    Zero,
    RegionalMean,
    MaxExpected,
    Fixed,
}

#[derive(Args)]
struct GridFlags {
    #[arg(long, allow_negative_numbers = true)]
    grid_start: Option<i64>,
    #[arg(long, allow_negative_numbers = true)]
    grid_end: Option<i64>,
    #[arg(long)]
    interval_width: Option<i64>,
}

#[derive(Args)]
struct ConfigFlags {
    /// JSON configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    grid: GridFlags,
    #[arg(long, value_enum)]
    prior: Option<PriorKind>,
    /// Fixed prior rate: one value, or a comma-separated value per interval.
    #[arg(long)]
    fixed_prior: Option<String>,
    /// Credible level in (0, 1).
    #[arg(long)]
    level: Option<f64>,
    /// Effort baseline to equalize to (at least the largest effective duration).
    #[arg(long)]
    baseline: Option<f64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Write one SVG per context.
    #[arg(long)]
    plots: bool,
}

#[derive(Args)]
struct DataArgs {
    /// Finds CSV (`find_id,context_id,count,use_start,use_end`).
    #[arg(long)]
    finds: PathBuf,
    /// Contexts CSV (`context_id,duration,staffing`).
    #[arg(long)]
    contexts: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigFlags,
    /// Report destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Directory for SVG plots.
    #[arg(long, default_value = "plots")]
    plot_dir: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON simulation spec (`true_rates`, `exposures`, `prior_strategy`, `replicates`, `seed`).
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Comma-separated true rate per interval.
    #[arg(long)]
    rates: Option<String>,
    /// Comma-separated effective effort per context.
    #[arg(long)]
    exposures: Option<String>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Prior strategy; defaults to a fixed prior at the true rates.
    #[arg(long, value_enum)]
    prior: Option<PriorKind>,
    #[arg(long)]
    fixed_prior: Option<String>,
    #[arg(long, default_value_t = DEFAULT_CREDIBLE_LEVEL)]
    level: f64,
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    #[command(flatten)]
    grid: GridFlags,
    /// Coverage table destination; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write per-replicate result rows with the true rate here.
    #[arg(long)]
    rows: Option<PathBuf>,
    /// Number of leading replicates written to `--rows`.
    #[arg(long, default_value_t = 1)]
    emit_replicates: usize,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGrid {
    start_year: Option<i64>,
    end_year: Option<i64>,
    interval_width: Option<i64>,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    #[serde(default)]
    grid: PartialGrid,
    prior: Option<PriorStrategy>,
    credible_level: Option<f64>,
    baseline_override: Option<f64>,
    output_format: Option<OutputFormat>,
    emit_plots: Option<bool>,
}

fn parse_reals(flag: &str, raw: &str) -> Result<Vec<f64>> {
    raw.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("--{flag}: cannot parse `{}`: {e}", s.trim())))
        })
        .collect()
}

fn fixed_prior(raw: &str) -> Result<FixedPrior> {
    let vals = parse_reals("fixed-prior", raw)?;
    Ok(if vals.len() == 1 {
        FixedPrior::Constant(vals[0])
    } else {
        FixedPrior::PerInterval(vals)
    })
}

fn prior_from_flags(kind: Option<PriorKind>, fixed: Option<&str>) -> Result<Option<PriorStrategy>> {
    Ok(match (kind, fixed) {
        (Some(PriorKind::Fixed), None) => return Err(Error::Config("--prior fixed requires --fixed-prior".into())),
        (Some(PriorKind::Fixed) | None, Some(v)) => Some(PriorStrategy::Fixed { value: fixed_prior(v)? }),
        (Some(_), Some(_)) => {
            return Err(Error::Config("--fixed-prior only applies to --prior fixed".into()));
        }
        (Some(PriorKind::Zero), None) => Some(PriorStrategy::Zero),
        (Some(PriorKind::RegionalMean), None) => Some(PriorStrategy::RegionalMean),
        (Some(PriorKind::MaxExpected), None) => Some(PriorStrategy::MaxExpected),
        (None, None) => None,
    })
}

fn merge_grid(file: PartialGrid, flags: &GridFlags) -> Option<Result<GridSpec>> {
    let start = flags.grid_start.or(file.start_year);
    let end = flags.grid_end.or(file.end_year);
    let width = flags.interval_width.or(file.interval_width);
    match (start, end, width) {
        (None, None, None) => None,
        (Some(start_year), Some(end_year), Some(interval_width)) => Some(Ok(GridSpec {
            start_year,
            end_year,
            interval_width,
        })),
        _ => Some(Err(Error::Config(
            "grid needs all of --grid-start, --grid-end and --interval-width".into(),
        ))),
    }
}

fn resolve_config(flags: &ConfigFlags) -> Result<AnalysisConfig> {
    let file = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<PartialConfig>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => PartialConfig::default(),
    };
    let grid = merge_grid(file.grid, &flags.grid).unwrap_or_else(|| {
        Err(Error::Config(
            "no grid given: use --grid-start/--grid-end/--interval-width or a config file".into(),
        ))
    })?;
    let prior = prior_from_flags(flags.prior, flags.fixed_prior.as_deref())?
        .or(file.prior)
        .unwrap_or(PriorStrategy::RegionalMean);

    let mut config = AnalysisConfig::new(grid, prior);
    config.credible_level = flags.level.or(file.credible_level).unwrap_or(DEFAULT_CREDIBLE_LEVEL);
    config.baseline_override = flags.baseline.or(file.baseline_override);
    config.output_format = flags.format.or(file.output_format).unwrap_or_default();
    config.emit_plots = flags.plots || file.emit_plots.unwrap_or(false);
    config.validate()?;
    Ok(config)
}

fn require_contexts(path: Option<&Path>) -> Result<&Path> {
    path.ok_or_else(|| Error::Config("--contexts is required for this command".into()))
}

fn cmd_aoristic(args: &DataArgs) -> Result<()> {
    let config = resolve_config(&args.config)?;
    let grid = config.grid.build()?;
    let finds = load_finds(&args.finds)?;
    let series = match &args.contexts {
        Some(path) => aoristic_series(&grid, &finds, &load_contexts(path)?)?,
        None => expected_values(&finds, &grid)?,
    };
    emit_report(&aoristic_rows(&grid, &series), config.output_format, args.output.as_deref())
}

fn normalize(args: &DataArgs) -> Result<(AnalysisConfig, Vec<aoristic::io::report::ResultRow>)> {
    let config = resolve_config(&args.config)?;
    let finds = load_finds(&args.finds)?;
    let contexts = load_contexts(require_contexts(args.contexts.as_deref())?)?;
    let rows = run_analysis(&config, &finds, &contexts)?;
    if config.emit_plots && !rows.is_empty() {
        emit_plot(&rows, &args.plot_dir)?;
    }
    Ok((config, rows))
}

fn cmd_normalize(args: &DataArgs) -> Result<()> {
    let (config, rows) = normalize(args)?;
    emit_report(&rows, config.output_format, args.output.as_deref())
}

fn cmd_compare(args: &DataArgs, results_output: Option<&Path>) -> Result<()> {
    let (config, rows) = normalize(args)?;
    if let Some(path) = results_output {
        emit_report(&rows, config.output_format, Some(path))?;
    }
    emit_report(&rank_contexts(&rows), config.output_format, args.output.as_deref())
}

fn simulation_spec(args: &SimulateArgs) -> Result<SimulationSpec> {
    let mut spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str::<SimulationSpec>(&text)
                .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        }
        None => {
            let rates = args
                .rates
                .as_deref()
                .ok_or_else(|| Error::Config("--rates is required without --spec".into()))?;
            let exposures = args
                .exposures
                .as_deref()
                .ok_or_else(|| Error::Config("--exposures is required without --spec".into()))?;
            let true_rates = parse_reals("rates", rates)?;
            SimulationSpec {
                prior_strategy: PriorStrategy::Fixed {
                    value: FixedPrior::PerInterval(true_rates.clone()),
                },
                true_rates,
                exposures: parse_reals("exposures", exposures)?,
                replicates: 1000,
                seed: 0,
            }
        }
    };
    if let Some(r) = args.replicates {
        spec.replicates = r;
    }
    if let Some(s) = args.seed {
        spec.seed = s;
    }
    if let Ok(raw) = std::env::var(SEED_ENV) {
        spec.seed = raw
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("{SEED_ENV}: cannot parse `{raw}`: {e}")))?;
    }
    if let Some(p) = prior_from_flags(args.prior, args.fixed_prior.as_deref())? {
        spec.prior_strategy = p;
    }
    spec.validate()?;
    Ok(spec)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let spec = simulation_spec(args)?;
    let grid = match merge_grid(PartialGrid::default(), &args.grid) {
        Some(g) => {
            let grid: TimeGrid = g?.build()?;
            if grid.interval_count() != spec.intervals() {
                return Err(Error::Config(format!(
                    "grid has {} intervals but {} true rates were given",
                    grid.interval_count(),
                    spec.intervals()
                )));
            }
            Some(grid)
        }
        None => None,
    };
    let label = |j: usize| grid.map_or_else(|| format!("j{j}"), |g| g.label(j));

    let report = coverage_experiment(&spec, args.level)?;
    if let Some(path) = &args.rows {
        let counts = simulate_counts(&SimulationSpec {
            replicates: args.emit_replicates.clamp(1, spec.replicates),
            ..spec.clone()
        })?;
        let ids = spec.context_ids();
        let mut rows = Vec::new();
        for (r, c) in counts.counts.iter().enumerate() {
            let cells = analyze_replicate(&spec, c, args.level)?;
            rows.extend(simulated_rows(r, &ids, &spec.true_rates, &cells, label));
        }
        emit_report(&rows, args.format, Some(path))?;
    }
    emit_report(&report.cells, args.format, args.output.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Aoristic(args) => cmd_aoristic(args),
        Command::Normalize(args) => cmd_normalize(args),
        Command::Compare { data, results_output } => cmd_compare(data, results_output.as_deref()),
        Command::Simulate(args) => cmd_simulate(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
