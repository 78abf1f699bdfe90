//! `lpgarch`: Monte Carlo experiments comparing local-projection impulse
//! response estimators under conditionally heteroskedastic errors.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use lp_garch::lp::estimate_all_horizons;
use lp_garch::mc::{diff_vs_truth, run_grid, summarize, ModelId};
use lp_garch::sim::simulate_series;
use lp_garch::{DgpParams64, OptimizerConfig};

use config::{FileConfig, Overrides};
use output::{
    digest_file, failure_counts, write_diff_table, write_manifest, write_se_table,
    write_summary_table, OutputPaths, RunManifest,
};

#[derive(Parser)]
#[command(name = "lpgarch", version, about = "Local-projection impulse responses with GARCH-family error models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the Monte Carlo experiment and write its tables.
    Run(RunArgs),
    /// Simulate one AR(1)-GARCH(1,1) series and dump it as CSV.
    Simulate(SimulateArgs),
    /// Fit one LP model on a CSV series and emit per-horizon coefficients.
    FitOne(FitOneArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (TOML); defaults reproduce the full-scale
    /// design when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the result tables.
    #[arg(long)]
    out_dir: PathBuf,
    /// Override the number of replications per cell.
    #[arg(long)]
    replications: Option<u32>,
    /// Override the worker-thread count (0 = one per core).
    #[arg(long)]
    workers: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated model list (lp, lp-garch, lp-garchx, lp-garch-har, truth).
    #[arg(long)]
    models: Option<String>,
    /// Override the maximum projection horizon.
    #[arg(long)]
    horizons: Option<usize>,
    /// Comma-separated sample lengths overriding the configured grid.
    #[arg(long = "T")]
    t_grid: Option<String>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Series length.
    #[arg(long, default_value_t = 500)]
    t_len: usize,
    /// Shock-stream seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    beta0: f64,
    #[arg(long, default_value_t = 0.95)]
    beta1: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.5)]
    alpha1: f64,
    #[arg(long, default_value_t = 0.4)]
    alpha2: f64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FitOneArgs {
    /// Input CSV; uses the `y` column when a header is present, otherwise
    /// the first column.
    #[arg(long)]
    input: PathBuf,
    /// Model to fit: lp, lp-garch, lp-garchx, or lp-garch-har.
    #[arg(long)]
    model: String,
    /// Maximum projection horizon.
    #[arg(long, default_value_t = 24)]
    horizons: usize,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::FitOne(args) => cmd_fit_one(args),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let started_at = chrono::Utc::now().to_rfc3339();

    let mut file_cfg = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    file_cfg.apply_overrides(&Overrides {
        replications: args.replications,
        workers: args.workers,
        master_seed: args.seed,
        models: args.models.clone(),
        horizons: args.horizons,
        t_grid: args.t_grid.clone(),
    })?;

    let mc_cfg = file_cfg.to_mc_config()?;
    // Validate the full design before touching the output directory so a
    // rejected configuration leaves no partial outputs behind.
    mc_cfg.validate().context("invalid experiment configuration")?;

    let n_cells = mc_cfg.cells().len();
    eprintln!(
        "running {} cells x {} replications ({} models, {} horizons)",
        n_cells,
        mc_cfg.replications,
        mc_cfg.models.len(),
        mc_cfg.horizons
    );

    let se = run_grid(&mc_cfg)?;
    let diff = diff_vs_truth(&se).context("differencing against the benchmark failed")?;
    let summary = summarize(&diff, mc_cfg.horizons).context("horizon averaging failed")?;

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("cannot create output directory {}", args.out_dir.display()))?;
    let paths = OutputPaths::new(&args.out_dir);
    write_se_table(&paths.se, &se)?;
    write_diff_table(&paths.diff, &diff)?;
    write_summary_table(&paths.summary, &summary)?;

    let outputs = vec![
        digest_file(&paths.se)?,
        digest_file(&paths.diff)?,
        digest_file(&paths.summary)?,
    ];
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: chrono::Utc::now().to_rfc3339(),
        config: file_cfg,
        failure_counts: failure_counts(&se),
        outputs,
    };
    write_manifest(&paths.manifest, &manifest)?;

    eprintln!("wrote {}", args.out_dir.display());
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<()> {
    let params = DgpParams64 {
        beta0: args.beta0,
        beta1: args.beta1,
        gamma: args.gamma,
        alpha1: args.alpha1,
        alpha2: args.alpha2,
        t_len: args.t_len,
    };
    let sample = simulate_series(&params, args.seed)?;

    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record(["t", "y", "sigma2"])?;
    for (i, (y, s2)) in sample.values.iter().zip(&sample.variances).enumerate() {
        w.write_record([(i + 1).to_string(), y.to_string(), s2.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_fit_one(args: FitOneArgs) -> Result<()> {
    let model_id = ModelId::from_str(&args.model)?;
    let Some(model) = model_id.lp_model() else {
        bail!("fit-one estimates the LP variants; the benchmark has no per-horizon fit");
    };
    let y = read_series(&args.input)?;
    let (fits, _) = estimate_all_horizons(&y, args.horizons, model, &OptimizerConfig::default())?;

    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut w = csv_writer(args.out.as_deref())?;
    w.write_record([
        "h", "c", "beta", "gamma", "alpha1", "alpha2", "alpha3", "alpha4", "alpha5", "loglik",
        "converged",
    ])?;
    for f in &fits {
        let spec = &f.fit.variance_spec;
        w.write_record([
            f.h.to_string(),
            f.fit.mean_coeffs.0.to_string(),
            f.fit.mean_coeffs.1.to_string(),
            spec.gamma().to_string(),
            opt(spec.alpha1()),
            opt(spec.alpha2()),
            opt(spec.alpha3()),
            opt(spec.alpha4()),
            opt(spec.alpha5()),
            f.fit.loglik.to_string(),
            f.fit.converged.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn csv_writer(path: Option<&Path>) -> Result<csv::Writer<Box<dyn std::io::Write>>> {
    let sink: Box<dyn std::io::Write> = match path {
        Some(p) => Box::new(
            std::fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Read a univariate series from CSV: the `y` column when a header row is
/// present, otherwise the first column.
fn read_series(path: &Path) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_path(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("malformed CSV in {}", path.display()))?;
    if records.is_empty() {
        bail!("{} contains no data", path.display());
    }

    let first = &records[0];
    let header_col = first
        .iter()
        .position(|f| f.trim().eq_ignore_ascii_case("y"));
    let (col, data) = match header_col {
        Some(col) => (col, &records[1..]),
        None => {
            if first
                .get(0)
                .map(|f| f.trim().parse::<f64>().is_ok())
                .unwrap_or(false)
            {
                (0, &records[..])
            } else {
                bail!(
                    "{}: no 'y' column in the header and the first column is not numeric",
                    path.display()
                );
            }
        }
    };

    let mut y = Vec::with_capacity(data.len());
    for (i, record) in data.iter().enumerate() {
        let field = record
            .get(col)
            .with_context(|| format!("row {} is missing column {}", i + 1, col + 1))?;
        let value: f64 = field
            .trim()
            .parse()
            .with_context(|| format!("row {}: '{}' is not a number", i + 1, field))?;
        y.push(value);
    }
    Ok(y)
}
