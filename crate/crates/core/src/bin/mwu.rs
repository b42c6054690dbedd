//! Command-line front end: optimization runs, point classification and the
//! reproducible experiments.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use simplex_mwu::dynamics::{Method, RunOptions, StepSizes};
use simplex_mwu::error::{Error, Result};
use simplex_mwu::experiments::{
    basin, counterexample, demo_basin, optimize, vector_field, write_vector_field_csv, EpsSpec, OutputFormat,
    RunConfig, DEFAULT_CLUSTER_RADIUS,
};
use simplex_mwu::objective::{AnyObjective, Objective};
use simplex_mwu::simplex::StrategyProfile;
use simplex_mwu::spectral::{diffeomorphism_probe, stability_verdict, Stability, StabilityReport};
use simplex_mwu::stationarity::{classify, Classification, Tolerances};

#[derive(Parser)]
#[command(
    name = "mwu",
    version,
    about = "Multiplicative weights dynamics on products of simplices"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Polynomial/rational file or built-in id (trig-demo, coord-2x2, counterexample)
    #[arg(long)]
    objective: Option<String>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    /// `auto` or comma-separated per-player step sizes
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long = "max-iter")]
    max_iter: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
    /// JSON run configuration; explicit flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the dynamics from seeded random starts and classify the endpoints
    Optimize {
        #[command(flatten)]
        common: Common,
    },
    /// KKT classification and fixed-point stability of a given point
    Classify {
        #[command(flatten)]
        common: Common,
        /// JSON profile: {"n":N,"m":M,"values":[[...],...]}
        #[arg(long)]
        point: PathBuf,
    },
    /// Non-monotone ratio and non-injective Baum-Eagon map of the counterexample
    Counterexample {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 10_000)]
        grid: usize,
    },
    /// Displacement field of the planar trigonometric demo map
    VectorField {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
    /// Endpoint clusters of MWU from random starts
    Basin {
        #[command(flatten)]
        common: Common,
        #[arg(long = "cluster-radius", default_value_t = DEFAULT_CLUSTER_RADIUS)]
        cluster_radius: f64,
    },
    /// Minimum projected-Jacobian determinant over sampled points per step size
    Probe {
        #[command(flatten)]
        common: Common,
        /// Number of random interior sample points
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

/// Merges the optional config file with explicit flags over `defaults`.
fn resolve(common: &Common, defaults: RunConfig) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => serde_json::from_reader(File::open(path)?)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?,
        None => defaults,
    };
    if let Some(v) = &common.objective {
        cfg.objective = v.clone();
    }
    if let Some(v) = common.method {
        cfg.method = v;
    }
    if let Some(v) = &common.eps {
        cfg.eps = EpsSpec::Text(v.clone());
    }
    if let Some(v) = common.starts {
        cfg.starts = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.tol {
        cfg.tol = v;
    }
    if let Some(v) = common.max_iter {
        cfg.max_iter = v;
    }
    if let Some(v) = &common.out {
        cfg.output_path = Some(v.display().to_string());
    }
    if let Some(v) = common.format {
        cfg.output_format = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn sink(cfg: &RunConfig) -> Result<Box<dyn Write>> {
    Ok(match &cfg.output_path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn emit_json<T: Serialize>(cfg: &RunConfig, value: &T) -> Result<()> {
    let mut w = sink(cfg)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_csv(cfg: &RunConfig, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<()> {
    let mut w = sink(cfg)?;
    write(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct StabilitySection {
    status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<StabilityReport>,
}

#[derive(Serialize)]
struct ClassifyOutput {
    objective: String,
    eps: StepSizes,
    classification: Classification,
    stability: StabilitySection,
}

fn cmd_classify(common: &Common, point: &PathBuf) -> Result<()> {
    let cfg = resolve(common, RunConfig::default())?;
    let obj = AnyObjective::resolve(&cfg.objective)?;
    let text = std::fs::read_to_string(point)?;
    let x: StrategyProfile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    if x.shape() != obj.shape() {
        return Err(Error::ShapeMismatch {
            expected: obj.shape().to_string(),
            found: x.shape().to_string(),
        });
    }
    let tols = Tolerances::default();
    let eps = cfg.eps.resolve(&obj, cfg.seed)?;
    let classification = classify(&x, &obj, &tols)?;
    let stability = match stability_verdict(&x, &obj, &eps, &tols) {
        Ok(r) => StabilitySection {
            status: match r.stability {
                Stability::Unstable => "Unstable",
                Stability::NotUnstable => "NotUnstable",
            }
            .into(),
            reason: None,
            report: Some(r),
        },
        Err(e @ (Error::NotFixedPoint { .. } | Error::HessianUnavailable)) => StabilitySection {
            status: "n/a".into(),
            reason: Some(e.to_string()),
            report: None,
        },
        Err(e) => return Err(e),
    };
    emit_json(
        &cfg,
        &ClassifyOutput {
            objective: cfg.objective.clone(),
            eps,
            classification,
            stability,
        },
    )
}

fn cmd_optimize(common: &Common) -> Result<()> {
    let cfg = resolve(common, RunConfig::default())?;
    let obj = AnyObjective::resolve(&cfg.objective)?;
    let report = optimize(&cfg, &obj, &Tolerances::default())?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(&cfg, &report),
        OutputFormat::Csv => emit_csv(&cfg, |w| report.write_csv(w)),
    }
}

fn csv_defaults() -> RunConfig {
    RunConfig {
        output_format: OutputFormat::Csv,
        ..RunConfig::default()
    }
}

fn cmd_counterexample(common: &Common, grid: usize) -> Result<()> {
    let cfg = resolve(common, csv_defaults())?;
    let report = counterexample(grid)?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(&cfg, &report),
        OutputFormat::Csv => {
            let t = &report.triple;
            let w = &report.witness;
            eprintln!(
                "non-monotone: k({}) = {} > k({}) = {} < k({}) = {}",
                t.a, t.k_a, t.b, t.k_b, t.c, t.k_c
            );
            eprintln!(
                "non-injective: tau({}) = {}, tau({}) = {}, gap {:e}",
                w.x, w.tau_x, w.x_prime, w.tau_x_prime, w.gap
            );
            emit_csv(&cfg, |out| report.write_csv(out))
        }
    }
}

fn single_eps(cfg: &RunConfig, default: f64) -> Result<f64> {
    match cfg.eps.values()? {
        None => Ok(default),
        Some(v) if v.len() == 1 => Ok(v[0]),
        Some(_) => Err(Error::InvalidConfig("expected a single step size".into())),
    }
}

fn cmd_vector_field(common: &Common, grid: usize) -> Result<()> {
    let cfg = resolve(common, csv_defaults())?;
    let rows = vector_field(grid, single_eps(&cfg, 0.05)?)?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(&cfg, &rows),
        OutputFormat::Csv => emit_csv(&cfg, |w| write_vector_field_csv(&rows, w)),
    }
}

fn cmd_basin(common: &Common, cluster_radius: f64) -> Result<()> {
    let cfg = resolve(
        common,
        RunConfig {
            objective: "trig-demo".into(),
            starts: 500,
            tol: 1e-10,
            ..RunConfig::default()
        },
    )?;
    if cfg.output_format == OutputFormat::Csv {
        return Err(Error::InvalidConfig("basin output is JSON only".into()));
    }
    let tols = Tolerances::default();
    let summary = if cfg.objective == "trig-demo" {
        let eps = single_eps(&cfg, 0.05)?;
        demo_basin(eps, cfg.starts, cfg.seed, cfg.tol, cfg.max_iter, cluster_radius, &tols)?
    } else {
        let obj = AnyObjective::resolve(&cfg.objective)?;
        let eps = cfg.eps.resolve(&obj, cfg.seed)?;
        let opts = RunOptions::new(cfg.tol, cfg.max_iter);
        basin(&obj, &eps, cfg.starts, cfg.seed, &opts, cluster_radius, &tols)?
    };
    emit_json(&cfg, &summary)
}

/// Step sizes probed when none are given.
const DEFAULT_PROBE_GRID: [f64; 10] = [1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.1, 0.2, 0.5, 1.0];

fn cmd_probe(common: &Common, samples: usize) -> Result<()> {
    let cfg = resolve(common, RunConfig::default())?;
    let obj = AnyObjective::resolve(&cfg.objective)?;
    let grid = cfg.eps.values()?.unwrap_or_else(|| DEFAULT_PROBE_GRID.to_vec());
    let report = diffeomorphism_probe(&obj, obj.shape(), &grid, samples, cfg.seed)?;
    match cfg.output_format {
        OutputFormat::Json => emit_json(&cfg, &report),
        OutputFormat::Csv => emit_csv(&cfg, |w| report.write_csv(w)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Optimize { common } => cmd_optimize(common),
        Command::Classify { common, point } => cmd_classify(common, point),
        Command::Counterexample { common, grid } => cmd_counterexample(common, *grid),
        Command::VectorField { common, grid } => cmd_vector_field(common, *grid),
        Command::Basin { common, cluster_radius } => cmd_basin(common, *cluster_radius),
        Command::Probe { common, samples } => cmd_probe(common, *samples),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
