//! `qphom`: command-line driver for the homogenization pipeline.

mod cache;
mod config;
mod run;
mod stages;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context as _, Result};
use clap::{Args, Parser, Subcommand};
use qphom::presets::Preset;
use qphom::qpcore::input::CoefficientSpec;
use qphom::Route;

use crate::cache::Cache;
use crate::config::{parse_lambda, parse_list, CoefficientSource, ExperimentConfig, FunctionSource, Grid, Stage};
use crate::run::Status;

#[derive(Parser)]
#[command(name = "qphom", version, about = "Spectral homogenization of quasiperiodic media")]
struct Cli {
    /// Experiment configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "qphom-out")]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for the sampled coercivity estimate.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Disable the result cache even if QPHOM_CACHE_DIR is set.
    #[arg(long, global = true)]
    no_cache: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lift the coefficient to the torus and report diagnostics.
    Lift(Overrides),
    /// First regularized Bloch eigenvalue over a quasimomentum grid.
    Eig(Overrides),
    /// Cell correctors and the resulting tensor for each δ.
    Cell(Overrides),
    /// Effective tensor by both routes with δ → 0 continuation.
    Tensor(Overrides),
    /// First Bloch transform against the Fourier transform.
    Transform(Overrides),
    /// ε-scale 1D Dirichlet solves against the homogenized solve.
    Direct(Overrides),
    /// All configured stages.
    Run(Overrides),
    /// List the built-in coefficients.
    Presets,
}

#[derive(Args, Default)]
struct Overrides {
    /// Built-in coefficient.
    #[arg(long, conflicts_with = "coefficient")]
    preset: Option<String>,
    /// Coefficient JSON file.
    #[arg(long)]
    coefficient: Option<PathBuf>,
    /// Winding matrix, rows separated by ';' and entries by ',' (e.g. "1;sqrt(2)").
    #[arg(long)]
    lambda: Option<String>,
    /// Regularization schedule; for `transform`, the first value is its δ.
    #[arg(long, alias = "deltas")]
    delta: Option<String>,
    /// Galerkin truncation |n|∞ ≤ N.
    #[arg(long)]
    n: Option<usize>,
    /// Finite-difference step for the Hessian route.
    #[arg(long)]
    h: Option<f64>,
    /// Quasimomentum grid, "min:max:count" or a list.
    #[arg(long)]
    eta: Option<String>,
    /// ε schedule (transform, or direct for the `direct` command).
    #[arg(long)]
    epsilons: Option<String>,
    /// ε schedule of the direct solver.
    #[arg(long)]
    direct_epsilons: Option<String>,
    /// ξ grid, "min:max:count" or a list.
    #[arg(long)]
    xis: Option<String>,
    /// Test function: gaussian, bump, or a sample JSON file.
    #[arg(long)]
    g: Option<String>,
    /// q* for the direct stage: a number or a tensor.json.
    #[arg(long)]
    q_source: Option<String>,
    #[arg(long)]
    cells_per_eps: Option<usize>,
    /// Eigen residual tolerance.
    #[arg(long)]
    tol: Option<f64>,
    /// Injectivity scan bound for Λ.
    #[arg(long)]
    p_check: Option<usize>,
    /// Route whose tensor feeds the direct solver.
    #[arg(long)]
    route: Option<Route>,
}

impl Overrides {
    fn apply(&self, cfg: &mut ExperimentConfig, command: Option<Stage>) -> Result<()> {
        if let Some(p) = &self.preset {
            Preset::from_name(p)?;
            cfg.coefficient = CoefficientSource::Preset(p.clone());
        }
        if let Some(path) = &self.coefficient {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.coefficient = CoefficientSource::Inline(CoefficientSpec::from_json(&text)?);
        }
        if let Some(l) = &self.lambda {
            cfg.lambda = Some(parse_lambda(l)?);
        }
        let transform = command == Some(Stage::Transform);
        if let Some(d) = &self.delta {
            let d = parse_list(d)?;
            if transform {
                cfg.transform_delta = d[0];
            } else {
                cfg.deltas = d;
            }
        }
        if let Some(n) = self.n {
            if transform {
                cfg.transform_n = n;
            } else {
                cfg.n = n;
            }
        }
        if let Some(h) = self.h {
            cfg.h = h;
        }
        if let Some(e) = &self.eta {
            cfg.eta_grid = Grid::parse(e)?;
        }
        if let Some(e) = &self.epsilons {
            if command == Some(Stage::Direct) {
                cfg.direct_epsilons = parse_list(e)?;
            } else {
                cfg.epsilons = parse_list(e)?;
            }
        }
        if let Some(e) = &self.direct_epsilons {
            cfg.direct_epsilons = parse_list(e)?;
        }
        if let Some(x) = &self.xis {
            cfg.xis = Grid::parse(x)?;
        }
        if let Some(g) = &self.g {
            cfg.function = match g.as_str() {
                "gaussian" | "bump" => FunctionSource::Named(g.clone()),
                path => FunctionSource::Samples { samples: path.into() },
            };
        }
        if let Some(c) = self.cells_per_eps {
            cfg.cells_per_eps = c;
        }
        if let Some(t) = self.tol {
            cfg.tolerances.eig = t;
        }
        if let Some(p) = self.p_check {
            cfg.tolerances.p_check = p;
        }
        if let Some(r) = self.route {
            cfg.route = r;
        }
        if let Some(s) = command {
            cfg.stages = vec![s];
        }
        Ok(())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<ExitCode> {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let (overrides, stage) = match &cli.command {
        Command::Presets => {
            for p in Preset::ALL {
                println!("{p}: {}", p.json());
            }
            return Ok(ExitCode::SUCCESS);
        }
        Command::Lift(o) => (o, Some(Stage::Lift)),
        Command::Eig(o) => (o, Some(Stage::Eig)),
        Command::Cell(o) => (o, Some(Stage::Cell)),
        Command::Tensor(o) => (o, Some(Stage::Tensor)),
        Command::Transform(o) => (o, Some(Stage::Transform)),
        Command::Direct(o) => (o, Some(Stage::Direct)),
        Command::Run(o) => (o, None),
    };
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    overrides.apply(&mut cfg, stage)?;
    let q = overrides.q_source.as_deref().map(stages::read_q_source).transpose()?;
    let cache = if cli.no_cache { None } else { Cache::from_env()? };
    let requested = cfg.stages.clone();
    let record = run::run(&cfg, cli.seed, &requested, q, cache.as_ref(), &cli.out)?;

    for r in &record.stages {
        let cache = r.cache.map(|c| format!(" [{}]", serde_json::to_value(c).unwrap_or_default().as_str().unwrap_or(""))).unwrap_or_default();
        let status = match r.status {
            Status::Ok => "ok",
            Status::Failed => "FAILED",
            Status::Skipped => "skipped",
        };
        println!("{:<10} {:<8} {:>8.3}s{cache}", r.stage.name(), status, r.seconds);
        if let Some(e) = &r.error {
            println!("           {e}");
        }
    }
    if let Some(s) = stage.and_then(|s| record.stage(s)).and_then(|r| r.summary.as_ref()) {
        if stage != Some(Stage::Cell) {
            println!("{}", serde_json::to_string_pretty(&s)?);
        }
    }
    println!("outputs in {}", cli.out.display());
    Ok(if record.succeeded() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}
