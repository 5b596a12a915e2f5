use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nmlab::config::{scheme_of, RunConfig, SchemeName, VariantName};
use nmlab::figures::{run_figure, FigureId};
use nmlab::plot::{render, PlotKind, UsageError};
use nmlab::table::Table;
use nmlab::verify::verify_claims;
use nmlab_core::nonmarkov::{evaluate, Measure};
use nmlab_core::register::{Propagator, WernerParam};

#[derive(Parser)]
#[command(
    name = "nmlab",
    version,
    about = "Non-Markovianity and correlation sweeps for the measurement-free teleportation circuit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute one figure's data and write it as CSV.
    Figure {
        fig: FigureId,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every claim check; exits nonzero if any fails.
    Verify {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Where to write the JSON report (default: <out_dir>/verify.json).
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Evaluate a single non-Markovianity measure and print its report as JSON.
    Measure {
        #[arg(value_parser = parse_measure)]
        measure: Measure,
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum)]
        scheme: SchemeName,
        #[arg(long, value_enum, default_value = "swap")]
        variant: VariantName,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Render a figure CSV as a minimal SVG.
    Plot {
        csv: PathBuf,
        #[arg(long, value_enum)]
        kind: PlotKind,
        /// Column to plot when the table has several.
        #[arg(long)]
        column: Option<String>,
        /// Output file (default: the CSV path with an .svg extension).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_measure(s: &str) -> Result<Measure, String> {
    Measure::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| format!("unknown measure {s:?} (blp, rhp, lfs)"))
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn with_pool<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.resolved_workers()? {
        builder = builder.num_threads(n);
    }
    builder.build().context("building worker pool")?.install(f)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Figure { fig, config, out, workers } => {
            let mut cfg = load_config(config.as_ref())?;
            if let Some(out) = out {
                cfg.out_dir = out;
            }
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.validate()?;
            let table = with_pool(&cfg, || run_figure(fig, &cfg))?;
            let path = table.write(&cfg.out_dir, &cfg.hash())?;
            println!("{} ({} rows)", path.display(), table.rows.len());
        }
        Command::Verify { config, report, workers } => {
            let mut cfg = load_config(config.as_ref())?;
            if workers.is_some() {
                cfg.workers = workers;
            }
            cfg.validate()?;
            let result = with_pool(&cfg, || verify_claims(&cfg))?;
            let path = report.unwrap_or_else(|| cfg.out_dir.join("verify.json"));
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            }
            std::fs::write(&path, serde_json::to_string_pretty(&result)? + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            print!("{}", result.summary());
            println!("report: {}", path.display());
            if !result.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Measure { measure, p, scheme, variant, config } => {
            let cfg = load_config(config.as_ref())?;
            let scheme = scheme_of(scheme, variant);
            let p = WernerParam::new(p)?;
            let report = with_pool(&cfg, || {
                Ok(evaluate(measure, &Propagator::new(scheme), p, cfg.grid_for(scheme), &cfg.measure_settings())?)
            })?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::Plot { csv, kind, column, out } => {
            let text = std::fs::read_to_string(&csv).with_context(|| format!("reading {}", csv.display()))?;
            let name = csv.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let table = Table::parse(&name, &text).map_err(|e| UsageError(format!("{}: {e:#}", csv.display())))?;
            let svg = render(&table, kind, column.as_deref())?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&out, svg).with_context(|| format!("writing {}", out.display()))?;
            println!("{}", out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
