use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use srs_cli::commands::{self, Overrides};
use srs_cli::config::{Config, FigureKind, FormulaPreset, SimulatePreset, DEFAULT_CONFIG};
use srs_cli::{plot, results, ExperimentResultRow};

const CONFIG_HELP: &str = "\
Every subcommand reads an optional TOML file given with --config. Missing
keys fall back to the defaults below; --seed, --trials and --out override the
file. CSV goes to stdout unless an output path is set.

Defaults:
";

#[derive(Parser)]
#[command(
    name = "srs",
    version,
    about = "Secure rate-splitting experiments: closed forms, Monte Carlo SDoF slopes, precoder checks and plots",
    after_long_help = format!("{CONFIG_HELP}\n{DEFAULT_CONFIG}")
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct CommonArgs {
    /// TOML configuration file (see `srs --help` for all keys)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Base seed [default: 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per cell; draws per regime for `verify` [default: 200 / 1000]
    #[arg(long)]
    trials: Option<usize>,
    /// Output path (CSV, or SVG for `plot`)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn load(&self) -> Result<Config> {
        let mut cfg = Config::load_or_default(self.config.as_deref())?;
        Overrides {
            seed: self.seed,
            trials: self.trials,
            out: self.out.clone(),
        }
        .apply(&mut cfg);
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate closed-form sum-SDoF values
    Formulas {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides `formulas.preset` [default: grid]
        #[arg(long, value_enum)]
        preset: Option<FormulaPreset>,
    },
    /// Estimate SDoF slopes by Monte Carlo and compare with the closed forms
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Overrides `simulate.preset` [default: acceptance]
        #[arg(long, value_enum)]
        preset: Option<SimulatePreset>,
    },
    /// Check precoder nulling and alignment residuals on seeded draws
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Perturb the first jammer precoder to exercise failure reporting
        #[arg(long)]
        corrupt: bool,
    },
    /// Draw a results CSV as an SVG line chart
    Plot {
        #[command(flatten)]
        common: CommonArgs,
        /// Results CSV (overrides `plot.input`)
        input: Option<PathBuf>,
        /// Overrides `plot.figure` [default: auto]
        #[arg(long, value_enum)]
        figure: Option<FigureKind>,
    },
}

fn write_csv(rows: &[ExperimentResultRow], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let file =
                File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            results::write_rows(&mut w, rows)?;
            w.flush()?;
            eprintln!("wrote {} rows to {}", rows.len(), path.display());
        }
        None => results::write_rows(io::stdout().lock(), rows)?,
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Formulas { common, preset } => {
            let mut cfg = common.load()?;
            if let Some(p) = preset {
                cfg.formulas.preset = p;
            }
            let rows = commands::formula_rows(&cfg)?;
            write_csv(&rows, cfg.formulas.out.as_deref())?;
            Ok(true)
        }
        Command::Simulate { common, preset } => {
            let mut cfg = common.load()?;
            if let Some(p) = preset {
                cfg.simulate.preset = p;
            }
            let outcome = commands::simulate(&cfg)?;
            for check in &outcome.checks {
                eprintln!("{check}");
            }
            eprintln!(
                "{}/{} cells within {} of the closed form (seed {}, {} trials)",
                outcome.passed(),
                outcome.checks.len(),
                outcome.tolerance,
                cfg.run.seed,
                cfg.run.trials
            );
            write_csv(&outcome.rows(), cfg.simulate.out.as_deref())?;
            Ok(true)
        }
        Command::Verify { common, corrupt } => {
            let mut cfg = common.load()?;
            cfg.verify.corrupt |= corrupt;
            let reports = commands::verify(&cfg)?;
            for r in &reports {
                println!("{r}");
            }
            let ok = reports.iter().all(|r| r.passed);
            println!(
                "verify: {} (tolerance {:.0e}, seed {})",
                if ok { "pass" } else { "FAIL" },
                cfg.verify.tolerance,
                cfg.run.seed
            );
            Ok(ok)
        }
        Command::Plot {
            common,
            input,
            figure,
        } => {
            let cfg = common.load()?;
            let input = input
                .or(cfg.plot.input.clone())
                .context("plot needs a results CSV (positional argument or plot.input)")?;
            let out = cfg
                .plot
                .out
                .clone()
                .context("plot needs an output path (--out or plot.out)")?;
            let rows = results::read_file(&input)?;
            let fig = plot::plot_file(&rows, figure.unwrap_or(cfg.plot.figure), &out)?;
            eprintln!(
                "wrote {fig:?} chart of {} rows to {}",
                rows.len(),
                out.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
