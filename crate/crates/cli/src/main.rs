//! Experiment runner: single runs, parameter sweeps, and named presets,
//! with JSON summaries and plot-ready CSV output.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

mod output;
mod preset_run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use zedsim::engine::{run_with_sink, EngineError, ScenarioConfig, SweepAxis};

use output::{write_summary_json, write_sweep_csv, CsvTraceSink};

#[derive(Parser)]
#[command(
    name = "zedsim",
    about = "Deterministic zero-energy-device protocol simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write a JSON summary.
    Run {
        /// Scenario config (TOML).
        config: PathBuf,
        /// Master seed override (also honored from the SEED env var).
        #[arg(long)]
        seed: Option<u64>,
        /// Write a per-slot trace CSV to this path.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Summary output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the Cartesian product of axis values and seeds, emitting CSV.
    Sweep {
        /// Scenario config (TOML).
        config: PathBuf,
        /// Swept axis as `config.path=v1,v2,...` or `config.path=lo:hi[:step]`;
        /// repeatable.
        #[arg(long = "axes", value_name = "PATH=VALUES")]
        axes: Vec<String>,
        /// Number of seeds per cell (seed-base, seed-base+1, ...).
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        /// First seed of the seed range.
        #[arg(long, default_value_t = 1)]
        seed_base: u64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// CSV output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List or run the built-in experiment presets.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// Print the available preset names.
    List,
    /// Run a preset's baked sweep and write its figure-ready CSV.
    Run {
        name: String,
        /// Output directory for `<name>.csv` (default: current directory).
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

/// Error carrying the process exit code.
enum CliError {
    /// Exit 2: the configuration or arguments are invalid.
    Config(String),
    /// Exit 1: something failed at runtime.
    Runtime(String),
}

impl From<EngineError> for CliError {
    fn from(e: EngineError) -> Self {
        match e {
            EngineError::InvalidConfig(_) | EngineError::Axis(_) => CliError::Config(e.to_string()),
            EngineError::Runtime(_) => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, trace, out } => cmd_run(&config, seed, trace, out),
        Command::Sweep { config, axes, seeds, seed_base, jobs, out } => {
            cmd_sweep(&config, &axes, seeds, seed_base, jobs, out)
        }
        Command::Preset { action } => match action {
            PresetAction::List => {
                for name in zedsim::presets::names() {
                    let entry = zedsim::presets::get(name).expect("listed preset exists");
                    println!("{name}: {}", entry.description);
                }
                Ok(())
            }
            PresetAction::Run { name, out, jobs } => preset_run::cmd_preset_run(&name, &out, jobs),
        },
    }
}

fn load_config(path: &std::path::Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    let config: ScenarioConfig = toml::from_str(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}

fn cmd_run(
    path: &std::path::Path,
    seed: Option<u64>,
    trace: Option<PathBuf>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let mut config = load_config(path)?;
    if let Some(seed) = seed.or_else(env_seed) {
        config.seed = seed;
    }

    let metrics = if let Some(trace_path) = trace {
        let mut sink = CsvTraceSink::create(&trace_path)?;
        let metrics = run_with_sink(&config, Some(&mut sink))?;
        sink.finish()?;
        metrics
    } else {
        run_with_sink(&config, None)?
    };

    write_summary_json(&config, &metrics, out.as_deref())?;
    Ok(())
}

fn env_seed() -> Option<u64> {
    std::env::var("SEED").ok().and_then(|s| s.parse().ok())
}

fn cmd_sweep(
    path: &std::path::Path,
    axis_specs: &[String],
    seeds: u64,
    seed_base: u64,
    jobs: usize,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let config = load_config(path)?;
    let axes: Vec<SweepAxis> =
        axis_specs.iter().map(|s| parse_axis(s)).collect::<Result<_, _>>()?;
    if seeds == 0 {
        return Err(CliError::Config("--seeds must be >= 1".into()));
    }
    let seed_list: Vec<u64> = (0..seeds).map(|i| seed_base + i).collect();
    let rows = zedsim::engine::sweep(&config, &axes, &seed_list, jobs)?;
    write_sweep_csv(&axes, &rows, out.as_deref())?;
    Ok(())
}

/// `path=v1,v2,...` or `path=lo:hi[:step]` (inclusive ranges).
fn parse_axis(spec: &str) -> Result<SweepAxis, CliError> {
    let (path, values_part) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("axis {spec:?} must look like path=values")))?;
    let parse = |s: &str| -> Result<f64, CliError> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::Config(format!("axis {path}: bad number {s:?}")))
    };
    let values = if values_part.contains(':') {
        let parts: Vec<&str> = values_part.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (parse(lo)?, parse(hi)?, 1.0),
            [lo, hi, step] => (parse(lo)?, parse(hi)?, parse(step)?),
            _ => return Err(CliError::Config(format!("axis {path}: bad range {values_part:?}"))),
        };
        if step <= 0.0 || hi < lo {
            return Err(CliError::Config(format!("axis {path}: empty range {values_part:?}")));
        }
        let mut values = Vec::new();
        let mut v = lo;
        while v <= hi + 1e-12 * step {
            values.push(v);
            v += step;
        }
        values
    } else {
        values_part.split(',').map(parse).collect::<Result<_, _>>()?
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("axis {path}: no values")));
    }
    Ok(SweepAxis { path: path.trim().to_string(), values })
}
