use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use manifold_deconv_cli::commands;
use manifold_deconv_cli::{CliError, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "mdeconv",
    version,
    about = "Deconvolution and denoising of manifold-valued signals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Pipeline config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Seed of the stage this command runs (phantom, noise or solver).
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; defaults to the matching `io` entry of the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override a config field, e.g. `--set solver.iterations=200`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the configured phantom.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Blur and add noise to a signal.
    Degrade {
        input: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Reconstruct from degraded data.
    Reconstruct {
        input: Option<PathBuf>,
        /// Write the functional trace (iteration,value) here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Report ΔSNR of a reconstruction as JSON.
    Evaluate {
        ground: PathBuf,
        degraded: PathBuf,
        result: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a signal file to a binary PPM.
    Render {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Pixels per sample along each axis.
        #[arg(long, default_value_t = 12)]
        cell: usize,
    },
    /// Run all four solvers and write their functional traces as CSV.
    Bench {
        input: Option<PathBuf>,
        /// Stochastic runs to average, on consecutive seeds.
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn load(common: &Common, seed_key: &str) -> Result<PipelineConfig, CliError> {
    let mut set = common.set.clone();
    if let Some(seed) = common.seed {
        set.push(format!("{seed_key}={seed}"));
    }
    PipelineConfig::load(&common.config, &set)
}

fn pick(arg: &Option<PathBuf>, fallback: &Option<PathBuf>, what: &str) -> Result<PathBuf, CliError> {
    arg.clone()
        .or_else(|| fallback.clone())
        .ok_or_else(|| CliError::config(format!("no {what} path given and none in the config")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { common } => {
            let cfg = load(&common, "phantom.seed")?;
            commands::generate(&cfg, &pick(&common.out, &cfg.io.ground, "output")?)
        }
        Command::Degrade { input, common } => {
            let cfg = load(&common, "noise.seed")?;
            let input = pick(&input, &cfg.io.ground, "input")?;
            commands::degrade(&cfg, &input, &pick(&common.out, &cfg.io.degraded, "output")?)
        }
        Command::Reconstruct { input, trace, common } => {
            let cfg = load(&common, "solver.seed")?;
            let input = pick(&input, &cfg.io.degraded, "input")?;
            let out = pick(&common.out, &cfg.io.result, "output")?;
            let trace = trace.or(cfg.io.trace.clone());
            commands::reconstruct(&cfg, &input, &out, trace.as_deref())
        }
        Command::Evaluate {
            ground,
            degraded,
            result,
            out,
        } => {
            let report = commands::evaluate(&ground, &degraded, &result)?;
            let text = serde_json::to_string_pretty(&report).expect("plain struct") + "\n";
            match out {
                Some(p) => {
                    manifold_deconv_cli::io::write_bytes(&p, text.as_bytes(), manifold_deconv_cli::Stage::Evaluate)
                }
                None => {
                    print!("{text}");
                    Ok(())
                }
            }
        }
        Command::Render { input, out, cell } => {
            let out = out.unwrap_or_else(|| input.with_extension("ppm"));
            commands::render_file(&input, &out, cell)
        }
        Command::Bench { input, runs, common } => {
            let cfg = load(&common, "solver.seed")?;
            let input = pick(&input, &cfg.io.degraded, "input")?;
            commands::bench(&cfg, &input, &pick(&common.out, &cfg.io.bench, "output")?, runs)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
