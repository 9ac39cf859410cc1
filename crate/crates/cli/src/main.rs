use std::path::PathBuf;
use std::process::ExitCode;

use circle_rigidity_cli::{run, CliError, Experiment, ExperimentConfig};
use clap::Parser;

/// Periodic-data rigidity experiments for expanding circle maps.
#[derive(Debug, Parser)]
#[command(name = "circle-rigidity", version)]
struct Args {
    /// Experiment to run.
    #[arg(value_enum)]
    experiment: Experiment,
    /// JSON experiment configuration; built-in defaults are used when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the numerical kernels.
    #[arg(long)]
    threads: Option<usize>,
    /// Grid resolution G (overrides the config).
    #[arg(long)]
    grid: Option<usize>,
    /// Largest period or horizon N (overrides the config).
    #[arg(long)]
    nmax: Option<usize>,
}

fn load(args: &Args) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &args.config {
        None => ExperimentConfig::defaults(args.experiment),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            ExperimentConfig::from_json(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
    };
    if cfg.experiment != args.experiment {
        return Err(CliError::Config(format!(
            "config describes a `{}` experiment but `{}` was requested",
            cfg.experiment, args.experiment
        )));
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(g) = args.grid {
        cfg.grid = g;
    }
    if let Some(n) = args.nmax {
        cfg.n_max = n;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let args = Args::parse();
    if let Some(threads) = args.threads {
        if threads == 0 {
            eprintln!("configuration error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("could not configure thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    match load(&args).and_then(|cfg| run(&cfg)) {
        Ok(report) => {
            println!(
                "wrote {} files to {}",
                report.files.len(),
                report.out.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
