use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use floquet_coe_cli::{run, CliError, ExperimentConfig};

/// Runs one experiment described by a configuration file.
#[derive(Parser, Debug)]
#[command(name = "floquet-coe", version)]
struct Args {
    /// Path of the `key = value` configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Master seed; overrides `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("floquet-coe: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(args: &Args) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(dir) = &args.output {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = args.seed {
        cfg.master_seed = seed;
    }
    if let Some(k) = args.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot start thread pool: {e}")))?;
    }
    let artifacts = run(&cfg)?;
    for t in &artifacts.tables {
        println!("{}", cfg.output_dir.join(t.file_name()).display());
    }
    println!("{}", cfg.output_dir.join("summary.json").display());
    Ok(())
}
