use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use havok_arc::config::{load_manifest, parse_thresholds};
use havok_arc::runner::{benchmark_jobs, execute, manifest_jobs, prepare_output_dir, write_summaries, RunOptions};
use havok_arc::CliError;
use havok_arc_core::havok::DEFAULT_EMBEDDING;

/// Simulate arc-fault scenarios and classify them from the HAVOK forcing signal.
#[derive(Parser)]
#[command(name = "havok-arc", version)]
struct Cli {
    /// Band edges `nonarc_max,arc_min,arc_max,other_min`, ascending.
    #[arg(long, global = true, value_name = "A,B,C,D")]
    thresholds: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenarios listed in a TOML manifest.
    Run {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        reps: Option<usize>,
        /// Embedding depth.
        #[arg(long)]
        q: Option<usize>,
        /// Base seed applied to every scenario.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the built-in reference cases.
    Benchmark {
        #[arg(long, default_value = "benchmark_out")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write per-run trace, forcing and model files.
        #[arg(long)]
        artifacts: bool,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    let override_bands = cli.thresholds.as_deref().map(parse_thresholds).transpose()?;
    match cli.command {
        Command::Run {
            manifest,
            out,
            reps,
            q,
            seed,
        } => {
            let mut m = load_manifest(&manifest)?;
            if let Some(r) = reps {
                if r == 0 {
                    return Err(CliError::Config("--reps must be at least 1".into()));
                }
                m.repetitions = r;
            }
            if let Some(s) = seed {
                m.scenarios.iter_mut().for_each(|e| e.seed = s);
            }
            let options = RunOptions {
                feeder: m.feeder,
                q: q.unwrap_or(m.q),
                thresholds: override_bands.unwrap_or(m.thresholds),
            };
            let dir = out.unwrap_or(m.output_dir.clone());
            prepare_output_dir(&dir)?;
            if m.scenarios.is_empty() {
                eprintln!("warning: manifest lists no scenarios");
            }
            let records = execute(&manifest_jobs(&m), &options, Some(&dir))?;
            write_summaries(&dir, &records)?;
            print!("{}", havok_arc::format::summary_table(&records));
            Ok(())
        }
        Command::Benchmark {
            out,
            reps,
            seed,
            artifacts,
        } => {
            if reps == 0 {
                return Err(CliError::Config("--reps must be at least 1".into()));
            }
            let options = RunOptions {
                thresholds: override_bands.unwrap_or_default(),
                q: DEFAULT_EMBEDDING,
                ..RunOptions::default()
            };
            prepare_output_dir(&out)?;
            let jobs = benchmark_jobs(reps, seed);
            let records = execute(&jobs, &options, artifacts.then_some(out.as_path()))?;
            write_summaries(&out, &records)?;
            print!("{}", havok_arc::format::summary_table(&records));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
