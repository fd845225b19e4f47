use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use mislid::bench::{emit_report, read_jsonl, run_monte_carlo, summarize, ExperimentSpec, ReportFormat};
use mislid::bounds::{characteristic_value, sample_complexity_floor};
use mislid::InstanceFile;

#[derive(Parser)]
#[command(name = "bench", about = "Top-m identification experiments in misspecified linear bandits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Summary,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment spec and write runs.jsonl, runs.csv and summary.csv.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads.
        #[arg(long, env = "MISLID_JOBS", default_value_t = 1)]
        jobs: usize,
        /// Exit successfully even when some run hit its safety cap or failed.
        #[arg(long)]
        allow_incomplete: bool,
    },
    /// Characteristic value of an instance file, printed as JSON.
    LowerBound {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 0.05)]
        delta: f64,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
    },
    /// Re-emit reports from a runs.jsonl in a directory.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum)]
        format: Format,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> mislid::Result<ExitCode> {
    match cli.command {
        Command::Run { spec, out, jobs, allow_incomplete } => {
            let spec = ExperimentSpec::load(&spec)?;
            let records = run_monte_carlo(&spec, jobs)?;
            for format in [ReportFormat::Jsonl, ReportFormat::Csv, ReportFormat::Summary] {
                emit_report(&records, format, &out)?;
            }
            for s in summarize(&records) {
                println!(
                    "{}: mean tau {:.1} +- {:.1}, error rate {:.4}, incomplete {}",
                    s.label, s.mean_tau, s.std_tau, s.error_rate, s.incomplete
                );
            }
            let bad = records.iter().filter(|r| r.result.incomplete).count();
            if bad > 0 && !allow_incomplete {
                eprintln!("{bad} run(s) incomplete or failed");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::LowerBound { instance, m, delta, tol, max_iter } => {
            let (inst, model) = InstanceFile::load(&instance)?.into_parts()?;
            let res = characteristic_value(&inst, &model, m, tol, max_iter)?;
            let floor = sample_complexity_floor(res.h_mu, delta)?;
            let out = serde_json::json!({
                "h_mu": res.h_mu,
                "omega_star": res.omega_star.as_slice(),
                "gap": res.gap,
                "iterations": res.iterations,
                "converged": res.converged,
                "delta": delta,
                "sample_complexity_floor": floor,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Report { input, format } => {
            let records = read_jsonl(&input.join("runs.jsonl"))?;
            let format = match format {
                Format::Csv => ReportFormat::Csv,
                Format::Summary => ReportFormat::Summary,
            };
            let path = emit_report(&records, format, &input)?;
            println!("{}", path.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}
