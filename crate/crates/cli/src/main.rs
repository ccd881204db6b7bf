use clap::{Parser, Subcommand};
use fracfueter_cli::checks::CheckName;
use fracfueter_cli::config::{ConfigError, RunConfig};
use fracfueter_cli::{resolve_workers, run, sweep};
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical checks of quaternionic fractional integral identities.
#[derive(Parser)]
#[command(name = "fracfueter", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks of a config and write report.json and report.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Worker threads; overrides FRACFUETER_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a config once per value of a resolution parameter
    /// (N_volume, N_face, node_count_1d, fd_h, epsilon).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and validate a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the available checks.
    ListChecks,
}

const EXIT_FAIL: u8 = 1;
const EXIT_CONFIG: u8 = 2;

fn config_error(e: ConfigError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn io_error(e: std::io::Error) -> ExitCode {
    eprintln!("error: cannot write report: {e}");
    ExitCode::from(EXIT_CONFIG)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::ListChecks => {
            for c in CheckName::ALL {
                println!("{:<16} {}", c.as_str(), c.identity());
                let defaults = serde_json::to_value(c.default_resolution()).expect("resolution serialises");
                if let Some(map) = defaults.as_object().filter(|m| !m.is_empty()) {
                    let parts: Vec<String> = map.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    println!("{:<16} built-in: {}", "", parts.join(" "));
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match RunConfig::load(&config) {
            Ok(_) => {
                println!("{}: ok", config.display());
                ExitCode::SUCCESS
            }
            Err(e) => config_error(e),
        },
        Command::Run { config, out, workers } => {
            let report = match RunConfig::load(&config)
                .and_then(|cfg| resolve_workers(workers).and_then(|n| run(&cfg, n)))
            {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            if let Err(e) = report.write(&out) {
                return io_error(e);
            }
            for c in &report.checks {
                let note = c.error.as_deref().map(|e| format!("  ({e})")).unwrap_or_default();
                println!("{} {:<16} score {:.3e}  {:.1}s{note}", verdict(c.pass), c.name.as_str(), c.score(), c.wall_time_s);
            }
            println!("report written to {}", out.display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
        Command::Sweep {
            config,
            param,
            values,
            out,
            workers,
        } => {
            let report = match RunConfig::load(&config)
                .and_then(|cfg| resolve_workers(workers).and_then(|n| sweep(&cfg, &param, &values, n)))
            {
                Ok(r) => r,
                Err(e) => return config_error(e),
            };
            if let Err(e) = report.write(&out) {
                return io_error(e);
            }
            for t in &report.trends {
                let scores: Vec<String> = t.scores.iter().map(|s| format!("{s:.2e}")).collect();
                println!("{:<16} {:<15} [{}]", t.check, t.verdict, scores.join(", "));
            }
            println!("sweep written to {}", out.display());
            if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_FAIL)
            }
        }
    }
}
