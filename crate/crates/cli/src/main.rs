use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use orbitact_cli::{exit_code_for, export_trajectory, run_ledger, run_solve, threads_from_env};

#[derive(Parser)]
#[command(name = "orbitact", version, about = "Antiperiodic N-body orbits as critical points of the action")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multi-start search; writes orbit files and summary.json.
    Solve { config: PathBuf },
    /// Seeded sweep over the inequality ledger; writes ledger.json.
    Ledger {
        config: PathBuf,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Defaults to the config's solver seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Samples a stored orbit to CSV.
    Export {
        orbit: PathBuf,
        #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        /// Defaults to the orbit path with a .csv extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve { config } => {
            let out = run_solve(&config, threads_from_env()?)?;
            let s = &out.summary;
            println!(
                "{} starts, {} converged, {} dropped, {} orbits",
                s.starts, s.converged, s.dropped, s.records
            );
            for (v, f) in s.critical_values.iter().zip(&s.orbit_files) {
                println!("  {v:.12}  {f}");
            }
            if !s.coercivity.passed {
                eprintln!("warning: an iterate exceeded the coercivity bound");
            }
            println!("summary: {}", out.summary_path.display());
            if out.exit_code != 0 {
                eprintln!("no start converged to a catalogued orbit");
            }
            Ok(out.exit_code)
        }
        Command::Ledger { config, samples, seed } => {
            let out = run_ledger(&config, samples, seed)?;
            for w in &out.report.warnings {
                eprintln!("warning: {w}");
            }
            for c in &out.report.checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                println!("{mark}  {:<36} worst {:+.3e} (tol {:+.1e}, n = {})", c.name, c.worst_slack, c.tolerance, c.samples);
            }
            println!("report: {}", out.report_path.display());
            Ok(out.exit_code)
        }
        Command::Export { orbit, samples, out } => {
            let done = export_trajectory(&orbit, samples as usize, out.as_deref())?;
            println!("{} rows -> {}", done.rows, done.path.display());
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
