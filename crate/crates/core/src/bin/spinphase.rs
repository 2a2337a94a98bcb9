use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use spinphase::harness::{self, HarnessError, Series, SuiteOptions};

/// Phase-space spin dynamics experiments.
///
/// Exit status: 0 success, 1 a solver left its validity window or a check
/// failed, 2 bad config or input.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config (or a manifest).
    Run { config: PathBuf },
    /// Compare series `a` against the reference series `b`.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Relative s_z deviation that ends the agreement horizon.
        #[arg(long, default_value_t = 0.05)]
        threshold: f64,
    },
    /// Run the property suite and print one line per check.
    Props {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Multiply classical time steps (negative control).
        #[arg(long, default_value_t = 1.0)]
        dt_scale: f64,
        /// Also write the table as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn fail(e: &HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run { config } => {
            let out = harness::run(&config);
            for line in &out.summary.lines {
                println!("{line}");
            }
            for f in &out.summary.files {
                println!("wrote {}", f.display());
            }
            match out.result {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => fail(&e),
            }
        }
        Command::Compare { a, b, threshold } => {
            let report = Series::read(&a)
                .and_then(|sa| Series::read(&b).map(|sb| (sa, sb)))
                .and_then(|(sa, sb)| harness::compare_series(&sa, &sb, threshold));
            match report {
                Ok(r) => {
                    print!("{r}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(&e),
            }
        }
        Command::Props { seed, dt_scale, csv } => {
            if !(dt_scale.is_finite() && dt_scale > 0.0) {
                return fail(&HarnessError::Config(format!("`dt-scale`: must be positive (got {dt_scale})")));
            }
            let report = harness::property_suite(&SuiteOptions { seed, dt_scale });
            for r in &report.results {
                let status = match (r.pass, r.gating) {
                    (true, _) => "PASS",
                    (false, true) => "FAIL",
                    (false, false) => "INFO",
                };
                println!("{status} {}/{}: measured {:e}, bound {:e}", r.module, r.invariant, r.measured, r.bound);
            }
            if let Some(path) = csv {
                if let Err(e) = std::fs::write(&path, report.to_csv()) {
                    return fail(&HarnessError::Io(format!("{}: {e}", path.display())));
                }
            }
            let failures = report.failures();
            if failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "failed: {}",
                    failures.iter().map(|r| format!("{}/{}", r.module, r.invariant)).collect::<Vec<_>>().join(", ")
                );
                ExitCode::from(1)
            }
        }
    }
}
