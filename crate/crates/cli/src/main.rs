use std::process::ExitCode;

use clap::Parser;
use fhl_cli::{list_experiments, run_to_file, Args, CliError, ExperimentConfig};

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Usage("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot set up {n} threads: {e}")))
}

fn execute(args: &Args) -> Result<bool, CliError> {
    configure_threads(args.threads)?;
    if args.experiment == "list" {
        for (name, description) in list_experiments() {
            eprintln!("{name:<18} {description}");
        }
        return Ok(true);
    }
    let config = ExperimentConfig::from_args(args)?;
    let (report, path) = run_to_file(&config)?;
    for v in report.verdicts.iter().filter(|v| !v.passed) {
        eprintln!("FAIL {}: {}", v.check, v.detail);
    }
    let total = report.verdicts.len();
    let label = if report.passed() { "PASS" } else { "FAIL" };
    eprintln!(
        "{label} ({}/{total} checks) in {:.2}s",
        report.passed_count(),
        report.wall_time
    );
    println!("{}", path.display());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            // help and version go to stderr as well; stdout is reserved for the path
            eprint!("{e}");
            return ExitCode::from(code);
        }
    };
    match execute(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
