use std::process::ExitCode;

use modbath_cli::args::{self, Command};
use modbath_cli::{run_scenario, CliError};

fn real_main() -> Result<(), CliError> {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let config = match args::parse_args(&argv)? {
        Command::Help => {
            println!("{}", args::USAGE);
            return Ok(());
        }
        Command::Run(config) => config,
    };
    let threads = args::thread_count(std::env::var("MODBATH_THREADS").ok().as_deref())?;
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Parse(format!("MODBATH_THREADS: {e}")))?;
    }
    let report = run_scenario(&config)?;
    for line in &report.lines {
        println!("{line}");
    }
    if report.failures > 0 {
        return Err(CliError::SelftestFailed(report.failures));
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("modbath: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
