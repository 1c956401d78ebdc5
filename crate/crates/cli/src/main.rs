use std::process::ExitCode;

use clap::Parser;
use densecode_cli::{
    cmd_capacity, cmd_crossover, cmd_sweep, cmd_verify, configure_threads, exit, Cli, Command, Failure,
};

fn run(cli: Cli) -> Result<i32, Failure> {
    configure_threads(std::env::var("DENSECODE_THREADS").ok().as_deref())?;
    match cli.command {
        Command::Capacity(args) => {
            let (json, code) = cmd_capacity(&args)?;
            println!("{json}");
            if code == exit::NOT_CONVERGED {
                eprintln!("warning: optimizer did not converge");
            }
            Ok(code)
        }
        Command::Sweep(args) => {
            let code = cmd_sweep(&args)?;
            if code == exit::NOT_CONVERGED {
                eprintln!("warning: optimizer did not converge at some grid points");
            }
            Ok(code)
        }
        Command::Crossover(args) => {
            print!("{}", cmd_crossover(&args)?);
            Ok(exit::OK)
        }
        Command::Verify(args) => {
            let (report, code) = cmd_verify(&args);
            print!("{report}");
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE as u8 } else { exit::OK as u8 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("densecode: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
