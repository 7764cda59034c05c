use std::process::ExitCode;

use clap::Parser;
use cogtrack_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(&CliError::Internal(format!("thread pool: {e}")));
        }
    }
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => fail(&e),
    }
}

fn fail(e: &CliError) -> ExitCode {
    eprintln!("cogtrack: {e}");
    ExitCode::from(e.exit_code() as u8)
}
