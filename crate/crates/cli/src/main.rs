use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use signed_sinkhorn_cli::args::Cli;
use signed_sinkhorn_cli::commands::run;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let code = match run(cli, &mut out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    let _ = out.flush();
    ExitCode::from(code as u8)
}
