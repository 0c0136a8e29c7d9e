use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use treeshift_cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::BufWriter::new(std::io::stdout());
    let status = run(cli, &mut stdout);
    let _ = stdout.flush();
    match status {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
