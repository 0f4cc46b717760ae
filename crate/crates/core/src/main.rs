use std::io::{self, Write};
use std::process::ExitCode;

use clap::Parser;
use shrinking_wedge::cli::{run, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli, &mut io::stdin().lock());
    print!("{}", outcome.stdout);
    eprint!("{}", outcome.stderr);
    let _ = io::stdout().flush();
    ExitCode::from(outcome.code as u8)
}
