use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use hypodatalog::cli::{Session, PROMPT};

/// Hypothetical Datalog REPL.
#[derive(Parser)]
#[command(version, about)]
struct Args {
    /// Program file to consult before starting; may be repeated.
    #[arg(long, value_name = "FILE")]
    load: Vec<PathBuf>,
    /// Replay a session file and exit.
    #[arg(long, value_name = "SESSION")]
    run: Option<PathBuf>,
    /// Show context building and per-context analyses.
    #[arg(long)]
    verbose: bool,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut session = Session::with_verbose(args.verbose);
    for path in &args.load {
        match session.consult(path) {
            Ok(out) => print!("{out}"),
            Err(e) => {
                eprintln!("Error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    if let Some(path) = &args.run {
        return match session.run_file(path) {
            Ok(out) => {
                print!("{out}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("Error: {e}");
                ExitCode::from(1)
            }
        };
    }
    repl(&mut session)
}

fn repl(session: &mut Session) -> ExitCode {
    let stdin = io::stdin();
    let mut stdout = io::stdout();
    let mut line = String::new();
    while !session.has_quit() {
        print!("{PROMPT}");
        let _ = stdout.flush();
        line.clear();
        match stdin.lock().read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => print!("{}", session.repl_step(&line)),
            Err(e) => {
                eprintln!("Error: {e}");
                return ExitCode::from(1);
            }
        }
    }
    ExitCode::SUCCESS
}
