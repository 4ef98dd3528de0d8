//! The interactive session: one input line in, transcript text out.

mod format;

use std::fmt::Write;
use std::path::{Path, PathBuf};

pub use format::{format_answers, format_event, format_pdg, format_rejection, format_strata, tuples_computed};

use crate::engine::{self, EvalError};
use crate::storage::{ContextId, Database};
use crate::syntax::{parse_input, parse_program, Command, Input, Rule, SyntaxError};

pub const PROMPT: &str = "DES> ";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Syntax { path: PathBuf, source: SyntaxError },
}

/// A database plus display settings.
#[derive(Debug, Default)]
pub struct Session {
    db: Database,
    verbose: bool,
    /// Show system-generated predicates in dumps.
    system: bool,
    quit: bool,
}

impl Session {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_verbose(verbose: bool) -> Self {
        Session { verbose, ..Self::default() }
    }

    pub fn verbose(&self) -> bool {
        self.verbose
    }

    pub fn has_quit(&self) -> bool {
        self.quit
    }

    pub fn database(&self) -> &Database {
        &self.db
    }

    pub fn database_mut(&mut self) -> &mut Database {
        &mut self.db
    }

    /// Handles one line and returns its output, each line newline-terminated.
    pub fn repl_step(&mut self, line: &str) -> String {
        if line.trim().is_empty() {
            return String::new();
        }
        match parse_input(line) {
            Ok(input) => self.dispatch(input),
            Err(e) => format!("Error: {e}\n"),
        }
    }

    fn dispatch(&mut self, input: Input) -> String {
        match input {
            Input::Query(goal) => match engine::solve_query(&mut self.db, &goal) {
                Ok(outcome) => {
                    let mut out = String::new();
                    for e in &outcome.events {
                        out.push_str(&format_event(e, self.verbose, self.system));
                    }
                    if outcome.undefined {
                        out.push_str("Warning: Some answers may be undefined.\n");
                    }
                    writeln!(out, "{}", format_answers(&outcome.answers)).unwrap();
                    writeln!(out, "{}", tuples_computed(outcome.tuple_count())).unwrap();
                    out
                }
                Err(e) => error(&e),
            },
            Input::Assertion(rule) => match engine::assert_rule(&mut self.db, &rule) {
                Ok(Ok(_)) => String::new(),
                Ok(Err(report)) => format_rejection(&report),
                Err(e) => error(&e),
            },
            Input::Retraction(rule) => match engine::retract(&mut self.db, &rule) {
                0 => "Warning: Nothing retracted.\n".to_string(),
                _ => String::new(),
            },
            Input::Constraint(c) => self.constraint(&c),
            Input::Command(cmd) => self.command(cmd),
        }
    }

    fn constraint(&mut self, c: &Rule) -> String {
        match engine::add_constraint(&mut self.db, c) {
            Ok(Ok(_)) => String::new(),
            Ok(Err(report)) => format_rejection(&report),
            Err(e) => error(&e),
        }
    }

    fn command(&mut self, cmd: Command) -> String {
        let toggle = |flag: &mut bool, value: Option<bool>, what: &str| {
            if let Some(v) = value {
                *flag = v;
            }
            format!("Info: {what} is {}.\n", if *flag { "on" } else { "off" })
        };
        match cmd {
            Command::Pdg => {
                let analysis = self.db.analysis(&ContextId::root());
                format!("{}\n", format_pdg(analysis, self.system))
            }
            Command::Strata => {
                let analysis = self.db.analysis(&ContextId::root());
                format!("{}\n", format_strata(analysis, self.system))
            }
            Command::Verbose(v) => toggle(&mut self.verbose, v, "Verbose output"),
            Command::System(v) => toggle(&mut self.system, v, "Display of system predicates"),
            Command::Quit => {
                self.quit = true;
                String::new()
            }
        }
    }

    /// Loads a program text: rules are stored without constraint checks,
    /// constraints are checked when met.
    pub fn consult_text(&mut self, text: &str) -> Result<String, SyntaxError> {
        let rules = parse_program(text)?;
        let mut out = String::new();
        for rule in rules {
            if rule.is_constraint() {
                out.push_str(&self.constraint(&rule));
            } else if let Err(e) = engine::load_rule(&mut self.db, &rule) {
                out.push_str(&error(&e));
            }
        }
        Ok(out)
    }

    pub fn consult(&mut self, path: &Path) -> Result<String, CliError> {
        let text = read(path)?;
        self.consult_text(&text).map_err(|source| CliError::Syntax { path: path.to_path_buf(), source })
    }

    /// Replays session lines, echoing each after the prompt. Blank lines and
    /// lines starting with `#` (expected output) or `%` (comments) are
    /// skipped. Stops at `/quit`.
    pub fn replay(&mut self, text: &str) -> String {
        let mut out = String::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') || trimmed.starts_with('%') {
                continue;
            }
            writeln!(out, "{PROMPT}{trimmed}").unwrap();
            out.push_str(&self.repl_step(trimmed));
            if self.quit {
                break;
            }
        }
        out
    }

    /// Replays a `.session` file or consults any other file.
    pub fn run_file(&mut self, path: &Path) -> Result<String, CliError> {
        if path.extension().is_some_and(|e| e == "session") {
            Ok(self.replay(&read(path)?))
        } else {
            self.consult(path)
        }
    }
}

/// Runs one file in a fresh session and returns the transcript.
pub fn run_file(path: &Path) -> Result<String, CliError> {
    Session::new().run_file(path)
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn error(e: &EvalError) -> String {
    format!("Error: {e}\n")
}
