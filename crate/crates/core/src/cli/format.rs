//! Rendering of answers, reports and events in transcript form.

use std::fmt::Write;

use crate::analysis::Analysis;
use crate::engine::{Answer, Event, RejectionKind, RejectionReport};
use crate::syntax::rule_spaced;

/// `{ a1, a2, ... }` with duplicates repeated; `{ }` when empty.
pub fn format_answers(answers: &[Answer]) -> String {
    let items: Vec<String> =
        answers.iter().flat_map(|a| std::iter::repeat_n(a.atom.to_string(), a.multiplicity)).collect();
    if items.is_empty() {
        "{ }".to_string()
    } else {
        format!("{{ {} }}", items.join(", "))
    }
}

pub fn tuples_computed(n: usize) -> String {
    if n == 1 {
        "Info: 1 tuple computed.".to_string()
    } else {
        format!("Info: {n} tuples computed.")
    }
}

pub fn format_rejection(report: &RejectionReport) -> String {
    let mut out = String::new();
    for v in &report.violations {
        writeln!(out, "Error: Integrity constraint violation.").unwrap();
        writeln!(out, "{}", rule_spaced(&v.constraint)).unwrap();
        if !v.is_nullary() {
            let atoms: Vec<String> = v.offending.iter().map(ToString::to_string).collect();
            writeln!(out, "Offending values in database: [{}]", atoms.join(",")).unwrap();
        }
    }
    if let Some(rule) = &report.rule {
        let verb = match report.kind {
            RejectionKind::Assumed => "assumed",
            _ => "asserted",
        };
        // A bare nullary violation keeps the whole notice on one line.
        if report.violations.iter().all(|v| v.is_nullary()) {
            writeln!(out, "Info: The following rule cannot be {verb}: {rule}").unwrap();
        } else {
            writeln!(out, "Info: The following rule cannot be {verb}:").unwrap();
            writeln!(out, "{rule}").unwrap();
        }
    }
    out
}

/// The analysis dump printed by `/pdg` and `/strata` and in verbose mode.
pub fn format_pdg(analysis: &Analysis, system: bool) -> String {
    if system {
        analysis.pdg.to_string()
    } else {
        analysis.pdg.without_system().to_string()
    }
}

pub fn format_strata(analysis: &Analysis, system: bool) -> String {
    if system {
        analysis.strata.to_string()
    } else {
        analysis.strata.without_system().to_string()
    }
}

/// Renders one engine event; quiet events render as nothing unless verbose.
pub fn format_event(event: &Event, verbose: bool, system: bool) -> String {
    let mut out = String::new();
    match event {
        Event::Processing(view) => {
            writeln!(out, "Info: Processing:").unwrap();
            writeln!(out, "  {view}").unwrap();
        }
        Event::ContextBuilding { ctx, premise } if verbose => {
            writeln!(out, "Info: Building hypothetical computation context {ctx} for:").unwrap();
            for r in premise {
                writeln!(out, "{}", rule_spaced(r)).unwrap();
            }
        }
        Event::ContextAnalysis { analysis, .. } if verbose => {
            writeln!(out, "Info: PDG:").unwrap();
            writeln!(out, "{}", format_pdg(analysis, system)).unwrap();
            writeln!(out, "Info: Strata:").unwrap();
            writeln!(out, "{}", format_strata(analysis, system)).unwrap();
        }
        Event::Rejection(report) => out.push_str(&format_rejection(report)),
        Event::NonStratifiable(e) => {
            writeln!(out, "Warning: {e}; results may be undefined.").unwrap();
        }
        _ => {}
    }
    out
}
