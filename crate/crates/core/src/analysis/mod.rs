//! Static analysis over the rules visible in a context: safety, the
//! predicate dependency graph, stratification and goal dependency graphs.

mod pdg;
mod safety;
mod strata;

pub use pdg::{goal_dependency_graph, Arc, Pdg, PremiseMode, Sign};
pub use safety::{bound_by, check_goal_safety, check_safety, Demand, SafetyReport, Violation};
pub use strata::{negated_open_goals, open_goal, stratify, NonStratifiable, Stratification};

use crate::syntax::Rule;

/// The dependency graph of a rule set together with its stratification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Analysis {
    pub pdg: Pdg,
    pub strata: Stratification,
    /// Set when the graph has a cycle through negation; `strata` then holds
    /// the fallback and results computed with it are undefined.
    pub non_stratifiable: Option<NonStratifiable>,
}

impl Analysis {
    /// Dynamic analysis: only rules actually visible contribute.
    pub fn of<'a>(rules: impl IntoIterator<Item = &'a Rule>) -> Analysis {
        let pdg = Pdg::build(rules, PremiseMode::Exclude);
        match stratify(&pdg) {
            Ok(strata) => Analysis { pdg, strata, non_stratifiable: None },
            Err(e) => Analysis { pdg, strata: e.fallback.clone(), non_stratifiable: Some(e) },
        }
    }
}
