//! Predicate dependency graphs.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;

use crate::syntax::{Goal, PredRef, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Positive,
    Negative,
}

/// `from` depends on `to`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arc {
    pub from: PredRef,
    pub to: PredRef,
    pub sign: Sign,
}

impl fmt::Display for Arc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign {
            Sign::Positive => '+',
            Sign::Negative => '-',
        };
        write!(f, "{}{}{}", self.from, sign, self.to)
    }
}

/// Whether rules inside implication premises contribute to the graph.
///
/// The dynamic graph of a context uses [`PremiseMode::Exclude`]: premises
/// only matter once assumed, and then they are ordinary visible rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PremiseMode {
    Include,
    Exclude,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Pdg {
    pub nodes: BTreeSet<PredRef>,
    /// Ordered by source, then target, then sign.
    pub arcs: BTreeSet<Arc>,
}

impl Pdg {
    pub fn build<'a>(rules: impl IntoIterator<Item = &'a Rule>, mode: PremiseMode) -> Pdg {
        let mut pdg = Pdg::default();
        let mut restricted = HashSet::new();
        for rule in rules {
            pdg.add_rule(rule, mode, &mut restricted);
        }
        // Whoever uses a restricted predicate must see its pruned meaning.
        let induced: Vec<Arc> = pdg
            .arcs
            .iter()
            .filter(|a| a.sign == Sign::Positive && a.from != a.to && restricted.contains(&a.to))
            .map(|a| Arc { sign: Sign::Negative, ..a.clone() })
            .collect();
        pdg.arcs.extend(induced);
        pdg
    }

    fn add_rule(&mut self, rule: &Rule, mode: PremiseMode, restricted: &mut HashSet<PredRef>) {
        let head = rule.head.as_ref().map(|h| h.pred());
        if let Some(h) = &head {
            self.nodes.insert(h.clone());
            if rule.is_restricting() {
                restricted.insert(h.clone());
            }
        }
        let restricting_head = rule.is_restricting();
        for goal in &rule.body {
            goal.visit_atoms(false, &mut |atom, negated, _| {
                let to = atom.pred();
                self.nodes.insert(to.clone());
                let Some(from) = &head else { return };
                // A restricting rule may recurse on its own restricting part.
                let own_restriction = atom.restricting && restricting_head && *from == to;
                let sign =
                    if negated || (atom.restricting && !own_restriction) { Sign::Negative } else { Sign::Positive };
                self.arcs.insert(Arc { from: from.clone(), to, sign });
            });
            if mode == PremiseMode::Include {
                for_each_premise(goal, &mut |r| self.add_rule(r, mode, restricted));
            }
        }
    }

    pub fn contains(&self, p: &PredRef) -> bool {
        self.nodes.contains(p)
    }

    /// Arcs leaving `p`.
    pub fn successors<'a>(&'a self, p: &'a PredRef) -> impl Iterator<Item = &'a Arc> + 'a {
        self.arcs.iter().filter(move |a| &a.from == p)
    }

    /// Nodes and arcs reachable from any of `roots` along dependencies.
    pub fn reachable_from<'a>(&self, roots: impl IntoIterator<Item = &'a PredRef>) -> Pdg {
        let mut seen: BTreeSet<PredRef> = BTreeSet::new();
        let mut queue: VecDeque<PredRef> = VecDeque::new();
        for r in roots {
            if self.contains(r) && seen.insert(r.clone()) {
                queue.push_back(r.clone());
            }
        }
        while let Some(p) = queue.pop_front() {
            for a in self.successors(&p) {
                if seen.insert(a.to.clone()) {
                    queue.push_back(a.to.clone());
                }
            }
        }
        let arcs = self.arcs.iter().filter(|a| seen.contains(&a.from)).cloned().collect();
        Pdg { nodes: seen, arcs }
    }

    /// Drops system-generated predicates and their arcs, for display.
    pub fn without_system(&self) -> Pdg {
        Pdg {
            nodes: self.nodes.iter().filter(|p| !p.is_system()).cloned().collect(),
            arcs: self.arcs.iter().filter(|a| !a.from.is_system() && !a.to.is_system()).cloned().collect(),
        }
    }
}

/// Calls `f` on every premise rule of every implication in `goal`. Premises
/// nested inside a premise rule's body are reached through `f` itself.
fn for_each_premise(goal: &Goal, f: &mut impl FnMut(&Rule)) {
    match goal {
        Goal::Hyp(premise, concl) => {
            premise.iter().for_each(&mut *f);
            for_each_premise(concl, f);
        }
        Goal::Not(g) => for_each_premise(g, f),
        Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| for_each_premise(g, f)),
        Goal::Atom(_) | Goal::Cmp(..) => {}
    }
}

/// The goal dependency graph: the part of `pdg` reachable from `goal`.
pub fn goal_dependency_graph(pdg: &Pdg, goal: &PredRef) -> Pdg {
    pdg.reachable_from([goal])
}

/// Two-line dump used by `/pdg`.
impl fmt::Display for Pdg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self.nodes.iter().map(ToString::to_string).collect();
        let arcs: Vec<String> = self.arcs.iter().map(ToString::to_string).collect();
        writeln!(f, "Nodes: [{}]", nodes.join(","))?;
        write!(f, "Arcs : [{}]", arcs.join(","))
    }
}
