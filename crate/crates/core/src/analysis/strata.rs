//! Stratification and the open goals that must be solved ahead of a query.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use super::pdg::{Pdg, Sign};
use crate::syntax::{Atom, PredRef, Term, Var};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stratification {
    pub strata: BTreeMap<PredRef, usize>,
}

impl Stratification {
    /// Stratum of `p`; predicates unknown to the graph sit in stratum 1.
    pub fn of(&self, p: &PredRef) -> usize {
        self.strata.get(p).copied().unwrap_or(1)
    }

    pub fn max(&self) -> usize {
        self.strata.values().copied().max().unwrap_or(1)
    }

    pub fn without_system(&self) -> Stratification {
        Stratification {
            strata: self.strata.iter().filter(|(p, _)| !p.is_system()).map(|(p, s)| (p.clone(), *s)).collect(),
        }
    }
}

/// `[(p/1,1),(q/1,2)]`, ordered by stratum and then by predicate.
impl fmt::Display for Stratification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut entries: Vec<(&PredRef, &usize)> = self.strata.iter().collect();
        entries.sort_by(|a, b| a.1.cmp(b.1).then_with(|| a.0.cmp(b.0)));
        let parts: Vec<String> = entries.iter().map(|(p, s)| format!("({p},{s})")).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

/// A negative dependency lies on a cycle.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("non-stratifiable program: cycle through negation {}", display_cycle(.cycle))]
pub struct NonStratifiable {
    /// `cycle[0]` negatively depends on `cycle[1]`, which depends on
    /// `cycle[2]`, and so on back to `cycle[0]`.
    pub cycle: Vec<PredRef>,
    /// Strata computed with the offending arcs weakened to positive ones, so
    /// evaluation can proceed with results flagged undefined.
    pub fallback: Stratification,
}

fn display_cycle(cycle: &[PredRef]) -> String {
    let mut parts: Vec<String> = cycle.iter().map(ToString::to_string).collect();
    if let Some(first) = cycle.first() {
        parts.push(first.to_string());
    }
    parts.join(" <- ")
}

/// The least stratification of `pdg`.
pub fn stratify(pdg: &Pdg) -> Result<Stratification, NonStratifiable> {
    let mut graph: DiGraph<PredRef, Sign> = DiGraph::new();
    let mut index: HashMap<&PredRef, NodeIndex> = HashMap::new();
    for p in &pdg.nodes {
        index.insert(p, graph.add_node(p.clone()));
    }
    for a in &pdg.arcs {
        graph.add_edge(index[&a.from], index[&a.to], a.sign);
    }
    let mut component = vec![0usize; graph.node_count()];
    for (i, scc) in tarjan_scc(&graph).iter().enumerate() {
        for n in scc {
            component[n.index()] = i;
        }
    }
    let bad_arc = pdg
        .arcs
        .iter()
        .find(|a| a.sign == Sign::Negative && component[index[&a.from].index()] == component[index[&a.to].index()]);

    // Arcs inside a component are weakened to positive for the fallback.
    let same = |a: &super::pdg::Arc| component[index[&a.from].index()] == component[index[&a.to].index()];
    let mut strata: BTreeMap<PredRef, usize> = pdg.nodes.iter().map(|p| (p.clone(), 1)).collect();
    loop {
        let mut changed = false;
        for a in &pdg.arcs {
            let need = match a.sign {
                Sign::Negative if !same(a) => strata[&a.to] + 1,
                _ => strata[&a.to],
            };
            let s = strata.get_mut(&a.from).unwrap();
            if *s < need {
                *s = need;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let result = Stratification { strata };
    match bad_arc {
        None => Ok(result),
        Some(a) => {
            let mut cycle = vec![a.from.clone()];
            cycle.extend(path(pdg, &a.to, &a.from));
            Err(NonStratifiable { cycle, fallback: result })
        }
    }
}

/// Shortest dependency path from `from` to `to`, excluding `to` itself.
fn path(pdg: &Pdg, from: &PredRef, to: &PredRef) -> Vec<PredRef> {
    let mut prev: HashMap<PredRef, PredRef> = HashMap::new();
    let mut queue = VecDeque::from([from.clone()]);
    while let Some(p) = queue.pop_front() {
        if &p == to {
            let mut out = Vec::new();
            let mut cur = p;
            while &cur != from {
                let before = prev[&cur].clone();
                out.push(before.clone());
                cur = before;
            }
            out.reverse();
            return out;
        }
        for a in pdg.successors(&p) {
            if !prev.contains_key(&a.to) && &a.to != from {
                prev.insert(a.to.clone(), p.clone());
                queue.push_back(a.to.clone());
            }
        }
    }
    vec![from.clone()]
}

/// Open goals `q(X1,...,Xn)` for every predicate `q` the goal dependency
/// graph reaches through a negative arc, lowest stratum first. The queried
/// predicate itself is never included.
pub fn negated_open_goals(gdg: &Pdg, strat: &Stratification, goal: Option<&PredRef>) -> Vec<Atom> {
    let mut targets: Vec<&PredRef> =
        gdg.arcs.iter().filter(|a| a.sign == Sign::Negative && Some(&a.to) != goal).map(|a| &a.to).collect();
    targets.sort_by(|a, b| strat.of(a).cmp(&strat.of(b)).then_with(|| a.cmp(b)));
    targets.dedup();
    targets.into_iter().map(open_goal).collect()
}

/// `p(X1,...,Xn)` with fresh variables.
pub fn open_goal(p: &PredRef) -> Atom {
    let args = (1..=p.arity).map(|i| Term::Var(Var::new(format!("X{i}"), 0))).collect();
    Atom::new(&p.name, args)
}

#[cfg(test)]
mod tests {
    use super::super::pdg::{goal_dependency_graph, PremiseMode};
    use super::*;
    use crate::syntax::parse_program;

    fn strat(text: &str, mode: PremiseMode) -> Result<Stratification, NonStratifiable> {
        stratify(&Pdg::build(&parse_program(text).unwrap(), mode))
    }

    const ROUTE: &str = "route(X,Y) :- connected(X,Y) ; connected(Y,X).
        route(X,Y) :- route(X,Z), route(Z,Y).
        no_route(X,Y) :- station(X), station(Y), not route(X,Y).";

    #[test]
    fn route_strata() {
        let s = strat(ROUTE, PremiseMode::Include).unwrap();
        assert_eq!(s.to_string(), "[(connected/2,1),(route/2,1),(station/1,1),(no_route/2,2)]");
    }

    #[test]
    fn restricted_route_strata() {
        let text = "route(X,Y) :- connected(X,Y) ; connected(Y,X).
            route(X,Y) :- route(X,Z), route(Z,Y).
            station(a).
            restricted_route(X,Y) :- (-connected(A,B) :- connected(A,B), closed(A)) /\\
                (-connected(A,B) :- connected(A,B), closed(B)) => route(X,Y).";
        let s = strat(text, PremiseMode::Include).unwrap();
        assert_eq!(s.to_string(), "[(closed/1,1),(connected/2,1),(station/1,1),(restricted_route/2,2),(route/2,2)]");
    }

    #[test]
    fn dynamic_strata_dumps() {
        let text = "p(X) :- t(X).\nq(X) :- (p(Y) :- t(Y), not r(Y)) => s(X).";
        assert_eq!(strat(text, PremiseMode::Exclude).unwrap().to_string(), "[(p/1,1),(q/1,1),(s/1,1),(t/1,1)]");
        assert_eq!(strat(text, PremiseMode::Include).unwrap().to_string(), "[(q/1,1),(r/1,1),(s/1,1),(t/1,1),(p/1,2)]");
    }

    #[test]
    fn negative_self_loop() {
        let err = strat("p :- not p.", PremiseMode::Exclude).unwrap_err();
        assert_eq!(err.cycle, vec![PredRef::new("p", 0)]);
        assert_eq!(err.to_string(), "non-stratifiable program: cycle through negation p/0 <- p/0");
    }

    #[test]
    fn negative_cycle_reported() {
        let err = strat("p :- q.\nq :- r.\nr :- not p.", PremiseMode::Exclude).unwrap_err();
        assert_eq!(err.cycle.len(), 3);
        assert_eq!(err.cycle[0], PredRef::new("r", 0));
        assert!(err.fallback.max() <= 3);
    }

    #[test]
    fn restricted_predicate_below_dependents() {
        let s = strat("p(1).\n-p(X) :- p(X), X mod 2 = 1.\nq(X) :- p(X).", PremiseMode::Exclude).unwrap();
        assert!(s.of(&PredRef::new("q", 1)) > s.of(&PredRef::new("p", 1)));
    }

    #[test]
    fn open_goals() {
        let pdg = Pdg::build(&parse_program(ROUTE).unwrap(), PremiseMode::Include);
        let s = stratify(&pdg).unwrap();
        let nr = PredRef::new("no_route", 2);
        let goals = negated_open_goals(&goal_dependency_graph(&pdg, &nr), &s, Some(&nr));
        assert_eq!(goals.iter().map(ToString::to_string).collect::<Vec<_>>(), vec!["route(X1,X2)"]);

        let text = "p(X) :- t(X).\nq(X) :- (p(Y) :- t(Y), not r(Y)) => s(X).";
        let pdg = Pdg::build(&parse_program(text).unwrap(), PremiseMode::Include);
        let s = stratify(&pdg).unwrap();
        let p = PredRef::new("p", 1);
        let goals = negated_open_goals(&goal_dependency_graph(&pdg, &p), &s, Some(&p));
        assert_eq!(goals.iter().map(ToString::to_string).collect::<Vec<_>>(), vec!["r(X1)"]);

        let pos = Pdg::build(&parse_program("a :- b.\nb :- c.").unwrap(), PremiseMode::Exclude);
        assert!(negated_open_goals(&pos, &stratify(&pos).unwrap(), None).is_empty());
    }
}
