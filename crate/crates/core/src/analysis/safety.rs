//! Range restriction for rules, constraints and query bodies.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::syntax::{CmpOp, Goal, PredRef, Rule, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// The offending rule, compact form.
    pub rule: String,
    /// A variable name or a goal.
    pub subject: String,
    pub reason: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} in {}", self.subject, self.reason, self.rule)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SafetyReport {
    pub violations: Vec<Violation>,
}

impl SafetyReport {
    pub fn is_safe(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Argument positions a predicate needs bound before it can be called.
/// Only system-generated helper predicates ever have any.
pub type Demand = HashMap<PredRef, Vec<usize>>;

pub fn check_safety(rule: &Rule) -> SafetyReport {
    let mut report = SafetyReport::default();
    check_rule(rule, &mut report);
    report
}

/// Safety of a query, treated as the body of a headless rule.
pub fn check_goal_safety(goal: &Goal) -> SafetyReport {
    check_safety(&Rule::constraint(vec![goal.clone()]))
}

fn check_rule(rule: &Rule, report: &mut SafetyReport) {
    let text = rule.to_string();
    let no_demand = Demand::new();
    let bound = bound_by(&rule.body, &HashSet::new(), &no_demand);
    if let Some(head) = &rule.head {
        let mut seen = HashSet::new();
        for v in head.vars() {
            if !bound.contains(v) && seen.insert(v.clone()) {
                let reason = if rule.body.is_empty() && head.restricting {
                    "makes the restricting fact non-ground"
                } else if rule.body.is_empty() {
                    "makes the fact non-ground"
                } else {
                    "in the head is not bound by the body"
                };
                report.violations.push(Violation {
                    rule: text.clone(),
                    subject: v.name.to_string(),
                    reason: reason.into(),
                });
            }
        }
    }
    for g in &rule.body {
        check_goal(g, &bound, &text, report);
    }
}

fn check_goal(goal: &Goal, bound: &HashSet<Var>, text: &str, report: &mut SafetyReport) {
    let unbound = |vars: Vec<&Var>, what: &str, report: &mut SafetyReport| {
        let mut seen = HashSet::new();
        for v in vars {
            if !bound.contains(v) && seen.insert(v.clone()) {
                report.violations.push(Violation {
                    rule: text.to_string(),
                    subject: v.name.to_string(),
                    reason: format!("in {what} is not bound by a positive goal"),
                });
            }
        }
    };
    match goal {
        Goal::Atom(_) => {}
        Goal::Not(inner) => {
            unbound(inner.free_vars(), &format!("negated goal {goal}"), report);
            check_goal(inner, bound, text, report);
        }
        Goal::Cmp(..) => {
            let mut vars = Vec::new();
            if let Goal::Cmp(_, l, r) = goal {
                l.collect_vars(&mut vars);
                r.collect_vars(&mut vars);
            }
            unbound(vars, &format!("comparison {goal}"), report);
        }
        Goal::Conj(gs) => {
            let inner = bound_by(gs, bound, &Demand::new());
            gs.iter().for_each(|g| check_goal(g, &inner, text, report));
        }
        Goal::Disj(branches) => {
            for b in branches {
                let conj = match b {
                    Goal::Conj(gs) => gs.clone(),
                    g => vec![g.clone()],
                };
                let inner = bound_by(&conj, bound, &Demand::new());
                conj.iter().for_each(|g| check_goal(g, &inner, text, report));
            }
        }
        Goal::Hyp(premise, concl) => {
            for r in premise {
                check_rule(r, report);
            }
            let conj = [(**concl).clone()];
            let inner = bound_by(&conj, bound, &Demand::new());
            check_goal(concl, &inner, text, report);
        }
    }
}

/// Variables bound by a conjunction given already-bound ones, computed to a
/// fixpoint so conjunct order does not matter.
pub fn bound_by(goals: &[Goal], inherited: &HashSet<Var>, demand: &Demand) -> HashSet<Var> {
    let mut bound = inherited.clone();
    loop {
        let before = bound.len();
        for g in goals {
            binds(g, &mut bound, demand);
        }
        if bound.len() == before {
            return bound;
        }
    }
}

fn binds(goal: &Goal, bound: &mut HashSet<Var>, demand: &Demand) {
    match goal {
        Goal::Atom(a) => {
            let inputs = demand.get(&a.pred());
            let ready = inputs.is_none_or(|pos| pos.iter().all(|&i| term_bound(&a.args[i], bound)));
            if ready {
                for v in a.vars() {
                    bound.insert(v.clone());
                }
            }
        }
        Goal::Not(_) => {}
        Goal::Cmp(CmpOp::Eq, l, r) => {
            for (src, dst) in [(l, r), (r, l)] {
                if let Term::Var(v) = dst {
                    if term_bound(src, bound) {
                        bound.insert(v.clone());
                    }
                }
            }
        }
        Goal::Cmp(..) => {}
        Goal::Conj(gs) => {
            let inner = bound_by(gs, bound, demand);
            bound.extend(inner);
        }
        Goal::Disj(branches) => {
            let mut common: Option<HashSet<Var>> = None;
            for b in branches {
                let inner = bound_by(std::slice::from_ref(b), bound, demand);
                common = Some(match common {
                    None => inner,
                    Some(c) => c.intersection(&inner).cloned().collect(),
                });
            }
            bound.extend(common.unwrap_or_default());
        }
        Goal::Hyp(_, concl) => {
            let inner = bound_by(std::slice::from_ref(concl), bound, demand);
            bound.extend(inner);
        }
    }
}

fn term_bound(t: &Term, bound: &HashSet<Var>) -> bool {
    let mut vars = Vec::new();
    t.collect_vars(&mut vars);
    vars.iter().all(|v| bound.contains(*v))
}

impl fmt::Display for SafetyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
