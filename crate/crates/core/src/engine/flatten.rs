//! Preprocessing that leaves at most one implication per rule, with an
//! atomic conclusion, so a context can be named by a single rule id.

use crate::syntax::{Atom, Goal, Rule, Term};

/// Rewrites `rule` so that
/// - every implication conclusion is an atom,
/// - every negation wraps an atom or a comparison,
/// - the body holds at most one implication.
///
/// Each non-conforming subgoal `G` becomes a call `$pN(V1,...,Vk)` over its
/// free variables, defined by a new rule `$pN(V1,...,Vk) :- G`. Helper rules
/// come first in the result and the rewritten rule last. Premise rules are
/// left alone; they are flattened when assumed.
pub fn flatten_nested_implications(rule: &Rule, fresh: &mut dyn FnMut() -> String) -> Vec<Rule> {
    let mut helpers = Vec::new();
    let mut body: Vec<Goal> = rule.body.iter().map(|g| rewrite(g, fresh, &mut helpers)).collect();
    let mut seen_hyp = false;
    for g in &mut body {
        isolate_hyps(g, &mut seen_hyp, fresh, &mut helpers);
    }
    helpers.push(Rule { head: rule.head.clone(), body });
    helpers
}

fn rewrite(goal: &Goal, fresh: &mut dyn FnMut() -> String, helpers: &mut Vec<Rule>) -> Goal {
    match goal {
        Goal::Atom(_) | Goal::Cmp(..) => goal.clone(),
        Goal::Not(inner) => match **inner {
            Goal::Atom(_) | Goal::Cmp(..) => goal.clone(),
            _ => Goal::Not(Box::new(helper(inner, fresh, helpers))),
        },
        Goal::Conj(gs) => Goal::Conj(gs.iter().map(|g| rewrite(g, fresh, helpers)).collect()),
        Goal::Disj(gs) => Goal::Disj(gs.iter().map(|g| rewrite(g, fresh, helpers)).collect()),
        Goal::Hyp(premise, concl) => {
            let concl = match **concl {
                Goal::Atom(_) => (**concl).clone(),
                _ => helper(concl, fresh, helpers),
            };
            Goal::Hyp(premise.clone(), Box::new(concl))
        }
    }
}

/// Replaces every implication after the first by a helper call.
fn isolate_hyps(goal: &mut Goal, seen: &mut bool, fresh: &mut dyn FnMut() -> String, helpers: &mut Vec<Rule>) {
    match goal {
        Goal::Hyp(..) if !*seen => *seen = true,
        Goal::Hyp(..) => *goal = helper(goal, fresh, helpers),
        Goal::Conj(gs) | Goal::Disj(gs) => gs.iter_mut().for_each(|g| isolate_hyps(g, seen, fresh, helpers)),
        Goal::Not(_) | Goal::Atom(_) | Goal::Cmp(..) => {}
    }
}

/// Defines a helper for `goal` and returns the call replacing it.
fn helper(goal: &Goal, fresh: &mut dyn FnMut() -> String, helpers: &mut Vec<Rule>) -> Goal {
    let name = fresh();
    let args: Vec<Term> = goal.free_vars().into_iter().map(|v| Term::Var(v.clone())).collect();
    let head = Atom::new(&name, args);
    let body = match goal {
        Goal::Conj(gs) => gs.clone(),
        g => vec![g.clone()],
    };
    helpers.extend(flatten_nested_implications(&Rule::new(head.clone(), body), fresh));
    Goal::Atom(head)
}
