//! Tabled, context-aware evaluation: queries, hypothetical goals,
//! restricted predicates and integrity constraints.

mod compile;
mod flatten;
mod solver;
mod table;
mod value;

use std::collections::BTreeMap;

pub use compile::PredKey;
pub use flatten::flatten_nested_implications;
pub use value::{arith, compare, ground_atom, Tuple, Value};

use crate::analysis::{check_goal_safety, check_safety, Analysis, NonStratifiable, SafetyReport};
use crate::storage::{ContextId, Database, Origin, RuleId};
use crate::syntax::{Atom, Goal, Rule, Term, Var, VIEW_PREDICATE};
use solver::Solver;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("unsafe {what}: {details}")]
    Unsafe { what: &'static str, details: String },
    #[error("type error: {0}")]
    Type(String),
    #[error("arithmetic overflow in '{0}'")]
    Overflow(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("instantiation error: a built-in or negated goal was reached with unbound variables")]
    Instantiation,
    #[error("integrity constraints must have a non-empty body")]
    EmptyConstraint,
    #[error("internal error: {0}")]
    Internal(String),
}

impl EvalError {
    fn unsafe_from(what: &'static str, report: &SafetyReport) -> Self {
        // Reasons are grouped per offending rule so each rule prints once.
        let mut groups: Vec<(&str, Vec<String>)> = Vec::new();
        for v in &report.violations {
            let reason = format!("{} {}", v.subject, v.reason);
            match groups.iter_mut().find(|(r, _)| *r == v.rule) {
                Some((_, reasons)) => reasons.push(reason),
                None => groups.push((&v.rule, vec![reason])),
            }
        }
        let details: Vec<String> =
            groups.iter().map(|(rule, reasons)| format!("{} in {rule}", reasons.join(", and "))).collect();
        EvalError::Unsafe { what, details: details.join("; ") }
    }
}

/// A ground answer with the number of distinct (rule, disjunct) supports
/// deriving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Answer {
    pub atom: Atom,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionKind {
    /// A premise rule of an implication.
    Assumed,
    /// A rule added with `/assert` or consulted from a file.
    Asserted,
    /// A new constraint already violated by the database.
    Constraint,
}

/// One violated constraint and its offending instances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintViolation {
    /// Displayed as `ic(V1,...,Vk) :- body.`
    pub constraint: Rule,
    /// Ground `ic(...)` atoms in derivation order, without duplicates.
    pub offending: Vec<Atom>,
}

impl ConstraintViolation {
    pub fn is_nullary(&self) -> bool {
        self.constraint.head.as_ref().is_some_and(|h| h.args.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RejectionReport {
    pub violations: Vec<ConstraintViolation>,
    /// The rule that was not added; absent for a rejected constraint.
    pub rule: Option<Rule>,
    pub kind: RejectionKind,
}

/// Things worth telling the user about while a query runs.
#[derive(Debug, Clone, PartialEq)]
pub enum Event {
    /// The query was rewritten as this temporary view.
    Processing(Rule),
    ContextBuilding {
        ctx: ContextId,
        premise: Vec<Rule>,
    },
    ContextAnalysis {
        ctx: ContextId,
        analysis: Analysis,
    },
    Rejection(RejectionReport),
    NonStratifiable(NonStratifiable),
}

/// Answer-table sizes per context and predicate after a query.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableStats {
    pub entries: BTreeMap<(ContextId, PredKey), usize>,
}

impl TableStats {
    /// Entries of the regular or restricting predicate named `name`, in any
    /// context.
    pub fn count(&self, name: &str) -> usize {
        self.entries.iter().filter(|((_, k), _)| &*k.pred.name == name).map(|(_, n)| n).sum()
    }
}

#[derive(Debug, Clone, Default)]
pub struct QueryOutcome {
    /// Answers in display order: by predicate, then argument-wise.
    pub answers: Vec<Answer>,
    pub events: Vec<Event>,
    /// Set when a cycle through negation was met; answers are not reliable.
    pub undefined: bool,
    pub stats: TableStats,
}

impl QueryOutcome {
    /// Total number of answers counting duplicates.
    pub fn tuple_count(&self) -> usize {
        self.answers.iter().map(|a| a.multiplicity).sum()
    }
}

/// Solves `goal` against the root context. A single atom is solved
/// directly; anything else goes through a temporary `answer` view.
pub fn solve_query(db: &mut Database, goal: &Goal) -> Result<QueryOutcome, EvalError> {
    let report = check_goal_safety(goal);
    if !report.is_safe() {
        return Err(EvalError::unsafe_from("query", &report));
    }
    let mut events = Vec::new();
    let (atom, view) = match goal {
        Goal::Atom(a) => (a.clone(), None),
        _ => {
            let vars = distinct_named_vars(goal.free_vars());
            let head = Atom::new(VIEW_PREDICATE, vars.into_iter().map(Term::Var).collect());
            let view = Rule::new(head.clone(), vec![goal.clone()]);
            events.push(Event::Processing(view.clone()));
            let id = store_flattened(db, &view, ContextId::root(), Origin::View);
            (head, Some(id))
        }
    };
    let mut solver = Solver::new(db);
    let result = solver.query_atom(&atom);
    let (tables_events, undefined, stats) = solver.finish();
    if let Some(id) = view {
        db.remove_with_helpers(id);
    }
    events.extend(tables_events);
    Ok(QueryOutcome { answers: result?, events, undefined, stats })
}

/// Adds a rule to the root context unless it violates a constraint.
pub fn assert_rule(db: &mut Database, rule: &Rule) -> Result<Result<RuleId, RejectionReport>, EvalError> {
    let report = check_safety(rule);
    if !report.is_safe() {
        return Err(EvalError::unsafe_from("rule", &report));
    }
    let id = store_flattened(db, rule, ContextId::root(), Origin::User);
    let violations = check_constraints(db, &ContextId::root());
    match violations {
        Ok(v) if v.is_empty() => Ok(Ok(id)),
        Ok(violations) => {
            db.remove_with_helpers(id);
            Ok(Err(RejectionReport { violations, rule: Some(rule.clone()), kind: RejectionKind::Asserted }))
        }
        Err(e) => {
            db.remove_with_helpers(id);
            Err(e)
        }
    }
}

/// Adds rules without checking constraints, as when consulting a program.
pub fn load_rule(db: &mut Database, rule: &Rule) -> Result<RuleId, EvalError> {
    let report = check_safety(rule);
    if !report.is_safe() {
        return Err(EvalError::unsafe_from("rule", &report));
    }
    Ok(store_flattened(db, rule, ContextId::root(), Origin::User))
}

/// Installs a constraint if the root database satisfies it.
pub fn add_constraint(db: &mut Database, constraint: &Rule) -> Result<Result<RuleId, RejectionReport>, EvalError> {
    if constraint.body.is_empty() {
        return Err(EvalError::EmptyConstraint);
    }
    let report = check_safety(constraint);
    if !report.is_safe() {
        return Err(EvalError::unsafe_from("constraint", &report));
    }
    let id = db.fresh_id();
    let flat = flatten_nested_implications(constraint, &mut || db.fresh_helper());
    let (main, helpers) = flat.split_last().expect("flattening yields the rule itself");
    for h in helpers {
        db.insert(h.clone(), h.clone(), ContextId::root(), Origin::Helper { owner: id });
    }
    let mut solver = Solver::new(db);
    let violation = solver.check_constraint(&ContextId::root(), id, main, constraint);
    solver.finish();
    match violation {
        Ok(None) => {
            db.add_constraint(id, main.clone(), constraint.clone());
            Ok(Ok(id))
        }
        Ok(Some(v)) => {
            db.remove_with_helpers(id);
            Ok(Err(RejectionReport { violations: vec![v], rule: None, kind: RejectionKind::Constraint }))
        }
        Err(e) => {
            db.remove_with_helpers(id);
            Err(e)
        }
    }
}

/// Evaluates every stored constraint in `ctx` with fresh tables.
pub fn check_constraints(db: &mut Database, ctx: &ContextId) -> Result<Vec<ConstraintViolation>, EvalError> {
    let mut solver = Solver::new(db);
    let result = solver.check_all_constraints(ctx);
    solver.finish();
    result
}

/// Removes root user rules equal to `rule` up to renaming.
pub fn retract(db: &mut Database, rule: &Rule) -> usize {
    db.retract_rule(rule)
}

/// Point lookups against the closed world of the root context. Tables are
/// kept between lookups; contexts opened along the way are closed on drop.
pub struct Evaluator<'db> {
    solver: Solver<'db>,
}

impl<'db> Evaluator<'db> {
    pub fn new(db: &'db mut Database) -> Self {
        Evaluator { solver: Solver::new(db) }
    }

    /// Truth of a ground literal: a regular or restricting atom, or the
    /// negation of one.
    pub fn cwa_lookup(&mut self, literal: &Goal) -> Result<bool, EvalError> {
        match literal {
            Goal::Atom(a) => self.solver.ground_lookup(a),
            Goal::Not(inner) => match &**inner {
                Goal::Atom(a) => Ok(!self.solver.ground_lookup(a)?),
                other => Err(EvalError::Internal(format!("not a literal: not {other}"))),
            },
            other => Err(EvalError::Internal(format!("not a literal: {other}"))),
        }
    }
}

impl Drop for Evaluator<'_> {
    fn drop(&mut self) {
        self.solver.finish();
    }
}

/// Free variables in first-appearance order, skipping anonymous ones.
fn distinct_named_vars(vars: Vec<&Var>) -> Vec<Var> {
    let mut out: Vec<Var> = Vec::new();
    for v in vars {
        if !v.is_anonymous() && !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// The constraint as shown in violation reports: `ic(V1,...,Vk) :- body.`
fn constraint_display(constraint: &Rule) -> Rule {
    let mut vars: Vec<&Var> = Vec::new();
    constraint.body.iter().for_each(|g| vars.extend(g.free_vars()));
    let head = Atom::new("ic", distinct_named_vars(vars).into_iter().map(Term::Var).collect());
    Rule::new(head, constraint.body.clone())
}

/// Flattens `rule` and stores the result under `ctx`; returns the id of the
/// rule itself, which owns the helpers.
fn store_flattened(db: &mut Database, rule: &Rule, ctx: ContextId, origin: Origin) -> RuleId {
    let flat = flatten_nested_implications(rule, &mut || db.fresh_helper());
    let (main, helpers) = flat.split_last().expect("flattening yields the rule itself");
    let id = db.fresh_id();
    for h in helpers {
        db.insert(h.clone(), h.clone(), ctx.clone(), Origin::Helper { owner: id });
    }
    db.insert_with_id(id, main.clone(), rule.clone(), ctx, origin);
    id
}
