//! Abstract syntax shared by every stage of the engine.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

/// A variable occurrence.
///
/// `scope` separates variables that share a printed name but must not be
/// identified, e.g. the variables of a premise rule and those of the
/// enclosing rule. Scope 0 is the outermost rule or query.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub name: Arc<str>,
    pub scope: u32,
}

impl Var {
    pub fn new(name: impl Into<Arc<str>>, scope: u32) -> Self {
        Var { name: name.into(), scope }
    }

    pub fn is_anonymous(&self) -> bool {
        self.name.starts_with('_')
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    /// Unary minus, single operand.
    Neg,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub | ArithOp::Neg => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Mod => "mod",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(Var),
    Const(Arc<str>),
    Int(i64),
    /// Only legal as an operand of a built-in comparison.
    Arith(ArithOp, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name, 0))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(name.into())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::Const(_) | Term::Int(_) => true,
            Term::Arith(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars<'a>(&'a self, out: &mut Vec<&'a Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(&v) {
                    out.push(v)
                }
            }
            Term::Const(_) | Term::Int(_) => {}
            Term::Arith(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Term {
        match self {
            Term::Var(v) => Term::Var(f(v)),
            Term::Arith(op, args) => Term::Arith(*op, args.iter().map(|a| a.map_vars(f)).collect()),
            other => other.clone(),
        }
    }
}

/// A predicate symbol, printed as `name/arity`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredRef {
    pub name: Arc<str>,
    pub arity: usize,
}

impl PredRef {
    pub fn new(name: &str, arity: usize) -> Self {
        PredRef { name: name.into(), arity }
    }

    /// Predicates introduced by preprocessing rather than written by a user.
    pub fn is_system(&self) -> bool {
        self.name.starts_with('$')
    }
}

impl fmt::Display for PredRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", super::pretty::symbol(&self.name), self.arity)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub name: Arc<str>,
    pub args: Vec<Term>,
    /// `-p(...)`: the atom names the restricting part of `p`.
    pub restricting: bool,
}

impl Atom {
    pub fn new(name: &str, args: Vec<Term>) -> Self {
        Atom { name: name.into(), args, restricting: false }
    }

    pub fn restricting(name: &str, args: Vec<Term>) -> Self {
        Atom { name: name.into(), args, restricting: true }
    }

    pub fn pred(&self) -> PredRef {
        PredRef { name: self.name.clone(), arity: self.args.len() }
    }

    pub fn arity(&self) -> usize {
        self.args.len()
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    pub fn vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        self.args.iter().for_each(|t| t.collect_vars(&mut out));
        out
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Atom {
        Atom {
            name: self.name.clone(),
            args: self.args.iter().map(|a| a.map_vars(f)).collect(),
            restricting: self.restricting,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "\\=",
            CmpOp::Lt => "<",
            CmpOp::Gt => ">",
            CmpOp::Le => "=<",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Goal {
    Atom(Atom),
    Not(Box<Goal>),
    Cmp(CmpOp, Term, Term),
    Conj(Vec<Goal>),
    Disj(Vec<Goal>),
    /// Embedded implication: assume the premise rules, then prove the conclusion.
    Hyp(Vec<Rule>, Box<Goal>),
}

impl Goal {
    pub fn atom(a: Atom) -> Goal {
        Goal::Atom(a)
    }

    /// Builds a conjunction, collapsing the singleton case.
    pub fn conj(mut goals: Vec<Goal>) -> Goal {
        if goals.len() == 1 {
            goals.pop().unwrap()
        } else {
            Goal::Conj(goals)
        }
    }

    pub fn as_atom(&self) -> Option<&Atom> {
        match self {
            Goal::Atom(a) => Some(a),
            _ => None,
        }
    }

    /// Variables free in the goal, in order of first appearance. Variables
    /// local to premise rules are not free.
    pub fn free_vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        self.collect_free_vars(&mut out);
        out
    }

    pub(crate) fn collect_free_vars<'a>(&'a self, out: &mut Vec<&'a Var>) {
        match self {
            Goal::Atom(a) => a.args.iter().for_each(|t| t.collect_vars(out)),
            Goal::Not(g) => g.collect_free_vars(out),
            Goal::Cmp(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| g.collect_free_vars(out)),
            Goal::Hyp(_, concl) => concl.collect_free_vars(out),
        }
    }

    /// Visits every atom (regular or restricting) reachable without entering
    /// premise rules. The flag is true for atoms under negation.
    pub fn visit_atoms<'a>(&'a self, negated: bool, f: &mut impl FnMut(&'a Atom, bool, bool)) {
        self.visit_atoms_inner(negated, false, f)
    }

    fn visit_atoms_inner<'a>(&'a self, negated: bool, in_conclusion: bool, f: &mut impl FnMut(&'a Atom, bool, bool)) {
        match self {
            Goal::Atom(a) => f(a, negated, in_conclusion),
            Goal::Not(g) => g.visit_atoms_inner(true, in_conclusion, f),
            Goal::Cmp(..) => {}
            Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| g.visit_atoms_inner(negated, in_conclusion, f)),
            Goal::Hyp(_, concl) => concl.visit_atoms_inner(negated, true, f),
        }
    }

    pub fn count_hyps(&self) -> usize {
        match self {
            Goal::Hyp(..) => 1,
            Goal::Not(g) => g.count_hyps(),
            Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().map(Goal::count_hyps).sum(),
            Goal::Atom(_) | Goal::Cmp(..) => 0,
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Goal {
        match self {
            Goal::Atom(a) => Goal::Atom(a.map_vars(f)),
            Goal::Not(g) => Goal::Not(Box::new(g.map_vars(f))),
            Goal::Cmp(op, l, r) => Goal::Cmp(*op, l.map_vars(f), r.map_vars(f)),
            Goal::Conj(gs) => Goal::Conj(gs.iter().map(|g| g.map_vars(f)).collect()),
            Goal::Disj(gs) => Goal::Disj(gs.iter().map(|g| g.map_vars(f)).collect()),
            // Premise rules are closed; renaming stops at their boundary.
            Goal::Hyp(prem, concl) => Goal::Hyp(prem.clone(), Box::new(concl.map_vars(f))),
        }
    }
}

/// A clause. Facts have an empty body; integrity constraints have no head.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub head: Option<Atom>,
    pub body: Vec<Goal>,
}

impl Rule {
    pub fn fact(head: Atom) -> Self {
        Rule { head: Some(head), body: Vec::new() }
    }

    pub fn new(head: Atom, body: Vec<Goal>) -> Self {
        Rule { head: Some(head), body }
    }

    pub fn constraint(body: Vec<Goal>) -> Self {
        Rule { head: None, body }
    }

    pub fn is_fact(&self) -> bool {
        self.head.is_some() && self.body.is_empty()
    }

    pub fn is_constraint(&self) -> bool {
        self.head.is_none()
    }

    pub fn is_restricting(&self) -> bool {
        self.head.as_ref().is_some_and(|h| h.restricting)
    }

    /// The body as a single goal.
    pub fn body_goal(&self) -> Goal {
        Goal::conj(self.body.clone())
    }

    /// Variables of the rule (head first, then body), excluding variables of
    /// nested premise rules.
    pub fn vars(&self) -> Vec<&Var> {
        let mut out = Vec::new();
        if let Some(h) = &self.head {
            h.args.iter().for_each(|t| t.collect_vars(&mut out));
        }
        self.body.iter().for_each(|g| g.collect_free_vars(&mut out));
        out
    }

    /// Renames variables to `_0, _1, ...` in order of appearance, all in
    /// scope 0. Two rules are alpha-equivalent iff their canonical forms are
    /// equal.
    pub fn canonical(&self) -> Rule {
        let mut names: HashMap<Var, Var> = HashMap::new();
        let mut rename = |v: &Var| {
            let n = names.len();
            names.entry(v.clone()).or_insert_with(|| Var::new(format!("_{n}"), 0)).clone()
        };
        Rule {
            head: self.head.as_ref().map(|h| h.map_vars(&mut rename)),
            body: self.body.iter().map(|g| canonical_goal(g, &mut rename)).collect(),
        }
    }

    pub fn alpha_eq(&self, other: &Rule) -> bool {
        self.head.as_ref().map(Atom::pred) == other.head.as_ref().map(Atom::pred)
            && self.body.len() == other.body.len()
            && self.canonical() == other.canonical()
    }

    /// Applies `f` to every variable of this rule, excluding nested premises.
    pub fn map_vars(&self, f: &mut impl FnMut(&Var) -> Var) -> Rule {
        Rule {
            head: self.head.as_ref().map(|h| h.map_vars(f)),
            body: self.body.iter().map(|g| g.map_vars(f)).collect(),
        }
    }
}

fn canonical_goal(g: &Goal, rename: &mut impl FnMut(&Var) -> Var) -> Goal {
    match g {
        Goal::Hyp(prem, concl) => {
            Goal::Hyp(prem.iter().map(Rule::canonical).collect(), Box::new(canonical_goal(concl, rename)))
        }
        Goal::Not(inner) => Goal::Not(Box::new(canonical_goal(inner, rename))),
        Goal::Conj(gs) => Goal::Conj(gs.iter().map(|g| canonical_goal(g, rename)).collect()),
        Goal::Disj(gs) => Goal::Disj(gs.iter().map(|g| canonical_goal(g, rename)).collect()),
        other => other.map_vars(rename),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Pdg,
    Strata,
    Verbose(Option<bool>),
    /// Show system-generated predicates in dumps.
    System(Option<bool>),
    Quit,
}

/// One line of interactive input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Input {
    Query(Goal),
    Assertion(Rule),
    Retraction(Rule),
    Constraint(Rule),
    Command(Command),
}
