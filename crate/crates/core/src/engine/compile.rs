//! Rules compiled to disjunctive normal form over numbered variable slots.

use std::collections::HashMap;
use std::fmt;

use super::value::{arith, Value};
use super::EvalError;
use crate::storage::RuleId;
use crate::syntax::{ArithOp, Atom, CmpOp, Goal, PredRef, Rule, Term, Var};

/// A predicate together with the part of it being addressed: its regular
/// meaning or its restricting one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PredKey {
    pub pred: PredRef,
    pub restricting: bool,
}

impl PredKey {
    pub fn regular(pred: PredRef) -> Self {
        PredKey { pred, restricting: false }
    }

    pub fn of(atom: &Atom) -> Self {
        PredKey { pred: atom.pred(), restricting: atom.restricting }
    }

    pub fn flip(&self) -> Self {
        PredKey { pred: self.pred.clone(), restricting: !self.restricting }
    }
}

impl fmt::Display for PredKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.restricting {
            f.write_str("-")?;
        }
        write!(f, "{}", self.pred)
    }
}

pub type Bindings = Vec<Option<Value>>;

#[derive(Debug, Clone)]
pub enum CTerm {
    Var(usize),
    Val(Value),
    Arith(ArithOp, Vec<CTerm>),
}

impl CTerm {
    fn collect_slots(&self, out: &mut Vec<usize>) {
        match self {
            CTerm::Var(s) => {
                if !out.contains(s) {
                    out.push(*s)
                }
            }
            CTerm::Val(_) => {}
            CTerm::Arith(_, args) => args.iter().for_each(|a| a.collect_slots(out)),
        }
    }

    pub fn is_bound(&self, b: &Bindings) -> bool {
        match self {
            CTerm::Var(s) => b[*s].is_some(),
            CTerm::Val(_) => true,
            CTerm::Arith(_, args) => args.iter().all(|a| a.is_bound(b)),
        }
    }

    /// Evaluates a bound term.
    pub fn eval(&self, b: &Bindings) -> Result<Value, EvalError> {
        match self {
            CTerm::Var(s) => b[*s].clone().ok_or(EvalError::Instantiation),
            CTerm::Val(v) => Ok(v.clone()),
            CTerm::Arith(op, args) => {
                let vals = args.iter().map(|a| a.eval(b)).collect::<Result<Vec<_>, _>>()?;
                arith(*op, &vals)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct CAtom {
    pub key: PredKey,
    pub args: Vec<CTerm>,
}

impl CAtom {
    fn slots(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.args.iter().for_each(|a| a.collect_slots(&mut out));
        out
    }
}

#[derive(Debug, Clone)]
pub enum Lit {
    Pos(CAtom),
    Neg(CAtom),
    Cmp {
        op: CmpOp,
        lhs: CTerm,
        rhs: CTerm,
        negated: bool,
    },
    /// The conclusion of the rule's implication, proved in the context
    /// that assumes the rule's premise.
    Hyp(CAtom),
}

#[derive(Debug, Clone)]
pub struct Literal {
    pub lit: Lit,
    /// Slots that must be bound before the literal can run.
    pub needs: Vec<usize>,
}

impl Literal {
    pub fn ready(&self, b: &Bindings) -> bool {
        if !self.needs.iter().all(|&s| b[s].is_some()) {
            return false;
        }
        match &self.lit {
            // `X = expr` binds X once the other side is known.
            Lit::Cmp { op: CmpOp::Eq, lhs, rhs, negated: false } => {
                let solvable = |known: &CTerm, other: &CTerm| {
                    known.is_bound(b) && (other.is_bound(b) || matches!(other, CTerm::Var(_)))
                };
                solvable(lhs, rhs) || solvable(rhs, lhs)
            }
            _ => true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CompiledRule {
    pub id: RuleId,
    pub head: Option<CAtom>,
    pub vars: Vec<Var>,
    /// Disjunctive normal form of the body; each alternative is a separate
    /// derivation identity.
    pub alts: Vec<Vec<Literal>>,
    /// Premise of the rule's implication, if any.
    pub premise: Vec<Rule>,
}

impl CompiledRule {
    pub fn slots(&self) -> usize {
        self.vars.len()
    }
}

struct Compiler<'a> {
    slots: HashMap<Var, usize>,
    vars: Vec<Var>,
    inputs: &'a dyn Fn(&PredRef) -> Vec<usize>,
    premise: Vec<Rule>,
}

/// Compiles a flattened rule. `inputs` gives the argument positions a
/// predicate needs bound before it can be called.
pub fn compile(id: RuleId, rule: &Rule, inputs: &dyn Fn(&PredRef) -> Vec<usize>) -> Result<CompiledRule, EvalError> {
    let mut c = Compiler { slots: HashMap::new(), vars: Vec::new(), inputs, premise: Vec::new() };
    let head = rule.head.as_ref().map(|h| c.atom(h));
    let mut alts = Vec::new();
    for alt in dnf(&rule.body) {
        alts.push(alt.into_iter().map(|g| c.literal(g)).collect::<Result<Vec<_>, _>>()?);
    }
    Ok(CompiledRule { id, head, vars: c.vars, alts, premise: c.premise })
}

impl Compiler<'_> {
    fn slot(&mut self, v: &Var) -> usize {
        if let Some(&s) = self.slots.get(v) {
            return s;
        }
        let s = self.vars.len();
        self.slots.insert(v.clone(), s);
        self.vars.push(v.clone());
        s
    }

    fn term(&mut self, t: &Term) -> CTerm {
        match t {
            Term::Var(v) => CTerm::Var(self.slot(v)),
            Term::Const(s) => CTerm::Val(Value::Sym(s.clone())),
            Term::Int(i) => CTerm::Val(Value::Int(*i)),
            Term::Arith(op, args) => CTerm::Arith(*op, args.iter().map(|a| self.term(a)).collect()),
        }
    }

    fn atom(&mut self, a: &Atom) -> CAtom {
        CAtom { key: PredKey::of(a), args: a.args.iter().map(|t| self.term(t)).collect() }
    }

    /// Slots feeding the input positions of a call.
    fn input_slots(&self, a: &CAtom) -> Vec<usize> {
        let mut out = Vec::new();
        for i in (self.inputs)(&a.key.pred) {
            a.args[i].collect_slots(&mut out);
        }
        out
    }

    fn literal(&mut self, g: &Goal) -> Result<Literal, EvalError> {
        Ok(match g {
            Goal::Atom(a) => {
                let lit = self.atom(a);
                Literal { needs: self.input_slots(&lit), lit: Lit::Pos(lit) }
            }
            Goal::Not(inner) => match &**inner {
                Goal::Atom(a) => {
                    let lit = self.atom(a);
                    Literal { needs: lit.slots(), lit: Lit::Neg(lit) }
                }
                Goal::Cmp(op, l, r) => self.comparison(*op, l, r, true),
                other => {
                    return Err(EvalError::Internal(format!(
                        "negation of a compound goal survived flattening: {other}"
                    )))
                }
            },
            Goal::Cmp(op, l, r) => self.comparison(*op, l, r, false),
            Goal::Hyp(premise, concl) => {
                let Goal::Atom(a) = &**concl else {
                    return Err(EvalError::Internal(format!("compound conclusion survived flattening: {concl}")));
                };
                // Disjunction copies the one implication into every alternative.
                if !self.premise.is_empty() && &self.premise != premise {
                    return Err(EvalError::Internal("more than one implication in a rule".into()));
                }
                self.premise = premise.clone();
                let lit = self.atom(a);
                Literal { needs: self.input_slots(&lit), lit: Lit::Hyp(lit) }
            }
            Goal::Conj(_) | Goal::Disj(_) => unreachable!("removed by normalisation"),
        })
    }

    fn comparison(&mut self, op: CmpOp, l: &Term, r: &Term, negated: bool) -> Literal {
        let (lhs, rhs) = (self.term(l), self.term(r));
        let needs = if op == CmpOp::Eq && !negated {
            Vec::new()
        } else {
            let mut out = Vec::new();
            lhs.collect_slots(&mut out);
            rhs.collect_slots(&mut out);
            out
        };
        Literal { lit: Lit::Cmp { op, lhs, rhs, negated }, needs }
    }
}

/// Alternatives of a conjunction of goals. Negations and implications are
/// opaque.
pub fn dnf(goals: &[Goal]) -> Vec<Vec<&Goal>> {
    let mut alts: Vec<Vec<&Goal>> = vec![Vec::new()];
    for g in goals {
        let parts = dnf_goal(g);
        let mut next = Vec::with_capacity(alts.len() * parts.len());
        for a in &alts {
            for p in &parts {
                let mut joined = a.clone();
                joined.extend(p.iter().copied());
                next.push(joined);
            }
        }
        alts = next;
    }
    alts
}

fn dnf_goal(g: &Goal) -> Vec<Vec<&Goal>> {
    match g {
        Goal::Conj(gs) => dnf(gs),
        Goal::Disj(gs) => gs.iter().flat_map(dnf_goal).collect(),
        other => vec![vec![other]],
    }
}
