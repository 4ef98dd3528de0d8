//! Reference semantics by brute force.
//!
//! Every context is materialized completely, stratum by stratum, with naive
//! iteration over all rules visible in it. Nothing here is shared with the
//! engine beyond the syntax tree: dependency arcs, strata, disjunctive
//! normal form, binding and the context discipline are all recomputed.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use hypodatalog::syntax::{Atom, CmpOp, Goal, Rule, Term, Var};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pred {
    pub name: String,
    pub arity: usize,
}

impl Pred {
    pub fn of(a: &Atom) -> Pred {
        Pred { name: a.name.to_string(), arity: a.args.len() }
    }
}

/// `(from, to, negative)`.
pub type Dep = (Pred, Pred, bool);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    /// A negative dependency lies on a cycle in some context.
    NonStratifiable(Vec<Pred>),
    /// The program leaves the fragment the oracle models faithfully.
    Unsupported(String),
    Stuck(String),
}

pub type Tuple = Vec<Term>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum RuleKey {
    Base(usize),
    Assumed(String),
}

type Support = (RuleKey, usize);

#[derive(Debug, Clone, Default)]
struct Relation {
    plus: HashMap<Tuple, BTreeSet<Support>>,
    minus: HashMap<Tuple, BTreeSet<Support>>,
}

#[derive(Debug, Clone, Default)]
struct Model {
    rels: HashMap<Pred, Relation>,
    restricted: HashSet<Pred>,
}

/// Which part of a predicate a read sees.
#[derive(Clone, Copy)]
enum View {
    Plus,
    Minus,
    Meaning,
}

impl Model {
    fn tuples(&self, p: &Pred, view: View) -> Vec<&Tuple> {
        let Some(rel) = self.rels.get(p) else { return Vec::new() };
        match view {
            View::Plus => rel.plus.keys().collect(),
            View::Minus => rel.minus.keys().collect(),
            View::Meaning => rel.plus.keys().filter(|t| !rel.minus.contains_key(*t)).collect(),
        }
    }
}

#[derive(Clone)]
struct Ctx {
    /// Sorted canonical texts of the assumed rules.
    key: Vec<String>,
    rules: Vec<(RuleKey, Rule)>,
}

type Binding = HashMap<Var, Term>;

pub struct Oracle {
    base: Vec<Rule>,
    models: HashMap<Vec<String>, Rc<Model>>,
}

impl Oracle {
    pub fn new(rules: Vec<Rule>) -> Self {
        Oracle { base: rules, models: HashMap::new() }
    }

    fn root(&self) -> Ctx {
        Ctx {
            key: Vec::new(),
            rules: self.base.iter().cloned().enumerate().map(|(i, r)| (RuleKey::Base(i), r)).collect(),
        }
    }

    /// Answers to an atom at the root, as a bag keyed by the printed atom.
    pub fn answers(&mut self, query: &Atom) -> Result<BTreeMap<String, usize>, OracleError> {
        let root = self.root();
        let model = self.model(&root)?;
        let p = Pred::of(query);
        let mut out = BTreeMap::new();
        let Some(rel) = model.rels.get(&p) else { return Ok(out) };
        let rows: Vec<(&Tuple, usize)> = if query.restricting {
            rel.minus.iter().map(|(t, s)| (t, s.len())).collect()
        } else {
            rel.plus.iter().filter(|(t, _)| !rel.minus.contains_key(*t)).map(|(t, s)| (t, s.len())).collect()
        };
        for (tuple, n) in rows {
            if unify(&query.args, tuple, &Binding::new()).is_some() {
                let atom = Atom { name: query.name.clone(), args: tuple.clone(), restricting: query.restricting };
                out.insert(atom.to_string(), n);
            }
        }
        Ok(out)
    }

    /// Truth of a ground atom at the root.
    pub fn holds(&mut self, atom: &Atom) -> Result<bool, OracleError> {
        Ok(!self.answers(atom)?.is_empty())
    }

    /// Answers to an arbitrary goal through an `answer` view over its free
    /// variables.
    pub fn solve(&self, goal: &Goal) -> Result<BTreeMap<String, usize>, OracleError> {
        let mut vars: Vec<Var> = Vec::new();
        for v in goal.free_vars() {
            if !vars.contains(v) {
                vars.push(v.clone());
            }
        }
        let head = Atom::new("answer", vars.into_iter().map(Term::Var).collect());
        let mut rules = self.base.clone();
        rules.push(Rule::new(head.clone(), vec![goal.clone()]));
        Oracle::new(rules).answers(&head)
    }

    fn model(&mut self, ctx: &Ctx) -> Result<Rc<Model>, OracleError> {
        if let Some(m) = self.models.get(&ctx.key) {
            return Ok(m.clone());
        }
        let rules: Vec<Rule> = ctx.rules.iter().map(|(_, r)| r.clone()).collect();
        let (nodes, deps) = dependencies(&rules);
        let strata = strata(&nodes, &deps).map_err(OracleError::NonStratifiable)?;
        let mut model = Model::default();
        for r in &rules {
            if let Some(h) = r.head.as_ref().filter(|h| h.restricting) {
                model.restricted.insert(Pred::of(h));
            }
        }
        for (_, r) in &ctx.rules {
            if let Some(h) = &r.head {
                let p = Pred::of(h);
                if model.restricted.contains(&p) && r.body.iter().any(|g| nested_mentions(g, &p, false)) {
                    return Err(OracleError::Unsupported(format!(
                        "restricted {} read inside a subgoal of {r}",
                        p.name
                    )));
                }
            }
        }
        let top = strata.values().copied().max().unwrap_or(0);
        for s in 1..=top {
            let layer: Vec<&(RuleKey, Rule)> = ctx
                .rules
                .iter()
                .filter(|(_, r)| r.head.as_ref().is_some_and(|h| !is_helper(h) && strata[&Pred::of(h)] == s))
                .collect();
            loop {
                let snapshot = model.clone();
                let mut derived: Vec<(Pred, bool, Tuple, Support)> = Vec::new();
                for (key, rule) in &layer {
                    let head = rule.head.as_ref().unwrap();
                    let hp = Pred::of(head);
                    for (i, alt) in alternatives(&rule.body).into_iter().enumerate() {
                        let env = Env { ctx, model: &snapshot, head: Some(&hp) };
                        for b in self.conj(&env, &alt, Binding::new())? {
                            let tuple = ground(&head.args, &b)
                                .ok_or_else(|| OracleError::Stuck(format!("head of {rule} not bound")))?;
                            derived.push((hp.clone(), head.restricting, tuple, (key.clone(), i)));
                        }
                    }
                }
                let mut changed = false;
                for (p, restricting, tuple, support) in derived {
                    let rel = model.rels.entry(p).or_default();
                    let side = if restricting { &mut rel.minus } else { &mut rel.plus };
                    changed |= side.entry(tuple).or_default().insert(support);
                }
                if !changed {
                    break;
                }
            }
        }
        let model = Rc::new(model);
        self.models.insert(ctx.key.clone(), model.clone());
        Ok(model)
    }

    /// `ctx` extended with the premise rules not already visible, or `ctx`
    /// itself when every one of them is.
    fn assume(ctx: &Ctx, premise: &[Rule]) -> Option<Ctx> {
        let mut next = ctx.clone();
        for r in premise {
            if next.rules.iter().any(|(_, v)| v.alpha_eq(r)) {
                continue;
            }
            let canon = r.canonical().to_string();
            next.key.push(canon.clone());
            next.rules.push((RuleKey::Assumed(canon), r.clone()));
        }
        if next.rules.len() == ctx.rules.len() {
            return None;
        }
        next.key.sort();
        Some(next)
    }

    fn conj(&mut self, env: &Env, goals: &[Goal], b: Binding) -> Result<Vec<Binding>, OracleError> {
        let mut frontier = vec![(b, vec![false; goals.len()])];
        let mut out = Vec::new();
        while let Some((b, done)) = frontier.pop() {
            let Some(i) = (0..goals.len()).find(|&i| !done[i] && ready(&goals[i], &b, &env.ctx.rules)) else {
                if done.iter().all(|d| *d) {
                    out.push(b);
                    continue;
                }
                return Err(OracleError::Stuck(format!("no ready literal among {goals:?}")));
            };
            for b2 in self.goal(env, &goals[i], &b)? {
                let mut d = done.clone();
                d[i] = true;
                frontier.push((b2, d));
            }
        }
        Ok(out)
    }

    fn goal(&mut self, env: &Env, goal: &Goal, b: &Binding) -> Result<Vec<Binding>, OracleError> {
        match goal {
            Goal::Atom(a) if is_helper(a) => self.inline(env, a, b),
            Goal::Atom(a) => {
                let p = Pred::of(a);
                let view = if a.restricting {
                    View::Minus
                } else if env.model.restricted.contains(&p) && env.head != Some(&p) {
                    View::Meaning
                } else {
                    View::Plus
                };
                Ok(env.model.tuples(&p, view).into_iter().filter_map(|t| unify(&a.args, t, b)).collect())
            }
            Goal::Not(g) => {
                let inner = Env { head: None, ..*env };
                Ok(if self.goal(&inner, g, b)?.is_empty() { vec![b.clone()] } else { Vec::new() })
            }
            Goal::Cmp(op, l, r) => Ok(compare(*op, l, r, b).into_iter().collect()),
            Goal::Conj(gs) => self.conj(env, gs, b.clone()),
            Goal::Disj(gs) => {
                let mut out = Vec::new();
                for g in gs {
                    out.extend(self.goal(env, g, b)?);
                }
                Ok(out)
            }
            Goal::Hyp(premise, concl) => match Oracle::assume(env.ctx, premise) {
                // Nothing new: the conclusion is part of the current fixpoint.
                None => {
                    let head = if concl.as_atom().is_some() { env.head } else { None };
                    self.goal(&Env { head, ..*env }, concl, b)
                }
                Some(target) => {
                    let model = self.model(&target)?;
                    let inner = Env { ctx: &target, model: &model, head: None };
                    self.goal(&inner, concl, b)
                }
            },
        }
    }

    /// Helper predicates introduced by flattening are expanded in place
    /// rather than tabled, so their input positions need no special care.
    fn inline(&mut self, env: &Env, a: &Atom, b: &Binding) -> Result<Vec<Binding>, OracleError> {
        let mut out = Vec::new();
        for rule in helper_rules(&env.ctx.rules, a) {
            let head = rule.head.as_ref().unwrap();
            let mut local = Binding::new();
            for (h, arg) in head.args.iter().zip(&a.args) {
                if let (Term::Var(v), Some(val)) = (h, subst(arg, b)) {
                    local.insert(v.clone(), val);
                }
            }
            let inner = Env { head: None, ..*env };
            for lb in self.conj(&inner, &rule.body, local)? {
                let tuple = ground(&head.args, &lb).ok_or_else(|| OracleError::Stuck(format!("helper {rule}")))?;
                out.extend(unify(&a.args, &tuple, b));
            }
        }
        Ok(out)
    }
}

fn is_helper(a: &Atom) -> bool {
    a.name.starts_with('$')
}

fn helper_rules<'a>(rules: &'a [(RuleKey, Rule)], a: &Atom) -> Vec<&'a Rule> {
    rules
        .iter()
        .map(|(_, r)| r)
        .filter(|r| r.head.as_ref().is_some_and(|h| h.name == a.name && h.args.len() == a.args.len()))
        .collect()
}

#[derive(Clone, Copy)]
struct Env<'a> {
    ctx: &'a Ctx,
    model: &'a Model,
    /// Head predicate of the rule being evaluated; its own reads see the
    /// unrestricted meaning under construction.
    head: Option<&'a Pred>,
}

fn nested_mentions(g: &Goal, p: &Pred, nested: bool) -> bool {
    match g {
        Goal::Atom(a) => nested && &Pred::of(a) == p,
        Goal::Cmp(..) => false,
        Goal::Not(inner) => match &**inner {
            Goal::Atom(_) => false,
            other => nested_mentions(other, p, true),
        },
        Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().any(|g| nested_mentions(g, p, nested)),
        Goal::Hyp(_, concl) => nested_mentions(concl, p, true),
    }
}

fn ready(g: &Goal, b: &Binding, rules: &[(RuleKey, Rule)]) -> bool {
    let bound = |t: &Term| match t {
        Term::Var(v) => b.contains_key(v),
        _ => true,
    };
    match g {
        Goal::Cmp(CmpOp::Eq, l, r) => bound(l) || bound(r),
        Goal::Cmp(_, l, r) => bound(l) && bound(r),
        _ => needs(g, rules).iter().all(|v| b.contains_key(v)),
    }
}

/// Variables a goal cannot run without: those of negations and
/// comparisons that no atom beside them binds.
fn needs(g: &Goal, rules: &[(RuleKey, Rule)]) -> Vec<Var> {
    match g {
        Goal::Atom(a) if is_helper(a) => {
            let mut out = Vec::new();
            for r in helper_rules(rules, a) {
                let inner = needs(&Goal::Conj(r.body.clone()), rules);
                for (h, arg) in r.head.as_ref().unwrap().args.iter().zip(&a.args) {
                    if let (Term::Var(hv), Term::Var(v)) = (h, arg) {
                        if inner.contains(hv) {
                            out.push(v.clone());
                        }
                    }
                }
            }
            out
        }
        Goal::Atom(_) => Vec::new(),
        Goal::Not(_) | Goal::Cmp(..) => g.free_vars().into_iter().cloned().collect(),
        Goal::Hyp(_, concl) => needs(concl, rules),
        Goal::Disj(gs) => gs.iter().flat_map(|g| needs(g, rules)).collect(),
        Goal::Conj(gs) => {
            let mut produced = Vec::new();
            for g in gs {
                body_atoms_positive(g, &mut produced);
            }
            gs.iter().flat_map(|g| needs(g, rules)).filter(|v| !produced.contains(v)).collect()
        }
    }
}

fn body_atoms_positive(g: &Goal, out: &mut Vec<Var>) {
    match g {
        Goal::Atom(a) => out.extend(a.vars().into_iter().cloned()),
        Goal::Conj(gs) => gs.iter().for_each(|g| body_atoms_positive(g, out)),
        Goal::Hyp(_, concl) => body_atoms_positive(concl, out),
        _ => {}
    }
}

fn subst(t: &Term, b: &Binding) -> Option<Term> {
    match t {
        Term::Var(v) => b.get(v).cloned(),
        Term::Const(_) | Term::Int(_) => Some(t.clone()),
        Term::Arith(..) => None,
    }
}

fn ground(args: &[Term], b: &Binding) -> Option<Tuple> {
    args.iter().map(|t| subst(t, b)).collect()
}

fn unify(args: &[Term], tuple: &[Term], b: &Binding) -> Option<Binding> {
    let mut out = b.clone();
    for (arg, val) in args.iter().zip(tuple) {
        match arg {
            Term::Var(v) => match out.get(v) {
                Some(known) if known != val => return None,
                Some(_) => {}
                None => {
                    out.insert(v.clone(), val.clone());
                }
            },
            other => {
                if other != val {
                    return None;
                }
            }
        }
    }
    Some(out)
}

fn compare(op: CmpOp, l: &Term, r: &Term, b: &Binding) -> Option<Binding> {
    match (op, subst(l, b), subst(r, b)) {
        (CmpOp::Eq, Some(x), Some(y)) => (x == y).then(|| b.clone()),
        (CmpOp::Eq, Some(x), None) | (CmpOp::Eq, None, Some(x)) => {
            let Term::Var(v) = (if subst(l, b).is_none() { l } else { r }) else { return None };
            let mut out = b.clone();
            out.insert(v.clone(), x);
            Some(out)
        }
        (CmpOp::Ne, Some(x), Some(y)) => (x != y).then(|| b.clone()),
        _ => None,
    }
}

/// Disjunctive normal form of a conjunction: implications and negations
/// are opaque.
fn alternatives(goals: &[Goal]) -> Vec<Vec<Goal>> {
    let mut alts = vec![Vec::new()];
    for g in goals {
        let parts: Vec<Vec<Goal>> = match g {
            Goal::Conj(gs) => alternatives(gs),
            Goal::Disj(gs) => gs.iter().flat_map(|g| alternatives(std::slice::from_ref(g))).collect(),
            other => vec![vec![other.clone()]],
        };
        alts = alts.iter().flat_map(|a| parts.iter().map(move |p| a.iter().chain(p).cloned().collect())).collect();
    }
    alts
}

/// Predicates and dependency arcs of a rule set. Premise rules are not
/// looked into; implication conclusions are.
pub fn dependencies(rules: &[Rule]) -> (BTreeSet<Pred>, BTreeSet<Dep>) {
    let mut nodes = BTreeSet::new();
    let mut deps = BTreeSet::new();
    let mut restricted = BTreeSet::new();
    for r in rules {
        let head = r.head.as_ref();
        if let Some(h) = head {
            nodes.insert(Pred::of(h));
            if h.restricting {
                restricted.insert(Pred::of(h));
            }
        }
        let mut seen = Vec::new();
        for g in &r.body {
            body_atoms(g, false, &mut seen);
        }
        for (a, negated) in seen {
            let to = Pred::of(&a);
            nodes.insert(to.clone());
            if let Some(h) = head {
                let from = Pred::of(h);
                let self_restriction = a.restricting && h.restricting && from == to;
                deps.insert((from, to, negated || (a.restricting && !self_restriction)));
            }
        }
    }
    let induced: Vec<Dep> = deps
        .iter()
        .filter(|(f, t, neg)| !neg && f != t && restricted.contains(t))
        .map(|(f, t, _)| (f.clone(), t.clone(), true))
        .collect();
    deps.extend(induced);
    (nodes, deps)
}

fn body_atoms(g: &Goal, negated: bool, out: &mut Vec<(Atom, bool)>) {
    match g {
        Goal::Atom(a) => out.push((a.clone(), negated)),
        Goal::Not(inner) => body_atoms(inner, true, out),
        Goal::Cmp(..) => {}
        Goal::Conj(gs) | Goal::Disj(gs) => gs.iter().for_each(|g| body_atoms(g, negated, out)),
        Goal::Hyp(_, concl) => body_atoms(concl, negated, out),
    }
}

/// True when `to` can reach `from` along arcs, closing a cycle through the
/// arc `from -> to`.
pub fn on_cycle(deps: &BTreeSet<Dep>, from: &Pred, to: &Pred) -> bool {
    let mut stack = vec![to];
    let mut seen = HashSet::new();
    while let Some(p) = stack.pop() {
        if p == from {
            return true;
        }
        if seen.insert(p) {
            stack.extend(deps.iter().filter(|(f, _, _)| f == p).map(|(_, t, _)| t));
        }
    }
    false
}

/// Least strata, or the first negative arc found on a cycle.
pub fn strata(nodes: &BTreeSet<Pred>, deps: &BTreeSet<Dep>) -> Result<BTreeMap<Pred, usize>, Vec<Pred>> {
    if let Some((f, t, _)) = deps.iter().find(|(f, t, neg)| *neg && on_cycle(deps, f, t)) {
        return Err(vec![f.clone(), t.clone()]);
    }
    let mut s: BTreeMap<Pred, usize> = nodes.iter().map(|p| (p.clone(), 1)).collect();
    loop {
        let mut changed = false;
        for (f, t, neg) in deps {
            let need = s[t] + usize::from(*neg);
            if s[f] < need {
                s.insert(f.clone(), need);
                changed = true;
            }
        }
        if !changed {
            return Ok(s);
        }
    }
}
