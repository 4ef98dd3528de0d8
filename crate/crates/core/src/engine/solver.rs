//! The evaluator proper.
//!
//! Each call `(context, predicate, pattern)` is expanded at most once per
//! pass of the innermost active driver. A driver repeats passes until one
//! adds no tuple, then marks every call of that pass complete. Negation,
//! restricted predicates and implications start nested drivers, so the
//! strata of the current context are respected lazily; open goals are also
//! solved up front, lowest stratum first, as the dependency graph dictates.

use std::collections::{HashMap, HashSet};
use std::rc::Rc;

use indexmap::IndexSet;

use super::compile::{compile, Bindings, CAtom, CTerm, CompiledRule, Lit, Literal, PredKey};
use super::table::{Call, Pattern, Tables};
use super::value::{compare, ground_atom, Tuple, Value};
use super::{
    constraint_display, store_flattened, Answer, ConstraintViolation, EvalError, Event, RejectionKind, RejectionReport,
    TableStats,
};
use crate::analysis::{goal_dependency_graph, negated_open_goals};
use crate::storage::{ContextId, Database, Origin, RuleId};
use crate::syntax::{Atom, CmpOp, PredRef, Rule, Term, Var};

pub struct Solver<'db> {
    db: &'db mut Database,
    t: Tables,
    compiled: HashMap<RuleId, Rc<CompiledRule>>,
    events: Vec<Event>,
    /// Rejections already reported, so re-entering a context stays quiet.
    reported: HashSet<(ContextId, Rule)>,
    non_stratifiable_reported: bool,
}

impl<'db> Solver<'db> {
    pub fn new(db: &'db mut Database) -> Self {
        Solver {
            db,
            t: Tables::default(),
            compiled: HashMap::new(),
            events: Vec::new(),
            reported: HashSet::new(),
            non_stratifiable_reported: false,
        }
    }

    /// Closes the contexts opened so far and hands back what was observed.
    pub fn finish(&mut self) -> (Vec<Event>, bool, TableStats) {
        let stats = self.t.stats();
        for ctx in std::mem::take(&mut self.t.opened).iter().rev() {
            self.db.close_context(ctx);
        }
        (std::mem::take(&mut self.events), self.t.undefined, stats)
    }

    /// Answers to a single (regular or restricting) atom at the root.
    pub fn query_atom(&mut self, atom: &Atom) -> Result<Vec<Answer>, EvalError> {
        let ctx = ContextId::root();
        let key = PredKey::of(atom);
        let pattern: Pattern = atom.args.iter().map(Value::from_term).collect();
        self.prepare(&ctx, &key.pred)?;
        self.saturate(&ctx, &key, pattern)?;
        let mut answers: Vec<(Tuple, usize)> = Vec::new();
        if let Some(rel) = self.t.relation(&ctx, &key) {
            for (tuple, entry) in rel {
                if (entry.removed && !key.restricting) || !matches_atom(atom, tuple) {
                    continue;
                }
                answers.push((tuple.clone(), entry.supports.len()));
            }
        }
        answers.sort();
        Ok(answers
            .into_iter()
            .map(|(t, n)| Answer { atom: ground_atom(&atom.name, atom.restricting, &t), multiplicity: n })
            .collect())
    }

    /// Truth of a ground atom under the closed world of the root context.
    pub fn ground_lookup(&mut self, atom: &Atom) -> Result<bool, EvalError> {
        let ctx = ContextId::root();
        let key = PredKey::of(atom);
        let tuple: Option<Tuple> = atom.args.iter().map(Value::from_term).collect();
        let tuple = tuple.ok_or(EvalError::Instantiation)?;
        self.prepare(&ctx, &key.pred)?;
        self.saturate(&ctx, &key, tuple.iter().cloned().map(Some).collect())?;
        Ok(self.holds(&ctx, &key, &tuple))
    }

    fn holds(&self, ctx: &ContextId, key: &PredKey, tuple: &[Value]) -> bool {
        self.t.relation(ctx, key).and_then(|rel| rel.get(tuple)).is_some_and(|e| key.restricting || !e.removed)
    }

    /// Solves, lowest stratum first, the open goals that `pred` reaches
    /// through negative arcs in the dynamic graph of `ctx`.
    fn prepare(&mut self, ctx: &ContextId, pred: &PredRef) -> Result<(), EvalError> {
        let analysis = self.db.analysis(ctx);
        let gdg = goal_dependency_graph(&analysis.pdg, pred);
        let goals = negated_open_goals(&gdg, &analysis.strata, Some(pred));
        if let Some(ns) = &analysis.non_stratifiable {
            if ns.cycle.iter().any(|p| gdg.contains(p)) {
                self.t.undefined = true;
                if !self.non_stratifiable_reported {
                    self.non_stratifiable_reported = true;
                    self.events.push(Event::NonStratifiable(ns.clone()));
                }
            }
        }
        for g in goals {
            let p = g.pred();
            if !self.db.inputs_of(&p).is_empty() {
                continue;
            }
            let open = vec![None; p.arity].into();
            self.saturate(ctx, &PredKey::regular(p), open)?;
        }
        Ok(())
    }

    /// Brings a call to its final meaning: restricted predicates get their
    /// restricting tuples subtracted.
    fn saturate(&mut self, ctx: &ContextId, key: &PredKey, pattern: Pattern) -> Result<(), EvalError> {
        if self.is_restricted(ctx, &key.pred)? {
            self.complete_restricted(ctx, &key.pred)
        } else {
            self.complete(Call { ctx: ctx.clone(), key: key.clone(), pattern })
        }
    }

    fn is_restricted(&mut self, ctx: &ContextId, pred: &PredRef) -> Result<bool, EvalError> {
        let key = PredKey { pred: pred.clone(), restricting: true };
        Ok(!self.rules_for(ctx, &key)?.is_empty())
    }

    /// Nested driver: passes over `call` until nothing changes.
    fn complete(&mut self, call: Call) -> Result<(), EvalError> {
        if self.t.is_complete(&call) {
            return Ok(());
        }
        if self.t.completing.contains(&call) {
            // The call depends on its own completion: a cycle through negation.
            self.t.undefined = true;
            return Ok(());
        }
        self.t.completing.push(call.clone());
        let outer_changed = self.t.changed;
        let mut any = false;
        let result = loop {
            self.t.changed = false;
            self.t.begin_pass();
            let pass = self.memo(&call);
            let visited = self.t.end_pass();
            if let Err(e) = pass {
                break Err(e);
            }
            if !self.t.changed {
                self.t.complete.extend(visited);
                break Ok(());
            }
            any = true;
        };
        self.t.completing.pop();
        self.t.changed = outer_changed || any;
        result
    }

    /// P+ first, then P-, then the difference.
    fn complete_restricted(&mut self, ctx: &ContextId, pred: &PredRef) -> Result<(), EvalError> {
        let marker = (ctx.clone(), pred.clone());
        if self.t.restricted_done.contains(&marker) {
            return Ok(());
        }
        if !self.t.restricting_now.insert(marker.clone()) {
            self.t.undefined = true;
            return Ok(());
        }
        let open: Pattern = vec![None; pred.arity].into();
        let pos = PredKey::regular(pred.clone());
        let neg = pos.flip();
        let result = self
            .complete(Call { ctx: ctx.clone(), key: pos.clone(), pattern: open.clone() })
            .and_then(|_| self.complete(Call { ctx: ctx.clone(), key: neg.clone(), pattern: open }));
        self.t.restricting_now.remove(&marker);
        result?;
        let restricting: Vec<Tuple> =
            self.t.relation(ctx, &neg).map(|r| r.keys().cloned().collect()).unwrap_or_default();
        if let Some(rel) = self.t.answers.get_mut(ctx).and_then(|m| m.get_mut(&pos)) {
            for tuple in &restricting {
                if let Some(e) = rel.get_mut(tuple) {
                    e.removed = true;
                }
            }
        }
        self.t.restricted_done.insert(marker);
        Ok(())
    }

    /// One expansion of `call` in the current pass.
    fn memo(&mut self, call: &Call) -> Result<(), EvalError> {
        if self.t.is_complete(call) {
            return Ok(());
        }
        let top = self.t.visited.last_mut().expect("memo runs inside a driver");
        if !top.insert(call.clone()) {
            return Ok(());
        }
        let rules = self.rules_for(&call.ctx, &call.key)?;
        for rule in rules.iter() {
            let head = rule.head.as_ref().expect("indexed rules have heads");
            let mut init: Bindings = vec![None; rule.slots()];
            if !bind_head(head, &call.pattern, &mut init) {
                continue;
            }
            for alt in 0..rule.alts.len() {
                for b in self.run_alt(&call.ctx, rule, alt, init.clone())? {
                    let tuple = eval_args(&head.args, &b)?;
                    self.t.add(&call.ctx, &call.key, tuple, (rule.id, alt));
                }
            }
        }
        Ok(())
    }

    /// All solutions of one disjunct of a rule body.
    fn run_alt(
        &mut self,
        ctx: &ContextId,
        rule: &Rc<CompiledRule>,
        alt: usize,
        b: Bindings,
    ) -> Result<Vec<Bindings>, EvalError> {
        let mut done = vec![false; rule.alts[alt].len()];
        let mut out = Vec::new();
        self.step(ctx, rule, alt, &mut done, b, &mut out)?;
        Ok(out)
    }

    /// Runs the first ready literal in source order, then recurses.
    fn step(
        &mut self,
        ctx: &ContextId,
        rule: &Rc<CompiledRule>,
        alt: usize,
        done: &mut [bool],
        b: Bindings,
        out: &mut Vec<Bindings>,
    ) -> Result<(), EvalError> {
        let lits = &rule.alts[alt];
        let Some(i) = (0..lits.len()).find(|&i| !done[i] && lits[i].ready(&b)) else {
            if !done.iter().all(|d| *d) {
                return Err(EvalError::Instantiation);
            }
            out.push(b);
            return Ok(());
        };
        let extended = self.literal(ctx, rule, &lits[i], &b)?;
        done[i] = true;
        for b2 in extended {
            self.step(ctx, rule, alt, done, b2, out)?;
        }
        done[i] = false;
        Ok(())
    }

    fn literal(
        &mut self,
        ctx: &ContextId,
        rule: &CompiledRule,
        lit: &Literal,
        b: &Bindings,
    ) -> Result<Vec<Bindings>, EvalError> {
        match &lit.lit {
            Lit::Pos(atom) => self.positive(ctx, rule, atom, b),
            Lit::Neg(atom) => {
                let tuple = eval_args(&atom.args, b)?;
                self.saturate(ctx, &atom.key, tuple.iter().cloned().map(Some).collect())?;
                Ok(if self.holds(ctx, &atom.key, &tuple) { Vec::new() } else { vec![b.clone()] })
            }
            Lit::Cmp { op, lhs, rhs, negated } => builtin(*op, lhs, rhs, *negated, b),
            Lit::Hyp(atom) => {
                let target = self.hyp_target(ctx, rule)?;
                if &target == ctx {
                    return self.positive(ctx, rule, atom, b);
                }
                self.prepare(&target, &atom.key.pred)?;
                let pattern = call_pattern(&atom.args, b)?;
                self.saturate(&target, &atom.key, pattern)?;
                Ok(self.extend(&target, atom, b, atom.key.restricting, u64::MAX))
            }
        }
    }

    /// A positive body atom. Reads of the rule's own predicate see the
    /// unrestricted meaning under construction; other restricted predicates
    /// are saturated and read minus their restricting tuples.
    fn positive(
        &mut self,
        ctx: &ContextId,
        rule: &CompiledRule,
        atom: &CAtom,
        b: &Bindings,
    ) -> Result<Vec<Bindings>, EvalError> {
        let internal = rule.head.as_ref().is_some_and(|h| h.key.pred == atom.key.pred);
        let pattern = call_pattern(&atom.args, b)?;
        if !internal && self.is_restricted(ctx, &atom.key.pred)? {
            self.complete_restricted(ctx, &atom.key.pred)?;
            return Ok(self.extend(ctx, atom, b, atom.key.restricting, u64::MAX));
        }
        let call = Call { ctx: ctx.clone(), key: atom.key.clone(), pattern };
        self.memo(&call)?;
        // An incomplete call is read as it stood when the pass began, so each
        // pass is one round of naive bottom-up iteration.
        let before = if self.t.is_complete(&call) { u64::MAX } else { self.t.current_pass() };
        Ok(self.extend(ctx, atom, b, true, before))
    }

    /// Bindings extended by every stored tuple unifying with `atom` that was
    /// derived before pass `before`.
    fn extend(&self, ctx: &ContextId, atom: &CAtom, b: &Bindings, include_removed: bool, before: u64) -> Vec<Bindings> {
        let Some(rel) = self.t.relation(ctx, &atom.key) else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (tuple, entry) in rel {
            if (entry.removed && !include_removed) || entry.pass >= before {
                continue;
            }
            if let Some(b2) = unify(&atom.args, tuple, b) {
                out.push(b2);
            }
        }
        out
    }

    fn rules_for(&mut self, ctx: &ContextId, key: &PredKey) -> Result<Rc<[Rc<CompiledRule>]>, EvalError> {
        let index_key = (ctx.clone(), key.clone());
        if let Some(rules) = self.t.rule_index.get(&index_key) {
            return Ok(rules.clone());
        }
        // Assumptions are tried before the rules they extend, innermost first.
        let mut found: Vec<(usize, RuleId, Rule)> = self
            .db
            .visible_rules(ctx)
            .filter(|r| r.rule.head.as_ref().is_some_and(|h| &PredKey::of(h) == key))
            .map(|r| (r.ctx.0.len(), r.id, r.rule.clone()))
            .collect();
        found.sort_by_key(|(depth, id, _)| (std::cmp::Reverse(*depth), *id));
        let mut rules = Vec::with_capacity(found.len());
        for (_, id, rule) in found {
            rules.push(self.compiled(id, &rule)?);
        }
        let rules: Rc<[Rc<CompiledRule>]> = rules.into();
        self.t.rule_index.insert(index_key, rules.clone());
        Ok(rules)
    }

    fn compiled(&mut self, id: RuleId, rule: &Rule) -> Result<Rc<CompiledRule>, EvalError> {
        if let Some(c) = self.compiled.get(&id) {
            return Ok(c.clone());
        }
        let db = &*self.db;
        let c = Rc::new(compile(id, rule, &|p: &PredRef| db.inputs_of(p).to_vec())?);
        self.compiled.insert(id, c.clone());
        Ok(c)
    }

    /// The context in which the implication of `rule` is proved when the
    /// rule is evaluated in `ctx`.
    fn hyp_target(&mut self, ctx: &ContextId, rule: &CompiledRule) -> Result<ContextId, EvalError> {
        let key = (ctx.clone(), rule.id);
        if let Some(target) = self.t.hyp_targets.get(&key) {
            return Ok(target.clone());
        }
        let target = self.open_context(ctx, rule.id, &rule.premise)?;
        self.t.hyp_targets.insert(key, target.clone());
        Ok(target)
    }

    /// Assumes `premise` in a child of `ctx` named by `host`. Rules already
    /// visible are skipped and constraint violations rejected; if nothing is
    /// left to add, the implication is proved in `ctx` itself.
    fn open_context(&mut self, ctx: &ContextId, host: RuleId, premise: &[Rule]) -> Result<ContextId, EvalError> {
        let child = ctx.child(host);
        if self.db.open_contexts().contains(&child) {
            return Ok(child);
        }
        let novel = |db: &Database, at: &ContextId, r: &Rule| !db.visible_rules(at).any(|v| v.source.alpha_eq(r));
        if !premise.iter().any(|r| novel(self.db, ctx, r)) {
            return Ok(ctx.clone());
        }
        self.db.open_context(child.clone());
        self.t.opened.push(child.clone());
        self.events.push(Event::ContextBuilding { ctx: child.clone(), premise: premise.to_vec() });
        let mut added = false;
        for r in premise {
            if !novel(self.db, &child, r) {
                continue;
            }
            let id = store_flattened(self.db, r, child.clone(), Origin::Premise);
            let violations = self.with_fresh_tables(|s| s.check_all_constraints(&child));
            match violations {
                Ok(v) if v.is_empty() => added = true,
                Ok(violations) => {
                    self.db.remove_with_helpers(id);
                    if self.reported.insert((child.clone(), r.canonical())) {
                        self.events.push(Event::Rejection(RejectionReport {
                            violations,
                            rule: Some(r.clone()),
                            kind: RejectionKind::Assumed,
                        }));
                    }
                }
                Err(e) => {
                    self.db.remove_with_helpers(id);
                    return Err(e);
                }
            }
        }
        if !added {
            self.db.close_context(&child);
            self.t.opened.retain(|c| c != &child);
            return Ok(ctx.clone());
        }
        self.t.rule_index.retain(|(c, _), _| c != &child);
        let analysis = self.db.analysis(&child).clone();
        self.events.push(Event::ContextAnalysis { ctx: child.clone(), analysis });
        Ok(child)
    }

    /// Runs `f` against empty tables, then closes whatever it opened.
    fn with_fresh_tables<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::take(&mut self.t);
        let result = f(self);
        for ctx in std::mem::take(&mut self.t.opened).iter().rev() {
            self.db.close_context(ctx);
        }
        self.t = saved;
        result
    }

    pub fn check_all_constraints(&mut self, ctx: &ContextId) -> Result<Vec<ConstraintViolation>, EvalError> {
        let constraints = self.db.constraints().to_vec();
        let mut out = Vec::new();
        for c in constraints {
            if let Some(v) = self.check_constraint(ctx, c.id, &c.rule, &c.source)? {
                out.push(v);
            }
        }
        Ok(out)
    }

    /// Evaluates a flattened constraint body in `ctx`, collecting the
    /// offending instances in the order they are first found.
    pub fn check_constraint(
        &mut self,
        ctx: &ContextId,
        id: RuleId,
        flat: &Rule,
        source: &Rule,
    ) -> Result<Option<ConstraintViolation>, EvalError> {
        let rule = self.compiled(id, flat)?;
        let display = constraint_display(source);
        let head = display.head.as_ref().expect("display form has a head");
        let slots: Vec<usize> = head
            .args
            .iter()
            .map(|t| match t {
                Term::Var(v) => slot_of(&rule.vars, v),
                _ => None,
            })
            .collect::<Option<_>>()
            .ok_or_else(|| EvalError::Internal(format!("constraint variable lost in {flat}")))?;
        for lit in rule.alts.iter().flatten() {
            if let Lit::Pos(atom) | Lit::Neg(atom) = &lit.lit {
                self.prepare(ctx, &atom.key.pred)?;
            }
        }
        let mut found: IndexSet<Tuple> = IndexSet::new();
        let outer_changed = self.t.changed;
        loop {
            self.t.changed = false;
            self.t.begin_pass();
            let mut pass = Ok(());
            for alt in 0..rule.alts.len() {
                match self.run_alt(ctx, &rule, alt, vec![None; rule.slots()]) {
                    Ok(sols) => {
                        for b in sols {
                            let tuple: Option<Tuple> = slots.iter().map(|&s| b[s].clone()).collect();
                            found.insert(tuple.ok_or(EvalError::Instantiation)?);
                        }
                    }
                    Err(e) => {
                        pass = Err(e);
                        break;
                    }
                }
            }
            let visited = self.t.end_pass();
            pass?;
            if !self.t.changed {
                self.t.complete.extend(visited);
                break;
            }
        }
        self.t.changed = outer_changed;
        if found.is_empty() {
            return Ok(None);
        }
        let offending = found.iter().map(|t| ground_atom("ic", false, t)).collect();
        Ok(Some(ConstraintViolation { constraint: display, offending }))
    }
}

fn slot_of(vars: &[Var], v: &Var) -> Option<usize> {
    vars.iter().position(|w| w == v)
}

/// Propagates the bound arguments of a call into the head's variables.
fn bind_head(head: &CAtom, pattern: &[Option<Value>], b: &mut Bindings) -> bool {
    for (arg, p) in head.args.iter().zip(pattern) {
        let Some(v) = p else { continue };
        match arg {
            CTerm::Var(s) => match &b[*s] {
                Some(x) if x != v => return false,
                Some(_) => {}
                None => b[*s] = Some(v.clone()),
            },
            CTerm::Val(x) if x != v => return false,
            _ => {}
        }
    }
    true
}

fn call_pattern(args: &[CTerm], b: &Bindings) -> Result<Pattern, EvalError> {
    args.iter().map(|a| if a.is_bound(b) { a.eval(b).map(Some) } else { Ok(None) }).collect()
}

fn eval_args(args: &[CTerm], b: &Bindings) -> Result<Tuple, EvalError> {
    args.iter().map(|a| a.eval(b)).collect()
}

fn unify(args: &[CTerm], tuple: &[Value], b: &Bindings) -> Option<Bindings> {
    let mut out = b.clone();
    for (arg, v) in args.iter().zip(tuple) {
        match arg {
            CTerm::Var(s) => match &out[*s] {
                Some(x) if x != v => return None,
                Some(_) => {}
                None => out[*s] = Some(v.clone()),
            },
            other => {
                if &other.eval(&out).ok()? != v {
                    return None;
                }
            }
        }
    }
    Some(out)
}

fn builtin(op: CmpOp, lhs: &CTerm, rhs: &CTerm, negated: bool, b: &Bindings) -> Result<Vec<Bindings>, EvalError> {
    if op == CmpOp::Eq && !negated {
        for (known, other) in [(lhs, rhs), (rhs, lhs)] {
            if let (true, CTerm::Var(s)) = (known.is_bound(b), other) {
                if b[*s].is_none() {
                    let mut out = b.clone();
                    out[*s] = Some(known.eval(b)?);
                    return Ok(vec![out]);
                }
            }
        }
    }
    let holds = compare(op, &lhs.eval(b)?, &rhs.eval(b)?) != negated;
    Ok(if holds { vec![b.clone()] } else { Vec::new() })
}

/// Whether a stored tuple is an instance of a query atom.
fn matches_atom(atom: &Atom, tuple: &[Value]) -> bool {
    let mut seen: HashMap<&Var, &Value> = HashMap::new();
    atom.args.iter().zip(tuple).all(|(t, v)| match t {
        Term::Var(var) => *seen.entry(var).or_insert(v) == v,
        other => Value::from_term(other).as_ref() == Some(v),
    })
}
