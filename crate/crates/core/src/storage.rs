//! The mutable database of identified, context-tagged rules.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::analysis::{bound_by, Analysis, Demand};
use crate::syntax::{PredRef, Rule};

pub type RuleId = u32;

/// The chain of rule ids at which assumptions were made; the root context is
/// the empty chain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ContextId(pub Vec<RuleId>);

impl ContextId {
    pub fn root() -> Self {
        ContextId(Vec::new())
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    /// True when `self` is `other` or one of its ancestors.
    pub fn is_ancestor_of(&self, other: &ContextId) -> bool {
        other.0.starts_with(&self.0)
    }

    pub fn child(&self, host: RuleId) -> ContextId {
        let mut path = self.0.clone();
        path.push(host);
        ContextId(path)
    }

    pub fn parent(&self) -> Option<ContextId> {
        let (_, init) = self.0.split_last()?;
        Some(ContextId(init.to_vec()))
    }
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ids: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", ids.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Consulted or asserted by the user.
    User,
    /// The temporary `answer` view of a query.
    View,
    /// Assumed from an implication premise.
    Premise,
    /// Introduced by flattening the rule `owner`.
    Helper { owner: RuleId },
}

#[derive(Debug, Clone)]
pub struct StoredRule {
    pub id: RuleId,
    pub ctx: ContextId,
    /// The rule as evaluated, after flattening.
    pub rule: Rule,
    /// The rule as written, used for display and retraction.
    pub source: Rule,
    pub origin: Origin,
}

#[derive(Debug, Clone)]
pub struct StoredConstraint {
    pub id: RuleId,
    /// Flattened headless rule.
    pub rule: Rule,
    pub source: Rule,
}

/// Rules, constraints and the contexts opened by the query being solved.
#[derive(Debug, Default)]
pub struct Database {
    rules: BTreeMap<RuleId, StoredRule>,
    constraints: Vec<StoredConstraint>,
    next_id: RuleId,
    next_helper: usize,
    /// Input positions of system-generated helper predicates.
    demand: Demand,
    /// Open contexts, innermost last.
    open: Vec<ContextId>,
    /// Analyses of the contexts in `open`, plus the root.
    analysis: HashMap<ContextId, Analysis>,
}

impl Database {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn fresh_id(&mut self) -> RuleId {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// A session-unique helper predicate name: `$p0`, `$p1`, ...
    pub fn fresh_helper(&mut self) -> String {
        let name = format!("$p{}", self.next_helper);
        self.next_helper += 1;
        name
    }

    /// Stores `rule` under `ctx` without any checks.
    pub fn insert(&mut self, rule: Rule, source: Rule, ctx: ContextId, origin: Origin) -> RuleId {
        let id = self.fresh_id();
        self.insert_with_id(id, rule, source, ctx, origin);
        id
    }

    pub fn insert_with_id(&mut self, id: RuleId, rule: Rule, source: Rule, ctx: ContextId, origin: Origin) {
        if let Some(head) = &rule.head {
            let pred = head.pred();
            if pred.is_system() && !self.demand.contains_key(&pred) {
                let inputs = helper_inputs(&rule, &self.demand);
                self.demand.insert(pred, inputs);
            }
        }
        self.invalidate(&ctx);
        self.rules.insert(id, StoredRule { id, ctx, rule, source, origin });
    }

    pub fn remove(&mut self, id: RuleId) -> Option<StoredRule> {
        let removed = self.rules.remove(&id)?;
        self.invalidate(&removed.ctx);
        Some(removed)
    }

    /// Removes `id` together with the helpers introduced for it.
    pub fn remove_with_helpers(&mut self, id: RuleId) {
        let helpers: Vec<RuleId> =
            self.rules.values().filter(|r| r.origin == Origin::Helper { owner: id }).map(|r| r.id).collect();
        for h in helpers {
            self.remove_with_helpers(h);
        }
        self.remove(id);
    }

    /// Removes root user rules equal to `rule` up to variable renaming.
    pub fn retract_rule(&mut self, rule: &Rule) -> usize {
        let ids: Vec<RuleId> = self
            .rules
            .values()
            .filter(|r| r.origin == Origin::User && r.ctx.is_root() && r.source.alpha_eq(rule))
            .map(|r| r.id)
            .collect();
        for &id in &ids {
            self.remove_with_helpers(id);
        }
        ids.len()
    }

    pub fn get(&self, id: RuleId) -> Option<&StoredRule> {
        self.rules.get(&id)
    }

    /// Rules tagged with `ctx` or one of its ancestors, in id order.
    pub fn visible_rules<'a>(&'a self, ctx: &'a ContextId) -> impl Iterator<Item = &'a StoredRule> + 'a {
        self.rules.values().filter(move |r| r.ctx.is_ancestor_of(ctx))
    }

    /// User-visible rules at the root, in id order.
    pub fn user_rules(&self) -> impl Iterator<Item = &StoredRule> {
        self.rules.values().filter(|r| r.ctx.is_root() && r.origin == Origin::User)
    }

    pub fn add_constraint(&mut self, id: RuleId, rule: Rule, source: Rule) {
        self.constraints.push(StoredConstraint { id, rule, source });
    }

    pub fn constraints(&self) -> &[StoredConstraint] {
        &self.constraints
    }

    pub fn demand(&self) -> &Demand {
        &self.demand
    }

    pub fn inputs_of(&self, p: &PredRef) -> &[usize] {
        self.demand.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Registers `ctx` as the innermost open context. Premise rules are
    /// added with [`Database::insert`] afterwards.
    pub fn open_context(&mut self, ctx: ContextId) {
        debug_assert!(!self.open.contains(&ctx));
        self.open.push(ctx);
    }

    pub fn open_contexts(&self) -> &[ContextId] {
        &self.open
    }

    /// Retracts the rules assumed in `ctx` and drops its analysis.
    pub fn close_context(&mut self, ctx: &ContextId) {
        let ids: Vec<RuleId> = self.rules.values().filter(|r| &r.ctx == ctx).map(|r| r.id).collect();
        for id in ids {
            self.remove(id);
        }
        self.open.retain(|c| c != ctx);
        self.analysis.remove(ctx);
    }

    /// The dynamic dependency graph and strata of the rules visible in `ctx`.
    pub fn analysis(&mut self, ctx: &ContextId) -> &Analysis {
        if !self.analysis.contains_key(ctx) {
            let a = Analysis::of(self.visible_rules(ctx).map(|r| &r.rule));
            self.analysis.insert(ctx.clone(), a);
        }
        &self.analysis[ctx]
    }

    fn invalidate(&mut self, ctx: &ContextId) {
        self.analysis.retain(|c, _| !ctx.is_ancestor_of(c));
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty() && self.constraints.is_empty()
    }
}

/// Head positions a helper cannot bind by itself.
fn helper_inputs(rule: &Rule, demand: &Demand) -> Vec<usize> {
    let bound = bound_by(&rule.body, &Default::default(), demand);
    let head = rule.head.as_ref().expect("helpers have heads");
    head.args
        .iter()
        .enumerate()
        .filter(|(_, t)| {
            let mut vars = Vec::new();
            t.collect_vars(&mut vars);
            vars.iter().any(|v| !bound.contains(*v))
        })
        .map(|(i, _)| i)
        .collect()
}
