//! Answer and call tables, tagged by context.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::rc::Rc;

use indexmap::IndexMap;

use super::compile::{CompiledRule, PredKey};
use super::value::{Tuple, Value};
use super::TableStats;
use crate::storage::{ContextId, RuleId};
use crate::syntax::PredRef;

/// A derivation identity: the rule and the disjunct of its body.
pub type Support = (RuleId, usize);

#[derive(Debug, Clone, Default)]
pub struct Entry {
    pub supports: BTreeSet<Support>,
    /// Set when a restricting counterpart removed the tuple from the
    /// predicate's meaning.
    pub removed: bool,
    /// The pass that first derived the tuple.
    pub pass: u64,
}

/// Ground tuples of one predicate in one context, in derivation order.
pub type Relation = IndexMap<Tuple, Entry>;

/// A call pattern: bound arguments are `Some`.
pub type Pattern = Box<[Option<Value>]>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Call {
    pub ctx: ContextId,
    pub key: PredKey,
    pub pattern: Pattern,
}

impl Call {
    pub fn open(&self) -> Call {
        Call { ctx: self.ctx.clone(), key: self.key.clone(), pattern: vec![None; self.pattern.len()].into() }
    }
}

/// Everything one evaluation remembers. Constraint checks run with a fresh
/// instance swapped in.
#[derive(Debug, Default)]
pub struct Tables {
    pub answers: HashMap<ContextId, HashMap<PredKey, Relation>>,
    pub complete: HashSet<Call>,
    /// Calls expanded in the current pass of each active driver, innermost
    /// last.
    pub visited: Vec<HashSet<Call>>,
    /// Identifiers of the passes in `visited`.
    pub passes: Vec<u64>,
    pub next_pass: u64,
    /// Calls whose completion is in progress.
    pub completing: Vec<Call>,
    pub changed: bool,
    pub restricted_done: HashSet<(ContextId, PredRef)>,
    pub restricting_now: HashSet<(ContextId, PredRef)>,
    pub rule_index: HashMap<(ContextId, PredKey), Rc<[Rc<CompiledRule>]>>,
    /// Where the implication of a rule evaluated in a context is proved.
    pub hyp_targets: HashMap<(ContextId, RuleId), ContextId>,
    /// Contexts opened with these tables, in opening order.
    pub opened: Vec<ContextId>,
    pub undefined: bool,
}

impl Tables {
    pub fn relation(&self, ctx: &ContextId, key: &PredKey) -> Option<&Relation> {
        self.answers.get(ctx)?.get(key)
    }

    pub fn begin_pass(&mut self) {
        self.next_pass += 1;
        self.passes.push(self.next_pass);
        self.visited.push(HashSet::new());
    }

    /// Ends the innermost pass and returns the calls it expanded.
    pub fn end_pass(&mut self) -> HashSet<Call> {
        self.passes.pop();
        self.visited.pop().unwrap_or_default()
    }

    pub fn current_pass(&self) -> u64 {
        self.passes.last().copied().unwrap_or(u64::MAX)
    }

    /// Records a derivation; true when the tuple is new.
    pub fn add(&mut self, ctx: &ContextId, key: &PredKey, tuple: Tuple, support: Support) -> bool {
        let pass = self.current_pass();
        let rel = self.answers.entry(ctx.clone()).or_default().entry(key.clone()).or_default();
        match rel.get_mut(&tuple) {
            Some(e) => {
                e.supports.insert(support);
                false
            }
            None => {
                let mut e = Entry { pass, ..Entry::default() };
                e.supports.insert(support);
                rel.insert(tuple, e);
                self.changed = true;
                true
            }
        }
    }

    pub fn is_complete(&self, call: &Call) -> bool {
        self.complete.contains(call) || self.complete.contains(&call.open())
    }

    pub fn stats(&self) -> TableStats {
        let mut stats = TableStats::default();
        for (ctx, rels) in &self.answers {
            for (key, rel) in rels {
                if !rel.is_empty() {
                    stats.entries.insert((ctx.clone(), key.clone()), rel.len());
                }
            }
        }
        stats
    }
}
