#![allow(dead_code)]

pub mod gen;
pub mod oracle;

use std::collections::BTreeMap;
use std::path::PathBuf;

use hypodatalog::engine::{self, EvalError};
use hypodatalog::storage::Database;
use hypodatalog::syntax::{parse_goal, parse_program, Atom, Term};

pub fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("data").join(name)
}

pub fn university_text() -> String {
    std::fs::read_to_string(data("university.dl")).expect("university program")
}

/// A database holding `text`, loaded without constraint checks.
pub fn load(text: &str) -> Database {
    let mut db = Database::new();
    for rule in parse_program(text).expect("generated program parses") {
        engine::load_rule(&mut db, &rule).unwrap_or_else(|e| panic!("{rule} rejected: {e}"));
    }
    db
}

/// Engine answers as a bag keyed by the printed atom; `None` when the engine
/// flagged the result undefined.
pub fn engine_bag(db: &mut Database, goal: &str) -> Result<Option<BTreeMap<String, usize>>, EvalError> {
    let goal = parse_goal(goal).expect("goal parses");
    let outcome = engine::solve_query(db, &goal)?;
    if outcome.undefined {
        return Ok(None);
    }
    let mut bag = BTreeMap::new();
    for a in outcome.answers {
        *bag.entry(a.atom.to_string()).or_insert(0) += a.multiplicity;
    }
    Ok(Some(bag))
}

/// `p(X1,...,Xn)`, or its restricting counterpart.
pub fn open_atom(name: &str, arity: usize, restricting: bool) -> Atom {
    let args = (1..=arity).map(|i| Term::var(&format!("X{i}"))).collect();
    Atom { name: name.into(), args, restricting }
}

pub fn ground_atom(name: &str, args: &[String], restricting: bool) -> Atom {
    Atom { name: name.into(), args: args.iter().map(|a| Term::constant(a)).collect(), restricting }
}

pub fn bag_text(bag: &BTreeMap<String, usize>) -> String {
    let items: Vec<String> = bag.iter().map(|(a, n)| if *n == 1 { a.clone() } else { format!("{a} x{n}") }).collect();
    format!("{{{}}}", items.join(", "))
}
