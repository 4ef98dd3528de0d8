//! Printing in the compact concrete syntax used by the REPL transcripts.
//!
//! `Display` prints compact forms (`answer(S) :- a,b=>c.`); [`rule_spaced`]
//! puts a space after each top-level body comma, as used in diagnostics.

use std::fmt::{self, Write};

use super::ast::*;

/// Prints a constant or predicate name, quoting it when it would not lex
/// back as a plain identifier.
pub fn symbol(name: &str) -> String {
    let mut chars = name.chars();
    let plain = matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && name != "not"
        && name != "mod";
    if plain {
        name.to_string()
    } else {
        format!("'{}'", name.replace('\'', "''"))
    }
}

const LEVEL_HYP: u8 = 1;
const LEVEL_DISJ: u8 = 2;
const LEVEL_CONJ: u8 = 3;
const LEVEL_UNARY: u8 = 4;

fn goal_level(g: &Goal) -> u8 {
    match g {
        Goal::Hyp(..) => LEVEL_HYP,
        Goal::Disj(_) => LEVEL_DISJ,
        Goal::Conj(_) => LEVEL_CONJ,
        Goal::Not(_) => LEVEL_UNARY,
        Goal::Atom(_) | Goal::Cmp(..) => LEVEL_UNARY + 1,
    }
}

fn arith_level(t: &Term) -> u8 {
    match t {
        Term::Arith(ArithOp::Add | ArithOp::Sub, _) => 1,
        Term::Arith(ArithOp::Mul | ArithOp::Div | ArithOp::Mod, _) => 2,
        _ => 3,
    }
}

fn write_term(f: &mut impl Write, t: &Term, min_level: u8) -> fmt::Result {
    let level = arith_level(t);
    let parens = level < min_level;
    if parens {
        f.write_char('(')?;
    }
    match t {
        Term::Var(v) => f.write_str(&v.name)?,
        Term::Const(c) => f.write_str(&symbol(c))?,
        Term::Int(i) => write!(f, "{i}")?,
        Term::Arith(ArithOp::Neg, args) => {
            f.write_char('-')?;
            match &args[0] {
                // `-3` would read back as a literal
                Term::Int(_) => {
                    f.write_char('(')?;
                    write_term(f, &args[0], 0)?;
                    f.write_char(')')?;
                }
                a => write_term(f, a, 3)?,
            }
        }
        Term::Arith(op, args) => {
            write_term(f, &args[0], level)?;
            match op {
                ArithOp::Mod => f.write_str(" mod ")?,
                op => f.write_str(op.symbol())?,
            }
            write_term(f, &args[1], level + 1)?;
        }
    }
    if parens {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_atom(f: &mut impl Write, a: &Atom) -> fmt::Result {
    if a.restricting {
        f.write_char('-')?;
    }
    f.write_str(&symbol(&a.name))?;
    if !a.args.is_empty() {
        f.write_char('(')?;
        for (i, t) in a.args.iter().enumerate() {
            if i > 0 {
                f.write_char(',')?;
            }
            write_term(f, t, 0)?;
        }
        f.write_char(')')?;
    }
    Ok(())
}

fn write_goal(f: &mut impl Write, g: &Goal, min_level: u8) -> fmt::Result {
    let parens = goal_level(g) < min_level;
    if parens {
        f.write_char('(')?;
    }
    match g {
        Goal::Atom(a) => write_atom(f, a)?,
        Goal::Not(inner) => {
            f.write_str("not ")?;
            write_goal(f, inner, LEVEL_UNARY + 1)?;
        }
        Goal::Cmp(op, l, r) => {
            write_term(f, l, 0)?;
            f.write_str(op.symbol())?;
            write_term(f, r, 0)?;
        }
        Goal::Conj(gs) => write_joined(f, gs, ",", LEVEL_UNARY)?,
        Goal::Disj(gs) => write_joined(f, gs, ";", LEVEL_CONJ)?,
        Goal::Hyp(premise, concl) => {
            for (i, r) in premise.iter().enumerate() {
                if i > 0 {
                    f.write_str("/\\")?;
                }
                write_premise_rule(f, r)?;
            }
            f.write_str("=>")?;
            write_goal(f, concl, LEVEL_HYP)?;
        }
    }
    if parens {
        f.write_char(')')?;
    }
    Ok(())
}

fn write_joined(f: &mut impl Write, gs: &[Goal], sep: &str, level: u8) -> fmt::Result {
    for (i, g) in gs.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write_goal(f, g, level)?;
    }
    Ok(())
}

fn write_premise_rule(f: &mut impl Write, r: &Rule) -> fmt::Result {
    match &r.head {
        Some(h) if r.body.is_empty() => write_atom(f, h),
        _ => {
            f.write_char('(')?;
            write_rule(f, r, ":-", ",")?;
            f.write_char(')')
        }
    }
}

fn write_body(f: &mut impl Write, body: &[Goal], sep: &str) -> fmt::Result {
    if let [single] = body {
        return write_goal(f, single, LEVEL_HYP);
    }
    for (i, g) in body.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write_goal(f, g, LEVEL_UNARY)?;
    }
    Ok(())
}

fn write_rule(f: &mut impl Write, r: &Rule, neck: &str, sep: &str) -> fmt::Result {
    if let Some(h) = &r.head {
        write_atom(f, h)?;
    }
    if !r.body.is_empty() {
        f.write_str(neck)?;
        write_body(f, &r.body, sep)?;
    }
    Ok(())
}

/// `head :- g1, g2.` with a space after each top-level comma.
pub fn rule_spaced(r: &Rule) -> String {
    let mut s = String::new();
    write_rule(&mut s, r, if r.head.is_some() { " :- " } else { ":- " }, ", ").unwrap();
    s.push('.');
    s
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_term(f, self, 0)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_atom(f, self)
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_goal(f, self, 0)
    }
}

/// Compact form terminated by a period: `p(X) :- q(X),not r(X).`
impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_rule(f, self, if self.head.is_some() { " :- " } else { ":- " }, ",")?;
        f.write_char('.')
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flag = |b: &Option<bool>| match b {
            Some(true) => " on",
            Some(false) => " off",
            None => "",
        };
        match self {
            Command::Pdg => f.write_str("/pdg"),
            Command::Strata => f.write_str("/strata"),
            Command::Verbose(b) => write!(f, "/verbose{}", flag(b)),
            Command::System(b) => write!(f, "/system{}", flag(b)),
            Command::Quit => f.write_str("/quit"),
        }
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Query(g) => write!(f, "{g}"),
            Input::Assertion(r) => write!(f, "/assert {r}"),
            Input::Retraction(r) => write!(f, "/retract {r}"),
            Input::Constraint(r) => write!(f, "{r}"),
            Input::Command(c) => write!(f, "{c}"),
        }
    }
}
