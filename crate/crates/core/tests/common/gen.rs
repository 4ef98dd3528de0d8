//! Random program generation for the property suites.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const PREDS: [&str; 6] = ["p", "q", "r", "s", "t", "u"];
const CONSTS: [&str; 5] = ["a", "b", "c", "d", "e"];
const VARS: [&str; 3] = ["X", "Y", "Z"];

#[derive(Debug, Clone)]
pub struct Shape {
    pub max_preds: usize,
    pub max_rules: usize,
    pub max_consts: usize,
    pub restricting: bool,
    /// 0: no implications; 1: implications in rule bodies and queries;
    /// 2 or more: implications may nest inside premises and conclusions.
    pub hyp_depth: usize,
    /// Chance that a rule body gets a negated literal.
    pub negation: f64,
    /// Bias body literals towards predicates listed after the head, which
    /// keeps most programs stratifiable.
    pub layered: bool,
}

impl Shape {
    pub fn stratification() -> Self {
        Shape {
            max_preds: 6,
            max_rules: 12,
            max_consts: 5,
            restricting: true,
            hyp_depth: 0,
            negation: 0.45,
            layered: false,
        }
    }

    pub fn oracle() -> Self {
        Shape {
            max_preds: 6,
            max_rules: 12,
            max_consts: 5,
            restricting: true,
            hyp_depth: 1,
            negation: 0.3,
            layered: true,
        }
    }

    pub fn nested() -> Self {
        Shape {
            max_preds: 5,
            max_rules: 10,
            max_consts: 4,
            restricting: true,
            hyp_depth: 3,
            negation: 0.25,
            layered: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub text: String,
    pub preds: Vec<(String, usize)>,
    pub consts: Vec<String>,
    /// Goals with implications, to be asked at the root.
    pub queries: Vec<String>,
}

impl Program {
    /// Every ground tuple over the program's constants for `arity`.
    pub fn tuples(&self, arity: usize) -> Vec<Vec<String>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            out = out
                .iter()
                .flat_map(|t: &Vec<String>| {
                    self.consts.iter().map(move |c| {
                        let mut t = t.clone();
                        t.push(c.clone());
                        t
                    })
                })
                .collect();
        }
        out
    }
}

pub fn atom_text(name: &str, args: &[String]) -> String {
    if args.is_empty() {
        name.to_string()
    } else {
        format!("{name}({})", args.join(","))
    }
}

struct Gen<'a> {
    rng: &'a mut ChaCha8Rng,
    shape: &'a Shape,
    preds: Vec<(String, usize)>,
    consts: Vec<String>,
    /// Index of the head predicate of the rule being built.
    level: usize,
}

pub fn program(rng: &mut ChaCha8Rng, shape: &Shape) -> Program {
    let n_preds = rng.gen_range(2..=shape.max_preds);
    let preds: Vec<(String, usize)> =
        PREDS[..n_preds].iter().map(|p| (p.to_string(), *[0, 1, 1, 1, 2, 2].choose(rng).unwrap())).collect();
    let n_consts = rng.gen_range(2..=shape.max_consts);
    let consts = CONSTS[..n_consts].iter().map(ToString::to_string).collect();
    let mut g = Gen { rng, shape, preds, consts, level: 0 };

    let n_rules = g.rng.gen_range(4..=shape.max_rules);
    let n_facts = g.rng.gen_range(2..=n_rules.min(7) - 1);
    let mut lines = Vec::new();
    for _ in 0..n_facts {
        lines.push(format!("{}.", g.fact(true)));
    }
    for _ in n_facts..n_rules {
        lines.push(format!("{}.", g.rule(shape.hyp_depth, true)));
    }
    let mut queries = Vec::new();
    if shape.hyp_depth > 0 {
        for _ in 0..2 {
            let p = g.pred();
            let args: Vec<String> = VARS.iter().take(p.1).map(ToString::to_string).collect();
            let premise = g.premise(shape.hyp_depth);
            queries.push(format!("{premise} => {}", atom_text(&p.0, &args)));
        }
    }
    Program { text: lines.join("\n"), preds: g.preds, consts: g.consts, queries }
}

impl Gen<'_> {
    fn pred(&mut self) -> (String, usize) {
        self.preds.choose(self.rng).unwrap().clone()
    }

    /// A body predicate; `strict` excludes the head's own level.
    fn lower(&mut self, strict: bool) -> (String, usize) {
        let from = self.level + usize::from(strict);
        if self.shape.layered && from < self.preds.len() && self.rng.gen_bool(0.85) {
            self.preds[from..].choose(self.rng).unwrap().clone()
        } else {
            self.pred()
        }
    }

    fn constant(&mut self) -> String {
        self.consts.choose(self.rng).unwrap().clone()
    }

    fn fact(&mut self, allow_restricting: bool) -> String {
        let (name, arity) = self.pred();
        let args: Vec<String> = (0..arity).map(|_| self.constant()).collect();
        let minus = if allow_restricting && self.shape.restricting && self.rng.gen_bool(0.3) { "-" } else { "" };
        format!("{minus}{}", atom_text(&name, &args))
    }

    /// Arguments drawn from `pool` with the odd constant; new variables are
    /// added to `bound`.
    fn args(&mut self, arity: usize, pool: &[&str], bound: &mut Vec<String>) -> Vec<String> {
        (0..arity)
            .map(|_| {
                if self.rng.gen_bool(0.2) {
                    self.constant()
                } else {
                    let v = pool.choose(self.rng).unwrap().to_string();
                    if !bound.contains(&v) {
                        bound.push(v.clone());
                    }
                    v
                }
            })
            .collect()
    }

    /// Arguments using only already bound variables or constants.
    fn bound_args(&mut self, arity: usize, bound: &[String]) -> Vec<String> {
        (0..arity)
            .map(|_| {
                if bound.is_empty() || self.rng.gen_bool(0.2) {
                    self.constant()
                } else {
                    bound.choose(self.rng).unwrap().clone()
                }
            })
            .collect()
    }

    fn rule(&mut self, depth: usize, top: bool) -> String {
        let outer = self.level;
        self.level = self.rng.gen_range(0..self.preds.len());
        let (head, arity) = self.preds[self.level].clone();
        let restricting = self.shape.restricting && self.rng.gen_bool(0.2);
        let mut bound = Vec::new();
        let mut body = Vec::new();
        for _ in 0..self.rng.gen_range(1..=2) {
            let (name, ar) = self.lower(false);
            let args = self.args(ar, &VARS, &mut bound);
            let same: Vec<String> =
                self.preds.iter().filter(|(n, a)| *a == ar && *n != name).map(|(n, _)| n.clone()).collect();
            if !same.is_empty() && self.rng.gen_bool(0.15) {
                let other = same.choose(self.rng).unwrap();
                body.push(format!("({} ; {})", atom_text(&name, &args), atom_text(other, &args)));
            } else if self.shape.restricting && self.rng.gen_bool(0.1) {
                body.push(format!("-{}", atom_text(&name, &args)));
            } else {
                body.push(atom_text(&name, &args));
            }
        }
        if self.rng.gen_bool(self.shape.negation) {
            body.push(self.negation(depth, &bound));
        }
        if depth > 0 && top && self.rng.gen_bool(0.4) {
            body.push(self.hyp(depth, &bound));
        } else if depth > 1 && self.rng.gen_bool(0.3) {
            body.push(self.hyp(depth - 1, &bound));
        }
        if bound.len() >= 2 && self.rng.gen_bool(0.1) {
            body.push(format!("{} \\= {}", bound[0], bound[1]));
        }
        let args = self.bound_args(arity, &bound);
        let minus = if restricting { "-" } else { "" };
        self.level = outer;
        format!("{minus}{} :- {}", atom_text(&head, &args), body.join(", "))
    }

    fn negation(&mut self, depth: usize, bound: &[String]) -> String {
        let (name, ar) = self.lower(true);
        let args = self.bound_args(ar, bound);
        let minus = if self.shape.restricting && self.rng.gen_bool(0.15) { "-" } else { "" };
        let inner = format!("{minus}{}", atom_text(&name, &args));
        if depth > 1 && self.rng.gen_bool(0.3) {
            let (other, ar2) = self.lower(true);
            let args2 = self.bound_args(ar2, bound);
            format!("not ({inner}, {})", atom_text(&other, &args2))
        } else {
            format!("not {inner}")
        }
    }

    /// One to two premise rules joined by `/\`.
    fn premise(&mut self, depth: usize) -> String {
        let parts: Vec<String> = (0..self.rng.gen_range(1..=2))
            .map(|_| {
                if self.rng.gen_bool(0.6) {
                    self.fact(true)
                } else {
                    format!("({})", self.rule(depth.saturating_sub(1), false))
                }
            })
            .collect();
        parts.join(" /\\ ")
    }

    fn hyp(&mut self, depth: usize, bound: &[String]) -> String {
        let premise = self.premise(depth);
        let concl = self.conclusion(depth, bound);
        format!("({premise} => {concl})")
    }

    fn conclusion(&mut self, depth: usize, bound: &[String]) -> String {
        let (name, ar) = self.lower(false);
        let first = atom_text(&name, &self.bound_args(ar, bound));
        let roll: f64 = self.rng.gen();
        if depth > 1 && roll < 0.2 {
            self.hyp(depth - 1, bound)
        } else if depth > 1 && roll < 0.35 && !bound.is_empty() {
            format!("not {first}")
        } else if roll < 0.6 {
            let (other, ar2) = self.lower(false);
            let second = atom_text(&other, &self.bound_args(ar2, bound));
            format!("({first}, {second})")
        } else {
            first
        }
    }
}
