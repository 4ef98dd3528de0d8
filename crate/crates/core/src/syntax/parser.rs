//! Recursive-descent parser.
//!
//! Goal operators from loosest to tightest: `=>` (right associative), `;`,
//! `,` and `/\`, `not`, comparisons. A parenthesized `head :- body` is a rule
//! and may only appear as an implication premise.

use super::ast::*;
use super::lexer::{tokenize, Pos, Tok, Token};
use super::SyntaxError;

pub const VIEW_PREDICATE: &str = "answer";

/// Parses one interactive line. A trailing period is optional.
pub fn parse_input(line: &str) -> Result<Input, SyntaxError> {
    let trimmed = line.trim();
    if let Some(rest) = trimmed.strip_prefix('/') {
        if !rest.starts_with('\\') {
            return parse_command(rest, line);
        }
    }
    let mut p = Parser::new(line)?;
    let input = if p.peek() == Some(&Tok::Neck) {
        p.bump();
        let body = p.body()?;
        Input::Constraint(Rule::constraint(body))
    } else {
        let item = p.implication()?;
        if p.peek() == Some(&Tok::Neck) {
            return Err(p.error("rules must be added with /assert"));
        }
        Input::Query(p.to_goal(item)?)
    };
    p.optional_period_then_end()?;
    Ok(input)
}

fn parse_command(rest: &str, line: &str) -> Result<Input, SyntaxError> {
    let (word, args) = match rest.find(char::is_whitespace) {
        Some(i) => (&rest[..i], rest[i..].trim()),
        None => (rest, ""),
    };
    let offset = line.len() - line.trim_start().len() + 1 + word.len();
    let flag = |args: &str| -> Result<Option<bool>, SyntaxError> {
        match args.trim_end_matches('.').trim() {
            "" => Ok(None),
            "on" => Ok(Some(true)),
            "off" => Ok(Some(false)),
            other => Err(SyntaxError::new(
                Pos { line: 1, col: offset + 2 },
                format!("expected 'on' or 'off', found '{other}'"),
            )),
        }
    };
    let no_args = |cmd: Command| -> Result<Input, SyntaxError> {
        if args.trim_end_matches('.').trim().is_empty() {
            Ok(Input::Command(cmd))
        } else {
            Err(SyntaxError::new(Pos { line: 1, col: offset + 2 }, format!("/{word} takes no arguments")))
        }
    };
    match word {
        "assert" => Ok(Input::Assertion(parse_single_rule(args, offset)?)),
        "retract" => Ok(Input::Retraction(parse_single_rule(args, offset)?)),
        "pdg" => no_args(Command::Pdg),
        "strata" => no_args(Command::Strata),
        "verbose" => Ok(Input::Command(Command::Verbose(flag(args)?))),
        "system" => Ok(Input::Command(Command::System(flag(args)?))),
        "quit" | "q" | "exit" => no_args(Command::Quit),
        other => Err(SyntaxError::new(Pos { line: 1, col: 1 }, format!("unknown command /{other}"))),
    }
}

fn parse_single_rule(text: &str, col_offset: usize) -> Result<Rule, SyntaxError> {
    let mut p = Parser::new(text).map_err(|e| e.shifted(col_offset))?;
    let rule = p.rule(false).map_err(|e| e.shifted(col_offset))?;
    p.optional_period_then_end().map_err(|e| e.shifted(col_offset))?;
    Ok(rule)
}

/// Parses a rule, fact or constraint; the trailing period is optional.
pub fn parse_rule(text: &str) -> Result<Rule, SyntaxError> {
    let mut p = Parser::new(text)?;
    let rule = p.rule(true)?;
    p.optional_period_then_end()?;
    Ok(rule)
}

/// Parses a goal; the trailing period is optional.
pub fn parse_goal(text: &str) -> Result<Goal, SyntaxError> {
    let mut p = Parser::new(text)?;
    let item = p.implication()?;
    let goal = p.to_goal(item)?;
    p.optional_period_then_end()?;
    Ok(goal)
}

/// Parses a program: period-terminated rules, facts and `:- body.` constraints.
pub fn parse_program(text: &str) -> Result<Vec<Rule>, SyntaxError> {
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    while p.peek().is_some() {
        let rule = p.rule(true)?;
        p.expect(Tok::Period)?;
        rules.push(rule);
    }
    Ok(rules)
}

enum Item {
    Goal(Goal),
    Rule(Rule),
    Conj(Vec<Item>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    end: Pos,
    next_scope: u32,
}

impl Parser {
    fn new(text: &str) -> Result<Self, SyntaxError> {
        let toks = tokenize(text)?;
        let line = text.lines().count().max(1);
        let col = text.lines().last().map_or(0, |l| l.chars().count()) + 1;
        Ok(Parser { toks, pos: 0, end: Pos { line, col }, next_scope: 1 })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn peek_at(&self, n: usize) -> Option<&Tok> {
        self.toks.get(self.pos + n).map(|t| &t.tok)
    }

    fn peek_keyword(&self, word: &str) -> bool {
        matches!(self.toks.get(self.pos), Some(Token { tok: Tok::Ident(s), quoted: false, .. }) if s == word)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|t| t.tok.clone());
        self.pos += 1;
        t
    }

    fn here(&self) -> Pos {
        self.toks.get(self.pos).map_or(self.end, |t| t.pos)
    }

    fn error(&self, msg: impl Into<String>) -> SyntaxError {
        SyntaxError::new(self.here(), msg)
    }

    fn unexpected(&self, wanted: &str) -> SyntaxError {
        match self.peek() {
            Some(t) => self.error(format!("expected {wanted}, found {}", t.describe())),
            None => self.error(format!("expected {wanted}, found end of input")),
        }
    }

    fn expect(&mut self, tok: Tok) -> Result<(), SyntaxError> {
        if self.peek() == Some(&tok) {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn optional_period_then_end(&mut self) -> Result<(), SyntaxError> {
        if self.peek() == Some(&Tok::Period) {
            self.bump();
        }
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(self.unexpected("end of input")),
        }
    }

    fn fresh_scope(&mut self) -> u32 {
        let s = self.next_scope;
        self.next_scope += 1;
        s
    }

    /// `head [:- body]` or `:- body`. Constraints are allowed only at top level.
    fn rule(&mut self, allow_constraint: bool) -> Result<Rule, SyntaxError> {
        if self.peek() == Some(&Tok::Neck) {
            if !allow_constraint {
                return Err(self.error("integrity constraints are entered as ':- body'"));
            }
            self.bump();
            return Ok(Rule::constraint(self.body()?));
        }
        let start = self.here();
        let head = self.head_atom()?;
        check_head(&head, start)?;
        if self.peek() == Some(&Tok::Neck) {
            self.bump();
            Ok(Rule::new(head, self.body()?))
        } else {
            Ok(Rule::fact(head))
        }
    }

    fn head_atom(&mut self) -> Result<Atom, SyntaxError> {
        let restricting = if self.peek() == Some(&Tok::Minus) {
            self.bump();
            true
        } else {
            false
        };
        match self.peek() {
            Some(Tok::Ident(_)) => {
                let mut a = self.atom()?;
                a.restricting = restricting;
                Ok(a)
            }
            _ => Err(self.unexpected("an atom")),
        }
    }

    fn body(&mut self) -> Result<Vec<Goal>, SyntaxError> {
        if matches!(self.peek(), None | Some(Tok::Period)) {
            return Err(self.unexpected("a goal"));
        }
        let item = self.implication()?;
        Ok(match self.to_goal(item)? {
            Goal::Conj(gs) => gs,
            g => vec![g],
        })
    }

    fn implication(&mut self) -> Result<Item, SyntaxError> {
        let start = self.here();
        let lhs = self.disjunction()?;
        if self.peek() != Some(&Tok::Implies) {
            return Ok(lhs);
        }
        self.bump();
        let premise = self.premise_rules(lhs, start)?;
        let rhs = self.implication()?;
        let conclusion = self.to_goal(rhs)?;
        Ok(Item::Goal(Goal::Hyp(premise, Box::new(conclusion))))
    }

    fn disjunction(&mut self) -> Result<Item, SyntaxError> {
        let first = self.conjunction()?;
        if self.peek() != Some(&Tok::Semicolon) {
            return Ok(first);
        }
        let mut branches = Vec::new();
        push_disjunct(&mut branches, self.to_goal(first)?);
        while self.peek() == Some(&Tok::Semicolon) {
            self.bump();
            let next = self.conjunction()?;
            push_disjunct(&mut branches, self.to_goal(next)?);
        }
        Ok(Item::Goal(Goal::Disj(branches)))
    }

    fn conjunction(&mut self) -> Result<Item, SyntaxError> {
        let mut items = vec![self.unary()?];
        while matches!(self.peek(), Some(Tok::Comma) | Some(Tok::Wedge)) {
            self.bump();
            items.push(self.unary()?);
        }
        Ok(if items.len() == 1 { items.pop().unwrap() } else { Item::Conj(items) })
    }

    fn unary(&mut self) -> Result<Item, SyntaxError> {
        if self.peek_keyword("not") && self.peek_at(1).is_some() {
            let at = self.here();
            self.bump();
            let inner = self.unary()?;
            let goal = self.to_goal(inner)?;
            if matches!(goal, Goal::Not(_)) {
                return Err(SyntaxError::new(at, "nested negation is not allowed"));
            }
            return Ok(Item::Goal(Goal::Not(Box::new(goal))));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Item, SyntaxError> {
        match self.peek() {
            Some(Tok::LParen) => {
                // `(X+1)*2 > Y` opens like a grouped goal; fall back to a
                // comparison when the group does not stand on its own.
                let (pos, scope) = (self.pos, self.next_scope);
                let grouped = self.group();
                if grouped.is_err() || self.at_operator() {
                    let after = (self.pos, self.next_scope);
                    (self.pos, self.next_scope) = (pos, scope);
                    match self.comparison() {
                        Ok(c) => return Ok(Item::Goal(c)),
                        Err(_) => (self.pos, self.next_scope) = after,
                    }
                }
                grouped
            }
            Some(Tok::Minus) if matches!(self.peek_at(1), Some(Tok::Ident(_))) => {
                let pos = self.pos;
                self.bump();
                let mut a = self.atom()?;
                a.restricting = true;
                if a.args.is_empty() && self.at_operator() {
                    // negated constant in arithmetic, as in `-c+X = Y`
                    self.pos = pos;
                    return self.comparison().map(Item::Goal);
                }
                if self.at_comparison() {
                    return Err(self.error("a restricting atom cannot be compared"));
                }
                Ok(Item::Goal(Goal::Atom(a)))
            }
            Some(Tok::Ident(_)) => {
                let bare_constant = self.peek_at(1) != Some(&Tok::LParen);
                let followed_by_operator = matches!(
                    self.peek_at(1),
                    Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)
                ) || matches!(self.peek_at(1), Some(t) if is_comparison(t))
                    || matches!(self.toks.get(self.pos + 1), Some(Token { tok: Tok::Ident(s), quoted: false, .. }) if s == "mod");
                if bare_constant && followed_by_operator {
                    return self.comparison().map(Item::Goal);
                }
                let a = self.atom()?;
                if self.at_comparison() {
                    return Err(self.error("compound terms cannot be compared"));
                }
                Ok(Item::Goal(Goal::Atom(a)))
            }
            Some(Tok::Var(_) | Tok::Int(_) | Tok::Minus) => self.comparison().map(Item::Goal),
            _ => Err(self.unexpected("a goal")),
        }
    }

    /// A parenthesized goal or premise rule, opening parenthesis included.
    fn group(&mut self) -> Result<Item, SyntaxError> {
        self.bump();
        let start = self.here();
        let inner = self.implication()?;
        let item = if self.peek() == Some(&Tok::Neck) {
            self.bump();
            let head = match inner {
                Item::Goal(Goal::Atom(a)) => a,
                _ => return Err(SyntaxError::new(start, "rule head must be an atom")),
            };
            check_head(&head, start)?;
            let body = self.body()?;
            Item::Rule(Rule::new(head, body))
        } else {
            inner
        };
        self.expect(Tok::RParen)?;
        Ok(item)
    }

    /// An arithmetic or comparison operator comes next.
    fn at_operator(&self) -> bool {
        matches!(self.peek(), Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash))
            || self.at_comparison()
            || matches!(self.toks.get(self.pos), Some(Token { tok: Tok::Ident(s), quoted: false, .. }) if s == "mod")
    }

    fn at_comparison(&self) -> bool {
        self.peek().is_some_and(is_comparison)
    }

    fn comparison(&mut self) -> Result<Goal, SyntaxError> {
        let lhs = self.expr()?;
        let op = match self.peek() {
            Some(Tok::Eq) => CmpOp::Eq,
            Some(Tok::Ne) => CmpOp::Ne,
            Some(Tok::Lt) => CmpOp::Lt,
            Some(Tok::Gt) => CmpOp::Gt,
            Some(Tok::Le) => CmpOp::Le,
            Some(Tok::Ge) => CmpOp::Ge,
            _ => return Err(self.unexpected("a comparison operator")),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Goal::Cmp(op, lhs, rhs))
    }

    fn expr(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => ArithOp::Add,
                Some(Tok::Minus) => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul_expr()?;
            lhs = Term::Arith(op, vec![lhs, rhs]);
        }
    }

    fn mul_expr(&mut self) -> Result<Term, SyntaxError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => ArithOp::Mul,
                Some(Tok::Slash) => ArithOp::Div,
                _ if self.peek_keyword("mod") => ArithOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Term::Arith(op, vec![lhs, rhs]);
        }
    }

    fn factor(&mut self) -> Result<Term, SyntaxError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.bump();
                if let Some(Tok::Int(i)) = self.peek() {
                    let i = *i;
                    self.bump();
                    return Ok(Term::Int(-i));
                }
                let inner = self.factor()?;
                Ok(Term::Arith(ArithOp::Neg, vec![inner]))
            }
            Some(Tok::LParen) => {
                self.bump();
                let t = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(t)
            }
            _ => self.simple_term(),
        }
    }

    fn simple_term(&mut self) -> Result<Term, SyntaxError> {
        match self.peek().cloned() {
            Some(Tok::Var(name)) => {
                self.bump();
                Ok(self.variable(name))
            }
            Some(Tok::Int(i)) => {
                self.bump();
                Ok(Term::Int(i))
            }
            Some(Tok::Ident(name)) => {
                self.bump();
                if self.peek() == Some(&Tok::LParen) {
                    return Err(self.error("function symbols are not supported"));
                }
                Ok(Term::Const(name.into()))
            }
            _ => Err(self.unexpected("a term")),
        }
    }

    fn variable(&mut self, name: String) -> Term {
        if name == "_" {
            let scope = self.fresh_scope();
            Term::Var(Var::new(name, scope))
        } else {
            Term::Var(Var::new(name, 0))
        }
    }

    fn atom(&mut self) -> Result<Atom, SyntaxError> {
        let name = match self.bump() {
            Some(Tok::Ident(s)) => s,
            _ => unreachable!("atom() called on a non-identifier"),
        };
        let mut args = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.bump();
            if self.peek() == Some(&Tok::RParen) {
                return Err(self.error(format!("zero-arity predicates are written without parentheses: {name}")));
            }
            loop {
                args.push(self.argument()?);
                match self.peek() {
                    Some(Tok::Comma) => {
                        self.bump();
                    }
                    Some(Tok::RParen) => {
                        self.bump();
                        break;
                    }
                    _ => return Err(self.unexpected("',' or ')'")),
                }
            }
        }
        Ok(Atom::new(&name, args))
    }

    fn argument(&mut self) -> Result<Term, SyntaxError> {
        let t = if self.peek() == Some(&Tok::Minus) && matches!(self.peek_at(1), Some(Tok::Int(_))) {
            self.bump();
            match self.bump() {
                Some(Tok::Int(i)) => Term::Int(-i),
                _ => unreachable!(),
            }
        } else {
            self.simple_term()?
        };
        let arith_follows =
            matches!(self.peek(), Some(Tok::Plus | Tok::Minus | Tok::Star | Tok::Slash)) || self.peek_keyword("mod");
        if arith_follows {
            return Err(self.error("arithmetic expressions are not allowed as predicate arguments"));
        }
        Ok(t)
    }

    fn to_goal(&self, item: Item) -> Result<Goal, SyntaxError> {
        match item {
            Item::Goal(g) => Ok(g),
            Item::Rule(_) => Err(self.error("a rule can only appear as an implication premise")),
            Item::Conj(items) => {
                let mut goals = Vec::new();
                for it in items {
                    match self.to_goal(it)? {
                        Goal::Conj(inner) => goals.extend(inner),
                        g => goals.push(g),
                    }
                }
                Ok(Goal::Conj(goals))
            }
        }
    }

    /// Converts the left side of `=>` into premise rules, giving each rule
    /// its own variable scope.
    fn premise_rules(&mut self, item: Item, at: Pos) -> Result<Vec<Rule>, SyntaxError> {
        let mut out = Vec::new();
        self.collect_premise(item, at, &mut out)?;
        Ok(out)
    }

    fn collect_premise(&mut self, item: Item, at: Pos, out: &mut Vec<Rule>) -> Result<(), SyntaxError> {
        match item {
            Item::Conj(items) => {
                for it in items {
                    self.collect_premise(it, at, out)?;
                }
                Ok(())
            }
            Item::Goal(Goal::Conj(goals)) => {
                for g in goals {
                    self.collect_premise(Item::Goal(g), at, out)?;
                }
                Ok(())
            }
            Item::Goal(Goal::Atom(a)) => {
                check_head(&a, at)?;
                out.push(self.encapsulate(Rule::fact(a)));
                Ok(())
            }
            Item::Rule(r) => {
                out.push(self.encapsulate(r));
                Ok(())
            }
            Item::Goal(_) => Err(SyntaxError::new(at, "an implication premise must be a conjunction of rules")),
        }
    }

    fn encapsulate(&mut self, rule: Rule) -> Rule {
        let scope = self.fresh_scope();
        rule.map_vars(&mut |v: &Var| {
            if v.scope == 0 {
                Var::new(v.name.clone(), scope)
            } else {
                v.clone()
            }
        })
    }
}

fn push_disjunct(branches: &mut Vec<Goal>, g: Goal) {
    match g {
        Goal::Disj(inner) => branches.extend(inner),
        g => branches.push(g),
    }
}

fn is_comparison(t: &Tok) -> bool {
    matches!(t, Tok::Eq | Tok::Ne | Tok::Lt | Tok::Gt | Tok::Le | Tok::Ge)
}

fn check_head(head: &Atom, at: Pos) -> Result<(), SyntaxError> {
    if &*head.name == VIEW_PREDICATE {
        return Err(SyntaxError::new(at, format!("'{VIEW_PREDICATE}' is a reserved predicate")));
    }
    Ok(())
}
