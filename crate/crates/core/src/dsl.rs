//! Problem files.
//!
//! ```text
//! atoms  A B C
//! event  AB = A | B
//! cond   T1 = C given B
//! cond   T2 = A given AB
//! assess P(T1) = 1/2
//! assess P(T1 & T2) = 0.25
//! query  coherence
//! query  bounds T1 & T2
//! query  p-consistent T1 T2
//! query  p-entails premises=[T1,T2] conclusion=T3
//! query  p-entails rule=weak-transitivity
//! query  iterate consequent=[T3] antecedent=[T1,T2]
//! query  table T1 & T2
//! ```
//!
//! One statement per line, `#` starts a comment. Atoms, events and
//! conditionals share one namespace and must be declared before use.

use std::fmt;

use thiserror::Error;

use crate::error::Error as EngineError;
use crate::event::{AtomContext, ConditionalEvent, EventExpr};
use crate::rational::{format_rational, in_unit_interval, parse_rational, Rational, RationalError};

const KEYWORDS: [&str; 3] = ["TRUE", "FALSE", "given"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("undeclared identifier `{0}`")]
    Undeclared(String),
    #[error("`{0}` is already declared")]
    Redeclared(String),
    #[error("`{0}` is not a conditional")]
    NotConditional(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("{0}")]
    Rational(#[from] RationalError),
    #[error("probability {} outside [0, 1]", format_rational(.0))]
    OutOfRange(Rational),
    #[error("{0}")]
    Engine(#[from] EngineError),
}

/// Event expression as written, names unresolved.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    True,
    False,
    Name(String),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 0,
            Expr::And(..) => 1,
            _ => 2,
        }
    }

    fn write(&self, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let paren = self.precedence() < min;
        if paren {
            f.write_str("(")?;
        }
        match self {
            Expr::True => f.write_str("TRUE")?,
            Expr::False => f.write_str("FALSE")?,
            Expr::Name(n) => f.write_str(n)?,
            Expr::Not(e) => {
                f.write_str("~")?;
                e.write(2, f)?;
            }
            Expr::And(l, r) => {
                l.write(1, f)?;
                f.write_str(" & ")?;
                r.write(2, f)?;
            }
            Expr::Or(l, r) => {
                l.write(0, f)?;
                f.write_str(" | ")?;
                r.write(1, f)?;
            }
        }
        if paren {
            f.write_str(")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDecl {
    pub name: String,
    pub expr: Expr,
    pub resolved: EventExpr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondDecl {
    pub name: String,
    pub consequent: Expr,
    pub antecedent: Expr,
    pub event: ConditionalEvent,
}

/// `P(names joined by &) = value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssessDecl {
    pub names: Vec<String>,
    pub value: Rational,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EntailsTarget {
    Explicit {
        premises: Vec<String>,
        conclusion: String,
    },
    Rule(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Query {
    Coherence,
    Bounds(Vec<String>),
    PConsistent(Vec<String>),
    PEntails(EntailsTarget),
    Iterate {
        consequent: Vec<String>,
        antecedent: Vec<String>,
    },
    Table(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Problem {
    pub context: Option<AtomContext>,
    pub events: Vec<EventDecl>,
    pub conds: Vec<CondDecl>,
    pub assessments: Vec<AssessDecl>,
    pub queries: Vec<(usize, Query)>,
}

impl Problem {
    pub fn cond(&self, name: &str) -> Option<&CondDecl> {
        self.conds.iter().find(|c| c.name == name)
    }

    pub fn conditional(&self, name: &str) -> Option<&ConditionalEvent> {
        self.cond(name).map(|c| &c.event)
    }
}

struct Cursor<'a> {
    text: &'a str,
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn column(&self) -> usize {
        self.text[..self.pos].chars().count() + 1
    }

    fn error_at(&self, column: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: self.line,
            column,
            kind,
        }
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        self.error_at(self.column(), kind)
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.error(ParseErrorKind::Syntax(msg.into()))
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.rest().chars().next()
    }

    fn at_end(&mut self) -> bool {
        self.peek().is_none()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(format!("expected `{c}`")))
        }
    }

    /// `[A-Za-z_][A-Za-z0-9_-]*`, with its column.
    fn word(&mut self) -> Result<(String, usize), ParseError> {
        self.skip_ws();
        let column = self.column();
        let rest = self.rest();
        let mut chars = rest.char_indices();
        match chars.next() {
            Some((_, c)) if c.is_ascii_alphabetic() || c == '_' => {}
            _ => return Err(self.syntax("expected a name")),
        }
        let end = chars
            .find(|(_, c)| !(c.is_ascii_alphanumeric() || *c == '_' || *c == '-'))
            .map_or(rest.len(), |(i, _)| i);
        self.pos += end;
        Ok((rest[..end].to_string(), column))
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        let save = self.pos;
        match self.word() {
            Ok((w, _)) if w == kw => Ok(()),
            _ => {
                self.pos = save;
                Err(self.syntax(format!("expected `{kw}`")))
            }
        }
    }

    fn finish(&mut self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.syntax("unexpected trailing input"))
        }
    }
}

#[derive(Default)]
struct Parser {
    problem: Problem,
}

enum Symbol<'p> {
    Atom,
    Event(&'p EventDecl),
    Cond,
}

impl Parser {
    fn lookup(&self, name: &str) -> Option<Symbol<'_>> {
        if let Some(ctx) = &self.problem.context {
            if ctx.index_of(name).is_some() {
                return Some(Symbol::Atom);
            }
        }
        if let Some(e) = self.problem.events.iter().find(|e| e.name == name) {
            return Some(Symbol::Event(e));
        }
        self.problem.cond(name).map(|_| Symbol::Cond)
    }

    fn declare(&self, cur: &Cursor, name: &str, column: usize) -> Result<(), ParseError> {
        if KEYWORDS.contains(&name) {
            return Err(cur.error_at(column, ParseErrorKind::Reserved(name.into())));
        }
        if self.lookup(name).is_some() {
            return Err(cur.error_at(column, ParseErrorKind::Redeclared(name.into())));
        }
        Ok(())
    }

    fn line(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        if cur.at_end() {
            return Ok(());
        }
        let (head, column) = cur.word()?;
        match head.as_str() {
            "atoms" => self.atoms(cur, column),
            "event" => self.event(cur),
            "cond" => self.cond(cur),
            "assess" => self.assess(cur),
            "query" => self.query(cur),
            other => Err(cur.error_at(
                column,
                ParseErrorKind::Syntax(format!("unknown statement `{other}`")),
            )),
        }
    }

    fn atoms(&mut self, cur: &mut Cursor, column: usize) -> Result<(), ParseError> {
        if self.problem.context.is_some() {
            return Err(cur.error_at(
                column,
                ParseErrorKind::Syntax("atoms already declared".into()),
            ));
        }
        let mut names = Vec::new();
        while !cur.at_end() {
            let (name, col) = cur.word()?;
            if KEYWORDS.contains(&name.as_str()) {
                return Err(cur.error_at(col, ParseErrorKind::Reserved(name)));
            }
            if names.contains(&name) || self.lookup(&name).is_some() {
                return Err(cur.error_at(col, ParseErrorKind::Redeclared(name)));
            }
            names.push(name);
        }
        if names.is_empty() {
            return Err(cur.syntax("expected at least one atom"));
        }
        let ctx = AtomContext::new(names).map_err(|e| cur.error_at(column, e.into()))?;
        self.problem.context = Some(ctx);
        Ok(())
    }

    fn event(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        let (name, column) = cur.word()?;
        self.declare(cur, &name, column)?;
        cur.expect('=')?;
        let (expr, resolved) = self.expr(cur)?;
        cur.finish()?;
        self.problem.events.push(EventDecl {
            name,
            expr,
            resolved,
        });
        Ok(())
    }

    fn cond(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        let (name, column) = cur.word()?;
        self.declare(cur, &name, column)?;
        cur.expect('=')?;
        let (consequent, e) = self.expr(cur)?;
        cur.keyword("given")?;
        cur.skip_ws();
        let antecedent_column = cur.column();
        let (antecedent, h) = self.expr(cur)?;
        cur.finish()?;
        let ctx = self.problem.context.as_ref().expect("expr resolved atoms");
        let event = ctx
            .conditional(&e, &h)
            .map_err(|err| cur.error_at(antecedent_column, err.into()))?
            .with_label(name.clone());
        self.problem.conds.push(CondDecl {
            name,
            consequent,
            antecedent,
            event,
        });
        Ok(())
    }

    fn cond_name(&self, cur: &mut Cursor) -> Result<String, ParseError> {
        let (name, column) = cur.word()?;
        match self.lookup(&name) {
            Some(Symbol::Cond) => Ok(name),
            Some(_) => Err(cur.error_at(column, ParseErrorKind::NotConditional(name))),
            None => Err(cur.error_at(column, ParseErrorKind::Undeclared(name))),
        }
    }

    /// `N & N & ...`
    fn cond_conjunction(&self, cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
        let mut names = vec![self.cond_name(cur)?];
        while cur.eat('&') {
            names.push(self.cond_name(cur)?);
        }
        Ok(names)
    }

    /// `[N, N, ...]`
    fn cond_list(&self, cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
        cur.expect('[')?;
        let mut names = vec![self.cond_name(cur)?];
        while cur.eat(',') {
            names.push(self.cond_name(cur)?);
        }
        cur.expect(']')?;
        Ok(names)
    }

    fn assess(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        cur.keyword("P")?;
        cur.expect('(')?;
        let names = self.cond_conjunction(cur)?;
        cur.expect(')')?;
        cur.expect('=')?;
        cur.skip_ws();
        let column = cur.column();
        let literal = cur.rest().trim();
        let value = parse_rational(literal).map_err(|e| cur.error_at(column, e.into()))?;
        if !in_unit_interval(&value) {
            return Err(cur.error_at(column, ParseErrorKind::OutOfRange(value)));
        }
        cur.pos = cur.text.len();
        self.problem.assessments.push(AssessDecl {
            names,
            value,
            line: cur.line,
        });
        Ok(())
    }

    fn key(&self, cur: &mut Cursor, key: &str) -> Result<(), ParseError> {
        cur.keyword(key)?;
        cur.expect('=')
    }

    fn query(&mut self, cur: &mut Cursor) -> Result<(), ParseError> {
        let (kind, column) = cur.word()?;
        let q = match kind.as_str() {
            "coherence" => Query::Coherence,
            "bounds" => Query::Bounds(self.cond_conjunction(cur)?),
            "table" => Query::Table(self.cond_conjunction(cur)?),
            "p-consistent" => {
                let mut names = Vec::new();
                while !cur.at_end() {
                    names.push(self.cond_name(cur)?);
                }
                Query::PConsistent(names)
            }
            "p-entails" => {
                let save = cur.pos;
                let (key, _) = cur.word()?;
                if key == "rule" {
                    cur.expect('=')?;
                    let (name, _) = cur.word()?;
                    Query::PEntails(EntailsTarget::Rule(name))
                } else {
                    cur.pos = save;
                    self.key(cur, "premises")?;
                    let premises = self.cond_list(cur)?;
                    self.key(cur, "conclusion")?;
                    let conclusion = self.cond_name(cur)?;
                    Query::PEntails(EntailsTarget::Explicit {
                        premises,
                        conclusion,
                    })
                }
            }
            "iterate" => {
                self.key(cur, "consequent")?;
                let consequent = self.cond_list(cur)?;
                self.key(cur, "antecedent")?;
                let antecedent = self.cond_list(cur)?;
                Query::Iterate {
                    consequent,
                    antecedent,
                }
            }
            other => {
                return Err(cur.error_at(
                    column,
                    ParseErrorKind::Syntax(format!("unknown query `{other}`")),
                ))
            }
        };
        cur.finish()?;
        self.problem.queries.push((cur.line, q));
        Ok(())
    }

    fn expr(&self, cur: &mut Cursor) -> Result<(Expr, EventExpr), ParseError> {
        let (mut e, mut r) = self.and_expr(cur)?;
        while cur.eat('|') {
            let (e2, r2) = self.and_expr(cur)?;
            e = Expr::Or(Box::new(e), Box::new(e2));
            r = r | r2;
        }
        Ok((e, r))
    }

    fn and_expr(&self, cur: &mut Cursor) -> Result<(Expr, EventExpr), ParseError> {
        let (mut e, mut r) = self.unary(cur)?;
        while cur.eat('&') {
            let (e2, r2) = self.unary(cur)?;
            e = Expr::And(Box::new(e), Box::new(e2));
            r = r & r2;
        }
        Ok((e, r))
    }

    fn unary(&self, cur: &mut Cursor) -> Result<(Expr, EventExpr), ParseError> {
        if cur.eat('~') {
            let (e, r) = self.unary(cur)?;
            return Ok((Expr::Not(Box::new(e)), !r));
        }
        if cur.eat('(') {
            let inner = self.expr(cur)?;
            cur.expect(')')?;
            return Ok(inner);
        }
        let (name, column) = cur.word()?;
        match name.as_str() {
            "TRUE" => return Ok((Expr::True, EventExpr::True)),
            "FALSE" => return Ok((Expr::False, EventExpr::False)),
            "given" => {
                return Err(cur.error_at(column, ParseErrorKind::Syntax("expected an event".into())))
            }
            _ => {}
        }
        let resolved = match self.lookup(&name) {
            Some(Symbol::Atom) => self
                .problem
                .context
                .as_ref()
                .expect("atom found in context")
                .atom(&name)
                .expect("atom found in context"),
            Some(Symbol::Event(decl)) => decl.resolved.clone(),
            Some(Symbol::Cond) => {
                return Err(cur.error_at(
                    column,
                    ParseErrorKind::Syntax(format!("conditional `{name}` used as an event")),
                ))
            }
            None => return Err(cur.error_at(column, ParseErrorKind::Undeclared(name))),
        };
        Ok((Expr::Name(name), resolved))
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut parser = Parser::default();
    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let mut cur = Cursor {
            text: content,
            pos: 0,
            line: i + 1,
        };
        parser.line(&mut cur)?;
    }
    Ok(parser.problem)
}

/// Canonical text of a problem: declarations grouped by kind, rationals as
/// `p/q`, minimal parentheses.
pub fn print_problem(p: &Problem) -> String {
    let mut out = String::new();
    if let Some(ctx) = &p.context {
        out.push_str(&format!("atoms {}\n", ctx.names().join(" ")));
    }
    for e in &p.events {
        out.push_str(&format!("event {} = {}\n", e.name, e.expr));
    }
    for c in &p.conds {
        out.push_str(&format!(
            "cond {} = {} given {}\n",
            c.name, c.consequent, c.antecedent
        ));
    }
    for a in &p.assessments {
        out.push_str(&format!(
            "assess P({}) = {}\n",
            a.names.join(" & "),
            format_rational(&a.value)
        ));
    }
    for (_, q) in &p.queries {
        out.push_str("query ");
        out.push_str(&print_query(q));
        out.push('\n');
    }
    out
}

pub fn print_query(q: &Query) -> String {
    match q {
        Query::Coherence => "coherence".into(),
        Query::Bounds(n) => format!("bounds {}", n.join(" & ")),
        Query::Table(n) => format!("table {}", n.join(" & ")),
        Query::PConsistent(n) if n.is_empty() => "p-consistent".into(),
        Query::PConsistent(n) => format!("p-consistent {}", n.join(" ")),
        Query::PEntails(EntailsTarget::Rule(r)) => format!("p-entails rule={r}"),
        Query::PEntails(EntailsTarget::Explicit {
            premises,
            conclusion,
        }) => format!(
            "p-entails premises=[{}] conclusion={conclusion}",
            premises.join(",")
        ),
        Query::Iterate {
            consequent,
            antecedent,
        } => format!(
            "iterate consequent=[{}] antecedent=[{}]",
            consequent.join(","),
            antecedent.join(",")
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    const WEAK: &str = "\
# weak transitivity
atoms A B C
event AB = A | B
cond T1 = C given B
cond T2 = B given A
cond T3 = A given AB
cond T4 = C given A
assess P(T1) = 1
assess P(T1 & T2) = 0.5
query p-entails premises=[T1, T2, T3] conclusion=T4
query bounds T1 & T2
query iterate consequent=[T4] antecedent=[T1,T2,T3]
query p-consistent
query p-entails rule=transitivity
";

    #[test]
    fn parses_full_file() {
        let p = parse_problem(WEAK).unwrap();
        assert_eq!(p.context.as_ref().unwrap().len(), 3);
        assert_eq!(p.conds.len(), 4);
        assert_eq!(p.assessments[1].value, ratio(1, 2));
        assert_eq!(p.queries.len(), 5);
        assert_eq!(p.conditional("T3").unwrap().label(), Some("T3"));
    }

    #[test]
    fn stores_exact_rational() {
        let p = parse_problem("atoms A B C\ncond T = C given B\nassess P(T) = 7/10\n").unwrap();
        assert_eq!(p.assessments[0].value, ratio(7, 10));
        assert_eq!(p.conds.len(), 1);
    }

    #[test]
    fn round_trip_is_stable() {
        let p = parse_problem(WEAK).unwrap();
        let printed = print_problem(&p);
        let q = parse_problem(&printed).unwrap();
        assert_eq!(print_problem(&q), printed);
        assert_eq!(p.conds, q.conds);
        assert_eq!(p.events, q.events);
        assert_eq!(
            p.queries.iter().map(|q| &q.1).collect::<Vec<_>>(),
            q.queries.iter().map(|q| &q.1).collect::<Vec<_>>()
        );
    }

    #[test]
    fn empty_antecedent_is_rejected() {
        let err = parse_problem("atoms A B\ncond BAD = A given (A & ~A)\n").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::Engine(EngineError::EmptyAntecedent)
        );
        assert_eq!((err.line, err.column), (2, 20));
    }

    #[test]
    fn undeclared_names_have_locations() {
        let err = parse_problem("atoms A\ncond T = A given Q\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Undeclared("Q".into()));
        assert_eq!((err.line, err.column), (2, 18));
        let err = parse_problem("cond T = A given A\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Undeclared("A".into()));
    }

    #[test]
    fn probability_out_of_range() {
        let err = parse_problem("atoms A\ncond T = A given TRUE\nassess P(T) = 3/2\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::OutOfRange(ratio(3, 2)));
        let err = parse_problem("atoms A\ncond T = A given TRUE\nassess P(T) = 1/0\n").unwrap_err();
        assert_eq!(
            err.kind,
            ParseErrorKind::Rational(RationalError::ZeroDenominator)
        );
    }

    #[test]
    fn namespace_and_keywords() {
        let err = parse_problem("atoms A\nevent A = A\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Redeclared("A".into()));
        let err = parse_problem("atoms A given\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::Reserved("given".into()));
        let err = parse_problem("atoms A\nassess P(A) = 1\n").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NotConditional("A".into()));
    }

    #[test]
    fn precedence_and_printing() {
        let p =
            parse_problem("atoms A B C\nevent E = ~A | B & C\nevent F = (A | B) & ~(C)\n").unwrap();
        assert_eq!(p.events[0].expr.to_string(), "~A | B & C");
        assert_eq!(p.events[1].expr.to_string(), "(A | B) & ~C");
        let ctx = p.context.as_ref().unwrap();
        let expected = !ctx.atom("A").unwrap() | (ctx.atom("B").unwrap() & ctx.atom("C").unwrap());
        assert_eq!(
            ctx.event(&p.events[0].resolved).unwrap(),
            ctx.event(&expected).unwrap()
        );
    }

    #[test]
    fn syntax_errors() {
        for bad in [
            "atoms\n",
            "atoms A\natoms B\n",
            "atoms A\ncond T = A\n",
            "atoms A\ncond T = A given TRUE extra\n",
            "atoms A\nquery frobnicate\n",
            "atoms A\ncond T = A given TRUE\nquery bounds T &\n",
            "hello\n",
        ] {
            assert!(parse_problem(bad).is_err(), "{bad}");
        }
    }
}
