//! Events over a finite set of atoms, their constituents, and conditional
//! events with three-valued semantics.
//!
//! Every event is materialised as a truth vector over the constituents of
//! its [`AtomContext`]: constituent `i` assigns `true` to atom `k` exactly
//! when bit `k` of `i` is set. Two events are equal when their truth vectors
//! are, so equality is logical equivalence.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{BitAnd, BitOr, Not};

use crate::error::{Error, Result, MAX_ATOMS};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AtomContext {
    names: Vec<String>,
}

impl AtomContext {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::NoAtoms);
        }
        if names.len() > MAX_ATOMS {
            return Err(Error::BudgetExceeded {
                requested: names.len(),
                max: MAX_ATOMS,
            });
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(Error::DuplicateAtom(n.clone()));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_constituents(&self) -> usize {
        1 << self.names.len()
    }

    pub fn constituent(&self, index: usize) -> Constituent {
        assert!(index < self.num_constituents(), "constituent out of range");
        Constituent {
            index,
            atoms: self.names.len(),
        }
    }

    pub fn constituents(&self) -> impl Iterator<Item = Constituent> + '_ {
        (0..self.num_constituents()).map(|i| self.constituent(i))
    }

    pub fn atom(&self, name: &str) -> Result<EventExpr> {
        self.index_of(name)
            .map(EventExpr::Atom)
            .ok_or_else(|| Error::UnknownAtom(name.to_string()))
    }

    /// Truth vector of `expr` over this context's constituents.
    pub fn event(&self, expr: &EventExpr) -> Result<Event> {
        expr.check(self.len())?;
        Ok(Event::from_fn(self.num_constituents(), |i| {
            expr.eval_index(i)
        }))
    }

    pub fn conditional(
        &self,
        consequent: &EventExpr,
        antecedent: &EventExpr,
    ) -> Result<ConditionalEvent> {
        ConditionalEvent::new(self.event(consequent)?, self.event(antecedent)?)
    }

    /// Renders a constituent as a conjunction of literals, e.g. `A ~B C`.
    pub fn describe(&self, c: Constituent) -> String {
        self.names
            .iter()
            .enumerate()
            .map(|(k, n)| {
                if c.index >> k & 1 == 1 {
                    n.clone()
                } else {
                    format!("~{n}")
                }
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One total truth assignment to the atoms of a context.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Constituent {
    index: usize,
    atoms: usize,
}

impl Constituent {
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn value(&self, atom: usize) -> Option<bool> {
        (atom < self.atoms).then(|| self.index >> atom & 1 == 1)
    }
}

/// Boolean formula over atom indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventExpr {
    True,
    False,
    Atom(usize),
    Not(Box<EventExpr>),
    And(Box<EventExpr>, Box<EventExpr>),
    Or(Box<EventExpr>, Box<EventExpr>),
}

impl EventExpr {
    fn check(&self, atoms: usize) -> Result<()> {
        match self {
            EventExpr::True | EventExpr::False => Ok(()),
            EventExpr::Atom(k) if *k < atoms => Ok(()),
            EventExpr::Atom(k) => Err(Error::UnresolvedAtom(*k)),
            EventExpr::Not(e) => e.check(atoms),
            EventExpr::And(a, b) | EventExpr::Or(a, b) => {
                a.check(atoms)?;
                b.check(atoms)
            }
        }
    }

    fn eval_index(&self, index: usize) -> bool {
        match self {
            EventExpr::True => true,
            EventExpr::False => false,
            EventExpr::Atom(k) => index >> k & 1 == 1,
            EventExpr::Not(e) => !e.eval_index(index),
            EventExpr::And(a, b) => a.eval_index(index) && b.eval_index(index),
            EventExpr::Or(a, b) => a.eval_index(index) || b.eval_index(index),
        }
    }

    pub fn eval(&self, c: Constituent) -> Result<bool> {
        self.check(c.atoms)?;
        Ok(self.eval_index(c.index))
    }

    pub fn display<'a>(&'a self, ctx: &'a AtomContext) -> impl fmt::Display + 'a {
        ExprDisplay { expr: self, ctx }
    }
}

pub fn eval_event(e: &EventExpr, c: Constituent) -> Result<bool> {
    e.eval(c)
}

impl Not for EventExpr {
    type Output = EventExpr;
    fn not(self) -> EventExpr {
        EventExpr::Not(Box::new(self))
    }
}

impl BitAnd for EventExpr {
    type Output = EventExpr;
    fn bitand(self, rhs: EventExpr) -> EventExpr {
        EventExpr::And(Box::new(self), Box::new(rhs))
    }
}

impl BitOr for EventExpr {
    type Output = EventExpr;
    fn bitor(self, rhs: EventExpr) -> EventExpr {
        EventExpr::Or(Box::new(self), Box::new(rhs))
    }
}

struct ExprDisplay<'a> {
    expr: &'a EventExpr,
    ctx: &'a AtomContext,
}

fn write_expr(
    e: &EventExpr,
    ctx: &AtomContext,
    min_prec: u8,
    f: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    // precedence: or < and < unary
    let prec = match e {
        EventExpr::Or(..) => 0,
        EventExpr::And(..) => 1,
        _ => 2,
    };
    if prec < min_prec {
        f.write_str("(")?;
    }
    match e {
        EventExpr::True => f.write_str("TRUE")?,
        EventExpr::False => f.write_str("FALSE")?,
        EventExpr::Atom(k) => match ctx.names().get(*k) {
            Some(n) => f.write_str(n)?,
            None => write!(f, "#{k}")?,
        },
        EventExpr::Not(inner) => {
            f.write_str("~")?;
            write_expr(inner, ctx, 2, f)?;
        }
        EventExpr::And(a, b) => {
            write_expr(a, ctx, 1, f)?;
            f.write_str(" & ")?;
            write_expr(b, ctx, 2, f)?;
        }
        EventExpr::Or(a, b) => {
            write_expr(a, ctx, 0, f)?;
            f.write_str(" | ")?;
            write_expr(b, ctx, 1, f)?;
        }
    }
    if prec < min_prec {
        f.write_str(")")?;
    }
    Ok(())
}

impl fmt::Display for ExprDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self.expr, self.ctx, 0, f)
    }
}

/// Truth vector over the constituents of a context.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Event {
    len: usize,
    words: Vec<u64>,
}

impl Event {
    pub fn empty(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn sure(len: usize) -> Self {
        !&Self::empty(len)
    }

    pub fn from_fn(len: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        let mut e = Self::empty(len);
        for i in 0..len {
            if f(i) {
                e.words[i / 64] |= 1 << (i % 64);
            }
        }
        e
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut e = Self::empty(len);
        for i in indices {
            assert!(i < len, "constituent out of range");
            e.words[i / 64] |= 1 << (i % 64);
        }
        e
    }

    /// Number of constituents in the underlying space.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn is_sure(&self) -> bool {
        self.count() == self.len
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Logical implication: every constituent of `self` is in `other`.
    pub fn implies(&self, other: &Event) -> bool {
        self.len == other.len
            && self
                .words
                .iter()
                .zip(&other.words)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.contains(i))
    }

    fn zip_with(&self, other: &Event, f: impl Fn(u64, u64) -> u64) -> Event {
        assert_eq!(self.len, other.len, "events from different contexts");
        Event {
            len: self.len,
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    fn mask_tail(mut self) -> Self {
        let rem = self.len % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
        self
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let bits: String = (0..self.len)
            .map(|i| if self.contains(i) { '1' } else { '0' })
            .collect();
        write!(f, "Event({bits})")
    }
}

impl BitAnd for &Event {
    type Output = Event;
    fn bitand(self, rhs: &Event) -> Event {
        self.zip_with(rhs, |a, b| a & b)
    }
}

impl BitOr for &Event {
    type Output = Event;
    fn bitor(self, rhs: &Event) -> Event {
        self.zip_with(rhs, |a, b| a | b)
    }
}

impl Not for &Event {
    type Output = Event;
    fn not(self) -> Event {
        Event {
            len: self.len,
            words: self.words.iter().map(|w| !w).collect(),
        }
        .mask_tail()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Trivalent {
    True,
    False,
    Void,
}

impl Trivalent {
    pub fn negate(self) -> Self {
        match self {
            Trivalent::True => Trivalent::False,
            Trivalent::False => Trivalent::True,
            Trivalent::Void => Trivalent::Void,
        }
    }
}

/// A conditional event `E|H`, stored as the pair of truth vectors.
///
/// Equality, ordering and hashing are semantic: two conditionals are the same
/// when their antecedents coincide and their consequents agree on the
/// antecedent. The optional label is carried for display only.
#[derive(Debug, Clone)]
pub struct ConditionalEvent {
    consequent: Event,
    antecedent: Event,
    // consequent & antecedent, cached for comparisons
    verified: Event,
    label: Option<String>,
}

impl ConditionalEvent {
    pub fn new(consequent: Event, antecedent: Event) -> Result<Self> {
        if consequent.len() != antecedent.len() {
            return Err(Error::ContextMismatch);
        }
        if antecedent.is_empty() {
            return Err(Error::EmptyAntecedent);
        }
        let verified = &consequent & &antecedent;
        Ok(Self {
            consequent,
            antecedent,
            verified,
            label: None,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn consequent(&self) -> &Event {
        &self.consequent
    }

    pub fn antecedent(&self) -> &Event {
        &self.antecedent
    }

    /// Number of constituents in the underlying space.
    pub fn space(&self) -> usize {
        self.antecedent.len()
    }

    /// `EH`: the constituents on which the conditional is true.
    pub fn verifier(&self) -> &Event {
        &self.verified
    }

    /// `~E H`: the constituents on which the conditional is false.
    pub fn falsifier(&self) -> Event {
        &self.antecedent & &!&self.consequent
    }

    pub fn outcome_at(&self, index: usize) -> Trivalent {
        if !self.antecedent.contains(index) {
            Trivalent::Void
        } else if self.consequent.contains(index) {
            Trivalent::True
        } else {
            Trivalent::False
        }
    }

    pub fn outcome(&self, c: Constituent) -> Trivalent {
        self.outcome_at(c.index())
    }

    pub fn negation(&self) -> Self {
        let mut n = Self::new(!&self.consequent, self.antecedent.clone())
            .expect("antecedent already checked");
        n.label = self.label.as_ref().map(|l| format!("~{l}"));
        n
    }

    fn key(&self) -> (&Event, &Event) {
        (&self.antecedent, &self.verified)
    }
}

impl PartialEq for ConditionalEvent {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for ConditionalEvent {}

impl PartialOrd for ConditionalEvent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ConditionalEvent {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl Hash for ConditionalEvent {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> AtomContext {
        AtomContext::new(["A", "B", "C"]).unwrap()
    }

    fn at(ctx: &AtomContext, assignment: &[(&str, bool)]) -> Constituent {
        let mut idx = 0;
        for (name, v) in assignment {
            if *v {
                idx |= 1 << ctx.index_of(name).unwrap();
            }
        }
        ctx.constituent(idx)
    }

    #[test]
    fn declares_atoms() {
        assert_eq!(abc().num_constituents(), 8);
        assert_eq!(AtomContext::new(["A"]).unwrap().num_constituents(), 2);
    }

    #[test]
    fn rejects_too_many_atoms() {
        let names: Vec<String> = (0..17).map(|i| format!("X{i}")).collect();
        assert_eq!(
            AtomContext::new(names),
            Err(Error::BudgetExceeded {
                requested: 17,
                max: 16
            })
        );
        let names: Vec<String> = (0..16).map(|i| format!("X{i}")).collect();
        assert_eq!(AtomContext::new(names).unwrap().num_constituents(), 1 << 16);
    }

    #[test]
    fn rejects_duplicates_and_empty() {
        assert_eq!(
            AtomContext::new(["A", "B", "A"]),
            Err(Error::DuplicateAtom("A".into()))
        );
        assert_eq!(AtomContext::new(Vec::<String>::new()), Err(Error::NoAtoms));
    }

    #[test]
    fn evaluates_expressions() {
        let ctx = abc();
        let a = ctx.atom("A").unwrap();
        let b = ctx.atom("B").unwrap();
        let contradiction = a.clone() & !a.clone();
        for c in ctx.constituents() {
            assert!(!eval_event(&contradiction, c).unwrap());
            assert!(eval_event(&EventExpr::True, c).unwrap());
        }
        let c = at(&ctx, &[("A", false), ("B", true)]);
        assert!(eval_event(&(a | b), c).unwrap());
    }

    #[test]
    fn unresolved_atom_is_an_error() {
        let ctx = AtomContext::new(["A"]).unwrap();
        let e = EventExpr::Atom(3);
        assert_eq!(e.eval(ctx.constituent(0)), Err(Error::UnresolvedAtom(3)));
        assert_eq!(ctx.event(&e), Err(Error::UnresolvedAtom(3)));
    }

    #[test]
    fn trivalent_outcomes() {
        let ctx = AtomContext::new(["A", "H"]).unwrap();
        let ce = ctx
            .conditional(&ctx.atom("A").unwrap(), &ctx.atom("H").unwrap())
            .unwrap();
        assert_eq!(
            ce.outcome(at(&ctx, &[("A", true), ("H", true)])),
            Trivalent::True
        );
        assert_eq!(
            ce.outcome(at(&ctx, &[("A", true), ("H", false)])),
            Trivalent::Void
        );
        assert_eq!(
            ce.outcome(at(&ctx, &[("A", false), ("H", true)])),
            Trivalent::False
        );
        assert_eq!(
            ce.outcome(at(&ctx, &[("A", false), ("H", false)])),
            Trivalent::Void
        );
    }

    #[test]
    fn negation_swaps_true_and_false() {
        let ctx = abc();
        let ce = ctx
            .conditional(
                &(ctx.atom("A").unwrap() | ctx.atom("C").unwrap()),
                &ctx.atom("B").unwrap(),
            )
            .unwrap();
        let neg = ce.negation();
        for c in ctx.constituents() {
            assert_eq!(neg.outcome(c), ce.outcome(c).negate());
        }
        assert_eq!(neg.negation(), ce);
    }

    #[test]
    fn empty_antecedent_rejected() {
        let ctx = abc();
        let a = ctx.atom("A").unwrap();
        assert_eq!(
            ctx.conditional(&a, &(a.clone() & !a.clone())).unwrap_err(),
            Error::EmptyAntecedent
        );
    }

    #[test]
    fn equality_is_semantic() {
        let ctx = abc();
        let a = ctx.atom("A").unwrap();
        let b = ctx.atom("B").unwrap();
        // A|B and (A & B)|B are the same conditional event
        let x = ctx.conditional(&a, &b).unwrap();
        let y = ctx.conditional(&(a.clone() & b.clone()), &b).unwrap();
        assert_eq!(x, y);
        let z = ctx.conditional(&a, &(b.clone() | a.clone())).unwrap();
        assert_ne!(x, z);
    }

    #[test]
    fn event_algebra_laws() {
        let len = 70;
        let a = Event::from_fn(len, |i| i % 3 == 0);
        let b = Event::from_fn(len, |i| i % 2 == 0);
        assert_eq!(!&!&a, a);
        assert_eq!(!&(&a & &b), &!&a | &!&b);
        assert!((&a & &b).implies(&a));
        assert_eq!(Event::sure(len).count(), len);
        assert!(Event::sure(len).is_sure());
        assert!((&a & &!&a).is_empty());
    }

    #[test]
    fn display_uses_minimal_parentheses() {
        let ctx = abc();
        let a = ctx.atom("A").unwrap();
        let b = ctx.atom("B").unwrap();
        let c = ctx.atom("C").unwrap();
        let e = (a.clone() | b.clone()) & !c.clone();
        assert_eq!(e.display(&ctx).to_string(), "(A | B) & ~C");
        let e = a | (b & c);
        assert_eq!(e.display(&ctx).to_string(), "A | B & C");
    }
}
