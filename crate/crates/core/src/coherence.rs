//! Coherence of prevision assessments on conditional random quantities.
//!
//! An assessment `P(X_i|H_i) = p_i` is coherent when there is a layered
//! system of distributions: layer 0 lives on the union of all antecedents and
//! satisfies `Σ λ(c)·H_i(c)·(X_i(c) - p_i) = 0` for every item; the items whose
//! antecedent gets zero mass in a maximal-support solution form the next
//! layer, checked on the union of their own antecedents, and so on until no
//! item is left. All systems are solved exactly with [`crate::lp`].

use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::event::{ConditionalEvent, Event};
use crate::lp::{LinearProgram, LpOutcome, Sense};
use crate::rational::{format_rational, int, Rational};
use crate::table::{indicator_table, ValueTable};

/// One assessed conditional prevision `P(X|H) = value`.
#[derive(Debug, Clone, PartialEq)]
pub struct AssessmentItem {
    values: Vec<Rational>,
    antecedent: Event,
    value: Rational,
}

impl AssessmentItem {
    pub fn new(table: &ValueTable, antecedent: Event, value: Rational) -> Result<Self> {
        if table.len() != antecedent.len() {
            return Err(Error::ContextMismatch);
        }
        if antecedent.is_empty() {
            return Err(Error::EmptyAntecedent);
        }
        Ok(Self {
            values: table.numeric()?,
            antecedent,
            value,
        })
    }

    /// `P(E|H) = p` for a conditional event.
    pub fn probability(ce: &ConditionalEvent, p: Rational) -> Result<Self> {
        let table = indicator_table(ce, &p)?;
        Self::new(&table, ce.antecedent().clone(), p)
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn antecedent(&self) -> &Event {
        &self.antecedent
    }

    pub fn value(&self) -> &Rational {
        &self.value
    }

    fn gain(&self, constituent: usize) -> Rational {
        if self.antecedent.contains(constituent) {
            &self.values[constituent] - &self.value
        } else {
            Rational::zero()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AssessmentProblem {
    space: usize,
    items: Vec<AssessmentItem>,
}

impl AssessmentProblem {
    pub fn new(space: usize) -> Self {
        Self {
            space,
            items: Vec::new(),
        }
    }

    pub fn space(&self) -> usize {
        self.space
    }

    pub fn items(&self) -> &[AssessmentItem] {
        &self.items
    }

    pub fn push(&mut self, item: AssessmentItem) -> Result<()> {
        if item.antecedent.len() != self.space {
            return Err(Error::ContextMismatch);
        }
        self.items.push(item);
        Ok(())
    }

    pub fn with(&self, item: AssessmentItem) -> Result<Self> {
        let mut p = self.clone();
        p.push(item)?;
        Ok(p)
    }

    /// Probability assessment on a list of conditional events.
    pub fn from_probabilities<'a>(
        space: usize,
        items: impl IntoIterator<Item = (&'a ConditionalEvent, Rational)>,
    ) -> Result<Self> {
        let mut p = Self::new(space);
        for (ce, v) in items {
            p.push(AssessmentItem::probability(ce, v)?)?;
        }
        Ok(p)
    }
}

/// Distribution found for one recursion layer.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessLayer {
    /// Items checked on this layer.
    pub items: Vec<usize>,
    /// Constituents with positive mass.
    pub masses: Vec<(usize, Rational)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceVerdict {
    pub coherent: bool,
    pub layers: Vec<WitnessLayer>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Self {
        assert!(lo <= hi, "empty interval");
        Self { lo, hi }
    }

    pub fn point(x: Rational) -> Self {
        Self {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}]",
            format_rational(&self.lo),
            format_rational(&self.hi)
        )
    }
}

fn union_of(p: &AssessmentProblem, active: &[usize]) -> Event {
    active.iter().fold(Event::empty(p.space), |acc, &i| {
        &acc | &p.items[i].antecedent
    })
}

fn mass(point: &[Rational], domain: &[usize], event: &Event) -> Rational {
    domain
        .iter()
        .zip(point)
        .filter(|(d, _)| event.contains(**d))
        .fold(Rational::zero(), |acc, (_, x)| acc + x)
}

/// Prevision equations of `active` items as rows over `domain`.
fn premise_program(p: &AssessmentProblem, active: &[usize], domain: &[usize]) -> LinearProgram {
    let mut lp = LinearProgram::new(domain.len());
    for &i in active {
        let item = &p.items[i];
        let row: Vec<Rational> = domain.iter().map(|&d| item.gain(d)).collect();
        if row.iter().all(Zero::is_zero) {
            continue;
        }
        lp.equal(row, Rational::zero());
    }
    lp
}

struct Support {
    witness: Vec<Rational>,
    zero_items: Vec<usize>,
}

/// Solves the layer system (premise equations plus `Σ λ = 1` on `domain`)
/// and splits `active` into items whose antecedent can carry mass and items
/// whose antecedent is null in every solution.
fn max_support(p: &AssessmentProblem, active: &[usize], domain: &[usize]) -> Option<Support> {
    let mut lp = premise_program(p, active, domain);
    lp.equal(vec![int(1); domain.len()], int(1));
    let first = lp.feasible()?;

    let mut solutions = vec![first];
    let mut positive = vec![false; active.len()];
    let mark = |sol: &[Rational], positive: &mut [bool]| {
        for (k, &i) in active.iter().enumerate() {
            if mass(sol, domain, &p.items[i].antecedent).is_positive() {
                positive[k] = true;
            }
        }
    };
    mark(&solutions[0], &mut positive);

    let mut zero_items = Vec::new();
    for (k, &i) in active.iter().enumerate() {
        if positive[k] {
            continue;
        }
        let objective: Vec<Rational> = domain
            .iter()
            .map(|&d| int(p.items[i].antecedent.contains(d) as i64))
            .collect();
        match lp.optimize(&objective, Sense::Maximize) {
            LpOutcome::Optimal { value, point } if value.is_positive() => {
                mark(&point, &mut positive);
                solutions.push(point);
            }
            _ => zero_items.push(i),
        }
    }

    let count = int(solutions.len() as i64);
    let witness = (0..domain.len())
        .map(|d| {
            solutions
                .iter()
                .fold(Rational::zero(), |acc, s| acc + &s[d])
                / &count
        })
        .collect();
    Some(Support {
        witness,
        zero_items,
    })
}

/// Decides coherence; on success the verdict carries one witness per layer.
pub fn check_coherence(p: &AssessmentProblem) -> CoherenceVerdict {
    let mut active: Vec<usize> = (0..p.items.len()).collect();
    let mut layers = Vec::new();
    while !active.is_empty() {
        let domain: Vec<usize> = union_of(p, &active).iter().collect();
        let Some(support) = max_support(p, &active, &domain) else {
            return CoherenceVerdict {
                coherent: false,
                layers,
            };
        };
        layers.push(WitnessLayer {
            items: active.clone(),
            masses: domain
                .iter()
                .zip(support.witness)
                .filter(|(_, m)| !m.is_zero())
                .map(|(d, m)| (*d, m))
                .collect(),
        });
        debug_assert!(support.zero_items.len() < active.len());
        active = support.zero_items;
    }
    CoherenceVerdict {
        coherent: true,
        layers,
    }
}

pub fn is_coherent(p: &AssessmentProblem) -> bool {
    check_coherence(p).coherent
}

/// Exact set of values `z` such that `p` extended with `P(target|antecedent) = z`
/// stays coherent.
///
/// The target table may be affine in `z` itself (entries `a + b·z`), which is
/// how iterated conditionals enter; `1 - b` must be positive on the
/// antecedent. Numeric targets have `b = 0`.
pub fn extension_interval(
    p: &AssessmentProblem,
    target: &ValueTable,
    antecedent: &Event,
) -> Result<Interval> {
    if target.len() != p.space || antecedent.len() != p.space {
        return Err(Error::ContextMismatch);
    }
    if antecedent.is_empty() {
        return Err(Error::EmptyAntecedent);
    }
    let normaliser: Vec<Rational> = target
        .values()
        .iter()
        .map(|v| Rational::from_integer(1.into()) - &v.coeff)
        .collect();
    if antecedent.iter().any(|d| !normaliser[d].is_positive()) {
        return Err(Error::BadTarget);
    }
    if !check_coherence(p).coherent {
        return Err(Error::Incoherent);
    }

    // Either the target's antecedent carries mass on the current layer, or
    // it is null there and moves down together with the null premises.
    let mut active: Vec<usize> = (0..p.items.len()).collect();
    let mut hull: Option<Interval> = None;
    let mut merge = |iv: Interval| {
        hull = Some(match hull.take() {
            None => iv,
            Some(h) => Interval::new(h.lo.min(iv.lo), h.hi.max(iv.hi)),
        });
    };
    loop {
        if active.is_empty() {
            let ratios: Vec<Rational> = antecedent
                .iter()
                .map(|d| &target.get(d).constant / &normaliser[d])
                .collect();
            let lo = ratios.iter().min().cloned().expect("nonempty antecedent");
            let hi = ratios.iter().max().cloned().expect("nonempty antecedent");
            merge(Interval::new(lo, hi));
            break;
        }
        let premises = union_of(p, &active);
        let domain: Vec<usize> = (&premises | antecedent).iter().collect();
        let mut lp = premise_program(p, &active, &domain);
        lp.equal(
            domain
                .iter()
                .map(|&d| {
                    if antecedent.contains(d) {
                        normaliser[d].clone()
                    } else {
                        Rational::zero()
                    }
                })
                .collect(),
            int(1),
        );
        let objective: Vec<Rational> = domain
            .iter()
            .map(|&d| {
                if antecedent.contains(d) {
                    target.get(d).constant.clone()
                } else {
                    Rational::zero()
                }
            })
            .collect();
        match lp.optimize(&objective, Sense::Minimize) {
            LpOutcome::Optimal { value: lo, .. } => {
                let (hi, _) = lp
                    .optimize(&objective, Sense::Maximize)
                    .optimal()
                    .ok_or_else(|| Error::InternalDisagreement("unbounded extension".into()))?;
                merge(Interval::new(lo, hi));
            }
            LpOutcome::Unbounded => {
                return Err(Error::InternalDisagreement("unbounded extension".into()))
            }
            LpOutcome::Infeasible => {}
        }

        let outside: Vec<usize> = (&premises & &!antecedent).iter().collect();
        if outside.is_empty() {
            break;
        }
        match max_support(p, &active, &outside) {
            Some(support) => {
                if support.zero_items.len() >= active.len() {
                    return Err(Error::InternalDisagreement("layer made no progress".into()));
                }
                active = support.zero_items;
            }
            None => break,
        }
    }
    hull.ok_or_else(|| Error::InternalDisagreement("coherent premises without a layer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::AtomContext;
    use crate::rational::{one, ratio, zero};

    fn abc() -> AtomContext {
        AtomContext::new(["A", "B", "C"]).unwrap()
    }

    fn cond(ctx: &AtomContext, e: &str, h: &str) -> ConditionalEvent {
        let parse = |s: &str| match s {
            "A|B" => ctx.atom("A").unwrap() | ctx.atom("B").unwrap(),
            "TRUE" => crate::event::EventExpr::True,
            name => ctx.atom(name).unwrap(),
        };
        ctx.conditional(&parse(e), &parse(h)).unwrap()
    }

    #[test]
    fn self_conditional_forced_to_one() {
        let ctx = abc();
        let aa = cond(&ctx, "A", "A");
        let ok = AssessmentProblem::from_probabilities(8, [(&aa, one())]).unwrap();
        assert!(check_coherence(&ok).coherent);
        let bad = AssessmentProblem::from_probabilities(8, [(&aa, ratio(7, 10))]).unwrap();
        assert!(!check_coherence(&bad).coherent);
    }

    #[test]
    fn weak_transitivity_forces_conclusion() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let a_ab = cond(&ctx, "A", "A|B");
        let ca = cond(&ctx, "C", "A");
        for (z, expected) in [(one(), true), (zero(), false), (ratio(1, 2), false)] {
            let p = AssessmentProblem::from_probabilities(
                8,
                [(&cb, one()), (&ba, one()), (&a_ab, one()), (&ca, z)],
            )
            .unwrap();
            assert_eq!(check_coherence(&p).coherent, expected);
        }
    }

    #[test]
    fn transitivity_admits_zero() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let ca = cond(&ctx, "C", "A");
        let p =
            AssessmentProblem::from_probabilities(8, [(&cb, one()), (&ba, one()), (&ca, zero())])
                .unwrap();
        let verdict = check_coherence(&p);
        assert!(verdict.coherent);
        // the premises put all layer-0 mass away from A
        assert!(verdict.layers.len() >= 2);
    }

    #[test]
    fn witness_layers_satisfy_equations() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let ca = cond(&ctx, "C", "A");
        let p = AssessmentProblem::from_probabilities(
            8,
            [(&cb, ratio(1, 3)), (&ba, ratio(3, 4)), (&ca, ratio(1, 5))],
        )
        .unwrap();
        let verdict = check_coherence(&p);
        assert!(verdict.coherent);
        for layer in &verdict.layers {
            let total = layer.masses.iter().fold(zero(), |a, (_, m)| a + m);
            assert_eq!(total, one());
            for &i in &layer.items {
                let item = &p.items()[i];
                let g = layer
                    .masses
                    .iter()
                    .fold(zero(), |a, (c, m)| a + m * item.gain(*c));
                assert_eq!(g, zero());
            }
        }
    }

    #[test]
    fn unconditional_items_use_one_layer() {
        let ctx = abc();
        let a = cond(&ctx, "A", "TRUE");
        let b = cond(&ctx, "B", "TRUE");
        let p = AssessmentProblem::from_probabilities(8, [(&a, ratio(1, 2)), (&b, ratio(1, 3))])
            .unwrap();
        let v = check_coherence(&p);
        assert!(v.coherent);
        assert_eq!(v.layers.len(), 1);
    }

    #[test]
    fn transitivity_extension_is_unit_interval() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let ca = cond(&ctx, "C", "A");
        let p = AssessmentProblem::from_probabilities(8, [(&cb, one()), (&ba, one())]).unwrap();
        let target = indicator_table(&ca, &zero()).unwrap();
        let iv = extension_interval(&p, &target, ca.antecedent()).unwrap();
        assert_eq!(iv, Interval::new(zero(), one()));
    }

    #[test]
    fn weak_transitivity_extension_is_one() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let a_ab = cond(&ctx, "A", "A|B");
        let ca = cond(&ctx, "C", "A");
        let p =
            AssessmentProblem::from_probabilities(8, [(&cb, one()), (&ba, one()), (&a_ab, one())])
                .unwrap();
        let target = indicator_table(&ca, &zero()).unwrap();
        let iv = extension_interval(&p, &target, ca.antecedent()).unwrap();
        assert_eq!(iv, Interval::point(one()));
    }

    #[test]
    fn extension_of_assessed_item_is_its_value() {
        let ctx = abc();
        let cb = cond(&ctx, "C", "B");
        let ba = cond(&ctx, "B", "A");
        let r = ratio(2, 7);
        let p = AssessmentProblem::from_probabilities(8, [(&cb, r.clone()), (&ba, ratio(1, 2))])
            .unwrap();
        let target = indicator_table(&cb, &zero()).unwrap();
        let iv = extension_interval(&p, &target, cb.antecedent()).unwrap();
        assert_eq!(iv, Interval::point(r));
    }

    #[test]
    fn extension_rejects_incoherent_premises() {
        let ctx = abc();
        let aa = cond(&ctx, "A", "A");
        let p = AssessmentProblem::from_probabilities(8, [(&aa, ratio(1, 2))]).unwrap();
        let target = indicator_table(&aa, &zero()).unwrap();
        assert_eq!(
            extension_interval(&p, &target, aa.antecedent()),
            Err(Error::Incoherent)
        );
    }

    #[test]
    fn degenerate_target_uses_hull_on_antecedent() {
        // P(A|TRUE) = 0 forces A null; B|A is then free in [0, 1]
        let ctx = abc();
        let a = cond(&ctx, "A", "TRUE");
        let ba = cond(&ctx, "B", "A");
        let p = AssessmentProblem::from_probabilities(8, [(&a, zero())]).unwrap();
        let target = indicator_table(&ba, &zero()).unwrap();
        assert_eq!(
            extension_interval(&p, &target, ba.antecedent()).unwrap(),
            Interval::new(zero(), one())
        );
        // ...but A|A stays forced to 1 even on a null antecedent
        let aa = cond(&ctx, "A", "A");
        let target = indicator_table(&aa, &zero()).unwrap();
        assert_eq!(
            extension_interval(&p, &target, aa.antecedent()).unwrap(),
            Interval::point(one())
        );
    }
}
