//! Conjunctions of conditional events.
//!
//! The conjunction of a family takes value 1 where every member is true, 0
//! where some member is false, and otherwise the prevision `x_S` of the
//! sub-conjunction of the members that are void. Subsets of a family are
//! addressed by bitmasks over its canonical order.

use std::collections::BTreeMap;

use crate::coherence::{
    check_coherence, extension_interval, AssessmentItem, AssessmentProblem, Interval,
};
use crate::error::{Error, Result, MAX_FAMILY};
use crate::event::{ConditionalEvent, Event, Trivalent};
use crate::rational::{in_unit_interval, int, midpoint, one, zero, Rational};
use crate::table::{Affine, ValueTable};

/// A set of conditional events in canonical order, deduplicated semantically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Family {
    members: Vec<ConditionalEvent>,
}

impl Family {
    pub fn new(members: impl IntoIterator<Item = ConditionalEvent>) -> Result<Self> {
        let mut members: Vec<ConditionalEvent> = members.into_iter().collect();
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let space = members[0].space();
        if members.iter().any(|m| m.space() != space) {
            return Err(Error::ContextMismatch);
        }
        members.sort();
        members.dedup();
        if members.len() > MAX_FAMILY {
            return Err(Error::FamilyTooLarge(members.len()));
        }
        Ok(Self { members })
    }

    pub fn single(ce: ConditionalEvent) -> Self {
        Self { members: vec![ce] }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[ConditionalEvent] {
        &self.members
    }

    pub fn get(&self, i: usize) -> &ConditionalEvent {
        &self.members[i]
    }

    /// Number of constituents in the underlying space.
    pub fn space(&self) -> usize {
        self.members[0].space()
    }

    pub fn full_mask(&self) -> u32 {
        (1u32 << self.members.len()) - 1
    }

    pub fn index_of(&self, ce: &ConditionalEvent) -> Option<usize> {
        self.members.binary_search(ce).ok()
    }

    /// Mask of `sub` inside this family.
    pub fn mask_of(&self, sub: &Family) -> Result<u32> {
        sub.members.iter().try_fold(0u32, |acc, m| {
            self.index_of(m)
                .map(|i| acc | (1 << i))
                .ok_or(Error::NotInFamily)
        })
    }

    pub fn subfamily(&self, mask: u32) -> Family {
        Family {
            members: self
                .members
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, m)| m.clone())
                .collect(),
        }
    }

    /// `∨ H_i` over the members in `mask`.
    pub fn antecedent(&self, mask: u32) -> Event {
        self.members
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .fold(Event::empty(self.space()), |acc, (_, m)| {
                &acc | m.antecedent()
            })
    }

    /// Masks of all nonempty subsets, smallest first.
    pub fn subsets_by_size(&self) -> Vec<u32> {
        let mut masks: Vec<u32> = (1..=self.full_mask()).collect();
        masks.sort_by_key(|m| (m.count_ones(), *m));
        masks
    }
}

pub fn conjoin_families(f1: &Family, f2: &Family) -> Result<Family> {
    if f1.space() != f2.space() {
        return Err(Error::ContextMismatch);
    }
    Family::new(f1.members.iter().chain(&f2.members).cloned())
}

/// Value of a sub-conjunction at one constituent, before previsions are
/// substituted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConjValue {
    One,
    Zero,
    /// Prevision of the sub-conjunction over the void members.
    Prev(u32),
}

pub fn conjunction_value(f: &Family, mask: u32, constituent: usize) -> ConjValue {
    let mut void = 0u32;
    for (i, m) in f.members.iter().enumerate() {
        if mask & (1 << i) == 0 {
            continue;
        }
        match m.outcome_at(constituent) {
            Trivalent::False => return ConjValue::Zero,
            Trivalent::Void => void |= 1 << i,
            Trivalent::True => {}
        }
    }
    if void == 0 {
        ConjValue::One
    } else {
        ConjValue::Prev(void)
    }
}

/// Previsions `x_S` on the nonempty subsets of a family. Unassessed subsets
/// are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrevisionAssessment {
    family: Family,
    values: Vec<Option<Rational>>,
}

impl PrevisionAssessment {
    pub fn new(family: Family) -> Self {
        let size = 1usize << family.len();
        Self {
            family,
            values: vec![None; size],
        }
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn set(&mut self, mask: u32, x: Rational) -> Result<()> {
        if mask == 0 || mask > self.family.full_mask() {
            return Err(Error::NotInFamily);
        }
        if !in_unit_interval(&x) {
            return Err(Error::OutOfRange(x));
        }
        self.values[mask as usize] = Some(x);
        Ok(())
    }

    pub fn with(mut self, mask: u32, x: Rational) -> Result<Self> {
        self.set(mask, x)?;
        Ok(self)
    }

    pub fn clear(&mut self, mask: u32) {
        if let Some(v) = self.values.get_mut(mask as usize) {
            *v = None;
        }
    }

    pub fn get(&self, mask: u32) -> Option<&Rational> {
        self.values.get(mask as usize).and_then(Option::as_ref)
    }

    /// Assessed masks in increasing order.
    pub fn assessed(&self) -> impl Iterator<Item = (u32, &Rational)> + '_ {
        self.values
            .iter()
            .enumerate()
            .filter_map(|(m, v)| v.as_ref().map(|v| (m as u32, v)))
    }

    pub fn is_complete(&self) -> bool {
        (1..=self.family.full_mask()).all(|m| self.get(m).is_some())
    }

    /// The same previsions re-indexed on a subfamily.
    pub fn restrict(&self, sub: &Family) -> Result<PrevisionAssessment> {
        let positions: Vec<usize> = sub
            .members
            .iter()
            .map(|m| self.family.index_of(m).ok_or(Error::NotInFamily))
            .collect::<Result<_>>()?;
        let mut out = PrevisionAssessment::new(sub.clone());
        for mask in 1..=sub.full_mask() {
            let outer = lift_mask(mask, &positions);
            if let Some(v) = self.get(outer) {
                out.values[mask as usize] = Some(v.clone());
            }
        }
        Ok(out)
    }
}

fn lift_mask(mask: u32, positions: &[usize]) -> u32 {
    positions
        .iter()
        .enumerate()
        .filter(|(k, _)| mask & (1 << k) != 0)
        .fold(0, |acc, (_, &p)| acc | (1 << p))
}

/// Table of the sub-conjunction `mask`, with every `x_V` substituted.
pub fn conjunction_table(a: &PrevisionAssessment, mask: u32) -> Result<ValueTable> {
    let f = &a.family;
    (0..f.space())
        .map(|c| match conjunction_value(f, mask, c) {
            ConjValue::One => Ok(one()),
            ConjValue::Zero => Ok(zero()),
            ConjValue::Prev(v) => a.get(v).cloned().ok_or(Error::MissingPrevision(v)),
        })
        .collect::<Result<Vec<_>>>()
        .map(ValueTable::from_numeric)
}

/// Table of `mask` with its own prevision left as the unknown.
fn open_conjunction_table(a: &PrevisionAssessment, mask: u32) -> Result<ValueTable> {
    let f = &a.family;
    (0..f.space())
        .map(|c| match conjunction_value(f, mask, c) {
            ConjValue::One => Ok(Affine::constant(one())),
            ConjValue::Zero => Ok(Affine::constant(zero())),
            ConjValue::Prev(v) if v == mask => Ok(Affine::mu()),
            ConjValue::Prev(v) => a
                .get(v)
                .cloned()
                .map(Affine::constant)
                .ok_or(Error::MissingPrevision(v)),
        })
        .collect::<Result<Vec<_>>>()
        .map(ValueTable::new)
}

/// Prevision equations for every assessed subset whose table is computable,
/// skipping `exclude`. Returns the problem and the masks it covers.
fn partial_problem(a: &PrevisionAssessment, exclude: u32) -> Result<(AssessmentProblem, Vec<u32>)> {
    let mut problem = AssessmentProblem::new(a.family.space());
    let mut masks = Vec::new();
    for (mask, x) in a.assessed() {
        if mask == exclude {
            continue;
        }
        let Ok(table) = conjunction_table(a, mask) else {
            continue;
        };
        problem.push(AssessmentItem::new(
            &table,
            a.family.antecedent(mask),
            x.clone(),
        )?)?;
        masks.push(mask);
    }
    Ok((problem, masks))
}

/// Prevision equations for every assessed subset; a subset whose table needs
/// an unassessed `x_V` is an error.
pub fn coherence_problem(a: &PrevisionAssessment) -> Result<AssessmentProblem> {
    let mut problem = AssessmentProblem::new(a.family.space());
    for (mask, x) in a.assessed() {
        let table = conjunction_table(a, mask)?;
        problem.push(AssessmentItem::new(
            &table,
            a.family.antecedent(mask),
            x.clone(),
        )?)?;
    }
    Ok(problem)
}

pub fn is_coherent_assessment(a: &PrevisionAssessment) -> Result<bool> {
    Ok(check_coherence(&coherence_problem(a)?).coherent)
}

/// A fully specified conjunction `C(F)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjunctionTable {
    family: Family,
    assessment: PrevisionAssessment,
    table: ValueTable,
}

impl ConjunctionTable {
    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn assessment(&self) -> &PrevisionAssessment {
        &self.assessment
    }

    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn values(&self) -> Vec<Rational> {
        self.table
            .numeric()
            .expect("conjunction tables are numeric")
    }

    /// `x_{1..n}`.
    pub fn prevision(&self) -> &Rational {
        self.assessment
            .get(self.family.full_mask())
            .expect("complete assessment")
    }

    pub fn antecedent(&self) -> Event {
        self.family.antecedent(self.family.full_mask())
    }
}

/// Builds `C(f)` from an assessment on `f` or on any family containing it.
/// Every `x_S` on `f` must be present and the previsions must be coherent.
pub fn build_conjunction(f: &Family, a: &PrevisionAssessment) -> Result<ConjunctionTable> {
    let table = build_conjunction_unchecked(f, a)?;
    if !check_coherence(&coherence_problem(&table.assessment)?).coherent {
        return Err(Error::Incoherent);
    }
    Ok(table)
}

/// As [`build_conjunction`] without the coherence check.
pub fn build_conjunction_unchecked(
    f: &Family,
    a: &PrevisionAssessment,
) -> Result<ConjunctionTable> {
    let assessment = a.restrict(f)?;
    if let Some(missing) = (1..=f.full_mask()).find(|&m| assessment.get(m).is_none()) {
        return Err(Error::MissingPrevision(missing));
    }
    let table = conjunction_table(&assessment, f.full_mask())?;
    Ok(ConjunctionTable {
        family: f.clone(),
        assessment,
        table,
    })
}

pub fn is_constant_zero(t: &ConjunctionTable) -> bool {
    t.table.is_constant_value(&zero())
}

pub fn frechet_bounds(xs: &[Rational]) -> Interval {
    let n = int(xs.len() as i64);
    let sum = xs.iter().fold(zero(), |a, x| a + x);
    let lo = (sum - n + one()).max(zero());
    let hi = xs.iter().min().cloned().unwrap_or_else(one);
    Interval::new(lo.min(hi.clone()), hi)
}

/// Coherent values of `x_mask` given the other assessed previsions. Every
/// `x_V` needed by the table of `mask` (proper subsets) must be assessed.
pub fn prevision_interval(a: &PrevisionAssessment, mask: u32) -> Result<Interval> {
    let target = open_conjunction_table(a, mask)?;
    let (premises, _) = partial_problem(a, mask)?;
    extension_interval(&premises, &target, &a.family.antecedent(mask))
}

pub fn conjunction_prevision_interval(f: &Family, a: &PrevisionAssessment) -> Result<Interval> {
    let restricted = a.restrict(f)?;
    prevision_interval(&restricted, f.full_mask())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FillPolicy {
    #[default]
    Midpoint,
    Lower,
    Upper,
}

/// Fills every unassessed `x_S` in subset-size order from its coherent
/// interval, then checks the completed assessment.
pub fn complete_assessment(
    partial: &PrevisionAssessment,
    policy: FillPolicy,
) -> Result<PrevisionAssessment> {
    let mut a = partial.clone();
    for mask in a.family.subsets_by_size() {
        if a.get(mask).is_some() {
            continue;
        }
        let iv = prevision_interval(&a, mask)?;
        let x = match policy {
            FillPolicy::Midpoint => midpoint(&iv.lo, &iv.hi),
            FillPolicy::Lower => iv.lo,
            FillPolicy::Upper => iv.hi,
        };
        a.set(mask, x)?;
    }
    if !is_coherent_assessment(&a)? {
        return Err(Error::Incoherent);
    }
    Ok(a)
}

/// Two-event conjunction written out case by case.
pub fn pair_conjunction_table(
    e1: &ConditionalEvent,
    e2: &ConditionalEvent,
    x1: &Rational,
    x2: &Rational,
    x12: &Rational,
) -> ValueTable {
    let v1 = e1.verifier();
    let v2 = e2.verifier();
    let f1 = e1.falsifier();
    let f2 = e2.falsifier();
    let h1 = e1.antecedent();
    let h2 = e2.antecedent();
    ValueTable::from_numeric(
        (0..e1.space())
            .map(|c| {
                if v1.contains(c) && v2.contains(c) {
                    one()
                } else if f1.contains(c) || f2.contains(c) {
                    zero()
                } else if !h1.contains(c) && v2.contains(c) {
                    x1.clone()
                } else if !h2.contains(c) && v1.contains(c) {
                    x2.clone()
                } else {
                    x12.clone()
                }
            })
            .collect(),
    )
}

/// Constituents grouped by the outcome pattern of the family's members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstituentClass {
    pub outcomes: Vec<Trivalent>,
    pub constituents: Vec<usize>,
    pub value: ConjValue,
}

pub fn constituent_classes(f: &Family) -> Vec<ConstituentClass> {
    let rank = |t: Trivalent| match t {
        Trivalent::True => 0u8,
        Trivalent::False => 1,
        Trivalent::Void => 2,
    };
    let mut groups: BTreeMap<Vec<u8>, (Vec<Trivalent>, Vec<usize>)> = BTreeMap::new();
    for c in 0..f.space() {
        let outcomes: Vec<Trivalent> = f.members.iter().map(|m| m.outcome_at(c)).collect();
        let key = outcomes.iter().map(|&t| rank(t)).collect();
        groups
            .entry(key)
            .or_insert_with(|| (outcomes, Vec::new()))
            .1
            .push(c);
    }
    groups
        .into_values()
        .map(|(outcomes, constituents)| ConstituentClass {
            value: conjunction_value(f, f.full_mask(), constituents[0]),
            outcomes,
            constituents,
        })
        .collect()
}

/// True when no coherent assessment can make `C(f)` differ from 0: no
/// constituent makes every member true.
pub fn conjunction_is_structurally_zero(f: &Family) -> bool {
    let all_true = f
        .members
        .iter()
        .fold(Event::sure(f.space()), |acc, m| &acc & m.verifier());
    all_true.is_empty()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::{AtomContext, EventExpr};
    use crate::rational::ratio;
    use crate::table::indicator_table;

    fn ctx() -> AtomContext {
        AtomContext::new(["A", "B", "C", "D"]).unwrap()
    }

    fn atom(c: &AtomContext, n: &str) -> EventExpr {
        c.atom(n).unwrap()
    }

    fn independent_pair(c: &AtomContext) -> (ConditionalEvent, ConditionalEvent) {
        (
            c.conditional(&atom(c, "A"), &atom(c, "B")).unwrap(),
            c.conditional(&atom(c, "C"), &atom(c, "D")).unwrap(),
        )
    }

    #[test]
    fn family_is_canonical_and_deduplicated() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f1 = Family::new([p.clone(), q.clone(), p.clone()]).unwrap();
        let f2 = Family::new([q.clone(), p.clone()]).unwrap();
        assert_eq!(f1, f2);
        assert_eq!(f1.len(), 2);
        assert_eq!(conjoin_families(&f1, &f1).unwrap(), f1);
    }

    #[test]
    fn single_member_is_indicator() {
        let c = ctx();
        let (p, _) = independent_pair(&c);
        let f = Family::single(p.clone());
        let a = PrevisionAssessment::new(f.clone())
            .with(1, ratio(2, 5))
            .unwrap();
        let t = build_conjunction(&f, &a).unwrap();
        assert_eq!(*t.table(), indicator_table(&p, &ratio(2, 5)).unwrap());
    }

    #[test]
    fn pair_matches_case_formula() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f = Family::new([p.clone(), q.clone()]).unwrap();
        let (x1, x2, x12) = (ratio(1, 2), ratio(1, 3), ratio(1, 4));
        let i = f.index_of(&p).unwrap();
        let (mp, mq) = (1u32 << i, 1u32 << (1 - i));
        let a = PrevisionAssessment::new(f.clone())
            .with(mp, x1.clone())
            .unwrap()
            .with(mq, x2.clone())
            .unwrap()
            .with(3, x12.clone())
            .unwrap();
        let t = build_conjunction(&f, &a).unwrap();
        assert_eq!(*t.table(), pair_conjunction_table(&p, &q, &x1, &x2, &x12));
        let mut distinct = t.values();
        distinct.sort();
        distinct.dedup();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn frechet_examples() {
        assert_eq!(
            frechet_bounds(&[one(), one(), one()]),
            Interval::point(one())
        );
        assert_eq!(
            frechet_bounds(&[ratio(1, 2), ratio(1, 2)]),
            Interval::new(zero(), ratio(1, 2))
        );
        assert_eq!(
            frechet_bounds(&[ratio(7, 10), ratio(3, 5), ratio(9, 10)]),
            Interval::new(ratio(1, 5), ratio(3, 5))
        );
    }

    #[test]
    fn independent_pair_interval_is_frechet() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f = Family::new([p, q]).unwrap();
        let a = PrevisionAssessment::new(f.clone())
            .with(1, ratio(1, 2))
            .unwrap()
            .with(2, ratio(1, 2))
            .unwrap();
        assert_eq!(
            conjunction_prevision_interval(&f, &a).unwrap(),
            Interval::new(zero(), ratio(1, 2))
        );
    }

    #[test]
    fn contradictory_pair_is_incoherent() {
        let c = ctx();
        let p = c.conditional(&atom(&c, "A"), &atom(&c, "B")).unwrap();
        let f = Family::new([p.clone(), p.negation()]).unwrap();
        let a = PrevisionAssessment::new(f.clone())
            .with(1, one())
            .unwrap()
            .with(2, one())
            .unwrap();
        assert_eq!(
            conjunction_prevision_interval(&f, &a),
            Err(Error::Incoherent)
        );
    }

    #[test]
    fn all_ones_forces_one() {
        let c = ctx();
        let a_ = atom(&c, "A");
        let b = atom(&c, "B");
        let cc = atom(&c, "C");
        let f = Family::new([
            c.conditional(&cc, &b).unwrap(),
            c.conditional(&b, &a_).unwrap(),
            c.conditional(&a_, &(a_.clone() | b.clone())).unwrap(),
        ])
        .unwrap();
        let mut a = PrevisionAssessment::new(f.clone());
        for m in f.subsets_by_size() {
            if m != f.full_mask() {
                a.set(m, one()).unwrap();
            }
        }
        assert_eq!(
            conjunction_prevision_interval(&f, &a).unwrap(),
            Interval::point(one())
        );
    }

    #[test]
    fn weak_transitivity_conjunction_is_abc_given_a_or_b() {
        let c = ctx();
        let a_ = atom(&c, "A");
        let b = atom(&c, "B");
        let cc = atom(&c, "C");
        let f = Family::new([
            c.conditional(&cc, &b).unwrap(),
            c.conditional(&b, &a_).unwrap(),
            c.conditional(&a_, &(a_.clone() | b.clone())).unwrap(),
        ])
        .unwrap();
        let partial = PrevisionAssessment::new(f.clone())
            .with(f.full_mask(), ratio(1, 3))
            .unwrap();
        let a = complete_assessment(&partial, FillPolicy::Midpoint).unwrap();
        let t = build_conjunction(&f, &a).unwrap();
        let abc = c
            .conditional(&(a_.clone() & b.clone() & cc), &(a_ | b))
            .unwrap();
        assert_eq!(*t.table(), indicator_table(&abc, &ratio(1, 3)).unwrap());
    }

    #[test]
    fn disjoint_verifiers_give_constant_zero() {
        let c = ctx();
        let a_ = atom(&c, "A");
        let b = atom(&c, "B");
        let f = Family::new([
            c.conditional(&a_, &b).unwrap(),
            c.conditional(&!a_.clone(), &b).unwrap(),
        ])
        .unwrap();
        assert!(conjunction_is_structurally_zero(&f));
        let a = PrevisionAssessment::new(f.clone())
            .with(1, zero())
            .unwrap()
            .with(2, zero())
            .unwrap()
            .with(3, zero())
            .unwrap();
        assert!(!is_coherent_assessment(&a).unwrap());
        // P(A|B) = 0 and P(~A|B) = 1 is the coherent way to get zero
        let a = PrevisionAssessment::new(f.clone())
            .with(1, zero())
            .unwrap()
            .with(2, one())
            .unwrap();
        let a = complete_assessment(&a, FillPolicy::Midpoint).unwrap();
        assert!(is_constant_zero(&build_conjunction(&f, &a).unwrap()));
    }

    #[test]
    fn missing_previsions_are_reported() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f = Family::new([p, q]).unwrap();
        let a = PrevisionAssessment::new(f.clone())
            .with(1, ratio(1, 2))
            .unwrap();
        assert_eq!(build_conjunction(&f, &a), Err(Error::MissingPrevision(2)));
    }

    #[test]
    fn classes_cover_space() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f = Family::new([p, q]).unwrap();
        let classes = constituent_classes(&f);
        assert_eq!(classes.len(), 9);
        assert_eq!(
            classes.iter().map(|k| k.constituents.len()).sum::<usize>(),
            16
        );
    }

    #[test]
    fn restrict_reindexes() {
        let c = ctx();
        let (p, q) = independent_pair(&c);
        let f = Family::new([p.clone(), q.clone()]).unwrap();
        let ip = f.index_of(&p).unwrap();
        let a = PrevisionAssessment::new(f.clone())
            .with(1 << ip, ratio(1, 7))
            .unwrap();
        let sub = Family::single(p);
        assert_eq!(a.restrict(&sub).unwrap().get(1), Some(&ratio(1, 7)));
        assert!(a.restrict(&Family::single(q)).unwrap().get(1).is_none());
    }
}
