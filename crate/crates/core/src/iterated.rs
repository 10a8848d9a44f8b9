//! Iterated conditionals `C(F2)|C(F1) = C(F1 ∪ F2) + μ·(1 - C(F1))`, where `μ`
//! is the prevision of the iterated conditional itself.
//!
//! When `P[C(F1)] > 0`, linearity of prevision forces
//! `μ = P[C(F1 ∪ F2)] / P[C(F1)]`. Otherwise `μ` is whatever the betting
//! condition allows: the bet is called off exactly where `C(F1) = 0`, and the
//! coherent values come from the exact extension LP.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::coherence::{check_coherence, extension_interval, Interval};
use crate::compound::{
    build_conjunction_unchecked, coherence_problem, conjoin_families, is_constant_zero,
    pair_conjunction_table, Family, PrevisionAssessment,
};
use crate::error::{Error, Result};
use crate::event::{ConditionalEvent, Event, Trivalent};
use crate::rational::{format_rational, one, zero, Rational};
use crate::table::{indicator_table, negate_table, Affine, ValueTable};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mu {
    Unique(Rational),
    /// Several coherent values; the table stays symbolic.
    Interval(Interval),
}

impl Mu {
    pub fn unique(&self) -> Option<&Rational> {
        match self {
            Mu::Unique(r) => Some(r),
            Mu::Interval(_) => None,
        }
    }

    pub fn interval(&self) -> Interval {
        match self {
            Mu::Unique(r) => Interval::point(r.clone()),
            Mu::Interval(iv) => iv.clone(),
        }
    }
}

impl From<Interval> for Mu {
    fn from(iv: Interval) -> Self {
        if iv.is_point() {
            Mu::Unique(iv.lo)
        } else {
            Mu::Interval(iv)
        }
    }
}

impl fmt::Display for Mu {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mu::Unique(r) => write!(f, "mu = {}", format_rational(r)),
            Mu::Interval(iv) => write!(f, "mu in {iv}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IteratedConditional {
    antecedent: Family,
    consequent: Family,
    union: Family,
    assessment: PrevisionAssessment,
    antecedent_table: ValueTable,
    joint_table: ValueTable,
    table: ValueTable,
    mu: Mu,
}

impl IteratedConditional {
    /// `F1`.
    pub fn antecedent(&self) -> &Family {
        &self.antecedent
    }

    /// `F2`.
    pub fn consequent(&self) -> &Family {
        &self.consequent
    }

    pub fn union(&self) -> &Family {
        &self.union
    }

    /// Previsions on the subsets of `F1 ∪ F2`.
    pub fn assessment(&self) -> &PrevisionAssessment {
        &self.assessment
    }

    /// `C(F1)`.
    pub fn antecedent_table(&self) -> &ValueTable {
        &self.antecedent_table
    }

    /// `C(F1 ∪ F2)`.
    pub fn joint_table(&self) -> &ValueTable {
        &self.joint_table
    }

    /// The table with entries affine in `μ`.
    pub fn table(&self) -> &ValueTable {
        &self.table
    }

    pub fn mu(&self) -> &Mu {
        &self.mu
    }

    pub fn antecedent_prevision(&self) -> &Rational {
        self.assessment
            .get(self.union.mask_of(&self.antecedent).expect("subfamily"))
            .expect("complete assessment")
    }

    pub fn joint_prevision(&self) -> &Rational {
        self.assessment
            .get(self.union.full_mask())
            .expect("complete assessment")
    }

    /// The numeric table when `μ` is unique.
    pub fn resolved(&self) -> Option<ValueTable> {
        self.mu.unique().map(|m| self.table.resolve(m))
    }

    /// True when the table equals `value` at every constituent for every
    /// coherent `μ`.
    pub fn is_constant(&self, value: &Rational) -> bool {
        let iv = self.mu.interval();
        self.table.resolve(&iv.lo).is_constant_value(value)
            && self.table.resolve(&iv.hi).is_constant_value(value)
    }

    /// Constituents where `C(F1)` is nonzero, i.e. where the bet is not
    /// called off.
    pub fn live_region(&self) -> Event {
        let values = self.antecedent_table.numeric().expect("numeric");
        Event::from_fn(values.len(), |c| !values[c].is_zero())
    }
}

/// Builds `C(F2)|C(F1)`. The assessment may live on any family containing
/// `F1 ∪ F2` and must give every `x_S` on it.
pub fn build_iterated(
    f1: &Family,
    f2: &Family,
    a: &PrevisionAssessment,
) -> Result<IteratedConditional> {
    let union = conjoin_families(f1, f2)?;
    let restricted = a.restrict(&union)?;
    if !check_coherence(&coherence_problem(&restricted)?).coherent {
        return Err(Error::Incoherent);
    }
    build_iterated_unchecked(f1, f2, &restricted)
}

/// As [`build_iterated`] without the coherence check.
pub fn build_iterated_unchecked(
    f1: &Family,
    f2: &Family,
    a: &PrevisionAssessment,
) -> Result<IteratedConditional> {
    let mut ic = assemble(f1, f2, a)?;
    let x1 = ic.antecedent_prevision().clone();
    ic.mu = if x1.is_positive() {
        Mu::Unique(ic.joint_prevision() / &x1)
    } else {
        mu_by_lp(&ic)?
    };
    Ok(ic)
}

fn assemble(f1: &Family, f2: &Family, a: &PrevisionAssessment) -> Result<IteratedConditional> {
    let union = conjoin_families(f1, f2)?;
    let assessment = a.restrict(&union)?;
    let antecedent = build_conjunction_unchecked(f1, &assessment)?;
    if is_constant_zero(&antecedent) {
        return Err(Error::ConstantZeroAntecedent);
    }
    let joint = build_conjunction_unchecked(&union, &assessment)?;
    let table = joint.table().plus_mu_times_complement(antecedent.table());
    Ok(IteratedConditional {
        antecedent: f1.clone(),
        consequent: f2.clone(),
        union,
        assessment,
        antecedent_table: antecedent.table().clone(),
        joint_table: joint.table().clone(),
        table,
        mu: Mu::Unique(zero()),
    })
}

/// The stored `μ`: the ratio when `P[C(F1)] > 0`, the LP interval otherwise.
pub fn solve_mu(ic: &IteratedConditional) -> Mu {
    ic.mu.clone()
}

/// Coherent values of `μ` jointly with the assessment, from the extension LP
/// regardless of `P[C(F1)]`.
pub fn mu_by_lp(ic: &IteratedConditional) -> Result<Mu> {
    let problem = coherence_problem(&ic.assessment)?;
    let live = ic.live_region();
    let interval = extension_interval(&problem, &ic.table, &live)?;
    Ok(interval.into())
}

fn lp_variant(f1: &Family, f2: &Family, a: &PrevisionAssessment) -> Result<IteratedConditional> {
    let mut ic = assemble(f1, f2, a)?;
    ic.mu = mu_by_lp(&ic)?;
    Ok(ic)
}

/// `C(F2)|C(F1)`, `C(F1 ∪ F2)|C(F1)` and `(C(F2) ∧ C(F1))|C(F1)` with `μ`
/// solved independently by LP for each: true when the three coherent `μ`
/// sets and the tables coincide, and agree with the ratio when it applies.
pub fn verify_equivalent_forms(f1: &Family, f2: &Family, a: &PrevisionAssessment) -> Result<bool> {
    let union = conjoin_families(f1, f2)?;
    let swapped = conjoin_families(f2, f1)?;
    let variants = [
        lp_variant(f1, f2, a)?,
        lp_variant(f1, &union, a)?,
        lp_variant(f1, &swapped, a)?,
    ];
    let first = &variants[0];
    let agree = variants
        .iter()
        .all(|v| v.mu == first.mu && v.table == first.table);
    let x1 = first.antecedent_prevision();
    let ratio_ok = !x1.is_positive() || first.mu == Mu::Unique(first.joint_prevision() / x1);
    Ok(agree && ratio_ok)
}

/// `C(F)|C(F)`: true when the LP finds `μ = 1` as the only coherent value
/// and the table is then 1 at every constituent.
pub fn self_iterate_is_one(f: &Family, a: &PrevisionAssessment) -> Result<bool> {
    let ic = lp_variant(f, f, a)?;
    Ok(ic.mu == Mu::Unique(one()) && ic.is_constant(&one()))
}

/// `P[C(F1 ∪ F2)] = μ·P[C(F1)]` with `μ` from the LP. With several coherent
/// `μ` this holds for all of them only when both sides vanish.
pub fn product_rule_check(f1: &Family, f2: &Family, a: &PrevisionAssessment) -> Result<bool> {
    let ic = lp_variant(f1, f2, a)?;
    let x1 = ic.antecedent_prevision();
    let xu = ic.joint_prevision();
    Ok(match &ic.mu {
        Mu::Unique(m) => *xu == m * x1,
        Mu::Interval(_) => x1.is_zero() && xu.is_zero(),
    })
}

/// `(E2|H2)|(E1|H1) = (E2|H2) ∧ (E1|H1) + μ·(~E1|H1)`, from the two-event
/// conjunction and the negated indicator.
pub fn iterated_pair(
    e1: &ConditionalEvent,
    e2: &ConditionalEvent,
    x1: &Rational,
    x2: &Rational,
    x12: &Rational,
) -> Result<ValueTable> {
    if e1.verifier().is_empty() {
        return Err(Error::ConstantZeroAntecedent);
    }
    let conj = pair_conjunction_table(e2, e1, x2, x1, x12);
    let neg = negate_table(&indicator_table(e1, x1)?);
    Ok(ValueTable::new(
        conj.values()
            .iter()
            .zip(neg.values())
            .map(|(c, n)| c + &(&Affine::mu() * n.as_constant().expect("numeric")))
            .collect(),
    ))
}

/// Conjunction of an ordered list of conditional events written straight
/// from its case definition; `x` gives the prevision of the sub-list at the
/// given positions.
pub fn ordered_conjunction_table(
    events: &[ConditionalEvent],
    x: impl Fn(&[usize]) -> Result<Rational>,
) -> Result<ValueTable> {
    let space = events.first().ok_or(Error::EmptyFamily)?.space();
    let mut values = Vec::with_capacity(space);
    for c in 0..space {
        let outcomes: Vec<Trivalent> = events.iter().map(|e| e.outcome_at(c)).collect();
        let value = if outcomes.contains(&Trivalent::False) {
            zero()
        } else {
            let void: Vec<usize> = (0..events.len())
                .filter(|&i| outcomes[i] == Trivalent::Void)
                .collect();
            if void.is_empty() {
                one()
            } else {
                x(&void)?
            }
        };
        values.push(value);
    }
    Ok(ValueTable::from_numeric(values))
}

/// `(E_{n+1}|H_{n+1})|C_{1..n} = C_{1..n+1} + μ·(1 - C_{1..n})` over the
/// ordered premises with the conclusion appended.
pub fn iterated_given_conjunction(
    premises: &[ConditionalEvent],
    conclusion: &ConditionalEvent,
    a: &PrevisionAssessment,
) -> Result<ValueTable> {
    let mut all = premises.to_vec();
    all.push(conclusion.clone());
    let lookup = |positions: &[usize]| -> Result<Rational> {
        let mut mask = 0u32;
        for &p in positions {
            let i = a.family().index_of(&all[p]).ok_or(Error::NotInFamily)?;
            mask |= 1 << i;
        }
        a.get(mask).cloned().ok_or(Error::MissingPrevision(mask))
    };
    let base = ordered_conjunction_table(premises, lookup)?;
    if base.is_constant_value(&zero()) {
        return Err(Error::ConstantZeroAntecedent);
    }
    let joint = ordered_conjunction_table(&all, lookup)?;
    Ok(joint.plus_mu_times_complement(&base))
}
