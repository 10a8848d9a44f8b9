//! p-consistency and p-entailment.
//!
//! Entailment is decided by forcing: with every premise at probability 1,
//! the conclusion's coherent extension must be exactly `[1, 1]`. Two table
//! level checks run alongside it over a verification set of coherent
//! assessments: the conjunction of the premises must absorb the conclusion,
//! and the conclusion given that conjunction must be the constant 1. A
//! disagreement between the three is reported as an engine error.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::coherence::{
    check_coherence, extension_interval, AssessmentProblem, CoherenceVerdict, Interval,
};
use crate::compound::{
    build_conjunction_unchecked, conjunction_value, is_coherent_assessment, is_constant_zero,
    ConjValue, Family, PrevisionAssessment,
};
use crate::error::{Error, Result};
use crate::event::{AtomContext, ConditionalEvent, EventExpr};
use crate::iterated::build_iterated_unchecked;
use crate::rational::{int, one, zero, Rational};
use crate::table::indicator_table;

pub const DEFAULT_SEED: u64 = 20_210_617;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntailmentQuery {
    premises: Family,
    conclusion: ConditionalEvent,
}

impl EntailmentQuery {
    pub fn new(premises: Family, conclusion: ConditionalEvent) -> Result<Self> {
        if premises.space() != conclusion.space() {
            return Err(Error::ContextMismatch);
        }
        Ok(Self {
            premises,
            conclusion,
        })
    }

    pub fn premises(&self) -> &Family {
        &self.premises
    }

    pub fn conclusion(&self) -> &ConditionalEvent {
        &self.conclusion
    }

    /// Premises and conclusion together.
    pub fn joint_family(&self) -> Family {
        Family::new(
            self.premises
                .members()
                .iter()
                .cloned()
                .chain([self.conclusion.clone()]),
        )
        .expect("premises are a valid family")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerificationConfig {
    pub seed: u64,
    /// Random coherent assessments drawn when exact enumeration is skipped.
    pub samples: usize,
}

impl Default for VerificationConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            samples: 200,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Verdicts {
    pub by_forcing: bool,
    pub by_conjunction: bool,
    pub by_iterated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Certificate {
    /// The conclusion's extension with every premise at 1.
    Forced { interval: Interval },
    /// A coherent assessment with every premise at 1 and the conclusion
    /// below 1, with its witness layers.
    Counterexample {
        conclusion_value: Rational,
        witness: CoherenceVerdict,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntailmentReport {
    pub p_consistent: bool,
    pub verdicts: Option<Verdicts>,
    pub interval: Option<Interval>,
    pub certificate: Option<Certificate>,
    /// Whether the table checks ran over every vertex assessment.
    pub exhaustive: bool,
    pub assessments_checked: usize,
}

impl EntailmentReport {
    pub fn p_valid(&self) -> Option<bool> {
        self.verdicts.map(|v| v.by_forcing)
    }
}

fn ones_problem(f: &Family) -> Result<AssessmentProblem> {
    AssessmentProblem::from_probabilities(f.space(), f.members().iter().map(|m| (m, one())))
}

fn all_ones(f: &Family) -> PrevisionAssessment {
    let mut a = PrevisionAssessment::new(f.clone());
    for m in 1..=f.full_mask() {
        a.set(m, one()).expect("valid mask");
    }
    a
}

/// Coherence of probability 1 on every member, cross-checked against
/// `P[C(F)] = 1` with every sub-conjunction at 1.
pub fn is_p_consistent(f: &Family) -> Result<bool> {
    let direct = check_coherence(&ones_problem(f)?).coherent;
    let via_conjunction = is_coherent_assessment(&all_ones(f))?;
    if direct != via_conjunction {
        return Err(Error::InternalDisagreement(format!(
            "p-consistency: events say {direct}, conjunction says {via_conjunction}"
        )));
    }
    Ok(direct)
}

/// Coherent values of the conclusion when every premise has probability 1.
pub fn forced_interval(q: &EntailmentQuery) -> Result<Interval> {
    let problem = ones_problem(&q.premises)?;
    let target = indicator_table(&q.conclusion, &zero())?;
    extension_interval(&problem, &target, q.conclusion.antecedent()).map_err(|e| match e {
        Error::Incoherent => Error::PInconsistentPremises,
        e => e,
    })
}

pub fn p_entails_by_forcing(q: &EntailmentQuery) -> Result<bool> {
    Ok(forced_interval(q)? == Interval::point(one()))
}

/// Every coherent 0/1 assessment on `f`, completed with `x_S = 1` exactly
/// when every member of `S` is 1. Each comes from a sequence of point masses:
/// a constituent inside the antecedents still open settles the members whose
/// antecedent it satisfies, and the rest move to the next layer.
pub fn vertex_assessments(f: &Family) -> Vec<PrevisionAssessment> {
    fn walk(f: &Family, open: u32, values: u32, out: &mut BTreeSet<u32>) {
        if open == 0 {
            out.insert(values);
            return;
        }
        let region = f.antecedent(open);
        let mut seen = BTreeSet::new();
        for c in region.iter() {
            let mut settled = 0u32;
            let mut truth = 0u32;
            for (i, m) in f.members().iter().enumerate() {
                if open & (1 << i) != 0 && m.antecedent().contains(c) {
                    settled |= 1 << i;
                    if m.consequent().contains(c) {
                        truth |= 1 << i;
                    }
                }
            }
            if seen.insert((settled, truth)) {
                walk(f, open & !settled, values | truth, out);
            }
        }
    }
    let mut patterns = BTreeSet::new();
    walk(f, f.full_mask(), 0, &mut patterns);
    patterns
        .into_iter()
        .map(|ones| {
            let mut a = PrevisionAssessment::new(f.clone());
            for s in 1..=f.full_mask() {
                let x = if s & ones == s { one() } else { zero() };
                a.set(s, x).expect("valid mask");
            }
            a
        })
        .collect()
}

/// A random coherent assessment on every subset of `f`, built from a chain of
/// sparse distributions each living where all earlier ones vanish. `x_S` is
/// the conditional expectation of `C_S` on the first layer that gives the
/// antecedent of `S` positive mass.
pub fn random_coherent_assessment<R: Rng + ?Sized>(f: &Family, rng: &mut R) -> PrevisionAssessment {
    let space = f.space();
    let mut layers: Vec<Vec<Rational>> = Vec::new();
    let mut covered = vec![false; space];
    let mut open = f.full_mask();
    while open != 0 {
        let region: Vec<usize> = f.antecedent(open).iter().filter(|&c| !covered[c]).collect();
        let free: Vec<usize> = (0..space).filter(|&c| !covered[c]).collect();
        let mut weights = vec![zero(); space];
        let anchor = region[rng.random_range(0..region.len())];
        weights[anchor] = int(rng.random_range(1..=4));
        let extra = rng.random_range(0..=2usize);
        for _ in 0..extra {
            let c = free[rng.random_range(0..free.len())];
            weights[c] += int(rng.random_range(0..=3));
        }
        let total = weights.iter().fold(zero(), |a, w| a + w);
        for w in &mut weights {
            *w /= &total;
        }
        for (c, w) in weights.iter().enumerate() {
            if w.is_positive() {
                covered[c] = true;
            }
        }
        for (i, m) in f.members().iter().enumerate() {
            if open & (1 << i) != 0 && m.antecedent().iter().any(|c| weights[c].is_positive()) {
                open &= !(1 << i);
            }
        }
        layers.push(weights);
    }

    let mut a = PrevisionAssessment::new(f.clone());
    for s in f.subsets_by_size() {
        let antecedent = f.antecedent(s);
        let layer = layers
            .iter()
            .find(|l| antecedent.iter().any(|c| l[c].is_positive()))
            .expect("every antecedent is reached");
        let mut mass = zero();
        let mut expectation = zero();
        for c in antecedent.iter() {
            if layer[c].is_zero() {
                continue;
            }
            let value = match conjunction_value(f, s, c) {
                ConjValue::One => one(),
                ConjValue::Zero => zero(),
                ConjValue::Prev(v) => a.get(v).cloned().expect("smaller subsets first"),
            };
            expectation += &layer[c] * value;
            mass += &layer[c];
        }
        a.set(s, expectation / mass).expect("value in [0, 1]");
    }
    a
}

/// Coherent assessments on premises plus conclusion used by the table checks.
#[derive(Debug, Clone)]
pub struct VerificationSet {
    pub family: Family,
    pub assessments: Vec<PrevisionAssessment>,
    pub exhaustive: bool,
}

pub fn verification_set(q: &EntailmentQuery, cfg: &VerificationConfig) -> VerificationSet {
    let family = q.joint_family();
    let exhaustive = family.space() <= 8 && q.premises.len() <= 3;
    let mut assessments = vertex_assessments(&family);
    if !exhaustive {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..cfg.samples {
            assessments.push(random_coherent_assessment(&family, &mut rng));
        }
    }
    VerificationSet {
        family,
        assessments,
        exhaustive,
    }
}

fn require_p_consistent(q: &EntailmentQuery) -> Result<()> {
    if is_p_consistent(&q.premises)? {
        Ok(())
    } else {
        Err(Error::PInconsistentPremises)
    }
}

/// `(C_{1..n+1} = C_{1..n}, C_{1..n} ≤ E|H)` on every assessment of the set.
fn conjunction_checks(q: &EntailmentQuery, set: &VerificationSet) -> Result<(bool, bool)> {
    let conclusion = Family::single(q.conclusion.clone());
    let conclusion_mask = set.family.mask_of(&conclusion)?;
    let mut absorbs = true;
    let mut below = true;
    for a in &set.assessments {
        let base = build_conjunction_unchecked(&q.premises, a)?;
        let joint = build_conjunction_unchecked(&set.family, a)?;
        absorbs &= base.table() == joint.table();
        let z = a.get(conclusion_mask).expect("complete");
        let indicator = indicator_table(&q.conclusion, z)?.numeric()?;
        below &= base.values().iter().zip(&indicator).all(|(b, e)| b <= e);
    }
    Ok((absorbs, below))
}

fn conjunction_verdict(q: &EntailmentQuery, set: &VerificationSet) -> Result<bool> {
    let (absorbs, below) = conjunction_checks(q, set)?;
    if absorbs != below {
        return Err(Error::InternalDisagreement(format!(
            "conjunction absorbs the conclusion: {absorbs}, lies below it: {below}"
        )));
    }
    Ok(absorbs)
}

fn iterated_verdict(q: &EntailmentQuery, set: &VerificationSet) -> Result<bool> {
    let conclusion = Family::single(q.conclusion.clone());
    for a in &set.assessments {
        let base = build_conjunction_unchecked(&q.premises, a)?;
        if is_constant_zero(&base) {
            continue;
        }
        let ic = build_iterated_unchecked(&q.premises, &conclusion, a)?;
        if !ic.is_constant(&one()) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn p_entails_by_conjunction(q: &EntailmentQuery, cfg: &VerificationConfig) -> Result<bool> {
    require_p_consistent(q)?;
    conjunction_verdict(q, &verification_set(q, cfg))
}

pub fn p_entails_by_iterated(q: &EntailmentQuery, cfg: &VerificationConfig) -> Result<bool> {
    require_p_consistent(q)?;
    iterated_verdict(q, &verification_set(q, cfg))
}

pub fn full_report(q: &EntailmentQuery, cfg: &VerificationConfig) -> Result<EntailmentReport> {
    if !is_p_consistent(&q.premises)? {
        return Ok(EntailmentReport {
            p_consistent: false,
            verdicts: None,
            interval: None,
            certificate: None,
            exhaustive: false,
            assessments_checked: 0,
        });
    }
    let interval = forced_interval(q)?;
    let by_forcing = interval == Interval::point(one());
    let set = verification_set(q, cfg);
    let by_conjunction = conjunction_verdict(q, &set)?;
    let by_iterated = iterated_verdict(q, &set)?;
    if by_forcing != by_conjunction || by_forcing != by_iterated {
        return Err(Error::InternalDisagreement(format!(
            "forcing {by_forcing}, conjunction {by_conjunction}, iterated {by_iterated}"
        )));
    }
    let certificate = if by_forcing {
        Certificate::Forced {
            interval: interval.clone(),
        }
    } else {
        let z = if interval.lo < one() {
            interval.lo.clone()
        } else {
            interval.hi.clone()
        };
        let premises = ones_problem(&q.premises)?;
        let problem = premises.with(crate::coherence::AssessmentItem::probability(
            &q.conclusion,
            z.clone(),
        )?)?;
        let witness = check_coherence(&problem);
        if !witness.coherent {
            return Err(Error::InternalDisagreement(
                "interval endpoint is not coherent".into(),
            ));
        }
        Certificate::Counterexample {
            conclusion_value: z,
            witness,
        }
    };
    Ok(EntailmentReport {
        p_consistent: true,
        verdicts: Some(Verdicts {
            by_forcing,
            by_conjunction,
            by_iterated,
        }),
        interval: Some(interval),
        certificate: Some(certificate),
        exhaustive: set.exhaustive,
        assessments_checked: set.assessments.len(),
    })
}

pub const RULES: [&str; 4] = [
    "transitivity",
    "weak-transitivity",
    "self-entailment",
    "unconditional-inclusion",
];

/// A named inference rule from the built-in library.
pub fn rule(name: &str) -> Result<(AtomContext, EntailmentQuery)> {
    let labelled = |ctx: &AtomContext, label: &str, e: &EventExpr, h: &EventExpr| {
        ctx.conditional(e, h).map(|ce| ce.with_label(label))
    };
    match name {
        "transitivity" | "weak-transitivity" => {
            let ctx = AtomContext::new(["A", "B", "C"])?;
            let a = ctx.atom("A")?;
            let b = ctx.atom("B")?;
            let c = ctx.atom("C")?;
            let mut premises = vec![
                labelled(&ctx, "C|B", &c, &b)?,
                labelled(&ctx, "B|A", &b, &a)?,
            ];
            if name == "weak-transitivity" {
                premises.push(labelled(&ctx, "A|(A|B)", &a, &(a.clone() | b.clone()))?);
            }
            let conclusion = labelled(&ctx, "C|A", &c, &a)?;
            let q = EntailmentQuery::new(Family::new(premises)?, conclusion)?;
            Ok((ctx, q))
        }
        "self-entailment" => {
            let ctx = AtomContext::new(["A", "H"])?;
            let ah = labelled(&ctx, "A|H", &ctx.atom("A")?, &ctx.atom("H")?)?;
            let q = EntailmentQuery::new(Family::single(ah.clone()), ah)?;
            Ok((ctx, q))
        }
        "unconditional-inclusion" => {
            let ctx = AtomContext::new(["A", "B"])?;
            let a = ctx.atom("A")?;
            let b = ctx.atom("B")?;
            let q = EntailmentQuery::new(
                Family::new([
                    labelled(&ctx, "A", &a, &EventExpr::True)?,
                    labelled(&ctx, "B", &b, &EventExpr::True)?,
                ])?,
                labelled(&ctx, "A&B", &(a & b), &EventExpr::True)?,
            )?;
            Ok((ctx, q))
        }
        other => Err(Error::UnknownRule(other.to_string())),
    }
}
