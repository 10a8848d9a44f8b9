use thiserror::Error;

use crate::rational::Rational;

/// Maximum number of atoms a context may declare (2^16 constituents).
pub const MAX_ATOMS: usize = 16;

/// Maximum size of a family of conditional events.
pub const MAX_FAMILY: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("no atoms declared")]
    NoAtoms,
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("{requested} atoms requested, at most {max} supported")]
    BudgetExceeded { requested: usize, max: usize },
    #[error("atom #{0} is not declared in this context")]
    UnresolvedAtom(usize),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("antecedent is impossible")]
    EmptyAntecedent,
    #[error("value {0} outside [0, 1]")]
    OutOfRange(Rational),
    #[error("objects belong to different atom contexts")]
    ContextMismatch,
    #[error("family of {0} conditionals exceeds the limit of {max}", max = MAX_FAMILY)]
    FamilyTooLarge(usize),
    #[error("empty family")]
    EmptyFamily,
    #[error("assessment is incoherent")]
    Incoherent,
    #[error("missing prevision for subset {0:#b}")]
    MissingPrevision(u32),
    #[error("missing prevision for P({0})")]
    MissingNamedPrevision(String),
    #[error("conditional is not part of the assessed family")]
    NotInFamily,
    #[error("antecedent conjunction is constant zero")]
    ConstantZeroAntecedent,
    #[error("premises are not p-consistent")]
    PInconsistentPremises,
    #[error("target table has a non-positive normaliser on its antecedent")]
    BadTarget,
    #[error("table depends on an unresolved unknown")]
    SymbolicTable,
    #[error("procedures disagree: {0}")]
    InternalDisagreement(String),
    #[error("unknown rule `{0}`")]
    UnknownRule(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
