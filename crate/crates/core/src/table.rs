//! Value tables: the computable form of a conditional random quantity.
//!
//! A table maps each constituent to an exact value. Entries are affine forms
//! `a + b·μ` in a single unknown `μ` so iterated conditionals can be held
//! before their own prevision is resolved; numeric tables have `b = 0`
//! everywhere.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::event::ConditionalEvent;
use crate::rational::{format_rational, in_unit_interval, one, zero, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Affine {
    pub constant: Rational,
    pub coeff: Rational,
}

impl Affine {
    pub fn constant(value: Rational) -> Self {
        Self {
            constant: value,
            coeff: zero(),
        }
    }

    /// The unknown itself.
    pub fn mu() -> Self {
        Self {
            constant: zero(),
            coeff: one(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.coeff.is_zero()
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        self.is_constant().then_some(&self.constant)
    }

    pub fn eval(&self, mu: &Rational) -> Rational {
        &self.constant + &self.coeff * mu
    }

    pub fn one_minus(&self) -> Self {
        Self {
            constant: one() - &self.constant,
            coeff: -&self.coeff,
        }
    }
}

impl From<Rational> for Affine {
    fn from(value: Rational) -> Self {
        Affine::constant(value)
    }
}

impl Add for &Affine {
    type Output = Affine;
    fn add(self, rhs: &Affine) -> Affine {
        Affine {
            constant: &self.constant + &rhs.constant,
            coeff: &self.coeff + &rhs.coeff,
        }
    }
}

impl Sub for &Affine {
    type Output = Affine;
    fn sub(self, rhs: &Affine) -> Affine {
        Affine {
            constant: &self.constant - &rhs.constant,
            coeff: &self.coeff - &rhs.coeff,
        }
    }
}

impl Mul<&Rational> for &Affine {
    type Output = Affine;
    fn mul(self, rhs: &Rational) -> Affine {
        Affine {
            constant: &self.constant * rhs,
            coeff: &self.coeff * rhs,
        }
    }
}

impl fmt::Display for Affine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mu_term = |c: &Rational| {
            if c.is_one() {
                "mu".to_string()
            } else {
                format!("{}*mu", format_rational(c))
            }
        };
        if self.coeff.is_zero() {
            return f.write_str(&format_rational(&self.constant));
        }
        if self.constant.is_zero() {
            if self.coeff == -one() {
                return f.write_str("-mu");
            }
            return f.write_str(&mu_term(&self.coeff));
        }
        let sign = if self.coeff < zero() { "-" } else { "+" };
        let magnitude = if self.coeff < zero() {
            -&self.coeff
        } else {
            self.coeff.clone()
        };
        write!(
            f,
            "{} {} {}",
            format_rational(&self.constant),
            sign,
            mu_term(&magnitude)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ValueTable {
    values: Vec<Affine>,
}

impl ValueTable {
    pub fn new(values: Vec<Affine>) -> Self {
        Self { values }
    }

    pub fn from_numeric(values: Vec<Rational>) -> Self {
        Self {
            values: values.into_iter().map(Affine::constant).collect(),
        }
    }

    pub fn constant(len: usize, value: Rational) -> Self {
        Self::from_numeric(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, constituent: usize) -> &Affine {
        &self.values[constituent]
    }

    pub fn values(&self) -> &[Affine] {
        &self.values
    }

    pub fn is_numeric(&self) -> bool {
        self.values.iter().all(Affine::is_constant)
    }

    pub fn numeric(&self) -> Result<Vec<Rational>> {
        self.values
            .iter()
            .map(|v| v.as_constant().cloned().ok_or(Error::SymbolicTable))
            .collect()
    }

    /// Substitutes a value for the unknown.
    pub fn resolve(&self, mu: &Rational) -> ValueTable {
        ValueTable::from_numeric(self.values.iter().map(|v| v.eval(mu)).collect())
    }

    /// True when every entry is the constant `value`.
    pub fn is_constant_value(&self, value: &Rational) -> bool {
        self.values
            .iter()
            .all(|v| v.is_constant() && v.constant == *value)
    }

    /// Pointwise `lhs + rhs·(1 - other)`, the shape of an iterated conditional.
    pub fn plus_mu_times_complement(&self, other: &ValueTable) -> ValueTable {
        assert_eq!(self.len(), other.len());
        ValueTable::new(
            self.values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| {
                    let c = b.as_constant().expect("complement must be numeric");
                    a + &(&Affine::mu() * &(one() - c))
                })
                .collect(),
        )
    }
}

/// Indicator of `E|H` with `P(E|H) = x`: 1 on `EH`, 0 on `~E H`, `x` on `~H`.
pub fn indicator_table(ce: &ConditionalEvent, x: &Rational) -> Result<ValueTable> {
    if !in_unit_interval(x) {
        return Err(Error::OutOfRange(x.clone()));
    }
    Ok(ValueTable::from_numeric(
        (0..ce.space())
            .map(|i| {
                if !ce.antecedent().contains(i) {
                    x.clone()
                } else if ce.consequent().contains(i) {
                    one()
                } else {
                    zero()
                }
            })
            .collect(),
    ))
}

/// Pointwise `1 - value`.
pub fn negate_table(t: &ValueTable) -> ValueTable {
    ValueTable::new(t.values.iter().map(Affine::one_minus).collect())
}
