//! Exact coherence checking for conditional events, their conjunctions and
//! iterated conditionals, with p-entailment decided three ways.

pub mod cli;
pub mod coherence;
pub mod compound;
pub mod dsl;
pub mod entailment;
pub mod error;
pub mod event;
pub mod iterated;
pub mod lp;
pub mod rational;
pub mod table;

pub use error::{Error, Result};
pub use rational::Rational;
