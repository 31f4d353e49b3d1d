//! The formula language and its evaluation over resource models.

mod eval;
mod formula;
mod model;
mod parser;

use thiserror::Error;

pub use eval::{eval_formula, sat, sep_conj, SatResult, StarWitness};
pub use formula::Formula;
pub use model::{atom_predicate, Mode, ResourceModel};
pub use parser::{parse_formula, ParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeplogicError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("unknown location {0}")]
    UnknownLocation(String),
    #[error("unknown value {0}")]
    UnknownValue(i64),
    #[error("atom {0} cannot be interpreted over this resource")]
    AtomIncompatible(String),
    #[error("the model has no monoid, so separating conjunction is undefined")]
    NoMonoid,
    #[error("model needs heaps over a powerset base: {0}")]
    NotMemory(String),
    #[error("unknown stage {0}")]
    UnknownStage(String),
    #[error("{element} is not a section at {stage}")]
    ElementNotAtStage { element: String, stage: String },
    #[error(transparent)]
    Pred(#[from] crate::pred::PredError),
    #[error(transparent)]
    Presheaf(#[from] crate::presheaf::PresheafError),
    #[error(transparent)]
    Day(#[from] crate::day::DayError),
    #[error(transparent)]
    Site(#[from] crate::site::SiteError),
}
