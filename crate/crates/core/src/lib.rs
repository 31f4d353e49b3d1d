//! Finite sites, sheaves, Day convolution and a separation-logic model
//! checker over memory and probability resources.
//!
//! Everything is extensional: categories, sieves, presheaf restriction maps
//! and predicates are explicit finite tables, so every law can be checked
//! exhaustively at small sizes.

pub mod day;
pub mod element;
pub mod fincat;
pub mod laws;
pub mod pred;
pub mod presheaf;
pub mod psl;
pub mod seplogic;
pub mod site;

pub use element::{Element, Heap};
pub use fincat::{FinCat, FunctorData, MonoidalStructure, MorId, ObjId};
pub use presheaf::Presheaf;
pub use site::{Coverage, CoverageKind, Sieve};
