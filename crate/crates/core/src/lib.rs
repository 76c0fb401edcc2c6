//! Finite-domain structural causal models with exact rational probabilities,
//! and decision procedures for causal abstraction between them.

pub mod abstraction;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod expr;
pub mod format;
pub mod intervention;
pub mod limits;
pub mod maps;
pub mod model;
pub mod prob;
pub mod random;
pub mod report;
pub mod space;
pub mod transform;

pub type Value = i64;

pub use error::{Error, Result};
pub use expr::{Expr, VarRef};
pub use intervention::{Intervention, InterventionMap};
pub use limits::Limits;
pub use model::{CausalModel, ModelBuilder, Signature, VariableDecl};
