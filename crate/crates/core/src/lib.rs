//! Actual causality in finite structural-equation models: the updated and
//! original cause definitions, degree of responsibility, degree of blame, and
//! the quantified-Boolean reductions that pin down their complexity.

pub mod engine;
pub mod expr;
pub mod files;
pub mod formula;
pub mod model;
pub mod qbf;
pub mod responsibility;
mod syntax;

pub use engine::{
    enumerate_causes, CauseQuery, CauseVerdict, Checker, EngineConfig, EngineError, Variant, Witness,
};
pub use expr::Expr;
pub use formula::{CausalFormula, EventFormula, FormulaError};
pub use model::{Assignment, CausalModel, Context, ModelError, Signature, TotalState, Value, Var, VarKind};

pub use responsibility::{degree_of_blame, degree_of_responsibility, BlameError, EpistemicState, ResponsibilityResult};
pub use syntax::ParseError;
