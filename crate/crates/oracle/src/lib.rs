//! Test oracles for `hpcause`.
//!
//! [`definition`] re-derives the cause definitions by literal enumeration of
//! every contingency set, setting and restoration subset, with its own naive
//! fixpoint solver; it shares only the model data types with the engine.
//! [`generate`] and [`corpus`] produce seeded random and exhaustive inputs.

pub mod corpus;
pub mod definition;
pub mod generate;
