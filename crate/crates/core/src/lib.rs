//! A monomorphic HOL-ST prover: trusted kernel, immutable context tree,
//! chronicle versioning and the ProofScript language.

pub mod chronicle;
pub mod context;
pub mod engine;
pub mod interpreter;
pub mod kernel;
pub mod store;
pub mod syntax;
pub mod value;

pub use interpreter::{show_term, show_value};
