//! The trusted core: logical types, de Bruijn terms, typechecking,
//! normalization and the theorem-producing rules.
//!
//! Every value in here is immutable once built. [`Theorem`] has no public
//! constructor; the rest of the crate obtains theorems only through the
//! rules exposed from this module and the context operations.

mod normalize;
mod term;
mod theorem;
mod typecheck;
mod types;

use thiserror::Error;

pub use normalize::{alpha_beta_eta_equal, normalize, REDUCTION_LIMIT};
pub use term::{shift_constants, substitute, ConstId, Term};
pub use theorem::{apply_theorem, convert, Argument, Theorem};
pub use typecheck::{typecheck, typecheck_under};
pub use types::LogicType;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("type error: {0}")]
    TypeError(String),
    /// The term mentions a constant (given by its index into the stack of
    /// constants being dropped) that does not exist in the target context.
    #[error("term refers to constant #{0} which does not exist in the target context")]
    DanglingConstant(usize),
    #[error("not applicable: {0}")]
    NotApplicable(String),
    #[error("internal kernel error: {0}")]
    Internal(String),
}
