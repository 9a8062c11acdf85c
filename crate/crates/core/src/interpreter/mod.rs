//! ProofScript evaluation.
//!
//! A statement maps a state `(C, E)` — current context and environment — to
//! a new state. Statements that introduce logical content go through
//! [`create_child`](crate::context::create_child); everything else only
//! touches the environment.

mod env;
mod eval;
mod function;
mod show;

pub use show::{show_term, show_value};

use std::collections::HashSet;
use std::fmt;

use crate::context::{ContextError, ContextRef, ContextSource};
use crate::kernel::KernelError;
use crate::store::Store;
use crate::syntax::script::{parse_script, AtRef, Block};
use crate::syntax::{Mode, Pos, SyntaxError};
use crate::value::Value;

pub use env::{Entry, Env, Lookup};
pub use function::{Builtin, Closure, Function, FunctionKind};

pub const DEFAULT_MAX_DEPTH: usize = 10_000;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum ErrorClass {
    ParseError,
    TypeError,
    NameError,
    GuardMismatch,
    NotApplicable,
    NotExistential,
    DanglingConstant,
    DependencyCycle,
    AmbiguousChronicle,
    UnknownChronicle,
    UnknownContext,
    RecursionLimit,
    RuntimeError,
    StorageError,
    InternalError,
}

impl ErrorClass {
    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::ParseError => "ParseError",
            ErrorClass::TypeError => "TypeError",
            ErrorClass::NameError => "NameError",
            ErrorClass::GuardMismatch => "GuardMismatch",
            ErrorClass::NotApplicable => "NotApplicable",
            ErrorClass::NotExistential => "NotExistential",
            ErrorClass::DanglingConstant => "DanglingConstant",
            ErrorClass::DependencyCycle => "DependencyCycle",
            ErrorClass::AmbiguousChronicle => "AmbiguousChronicle",
            ErrorClass::UnknownChronicle => "UnknownChronicle",
            ErrorClass::UnknownContext => "UnknownContext",
            ErrorClass::RecursionLimit => "RecursionLimit",
            ErrorClass::RuntimeError => "RuntimeError",
            ErrorClass::StorageError => "StorageError",
            ErrorClass::InternalError => "InternalError",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A failed evaluation: what went wrong and where.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScriptError {
    pub class: ErrorClass,
    pub pos: Pos,
    pub message: String,
}

impl ScriptError {
    pub fn new(class: ErrorClass, pos: Pos, message: impl Into<String>) -> ScriptError {
        ScriptError { class, pos, message: message.into() }
    }

    pub fn at(mut self, pos: Pos) -> ScriptError {
        self.pos = pos;
        self
    }

    pub fn from_kernel(e: KernelError, pos: Pos) -> ScriptError {
        let class = match e {
            KernelError::TypeError(_) => ErrorClass::TypeError,
            KernelError::DanglingConstant(_) => ErrorClass::DanglingConstant,
            KernelError::NotApplicable(_) => ErrorClass::NotApplicable,
            _ => ErrorClass::InternalError,
        };
        ScriptError::new(class, pos, e.to_string())
    }

    pub fn from_context(e: ContextError, pos: Pos) -> ScriptError {
        let class = match &e {
            ContextError::UnknownContext(_) => ErrorClass::UnknownContext,
            ContextError::NameError(_) => ErrorClass::NameError,
            ContextError::NotAncestor(..) => ErrorClass::InternalError,
            ContextError::GuardMismatch(_) => ErrorClass::GuardMismatch,
            ContextError::NotExistential(_) => ErrorClass::NotExistential,
            ContextError::DependencyCycle(_) => ErrorClass::DependencyCycle,
            ContextError::InvalidPayload(_) => ErrorClass::TypeError,
            ContextError::Kernel(k) => return ScriptError::from_kernel(k.clone(), pos),
            ContextError::Store(_) => ErrorClass::StorageError,
        };
        ScriptError::new(class, pos, e.to_string())
    }

    pub fn from_syntax(e: SyntaxError) -> ScriptError {
        let class = match e {
            SyntaxError::Parse { .. } => ErrorClass::ParseError,
            SyntaxError::Name { .. } => ErrorClass::NameError,
            SyntaxError::Type { .. } => ErrorClass::TypeError,
        };
        ScriptError::new(class, e.pos(), e.to_string())
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at {}: {}", self.class, self.pos, self.message)
    }
}

impl std::error::Error for ScriptError {}

/// What the interpreter needs from the surrounding system.
pub trait Hooks {
    /// The context denoted by `root`.
    fn root(&self) -> Result<ContextRef, ScriptError>;

    /// Target of an `@` reference, before wrapping.
    fn resolve_reference(&self, at: &AtRef, user: &str) -> Result<ContextRef, ScriptError>;

    /// Veto for creating a context below `parent`, a context this run did
    /// not create itself.
    fn check_parent(&self, parent: &ContextRef) -> Result<(), ContextError>;
}

/// Hooks for running outside of any chronicle: `root` is fixed, only
/// `@"key"` references work, and nothing is vetoed.
pub struct Standalone<'s> {
    pub store: &'s Store,
    pub root: ContextRef,
}

impl Hooks for Standalone<'_> {
    fn root(&self) -> Result<ContextRef, ScriptError> {
        Ok(self.root.clone())
    }

    fn resolve_reference(&self, at: &AtRef, _user: &str) -> Result<ContextRef, ScriptError> {
        match at {
            AtRef::Key(k) => {
                let r: ContextRef = k.parse().map_err(|e| ScriptError::from_context(e, Pos::START))?;
                self.store.load(&r).map_err(|e| ScriptError::from_context(e, Pos::START))?;
                Ok(r)
            }
            other => Err(ScriptError::new(
                ErrorClass::UnknownChronicle,
                Pos::START,
                format!("no chronicles are available for {other}"),
            )),
        }
    }

    fn check_parent(&self, _parent: &ContextRef) -> Result<(), ContextError> {
        Ok(())
    }
}

/// The pair `(C, E)`.
#[derive(Clone, Debug)]
pub struct State {
    pub ctx: ContextRef,
    pub env: Env,
}

impl State {
    /// Starting state in `ctx`, seeing its accumulated bindings.
    pub fn at(ctx: ContextRef) -> State {
        State { env: Env::over(&ctx), ctx }
    }
}

/// Result of running a whole script.
#[derive(Debug)]
pub struct Outcome {
    pub state: State,
    pub value: Value,
    /// Contexts created by the run, in creation order.
    pub created: Vec<ContextRef>,
    /// Lines written by `print`.
    pub output: Vec<String>,
}

pub struct Interpreter<'a> {
    store: &'a Store,
    hooks: &'a dyn Hooks,
    user: String,
    mode: Mode,
    max_depth: usize,
    depth: usize,
    created: Vec<ContextRef>,
    created_set: HashSet<ContextRef>,
    output: Vec<String>,
}

impl<'a> Interpreter<'a> {
    pub fn new(store: &'a Store, hooks: &'a dyn Hooks, user: impl Into<String>) -> Interpreter<'a> {
        Interpreter {
            store,
            hooks,
            user: user.into(),
            mode: Mode::Unicode,
            max_depth: DEFAULT_MAX_DEPTH,
            depth: 0,
            created: Vec::new(),
            created_set: HashSet::new(),
            output: Vec::new(),
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn store(&self) -> &Store {
        self.store
    }

    pub fn user(&self) -> &str {
        &self.user
    }

    pub fn created(&self) -> &[ContextRef] {
        &self.created
    }

    pub fn take_output(&mut self) -> Vec<String> {
        std::mem::take(&mut self.output)
    }

    /// Parses and runs `src` from `start`.
    pub fn run(mut self, src: &str, start: State) -> Result<Outcome, ScriptError> {
        let block = parse_script(src).map_err(ScriptError::from_syntax)?;
        let (state, value) = self.exec_block(&block, start)?;
        Ok(Outcome { state, value, created: self.created, output: self.output })
    }

    /// Runs a parsed block, threading the state through its statements.
    pub fn exec(&mut self, block: &Block, start: State) -> Result<(State, Value), ScriptError> {
        self.exec_block(block, start)
    }

    fn note_created(&mut self, key: &ContextRef) {
        self.created.push(key.clone());
        self.created_set.insert(key.clone());
    }
}
