//! The immutable context tree.
//!
//! A context is a node with a parent, an owner and four components:
//! constants `C`, assumptions `A`, value bindings `V` and unbound names `U`.
//! All four are cumulative along the parent chain. Contexts are created only
//! through [`create_child`] and never change afterwards.

mod create;
mod moves;
pub(crate) mod tree;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use thiserror::Error;

use crate::kernel::{KernelError, LogicType, Term};
use crate::store::StoreError;
use crate::value::Value;

pub use create::{create_child, CreationGuard, Payload};
pub use moves::{close_to_parent, move_term, move_theorem, ClosureCase};
pub use tree::{
    accumulated_bindings, ancestors, common_ancestor, constants_between, resolve, Resolution,
};

/// Address of a stored context: the key of the entity holding its chain and
/// the position within that chain.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ContextRef {
    entity: String,
    index: u32,
}

impl ContextRef {
    pub fn new(entity: impl Into<String>, index: u32) -> ContextRef {
        ContextRef { entity: entity.into(), index }
    }

    pub fn entity(&self) -> &str {
        &self.entity
    }

    pub fn index(&self) -> u32 {
        self.index
    }
}

impl fmt::Display for ContextRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.entity, self.index)
    }
}

impl FromStr for ContextRef {
    type Err = ContextError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ContextError::UnknownContext(s.to_string());
        let (entity, index) = s.rsplit_once(':').ok_or_else(bad)?;
        if entity.is_empty() {
            return Err(bad());
        }
        Ok(ContextRef::new(entity, index.parse().map_err(|_| bad())?))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ContextKind {
    Root,
    Fix,
    Assume,
    Define,
    Obtain,
    Have,
    Bind,
    Unbind,
    /// Empty wrapper created when a script reaches for a context outside its
    /// own ancestry (`@name`, `@"key"`), so the dependency shows up as a
    /// parent edge.
    Import,
}

impl ContextKind {
    pub const ALL: [ContextKind; 9] = [
        ContextKind::Root,
        ContextKind::Fix,
        ContextKind::Assume,
        ContextKind::Define,
        ContextKind::Obtain,
        ContextKind::Have,
        ContextKind::Bind,
        ContextKind::Unbind,
        ContextKind::Import,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ContextKind::Root => "root",
            ContextKind::Fix => "fix",
            ContextKind::Assume => "assume",
            ContextKind::Define => "define",
            ContextKind::Obtain => "obtain",
            ContextKind::Have => "have",
            ContextKind::Bind => "bind",
            ContextKind::Unbind => "unbind",
            ContextKind::Import => "import",
        }
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Option<ContextKind> {
        ContextKind::ALL.get(code as usize).copied()
    }
}

impl fmt::Display for ContextKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The stored part of a context: the quintuple `(kind, C, A, V, U)`.
#[derive(Clone, PartialEq, Debug)]
pub struct ContextRecord {
    pub kind: ContextKind,
    pub constants: Vec<(String, LogicType)>,
    pub assumptions: Vec<Term>,
    pub values: BTreeMap<String, Value>,
    pub unbound: BTreeSet<String>,
}

impl ContextRecord {
    pub fn empty(kind: ContextKind) -> ContextRecord {
        ContextRecord {
            kind,
            constants: Vec::new(),
            assumptions: Vec::new(),
            values: BTreeMap::new(),
            unbound: BTreeSet::new(),
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub struct Context {
    key: ContextRef,
    parent: Option<ContextRef>,
    owner: String,
    depth: usize,
    record: ContextRecord,
}

impl Context {
    pub(crate) fn new(
        key: ContextRef,
        parent: Option<ContextRef>,
        owner: String,
        depth: usize,
        record: ContextRecord,
    ) -> Context {
        Context { key, parent, owner, depth, record }
    }

    pub fn key(&self) -> &ContextRef {
        &self.key
    }

    pub fn parent(&self) -> Option<&ContextRef> {
        self.parent.as_ref()
    }

    pub fn owner(&self) -> &str {
        &self.owner
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn kind(&self) -> ContextKind {
        self.record.kind
    }

    pub fn constants(&self) -> &[(String, LogicType)] {
        &self.record.constants
    }

    pub fn assumptions(&self) -> &[Term] {
        &self.record.assumptions
    }

    pub fn values(&self) -> &BTreeMap<String, Value> {
        &self.record.values
    }

    pub fn unbound(&self) -> &BTreeSet<String> {
        &self.record.unbound
    }

    pub fn record(&self) -> &ContextRecord {
        &self.record
    }
}

/// Names and types of all constants visible in a context, newest first.
/// Index `i` of this stack is de Bruijn index `i` at lambda depth zero.
#[derive(Clone, PartialEq, Debug, Default)]
pub struct NameEnv {
    names: Vec<String>,
    types: Vec<LogicType>,
}

impl NameEnv {
    pub fn new() -> NameEnv {
        NameEnv::default()
    }

    /// Builds an environment from `(name, type)` pairs listed newest first.
    pub fn from_newest_first(entries: impl IntoIterator<Item = (String, LogicType)>) -> NameEnv {
        let (names, types) = entries.into_iter().unzip();
        NameEnv { names, types }
    }

    /// Returns a copy with `constants` (oldest first, as in a `C` component)
    /// pushed on top.
    pub fn extended(&self, constants: &[(String, LogicType)]) -> NameEnv {
        let mut names: Vec<String> = constants.iter().rev().map(|(n, _)| n.clone()).collect();
        let mut types: Vec<LogicType> = constants.iter().rev().map(|(_, t)| t.clone()).collect();
        names.extend(self.names.iter().cloned());
        types.extend(self.types.iter().cloned());
        NameEnv { names, types }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn types(&self) -> &[LogicType] {
        &self.types
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }
}

/// Read access to stored contexts.
pub trait ContextSource {
    fn load(&self, key: &ContextRef) -> Result<Arc<Context>, ContextError>;

    /// Constant names and types visible in `key`.
    fn name_env(&self, key: &ContextRef) -> Result<Arc<NameEnv>, ContextError> {
        let mut chain = Vec::new();
        let mut cur = Some(key.clone());
        while let Some(k) = cur {
            let ctx = self.load(&k)?;
            cur = ctx.parent().cloned();
            chain.push(ctx);
        }
        let mut env = NameEnv::new();
        for ctx in chain.iter().rev() {
            env = env.extended(ctx.constants());
        }
        Ok(Arc::new(env))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContextError {
    #[error("unknown context {0}")]
    UnknownContext(String),
    #[error("name '{0}' is not bound")]
    NameError(String),
    #[error("{0} is not an ancestor of {1}")]
    NotAncestor(ContextRef, ContextRef),
    #[error("guard mismatch: {0}")]
    GuardMismatch(String),
    #[error("theorem is not existential: {0}")]
    NotExistential(String),
    #[error("dependency cycle: {0}")]
    DependencyCycle(String),
    #[error("invalid context payload: {0}")]
    InvalidPayload(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Store(#[from] StoreError),
}
