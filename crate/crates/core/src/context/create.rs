use std::sync::Arc;

use super::moves::move_theorem;
use super::{Context, ContextError, ContextKind, ContextRecord, ContextRef, ContextSource};
use crate::kernel::{
    alpha_beta_eta_equal, normalize, shift_constants, typecheck, ConstId, LogicType, Term, Theorem,
};
use crate::store::Store;
use crate::syntax::is_identifier;
use crate::value::Value;

/// What to put into a new child context.
#[derive(Clone, Debug)]
pub enum Payload {
    Fix { name: String, ty: LogicType },
    /// `prop` is a term of the parent context.
    Assume { prop: Term, label: Option<String> },
    /// `definition` is a term of the parent context.
    Define { name: String, definition: Term, label: Option<String> },
    /// Peels one `∃` binder per name off the theorem's proposition.
    Obtain { names: Vec<String>, theorem: Theorem, label: Option<String> },
    /// `prop` is a term of the parent context and must equal the theorem's
    /// proposition once the theorem has been moved there.
    Have { prop: Term, theorem: Theorem, label: Option<String> },
    Bind { name: String, value: Value },
    Unbind { name: String },
    Import,
}

impl Payload {
    pub fn kind(&self) -> ContextKind {
        match self {
            Payload::Fix { .. } => ContextKind::Fix,
            Payload::Assume { .. } => ContextKind::Assume,
            Payload::Define { .. } => ContextKind::Define,
            Payload::Obtain { .. } => ContextKind::Obtain,
            Payload::Have { .. } => ContextKind::Have,
            Payload::Bind { .. } => ContextKind::Bind,
            Payload::Unbind { .. } => ContextKind::Unbind,
            Payload::Import => ContextKind::Import,
        }
    }
}

/// Veto point run before a context is appended under `parent`.
pub trait CreationGuard {
    fn check(&self, parent: &ContextRef) -> Result<(), ContextError>;
}

impl<F: Fn(&ContextRef) -> Result<(), ContextError>> CreationGuard for F {
    fn check(&self, parent: &ContextRef) -> Result<(), ContextError> {
        self(parent)
    }
}

fn check_constant_name(name: &str) -> Result<(), ContextError> {
    if is_identifier(name) {
        Ok(())
    } else {
        Err(ContextError::InvalidPayload(format!(
            "'{name}' is not a valid constant name"
        )))
    }
}

fn check_prop(t: &Term, constants: &[LogicType]) -> Result<(), ContextError> {
    let ty = typecheck(t, constants)?;
    if ty.is_prop() {
        Ok(())
    } else {
        Err(ContextError::Kernel(crate::kernel::KernelError::TypeError(format!(
            "expected a proposition, found a term of type {ty}"
        ))))
    }
}

fn bind_fact(record: &mut ContextRecord, th: Theorem, label: Option<String>) {
    if let Some(l) = label {
        record.values.insert(l, Value::Theorem(th.clone()));
    }
    record.values.insert("fact".to_string(), Value::Theorem(th));
}

/// Removes the outermost existential of `prop`, returning the bound type and
/// the body, which lives one constant deeper.
fn peel_exists(prop: &Term) -> Result<Option<(LogicType, Term)>, ContextError> {
    let split = |t: &Term| -> Result<Option<(LogicType, Term)>, ContextError> {
        let Some((ty, pred)) = t.as_quantifier(ConstId::Exists) else {
            return Ok(None);
        };
        let body = match pred {
            Term::Lam(_, b) => (**b).clone(),
            other => Term::app(shift_constants(other, 1)?, Term::Var(0)),
        };
        Ok(Some((ty, body)))
    };
    match split(prop)? {
        Some(r) => Ok(Some(r)),
        None => split(&normalize(prop)?),
    }
}

/// Creates a child of `parent` according to `payload` and persists it.
pub fn create_child(
    store: &Store,
    parent: &ContextRef,
    owner: &str,
    payload: Payload,
    guard: &dyn CreationGuard,
) -> Result<Arc<Context>, ContextError> {
    let parent_env = store.name_env(parent)?;
    let stack = parent_env.types();
    let kind = payload.kind();

    // Validate and compute everything that does not depend on the new key.
    enum Ready {
        Fix(String, LogicType),
        Assume(Term, Option<String>),
        Define(String, LogicType, Term, Option<String>),
        Obtain(Vec<(String, LogicType)>, Term, Option<String>),
        Have(Term, Option<String>),
        Bind(String, Value),
        Unbind(String),
        Import,
    }
    let ready = match payload {
        Payload::Fix { name, ty } => {
            check_constant_name(&name)?;
            Ready::Fix(name, ty)
        }
        Payload::Assume { prop, label } => {
            check_prop(&prop, stack)?;
            Ready::Assume(prop, label)
        }
        Payload::Define { name, definition, label } => {
            check_constant_name(&name)?;
            let ty = typecheck(&definition, stack)?;
            Ready::Define(name, ty, definition, label)
        }
        Payload::Obtain { names, theorem, label } => {
            if names.is_empty() {
                return Err(ContextError::InvalidPayload("obtain needs at least one name".into()));
            }
            let moved = move_theorem(store, &theorem, parent)?;
            let mut prop = moved.proposition().clone();
            let mut constants = Vec::new();
            for name in names {
                check_constant_name(&name)?;
                let Some((ty, body)) = peel_exists(&prop)? else {
                    return Err(ContextError::NotExistential(format!(
                        "cannot obtain '{name}': no existential quantifier left"
                    )));
                };
                constants.push((name, ty));
                prop = body;
            }
            Ready::Obtain(constants, prop, label)
        }
        Payload::Have { prop, theorem, label } => {
            check_prop(&prop, stack)?;
            let moved = move_theorem(store, &theorem, parent)?;
            if !alpha_beta_eta_equal(&prop, moved.proposition(), stack)? {
                return Err(ContextError::GuardMismatch(
                    "the guard does not match the proposition of the theorem".into(),
                ));
            }
            Ready::Have(prop, label)
        }
        Payload::Bind { name, value } => Ready::Bind(name, value),
        Payload::Unbind { name } => Ready::Unbind(name),
        Payload::Import => Ready::Import,
    };

    guard.check(parent)?;

    store.append_context(Some(parent), owner, move |key| {
        let mut record = ContextRecord::empty(kind);
        match ready {
            Ready::Fix(name, ty) => record.constants.push((name, ty)),
            Ready::Assume(prop, label) => {
                record.assumptions.push(prop.clone());
                bind_fact(&mut record, Theorem::certify(prop, key.clone()), label);
            }
            Ready::Define(name, ty, definition, label) => {
                let fact = Term::eq(ty.clone(), Term::Var(0), shift_constants(&definition, 1)?);
                record.constants.push((name, ty));
                bind_fact(&mut record, Theorem::certify(fact, key.clone()), label);
            }
            Ready::Obtain(constants, prop, label) => {
                record.constants = constants;
                bind_fact(&mut record, Theorem::certify(prop, key.clone()), label);
            }
            Ready::Have(prop, label) => {
                bind_fact(&mut record, Theorem::certify(prop, key.clone()), label);
            }
            Ready::Bind(name, value) => {
                record.values.insert(name, value);
            }
            Ready::Unbind(name) => {
                record.unbound.insert(name);
            }
            Ready::Import => {}
        }
        Ok(record)
    })
}
