use super::normalize::{alpha_beta_eta_equal, normalize};
use super::term::{substitute, ConstId, Term};
use super::typecheck::typecheck;
use super::types::LogicType;
use super::KernelError;
use crate::context::ContextRef;

/// A proposition certified to hold in its home context.
///
/// Fields are private and every constructor is crate-internal: outside code
/// can only obtain theorems from kernel rules and context operations.
///
/// ```compile_fail
/// use peerhol::kernel::{Term, Theorem, ConstId};
/// let forged = Theorem { prop: Term::constant(ConstId::False), context: todo!() };
/// ```
///
/// ```compile_fail
/// use peerhol::kernel::{Term, Theorem, ConstId};
/// let forged = Theorem::certify(Term::constant(ConstId::False), todo!());
/// ```
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Theorem {
    prop: Term,
    context: ContextRef,
}

impl Theorem {
    /// Introduces `prop` as a theorem of `context`. Callers: context
    /// creation (assumptions, definitions, obtained facts), theorem moves and
    /// the decoder for stored contexts.
    pub(crate) fn certify(prop: Term, context: ContextRef) -> Theorem {
        Theorem { prop, context }
    }

    pub fn proposition(&self) -> &Term {
        &self.prop
    }

    pub fn context(&self) -> &ContextRef {
        &self.context
    }
}

/// Second operand of a theorem application.
#[derive(Clone, Copy, Debug)]
pub enum Argument<'a> {
    Theorem(&'a Theorem),
    Term(&'a Term),
}

fn implication_parts(prop: &Term) -> Result<Option<(Term, Term)>, KernelError> {
    if let Some((h, p)) = prop.as_binary(ConstId::Implies) {
        return Ok(Some((h.clone(), p.clone())));
    }
    let n = normalize(prop)?;
    if let Some((h, p)) = n.as_binary(ConstId::Implies) {
        return Ok(Some((h.clone(), p.clone())));
    }
    // ¬h is the normal form of h ⟶ false
    if let Some(h) = n.as_unary(ConstId::Not) {
        return Ok(Some((h.clone(), Term::constant(ConstId::False))));
    }
    Ok(None)
}

fn forall_parts(prop: &Term) -> Result<Option<(LogicType, Term)>, KernelError> {
    if let Some((ty, p)) = prop.as_quantifier(ConstId::Forall) {
        return Ok(Some((ty, p.clone())));
    }
    let n = normalize(prop)?;
    Ok(n.as_quantifier(ConstId::Forall).map(|(ty, p)| (ty, p.clone())))
}

/// Modus ponens (`h ⟶ p` with `h`) and ∀-instantiation (`∀x. p` with a
/// term `u`). Both operands must live in the same context, whose constant
/// stack is `constants`.
pub fn apply_theorem(f: &Theorem, g: Argument<'_>, constants: &[LogicType]) -> Result<Theorem, KernelError> {
    match g {
        Argument::Theorem(h) => {
            if h.context != f.context {
                return Err(KernelError::NotApplicable(
                    "theorems live in different contexts".into(),
                ));
            }
            let Some((hyp, concl)) = implication_parts(&f.prop)? else {
                return Err(KernelError::NotApplicable(
                    "the function theorem is not an implication".into(),
                ));
            };
            if normalize(&hyp)? != normalize(&h.prop)? {
                return Err(KernelError::NotApplicable(
                    "the argument theorem does not match the premise".into(),
                ));
            }
            Ok(Theorem { prop: concl, context: f.context.clone() })
        }
        Argument::Term(u) => {
            let Some((ty, pred)) = forall_parts(&f.prop)? else {
                return Err(KernelError::NotApplicable(
                    "the theorem is neither an implication nor a universal quantification".into(),
                ));
            };
            let uty = typecheck(u, constants)?;
            if uty != ty {
                return Err(KernelError::NotApplicable(format!(
                    "the quantified variable has type {ty} but the term has type {uty}"
                )));
            }
            let prop = match &pred {
                Term::Lam(_, body) => substitute(body, u),
                _ => Term::app(pred, u.clone()),
            };
            Ok(Theorem { prop, context: f.context.clone() })
        }
    }
}

/// Restates a theorem with an equal (up to normalization) proposition.
pub fn convert(th: &Theorem, prop: &Term, constants: &[LogicType]) -> Result<Theorem, KernelError> {
    if !alpha_beta_eta_equal(&th.prop, prop, constants)? {
        return Err(KernelError::NotApplicable(
            "the propositions are not equal".into(),
        ));
    }
    Ok(Theorem { prop: prop.clone(), context: th.context.clone() })
}
