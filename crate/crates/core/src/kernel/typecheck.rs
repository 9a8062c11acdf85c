use super::term::{ConstId, Term};
use super::types::LogicType;
use super::KernelError;

/// Infers the type of `t` against a constant stack (newest constant first).
pub fn typecheck(t: &Term, constants: &[LogicType]) -> Result<LogicType, KernelError> {
    let mut binders = Vec::new();
    infer(t, &mut binders, constants)
}

/// Like [`typecheck`], with an additional stack of lambda binder types in
/// scope (innermost last).
pub fn typecheck_under(
    t: &Term,
    binders: &mut Vec<LogicType>,
    constants: &[LogicType],
) -> Result<LogicType, KernelError> {
    infer(t, binders, constants)
}

pub(crate) fn const_type(id: ConstId, instance: Option<&LogicType>) -> Result<LogicType, KernelError> {
    match (id.fixed_type(), instance) {
        (Some(ty), None) => Ok(ty),
        (Some(_), Some(_)) => Err(KernelError::TypeError(format!(
            "constant {} is monomorphic and takes no instance type",
            id.ascii()
        ))),
        (None, None) => Err(KernelError::TypeError(format!(
            "constant {} requires an explicit instance type",
            id.ascii()
        ))),
        (None, Some(inst)) => {
            if id.instance_parameter(inst).is_none() {
                return Err(KernelError::TypeError(format!(
                    "{inst} is not an instance of {}",
                    id.ascii()
                )));
            }
            Ok(inst.clone())
        }
    }
}

fn infer(t: &Term, binders: &mut Vec<LogicType>, constants: &[LogicType]) -> Result<LogicType, KernelError> {
    match t {
        Term::Const(id, inst) => const_type(*id, inst.as_ref()),
        Term::Var(i) => {
            let depth = binders.len();
            if *i < depth {
                Ok(binders[depth - 1 - i].clone())
            } else {
                constants.get(i - depth).cloned().ok_or_else(|| {
                    KernelError::TypeError(format!(
                        "index #{i} is unbound ({} binders, {} constants)",
                        depth,
                        constants.len()
                    ))
                })
            }
        }
        Term::Lam(ty, body) => {
            binders.push(ty.clone());
            let cod = infer(body, binders, constants);
            binders.pop();
            Ok(LogicType::fun(ty.clone(), cod?))
        }
        Term::App(f, a) => {
            let fty = infer(f, binders, constants)?;
            let aty = infer(a, binders, constants)?;
            match fty.as_fun() {
                Some((dom, cod)) if *dom == aty => Ok(cod.clone()),
                Some((dom, _)) => Err(KernelError::TypeError(format!(
                    "argument has type {aty} but the function expects {dom}"
                ))),
                None => Err(KernelError::TypeError(format!(
                    "cannot apply a term of type {fty}"
                ))),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use LogicType::{Prop, Set};

    #[test]
    fn identity_has_function_type() {
        let id = Term::lam(Set, Term::Var(0));
        assert_eq!(typecheck(&id, &[]).unwrap(), LogicType::fun(Set, Set));
    }

    #[test]
    fn empty_set_is_not_a_function() {
        let e = Term::constant(ConstId::EmptySet);
        assert!(matches!(
            typecheck(&Term::app(e.clone(), e), &[]),
            Err(KernelError::TypeError(_))
        ));
    }

    #[test]
    fn equality_instance_on_sets_yields_prop() {
        let e = Term::constant(ConstId::EmptySet);
        let eq = Term::Const(ConstId::Eq, Some(LogicType::fun(Set, LogicType::fun(Set, Prop))));
        assert_eq!(typecheck(&Term::apps(eq, [e.clone(), e]), &[]).unwrap(), Prop);
    }

    #[test]
    fn polymorphic_constant_without_instance_is_rejected() {
        assert!(typecheck(&Term::Const(ConstId::Forall, None), &[]).is_err());
        assert!(typecheck(&Term::Const(ConstId::Not, Some(Prop)), &[]).is_err());
    }

    #[test]
    fn indices_past_binders_count_into_the_constant_stack() {
        let t = Term::lam(Prop, Term::Var(1));
        assert_eq!(typecheck(&t, &[Set]).unwrap(), LogicType::fun(Prop, Set));
        assert!(typecheck(&t, &[]).is_err());
    }
}
