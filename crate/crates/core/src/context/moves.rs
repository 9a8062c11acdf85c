use super::tree::{common_ancestor, constants_between};
use super::{Context, ContextError, ContextRef, ContextSource};
use crate::kernel::{shift_constants, KernelError, Term, Theorem};
use crate::value::Value;

/// Which row of the closure table applied when a theorem left a context.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ClosureCase {
    /// `V′` empty: `∀c₁…cₙ. a₁ ⟶ … ⟶ aₘ ⟶ t`.
    Universal,
    /// `V′` non-empty and `A` empty: `∃d₁…dₘ. t′` over the constants of `C`
    /// that occur in `t`.
    Existential,
}

/// `V′`: the bindings of `ctx` that are neither one of its own assumptions
/// nor free of theorems.
pub(crate) fn residual_bindings(ctx: &Context) -> Vec<&str> {
    ctx.values()
        .iter()
        .filter(|(_, v)| match v {
            Value::Theorem(th) => !ctx.assumptions().contains(th.proposition()),
            other => other.contains_theorem(),
        })
        .map(|(n, _)| n.as_str())
        .collect()
}

/// Rewrites a proposition of `ctx` into the corresponding proposition of its
/// parent.
pub fn close_to_parent(ctx: &Context, prop: &Term) -> Result<(Term, ClosureCase), ContextError> {
    let constants = ctx.constants();
    if residual_bindings(ctx).is_empty() {
        // The single shared index space means the constants of `ctx` turn
        // into the quantifier binders without any renumbering.
        let mut body = prop.clone();
        for a in ctx.assumptions().iter().rev() {
            body = Term::implies(a.clone(), body);
        }
        for (_, ty) in constants.iter().rev() {
            body = Term::forall(ty.clone(), body);
        }
        return Ok((body, ClosureCase::Universal));
    }
    if !ctx.assumptions().is_empty() {
        return Err(ContextError::Kernel(KernelError::Internal(format!(
            "context {} has both assumptions and residual bindings",
            ctx.key()
        ))));
    }
    let n = constants.len();
    // stack position 0 is the newest constant, i.e. the last entry of C
    let occurs: Vec<bool> = (0..n).map(|pos| prop.has_free(pos)).collect();
    let kept = occurs.iter().filter(|&&b| b).count();
    let body = prop.map_free(&mut |i| {
        Ok(if i < n {
            occurs[..i].iter().filter(|&&b| b).count()
        } else {
            i - n + kept
        })
    })?;
    let mut body = body;
    for (pos, (_, ty)) in constants.iter().rev().enumerate() {
        if occurs[pos] {
            body = Term::exists(ty.clone(), body);
        }
    }
    Ok((body, ClosureCase::Existential))
}

/// Moves a term between arbitrary contexts through their deepest common
/// ancestor. Fails if the term mentions a constant the target cannot see.
pub fn move_term<S: ContextSource + ?Sized>(
    src: &S,
    t: &Term,
    from: &ContextRef,
    to: &ContextRef,
) -> Result<Term, ContextError> {
    if from == to {
        return Ok(t.clone());
    }
    let meet = common_ancestor(src, from, to)?;
    let up = constants_between(src, meet.key(), from)?;
    let down = constants_between(src, meet.key(), to)?;
    let t = shift_constants(t, -(up as isize))?;
    Ok(shift_constants(&t, down as isize)?)
}

/// Moves a theorem to `to`. Downward moves shift the proposition; upward
/// moves close over each context left behind, one parent at a time.
pub fn move_theorem<S: ContextSource + ?Sized>(
    src: &S,
    th: &Theorem,
    to: &ContextRef,
) -> Result<Theorem, ContextError> {
    let from = th.context();
    if from == to {
        return Ok(th.clone());
    }
    let meet = common_ancestor(src, from, to)?;
    let mut prop = th.proposition().clone();
    let mut cur = src.load(from)?;
    while cur.key() != meet.key() {
        prop = close_to_parent(&cur, &prop)?.0;
        let p = cur.parent().expect("below the common ancestor").clone();
        cur = src.load(&p)?;
    }
    let down = constants_between(src, meet.key(), to)?;
    let prop = shift_constants(&prop, down as isize)?;
    Ok(Theorem::certify(prop, to.clone()))
}
