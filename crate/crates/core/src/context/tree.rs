use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Context, ContextError, ContextRef, ContextSource};
use crate::value::Value;

/// `ctx` followed by its ancestors, nearest first.
pub fn ancestors<S: ContextSource + ?Sized>(
    src: &S,
    ctx: &ContextRef,
) -> Result<Vec<Arc<Context>>, ContextError> {
    let mut out = Vec::new();
    let mut cur = Some(ctx.clone());
    while let Some(k) = cur {
        let c = src.load(&k)?;
        cur = c.parent().cloned();
        out.push(c);
    }
    Ok(out)
}

/// Outcome of looking a name up along a parent chain.
#[derive(Clone, Debug, PartialEq)]
pub enum Resolution {
    Bound(Value),
    /// Masked by a `U` component before any binding was found.
    Unbound,
    Missing,
}

pub(crate) fn lookup<S: ContextSource + ?Sized>(
    src: &S,
    ctx: &ContextRef,
    name: &str,
) -> Result<Resolution, ContextError> {
    let mut cur = Some(ctx.clone());
    while let Some(k) = cur {
        let c = src.load(&k)?;
        if c.unbound().contains(name) {
            return Ok(Resolution::Unbound);
        }
        if let Some(v) = c.values().get(name) {
            return Ok(Resolution::Bound(v.clone()));
        }
        cur = c.parent().cloned();
    }
    Ok(Resolution::Missing)
}

/// Cumulative lookup of `name`: the newest `V` binding wins, and a name in
/// some `U` hides every older binding.
pub fn resolve<S: ContextSource + ?Sized>(
    src: &S,
    ctx: &ContextRef,
    name: &str,
) -> Result<Value, ContextError> {
    match lookup(src, ctx, name)? {
        Resolution::Bound(v) => Ok(v),
        Resolution::Unbound | Resolution::Missing => Err(ContextError::NameError(name.to_string())),
    }
}

/// Every name visible in `ctx` with its value.
pub fn accumulated_bindings<S: ContextSource + ?Sized>(
    src: &S,
    ctx: &ContextRef,
) -> Result<BTreeMap<String, Value>, ContextError> {
    let mut out = BTreeMap::new();
    for c in ancestors(src, ctx)?.iter().rev() {
        for n in c.unbound() {
            out.remove(n);
        }
        for (n, v) in c.values() {
            out.insert(n.clone(), v.clone());
        }
    }
    Ok(out)
}

/// Deepest context that is an ancestor of (or equal to) both `a` and `b`.
pub fn common_ancestor<S: ContextSource + ?Sized>(
    src: &S,
    a: &ContextRef,
    b: &ContextRef,
) -> Result<Arc<Context>, ContextError> {
    let mut x = src.load(a)?;
    let mut y = src.load(b)?;
    let up = |c: &Arc<Context>| -> Result<Arc<Context>, ContextError> {
        let p = c
            .parent()
            .ok_or_else(|| ContextError::UnknownContext(format!("parent of {}", c.key())))?;
        src.load(p)
    };
    while x.depth() > y.depth() {
        x = up(&x)?;
    }
    while y.depth() > x.depth() {
        y = up(&y)?;
    }
    while x.key() != y.key() {
        if x.parent().is_none() || y.parent().is_none() {
            return Err(ContextError::UnknownContext(format!(
                "{a} and {b} do not share a root"
            )));
        }
        x = up(&x)?;
        y = up(&y)?;
    }
    Ok(x)
}

/// Number of constants introduced strictly below `ancestor` on the way down
/// to `descendant` (inclusive).
pub fn constants_between<S: ContextSource + ?Sized>(
    src: &S,
    ancestor: &ContextRef,
    descendant: &ContextRef,
) -> Result<usize, ContextError> {
    let mut k = 0;
    let mut cur = src.load(descendant)?;
    let target = src.load(ancestor)?;
    while cur.key() != ancestor {
        if cur.depth() <= target.depth() {
            return Err(ContextError::NotAncestor(ancestor.clone(), descendant.clone()));
        }
        k += cur.constants().len();
        let p = cur.parent().expect("depth > 0 implies a parent").clone();
        cur = src.load(&p)?;
    }
    Ok(k)
}
