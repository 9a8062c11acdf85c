use std::sync::Arc;

use super::types::LogicType;
use super::KernelError;

/// The built-in constant signature.
///
/// `Eq`, `Forall`, `Exists` and `Choice` are polymorphic in nature; every
/// occurrence in a term carries the monomorphic instance type it is used at.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ConstId {
    Eq,
    Forall,
    Exists,
    Choice,
    Implies,
    And,
    Or,
    Not,
    True,
    False,
    Elem,
    EmptySet,
    PowerSet,
    BigUnion,
    BigIntersect,
    Union,
    Intersect,
    Subset,
    Singleton,
    Separation,
    Replacement,
}

impl ConstId {
    pub const ALL: [ConstId; 21] = [
        ConstId::Eq,
        ConstId::Forall,
        ConstId::Exists,
        ConstId::Choice,
        ConstId::Implies,
        ConstId::And,
        ConstId::Or,
        ConstId::Not,
        ConstId::True,
        ConstId::False,
        ConstId::Elem,
        ConstId::EmptySet,
        ConstId::PowerSet,
        ConstId::BigUnion,
        ConstId::BigIntersect,
        ConstId::Union,
        ConstId::Intersect,
        ConstId::Subset,
        ConstId::Singleton,
        ConstId::Separation,
        ConstId::Replacement,
    ];

    pub fn is_polymorphic(self) -> bool {
        matches!(
            self,
            ConstId::Eq | ConstId::Forall | ConstId::Exists | ConstId::Choice
        )
    }

    /// Unicode glyph, where the constant has one.
    pub fn glyph(self) -> Option<&'static str> {
        Some(match self {
            ConstId::Eq => "=",
            ConstId::Forall => "∀",
            ConstId::Exists => "∃",
            ConstId::Choice => "ε",
            ConstId::Implies => "⟶",
            ConstId::And => "∧",
            ConstId::Or => "∨",
            ConstId::Not => "¬",
            ConstId::True => "true",
            ConstId::False => "false",
            ConstId::Elem => "∈",
            ConstId::EmptySet => "∅",
            ConstId::PowerSet => "𝒫",
            ConstId::BigUnion => "⋃",
            ConstId::BigIntersect => "⋂",
            ConstId::Union => "∪",
            ConstId::Intersect => "∩",
            ConstId::Subset => "⊆",
            ConstId::Singleton | ConstId::Separation | ConstId::Replacement => return None,
        })
    }

    pub fn ascii(self) -> &'static str {
        match self {
            ConstId::Eq => "=",
            ConstId::Forall => "_all",
            ConstId::Exists => "_exists",
            ConstId::Choice => "_choose",
            ConstId::Implies => "-->",
            ConstId::And => "_and",
            ConstId::Or => "_or",
            ConstId::Not => "_not",
            ConstId::True => "true",
            ConstId::False => "false",
            ConstId::Elem => "_elem",
            ConstId::EmptySet => "_emptyset",
            ConstId::PowerSet => "_powerset",
            ConstId::BigUnion => "_Union",
            ConstId::BigIntersect => "_Intersect",
            ConstId::Union => "_union",
            ConstId::Intersect => "_intersect",
            ConstId::Subset => "_subset",
            ConstId::Singleton => "_Singleton",
            ConstId::Separation => "_Separation",
            ConstId::Replacement => "_Replacement",
        }
    }

    pub fn symbol(self, ascii: bool) -> &'static str {
        if ascii {
            self.ascii()
        } else {
            self.glyph().unwrap_or_else(|| self.ascii())
        }
    }

    /// The type of a monomorphic constant. `None` for the polymorphic ones.
    pub fn fixed_type(self) -> Option<LogicType> {
        use LogicType::{Prop, Set};
        let f = LogicType::fun;
        Some(match self {
            ConstId::Eq | ConstId::Forall | ConstId::Exists | ConstId::Choice => return None,
            ConstId::Implies | ConstId::And | ConstId::Or => f(Prop, f(Prop, Prop)),
            ConstId::Not => f(Prop, Prop),
            ConstId::True | ConstId::False => Prop,
            ConstId::Elem | ConstId::Subset => f(Set, f(Set, Prop)),
            ConstId::EmptySet => Set,
            ConstId::PowerSet
            | ConstId::BigUnion
            | ConstId::BigIntersect
            | ConstId::Singleton => f(Set, Set),
            ConstId::Union | ConstId::Intersect => f(Set, f(Set, Set)),
            ConstId::Separation => f(Set, f(f(Set, Prop), Set)),
            ConstId::Replacement => f(Set, f(f(Set, Set), Set)),
        })
    }

    /// Full instance type of a polymorphic constant used at `τ`.
    pub fn instance_at(self, tau: LogicType) -> Option<LogicType> {
        let f = LogicType::fun;
        Some(match self {
            ConstId::Eq => f(tau.clone(), f(tau, LogicType::Prop)),
            ConstId::Forall | ConstId::Exists => f(LogicType::predicate(tau), LogicType::Prop),
            ConstId::Choice => f(LogicType::predicate(tau.clone()), tau),
            _ => return None,
        })
    }

    /// Recovers `τ` from a full instance type, rejecting malformed instances.
    pub fn instance_parameter(self, instance: &LogicType) -> Option<LogicType> {
        let (dom, cod) = instance.as_fun()?;
        let tau = match self {
            ConstId::Eq => dom.clone(),
            ConstId::Forall | ConstId::Exists | ConstId::Choice => dom.as_fun()?.0.clone(),
            _ => return None,
        };
        let _ = cod;
        (self.instance_at(tau.clone())? == *instance).then_some(tau)
    }
}

/// A de Bruijn term.
///
/// Lambda binders and context constants share one index space: an index
/// below the enclosing lambda depth refers to a binder, the remainder counts
/// into the home context's constant stack, newest first.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Term {
    Const(ConstId, Option<LogicType>),
    Var(usize),
    Lam(LogicType, Arc<Term>),
    App(Arc<Term>, Arc<Term>),
}

impl Term {
    pub fn constant(id: ConstId) -> Term {
        debug_assert!(!id.is_polymorphic());
        Term::Const(id, None)
    }

    /// A polymorphic constant used at parameter type `tau`.
    pub fn poly(id: ConstId, tau: LogicType) -> Term {
        Term::Const(id, id.instance_at(tau))
    }

    pub fn lam(ty: LogicType, body: Term) -> Term {
        Term::Lam(ty, Arc::new(body))
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Arc::new(f), Arc::new(a))
    }

    pub fn apps(f: Term, args: impl IntoIterator<Item = Term>) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn binary(id: ConstId, a: Term, b: Term) -> Term {
        Term::apps(Term::constant(id), [a, b])
    }

    pub fn eq(tau: LogicType, a: Term, b: Term) -> Term {
        Term::apps(Term::poly(ConstId::Eq, tau), [a, b])
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::binary(ConstId::Implies, a, b)
    }

    pub fn not(a: Term) -> Term {
        Term::app(Term::constant(ConstId::Not), a)
    }

    pub fn forall(tau: LogicType, body: Term) -> Term {
        Term::app(Term::poly(ConstId::Forall, tau.clone()), Term::lam(tau, body))
    }

    pub fn exists(tau: LogicType, body: Term) -> Term {
        Term::app(Term::poly(ConstId::Exists, tau.clone()), Term::lam(tau, body))
    }

    pub fn is_const(&self, id: ConstId) -> bool {
        matches!(self, Term::Const(c, _) if *c == id)
    }

    /// Splits `f a₁ … aₙ` into head and arguments.
    pub fn strip_app(&self) -> (&Term, Vec<&Term>) {
        let mut args = Vec::new();
        let mut head = self;
        while let Term::App(f, a) = head {
            args.push(&**a);
            head = f;
        }
        args.reverse();
        (head, args)
    }

    /// `c a b` for a binary constant `c`.
    pub fn as_binary(&self, id: ConstId) -> Option<(&Term, &Term)> {
        let Term::App(f, b) = self else { return None };
        let Term::App(c, a) = &**f else { return None };
        c.is_const(id).then_some((&**a, &**b))
    }

    pub fn as_unary(&self, id: ConstId) -> Option<&Term> {
        let Term::App(c, a) = self else { return None };
        c.is_const(id).then_some(&**a)
    }

    /// `Q P` for a quantifier `Q` (∀ or ∃): returns the bound type and the predicate.
    pub fn as_quantifier(&self, id: ConstId) -> Option<(LogicType, &Term)> {
        let Term::App(q, p) = self else { return None };
        let Term::Const(c, Some(inst)) = &**q else { return None };
        if *c != id {
            return None;
        }
        Some((id.instance_parameter(inst)?, &**p))
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(..) | Term::Var(_) => 1,
            Term::Lam(_, b) => 1 + b.size(),
            Term::App(f, a) => 1 + f.size() + a.size(),
        }
    }

    /// Whether index `target` (relative to the term's top level) occurs free.
    pub fn has_free(&self, target: usize) -> bool {
        fn go(t: &Term, target: usize, depth: usize) -> bool {
            match t {
                Term::Const(..) => false,
                Term::Var(i) => *i == target + depth,
                Term::Lam(_, b) => go(b, target, depth + 1),
                Term::App(f, a) => go(f, target, depth) || go(a, target, depth),
            }
        }
        go(self, target, 0)
    }

    /// Smallest free index (relative to the top level), if any.
    pub fn min_free(&self) -> Option<usize> {
        fn go(t: &Term, depth: usize) -> Option<usize> {
            match t {
                Term::Const(..) => None,
                Term::Var(i) => i.checked_sub(depth),
                Term::Lam(_, b) => go(b, depth + 1),
                Term::App(f, a) => match (go(f, depth), go(a, depth)) {
                    (Some(x), Some(y)) => Some(x.min(y)),
                    (x, y) => x.or(y),
                },
            }
        }
        go(self, 0)
    }

    /// Adds `k` to every index at or above `cutoff` binders deep.
    ///
    /// Fails with [`KernelError::DanglingConstant`] if a negative `k` would
    /// push a free index below the cutoff.
    pub fn shift_from(&self, cutoff: usize, k: isize) -> Result<Term, KernelError> {
        if k == 0 {
            return Ok(self.clone());
        }
        fn go(t: &Term, depth: usize, k: isize) -> Result<Term, KernelError> {
            Ok(match t {
                Term::Const(..) => t.clone(),
                Term::Var(i) if *i < depth => t.clone(),
                Term::Var(i) => {
                    let j = *i as isize + k;
                    if j < depth as isize {
                        return Err(KernelError::DanglingConstant(*i - depth));
                    }
                    Term::Var(j as usize)
                }
                Term::Lam(ty, b) => Term::Lam(ty.clone(), Arc::new(go(b, depth + 1, k)?)),
                Term::App(f, a) => {
                    Term::App(Arc::new(go(f, depth, k)?), Arc::new(go(a, depth, k)?))
                }
            })
        }
        go(self, cutoff, k)
    }

    /// Rewrites free indices (those referring past the top-level binders)
    /// through `f`, which receives the index relative to the top level.
    pub fn map_free(&self, f: &mut impl FnMut(usize) -> Result<usize, KernelError>) -> Result<Term, KernelError> {
        fn go(
            t: &Term,
            depth: usize,
            f: &mut impl FnMut(usize) -> Result<usize, KernelError>,
        ) -> Result<Term, KernelError> {
            Ok(match t {
                Term::Const(..) => t.clone(),
                Term::Var(i) if *i < depth => t.clone(),
                Term::Var(i) => Term::Var(f(*i - depth)? + depth),
                Term::Lam(ty, b) => Term::Lam(ty.clone(), Arc::new(go(b, depth + 1, f)?)),
                Term::App(a, b) => Term::App(Arc::new(go(a, depth, f)?), Arc::new(go(b, depth, f)?)),
            })
        }
        go(self, 0, f)
    }
}

/// Shifts every reference to a context constant by `k`; lambda-bound
/// variables are untouched. A negative `k` fails if the term mentions one of
/// the `|k|` newest constants.
pub fn shift_constants(t: &Term, k: isize) -> Result<Term, KernelError> {
    t.shift_from(0, k)
}

/// Capture-avoiding substitution of `arg` for index 0 of `body`; the
/// remaining free indices of `body` move down by one.
pub fn substitute(body: &Term, arg: &Term) -> Term {
    fn go(t: &Term, depth: usize, arg: &Term) -> Term {
        match t {
            Term::Const(..) => t.clone(),
            Term::Var(i) if *i < depth => t.clone(),
            Term::Var(i) if *i == depth => arg
                .shift_from(0, depth as isize)
                .expect("positive shifts cannot dangle"),
            Term::Var(i) => Term::Var(i - 1),
            Term::Lam(ty, b) => Term::Lam(ty.clone(), Arc::new(go(b, depth + 1, arg))),
            Term::App(f, a) => Term::App(Arc::new(go(f, depth, arg)), Arc::new(go(a, depth, arg))),
        }
    }
    go(body, 0, arg)
}
