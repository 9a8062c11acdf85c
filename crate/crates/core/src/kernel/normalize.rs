use super::term::{substitute, ConstId, Term};
use super::typecheck::typecheck;
use super::types::LogicType;
use super::KernelError;

/// Upper bound on β-steps per normalization. Well-typed terms never get
/// close; hitting it means a kernel bug.
pub const REDUCTION_LIMIT: usize = 1_000_000;

struct Normalizer {
    steps: usize,
}

impl Normalizer {
    fn tick(&mut self) -> Result<(), KernelError> {
        self.steps += 1;
        if self.steps > REDUCTION_LIMIT {
            return Err(KernelError::Internal(format!(
                "normalization exceeded {REDUCTION_LIMIT} reductions"
            )));
        }
        Ok(())
    }

    fn norm(&mut self, t: &Term) -> Result<Term, KernelError> {
        match t {
            Term::Const(..) | Term::Var(_) => Ok(t.clone()),
            Term::Lam(ty, body) => {
                let body = self.norm(body)?;
                Ok(eta(ty, body))
            }
            Term::App(f, a) => {
                let f = self.norm(f)?;
                let a = self.norm(a)?;
                if let Term::Lam(_, body) = &f {
                    self.tick()?;
                    return self.norm(&substitute(body, &a));
                }
                Ok(negation(Term::app(f, a)))
            }
        }
    }
}

fn eta(ty: &LogicType, body: Term) -> Term {
    if let Term::App(g, x) = &body {
        if matches!(**x, Term::Var(0)) && !g.has_free(0) {
            return g.shift_from(0, -1).expect("index 0 does not occur");
        }
    }
    Term::lam(ty.clone(), body)
}

/// ¬¬x → x, ¬true → false, ¬false → true, a ⟶ false → ¬a.
fn negation(t: Term) -> Term {
    if let Some(x) = t.as_unary(ConstId::Not) {
        if let Some(y) = x.as_unary(ConstId::Not) {
            return y.clone();
        }
        if x.is_const(ConstId::True) {
            return Term::constant(ConstId::False);
        }
        if x.is_const(ConstId::False) {
            return Term::constant(ConstId::True);
        }
        return t;
    }
    if let Some((a, b)) = t.as_binary(ConstId::Implies) {
        if b.is_const(ConstId::False) {
            return negation(Term::not(a.clone()));
        }
    }
    t
}

/// Normal form under β, η and the negation rules. Defined constants are
/// never unfolded.
pub fn normalize(t: &Term) -> Result<Term, KernelError> {
    let mut n = Normalizer { steps: 0 };
    let mut current = n.norm(t)?;
    loop {
        let next = n.norm(&current)?;
        if next == current {
            return Ok(current);
        }
        current = next;
    }
}

/// Structural equality after normalization. Both terms must typecheck
/// against `constants` at the same type.
pub fn alpha_beta_eta_equal(a: &Term, b: &Term, constants: &[LogicType]) -> Result<bool, KernelError> {
    let ta = typecheck(a, constants)?;
    let tb = typecheck(b, constants)?;
    if ta != tb {
        return Err(KernelError::TypeError(format!(
            "cannot compare a term of type {ta} with one of type {tb}"
        )));
    }
    Ok(normalize(a)? == normalize(b)?)
}
