use std::fmt;
use std::sync::Arc;

use super::env::Env;
use crate::context::ContextRef;
use crate::store::codec::{CodecError, Reader, Writer};
use crate::syntax::script::{parse_script, DefGroup, ExprKind, StmtKind};
use crate::value::Value;

/// Functions provided by the interpreter itself.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum Builtin {
    TypeOf,
    Proposition,
    ParseType,
    Term,
    Length,
    Show,
    ContextOf,
    Print,
}

impl Builtin {
    pub const ALL: [Builtin; 8] = [
        Builtin::TypeOf,
        Builtin::Proposition,
        Builtin::ParseType,
        Builtin::Term,
        Builtin::Length,
        Builtin::Show,
        Builtin::ContextOf,
        Builtin::Print,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::TypeOf => "typeOf",
            Builtin::Proposition => "proposition",
            Builtin::ParseType => "parseType",
            Builtin::Term => "term",
            Builtin::Length => "length",
            Builtin::Show => "show",
            Builtin::ContextOf => "contextOf",
            Builtin::Print => "print",
        }
    }

    pub fn named(name: &str) -> Option<Builtin> {
        Builtin::ALL.into_iter().find(|b| b.name() == name)
    }

    pub fn arity(self) -> usize {
        1
    }
}

/// A function defined in a script: member `index` of a `def` group (or a
/// `fn` lambda), closed over the environment it was defined in.
#[derive(Clone, Debug)]
pub struct Closure {
    pub group: Arc<DefGroup>,
    pub index: usize,
    /// Environment in front of the group; the group's own names are added on
    /// each call so members can call each other.
    pub env: Env,
    pub def_context: ContextRef,
}

#[derive(Clone, Debug)]
pub enum FunctionKind {
    Closure(Closure),
    Builtin(Builtin),
}

/// A function value, possibly partially applied.
#[derive(Clone, Debug)]
pub struct Function {
    kind: FunctionKind,
    applied: Vec<Value>,
}

impl Function {
    pub fn builtin(b: Builtin) -> Function {
        Function { kind: FunctionKind::Builtin(b), applied: Vec::new() }
    }

    pub fn closure(c: Closure) -> Function {
        Function { kind: FunctionKind::Closure(c), applied: Vec::new() }
    }

    pub fn kind(&self) -> &FunctionKind {
        &self.kind
    }

    pub fn applied(&self) -> &[Value] {
        &self.applied
    }

    pub fn arity(&self) -> usize {
        match &self.kind {
            FunctionKind::Closure(c) => c.group.defs[c.index].params.len(),
            FunctionKind::Builtin(b) => b.arity(),
        }
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            FunctionKind::Closure(c) => {
                let n = &c.group.defs[c.index].name;
                if n.is_empty() {
                    "fn"
                } else {
                    n
                }
            }
            FunctionKind::Builtin(b) => b.name(),
        }
    }

    /// Adds an argument; the caller invokes the function once the result is
    /// saturated.
    pub fn with_arg(&self, v: Value) -> Function {
        let mut f = self.clone();
        f.applied.push(v);
        f
    }

    pub fn is_saturated(&self) -> bool {
        self.applied.len() >= self.arity()
    }

    pub fn contains_theorem(&self) -> bool {
        self.applied.iter().any(Value::contains_theorem)
            || match &self.kind {
                FunctionKind::Closure(c) => c.env.contains_theorem(),
                FunctionKind::Builtin(_) => false,
            }
    }

    /// Total order among functions, for use inside sets and map keys.
    pub fn sort_key(&self) -> String {
        let head = match &self.kind {
            FunctionKind::Closure(c) => format!("closure {} {} {}", c.def_context, c.index, c.group.source),
            FunctionKind::Builtin(b) => format!("builtin {}", b.name()),
        };
        let args: Vec<String> = self.applied.iter().map(|v| format!("{v:?}")).collect();
        format!("{head} [{}]", args.join(", "))
    }

    pub(crate) fn encode(&self, w: &mut Writer) {
        match &self.kind {
            FunctionKind::Closure(c) => {
                w.u8(0);
                w.str(&c.group.source);
                w.u32(c.index as u32);
                w.context_ref(&c.def_context);
            }
            FunctionKind::Builtin(b) => {
                w.u8(1);
                w.str(b.name());
            }
        }
        w.len(self.applied.len());
        for v in &self.applied {
            w.value(v);
        }
    }

    /// Rebuilds a stored function by re-parsing its source. The restored
    /// closure sees the bindings of its definition context; script-local
    /// bindings it captured are not stored.
    pub(crate) fn decode(r: &mut Reader<'_>) -> Result<Function, CodecError> {
        let kind = match r.u8()? {
            0 => {
                let source = r.str()?;
                let index = r.u32()? as usize;
                let def_context = r.context_ref()?;
                let group = group_of(&source)?;
                if index >= group.defs.len() {
                    return Err(CodecError::Invalid(format!("function index {index} out of range")));
                }
                FunctionKind::Closure(Closure { group, index, env: Env::over(&def_context), def_context })
            }
            1 => {
                let name = r.str()?;
                FunctionKind::Builtin(
                    Builtin::named(&name).ok_or_else(|| CodecError::Invalid(format!("unknown builtin {name}")))?,
                )
            }
            t => return Err(CodecError::Invalid(format!("function tag {t}"))),
        };
        let n = r.len()?;
        let applied = (0..n).map(|_| r.value()).collect::<Result<Vec<_>, _>>()?;
        Ok(Function { kind, applied })
    }
}

fn group_of(source: &str) -> Result<Arc<DefGroup>, CodecError> {
    let bad = |m: String| CodecError::Invalid(format!("stored function: {m}"));
    let mut block = parse_script(source).map_err(|e| bad(e.to_string()))?;
    if block.len() != 1 {
        return Err(bad("expected exactly one definition".into()));
    }
    match block.pop().expect("one statement").kind {
        StmtKind::Def(g) => Ok(g),
        StmtKind::Expr(e) => match e.kind {
            ExprKind::Lambda(g) => Ok(g),
            _ => Err(bad("not a function".into())),
        },
        _ => Err(bad("not a function".into())),
    }
}

impl fmt::Display for Function {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<function {}", self.name())?;
        if !self.applied.is_empty() {
            write!(f, " applied to {}", self.applied.len())?;
        }
        f.write_str(">")
    }
}
