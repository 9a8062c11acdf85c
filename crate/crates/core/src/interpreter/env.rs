use std::fmt;
use std::sync::Arc;

use super::function::{Builtin, Function};
use crate::context::{ContextError, ContextRef, ContextSource, Resolution};
use crate::value::Value;

/// One frame of an environment.
#[derive(Clone, Debug)]
pub enum Entry {
    /// A script-level binding; `None` masks the name.
    Bind(String, Option<Value>),
    /// All bindings accumulated in a stored context.
    Layer(ContextRef),
}

struct Frame {
    entry: Entry,
    next: Option<Arc<Frame>>,
}

/// Persistent, immutable environment: extending it never disturbs copies
/// taken earlier, which is what closures capture.
#[derive(Clone, Default)]
pub struct Env {
    head: Option<Arc<Frame>>,
}

/// Result of looking a name up.
#[derive(Clone, Debug, PartialEq)]
pub enum Lookup {
    Found(Value),
    /// Masked by an unbind.
    Masked,
    Missing,
}

impl Env {
    pub fn empty() -> Env {
        Env::default()
    }

    /// The bindings of `ctx` with builtins underneath.
    pub fn over(ctx: &ContextRef) -> Env {
        Env::empty().layer(ctx.clone())
    }

    fn push(&self, entry: Entry) -> Env {
        Env { head: Some(Arc::new(Frame { entry, next: self.head.clone() })) }
    }

    pub fn bind(&self, name: impl Into<String>, value: Value) -> Env {
        self.push(Entry::Bind(name.into(), Some(value)))
    }

    pub fn mask(&self, name: impl Into<String>) -> Env {
        self.push(Entry::Bind(name.into(), None))
    }

    pub fn layer(&self, ctx: ContextRef) -> Env {
        self.push(Entry::Layer(ctx))
    }

    pub fn entries(&self) -> impl Iterator<Item = &Entry> {
        let mut cur = self.head.as_deref();
        std::iter::from_fn(move || {
            let f = cur?;
            cur = f.next.as_deref();
            Some(&f.entry)
        })
    }

    pub fn lookup<S: ContextSource + ?Sized>(&self, src: &S, name: &str) -> Result<Lookup, ContextError> {
        for e in self.entries() {
            match e {
                Entry::Bind(n, v) if n == name => {
                    return Ok(match v {
                        Some(v) => Lookup::Found(v.clone()),
                        None => Lookup::Masked,
                    })
                }
                Entry::Bind(..) => {}
                Entry::Layer(ctx) => match crate::context::tree::lookup(src, ctx, name)? {
                    Resolution::Bound(v) => return Ok(Lookup::Found(v)),
                    Resolution::Unbound => return Ok(Lookup::Masked),
                    Resolution::Missing => {}
                },
            }
        }
        Ok(match Builtin::named(name) {
            Some(b) => Lookup::Found(Value::Function(Arc::new(Function::builtin(b)))),
            None => Lookup::Missing,
        })
    }

    /// Script-level bindings above the innermost layer, newest first, one
    /// entry per name.
    pub fn local_bindings(&self) -> Vec<(String, Option<Value>)> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        for e in self.entries() {
            match e {
                Entry::Bind(n, v) => {
                    if seen.insert(n.clone()) {
                        out.push((n.clone(), v.clone()));
                    }
                }
                Entry::Layer(_) => break,
            }
        }
        out
    }

    /// Conservative: a stored layer may hold theorems, so it counts as one.
    pub fn contains_theorem(&self) -> bool {
        self.entries().any(|e| match e {
            Entry::Bind(_, Some(v)) => v.contains_theorem(),
            Entry::Bind(_, None) => false,
            Entry::Layer(_) => true,
        })
    }
}

impl Drop for Env {
    // Long environments would otherwise be freed recursively.
    fn drop(&mut self) {
        let mut cur = self.head.take();
        while let Some(f) = cur {
            match Arc::try_unwrap(f) {
                Ok(mut frame) => cur = frame.next.take(),
                Err(_) => break,
            }
        }
    }
}

impl fmt::Debug for Env {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries()).finish()
    }
}
