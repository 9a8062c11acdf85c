//! The ProofScript value universe.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;

use crate::context::ContextRef;
use crate::interpreter::Function;
use crate::kernel::{LogicType, Term, Theorem};

#[derive(Clone, Debug)]
pub enum Value {
    Theorem(Theorem),
    Context(ContextRef),
    /// A term together with the context its indices refer to.
    Term(Term, ContextRef),
    Type(LogicType),
    Int(BigInt),
    Str(String),
    Bool(bool),
    List(Vec<Value>),
    Vector(Vec<Value>),
    Set(BTreeSet<Value>),
    Map(BTreeMap<Value, Value>),
    Function(Arc<Function>),
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Theorem(_) => "theorem",
            Value::Context(_) => "context",
            Value::Term(..) => "term",
            Value::Type(_) => "type",
            Value::Int(_) => "int",
            Value::Str(_) => "string",
            Value::Bool(_) => "bool",
            Value::List(_) => "list",
            Value::Vector(_) => "vector",
            Value::Set(_) => "set",
            Value::Map(_) => "map",
            Value::Function(_) => "function",
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Value::Theorem(_) => 0,
            Value::Context(_) => 1,
            Value::Term(..) => 2,
            Value::Type(_) => 3,
            Value::Int(_) => 4,
            Value::Str(_) => 5,
            Value::Bool(_) => 6,
            Value::List(_) => 7,
            Value::Vector(_) => 8,
            Value::Set(_) => 9,
            Value::Map(_) => 10,
            Value::Function(_) => 11,
        }
    }

    pub fn int(i: i64) -> Value {
        Value::Int(BigInt::from(i))
    }

    pub fn str(s: impl Into<String>) -> Value {
        Value::Str(s.into())
    }

    /// Deep scan for theorems, including those hidden inside containers and
    /// the captured state of functions.
    pub fn contains_theorem(&self) -> bool {
        match self {
            Value::Theorem(_) => true,
            Value::Context(_)
            | Value::Term(..)
            | Value::Type(_)
            | Value::Int(_)
            | Value::Str(_)
            | Value::Bool(_) => false,
            Value::List(xs) | Value::Vector(xs) => xs.iter().any(Value::contains_theorem),
            Value::Set(xs) => xs.iter().any(Value::contains_theorem),
            Value::Map(m) => m.iter().any(|(k, v)| k.contains_theorem() || v.contains_theorem()),
            Value::Function(f) => f.contains_theorem(),
        }
    }
}

impl Value {
    pub fn contains_function(&self) -> bool {
        match self {
            Value::Function(_) => true,
            Value::List(xs) | Value::Vector(xs) => xs.iter().any(Value::contains_function),
            Value::Set(xs) => xs.iter().any(Value::contains_function),
            Value::Map(m) => m.iter().any(|(k, v)| k.contains_function() || v.contains_function()),
            _ => false,
        }
    }
}

impl Ord for Value {
    fn cmp(&self, other: &Value) -> Ordering {
        use Value::*;
        match (self, other) {
            (Theorem(a), Theorem(b)) => a.cmp(b),
            (Context(a), Context(b)) => a.cmp(b),
            (Term(a, x), Term(b, y)) => (x, a).cmp(&(y, b)),
            (Type(a), Type(b)) => a.cmp(b),
            (Int(a), Int(b)) => a.cmp(b),
            (Str(a), Str(b)) => a.cmp(b),
            (Bool(a), Bool(b)) => a.cmp(b),
            (List(a), List(b)) | (Vector(a), Vector(b)) => a.cmp(b),
            (Set(a), Set(b)) => a.cmp(b),
            (Map(a), Map(b)) => a.cmp(b),
            (Function(a), Function(b)) => a.sort_key().cmp(&b.sort_key()),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Value {
    fn partial_cmp(&self, other: &Value) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Value) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Value {}

impl From<Theorem> for Value {
    fn from(t: Theorem) -> Value {
        Value::Theorem(t)
    }
}

impl From<bool> for Value {
    fn from(b: bool) -> Value {
        Value::Bool(b)
    }
}

impl From<ContextRef> for Value {
    fn from(c: ContextRef) -> Value {
        Value::Context(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets_are_canonical() {
        let a: BTreeSet<Value> = [Value::int(2), Value::int(1), Value::int(2)].into_iter().collect();
        let b: BTreeSet<Value> = [Value::int(1), Value::int(2)].into_iter().collect();
        assert_eq!(Value::Set(a), Value::Set(b));
    }

    #[test]
    fn ordering_separates_tags() {
        assert!(Value::Bool(true) > Value::str("zzz"));
        assert_ne!(Value::List(vec![]), Value::Vector(vec![]));
    }

    #[test]
    fn theorem_scan_is_deep() {
        let th = crate::kernel::Theorem::certify(
            crate::kernel::Term::constant(crate::kernel::ConstId::True),
            ContextRef::new("00", 0),
        );
        let nested = Value::List(vec![Value::int(1), Value::Vector(vec![Value::Theorem(th)])]);
        assert!(nested.contains_theorem());
        assert!(!Value::List(vec![Value::int(1)]).contains_theorem());
    }
}
