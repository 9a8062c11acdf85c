//! Deterministic binary encoding of stored records.
//!
//! All integers are little-endian; strings and byte runs carry a `u32`
//! length prefix. Every top-level record starts with a format version byte.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_bigint::BigInt;
use thiserror::Error;

use crate::context::{ContextKind, ContextRecord, ContextRef};
use crate::interpreter::Function;
use crate::kernel::{ConstId, LogicType, Term, Theorem};
use crate::value::Value;

pub const FORMAT_VERSION: u8 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("unexpected end of data at byte {0}")]
    Truncated(usize),
    #[error("unsupported format version {0}")]
    Version(u8),
    #[error("invalid data: {0}")]
    Invalid(String),
}

#[derive(Default)]
pub struct Writer {
    buf: Vec<u8>,
}

impl Writer {
    pub fn new() -> Writer {
        Writer::default()
    }

    pub fn finish(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }

    pub fn len(&mut self, n: usize) {
        self.u32(u32::try_from(n).expect("collections in stored records fit in u32"));
    }

    pub fn bytes(&mut self, b: &[u8]) {
        self.len(b.len());
        self.buf.extend_from_slice(b);
    }

    pub fn str(&mut self, s: &str) {
        self.bytes(s.as_bytes());
    }

    pub fn bool(&mut self, b: bool) {
        self.u8(b as u8);
    }

    pub fn opt_str(&mut self, s: Option<&str>) {
        match s {
            None => self.u8(0),
            Some(s) => {
                self.u8(1);
                self.str(s);
            }
        }
    }

    pub fn context_ref(&mut self, r: &ContextRef) {
        self.str(r.entity());
        self.u32(r.index());
    }

    pub fn opt_context_ref(&mut self, r: Option<&ContextRef>) {
        match r {
            None => self.u8(0),
            Some(r) => {
                self.u8(1);
                self.context_ref(r);
            }
        }
    }

    pub fn ty(&mut self, t: &LogicType) {
        match t {
            LogicType::Set => self.u8(0),
            LogicType::Prop => self.u8(1),
            LogicType::Fun(d, c) => {
                self.u8(2);
                self.ty(d);
                self.ty(c);
            }
        }
    }

    pub fn term(&mut self, t: &Term) {
        match t {
            Term::Const(id, inst) => {
                self.u8(0);
                self.u8(ConstId::ALL.iter().position(|c| c == id).expect("listed") as u8);
                match inst {
                    None => self.u8(0),
                    Some(ty) => {
                        self.u8(1);
                        self.ty(ty);
                    }
                }
            }
            Term::Var(i) => {
                self.u8(1);
                self.u64(*i as u64);
            }
            Term::Lam(ty, body) => {
                self.u8(2);
                self.ty(ty);
                self.term(body);
            }
            Term::App(f, a) => {
                self.u8(3);
                self.term(f);
                self.term(a);
            }
        }
    }

    pub fn value(&mut self, v: &Value) {
        match v {
            Value::Theorem(th) => {
                self.u8(0);
                self.term(th.proposition());
                self.context_ref(th.context());
            }
            Value::Context(r) => {
                self.u8(1);
                self.context_ref(r);
            }
            Value::Term(t, r) => {
                self.u8(2);
                self.term(t);
                self.context_ref(r);
            }
            Value::Type(t) => {
                self.u8(3);
                self.ty(t);
            }
            Value::Int(i) => {
                self.u8(4);
                self.bytes(&i.to_signed_bytes_le());
            }
            Value::Str(s) => {
                self.u8(5);
                self.str(s);
            }
            Value::Bool(b) => {
                self.u8(6);
                self.bool(*b);
            }
            Value::List(xs) | Value::Vector(xs) => {
                self.u8(if matches!(v, Value::List(_)) { 7 } else { 8 });
                self.len(xs.len());
                for x in xs {
                    self.value(x);
                }
            }
            Value::Set(xs) => {
                self.u8(9);
                self.len(xs.len());
                for x in xs {
                    self.value(x);
                }
            }
            Value::Map(m) => {
                self.u8(10);
                self.len(m.len());
                for (k, x) in m {
                    self.value(k);
                    self.value(x);
                }
            }
            Value::Function(f) => {
                self.u8(11);
                f.encode(self);
            }
        }
    }

    pub fn record(&mut self, r: &ContextRecord) {
        self.u8(r.kind.code());
        self.len(r.constants.len());
        for (n, t) in &r.constants {
            self.str(n);
            self.ty(t);
        }
        self.len(r.assumptions.len());
        for a in &r.assumptions {
            self.term(a);
        }
        self.len(r.values.len());
        for (n, v) in &r.values {
            self.str(n);
            self.value(v);
        }
        self.len(r.unbound.len());
        for n in &r.unbound {
            self.str(n);
        }
    }
}

pub struct Reader<'a> {
    data: &'a [u8],
    at: usize,
}

type R<T> = Result<T, CodecError>;

impl<'a> Reader<'a> {
    pub fn new(data: &'a [u8]) -> Reader<'a> {
        Reader { data, at: 0 }
    }

    pub fn finish(&self) -> R<()> {
        if self.at == self.data.len() {
            Ok(())
        } else {
            Err(CodecError::Invalid(format!("{} trailing bytes", self.data.len() - self.at)))
        }
    }

    fn take(&mut self, n: usize) -> R<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|e| *e <= self.data.len()).ok_or(CodecError::Truncated(self.at))?;
        let s = &self.data[self.at..end];
        self.at = end;
        Ok(s)
    }

    pub fn u8(&mut self) -> R<u8> {
        Ok(self.take(1)?[0])
    }

    pub fn u32(&mut self) -> R<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    pub fn u64(&mut self) -> R<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub fn len(&mut self) -> R<usize> {
        let n = self.u32()? as usize;
        // every element takes at least one byte
        if n > self.data.len() - self.at {
            return Err(CodecError::Invalid(format!("length {n} exceeds the remaining data")));
        }
        Ok(n)
    }

    pub fn bytes(&mut self) -> R<&'a [u8]> {
        let n = self.len()?;
        self.take(n)
    }

    pub fn str(&mut self) -> R<String> {
        let b = self.bytes()?;
        String::from_utf8(b.to_vec()).map_err(|_| CodecError::Invalid("string is not UTF-8".into()))
    }

    pub fn bool(&mut self) -> R<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(CodecError::Invalid(format!("bad boolean {b}"))),
        }
    }

    fn flag(&mut self) -> R<bool> {
        self.bool()
    }

    pub fn opt_str(&mut self) -> R<Option<String>> {
        Ok(if self.flag()? { Some(self.str()?) } else { None })
    }

    pub fn context_ref(&mut self) -> R<ContextRef> {
        let e = self.str()?;
        Ok(ContextRef::new(e, self.u32()?))
    }

    pub fn opt_context_ref(&mut self) -> R<Option<ContextRef>> {
        Ok(if self.flag()? { Some(self.context_ref()?) } else { None })
    }

    pub fn ty(&mut self) -> R<LogicType> {
        match self.u8()? {
            0 => Ok(LogicType::Set),
            1 => Ok(LogicType::Prop),
            2 => {
                let d = self.ty()?;
                Ok(LogicType::fun(d, self.ty()?))
            }
            t => Err(CodecError::Invalid(format!("bad type tag {t}"))),
        }
    }

    pub fn term(&mut self) -> R<Term> {
        match self.u8()? {
            0 => {
                let code = self.u8()? as usize;
                let id = *ConstId::ALL.get(code).ok_or_else(|| CodecError::Invalid(format!("bad constant {code}")))?;
                let inst = if self.flag()? { Some(self.ty()?) } else { None };
                Ok(Term::Const(id, inst))
            }
            1 => Ok(Term::Var(self.u64()? as usize)),
            2 => {
                let ty = self.ty()?;
                Ok(Term::lam(ty, self.term()?))
            }
            3 => {
                let f = self.term()?;
                Ok(Term::app(f, self.term()?))
            }
            t => Err(CodecError::Invalid(format!("bad term tag {t}"))),
        }
    }

    pub fn value(&mut self) -> R<Value> {
        Ok(match self.u8()? {
            0 => {
                let prop = self.term()?;
                Value::Theorem(Theorem::certify(prop, self.context_ref()?))
            }
            1 => Value::Context(self.context_ref()?),
            2 => {
                let t = self.term()?;
                Value::Term(t, self.context_ref()?)
            }
            3 => Value::Type(self.ty()?),
            4 => Value::Int(BigInt::from_signed_bytes_le(self.bytes()?)),
            5 => Value::Str(self.str()?),
            6 => Value::Bool(self.bool()?),
            tag @ (7 | 8) => {
                let n = self.len()?;
                let xs = (0..n).map(|_| self.value()).collect::<R<Vec<_>>>()?;
                if tag == 7 {
                    Value::List(xs)
                } else {
                    Value::Vector(xs)
                }
            }
            9 => {
                let n = self.len()?;
                Value::Set((0..n).map(|_| self.value()).collect::<R<BTreeSet<_>>>()?)
            }
            10 => {
                let n = self.len()?;
                let mut m = BTreeMap::new();
                for _ in 0..n {
                    let k = self.value()?;
                    m.insert(k, self.value()?);
                }
                Value::Map(m)
            }
            11 => Value::Function(Arc::new(Function::decode(self)?)),
            t => return Err(CodecError::Invalid(format!("bad value tag {t}"))),
        })
    }

    pub fn record(&mut self) -> R<ContextRecord> {
        let code = self.u8()?;
        let kind = ContextKind::from_code(code).ok_or_else(|| CodecError::Invalid(format!("bad context kind {code}")))?;
        let mut r = ContextRecord::empty(kind);
        for _ in 0..self.len()? {
            let n = self.str()?;
            r.constants.push((n, self.ty()?));
        }
        for _ in 0..self.len()? {
            r.assumptions.push(self.term()?);
        }
        for _ in 0..self.len()? {
            let n = self.str()?;
            r.values.insert(n, self.value()?);
        }
        for _ in 0..self.len()? {
            r.unbound.insert(self.str()?);
        }
        Ok(r)
    }
}

/// A stored chain of contexts.
#[derive(Clone, Debug, PartialEq)]
pub struct Entity {
    pub id: String,
    pub parent: Option<ContextRef>,
    /// Depth of the first context of the chain.
    pub depth: u64,
    pub owner: String,
    pub timestamp: u64,
    pub version: String,
    pub chain: Vec<ContextRecord>,
}

pub fn encode_entity(e: &Entity) -> Vec<u8> {
    let mut w = Writer::new();
    w.u8(FORMAT_VERSION);
    w.str(&e.id);
    w.opt_context_ref(e.parent.as_ref());
    w.u64(e.depth);
    w.str(&e.owner);
    w.u64(e.timestamp);
    w.str(&e.version);
    w.len(e.chain.len());
    for r in &e.chain {
        w.record(r);
    }
    w.finish()
}

pub fn decode_entity(bytes: &[u8]) -> Result<Entity, CodecError> {
    let mut r = Reader::new(bytes);
    let v = r.u8()?;
    if v != FORMAT_VERSION {
        return Err(CodecError::Version(v));
    }
    let id = r.str()?;
    let parent = r.opt_context_ref()?;
    let depth = r.u64()?;
    let owner = r.str()?;
    let timestamp = r.u64()?;
    let version = r.str()?;
    let n = r.len()?;
    if n == 0 {
        return Err(CodecError::Invalid("entity with an empty chain".into()));
    }
    let chain = (0..n).map(|_| r.record()).collect::<R<Vec<_>>>()?;
    r.finish()?;
    Ok(Entity { id, parent, depth, owner, timestamp, version, chain })
}
