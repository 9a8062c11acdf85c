use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};

use super::env::{Env, Lookup};
use super::function::{Builtin, Closure, Function, FunctionKind};
use super::{ErrorClass, Interpreter, ScriptError, State};
use crate::context::{
    create_child, move_term, move_theorem, resolve, Context, ContextRef, ContextSource, Payload,
};
use crate::kernel::{
    alpha_beta_eta_equal, apply_theorem, shift_constants, typecheck, Argument, ConstId, LogicType, Term, Theorem,
};
use crate::syntax::script::{BinOp, Expr, ExprKind, Literal, Pattern, Stmt, StmtKind, UnOp};
use crate::syntax::{is_ident_continue, is_ident_start, parse_term_at, parse_type, Pos};
use crate::value::Value;

type Res<T> = Result<T, ScriptError>;

const RED_ZONE: usize = 64 * 1024;
const STACK_GROWTH: usize = 2 * 1024 * 1024;

fn err(class: ErrorClass, pos: Pos, message: impl Into<String>) -> ScriptError {
    ScriptError::new(class, pos, message)
}

fn type_err(pos: Pos, message: impl Into<String>) -> ScriptError {
    err(ErrorClass::TypeError, pos, message)
}

/// Payload of `fix` after evaluation.
enum FixSpec {
    Typed(String, LogicType),
    Member(String, Term),
}

impl Interpreter<'_> {
    pub(super) fn exec_block(&mut self, block: &[Stmt], mut st: State) -> Res<(State, Value)> {
        let mut last = None;
        for s in block {
            let (next, v) = stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.exec_stmt(s, st))?;
            st = next;
            last = v;
        }
        let v = last.unwrap_or_else(|| Value::Context(st.ctx.clone()));
        Ok((st, v))
    }

    /// Returns the new state and, for expression statements, their value.
    fn exec_stmt(&mut self, s: &Stmt, st: State) -> Res<(State, Option<Value>)> {
        let pos = s.pos;
        let next = match &s.kind {
            StmtKind::Fix { label, payload } => self.fix(label.clone(), payload, st, pos)?,
            StmtKind::Assume { label, prop } => {
                let (prop, _) = self.term_arg(prop, &st)?;
                self.create(st, Payload::Assume { prop, label: label.clone() }, pos)?
            }
            StmtKind::Define { name, definition } => {
                let (definition, _) = self.term_arg(definition, &st)?;
                self.create(st, Payload::Define { name: name.clone(), definition, label: None }, pos)?
            }
            StmtKind::Obtain { names, by } => {
                let v = self.eval(by, &st)?;
                let theorem = self.theorem_of(v, by.pos)?;
                self.create(st, Payload::Obtain { names: names.clone(), theorem, label: None }, pos)?
            }
            StmtKind::Have { label, guard, by } => {
                let (prop, ty) = self.term_arg(guard, &st)?;
                if !ty.is_prop() {
                    return Err(type_err(guard.pos, format!("the guard has type {ty}, not prop")));
                }
                let v = self.eval(by, &st)?;
                let theorem = self.theorem_of(v, by.pos)?;
                self.create(st, Payload::Have { prop, theorem, label: label.clone() }, pos)?
            }
            StmtKind::Let { name, value } => {
                let value = self.eval(value, &st)?;
                self.create(st, Payload::Bind { name: name.clone(), value }, pos)?
            }
            StmtKind::Unbind { name } => self.create(st, Payload::Unbind { name: name.clone() }, pos)?,
            StmtKind::Val { pat, value } => {
                let v = self.eval(value, &st)?;
                let env = match_pattern(pat, &v, st.env.clone()).ok_or_else(|| {
                    err(ErrorClass::RuntimeError, pos, format!("value {} does not match the pattern", self.show(&v)))
                })?;
                State { ctx: st.ctx, env }
            }
            StmtKind::Def(group) => {
                let mut env = st.env.clone();
                for (index, d) in group.defs.iter().enumerate() {
                    let f = Function::closure(Closure {
                        group: group.clone(),
                        index,
                        env: st.env.clone(),
                        def_context: st.ctx.clone(),
                    });
                    env = env.bind(d.name.clone(), Value::Function(Arc::new(f)));
                }
                State { ctx: st.ctx, env }
            }
            StmtKind::Expr(e) if e.kind.is_control() => {
                let (next, v) = self.control(e, st)?;
                return Ok((next, Some(v)));
            }
            StmtKind::Expr(e) => {
                let v = self.eval(e, &st)?;
                return Ok((st, Some(v)));
            }
        };
        Ok((next, None))
    }

    fn guarded_create(&mut self, parent: &ContextRef, payload: Payload, pos: Pos) -> Res<Arc<Context>> {
        let created = &self.created_set;
        let hooks = self.hooks;
        let guard = |p: &ContextRef| if created.contains(p) { Ok(()) } else { hooks.check_parent(p) };
        let ctx = create_child(self.store, parent, &self.user, payload, &guard)
            .map_err(|e| ScriptError::from_context(e, pos))?;
        self.note_created(ctx.key());
        Ok(ctx)
    }

    /// Creates a child of the current context and moves into it; the new
    /// context's bindings are added to the environment.
    fn create(&mut self, st: State, payload: Payload, pos: Pos) -> Res<State> {
        let ctx = self.guarded_create(&st.ctx, payload, pos)?;
        let mut env = st.env;
        for (n, v) in ctx.values() {
            env = env.bind(n.clone(), v.clone());
        }
        for n in ctx.unbound() {
            env = env.mask(n.clone());
        }
        Ok(State { ctx: ctx.key().clone(), env })
    }

    fn fix(&mut self, label: Option<String>, payload: &Expr, st: State, pos: Pos) -> Res<State> {
        let v = match &payload.kind {
            // A quoted payload is a declaration, not a term of the context.
            ExprKind::Term(src, _) => Value::Str(src.clone()),
            _ => self.eval(payload, &st)?,
        };
        let spec = match v {
            Value::Str(s) => self.fix_string(&s, &st, payload.pos)?,
            Value::Vector(xs) | Value::List(xs) if xs.len() == 2 => {
                let Value::Str(name) = &xs[0] else {
                    return Err(type_err(payload.pos, "fix: the first component must be a name"));
                };
                match &xs[1] {
                    Value::Type(ty) => FixSpec::Typed(name.clone(), ty.clone()),
                    other => {
                        let (d, ty) = self.to_term(other.clone(), &st, payload.pos)?;
                        if !ty.is_set() {
                            return Err(type_err(payload.pos, format!("fix: the domain has type {ty}, not set")));
                        }
                        FixSpec::Member(name.clone(), d)
                    }
                }
            }
            other => {
                return Err(type_err(
                    payload.pos,
                    format!("fix expects \"x : type\", \"x ∈ D\" or a pair, got a {}", other.type_name()),
                ))
            }
        };
        match spec {
            FixSpec::Typed(name, ty) => {
                if label.is_some() {
                    return Err(type_err(pos, "only a membership fix introduces an assumption to label"));
                }
                self.create(st, Payload::Fix { name, ty }, pos)
            }
            FixSpec::Member(name, domain) => {
                let st = self.create(st, Payload::Fix { name, ty: LogicType::Set }, pos)?;
                let d = shift_constants(&domain, 1).map_err(|e| ScriptError::from_kernel(e, pos))?;
                let prop = Term::binary(ConstId::Elem, Term::Var(0), d);
                self.create(st, Payload::Assume { prop, label }, pos)
            }
        }
    }

    /// `"x : τ"` or `"x ∈ D"`, with `D` read in the current context.
    fn fix_string(&mut self, s: &str, st: &State, pos: Pos) -> Res<FixSpec> {
        let t = s.trim_start();
        let name_len = match t.chars().next() {
            Some(c) if is_ident_start(c) => {
                t.char_indices().find(|(_, c)| !is_ident_continue(*c)).map_or(t.len(), |(i, _)| i)
            }
            _ => return Err(type_err(pos, format!("fix: expected a name in \"{s}\""))),
        };
        let name = t[..name_len].to_string();
        let rest = t[name_len..].trim_start();
        if let Some(ty) = rest.strip_prefix(':') {
            let ty = parse_type(ty).map_err(|e| ScriptError::from_syntax(e).at(pos))?;
            Ok(FixSpec::Typed(name, ty))
        } else if let Some(d) = rest.strip_prefix('∈').or_else(|| rest.strip_prefix("_elem")) {
            let (d, ty) = self.parse_in(d, st, pos)?;
            if !ty.is_set() {
                return Err(type_err(pos, format!("fix: the domain has type {ty}, not set")));
            }
            Ok(FixSpec::Member(name, d))
        } else {
            Err(type_err(pos, format!("fix: expected ':' or '∈' after '{name}' in \"{s}\"")))
        }
    }

    fn parse_in(&self, src: &str, st: &State, pos: Pos) -> Res<(Term, LogicType)> {
        let env = self.store.name_env(&st.ctx).map_err(|e| ScriptError::from_context(e, pos))?;
        parse_term_at(src, &env, pos).map_err(ScriptError::from_syntax)
    }

    /// A term operand: quoted literals are read directly in the current
    /// context, anything else is evaluated and converted.
    fn term_arg(&mut self, e: &Expr, st: &State) -> Res<(Term, LogicType)> {
        if let ExprKind::Term(src, p) = &e.kind {
            return self.parse_in(src, st, *p);
        }
        let v = self.eval(e, st)?;
        self.to_term(v, st, e.pos)
    }

    /// Converts terms from other contexts and strings into terms of the
    /// current context.
    pub(super) fn to_term(&self, v: Value, st: &State, pos: Pos) -> Res<(Term, LogicType)> {
        match v {
            Value::Term(t, from) => {
                let t = move_term(self.store, &t, &from, &st.ctx).map_err(|e| ScriptError::from_context(e, pos))?;
                let env = self.store.name_env(&st.ctx).map_err(|e| ScriptError::from_context(e, pos))?;
                let ty = typecheck(&t, env.types()).map_err(|e| ScriptError::from_kernel(e, pos))?;
                Ok((t, ty))
            }
            Value::Str(s) => self.parse_in(&s, st, pos),
            other => Err(type_err(pos, format!("expected a term, got a {}", other.type_name()))),
        }
    }

    /// Theorems are used as they are; a context stands for its `fact`.
    fn theorem_of(&self, v: Value, pos: Pos) -> Res<Theorem> {
        match v {
            Value::Theorem(th) => Ok(th),
            Value::Context(c) => match resolve(self.store, &c, "fact") {
                Ok(Value::Theorem(th)) => Ok(th),
                Ok(other) => Err(type_err(pos, format!("the fact of context {c} is a {}", other.type_name()))),
                Err(_) => Err(err(ErrorClass::NameError, pos, format!("context {c} has no fact"))),
            },
            other => Err(type_err(pos, format!("expected a theorem, got a {}", other.type_name()))),
        }
    }

    pub(super) fn eval(&mut self, e: &Expr, st: &State) -> Res<Value> {
        stacker::maybe_grow(RED_ZONE, STACK_GROWTH, || self.eval_inner(e, st))
    }

    fn eval_inner(&mut self, e: &Expr, st: &State) -> Res<Value> {
        let pos = e.pos;
        Ok(match &e.kind {
            ExprKind::Lit(Literal::Int(i)) => Value::Int(i.clone()),
            ExprKind::Lit(Literal::Str(s)) => Value::Str(s.clone()),
            ExprKind::Lit(Literal::Bool(b)) => Value::Bool(*b),
            ExprKind::Term(src, p) => Value::Term(self.parse_in(src, st, *p)?.0, st.ctx.clone()),
            ExprKind::Root => Value::Context(self.hooks.root().map_err(|e| e.at(pos))?),
            ExprKind::This => Value::Context(st.ctx.clone()),
            ExprKind::Ident(n) => match st.env.lookup(self.store, n).map_err(|e| ScriptError::from_context(e, pos))? {
                Lookup::Found(v) => v,
                Lookup::Masked => return Err(err(ErrorClass::NameError, pos, format!("'{n}' has been unbound"))),
                Lookup::Missing => return Err(err(ErrorClass::NameError, pos, format!("unknown name '{n}'"))),
            },
            ExprKind::At(r) => {
                let target = self.hooks.resolve_reference(r, &self.user).map_err(|e| e.at(pos))?;
                let wrapper = self.guarded_create(&target, Payload::Import, pos)?;
                Value::Context(wrapper.key().clone())
            }
            ExprKind::List(xs) => Value::List(self.eval_all(xs, st)?),
            ExprKind::Vector(xs) => Value::Vector(self.eval_all(xs, st)?),
            ExprKind::Set(xs) => Value::Set(self.eval_all(xs, st)?.into_iter().collect::<BTreeSet<_>>()),
            ExprKind::Map(kvs) => {
                let mut m = BTreeMap::new();
                for (k, v) in kvs {
                    let k = self.eval(k, st)?;
                    let v = self.eval(v, st)?;
                    m.insert(k, v);
                }
                Value::Map(m)
            }
            ExprKind::Field(x, name) => match self.eval(x, st)? {
                Value::Context(c) => resolve(self.store, &c, name).map_err(|e| ScriptError::from_context(e, pos))?,
                Value::Map(m) => m
                    .get(&Value::Str(name.clone()))
                    .cloned()
                    .ok_or_else(|| err(ErrorClass::NameError, pos, format!("map has no key \"{name}\"")))?,
                other => return Err(type_err(pos, format!("a {} has no field '{name}'", other.type_name()))),
            },
            ExprKind::App(f, g) => {
                let f = self.eval(f, st)?;
                let g = self.eval(g, st)?;
                self.apply(f, g, st, pos)?
            }
            ExprKind::Unary(op, x) => {
                let v = self.eval(x, st)?;
                match (op, v) {
                    (UnOp::Neg, Value::Int(i)) => Value::Int(-i),
                    (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
                    (op, v) => {
                        let sym = if *op == UnOp::Neg { "-" } else { "not" };
                        return Err(type_err(pos, format!("'{sym}' is not defined for a {}", v.type_name())));
                    }
                }
            }
            ExprKind::Binary(op @ (BinOp::And | BinOp::Or), l, r) => {
                let want = *op == BinOp::Or;
                match self.eval(l, st)? {
                    Value::Bool(b) if b == want => Value::Bool(b),
                    Value::Bool(_) => match self.eval(r, st)? {
                        Value::Bool(b) => Value::Bool(b),
                        v => return Err(type_err(r.pos, format!("expected a bool, got a {}", v.type_name()))),
                    },
                    v => return Err(type_err(l.pos, format!("expected a bool, got a {}", v.type_name()))),
                }
            }
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l, st)?;
                let b = self.eval(r, st)?;
                self.binary(*op, a, b, st, pos)?
            }
            ExprKind::Lambda(group) => Value::Function(Arc::new(Function::closure(Closure {
                group: group.clone(),
                index: 0,
                env: st.env.clone(),
                def_context: st.ctx.clone(),
            }))),
            ExprKind::If { .. }
            | ExprKind::For { .. }
            | ExprKind::While { .. }
            | ExprKind::Match { .. }
            | ExprKind::With { .. }
            | ExprKind::Block(_) => self.control(e, st.clone())?.1,
        })
    }

    fn eval_all(&mut self, xs: &[Expr], st: &State) -> Res<Vec<Value>> {
        xs.iter().map(|x| self.eval(x, st)).collect()
    }

    fn bool_of(&mut self, e: &Expr, st: &State) -> Res<bool> {
        match self.eval(e, st)? {
            Value::Bool(b) => Ok(b),
            v => Err(type_err(e.pos, format!("expected a bool, got a {}", v.type_name()))),
        }
    }

    /// Control constructs, which thread the state through their blocks.
    fn control(&mut self, e: &Expr, st: State) -> Res<(State, Value)> {
        let pos = e.pos;
        match &e.kind {
            ExprKind::Block(b) => self.exec_block(b, st),
            ExprKind::If { cond, then, otherwise } => {
                if self.bool_of(cond, &st)? {
                    self.exec_block(then, st)
                } else if let Some(o) = otherwise {
                    self.exec_block(o, st)
                } else {
                    let v = Value::Context(st.ctx.clone());
                    Ok((st, v))
                }
            }
            ExprKind::For { pat, iter, body } => {
                let items = match self.eval(iter, &st)? {
                    Value::List(xs) | Value::Vector(xs) => xs,
                    Value::Set(xs) => xs.into_iter().collect(),
                    Value::Map(m) => m.into_iter().map(|(k, v)| Value::Vector(vec![k, v])).collect(),
                    v => return Err(type_err(iter.pos, format!("cannot iterate over a {}", v.type_name()))),
                };
                let mut st = st;
                for item in items {
                    let env = match_pattern(pat, &item, st.env.clone()).ok_or_else(|| {
                        err(ErrorClass::RuntimeError, pos, format!("{} does not match the loop pattern", self.show(&item)))
                    })?;
                    st = self.exec_block(body, State { ctx: st.ctx, env })?.0;
                }
                let v = Value::Context(st.ctx.clone());
                Ok((st, v))
            }
            ExprKind::While { cond, body } => {
                let mut st = st;
                while self.bool_of(cond, &st)? {
                    st = self.exec_block(body, st)?.0;
                }
                let v = Value::Context(st.ctx.clone());
                Ok((st, v))
            }
            ExprKind::Match { scrutinee, cases } => {
                let v = self.eval(scrutinee, &st)?;
                for (p, b) in cases {
                    if let Some(env) = match_pattern(p, &v, st.env.clone()) {
                        return self.exec_block(b, State { ctx: st.ctx, env });
                    }
                }
                Err(err(ErrorClass::RuntimeError, pos, format!("no case matches {}", self.show(&v))))
            }
            ExprKind::With { context, body } => match self.eval(context, &st)? {
                Value::Context(c) => {
                    self.store.load(&c).map_err(|e| ScriptError::from_context(e, context.pos))?;
                    let env = st.env.layer(c.clone());
                    self.exec_block(body, State { ctx: c, env })
                }
                v => Err(type_err(context.pos, format!("with expects a context, got a {}", v.type_name()))),
            },
            _ => {
                let v = self.eval(e, &st)?;
                Ok((st, v))
            }
        }
    }

    /// `f g`: function call, theorem application, or indexing.
    fn apply(&mut self, f: Value, g: Value, st: &State, pos: Pos) -> Res<Value> {
        match f {
            Value::Function(func) => {
                let func = func.with_arg(g);
                if func.is_saturated() {
                    self.call(&func, st, pos)
                } else {
                    Ok(Value::Function(Arc::new(func)))
                }
            }
            Value::Theorem(th) => {
                let moved = |th: &Theorem| {
                    move_theorem(self.store, th, &st.ctx).map_err(|e| ScriptError::from_context(e, pos))
                };
                let th = moved(&th)?;
                let env = self.store.name_env(&st.ctx).map_err(|e| ScriptError::from_context(e, pos))?;
                let result = match g {
                    Value::Theorem(_) | Value::Context(_) => {
                        let h = moved(&self.theorem_of(g, pos)?)?;
                        apply_theorem(&th, Argument::Theorem(&h), env.types())
                    }
                    Value::Term(..) | Value::Str(_) => {
                        let (t, _) = self.to_term(g, st, pos)?;
                        apply_theorem(&th, Argument::Term(&t), env.types())
                    }
                    other => {
                        return Err(err(
                            ErrorClass::NotApplicable,
                            pos,
                            format!("a theorem cannot be applied to a {}", other.type_name()),
                        ))
                    }
                };
                Ok(Value::Theorem(result.map_err(|e| ScriptError::from_kernel(e, pos))?))
            }
            Value::List(xs) | Value::Vector(xs) => {
                let Value::Int(i) = &g else {
                    return Err(type_err(pos, format!("index must be an int, got a {}", g.type_name())));
                };
                i.to_usize()
                    .and_then(|i| xs.get(i).cloned())
                    .ok_or_else(|| err(ErrorClass::RuntimeError, pos, format!("index {i} out of range")))
            }
            Value::Map(m) => {
                m.get(&g).cloned().ok_or_else(|| err(ErrorClass::RuntimeError, pos, format!("key {} not found", self.show(&g))))
            }
            other => Err(err(
                ErrorClass::NotApplicable,
                pos,
                format!("a value of type {} cannot be applied", other.type_name()),
            )),
        }
    }

    fn call(&mut self, func: &Function, st: &State, pos: Pos) -> Res<Value> {
        if self.depth >= self.max_depth {
            return Err(err(
                ErrorClass::RecursionLimit,
                pos,
                format!("call depth exceeds {} in '{}'", self.max_depth, func.name()),
            ));
        }
        self.depth += 1;
        let r = self.call_inner(func, st, pos);
        self.depth -= 1;
        r
    }

    fn call_inner(&mut self, func: &Function, st: &State, pos: Pos) -> Res<Value> {
        match func.kind() {
            FunctionKind::Builtin(b) => self.builtin(*b, func.applied()[0].clone(), st, pos),
            FunctionKind::Closure(c) => {
                let mut env = c.env.clone();
                for (index, d) in c.group.defs.iter().enumerate() {
                    if d.name.is_empty() {
                        continue;
                    }
                    let f = Function::closure(Closure { index, ..c.clone() });
                    env = env.bind(d.name.clone(), Value::Function(Arc::new(f)));
                }
                let def = &c.group.defs[c.index];
                for (p, a) in def.params.iter().zip(func.applied()) {
                    env = match_pattern(p, a, env).ok_or_else(|| {
                        type_err(pos, format!("argument {} does not match a parameter of '{}'", self.show(a), func.name()))
                    })?;
                }
                self.eval(&def.body, &State { ctx: st.ctx.clone(), env })
            }
        }
    }

    fn builtin(&mut self, b: Builtin, v: Value, st: &State, pos: Pos) -> Res<Value> {
        let wrong = |v: &Value| type_err(pos, format!("{} is not defined for a {}", b.name(), v.type_name()));
        Ok(match b {
            Builtin::TypeOf => match v {
                Value::Term(..) | Value::Str(_) => Value::Type(self.to_term(v, st, pos)?.1),
                v => return Err(wrong(&v)),
            },
            Builtin::Proposition => {
                let th = self.theorem_of(v, pos)?;
                Value::Term(th.proposition().clone(), th.context().clone())
            }
            Builtin::ParseType => match v {
                Value::Str(s) => Value::Type(parse_type(&s).map_err(|e| ScriptError::from_syntax(e).at(pos))?),
                v => return Err(wrong(&v)),
            },
            Builtin::Term => match v {
                Value::Term(..) | Value::Str(_) => Value::Term(self.to_term(v, st, pos)?.0, st.ctx.clone()),
                v => return Err(wrong(&v)),
            },
            Builtin::Length => match &v {
                Value::List(xs) | Value::Vector(xs) => Value::int(xs.len() as i64),
                Value::Set(xs) => Value::int(xs.len() as i64),
                Value::Map(m) => Value::int(m.len() as i64),
                Value::Str(s) => Value::int(s.chars().count() as i64),
                v => return Err(wrong(v)),
            },
            Builtin::Show => Value::Str(self.show(&v)),
            Builtin::ContextOf => match v {
                Value::Theorem(th) => Value::Context(th.context().clone()),
                Value::Term(_, c) => Value::Context(c),
                v => return Err(wrong(&v)),
            },
            Builtin::Print => {
                let line = self.show(&v);
                self.output.push(line);
                v
            }
        })
    }

    fn binary(&self, op: BinOp, a: Value, b: Value, st: &State, pos: Pos) -> Res<Value> {
        use Value::{Int, List, Str, Vector};
        let mismatch = |a: &Value, b: &Value| {
            type_err(pos, format!("'{}' is not defined for {} and {}", op.symbol(), a.type_name(), b.type_name()))
        };
        Ok(match (op, a, b) {
            (BinOp::Eq, a, b) => Value::Bool(self.values_equal(&a, &b, st, pos)?),
            (BinOp::Ne, a, b) => Value::Bool(!self.values_equal(&a, &b, st, pos)?),
            (BinOp::Add, Int(x), Int(y)) => Int(x + y),
            (BinOp::Add, Str(x), Str(y)) => Str(x + &y),
            (BinOp::Add, List(mut x), List(y)) => {
                x.extend(y);
                List(x)
            }
            (BinOp::Add, Vector(mut x), Vector(y)) => {
                x.extend(y);
                Vector(x)
            }
            (BinOp::Sub, Int(x), Int(y)) => Int(x - y),
            (BinOp::Mul, Int(x), Int(y)) => Int(x * y),
            (BinOp::Div | BinOp::Mod, Int(_), Int(y)) if y.is_zero() => {
                return Err(err(ErrorClass::RuntimeError, pos, "division by zero"))
            }
            (BinOp::Div, Int(x), Int(y)) => Int(x / y),
            (BinOp::Mod, Int(x), Int(y)) => Int(x % y),
            (BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge, a, b) => {
                let ord = match (&a, &b) {
                    (Int(x), Int(y)) => x.cmp(y),
                    (Str(x), Str(y)) => x.cmp(y),
                    _ => return Err(mismatch(&a, &b)),
                };
                Value::Bool(match op {
                    BinOp::Lt => ord.is_lt(),
                    BinOp::Le => ord.is_le(),
                    BinOp::Gt => ord.is_gt(),
                    _ => ord.is_ge(),
                })
            }
            (_, a, b) => return Err(mismatch(&a, &b)),
        })
    }

    /// `==`: structural on data, αβη on terms and theorem propositions, by key
    /// on contexts; functions cannot be compared.
    pub(super) fn values_equal(&self, a: &Value, b: &Value, st: &State, pos: Pos) -> Res<bool> {
        use Value::*;
        let ctx_err = |e| ScriptError::from_context(e, pos);
        match (a, b) {
            (Function(_), _) | (_, Function(_)) => {
                Err(type_err(pos, "functions cannot be compared"))
            }
            (Term(t, c), Term(u, d)) => {
                let u = if c == d { u.clone() } else { move_term(self.store, u, d, c).map_err(ctx_err)? };
                let env = self.store.name_env(c).map_err(ctx_err)?;
                alpha_beta_eta_equal(t, &u, env.types()).map_err(|e| ScriptError::from_kernel(e, pos))
            }
            (Theorem(x), Theorem(y)) => {
                let (x, y) = if x.context() == y.context() {
                    (x.clone(), y.clone())
                } else {
                    (
                        move_theorem(self.store, x, &st.ctx).map_err(ctx_err)?,
                        move_theorem(self.store, y, &st.ctx).map_err(ctx_err)?,
                    )
                };
                let env = self.store.name_env(x.context()).map_err(ctx_err)?;
                alpha_beta_eta_equal(x.proposition(), y.proposition(), env.types())
                    .map_err(|e| ScriptError::from_kernel(e, pos))
            }
            (List(xs), List(ys)) | (Vector(xs), Vector(ys)) => {
                if xs.len() != ys.len() {
                    return Ok(false);
                }
                for (x, y) in xs.iter().zip(ys) {
                    if !self.values_equal(x, y, st, pos)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            (Set(_), Set(_)) | (Map(_), Map(_)) => {
                if a.contains_function() || b.contains_function() {
                    return Err(type_err(pos, "functions cannot be compared"));
                }
                Ok(a == b)
            }
            _ => Ok(a == b),
        }
    }
}

/// Binds the variables of `p` on top of `env` if `v` matches.
pub(super) fn match_pattern(p: &Pattern, v: &Value, env: Env) -> Option<Env> {
    match p {
        Pattern::Wildcard => Some(env),
        Pattern::Ident(n) => Some(env.bind(n.clone(), v.clone())),
        Pattern::Literal(l) => {
            let same = match (l, v) {
                (Literal::Int(a), Value::Int(b)) => a == b,
                (Literal::Str(a), Value::Str(b)) => a == b,
                (Literal::Bool(a), Value::Bool(b)) => a == b,
                _ => false,
            };
            same.then_some(env)
        }
        Pattern::Tuple(ps) => match v {
            Value::Vector(xs) | Value::List(xs) if xs.len() == ps.len() => {
                ps.iter().zip(xs).try_fold(env, |env, (p, x)| match_pattern(p, x, env))
            }
            _ => None,
        },
    }
}
