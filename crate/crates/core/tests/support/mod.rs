//! Generators and independent oracles shared by the integration tests.
#![allow(dead_code)]
pub mod criteria;

use std::collections::{BTreeMap, BTreeSet};

use peerhol::chronicle::{ChronicleId, ChronicleVersion, Registry, VersionKey};
use peerhol::context::{ContextRef, NameEnv};
use peerhol::kernel::{ConstId, LogicType, Term};
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

pub fn set() -> LogicType {
    LogicType::Set
}

pub fn prop() -> LogicType {
    LogicType::Prop
}

pub fn fun(a: LogicType, b: LogicType) -> LogicType {
    LogicType::fun(a, b)
}

/// Constants every generated term may mention, newest first.
pub fn constant_env() -> NameEnv {
    NameEnv::from_newest_first([
        ("a".to_string(), set()),
        ("p".to_string(), prop()),
        ("P".to_string(), fun(set(), prop())),
        ("f".to_string(), fun(set(), set())),
        ("q".to_string(), prop()),
        ("b".to_string(), set()),
        // shadowed by the newer `a`
        ("a".to_string(), set()),
    ])
}

/// Random well-typed terms over the full constant signature, with
/// β-redexes, binders and context constants.
pub struct TermGen {
    rng: StdRng,
}

impl TermGen {
    pub fn new(seed: u64) -> TermGen {
        TermGen { rng: StdRng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut StdRng {
        &mut self.rng
    }

    fn small_type(&mut self) -> LogicType {
        match self.rng.gen_range(0..10) {
            0..=3 => set(),
            4..=7 => prop(),
            8 => fun(set(), prop()),
            _ => fun(set(), set()),
        }
    }

    /// A term of type `ty` with at most `budget` nodes (roughly). `scope`
    /// lists binder types innermost first, then the constant stack.
    pub fn term(&mut self, ty: &LogicType, budget: usize, scope: &[LogicType]) -> Term {
        if budget <= 1 || self.rng.gen_bool(0.2) {
            return self.leaf(ty, scope);
        }
        let b = budget - 1;
        if let Some((dom, cod)) = ty.as_fun() {
            if self.rng.gen_bool(0.6) {
                return self.lambda(dom, cod, b, scope);
            }
        }
        match self.rng.gen_range(0..6) {
            0 => {
                // β-redex
                let sigma = self.small_type();
                let mut inner = vec![sigma.clone()];
                inner.extend_from_slice(scope);
                let body = self.term(ty, b / 2, &inner);
                let arg = self.term(&sigma, b / 2, scope);
                Term::app(Term::lam(sigma, body), arg)
            }
            1 | 2 => {
                let sigma = self.small_type();
                let f = self.term(&fun(sigma.clone(), ty.clone()), b / 2, scope);
                let a = self.term(&sigma, b / 2, scope);
                Term::app(f, a)
            }
            _ if ty.is_prop() => self.proposition(b, scope),
            _ if ty.is_set() => self.set_term(b, scope),
            _ => self.leaf(ty, scope),
        }
    }

    fn lambda(&mut self, dom: &LogicType, cod: &LogicType, b: usize, scope: &[LogicType]) -> Term {
        let mut inner = vec![dom.clone()];
        inner.extend_from_slice(scope);
        Term::lam(dom.clone(), self.term(cod, b, &inner))
    }

    fn proposition(&mut self, b: usize, scope: &[LogicType]) -> Term {
        match self.rng.gen_range(0..8) {
            0 => Term::not(self.term(&prop(), b, scope)),
            1 => Term::implies(self.term(&prop(), b / 2, scope), Term::constant(ConstId::False)),
            2 => {
                let id = *[ConstId::And, ConstId::Or, ConstId::Implies].choose(&mut self.rng).unwrap();
                Term::binary(id, self.term(&prop(), b / 2, scope), self.term(&prop(), b / 2, scope))
            }
            3 | 4 => {
                let sigma = self.small_type();
                let q = if self.rng.gen_bool(0.5) { ConstId::Forall } else { ConstId::Exists };
                let body = self.lambda(&sigma, &prop(), b, scope);
                Term::app(Term::poly(q, sigma), body)
            }
            5 => {
                let sigma = self.small_type();
                Term::eq(sigma.clone(), self.term(&sigma, b / 2, scope), self.term(&sigma, b / 2, scope))
            }
            _ => {
                let id = if self.rng.gen_bool(0.5) { ConstId::Elem } else { ConstId::Subset };
                Term::binary(id, self.term(&set(), b / 2, scope), self.term(&set(), b / 2, scope))
            }
        }
    }

    fn set_term(&mut self, b: usize, scope: &[LogicType]) -> Term {
        match self.rng.gen_range(0..6) {
            0 => {
                let id = *[ConstId::PowerSet, ConstId::BigUnion, ConstId::BigIntersect, ConstId::Singleton]
                    .choose(&mut self.rng)
                    .unwrap();
                Term::app(Term::constant(id), self.term(&set(), b, scope))
            }
            1 => {
                let id = if self.rng.gen_bool(0.5) { ConstId::Union } else { ConstId::Intersect };
                Term::binary(id, self.term(&set(), b / 2, scope), self.term(&set(), b / 2, scope))
            }
            2 => Term::app(Term::poly(ConstId::Choice, set()), self.lambda(&set(), &prop(), b, scope)),
            3 => Term::apps(
                Term::constant(ConstId::Separation),
                [self.term(&set(), b / 2, scope), self.lambda(&set(), &prop(), b / 2, scope)],
            ),
            4 => Term::apps(
                Term::constant(ConstId::Replacement),
                [self.term(&set(), b / 2, scope), self.lambda(&set(), &set(), b / 2, scope)],
            ),
            _ => self.leaf(&set(), scope),
        }
    }

    fn leaf(&mut self, ty: &LogicType, scope: &[LogicType]) -> Term {
        let mut options: Vec<Term> =
            scope.iter().enumerate().filter(|(_, t)| *t == ty).map(|(i, _)| Term::Var(i)).collect();
        for id in ConstId::ALL {
            if id.fixed_type().as_ref() == Some(ty) {
                options.push(Term::constant(id));
            }
        }
        if let Some(t) = options.choose(&mut self.rng) {
            return t.clone();
        }
        match ty.as_fun() {
            Some((dom, cod)) => {
                let (dom, cod) = (dom.clone(), cod.clone());
                self.lambda(&dom, &cod, 1, scope)
            }
            None => unreachable!("every base type has a constant"),
        }
    }

    /// A random type and a term of it in [`constant_env`].
    pub fn any(&mut self, budget: usize) -> (Term, LogicType) {
        let ty = self.small_type();
        let stack = constant_env().types().to_vec();
        (self.term(&ty, budget, &stack), ty)
    }
}

// ---------------------------------------------------------------------------
// propositional formulas and their truth table

#[derive(Clone, Debug)]
pub enum Formula {
    T,
    F,
    Not(Box<Formula>),
    Imp(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn eval(&self) -> bool {
        match self {
            Formula::T => true,
            Formula::F => false,
            Formula::Not(a) => !a.eval(),
            Formula::Imp(a, b) => !a.eval() || b.eval(),
            Formula::And(a, b) => a.eval() && b.eval(),
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            Formula::T => Term::constant(ConstId::True),
            Formula::F => Term::constant(ConstId::False),
            Formula::Not(a) => Term::not(a.to_term()),
            Formula::Imp(a, b) => Term::implies(a.to_term(), b.to_term()),
            Formula::And(a, b) => Term::binary(ConstId::And, a.to_term(), b.to_term()),
        }
    }

    pub fn uses_only_negation(&self) -> bool {
        match self {
            Formula::T | Formula::F => true,
            Formula::Not(a) => a.uses_only_negation(),
            _ => false,
        }
    }
}

/// Every formula with exactly `n` symbols.
pub fn formulas_of_size(n: usize, memo: &mut BTreeMap<usize, Vec<Formula>>) -> Vec<Formula> {
    if let Some(v) = memo.get(&n) {
        return v.clone();
    }
    let mut out = Vec::new();
    if n == 1 {
        out.push(Formula::T);
        out.push(Formula::F);
    } else if n > 1 {
        for a in formulas_of_size(n - 1, memo) {
            out.push(Formula::Not(Box::new(a)));
        }
        for i in 1..n - 1 {
            let left = formulas_of_size(i, memo);
            let right = formulas_of_size(n - 1 - i, memo);
            for a in &left {
                for b in &right {
                    out.push(Formula::Imp(Box::new(a.clone()), Box::new(b.clone())));
                    out.push(Formula::And(Box::new(a.clone()), Box::new(b.clone())));
                }
            }
        }
    }
    memo.insert(n, out.clone());
    out
}

pub fn formulas_up_to(n: usize) -> Vec<Formula> {
    let mut memo = BTreeMap::new();
    (1..=n).flat_map(|k| formulas_of_size(k, &mut memo)).collect()
}

// ---------------------------------------------------------------------------
// named terms: an independent model of binding

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Named {
    /// `c{i}`: the i-th newest context constant.
    Constant(usize),
    Bound(String),
    Const(ConstId),
    Lam(String, Box<Named>),
    App(Box<Named>, Box<Named>),
}

/// De Bruijn → named, giving every binder a fresh name.
pub fn to_named(t: &Term) -> Named {
    fn go(t: &Term, binders: &mut Vec<String>, fresh: &mut usize) -> Named {
        match t {
            Term::Const(id, _) => Named::Const(*id),
            Term::Var(i) if *i < binders.len() => Named::Bound(binders[binders.len() - 1 - i].clone()),
            Term::Var(i) => Named::Constant(i - binders.len()),
            Term::Lam(_, b) => {
                *fresh += 1;
                let name = format!("x{fresh}");
                binders.push(name.clone());
                let body = go(b, binders, fresh);
                binders.pop();
                Named::Lam(name, Box::new(body))
            }
            Term::App(f, a) => Named::App(Box::new(go(f, binders, fresh)), Box::new(go(a, binders, fresh))),
        }
    }
    go(t, &mut Vec::new(), &mut 0)
}

/// Named → de Bruijn. Binder types are all `ty`: shape-only oracles do not
/// need more.
pub fn from_named(n: &Named, ty: &LogicType) -> Term {
    fn go(n: &Named, binders: &mut Vec<String>, ty: &LogicType) -> Term {
        match n {
            Named::Const(id) => Term::Const(*id, None),
            Named::Constant(i) => Term::Var(binders.len() + i),
            Named::Bound(x) => {
                let pos = binders.iter().rposition(|b| b == x).expect("bound name in scope");
                Term::Var(binders.len() - 1 - pos)
            }
            Named::Lam(x, b) => {
                binders.push(x.clone());
                let body = go(b, binders, ty);
                binders.pop();
                Term::lam(ty.clone(), body)
            }
            Named::App(f, a) => Term::app(go(f, binders, ty), go(a, binders, ty)),
        }
    }
    go(n, &mut Vec::new(), ty)
}

/// Reinterprets a named term in a context with `k` more constants.
pub fn named_shift(n: &Named, k: isize) -> Option<Named> {
    Some(match n {
        Named::Constant(i) => {
            let j = *i as isize + k;
            if j < 0 {
                return None;
            }
            Named::Constant(j as usize)
        }
        Named::Lam(x, b) => Named::Lam(x.clone(), Box::new(named_shift(b, k)?)),
        Named::App(f, a) => Named::App(Box::new(named_shift(f, k)?), Box::new(named_shift(a, k)?)),
        other => other.clone(),
    })
}

/// Replaces constant 0 by `arg`; the other constants move down by one.
/// Binder names are globally fresh, so no capture can happen.
pub fn named_substitute(body: &Named, arg: &Named) -> Named {
    match body {
        Named::Constant(0) => arg.clone(),
        Named::Constant(i) => Named::Constant(i - 1),
        Named::Lam(x, b) => Named::Lam(x.clone(), Box::new(named_substitute(b, arg))),
        Named::App(f, a) => Named::App(Box::new(named_substitute(f, arg)), Box::new(named_substitute(a, arg))),
        other => other.clone(),
    }
}

/// Renames binders so that `arg` and `body` share none.
pub fn rename_binders(n: &Named, prefix: &str) -> Named {
    match n {
        Named::Bound(x) => Named::Bound(format!("{prefix}{x}")),
        Named::Lam(x, b) => Named::Lam(format!("{prefix}{x}"), Box::new(rename_binders(b, prefix))),
        Named::App(f, a) => Named::App(Box::new(rename_binders(f, prefix)), Box::new(rename_binders(a, prefix))),
        other => other.clone(),
    }
}

/// Every untyped term shape of depth ≤ `depth` over free indices
/// `0..vars`, one constant, λ and application.
pub fn shapes(depth: usize, vars: usize) -> Vec<Term> {
    let mut levels: Vec<Vec<Term>> = Vec::new();
    for d in 1..=depth {
        let mut out: Vec<Term> = (0..vars).map(Term::Var).collect();
        out.push(Term::constant(ConstId::True));
        if let Some(prev) = levels.last() {
            for b in prev {
                out.push(Term::lam(set(), b.clone()));
            }
            for f in prev {
                for a in prev {
                    out.push(Term::app(f.clone(), a.clone()));
                }
            }
        }
        let _ = d;
        levels.push(out);
    }
    levels.pop().unwrap_or_default()
}

// ---------------------------------------------------------------------------
// random chronicle version graphs

pub struct RandomGraph {
    pub registry: Registry,
    /// Versions in creation order.
    pub order: Vec<VersionKey>,
}

fn version_record(v: u64, tag: usize, deps: BTreeSet<VersionKey>) -> ChronicleVersion {
    let c = ContextRef::new(format!("v{tag}"), 0);
    ChronicleVersion {
        version: v,
        owned: [c.clone()].into(),
        final_context: c,
        script: String::new(),
        assignment: BTreeMap::new(),
        deps,
    }
}

/// Brute-force dependency closure: `closure[i]` = every version reachable
/// from `order[i]` through direct dependencies.
pub fn brute_closure(graph: &RandomGraph) -> Vec<BTreeSet<usize>> {
    let n = graph.order.len();
    let index: BTreeMap<&VersionKey, usize> = graph.order.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let mut reach = vec![vec![false; n]; n];
    for (i, k) in graph.order.iter().enumerate() {
        for d in &graph.registry.version(k).unwrap().deps {
            reach[i][index[d]] = true;
        }
    }
    for m in 0..n {
        for i in 0..n {
            if reach[i][m] {
                for j in 0..n {
                    if reach[m][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach.into_iter().map(|row| row.into_iter().enumerate().filter(|(_, b)| *b).map(|(j, _)| j).collect()).collect()
}

/// Whether a new version of `chronicle` may depend on `order[w]`,
/// decided by brute force.
pub fn brute_allows(graph: &RandomGraph, closure: &[BTreeSet<usize>], chronicle: &ChronicleId, w: usize) -> bool {
    graph.order[w].chronicle != *chronicle && closure[w].iter().all(|&j| graph.order[j].chronicle != *chronicle)
}

/// Brute-force up-to-date check.
pub fn brute_up_to_date(graph: &RandomGraph, closure: &[BTreeSet<usize>], id: &ChronicleId) -> bool {
    let newest_of = |c: &ChronicleId| graph.order.iter().filter(|k| &k.chronicle == c).map(|k| k.version).max();
    let Some(newest) = newest_of(id) else { return false };
    let i = graph.order.iter().position(|k| &k.chronicle == id && k.version == newest).unwrap();
    closure[i].iter().all(|&j| newest_of(&graph.order[j].chronicle) == Some(graph.order[j].version))
}

/// A random version DAG with at most `max_nodes` versions, built only from
/// edges the brute-force guard allows.
pub fn random_graph(rng: &mut StdRng, max_nodes: usize) -> RandomGraph {
    let chronicles: Vec<ChronicleId> =
        (0..rng.gen_range(1..=6)).map(|i| ChronicleId::new(format!("u{}", i % 3), format!("c{i}"))).collect();
    let nodes = rng.gen_range(1..=max_nodes);
    let mut graph = RandomGraph { registry: Registry::new(), order: Vec::new() };
    let mut next: BTreeMap<ChronicleId, u64> = BTreeMap::new();
    for tag in 0..nodes {
        let id = chronicles.choose(rng).unwrap().clone();
        let closure = brute_closure(&graph);
        let mut deps = BTreeSet::new();
        for w in 0..graph.order.len() {
            if rng.gen_bool(0.25) && brute_allows(&graph, &closure, &id, w) {
                deps.insert(graph.order[w].clone());
            }
        }
        let v = next.entry(id.clone()).or_insert(0);
        *v += 1;
        graph.registry.insert(id.clone(), version_record(*v, tag, deps));
        graph.order.push(VersionKey::new(id, *v));
    }
    graph
}
