//! One checker per acceptance criterion. Each returns a one-line summary on
//! success and the first discrepancy on failure; all thresholds are pinned
//! here.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use peerhol::chronicle::{ChronicleId, Status};
use peerhol::context::{close_to_parent, move_theorem, ClosureCase, ContextKind, ContextRef, ContextSource};
use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::interpreter::{Interpreter, Lookup, Standalone, State};
use peerhol::kernel::{
    alpha_beta_eta_equal, normalize, shift_constants, substitute, typecheck, ConstId, LogicType, Term, Theorem,
};
use peerhol::store::{Store, StoreConfig, DEFAULT_CHUNK};
use peerhol::syntax::{parse_term, print_term, Mode};
use peerhol::value::Value;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use super::*;

pub type Outcome = Result<String, String>;

pub const IMPL_SCRIPT: &str = include_str!("../../scripts/impl.ps");
pub const EVEN_ODD_SCRIPT: &str = include_str!("../../scripts/even_odd.ps");
pub const DIAMOND_D: &str = include_str!("../../scripts/diamond/d.ps");
pub const DIAMOND_D_EXTENDED: &str = include_str!("../../scripts/diamond/d_extended.ps");
pub const DIAMOND_D_RENAMED: &str = include_str!("../../scripts/diamond/d_renamed.ps");
pub const DIAMOND_B: &str = include_str!("../../scripts/diamond/b.ps");
pub const DIAMOND_C: &str = include_str!("../../scripts/diamond/c.ps");
pub const DIAMOND_A: &str = include_str!("../../scripts/diamond/a.ps");

pub const IMPL_TIME_LIMIT: Duration = Duration::from_secs(1);
pub const CORPUS_SIZE: usize = 10_000;
pub const CORPUS_BUDGET: usize = 14;
pub const TRUTH_TABLE_SIZE: usize = 7;
pub const SHAPE_DEPTH: usize = 4;
pub const RANDOM_GRAPHS: usize = 200;
pub const GRAPH_NODES: usize = 30;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn engine() -> Engine {
    Engine::open(Store::memory(StoreConfig::deterministic(42)), EngineConfig::default()).expect("engine")
}

pub fn run_all(core_dir: &Path) -> Vec<(&'static str, Outcome)> {
    vec![
        ("worked example", worked_example()),
        ("closure table", closure_table()),
        ("normalization", normalization()),
        ("de Bruijn moves", de_bruijn_moves()),
        ("chronicle graph", chronicle_graph()),
        ("parser", parser()),
        ("persistence", persistence(core_dir)),
    ]
}

// ---------------------------------------------------------------------------

pub fn worked_example() -> Outcome {
    let e = engine();
    let started = Instant::now();
    let out = e.execute(&ExecRequest::new("alice", IMPL_SCRIPT)).map_err(|e| e.to_string())?;
    let elapsed = started.elapsed();
    let shown = out.binding("impl").ok_or("impl is not bound")?;
    let prop = shown.strip_prefix("⊢ ").ok_or_else(|| format!("not a theorem: {shown}"))?;
    let env = peerhol::context::NameEnv::new();
    let (got, _) = parse_term(prop, &env).map_err(|e| e.to_string())?;
    let (want, _) = parse_term("∀ x : prop. x ⟶ x", &env).map_err(|e| e.to_string())?;
    ensure!(alpha_beta_eta_equal(&got, &want, &[]) == Ok(true), "impl is '{prop}'");
    ensure!(shown == "⊢ ∀ x : prop. x ⟶ x", "printed as '{shown}'");
    ensure!(elapsed < IMPL_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!("impl = {shown} in {elapsed:?}"))
}

// ---------------------------------------------------------------------------

fn theorem_of(store: &Store, out: &peerhol::interpreter::Outcome, name: &str) -> Result<Theorem, String> {
    match out.state.env.lookup(store, name).map_err(|e| e.to_string())? {
        Lookup::Found(Value::Theorem(th)) => Ok(th),
        other => Err(format!("{name} is {other:?}")),
    }
}

fn run_script(e: &Engine, src: &str) -> Result<peerhol::interpreter::Outcome, String> {
    let hooks = Standalone { store: e.store(), root: e.root() };
    let out = Interpreter::new(e.store(), &hooks, "alice").run(src, State::at(e.root())).map_err(|e| e.to_string());
    e.store().seal();
    out
}

fn parent_of(store: &Store, c: &ContextRef) -> Result<ContextRef, String> {
    store.load(c).map_err(|e| e.to_string())?.parent().cloned().ok_or_else(|| "no parent".to_string())
}

/// Moves `name`'s theorem one context up and compares with `expected`,
/// parsed in the parent.
fn closes_to(e: &Engine, src: &str, name: &str, expected: &str, case: ClosureCase) -> Result<(), String> {
    let store = e.store();
    let out = run_script(e, src)?;
    let th = theorem_of(store, &out, name)?;
    let here = store.load(th.context()).map_err(|e| e.to_string())?;
    let parent = parent_of(store, th.context())?;
    let moved = move_theorem(store, &th, &parent).map_err(|e| e.to_string())?;
    let env = store.name_env(&parent).map_err(|e| e.to_string())?;
    let (want, _) = parse_term(expected, &env).map_err(|e| e.to_string())?;
    ensure!(
        moved.proposition() == &want,
        "{name} moved to {:?}: '{}' instead of '{expected}'",
        here.kind(),
        print_term(moved.proposition(), &env, Mode::Unicode)
    );
    let (_, got_case) = close_to_parent(&here, th.proposition()).map_err(|e| e.to_string())?;
    ensure!(got_case == case, "{name}: {got_case:?} instead of {case:?}");
    Ok(())
}

pub fn closure_table() -> Outcome {
    let e = engine();
    closes_to(&e, "fix \"c : set\"\nval th = root.refl 'c'", "th", "∀ c : set. c = c", ClosureCase::Universal)?;
    closes_to(&e, "fix \"h : prop\"\nassume \"h\"", "fact", "h ⟶ h", ClosureCase::Universal)?;
    closes_to(
        &e,
        "fix \"P : set → prop\"\nassume ex = \"∃ x : set. P x\"\nobtain x by ex",
        "fact",
        "∃ x : set. P x",
        ClosureCase::Existential,
    )?;

    // one context of every kind, each closed over a proposition it can see
    let src = "fix \"y : set\"\n\
               assume ax = \"y = y\"\n\
               define d = 'y'\n\
               obtain z by root.infinity\n\
               have h = \"true\" by root.trueI\n\
               let plain = 5\n\
               let proof = root.trueI\n\
               unbind plain\n\
               val w = @\"ROOT\"";
    let src = src.replace("ROOT", &e.root().to_string());
    let out = run_script(&e, &src)?;
    let expected = [
        (ContextKind::Fix, ClosureCase::Universal),
        (ContextKind::Assume, ClosureCase::Universal),
        (ContextKind::Define, ClosureCase::Existential),
        (ContextKind::Obtain, ClosureCase::Existential),
        (ContextKind::Have, ClosureCase::Existential),
        (ContextKind::Bind, ClosureCase::Universal),
        (ContextKind::Bind, ClosureCase::Existential),
        (ContextKind::Unbind, ClosureCase::Universal),
        (ContextKind::Import, ClosureCase::Universal),
    ];
    ensure!(out.created.len() == expected.len(), "{} contexts created", out.created.len());
    let truth = Term::constant(ConstId::True);
    for (c, (kind, case)) in out.created.iter().zip(expected) {
        let ctx = e.store().load(c).map_err(|e| e.to_string())?;
        ensure!(ctx.kind() == kind, "{c} is {:?}, expected {kind:?}", ctx.kind());
        let (_, got) = close_to_parent(&ctx, &truth).map_err(|e| e.to_string())?;
        ensure!(got == case, "{kind:?} closes by {got:?}");
    }
    // and across every context in the store, exactly one case applies
    let all = e.store().context_refs().map_err(|e| e.to_string())?;
    for c in &all {
        let ctx = e.store().load(c).map_err(|e| e.to_string())?;
        if ctx.parent().is_some() {
            close_to_parent(&ctx, &truth).map_err(|e| format!("{c}: {e}"))?;
        }
    }
    Ok(format!("3 table rows, 8 kinds, {} stored contexts", all.len()))
}

// ---------------------------------------------------------------------------

fn eval_closed(t: &Term) -> Option<bool> {
    if t.is_const(ConstId::True) {
        return Some(true);
    }
    if t.is_const(ConstId::False) {
        return Some(false);
    }
    if let Some(a) = t.as_unary(ConstId::Not) {
        return Some(!eval_closed(a)?);
    }
    if let Some((a, b)) = t.as_binary(ConstId::Implies) {
        return Some(!eval_closed(a)? || eval_closed(b)?);
    }
    if let Some((a, b)) = t.as_binary(ConstId::And) {
        return Some(eval_closed(a)? && eval_closed(b)?);
    }
    None
}

pub fn normalization() -> Outcome {
    let mut g = TermGen::new(0x5eed);
    let stack = constant_env().types().to_vec();
    let f = Term::constant(ConstId::False);
    let t_ = Term::constant(ConstId::True);
    ensure!(normalize(&Term::not(t_.clone())) == Ok(f.clone()), "¬true");
    ensure!(normalize(&Term::not(f.clone())) == Ok(t_.clone()), "¬false");
    let mut props = 0;
    for i in 0..CORPUS_SIZE {
        let (t, ty) = g.any(CORPUS_BUDGET);
        let shown = || print_term(&t, &constant_env(), Mode::Unicode);
        ensure!(typecheck(&t, &stack).as_ref() == Ok(&ty), "#{i} ill-typed: {}", shown());
        let n = normalize(&t).map_err(|e| e.to_string())?;
        ensure!(typecheck(&n, &stack).as_ref() == Ok(&ty), "#{i} changes type: {}", shown());
        ensure!(normalize(&n).as_ref() == Ok(&n), "#{i} not idempotent: {}", shown());
        ensure!(alpha_beta_eta_equal(&t, &t, &stack) == Ok(true), "#{i} not reflexive");
        if ty.is_prop() {
            props += 1;
            let nn = normalize(&Term::not(Term::not(t.clone()))).map_err(|e| e.to_string())?;
            ensure!(nn == n, "#{i} ¬¬x ≠ x: {}", shown());
            let imp = normalize(&Term::implies(t.clone(), f.clone())).map_err(|e| e.to_string())?;
            let neg = normalize(&Term::not(t.clone())).map_err(|e| e.to_string())?;
            ensure!(imp == neg, "#{i} x ⟶ false ≠ ¬x: {}", shown());
            if n == t_ {
                ensure!(neg == f, "#{i} ¬true");
            }
            if n == f {
                ensure!(neg == t_, "#{i} ¬false");
            }
        }
        // β: (λx:σ. b) a = b[a/x]
        let sigma = ty.clone();
        let mut inner = vec![sigma.clone()];
        inner.extend_from_slice(&stack);
        let body = g.term(&LogicType::Prop, 8, &inner);
        let redex = Term::app(Term::lam(sigma.clone(), body.clone()), t.clone());
        let reduced = substitute(&body, &t);
        ensure!(
            normalize(&redex).map_err(|e| e.to_string())? == normalize(&reduced).map_err(|e| e.to_string())?,
            "#{i} β"
        );
        // η: λx:σ. h x = h for h not mentioning x
        let h = g.term(&LogicType::fun(sigma.clone(), LogicType::Prop), 8, &stack);
        let lifted = shift_constants(&h, 1).map_err(|e| e.to_string())?;
        let expanded = Term::lam(sigma, Term::app(lifted, Term::Var(0)));
        ensure!(alpha_beta_eta_equal(&expanded, &h, &stack) == Ok(true), "#{i} η");
    }

    // truth tables
    let formulas = formulas_up_to(TRUTH_TABLE_SIZE);
    let mut classes: BTreeMap<Term, bool> = BTreeMap::new();
    let mut normals = Vec::with_capacity(formulas.len());
    for fm in &formulas {
        let t = fm.to_term();
        let n = normalize(&t).map_err(|e| e.to_string())?;
        ensure!(eval_closed(&n) == Some(fm.eval()), "normalizing {fm:?} changes its truth value");
        if let Some(prev) = classes.insert(n.clone(), fm.eval()) {
            ensure!(prev == fm.eval(), "equal normal forms with different truth values: {fm:?}");
        }
        normals.push(n);
    }
    let mut rng = StdRng::seed_from_u64(7);
    for _ in 0..20_000 {
        let (i, j) = (rng.gen_range(0..formulas.len()), rng.gen_range(0..formulas.len()));
        let eq = alpha_beta_eta_equal(&formulas[i].to_term(), &formulas[j].to_term(), &[]).map_err(|e| e.to_string())?;
        ensure!(eq == (normals[i] == normals[j]), "equality is not normal-form equality");
        if eq {
            ensure!(formulas[i].eval() == formulas[j].eval(), "{:?} = {:?}", formulas[i], formulas[j]);
        }
    }
    // on the ¬-only fragment, equality decides truth
    let neg: Vec<&Formula> = formulas.iter().filter(|f| f.uses_only_negation()).collect();
    for a in &neg {
        for b in &neg {
            let eq = alpha_beta_eta_equal(&a.to_term(), &b.to_term(), &[]).map_err(|e| e.to_string())?;
            ensure!(eq == (a.eval() == b.eval()), "{a:?} vs {b:?}");
        }
    }
    Ok(format!(
        "{CORPUS_SIZE} generated terms ({props} propositions), {} closed formulas of size ≤ {TRUTH_TABLE_SIZE}",
        formulas.len()
    ))
}

// ---------------------------------------------------------------------------

pub fn de_bruijn_moves() -> Outcome {
    let mut g = TermGen::new(0xdb);
    let mut round_trips = 0;
    for i in 0..CORPUS_SIZE {
        let (t, _) = g.any(CORPUS_BUDGET);
        let k: isize = g.rng().gen_range(-3..=5);
        ensure!(shift_constants(&t, 0).as_ref() == Ok(&t), "#{i} shift by 0");
        if let Ok(s) = shift_constants(&t, k) {
            round_trips += 1;
            ensure!(shift_constants(&s, -k).as_ref() == Ok(&t), "#{i} shift by {k} does not round-trip");
        }
    }
    ensure!(round_trips >= CORPUS_SIZE / 2, "only {round_trips} shifts succeeded");

    let all = shapes(SHAPE_DEPTH, 2);
    for t in &all {
        let named = to_named(t);
        ensure!(&from_named(&named, &LogicType::Set) == t, "named round trip of {t:?}");
        for k in [-1isize, 2] {
            let want = named_shift(&named, k).map(|n| from_named(&n, &LogicType::Set));
            let got = shift_constants(t, k).ok();
            ensure!(got == want, "shift {t:?} by {k}: {got:?} vs {want:?}");
        }
    }
    let bodies = shapes(3, 2);
    let args = shapes(2, 2);
    for body in &bodies {
        for arg in &args {
            let named = named_substitute(&to_named(body), &rename_binders(&to_named(arg), "a"));
            let want = from_named(&named, &LogicType::Set);
            ensure!(substitute(body, arg) == want, "substituting {arg:?} into {body:?}");
        }
    }
    Ok(format!(
        "{round_trips}/{CORPUS_SIZE} shift round trips; {} shapes of depth ≤ {SHAPE_DEPTH} and {} substitutions against named forms",
        all.len(),
        bodies.len() * args.len()
    ))
}

// ---------------------------------------------------------------------------

pub fn chronicle_graph() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2024);
    let (mut checked, mut violations) = (0, 0);
    for _ in 0..RANDOM_GRAPHS {
        let graph = random_graph(&mut rng, GRAPH_NODES);
        let closure = brute_closure(&graph);
        let ids: BTreeSet<ChronicleId> = graph.order.iter().map(|k| k.chronicle.clone()).collect();
        for id in &ids {
            checked += 1;
            let want = brute_up_to_date(&graph, &closure, id);
            ensure!(graph.registry.is_up_to_date(id) == want, "is_up_to_date({id}) != {want}");
        }
        for (i, v) in graph.order.iter().enumerate() {
            for (j, w) in graph.order.iter().enumerate() {
                ensure!(graph.registry.depends_on(v, w) == closure[i].contains(&j), "depends_on({v}, {w})");
            }
        }
        for id in &ids {
            for (w, key) in graph.order.iter().enumerate() {
                let allowed = brute_allows(&graph, &closure, id, w);
                if !allowed {
                    violations += 1;
                }
                ensure!(
                    graph.registry.guard_edge(id, key).is_ok() == allowed,
                    "guard for {id} over {key}: expected allowed={allowed}"
                );
            }
        }
    }
    ensure!(violations > 0, "no violating edges were generated");

    // the diamond fixture
    let e = engine();
    for (name, src) in [("d", DIAMOND_D), ("b", DIAMOND_B), ("c", DIAMOND_C), ("a", DIAMOND_A)] {
        e.execute(&ExecRequest::new("ann", src).publish(name)).map_err(|e| format!("{name}: {e}"))?;
    }
    let immutable = |store: &Store| -> BTreeMap<String, Vec<u8>> {
        ["ctx/", "ver/"].iter().flat_map(|p| store.keys(p)).map(|k| (k.clone(), store.get_raw(&k).unwrap())).collect()
    };
    let before = immutable(e.store());
    let out = e.execute(&ExecRequest::new("ann", DIAMOND_D_EXTENDED).publish("d")).map_err(|e| e.to_string())?;
    let report = out.repair.ok_or("no repair report")?;
    let order: Vec<ChronicleId> = report.regenerated.iter().map(|k| k.chronicle.clone()).collect();
    let reg = e.registry();
    for (i, id) in order.iter().enumerate() {
        for d in &reg.newest(id).unwrap().deps {
            if let Some(j) = order.iter().position(|x| x == &d.chronicle) {
                ensure!(j < i, "{id} regenerated before its dependency {}", d.chronicle);
            }
        }
    }
    let names: Vec<&str> = order.iter().map(|c| c.name.as_str()).collect();
    ensure!(names.len() == 3 && names.last() == Some(&"a"), "regenerated {names:?}");
    let after = immutable(e.store());
    for (k, v) in &before {
        ensure!(after.get(k) == Some(v), "{k} changed during repair");
    }
    for n in ["a", "b", "c", "d"] {
        ensure!(e.status(&ChronicleId::new("ann", n)) == Some(Status::UpToDate), "{n} not up to date");
    }
    Ok(format!(
        "{RANDOM_GRAPHS} graphs, {checked} up-to-date checks, {violations} violating edges rejected; diamond repaired as {names:?}, {} records unchanged",
        before.len()
    ))
}

// ---------------------------------------------------------------------------

/// Constant-table rows: (unicode, ascii). Parsed in an environment with
/// x, y, z, X : set; a, b : prop; P : set → prop; f : set → set.
pub const CONSTANT_ROWS: &[(&str, &str)] = &[
    ("x = y", "x = y"),
    ("∀ u. P u", "_all u. P u"),
    ("∃ u. P u", "_exists u. P u"),
    ("ε u. P u", "_choose u. P u"),
    ("a ⟶ b", "a --> b"),
    ("a ∧ b", "a _and b"),
    ("a ∨ b", "a _or b"),
    ("¬a", "_not a"),
    ("true", "true"),
    ("false", "false"),
    ("x ∈ X", "x _elem X"),
    ("∅", "_emptyset"),
    ("𝒫 X", "_powerset X"),
    ("⋃ X", "_Union X"),
    ("⋂ X", "_Intersect X"),
    ("x ∪ y", "x _union y"),
    ("x ∩ y", "x _intersect y"),
    ("x ⊆ y", "x _subset y"),
    ("{x}", "{x}"),
    ("_Separation X P", "_Separation X P"),
    ("_Replacement X f", "_Replacement X f"),
];

/// Sugar-table rows: (sugar, explicit form, printed form).
pub const SUGAR_ROWS: &[(&str, &str, &str)] = &[
    ("∀ u : set. P u", "(∀ : (set → prop) → prop) (λ u : set. P u)", "∀ u. P u"),
    ("a ∧ b", "(∧) a b", "a ∧ b"),
    ("{x}", "_Singleton x", "{x}"),
    ("{x, y, X}", "{x} ∪ ({y} ∪ {X})", "{x, y, X}"),
    ("{u ∈ X | P u}", "_Separation X (λ u. P u)", "{u ∈ X | P u}"),
    ("{f u | u ∈ X}", "_Replacement X (λ u. f u)", "{f u | u ∈ X}"),
];

fn table_env() -> peerhol::context::NameEnv {
    use LogicType::{Prop, Set};
    peerhol::context::NameEnv::from_newest_first([
        ("x".to_string(), Set),
        ("y".to_string(), Set),
        ("z".to_string(), Set),
        ("X".to_string(), Set),
        ("a".to_string(), Prop),
        ("b".to_string(), Prop),
        ("P".to_string(), LogicType::fun(Set, Prop)),
        ("f".to_string(), LogicType::fun(Set, Set)),
    ])
}

fn constant_head(t: &Term) -> Option<ConstId> {
    match t.strip_app().0 {
        Term::Const(id, _) => Some(*id),
        _ => None,
    }
}

pub fn parser() -> Outcome {
    let env = table_env();
    let parse = |s: &str| parse_term(s, &env).map(|(t, _)| t).map_err(|e| format!("'{s}': {e}"));
    let mut heads = BTreeSet::new();
    for (uni, ascii) in CONSTANT_ROWS {
        let t = parse(uni)?;
        ensure!(parse(ascii)? == t, "'{ascii}' and '{uni}' differ");
        ensure!(print_term(&t, &env, Mode::Unicode) == *uni, "'{uni}' prints as '{}'", print_term(&t, &env, Mode::Unicode));
        ensure!(print_term(&t, &env, Mode::Ascii) == *ascii, "'{uni}' prints as '{}'", print_term(&t, &env, Mode::Ascii));
        if let Some(h) = constant_head(&t) {
            heads.insert(h);
        }
    }
    ensure!(heads.len() == ConstId::ALL.len(), "constant rows cover only {} constants", heads.len());
    for (sugar, explicit, printed) in SUGAR_ROWS {
        let t = parse(sugar)?;
        ensure!(parse(explicit)? == t, "'{sugar}' is not '{explicit}'");
        ensure!(print_term(&t, &env, Mode::Unicode) == *printed, "'{sugar}' prints as '{}'", print_term(&t, &env, Mode::Unicode));
    }

    let cenv = constant_env();
    let mut g = TermGen::new(0x9a75e);
    for i in 0..CORPUS_SIZE {
        let (t, ty) = g.any(CORPUS_BUDGET);
        for mode in [Mode::Unicode, Mode::Ascii] {
            let s = print_term(&t, &cenv, mode);
            let (back, bty) = parse_term(&s, &cenv).map_err(|e| format!("#{i} '{s}': {e}"))?;
            ensure!(back == t && bty == ty, "#{i} '{s}' parses differently");
            let again = print_term(&back, &cenv, mode);
            ensure!(parse_term(&again, &cenv).map(|p| p.0).as_ref() == Ok(&back), "#{i} not a fixpoint");
        }
    }
    Ok(format!(
        "{} constant rows, {} sugar rows, {CORPUS_SIZE} generated terms in both modes",
        CONSTANT_ROWS.len(),
        SUGAR_ROWS.len()
    ))
}

// ---------------------------------------------------------------------------

pub const GOLDEN_STORE: &str = "tests/golden/store.bin";

/// Builds the reference store: bootstrap, the worked examples and the
/// diamond, published by one user in a fixed order.
pub fn build_reference_store(path: &Path) -> Result<(), String> {
    let store = Store::open_file(path, StoreConfig::deterministic(1)).map_err(|e| e.to_string())?;
    let e = Engine::open(store, EngineConfig::default()).map_err(|e| e.to_string())?;
    let scripts = [
        ("impl", IMPL_SCRIPT),
        ("d", DIAMOND_D),
        ("b", DIAMOND_B),
        ("c", DIAMOND_C),
        ("a", DIAMOND_A),
        ("d", DIAMOND_D_EXTENDED),
    ];
    for (name, src) in scripts {
        e.execute(&ExecRequest::new("ann", src).publish(name)).map_err(|e| format!("{name}: {e}"))?;
    }
    e.execute(&ExecRequest::new("ann", EVEN_ODD_SCRIPT)).map_err(|e| e.to_string())?;
    Ok(())
}

pub fn persistence(core_dir: &Path) -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("store.bin");
    build_reference_store(&path)?;
    let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;

    let golden_path = core_dir.join(GOLDEN_STORE);
    if std::env::var_os("PEERHOL_UPDATE_GOLDEN").is_some() || !golden_path.exists() {
        std::fs::create_dir_all(golden_path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&golden_path, &bytes).map_err(|e| e.to_string())?;
    }
    let golden = std::fs::read(&golden_path).map_err(|e| format!("{}: {e}", golden_path.display()))?;
    ensure!(bytes == golden, "store file differs from {} ({} vs {} bytes)", GOLDEN_STORE, bytes.len(), golden.len());

    // restart: same bytes, same state, reads write nothing
    let digest = Store::open_file(&path, StoreConfig::deterministic(1)).map_err(|e| e.to_string())?.digest();
    let e = Engine::open(Store::open_file(&path, StoreConfig::deterministic(1)).map_err(|e| e.to_string())?, EngineConfig::default())
        .map_err(|e| e.to_string())?;
    ensure!(e.store().digest() == digest, "opening the engine changed the store");
    let out = e
        .execute(&ExecRequest::new("bob", "val t = (@ann:impl).impl\nval s = (@ann:a).a"))
        .map_err(|e| e.to_string())?;
    ensure!(out.binding("t") == Some("⊢ ∀ x : prop. x ⟶ x"), "impl after restart: {:?}", out.binding("t"));
    ensure!(out.binding("s") == Some("⊢ ∅ = ∅"), "a after restart: {:?}", out.binding("s"));
    let reg = e.registry();
    ensure!(reg.get(&ChronicleId::new("ann", "d")).map(|c| c.versions.len()) == Some(2), "d lost versions");
    ensure!(reg.chronicles().all(|c| reg.is_up_to_date(&c.id)), "stale chronicles after restart");
    // integrity: every parent resolves
    let refs = e.store().context_refs().map_err(|e| e.to_string())?;
    for r in &refs {
        let c = e.store().load(r).map_err(|e| e.to_string())?;
        if let Some(p) = c.parent() {
            e.store().load(p).map_err(|e| format!("parent of {r}: {e}"))?;
        }
    }

    // chain packing
    let store = Store::memory(StoreConfig::deterministic(5));
    let e = Engine::open(store, EngineConfig::default()).map_err(|e| e.to_string())?;
    let fixes: usize = 200;
    let src: String = (0..fixes).map(|i| format!("fix \"x{i} : set\"\n")).collect();
    let out = e.execute(&ExecRequest::new("ann", src)).map_err(|e| e.to_string())?;
    let entities: BTreeSet<&str> = out.created.iter().map(|c| c.entity()).collect();
    let expected = fixes.div_ceil(DEFAULT_CHUNK);
    ensure!(entities.len() == expected, "{fixes} linear fixes used {} entities, expected {expected}", entities.len());
    for id in e.store().entity_ids() {
        let info = e.store().entity_info(&id).map_err(|e| e.to_string())?.ok_or("missing entity")?;
        ensure!(info.chain_len <= DEFAULT_CHUNK, "entity {id} holds {} contexts", info.chain_len);
    }
    Ok(format!(
        "{} byte golden store, {} contexts after restart; {fixes} linear contexts in {} entities",
        bytes.len(),
        refs.len(),
        entities.len()
    ))
}
