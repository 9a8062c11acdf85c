//! The bundled scripts, run end to end through the engine.
use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::interpreter::ErrorClass;
use peerhol::store::{Store, StoreConfig};

fn engine() -> Engine {
    Engine::open(Store::memory(StoreConfig::deterministic(1)), EngineConfig::default()).unwrap()
}

#[test]
fn impl_script() {
    let out = engine().execute(&ExecRequest::new("ann", include_str!("../scripts/impl.ps"))).unwrap();
    assert_eq!(out.binding("impl"), Some("⊢ ∀ x : prop. x ⟶ x"));
    let ascii = engine().execute(&ExecRequest::new("ann", include_str!("../scripts/impl.ps")).ascii()).unwrap();
    assert_eq!(ascii.binding("impl"), Some("|- _all x : prop. x --> x"));
}

#[test]
fn even_odd_script() {
    let out = engine().execute(&ExecRequest::new("ann", include_str!("../scripts/even_odd.ps"))).unwrap();
    assert_eq!(out.binding("sevenIsOdd"), Some("true"));
}

#[test]
fn bootstrap_axioms_are_reachable() {
    let e = engine();
    let src = "val a = root.refl\nval b = root.excludedMiddle\nval c = root.extensionality";
    let out = e.execute(&ExecRequest::new("ann", src)).unwrap();
    assert_eq!(out.binding("a"), Some("⊢ ∀ x. x = x"));
    assert!(out.binding("b").unwrap().starts_with("⊢ ∀"));
}

#[test]
fn a_failing_have_names_its_guard() {
    let err = engine()
        .execute(&ExecRequest::new("ann", "have bad = \"false\" by root.trueI"))
        .unwrap_err();
    assert_eq!(err.class, ErrorClass::GuardMismatch);
}
