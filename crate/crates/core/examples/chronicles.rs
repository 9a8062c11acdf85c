//! Chronicles: published scripts that import each other. Publishing a new
//! version of a dependency leaves dependants out of date until they are
//! regenerated against it.
//!
//!     cargo run -p peerhol --example chronicles

use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::store::{Store, StoreConfig};

const D: &str = include_str!("../scripts/diamond/d.ps");
const B: &str = include_str!("../scripts/diamond/b.ps");
const C: &str = include_str!("../scripts/diamond/c.ps");
const A: &str = include_str!("../scripts/diamond/a.ps");
const D_EXTENDED: &str = include_str!("../scripts/diamond/d_extended.ps");

fn show(engine: &Engine) {
    for c in engine.registry().chronicles() {
        let status = engine.status(&c.id).map(|s| format!("{s:?}")).unwrap_or_default();
        let deps: Vec<String> = c.newest().deps.iter().map(|d| d.to_string()).collect();
        println!("  {:<8} v{}  deps [{}]  {status}", c.id.to_string(), c.newest().version, deps.join(", "));
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // repair by hand below, so that the intermediate state is visible
    let config = EngineConfig { auto_repair: false, ..EngineConfig::default() };
    let engine = Engine::open(Store::memory(StoreConfig::default()), config)?;

    // d at the bottom, b and c on top of it, a on top of both
    for (name, src) in [("d", D), ("b", B), ("c", C), ("a", A)] {
        engine.execute(&ExecRequest::new("ann", src).publish(name))?;
    }
    println!("published the diamond:");
    show(&engine);

    engine.execute(&ExecRequest::new("ann", D_EXTENDED).publish("d"))?;
    println!("after a new version of d:");
    show(&engine);

    let report = engine.repair_sweep();
    println!("repair: {} regenerated, {} failed", report.regenerated.len(), report.failed.len());
    show(&engine);

    // a chronicle may not import an earlier version of itself
    let err = engine.execute(&ExecRequest::new("ann", "with @d do have again = \"true\" by root.trueI end").publish("d"));
    println!("d importing itself: {:?}", err.map(|_| ()).map_err(|e| e.class));
    Ok(())
}
