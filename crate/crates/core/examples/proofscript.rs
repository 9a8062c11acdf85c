//! Running ProofScript: a batch script, its bindings and printed output,
//! and what a rejected proof step looks like.
//!
//!     cargo run -p peerhol --example proofscript [FILE]

use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::store::{Store, StoreConfig};

const IMPL: &str = include_str!("../scripts/impl.ps");
const EVEN_ODD: &str = include_str!("../scripts/even_odd.ps");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::open(Store::memory(StoreConfig::default()), EngineConfig::default())?;

    let scripts: Vec<(String, String)> = match std::env::args().nth(1) {
        Some(path) => vec![(path.clone(), std::fs::read_to_string(&path)?)],
        None => vec![("impl.ps".into(), IMPL.into()), ("even_odd.ps".into(), EVEN_ODD.into())],
    };
    for (name, src) in &scripts {
        println!("== {name}");
        match engine.execute(&ExecRequest::new("demo", src.as_str())) {
            Ok(report) => {
                for line in &report.output {
                    println!("  | {line}");
                }
                for b in &report.bindings {
                    println!("  {} : {} = {}", b.name, b.type_name, b.shown);
                }
            }
            Err(e) => println!("  {name}:{}:{}: {:?}: {}", e.pos.line, e.pos.column, e.class, e.message),
        }
    }

    // the guard of `have` must match what the proof delivers
    println!("== rejected");
    let err = engine
        .execute(&ExecRequest::new("demo", "fix \"x : set\"\nhave bad = \"x = ∅\" by root.refl \"x\""))
        .unwrap_err();
    println!("  {}:{}: {:?}: {}", err.pos.line, err.pos.column, err.class, err.message);
    Ok(())
}
