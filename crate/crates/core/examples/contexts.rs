//! Contexts and closure: a theorem proved deep inside a chain of contexts is
//! moved out one context at a time. Each step discharges the context it
//! leaves, universally (fix, assume) or existentially (obtain, define).
//!
//!     cargo run -p peerhol --example contexts

use peerhol::context::{close_to_parent, move_theorem, ContextSource};
use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::interpreter::Lookup;
use peerhol::store::{Store, StoreConfig};
use peerhol::syntax::{print_term, Mode};
use peerhol::value::Value;

const SCRIPT: &str = r#"
fix "P : set → prop"
assume ex = "∃ x : set. P x"
obtain w by ex
val pw = fact
fix "y : set"
assume "y = w"
have th = "P w" by pw
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let engine = Engine::open(Store::memory(StoreConfig::default()), EngineConfig::default())?;
    let store = engine.store();
    let (state, report) = match engine.step(&ExecRequest::new("demo", SCRIPT), None) {
        Ok(r) => r,
        Err(e) => {
            // show the error in the usual format and stop
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("created {} contexts", report.created.len());

    let Lookup::Found(Value::Theorem(mut th)) = state.env.lookup(store, "th")? else {
        return Err("no theorem named th".into());
    };
    loop {
        let here = store.load(th.context())?;
        let env = store.name_env(th.context())?;
        println!("{:>7} {:<4} ⊢ {}", here.kind().name(), here.depth(), print_term(th.proposition(), &env, Mode::Unicode));
        if th.context() == &engine.root() {
            break;
        }
        let Some(parent) = here.parent().cloned() else { break };
        let (_, case) = close_to_parent(&here, th.proposition())?;
        println!("        └ closed {case:?}");
        th = move_theorem(store, &th, &parent)?;
    }
    Ok(())
}
