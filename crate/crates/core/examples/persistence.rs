//! The store on disk: everything a run creates is appended to one file.
//! Reopening the file brings back contexts, chronicles and their status.
//!
//!     cargo run -p peerhol --example persistence [STORE]

use std::path::PathBuf;

use peerhol::engine::{Engine, EngineConfig, ExecRequest};
use peerhol::store::{Store, StoreConfig};

const IMPL: &str = include_str!("../scripts/impl.ps");

fn open(path: &PathBuf) -> Result<Engine, Box<dyn std::error::Error>> {
    Ok(Engine::open(Store::open_file(path, StoreConfig::default())?, EngineConfig::default())?)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join(format!("peerhol-example-{}.store", std::process::id())));

    let published = {
        let engine = open(&path)?;
        let report = engine.execute(&ExecRequest::new("ann", IMPL).publish("impl"))?;
        report.published.expect("published")
    };
    println!("published {published} to {} ({} bytes)", path.display(), std::fs::metadata(&path)?.len());

    let engine = open(&path)?;
    println!("reopened: {} contexts, {} chronicle versions", engine.store().context_refs()?.len(), engine.store().keys("ver/").len());
    let report = engine.execute(&ExecRequest::new("bob", "val i = @ann:impl\nwith i do have copy = \"∀ x : prop. x ⟶ x\" by impl end"))?;
    println!("bob reuses it: copy = {}", report.binding("copy").unwrap_or("?"));

    if std::env::args().nth(1).is_none() {
        std::fs::remove_file(&path)?;
    }
    Ok(())
}
