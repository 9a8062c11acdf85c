//! Plain-text rendering of reports. Embedded and remote runs go through the
//! same wire documents, so they print the same text.

use std::fmt::Write;

use peerhol_service::wire::{ChronicleSummary, ContextDoc, ErrorDoc, ExecuteResponse, NamedValue, RepairDoc};

pub fn error(file: &str, e: &ErrorDoc) -> String {
    match (e.line, e.column) {
        (Some(l), Some(c)) => format!("{file}:{l}:{c}: {}: {}", e.error, e.message),
        _ => format!("{file}: {}: {}", e.error, e.message),
    }
}

pub fn binding(b: &NamedValue) -> String {
    format!("{} = {}", b.name, b.value)
}

pub fn report(r: &ExecuteResponse) -> String {
    let mut s = String::new();
    for line in &r.output {
        let _ = writeln!(s, "{line}");
    }
    for b in &r.bindings {
        let _ = writeln!(s, "{}", binding(b));
    }
    if !r.value.is_empty() {
        let _ = writeln!(s, "value: {}", r.value);
    }
    let _ = writeln!(s, "created {} context(s), final {}", r.created.len(), r.final_context);
    if let Some(p) = &r.published {
        let _ = writeln!(s, "published {}:{} version {}", p.owner, p.name, p.version);
    }
    if let Some(rep) = &r.repair {
        s.push_str(&repair(rep));
    }
    s
}

pub fn repair(r: &RepairDoc) -> String {
    let mut s = String::new();
    if r.regenerated.is_empty() && r.failed.is_empty() && r.stale.is_empty() {
        s.push_str("repair: nothing to do\n");
        return s;
    }
    for v in &r.regenerated {
        let _ = writeln!(s, "repair: regenerated {}:{} version {}", v.owner, v.name, v.version);
    }
    for f in &r.failed {
        let _ = writeln!(s, "repair: failed {}:{}: {}", f.owner, f.name, f.error);
    }
    for c in &r.stale {
        let _ = writeln!(s, "repair: still out of date {}:{}", c.owner, c.name);
    }
    s
}

pub fn list(cs: &[ChronicleSummary]) -> String {
    let mut s = String::new();
    for c in cs {
        let status = match (&c.status.up_to_date, &c.status.reason) {
            (true, _) => "up to date".to_string(),
            (false, Some(r)) => format!("out of date: {r}"),
            (false, None) => "out of date".to_string(),
        };
        let _ = writeln!(s, "{}:{}  v{}  {status}", c.owner, c.name, c.newest);
    }
    s
}

pub fn context(c: &ContextDoc) -> String {
    let mut s = format!("{} context {} (owner {}, depth {})\n", c.kind, c.key, c.owner, c.depth);
    for k in &c.constants {
        let _ = writeln!(s, "  constant {} : {}", k.name, k.ty);
    }
    for a in &c.assumptions {
        let _ = writeln!(s, "  assumption {a}");
    }
    for v in &c.values {
        let _ = writeln!(s, "  {}", binding(v));
    }
    for u in &c.unbound {
        let _ = writeln!(s, "  unbound {u}");
    }
    s
}
