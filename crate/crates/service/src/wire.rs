//! JSON documents exchanged over the API. Terms only ever travel as printed
//! text; nothing here can be turned back into a theorem or a context.

use std::collections::BTreeMap;

use peerhol::chronicle::{Chronicle, ChronicleId, ChronicleVersion, Status, VersionKey};
use peerhol::context::{Context, ContextSource};
use peerhol::engine::{ExecReport, RepairReport};
use peerhol::interpreter::ScriptError;
use peerhol::store::Store;
use peerhol::syntax::{print_term, Mode};
use peerhol::value::Value;
use serde::{Deserialize, Serialize};

// --- requests -------------------------------------------------------------

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Credentials {
    pub login: String,
    pub password: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExecuteRequest {
    pub script: String,
    /// Publish the run as a new version of this chronicle of the caller.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chronicle: Option<String>,
    /// Pins `owner:name` references to a version.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub assignment: BTreeMap<String, u64>,
}

// --- responses ------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionResponse {
    pub session: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorDoc {
    pub error: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub column: Option<u32>,
}

impl ErrorDoc {
    pub fn new(error: &str, message: impl Into<String>) -> ErrorDoc {
        ErrorDoc { error: error.to_string(), message: message.into(), line: None, column: None }
    }
}

impl From<&ScriptError> for ErrorDoc {
    fn from(e: &ScriptError) -> ErrorDoc {
        ErrorDoc {
            error: e.class.name().to_string(),
            message: e.message.clone(),
            line: Some(e.pos.line),
            column: Some(e.pos.column),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChronicleRef {
    pub owner: String,
    pub name: String,
}

impl From<&ChronicleId> for ChronicleRef {
    fn from(id: &ChronicleId) -> ChronicleRef {
        ChronicleRef { owner: id.owner.clone(), name: id.name.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRef {
    pub owner: String,
    pub name: String,
    pub version: u64,
}

impl From<&VersionKey> for VersionRef {
    fn from(k: &VersionKey) -> VersionRef {
        VersionRef { owner: k.chronicle.owner.clone(), name: k.chronicle.name.clone(), version: k.version }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NamedValue {
    pub name: String,
    pub kind: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub owner: String,
    pub name: String,
    pub error: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepairDoc {
    pub regenerated: Vec<VersionRef>,
    pub failed: Vec<Failure>,
    pub stale: Vec<ChronicleRef>,
}

impl From<&RepairReport> for RepairDoc {
    fn from(r: &RepairReport) -> RepairDoc {
        RepairDoc {
            regenerated: r.regenerated.iter().map(VersionRef::from).collect(),
            failed: r
                .failed
                .iter()
                .map(|(id, e)| Failure { owner: id.owner.clone(), name: id.name.clone(), error: e.clone() })
                .collect(),
            stale: r.stale.iter().map(ChronicleRef::from).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecuteResponse {
    pub created: Vec<String>,
    pub final_context: String,
    pub value: String,
    pub value_kind: String,
    pub bindings: Vec<NamedValue>,
    pub output: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub published: Option<VersionRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repair: Option<RepairDoc>,
}

impl ExecuteResponse {
    pub fn theorems(&self) -> impl Iterator<Item = &NamedValue> {
        self.bindings.iter().filter(|b| b.kind == "theorem")
    }
}

impl From<&ExecReport> for ExecuteResponse {
    fn from(r: &ExecReport) -> ExecuteResponse {
        ExecuteResponse {
            created: r.created.iter().map(|c| c.to_string()).collect(),
            final_context: r.final_context.to_string(),
            value: r.value.clone(),
            value_kind: r.value_type.to_string(),
            bindings: r
                .bindings
                .iter()
                .map(|b| NamedValue { name: b.name.clone(), kind: b.type_name.to_string(), value: b.shown.clone() })
                .collect(),
            output: r.output.clone(),
            published: r.published.as_ref().map(VersionRef::from),
            repair: r.repair.as_ref().map(RepairDoc::from),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constant {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDoc {
    pub key: String,
    pub kind: String,
    pub parent: Option<String>,
    pub owner: String,
    pub depth: usize,
    pub constants: Vec<Constant>,
    pub assumptions: Vec<String>,
    pub values: Vec<NamedValue>,
    pub unbound: Vec<String>,
}

impl ContextDoc {
    pub fn build(store: &Store, ctx: &Context, mode: Mode) -> ContextDoc {
        let env = store.name_env(ctx.key()).unwrap_or_default();
        let ascii = mode == Mode::Ascii;
        ContextDoc {
            key: ctx.key().to_string(),
            kind: ctx.kind().name().to_string(),
            parent: ctx.parent().map(|p| p.to_string()),
            owner: ctx.owner().to_string(),
            depth: ctx.depth(),
            constants: ctx
                .constants()
                .iter()
                .map(|(n, t)| Constant { name: n.clone(), ty: if ascii { t.to_ascii() } else { t.to_string() } })
                .collect(),
            assumptions: ctx.assumptions().iter().map(|a| print_term(a, &env, mode)).collect(),
            values: ctx
                .values()
                .iter()
                .map(|(n, v)| NamedValue {
                    name: n.clone(),
                    kind: v.type_name().to_string(),
                    value: match v {
                        Value::Function(_) => "<function>".to_string(),
                        v => peerhol::show_value(store, v, mode),
                    },
                })
                .collect(),
            unbound: ctx.unbound().iter().cloned().collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VersionDoc {
    pub version: u64,
    pub final_context: String,
    pub script: String,
    pub owned: Vec<String>,
    pub dependencies: Vec<VersionRef>,
    pub assignment: BTreeMap<String, u64>,
}

impl From<&ChronicleVersion> for VersionDoc {
    fn from(v: &ChronicleVersion) -> VersionDoc {
        VersionDoc {
            version: v.version,
            final_context: v.final_context.to_string(),
            script: v.script.clone(),
            owned: v.owned.iter().map(|c| c.to_string()).collect(),
            dependencies: v.deps.iter().map(VersionRef::from).collect(),
            assignment: v.assignment.iter().map(|(id, n)| (id.to_string(), *n)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StatusDoc {
    pub up_to_date: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl From<&Status> for StatusDoc {
    fn from(s: &Status) -> StatusDoc {
        match s {
            Status::UpToDate => StatusDoc { up_to_date: true, reason: None },
            Status::OutOfDate(why) => StatusDoc { up_to_date: false, reason: Some(why.clone()) },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChronicleSummary {
    pub owner: String,
    pub name: String,
    pub newest: u64,
    pub status: StatusDoc,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChronicleDoc {
    pub owner: String,
    pub name: String,
    pub status: StatusDoc,
    /// Newest first.
    pub versions: Vec<VersionDoc>,
}

impl ChronicleDoc {
    pub fn build(c: &Chronicle, status: &Status) -> ChronicleDoc {
        ChronicleDoc {
            owner: c.id.owner.clone(),
            name: c.id.name.clone(),
            status: status.into(),
            versions: c.versions.iter().map(VersionDoc::from).collect(),
        }
    }
}
