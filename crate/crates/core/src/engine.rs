//! The engine: a store, its chronicles, and script execution against them.
//!
//! Runs are isolated: each one works on a snapshot of the chronicle registry.
//! Publication, regeneration and status changes go through one writer lock.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use crate::chronicle::{
    is_valid_name, ChronicleError, ChronicleId, ChronicleVersion, LookupFailure, Registry, Status, VersionKey,
    ROOT_OWNER,
};
use crate::context::{ContextError, ContextKind, ContextRecord, ContextRef, ContextSource};
use crate::interpreter::{ErrorClass, Hooks, Interpreter, ScriptError, State, DEFAULT_MAX_DEPTH};
use crate::store::Store;
use crate::syntax::script::AtRef;
use crate::syntax::{Mode, Pos};
use crate::value::Value;

/// The root theory shipped with the engine.
pub const BOOTSTRAP: &str = include_str!("../scripts/bootstrap.ps");

#[derive(Clone, Debug)]
pub struct EngineConfig {
    /// Source of the root chronicle's first version.
    pub bootstrap: String,
    /// Run a repair sweep after every publication.
    pub auto_repair: bool,
    pub max_depth: usize,
}

impl Default for EngineConfig {
    fn default() -> EngineConfig {
        EngineConfig { bootstrap: BOOTSTRAP.to_string(), auto_repair: true, max_depth: DEFAULT_MAX_DEPTH }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EngineError {
    #[error(transparent)]
    Chronicle(#[from] ChronicleError),
    #[error("bootstrap failed: {0}")]
    Bootstrap(ScriptError),
}

/// One script execution.
#[derive(Clone, Debug)]
pub struct ExecRequest {
    pub user: String,
    pub script: String,
    /// Publish the run as a new version of the user's chronicle of this name.
    pub publish: Option<String>,
    /// Versions to use instead of the newest ones.
    pub assignment: BTreeMap<ChronicleId, u64>,
    pub mode: Mode,
}

impl ExecRequest {
    pub fn new(user: impl Into<String>, script: impl Into<String>) -> ExecRequest {
        ExecRequest {
            user: user.into(),
            script: script.into(),
            publish: None,
            assignment: BTreeMap::new(),
            mode: Mode::Unicode,
        }
    }

    pub fn publish(mut self, name: impl Into<String>) -> ExecRequest {
        self.publish = Some(name.into());
        self
    }

    pub fn ascii(mut self) -> ExecRequest {
        self.mode = Mode::Ascii;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecReport {
    pub created: Vec<ContextRef>,
    pub final_context: ContextRef,
    /// Printed value of the script; empty when it is a context.
    pub value: String,
    pub value_type: &'static str,
    /// Script-level bindings, oldest first.
    pub bindings: Vec<Binding>,
    pub output: Vec<String>,
    pub published: Option<VersionKey>,
    pub repair: Option<RepairReport>,
}

impl ExecReport {
    pub fn binding(&self, name: &str) -> Option<&str> {
        self.bindings.iter().rev().find(|b| b.name == name).map(|b| b.shown.as_str())
    }

    pub fn theorems(&self) -> impl Iterator<Item = &Binding> {
        self.bindings.iter().filter(|b| b.type_name == "theorem")
    }
}

/// A script-level name and its printed value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Binding {
    pub name: String,
    pub type_name: &'static str,
    pub shown: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RepairReport {
    /// New versions, in the order they were generated.
    pub regenerated: Vec<VersionKey>,
    /// Chronicles whose script failed to re-run, with the error.
    pub failed: Vec<(ChronicleId, String)>,
    /// Chronicles still not up to date after the sweep.
    pub stale: Vec<ChronicleId>,
}

impl RepairReport {
    pub fn is_empty(&self) -> bool {
        self.regenerated.is_empty() && self.failed.is_empty() && self.stale.is_empty()
    }
}

struct ChronicleHooks<'a> {
    store: &'a Store,
    registry: &'a Registry,
    creating: Option<ChronicleId>,
    assignment: &'a BTreeMap<ChronicleId, u64>,
    used: RefCell<BTreeMap<ChronicleId, u64>>,
}

impl ChronicleHooks<'_> {
    fn final_of(&self, id: &ChronicleId, version: Option<u64>) -> Result<ContextRef, ScriptError> {
        let unknown = |m: String| ScriptError::new(ErrorClass::UnknownChronicle, Pos::START, m);
        let ch = self.registry.get(id).ok_or_else(|| unknown(format!("no chronicle {id}")))?;
        let v = match version.or_else(|| self.assignment.get(id).copied()) {
            Some(n) => ch.version(n).ok_or_else(|| unknown(format!("{id} has no version {n}")))?,
            None => ch.newest(),
        };
        self.used.borrow_mut().insert(id.clone(), v.version);
        Ok(v.final_context.clone())
    }
}

impl Hooks for ChronicleHooks<'_> {
    fn root(&self) -> Result<ContextRef, ScriptError> {
        self.final_of(&ChronicleId::root(), None)
    }

    fn resolve_reference(&self, at: &AtRef, user: &str) -> Result<ContextRef, ScriptError> {
        match at {
            AtRef::Key(k) => {
                let r: ContextRef = k.parse().map_err(|e| ScriptError::from_context(e, Pos::START))?;
                self.store.load(&r).map_err(|e| ScriptError::from_context(e, Pos::START))?;
                Ok(r)
            }
            AtRef::Name(n) => {
                let id = self.registry.find_by_name(n, user).map_err(|f| match f {
                    LookupFailure::Ambiguous(m) => ScriptError::new(ErrorClass::AmbiguousChronicle, Pos::START, m),
                    LookupFailure::Unknown(m) => ScriptError::new(ErrorClass::UnknownChronicle, Pos::START, m),
                })?;
                self.final_of(&id, None)
            }
            AtRef::Owned { user, name } => self.final_of(&ChronicleId::new(user, name), None),
            AtRef::Versioned { user, name, version } => self.final_of(&ChronicleId::new(user, name), Some(*version)),
        }
    }

    fn check_parent(&self, parent: &ContextRef) -> Result<(), ContextError> {
        match &self.creating {
            Some(x) => self.registry.guard_new_context(self.store, x, parent),
            None => Ok(()),
        }
    }
}

struct RunResult {
    report: ExecReport,
    state: State,
    owned: BTreeSet<ContextRef>,
    assignment: BTreeMap<ChronicleId, u64>,
}

pub struct Engine {
    store: Store,
    config: EngineConfig,
    registry: RwLock<Arc<Registry>>,
    writer: Mutex<()>,
}

impl Engine {
    /// Opens the engine over `store`, bootstrapping the root chronicle if
    /// the store has none.
    pub fn open(store: Store, config: EngineConfig) -> Result<Engine, EngineError> {
        let registry = Registry::load(&store)?;
        let engine = Engine { store, config, registry: RwLock::new(Arc::new(registry)), writer: Mutex::new(()) };
        if engine.registry().get(&ChronicleId::root()).is_none() {
            engine.bootstrap()?;
        }
        Ok(engine)
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Snapshot of all chronicles.
    pub fn registry(&self) -> Arc<Registry> {
        self.registry.read().unwrap_or_else(|e| e.into_inner()).clone()
    }

    pub fn root(&self) -> ContextRef {
        self.registry().newest(&ChronicleId::root()).expect("bootstrapped").final_context.clone()
    }

    /// Stored flag, or out of date when the newest version depends on a
    /// superseded one.
    pub fn status(&self, id: &ChronicleId) -> Option<Status> {
        let reg = self.registry();
        let ch = reg.get(id)?;
        Some(match &ch.status {
            Status::OutOfDate(r) => Status::OutOfDate(r.clone()),
            Status::UpToDate if !reg.is_up_to_date(id) => Status::OutOfDate("depends on superseded versions".into()),
            Status::UpToDate => Status::UpToDate,
        })
    }

    fn lock_writer(&self) -> MutexGuard<'_, ()> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn bootstrap(&self) -> Result<(), EngineError> {
        let _w = self.lock_writer();
        let root = self
            .store
            .append_context(None, ROOT_OWNER, |_| Ok(ContextRecord::empty(ContextKind::Root)))
            .map_err(|e| EngineError::Bootstrap(ScriptError::from_context(e, Pos::START)))?
            .key()
            .clone();
        // No root chronicle exists yet, so `root` is resolved by hand.
        struct Boot(ContextRef);
        impl Hooks for Boot {
            fn root(&self) -> Result<ContextRef, ScriptError> {
                Ok(self.0.clone())
            }
            fn resolve_reference(&self, at: &AtRef, _: &str) -> Result<ContextRef, ScriptError> {
                Err(ScriptError::new(ErrorClass::UnknownChronicle, Pos::START, format!("{at} during bootstrap")))
            }
            fn check_parent(&self, _: &ContextRef) -> Result<(), ContextError> {
                Ok(())
            }
        }
        let hooks = Boot(root.clone());
        let out = Interpreter::new(&self.store, &hooks, ROOT_OWNER)
            .with_max_depth(self.config.max_depth)
            .run(&self.config.bootstrap, State::at(root.clone()));
        self.store.seal();
        let out = out.map_err(EngineError::Bootstrap)?;
        let mut owned: BTreeSet<ContextRef> = out.created.iter().cloned().collect();
        owned.insert(root.clone());
        let final_context = if owned.contains(&out.state.ctx) { out.state.ctx } else { root };
        let version = ChronicleVersion {
            version: 1,
            owned,
            final_context,
            script: self.config.bootstrap.clone(),
            assignment: BTreeMap::new(),
            deps: BTreeSet::new(),
        };
        let mut reg = (*self.registry()).clone();
        reg.publish(&self.store, &ChronicleId::root(), version)?;
        *self.registry.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(reg);
        Ok(())
    }

    fn run(
        &self,
        reg: &Registry,
        req: &ExecRequest,
        creating: Option<ChronicleId>,
        start: Option<State>,
    ) -> Result<RunResult, ScriptError> {
        let hooks = ChronicleHooks {
            store: &self.store,
            registry: reg,
            creating,
            assignment: &req.assignment,
            used: RefCell::new(BTreeMap::new()),
        };
        let start = match start {
            Some(s) => s,
            None => State::at(hooks.root()?),
        };
        let result = Interpreter::new(&self.store, &hooks, req.user.clone())
            .with_mode(req.mode)
            .with_max_depth(self.config.max_depth)
            .run(&req.script, start);
        self.store.seal();
        let out = result?;
        let owned: BTreeSet<ContextRef> = out.created.iter().cloned().collect();
        let final_context = if owned.contains(&out.state.ctx) || owned.is_empty() {
            out.state.ctx.clone()
        } else {
            out.created.last().expect("non-empty").clone()
        };
        let mut seen = HashSet::new();
        let mut bindings: Vec<Binding> = out
            .state
            .env
            .local_bindings()
            .into_iter()
            .filter(|(n, _)| seen.insert(n.clone()))
            .filter_map(|(name, v)| {
                v.map(|v| Binding { name, type_name: v.type_name(), shown: crate::show_value(&self.store, &v, req.mode) })
            })
            .collect();
        bindings.reverse();
        let report = ExecReport {
            created: out.created,
            final_context,
            value_type: out.value.type_name(),
            value: match out.value {
                Value::Context(_) => String::new(),
                v => crate::show_value(&self.store, &v, req.mode),
            },
            bindings,
            output: out.output,
            published: None,
            repair: None,
        };
        Ok(RunResult { report, state: out.state, owned, assignment: hooks.used.into_inner() })
    }

    /// Runs a script; publishes it when asked to.
    pub fn execute(&self, req: &ExecRequest) -> Result<ExecReport, ScriptError> {
        let invalid = |m: String| ScriptError::new(ErrorClass::RuntimeError, Pos::START, m);
        let creating = match &req.publish {
            Some(name) => {
                if !is_valid_name(&req.user) || !is_valid_name(name) {
                    return Err(invalid(format!("'{}:{name}' is not a valid chronicle name", req.user)));
                }
                let id = ChronicleId::new(&req.user, name);
                if id.is_root() {
                    return Err(invalid("the root chronicle is not published by scripts".into()));
                }
                Some(id)
            }
            None => None,
        };
        let snapshot = self.registry();
        let mut run = self.run(&snapshot, req, creating.clone(), None)?;
        let Some(id) = creating else { return Ok(run.report) };
        {
            let _w = self.lock_writer();
            let key = self.publish_locked(&id, req, &mut run)?;
            run.report.published = Some(key);
        }
        if self.config.auto_repair {
            let report = self.repair_sweep();
            run.report.repair = Some(report);
        }
        Ok(run.report)
    }

    /// Runs `req.script` from `state` (or from the root) without publishing
    /// and hands back the final state, so that a caller can continue from it.
    pub fn step(&self, req: &ExecRequest, state: Option<State>) -> Result<(State, ExecReport), ScriptError> {
        let run = self.run(&self.registry(), req, None, state)?;
        Ok((run.state, run.report))
    }

    fn publish_locked(&self, id: &ChronicleId, req: &ExecRequest, run: &mut RunResult) -> Result<VersionKey, ScriptError> {
        let err = |class: ErrorClass, m: String| ScriptError::new(class, Pos::START, m);
        if run.owned.is_empty() {
            return Err(err(ErrorClass::RuntimeError, "a published script must create at least one context".into()));
        }
        let mut reg = (*self.registry()).clone();
        let deps = reg
            .direct_dependencies(&self.store, &run.owned, None)
            .map_err(|e| ScriptError::from_context(e, Pos::START))?;
        for d in &deps {
            reg.guard_edge(id, d).map_err(|e| ScriptError::from_context(e, Pos::START))?;
        }
        let number = reg.newest(id).map_or(1, |v| v.version + 1);
        let version = ChronicleVersion {
            version: number,
            owned: std::mem::take(&mut run.owned),
            final_context: run.report.final_context.clone(),
            script: req.script.clone(),
            assignment: std::mem::take(&mut run.assignment),
            deps,
        };
        reg.publish(&self.store, id, version).map_err(|e| err(ErrorClass::StorageError, e.to_string()))?;
        if !reg.is_up_to_date(id) {
            reg.set_status(&self.store, id, Status::OutOfDate("depends on superseded versions".into()))
                .map_err(|e| err(ErrorClass::StorageError, e.to_string()))?;
        }
        *self.registry.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(reg);
        Ok(VersionKey::new(id.clone(), number))
    }

    fn set_status_locked(&self, id: &ChronicleId, status: Status) {
        let reg = self.registry();
        if reg.get(id).is_some_and(|c| c.status == status) {
            return;
        }
        let mut reg = (*reg).clone();
        if let Err(e) = reg.set_status(&self.store, id, status) {
            log::warn!("could not record status of {id}: {e}");
            return;
        }
        *self.registry.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(reg);
    }

    fn regenerate_locked(&self, id: &ChronicleId) -> Result<VersionKey, ScriptError> {
        let snapshot = self.registry();
        let script = snapshot.newest(id).expect("chronicle exists").script.clone();
        let mut req = ExecRequest::new(&id.owner, script);
        req.publish = Some(id.name.clone());
        let mut run = self.run(&snapshot, &req, Some(id.clone()), None)?;
        self.publish_locked(id, &req, &mut run)
    }

    /// Re-runs the script of `id` against the newest versions of everything
    /// it depends on. Failures are recorded on the chronicle.
    pub fn regenerate(&self, id: &ChronicleId) -> Result<VersionKey, ScriptError> {
        let _w = self.lock_writer();
        let result = self.regenerate_locked(id);
        if let Err(e) = &result {
            self.set_status_locked(id, Status::OutOfDate(e.to_string()));
        }
        result
    }

    /// Regenerates stale chronicles, dependencies first.
    pub fn repair_sweep(&self) -> RepairReport {
        let _w = self.lock_writer();
        let reg = self.registry();
        let stale: BTreeSet<ChronicleId> =
            reg.chronicles().map(|c| c.id.clone()).filter(|id| !reg.is_up_to_date(id)).collect();
        let order = reg.topological_order(&stale);
        let mut report = RepairReport::default();
        for id in &order {
            if !self.registry().has_superseded_dependency(id) {
                continue;
            }
            match self.regenerate_locked(id) {
                Ok(key) => report.regenerated.push(key),
                Err(e) => {
                    log::info!("regenerating {id} failed: {e}");
                    self.set_status_locked(id, Status::OutOfDate(e.to_string()));
                    report.failed.push((id.clone(), e.to_string()));
                }
            }
        }
        let reg = self.registry();
        let ids: Vec<ChronicleId> = reg.chronicles().map(|c| c.id.clone()).collect();
        for id in ids {
            let failed = report.failed.iter().any(|(f, _)| f == &id);
            if reg.is_up_to_date(&id) {
                if !failed {
                    self.set_status_locked(&id, Status::UpToDate);
                }
            } else {
                report.stale.push(id.clone());
                if !failed {
                    self.set_status_locked(&id, Status::OutOfDate("depends on superseded versions".into()));
                }
            }
        }
        report
    }
}
