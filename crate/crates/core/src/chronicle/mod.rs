//! Chronicles: named, owned version histories of proof script runs.
//!
//! A version owns the contexts its run created. It depends directly on every
//! other version owning the parent of one of those contexts, where a context
//! nobody owns is attributed to its nearest owned ancestor. No version may
//! depend, even transitively, on a version of its own chronicle.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use crate::context::{ContextError, ContextRef, ContextSource};
use crate::store::codec::{CodecError, Reader, Writer, FORMAT_VERSION};
use crate::store::{Store, StoreError};

pub const ROOT_OWNER: &str = "system";
pub const ROOT_NAME: &str = "root";
const CHRONICLE_PREFIX: &str = "chr/";
const VERSION_PREFIX: &str = "ver/";

/// `owner:name`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct ChronicleId {
    pub owner: String,
    pub name: String,
}

impl ChronicleId {
    pub fn new(owner: impl Into<String>, name: impl Into<String>) -> ChronicleId {
        ChronicleId { owner: owner.into(), name: name.into() }
    }

    pub fn root() -> ChronicleId {
        ChronicleId::new(ROOT_OWNER, ROOT_NAME)
    }

    pub fn is_root(&self) -> bool {
        self.owner == ROOT_OWNER && self.name == ROOT_NAME
    }
}

impl fmt::Display for ChronicleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.owner, self.name)
    }
}

/// Logins and chronicle names: what an `@u:n` reference can spell.
pub fn is_valid_name(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct VersionKey {
    pub chronicle: ChronicleId,
    pub version: u64,
}

impl VersionKey {
    pub fn new(chronicle: ChronicleId, version: u64) -> VersionKey {
        VersionKey { chronicle, version }
    }
}

impl fmt::Display for VersionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.chronicle, self.version)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ChronicleVersion {
    pub version: u64,
    pub owned: BTreeSet<ContextRef>,
    pub final_context: ContextRef,
    pub script: String,
    /// Versions of other chronicles the run referred to.
    pub assignment: BTreeMap<ChronicleId, u64>,
    pub deps: BTreeSet<VersionKey>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Status {
    UpToDate,
    OutOfDate(String),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Chronicle {
    pub id: ChronicleId,
    /// Newest first.
    pub versions: Vec<ChronicleVersion>,
    pub status: Status,
}

impl Chronicle {
    pub fn newest(&self) -> &ChronicleVersion {
        &self.versions[0]
    }

    pub fn version(&self, v: u64) -> Option<&ChronicleVersion> {
        self.versions.iter().find(|x| x.version == v)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ChronicleError {
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error(transparent)]
    Context(#[from] ContextError),
    #[error("invalid chronicle: {0}")]
    Invalid(String),
}

/// Why a reference could not be resolved.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LookupFailure {
    Ambiguous(String),
    Unknown(String),
}

/// All chronicles and the context ownership index.
#[derive(Clone, Debug, Default)]
pub struct Registry {
    chronicles: BTreeMap<ChronicleId, Chronicle>,
    owners: HashMap<ContextRef, VersionKey>,
}

fn header_key(id: &ChronicleId) -> String {
    format!("{CHRONICLE_PREFIX}{}/{}", id.owner, id.name)
}

fn version_key(id: &ChronicleId, v: u64) -> String {
    format!("{VERSION_PREFIX}{}/{}/{v:010}", id.owner, id.name)
}

fn encode_id(w: &mut Writer, id: &ChronicleId) {
    w.str(&id.owner);
    w.str(&id.name);
}

fn decode_id(r: &mut Reader<'_>) -> Result<ChronicleId, CodecError> {
    Ok(ChronicleId { owner: r.str()?, name: r.str()? })
}

pub fn encode_version(v: &ChronicleVersion) -> Vec<u8> {
    let mut w = Writer::new();
    w.u8(FORMAT_VERSION);
    w.u64(v.version);
    w.len(v.owned.len());
    for c in &v.owned {
        w.context_ref(c);
    }
    w.context_ref(&v.final_context);
    w.str(&v.script);
    w.len(v.assignment.len());
    for (id, n) in &v.assignment {
        encode_id(&mut w, id);
        w.u64(*n);
    }
    w.len(v.deps.len());
    for d in &v.deps {
        encode_id(&mut w, &d.chronicle);
        w.u64(d.version);
    }
    w.finish()
}

pub fn decode_version(bytes: &[u8]) -> Result<ChronicleVersion, CodecError> {
    let mut r = Reader::new(bytes);
    let f = r.u8()?;
    if f != FORMAT_VERSION {
        return Err(CodecError::Version(f));
    }
    let version = r.u64()?;
    let n = r.len()?;
    let owned = (0..n).map(|_| r.context_ref()).collect::<Result<BTreeSet<_>, _>>()?;
    let final_context = r.context_ref()?;
    let script = r.str()?;
    let n = r.len()?;
    let mut assignment = BTreeMap::new();
    for _ in 0..n {
        let id = decode_id(&mut r)?;
        assignment.insert(id, r.u64()?);
    }
    let n = r.len()?;
    let mut deps = BTreeSet::new();
    for _ in 0..n {
        let id = decode_id(&mut r)?;
        deps.insert(VersionKey::new(id, r.u64()?));
    }
    r.finish()?;
    if !owned.contains(&final_context) {
        return Err(CodecError::Invalid("final context is not owned by its version".into()));
    }
    Ok(ChronicleVersion { version, owned, final_context, script, assignment, deps })
}

fn encode_status(s: &Status) -> Vec<u8> {
    let mut w = Writer::new();
    w.u8(FORMAT_VERSION);
    match s {
        Status::UpToDate => w.u8(0),
        Status::OutOfDate(reason) => {
            w.u8(1);
            w.str(reason);
        }
    }
    w.finish()
}

fn decode_status(bytes: &[u8]) -> Result<Status, CodecError> {
    let mut r = Reader::new(bytes);
    let f = r.u8()?;
    if f != FORMAT_VERSION {
        return Err(CodecError::Version(f));
    }
    let s = match r.u8()? {
        0 => Status::UpToDate,
        1 => Status::OutOfDate(r.str()?),
        t => return Err(CodecError::Invalid(format!("status tag {t}"))),
    };
    r.finish()?;
    Ok(s)
}

impl Registry {
    pub fn new() -> Registry {
        Registry::default()
    }

    pub fn load(store: &Store) -> Result<Registry, ChronicleError> {
        let mut reg = Registry::new();
        for key in store.keys(CHRONICLE_PREFIX) {
            let rest = &key[CHRONICLE_PREFIX.len()..];
            let (owner, name) =
                rest.split_once('/').ok_or_else(|| ChronicleError::Invalid(format!("bad chronicle key {key}")))?;
            let id = ChronicleId::new(owner, name);
            let status = decode_status(&store.get_raw(&key).expect("listed key"))?;
            let prefix = format!("{VERSION_PREFIX}{owner}/{name}/");
            let mut versions = store
                .keys(&prefix)
                .iter()
                .map(|k| decode_version(&store.get_raw(k).expect("listed key")))
                .collect::<Result<Vec<_>, _>>()?;
            if versions.is_empty() {
                return Err(ChronicleError::Invalid(format!("chronicle {id} has no versions")));
            }
            versions.reverse();
            for v in &versions {
                for c in &v.owned {
                    reg.owners.insert(c.clone(), VersionKey::new(id.clone(), v.version));
                }
            }
            reg.chronicles.insert(id.clone(), Chronicle { id, versions, status });
        }
        Ok(reg)
    }

    /// Adds a version without touching any store; for building graphs in
    /// memory.
    pub fn insert(&mut self, id: ChronicleId, v: ChronicleVersion) {
        for c in &v.owned {
            self.owners.insert(c.clone(), VersionKey::new(id.clone(), v.version));
        }
        let ch = self
            .chronicles
            .entry(id.clone())
            .or_insert_with(|| Chronicle { id, versions: Vec::new(), status: Status::UpToDate });
        ch.versions.insert(0, v);
    }

    /// Persists and adds a new newest version.
    pub fn publish(&mut self, store: &Store, id: &ChronicleId, v: ChronicleVersion) -> Result<(), ChronicleError> {
        if let Some(prev) = self.chronicles.get(id) {
            if prev.newest().version >= v.version {
                return Err(ChronicleError::Invalid(format!("version {} of {id} is not newer", v.version)));
            }
        }
        if !v.owned.contains(&v.final_context) {
            return Err(ChronicleError::Invalid("final context is not owned by its version".into()));
        }
        store.put_raw(&version_key(id, v.version), &encode_version(&v))?;
        self.insert(id.clone(), v);
        self.set_status(store, id, Status::UpToDate)
    }

    pub fn set_status(&mut self, store: &Store, id: &ChronicleId, status: Status) -> Result<(), ChronicleError> {
        let ch = self.chronicles.get_mut(id).ok_or_else(|| ChronicleError::Invalid(format!("unknown chronicle {id}")))?;
        store.put_raw(&header_key(id), &encode_status(&status))?;
        ch.status = status;
        Ok(())
    }

    pub fn chronicles(&self) -> impl Iterator<Item = &Chronicle> {
        self.chronicles.values()
    }

    pub fn get(&self, id: &ChronicleId) -> Option<&Chronicle> {
        self.chronicles.get(id)
    }

    pub fn newest(&self, id: &ChronicleId) -> Option<&ChronicleVersion> {
        self.get(id).map(Chronicle::newest)
    }

    pub fn version(&self, key: &VersionKey) -> Option<&ChronicleVersion> {
        self.get(&key.chronicle)?.version(key.version)
    }

    pub fn is_newest(&self, key: &VersionKey) -> bool {
        self.newest(&key.chronicle).is_some_and(|v| v.version == key.version)
    }

    /// Version owning `ctx` or, failing that, its nearest owned ancestor.
    pub fn owner_of<S: ContextSource + ?Sized>(&self, src: &S, ctx: &ContextRef) -> Result<Option<VersionKey>, ContextError> {
        let mut cur = Some(ctx.clone());
        while let Some(k) = cur {
            if let Some(v) = self.owners.get(&k) {
                return Ok(Some(v.clone()));
            }
            cur = src.load(&k)?.parent().cloned();
        }
        Ok(None)
    }

    /// Versions owning a parent of one of `owned`, other than `this`.
    pub fn direct_dependencies<S: ContextSource + ?Sized>(
        &self,
        src: &S,
        owned: &BTreeSet<ContextRef>,
        this: Option<&VersionKey>,
    ) -> Result<BTreeSet<VersionKey>, ContextError> {
        let mut out = BTreeSet::new();
        for c in owned {
            let Some(p) = src.load(c)?.parent().cloned() else { continue };
            if owned.contains(&p) {
                continue;
            }
            if let Some(w) = self.owner_of(src, &p)? {
                if Some(&w) != this {
                    out.insert(w);
                }
            }
        }
        Ok(out)
    }

    /// Every version `key` depends on, directly or not.
    pub fn dependencies(&self, key: &VersionKey) -> BTreeSet<VersionKey> {
        let mut seen = BTreeSet::new();
        let mut stack: Vec<VersionKey> = self.version(key).map(|v| v.deps.iter().cloned().collect()).unwrap_or_default();
        while let Some(k) = stack.pop() {
            if seen.insert(k.clone()) {
                if let Some(v) = self.version(&k) {
                    stack.extend(v.deps.iter().cloned());
                }
            }
        }
        seen
    }

    pub fn depends_on(&self, v: &VersionKey, w: &VersionKey) -> bool {
        self.dependencies(v).contains(w)
    }

    /// The newest version depends only on newest versions.
    pub fn is_up_to_date(&self, id: &ChronicleId) -> bool {
        let Some(newest) = self.newest(id) else { return false };
        self.dependencies(&VersionKey::new(id.clone(), newest.version)).iter().all(|w| self.is_newest(w))
    }

    /// Whether some direct dependency of the newest version has been
    /// superseded, so that regenerating could change anything.
    pub fn has_superseded_dependency(&self, id: &ChronicleId) -> bool {
        self.newest(id).is_some_and(|v| v.deps.iter().any(|w| !self.is_newest(w)))
    }

    /// Checks that a new version of `creating` may depend on `owner`.
    pub fn guard_edge(&self, creating: &ChronicleId, owner: &VersionKey) -> Result<(), ContextError> {
        if &owner.chronicle == creating {
            return Err(ContextError::DependencyCycle(format!(
                "a version of {creating} cannot depend on its own version {}",
                owner.version
            )));
        }
        if let Some(d) = self.dependencies(owner).into_iter().find(|d| &d.chronicle == creating) {
            return Err(ContextError::DependencyCycle(format!(
                "{owner} depends on {d}, a version of {creating} itself"
            )));
        }
        Ok(())
    }

    /// `guard_edge` for the owner of an arbitrary parent context.
    pub fn guard_new_context<S: ContextSource + ?Sized>(
        &self,
        src: &S,
        creating: &ChronicleId,
        parent: &ContextRef,
    ) -> Result<(), ContextError> {
        match self.owner_of(src, parent)? {
            Some(w) => self.guard_edge(creating, &w),
            None => Ok(()),
        }
    }

    /// `@n`: the current user's own chronicle named `n` if there is one,
    /// otherwise the only chronicle of that name.
    pub fn find_by_name(&self, name: &str, user: &str) -> Result<ChronicleId, LookupFailure> {
        let candidates: Vec<&ChronicleId> = self.chronicles.keys().filter(|id| id.name == name).collect();
        if let Some(own) = candidates.iter().find(|id| id.owner == user) {
            return Ok((*own).clone());
        }
        match candidates.as_slice() {
            [] => Err(LookupFailure::Unknown(format!("no chronicle named '{name}'"))),
            [one] => Ok((*one).clone()),
            many => {
                let owners: Vec<&str> = many.iter().map(|id| id.owner.as_str()).collect();
                Err(LookupFailure::Ambiguous(format!(
                    "'{name}' is a chronicle of several users ({}); write @user:{name}",
                    owners.join(", ")
                )))
            }
        }
    }

    /// Chronicle-level dependency order of `ids`: a chronicle comes after
    /// the chronicles its newest version depends on. Members of dependency
    /// cycles are appended in id order.
    pub fn topological_order(&self, ids: &BTreeSet<ChronicleId>) -> Vec<ChronicleId> {
        let edges: BTreeMap<&ChronicleId, BTreeSet<&ChronicleId>> = ids
            .iter()
            .map(|id| {
                let deps = self
                    .newest(id)
                    .map(|v| v.deps.iter().map(|d| &d.chronicle).filter(|c| ids.contains(*c) && *c != id).collect())
                    .unwrap_or_default();
                (id, deps)
            })
            .collect();
        let mut done: BTreeSet<&ChronicleId> = BTreeSet::new();
        let mut out = Vec::new();
        loop {
            let ready: Vec<&ChronicleId> = edges
                .iter()
                .filter(|(id, deps)| !done.contains(*id) && deps.iter().all(|d| done.contains(d)))
                .map(|(id, _)| *id)
                .collect();
            if ready.is_empty() {
                break;
            }
            for id in ready {
                done.insert(id);
                out.push(id.clone());
            }
        }
        out.extend(ids.iter().filter(|id| !done.contains(id)).cloned());
        out
    }
}
