//! Append-only persistence of context chains and auxiliary records.
//!
//! Contexts live in entities: one entity holds a linear chain of up to
//! `chunk` contexts, so a straight-line proof costs one record instead of
//! one per step. An entity accepts further contexts only while it is
//! unsealed; every entity created during a run is sealed by [`Store::seal`]
//! (and implicitly by reopening the store).

mod backend;
pub mod codec;

use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::{Arc, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};
use thiserror::Error;

pub use backend::{Backend, FileBackend, MemoryBackend, FILE_MAGIC, FILE_VERSION};
pub use codec::{decode_entity, encode_entity, CodecError, Entity};

use crate::context::{Context, ContextError, ContextRecord, ContextRef, ContextSource, NameEnv};

pub const DEFAULT_CHUNK: usize = 64;
pub const ENTITY_PREFIX: &str = "ctx/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("storage failure: {0}")]
    Io(String),
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("unknown parent context {0}")]
    UnknownParent(String),
    #[error("bad store file: {0}")]
    Format(String),
}

/// Where entity keys come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KeySource {
    Random,
    /// Reproducible keys, for golden files and tests.
    Seeded(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Clock {
    System,
    Fixed(u64),
}

#[derive(Clone, Debug)]
pub struct StoreConfig {
    pub chunk: usize,
    pub version_tag: String,
    pub keys: KeySource,
    pub clock: Clock,
}

impl Default for StoreConfig {
    fn default() -> StoreConfig {
        StoreConfig {
            chunk: DEFAULT_CHUNK,
            version_tag: concat!("peerhol-", env!("CARGO_PKG_VERSION")).to_string(),
            keys: KeySource::Random,
            clock: Clock::System,
        }
    }
}

impl StoreConfig {
    /// Fixed clock and seeded keys: two runs of the same operations produce
    /// byte-identical stores.
    pub fn deterministic(seed: u64) -> StoreConfig {
        StoreConfig { keys: KeySource::Seeded(seed), clock: Clock::Fixed(0), ..StoreConfig::default() }
    }
}

/// Read-only entity metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityInfo {
    pub id: String,
    pub parent: Option<ContextRef>,
    pub depth: u64,
    pub owner: String,
    pub timestamp: u64,
    pub version: String,
    pub chain_len: usize,
    pub sealed: bool,
}

struct Inner {
    backend: Box<dyn Backend>,
    entities: HashMap<String, Arc<Entity>>,
    unsealed: HashSet<String>,
    key_counter: u64,
}

pub struct Store {
    config: StoreConfig,
    inner: RwLock<Inner>,
    contexts: RwLock<HashMap<ContextRef, Arc<Context>>>,
    envs: RwLock<HashMap<ContextRef, Arc<NameEnv>>>,
}

impl std::fmt::Debug for Store {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Store").field("config", &self.config).finish_non_exhaustive()
    }
}

fn entity_key(id: &str) -> String {
    format!("{ENTITY_PREFIX}{id}")
}

impl Store {
    pub fn new(backend: Box<dyn Backend>, config: StoreConfig) -> Store {
        assert!(config.chunk >= 1, "chunk size must be positive");
        Store {
            config,
            inner: RwLock::new(Inner { backend, entities: HashMap::new(), unsealed: HashSet::new(), key_counter: 0 }),
            contexts: RwLock::new(HashMap::new()),
            envs: RwLock::new(HashMap::new()),
        }
    }

    pub fn memory(config: StoreConfig) -> Store {
        Store::new(Box::new(MemoryBackend::new()), config)
    }

    pub fn open_file(path: &Path, config: StoreConfig) -> Result<Store, StoreError> {
        Ok(Store::new(Box::new(FileBackend::open(path)?), config))
    }

    pub fn config(&self) -> &StoreConfig {
        &self.config
    }

    fn now(&self) -> u64 {
        match self.config.clock {
            Clock::Fixed(t) => t,
            Clock::System => SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64),
        }
    }

    fn fresh_id(&self, inner: &mut Inner) -> String {
        loop {
            let id = match self.config.keys {
                KeySource::Random => format!("{:032x}", rand::random::<u128>()),
                KeySource::Seeded(seed) => {
                    let mut h = Sha256::new();
                    h.update(seed.to_le_bytes());
                    h.update(inner.key_counter.to_le_bytes());
                    inner.key_counter += 1;
                    hex::encode(&h.finalize()[..16])
                }
            };
            if inner.backend.get(&entity_key(&id)).is_none() {
                return id;
            }
        }
    }

    fn entity_in(inner: &mut Inner, id: &str) -> Result<Option<Arc<Entity>>, StoreError> {
        if let Some(e) = inner.entities.get(id) {
            return Ok(Some(e.clone()));
        }
        let Some(bytes) = inner.backend.get(&entity_key(id)) else {
            return Ok(None);
        };
        let e = Arc::new(decode_entity(&bytes)?);
        if e.id != id {
            return Err(CodecError::Invalid(format!("entity stored under {id} claims id {}", e.id)).into());
        }
        inner.entities.insert(id.to_string(), e.clone());
        Ok(Some(e))
    }

    /// Loads an entity, decoding it on first use.
    pub fn entity(&self, id: &str) -> Result<Option<Arc<Entity>>, StoreError> {
        if let Some(e) = self.inner.read().expect("store lock").entities.get(id) {
            return Ok(Some(e.clone()));
        }
        Self::entity_in(&mut self.inner.write().expect("store lock"), id)
    }

    /// Persists a new context below `parent` (the root when `None`). `build`
    /// receives the key the context will get and produces its record; it runs
    /// under the store's write lock, so creation is serialized.
    pub fn append_context<F>(&self, parent: Option<&ContextRef>, owner: &str, build: F) -> Result<Arc<Context>, ContextError>
    where
        F: FnOnce(&ContextRef) -> Result<ContextRecord, ContextError>,
    {
        let mut inner = self.inner.write().expect("store lock");
        let timestamp = self.now();
        let (key, entity) = match parent {
            None => {
                let id = self.fresh_id(&mut inner);
                let key = ContextRef::new(id.clone(), 0);
                let record = build(&key)?;
                let e = Entity {
                    id,
                    parent: None,
                    depth: 0,
                    owner: owner.to_string(),
                    timestamp,
                    version: self.config.version_tag.clone(),
                    chain: vec![record],
                };
                (key, e)
            }
            Some(p) => {
                let unknown = || StoreError::UnknownParent(p.to_string());
                let pe = Self::entity_in(&mut inner, p.entity())?.ok_or_else(unknown)?;
                let idx = p.index() as usize;
                if idx >= pe.chain.len() {
                    return Err(unknown().into());
                }
                let extend = inner.unsealed.contains(&pe.id)
                    && pe.owner == owner
                    && idx + 1 == pe.chain.len()
                    && pe.chain.len() < self.config.chunk;
                if extend {
                    let key = ContextRef::new(pe.id.clone(), pe.chain.len() as u32);
                    let record = build(&key)?;
                    let mut e = (*pe).clone();
                    e.chain.push(record);
                    (key, e)
                } else {
                    let id = self.fresh_id(&mut inner);
                    let key = ContextRef::new(id.clone(), 0);
                    let record = build(&key)?;
                    let e = Entity {
                        id,
                        parent: Some(p.clone()),
                        depth: pe.depth + idx as u64 + 1,
                        owner: owner.to_string(),
                        timestamp,
                        version: self.config.version_tag.clone(),
                        chain: vec![record],
                    };
                    (key, e)
                }
            }
        };
        inner.backend.put(&entity_key(&entity.id), &encode_entity(&entity))?;
        inner.unsealed.insert(entity.id.clone());
        let e = Arc::new(entity);
        inner.entities.insert(e.id.clone(), e.clone());
        drop(inner);
        let ctx = Arc::new(context_of(&e, key.index() as usize));
        self.contexts.write().expect("context cache").insert(key, ctx.clone());
        Ok(ctx)
    }

    /// Closes every entity to further appends.
    pub fn seal(&self) {
        self.inner.write().expect("store lock").unsealed.clear();
    }

    pub fn entity_ids(&self) -> Vec<String> {
        let inner = self.inner.read().expect("store lock");
        inner.backend.keys(ENTITY_PREFIX).into_iter().map(|k| k[ENTITY_PREFIX.len()..].to_string()).collect()
    }

    pub fn entity_info(&self, id: &str) -> Result<Option<EntityInfo>, StoreError> {
        let Some(e) = self.entity(id)? else { return Ok(None) };
        let sealed = !self.inner.read().expect("store lock").unsealed.contains(id);
        Ok(Some(EntityInfo {
            id: e.id.clone(),
            parent: e.parent.clone(),
            depth: e.depth,
            owner: e.owner.clone(),
            timestamp: e.timestamp,
            version: e.version.clone(),
            chain_len: e.chain.len(),
            sealed,
        }))
    }

    /// Every stored context, entity by entity.
    pub fn context_refs(&self) -> Result<Vec<ContextRef>, StoreError> {
        let mut out = Vec::new();
        for id in self.entity_ids() {
            if let Some(e) = self.entity(&id)? {
                out.extend((0..e.chain.len()).map(|i| ContextRef::new(id.clone(), i as u32)));
            }
        }
        Ok(out)
    }

    pub fn get_raw(&self, key: &str) -> Option<Vec<u8>> {
        self.inner.read().expect("store lock").backend.get(key)
    }

    /// Writes an auxiliary record. Entity records can only be written through
    /// [`Store::append_context`].
    pub fn put_raw(&self, key: &str, value: &[u8]) -> Result<(), StoreError> {
        assert!(!key.starts_with(ENTITY_PREFIX), "entity records are append-only");
        self.inner.write().expect("store lock").backend.put(key, value)
    }

    pub fn delete_raw(&self, key: &str) -> Result<(), StoreError> {
        assert!(!key.starts_with(ENTITY_PREFIX), "entity records are append-only");
        self.inner.write().expect("store lock").backend.delete(key)
    }

    pub fn keys(&self, prefix: &str) -> Vec<String> {
        self.inner.read().expect("store lock").backend.keys(prefix)
    }

    /// SHA-256 over all keys and values, in key order.
    pub fn digest(&self) -> String {
        let inner = self.inner.read().expect("store lock");
        let mut h = Sha256::new();
        for (k, v) in inner.backend.snapshot() {
            h.update((k.len() as u64).to_le_bytes());
            h.update(k.as_bytes());
            h.update((v.len() as u64).to_le_bytes());
            h.update(v);
        }
        hex::encode(h.finalize())
    }
}

fn context_of(e: &Entity, index: usize) -> Context {
    let parent = if index == 0 { e.parent.clone() } else { Some(ContextRef::new(e.id.clone(), index as u32 - 1)) };
    Context::new(
        ContextRef::new(e.id.clone(), index as u32),
        parent,
        e.owner.clone(),
        e.depth as usize + index,
        e.chain[index].clone(),
    )
}

impl ContextSource for Store {
    fn load(&self, key: &ContextRef) -> Result<Arc<Context>, ContextError> {
        if let Some(c) = self.contexts.read().expect("context cache").get(key) {
            return Ok(c.clone());
        }
        let unknown = || ContextError::UnknownContext(key.to_string());
        let e = self.entity(key.entity())?.ok_or_else(unknown)?;
        let idx = key.index() as usize;
        if idx >= e.chain.len() {
            return Err(unknown());
        }
        let ctx = Arc::new(context_of(&e, idx));
        self.contexts.write().expect("context cache").insert(key.clone(), ctx.clone());
        Ok(ctx)
    }

    fn name_env(&self, key: &ContextRef) -> Result<Arc<NameEnv>, ContextError> {
        if let Some(env) = self.envs.read().expect("env cache").get(key) {
            return Ok(env.clone());
        }
        let ctx = self.load(key)?;
        let env = match ctx.parent() {
            None => Arc::new(NameEnv::new().extended(ctx.constants())),
            Some(p) if ctx.constants().is_empty() => self.name_env(p)?,
            Some(p) => Arc::new(self.name_env(p)?.extended(ctx.constants())),
        };
        self.envs.write().expect("env cache").insert(key.clone(), env.clone());
        Ok(env)
    }
}
