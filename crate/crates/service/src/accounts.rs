//! Users and sessions. Both live in the engine's store, under `usr/` and
//! `ses/`; the session table is also kept in memory.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use argon2::password_hash::rand_core::OsRng;
use argon2::password_hash::{PasswordHash, PasswordHasher, PasswordVerifier, SaltString};
use argon2::Argon2;
use peerhol::chronicle::{is_valid_name, ROOT_OWNER};
use peerhol::store::Store;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const USER_PREFIX: &str = "usr/";
const SESSION_PREFIX: &str = "ses/";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuthError {
    /// Deliberately the same for unknown users and wrong passwords.
    #[error("invalid login or password")]
    Failure,
    #[error("login '{0}' is taken")]
    Taken(String),
    #[error("invalid login: {0}")]
    InvalidLogin(String),
    #[error("storage failure: {0}")]
    Storage(String),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct User {
    pub login: String,
    /// PHC string: argon2id with its salt and parameters.
    pub password_hash: String,
    pub created: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    pub id: String,
    pub login: String,
    pub created: u64,
    /// Kept in memory only.
    #[serde(skip)]
    pub last_seen: u64,
}

pub fn now_millis() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

fn hasher() -> Argon2<'static> {
    // argon2id, 19 MiB, 2 passes, 1 lane
    Argon2::default()
}

pub struct Accounts {
    idle: u64,
    // token -> session; the lock also serializes registration
    sessions: Mutex<HashMap<String, Session>>,
}

impl Accounts {
    /// Loads the persisted sessions. A restart counts as activity.
    pub fn load(store: &Store, idle: Duration, now: u64) -> Accounts {
        let mut sessions = HashMap::new();
        for key in store.keys(SESSION_PREFIX) {
            let Some(bytes) = store.get_raw(&key) else { continue };
            match serde_json::from_slice::<Session>(&bytes) {
                Ok(mut s) => {
                    s.last_seen = now;
                    sessions.insert(s.id.clone(), s);
                }
                Err(e) => log::warn!("ignoring unreadable session {key}: {e}"),
            }
        }
        Accounts { idle: idle.as_millis() as u64, sessions: Mutex::new(sessions) }
    }

    fn table(&self) -> std::sync::MutexGuard<'_, HashMap<String, Session>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn user(store: &Store, login: &str) -> Option<User> {
        serde_json::from_slice(&store.get_raw(&format!("{USER_PREFIX}{login}"))?).ok()
    }

    pub fn register(&self, store: &Store, login: &str, password: &str, now: u64) -> Result<(), AuthError> {
        if !is_valid_name(login) || login == ROOT_OWNER {
            return Err(AuthError::InvalidLogin(login.to_string()));
        }
        let salt = SaltString::generate(&mut OsRng);
        let hash = hasher()
            .hash_password(password.as_bytes(), &salt)
            .map_err(|e| AuthError::Storage(e.to_string()))?
            .to_string();
        let _t = self.table();
        if Self::user(store, login).is_some() {
            return Err(AuthError::Taken(login.to_string()));
        }
        let user = User { login: login.to_string(), password_hash: hash, created: now };
        let bytes = serde_json::to_vec(&user).map_err(|e| AuthError::Storage(e.to_string()))?;
        store.put_raw(&format!("{USER_PREFIX}{login}"), &bytes).map_err(|e| AuthError::Storage(e.to_string()))
    }

    fn verify(store: &Store, login: &str, password: &str) -> bool {
        match Self::user(store, login) {
            Some(u) => PasswordHash::new(&u.password_hash)
                .map(|h| hasher().verify_password(password.as_bytes(), &h).is_ok())
                .unwrap_or(false),
            None => {
                // spend the same effort as for a real user
                let salt = SaltString::generate(&mut OsRng);
                let _ = hasher().hash_password(password.as_bytes(), &salt);
                false
            }
        }
    }

    fn live(&self, s: &Session, now: u64) -> bool {
        now.saturating_sub(s.last_seen) <= self.idle
    }

    /// Returns the user's live session if there is one, otherwise opens a new
    /// one. A user never has two live sessions.
    pub fn login(&self, store: &Store, login: &str, password: &str, now: u64) -> Result<String, AuthError> {
        if !Self::verify(store, login, password) {
            return Err(AuthError::Failure);
        }
        let mut table = self.table();
        let mine: Vec<String> = table.values().filter(|s| s.login == login).map(|s| s.id.clone()).collect();
        for id in mine {
            if self.live(&table[&id], now) {
                table.get_mut(&id).expect("present").last_seen = now;
                return Ok(id);
            }
            table.remove(&id);
            let _ = store.delete_raw(&format!("{SESSION_PREFIX}{id}"));
        }
        let id = format!("{:032x}", rand::random::<u128>());
        let session = Session { id: id.clone(), login: login.to_string(), created: now, last_seen: now };
        let bytes = serde_json::to_vec(&session).map_err(|e| AuthError::Storage(e.to_string()))?;
        store.put_raw(&format!("{SESSION_PREFIX}{id}"), &bytes).map_err(|e| AuthError::Storage(e.to_string()))?;
        table.insert(id.clone(), session);
        Ok(id)
    }

    /// The login behind a live session token, refreshing its idle timer.
    pub fn check(&self, store: &Store, token: &str, now: u64) -> Option<String> {
        let mut table = self.table();
        let s = table.get_mut(token)?;
        if now.saturating_sub(s.last_seen) <= self.idle {
            s.last_seen = now;
            return Some(s.login.clone());
        }
        table.remove(token);
        let _ = store.delete_raw(&format!("{SESSION_PREFIX}{token}"));
        None
    }

    /// Idempotent; unknown tokens are ignored.
    pub fn logout(&self, store: &Store, token: &str) {
        if self.table().remove(token).is_some() {
            let _ = store.delete_raw(&format!("{SESSION_PREFIX}{token}"));
        }
    }

    pub fn session_count(&self) -> usize {
        self.table().len()
    }
}
