use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use super::StoreError;

/// Magic bytes at the start of every store file, followed by a `u32`
/// format version to make up the 16-byte header.
pub const FILE_MAGIC: &[u8; 12] = b"PEERHOLSTORE";
pub const FILE_VERSION: u32 = 1;
const TOMBSTONE: u32 = u32::MAX;

/// Key-value persistence underneath the store. Writes append; the latest
/// write for a key wins.
pub trait Backend: Send + Sync {
    fn get(&self, key: &str) -> Option<Vec<u8>>;
    fn put(&mut self, key: &str, value: &[u8]) -> Result<(), StoreError>;
    fn delete(&mut self, key: &str) -> Result<(), StoreError>;
    fn keys(&self, prefix: &str) -> Vec<String>;
    /// Current contents, sorted by key.
    fn snapshot(&self) -> &BTreeMap<String, Vec<u8>>;
}

#[derive(Default)]
pub struct MemoryBackend {
    map: BTreeMap<String, Vec<u8>>,
}

impl MemoryBackend {
    pub fn new() -> MemoryBackend {
        MemoryBackend::default()
    }
}

impl Backend for MemoryBackend {
    fn get(&self, key: &str) -> Option<Vec<u8>> {
        self.map.get(key).cloned()
    }

    fn put(&mut self, key: &str, value: &[u8]) -> Result<(), StoreError> {
        self.map.insert(key.to_string(), value.to_vec());
        Ok(())
    }

    fn delete(&mut self, key: &str) -> Result<(), StoreError> {
        self.map.remove(key);
        Ok(())
    }

    fn keys(&self, prefix: &str) -> Vec<String> {
        self.map.range(prefix.to_string()..).take_while(|(k, _)| k.starts_with(prefix)).map(|(k, _)| k.clone()).collect()
    }

    fn snapshot(&self) -> &BTreeMap<String, Vec<u8>> {
        &self.map
    }
}

/// Single-file log: a header, then `[u32 key length][key][u32 value
/// length][value]` records. A value length of `u32::MAX` marks a deletion.
pub struct FileBackend {
    path: PathBuf,
    file: File,
    mem: MemoryBackend,
}

fn io(e: std::io::Error) -> StoreError {
    StoreError::Io(e.to_string())
}

impl FileBackend {
    pub fn open(path: &Path) -> Result<FileBackend, StoreError> {
        let exists = path.exists() && std::fs::metadata(path).map_err(io)?.len() > 0;
        let mut mem = MemoryBackend::new();
        if exists {
            let mut r = BufReader::new(File::open(path).map_err(io)?);
            let mut header = [0u8; 16];
            r.read_exact(&mut header).map_err(|_| StoreError::Format("file too short for a header".into()))?;
            if &header[..12] != FILE_MAGIC {
                return Err(StoreError::Format("not a store file".into()));
            }
            let v = u32::from_le_bytes(header[12..].try_into().expect("4 bytes"));
            if v != FILE_VERSION {
                return Err(StoreError::Format(format!("unsupported store file version {v}")));
            }
            let mut data = Vec::new();
            r.read_to_end(&mut data).map_err(io)?;
            let mut at = 0usize;
            let take = |at: &mut usize, n: usize| -> Result<&[u8], StoreError> {
                let end = at.checked_add(n).filter(|e| *e <= data.len()).ok_or_else(|| {
                    StoreError::Format(format!("truncated record at byte {}", 16 + *at))
                })?;
                let s = &data[*at..end];
                *at = end;
                Ok(s)
            };
            while at < data.len() {
                let kl = u32::from_le_bytes(take(&mut at, 4)?.try_into().expect("4 bytes")) as usize;
                let key = String::from_utf8(take(&mut at, kl)?.to_vec())
                    .map_err(|_| StoreError::Format("key is not UTF-8".into()))?;
                let vl = u32::from_le_bytes(take(&mut at, 4)?.try_into().expect("4 bytes"));
                if vl == TOMBSTONE {
                    mem.map.remove(&key);
                } else {
                    let v = take(&mut at, vl as usize)?.to_vec();
                    mem.map.insert(key, v);
                }
            }
        }
        let mut file = OpenOptions::new().create(true).append(true).open(path).map_err(io)?;
        if !exists {
            let mut header = FILE_MAGIC.to_vec();
            header.extend_from_slice(&FILE_VERSION.to_le_bytes());
            file.write_all(&header).map_err(io)?;
            file.flush().map_err(io)?;
        }
        Ok(FileBackend { path: path.to_path_buf(), file, mem })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn append(&mut self, key: &str, value: Option<&[u8]>) -> Result<(), StoreError> {
        let mut rec = Vec::with_capacity(8 + key.len() + value.map_or(0, <[u8]>::len));
        rec.extend_from_slice(&(key.len() as u32).to_le_bytes());
        rec.extend_from_slice(key.as_bytes());
        match value {
            Some(v) => {
                rec.extend_from_slice(&(v.len() as u32).to_le_bytes());
                rec.extend_from_slice(v);
            }
            None => rec.extend_from_slice(&TOMBSTONE.to_le_bytes()),
        }
        self.file.write_all(&rec).map_err(io)?;
        self.file.flush().map_err(io)
    }
}

impl Backend for FileBackend {
    fn get(&self, key: &str) -> Option<Vec<u8>> {
        self.mem.get(key)
    }

    fn put(&mut self, key: &str, value: &[u8]) -> Result<(), StoreError> {
        self.append(key, Some(value))?;
        self.mem.put(key, value)
    }

    fn delete(&mut self, key: &str) -> Result<(), StoreError> {
        self.append(key, None)?;
        self.mem.delete(key)
    }

    fn keys(&self, prefix: &str) -> Vec<String> {
        self.mem.keys(prefix)
    }

    fn snapshot(&self) -> &BTreeMap<String, Vec<u8>> {
        self.mem.snapshot()
    }
}
