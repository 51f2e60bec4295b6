use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{Review, StoreError, TrailRecord};

pub const SNAPSHOT_VERSION: u32 = 1;

/// Full persisted state of a [`TrailStore`](super::TrailStore).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub version: u32,
    pub last_trail_id: u64,
    pub last_review_id: u64,
    pub trails: Vec<TrailRecord>,
    pub reviews: Vec<Review>,
}

/// Durable backing for the store. `save` must be atomic: after it returns,
/// a later `load` sees either the old or the new snapshot, never a mix.
pub trait Storage: Send + Sync {
    fn load(&self) -> Result<Option<Snapshot>, StoreError>;
    fn save(&self, snapshot: &Snapshot) -> Result<(), StoreError>;
}

/// Volatile storage; keeps the last saved snapshot in memory.
#[derive(Default)]
pub struct MemoryStorage {
    last: Mutex<Option<Snapshot>>,
}

impl Storage for MemoryStorage {
    fn load(&self) -> Result<Option<Snapshot>, StoreError> {
        Ok(self.last.lock().unwrap_or_else(|e| e.into_inner()).clone())
    }

    fn save(&self, snapshot: &Snapshot) -> Result<(), StoreError> {
        *self.last.lock().unwrap_or_else(|e| e.into_inner()) = Some(snapshot.clone());
        Ok(())
    }
}

/// Single JSON file, replaced atomically through a sibling temp file.
pub struct FileStorage {
    path: PathBuf,
}

impl FileStorage {
    pub fn new(path: impl Into<PathBuf>) -> Self {
        Self { path: path.into() }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }
}

impl Storage for FileStorage {
    fn load(&self) -> Result<Option<Snapshot>, StoreError> {
        let bytes = match std::fs::read(&self.path) {
            Ok(b) => b,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let snap: Snapshot =
            serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt(format!("{}: {e}", self.path.display())))?;
        if snap.version != SNAPSHOT_VERSION {
            return Err(StoreError::Corrupt(format!(
                "{}: unsupported snapshot version {}",
                self.path.display(),
                snap.version
            )));
        }
        Ok(Some(snap))
    }

    fn save(&self, snapshot: &Snapshot) -> Result<(), StoreError> {
        let dir = match self.path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer(&mut tmp, snapshot).map_err(|e| StoreError::Io(std::io::Error::other(e)))?;
        tmp.flush()?;
        tmp.as_file().sync_all()?;
        tmp.persist(&self.path).map_err(|e| StoreError::Io(e.error))?;
        Ok(())
    }
}
