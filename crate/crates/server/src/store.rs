//! One `.aic.json` document per session in a storage directory.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use aic_core::document::{read_session_file, write_atomic, FILE_EXTENSION};
use aic_core::session::is_valid_session_id;
use aic_core::{save_session, Clock, Error, Mutation, Result, Session, SessionConfig};

pub struct Store {
    dir: PathBuf,
    clock: Arc<dyn Clock>,
    locks: Mutex<HashMap<String, Arc<tokio::sync::Mutex<()>>>>,
}

impl Store {
    pub fn new(dir: impl Into<PathBuf>, clock: Arc<dyn Clock>) -> Self {
        Store {
            dir: dir.into(),
            clock,
            locks: Mutex::new(HashMap::new()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}{FILE_EXTENSION}"))
    }

    fn lock_for(&self, id: &str) -> Arc<tokio::sync::Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(id.to_owned()).or_default().clone()
    }

    fn not_found(id: &str) -> Error {
        Error::NotFound {
            what: "session",
            id: id.to_owned(),
        }
    }

    /// Creates and stores a new session; returns its document bytes.
    pub fn create(&self, name: &str, config: SessionConfig) -> Result<(Session, Vec<u8>)> {
        let session = Session::create(name, config)?;
        let bytes = save_session(&session);
        write_atomic(&self.path_for(session.id()), &bytes)?;
        Ok((session, bytes))
    }

    /// Stored document bytes, exactly as on disk.
    pub fn read_bytes(&self, id: &str) -> Result<Vec<u8>> {
        let path = self.checked_path(id)?;
        std::fs::read(&path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Self::not_found(id),
            _ => Error::Io { path, source: e },
        })
    }

    pub fn load(&self, id: &str) -> Result<Session> {
        let path = self.checked_path(id)?;
        if !path.exists() {
            return Err(Self::not_found(id));
        }
        Ok(read_session_file(&path)?.session)
    }

    /// Applies `mutation` if the stored session is still at `expected_version`.
    /// Mutations of one session are serialized; the document is rewritten
    /// atomically before the lock is released.
    pub async fn mutate(
        &self,
        id: &str,
        expected_version: u64,
        mutation: Mutation,
    ) -> Result<Vec<u8>> {
        self.checked_path(id)?;
        let lock = self.lock_for(id);
        let _guard = lock.lock().await;
        let mut session = self.load(id)?;
        session.apply_expected(expected_version, mutation, self.clock.now())?;
        let bytes = save_session(&session);
        write_atomic(&self.path_for(id), &bytes)?;
        Ok(bytes)
    }

    fn checked_path(&self, id: &str) -> Result<PathBuf> {
        if is_valid_session_id(id) {
            Ok(self.path_for(id))
        } else {
            Err(Self::not_found(id))
        }
    }
}
