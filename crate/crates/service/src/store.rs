//! One append-only JSONL file per session.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use change_core::trace::{write_record, EventRecord, Trace};

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

fn io(path: &Path) -> impl FnOnce(std::io::Error) -> StoreError + '_ {
    move |source| StoreError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug)]
pub struct Store {
    dir: PathBuf,
}

impl Store {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(io(&dir))?;
        Ok(Store { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{id}.jsonl"))
    }

    fn write(&self, path: &Path, file: &mut File, records: &[EventRecord]) -> Result<(), StoreError> {
        let mut buf = Vec::new();
        for r in records {
            write_record(&mut buf, r).map_err(|e| StoreError::Format {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?;
        }
        file.write_all(&buf).map_err(io(path))?;
        file.flush().map_err(io(path))?;
        file.sync_data().map_err(io(path))
    }

    /// Starts a new log; fails if one already exists for `id`.
    pub fn create(&self, id: &str, records: &[EventRecord]) -> Result<(), StoreError> {
        let path = self.path(id);
        let mut file = OpenOptions::new()
            .write(true)
            .create_new(true)
            .open(&path)
            .map_err(io(&path))?;
        self.write(&path, &mut file, records)
    }

    /// Appends and syncs before returning.
    pub fn append(&self, id: &str, records: &[EventRecord]) -> Result<(), StoreError> {
        if records.is_empty() {
            return Ok(());
        }
        let path = self.path(id);
        let mut file = OpenOptions::new().append(true).open(&path).map_err(io(&path))?;
        self.write(&path, &mut file, records)
    }

    pub fn load(&self, id: &str) -> Result<Trace, StoreError> {
        let path = self.path(id);
        let file = File::open(&path).map_err(io(&path))?;
        Trace::read_jsonl(BufReader::new(file)).map_err(|e| StoreError::Format {
            path: path.clone(),
            message: e.to_string(),
        })
    }

    /// Ids of every stored session, sorted.
    pub fn ids(&self) -> Result<Vec<String>, StoreError> {
        let mut ids = Vec::new();
        for entry in fs::read_dir(&self.dir).map_err(io(&self.dir))? {
            let path = entry.map_err(io(&self.dir))?.path();
            if path.extension().is_some_and(|e| e == "jsonl") {
                if let Some(stem) = path.file_stem() {
                    ids.push(stem.to_string_lossy().into_owned());
                }
            }
        }
        ids.sort();
        Ok(ids)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use change_core::trace::EventKind;

    #[test]
    fn append_and_reload() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path().join("data")).unwrap();
        let mut t = Trace::new();
        t.push(None, EventKind::Completed);
        t.push(None, EventKind::StageAdvanced { stage: 2 });
        store.create("abc", &t.events()[..1]).unwrap();
        assert!(store.create("abc", &t.events()[..1]).is_err());
        store.append("abc", &t.events()[1..]).unwrap();
        assert_eq!(store.load("abc").unwrap(), t);
        assert_eq!(store.ids().unwrap(), vec!["abc".to_string()]);
        assert!(store.append("missing", t.events()).is_err());
    }
}
