//! On-disk checkpoint cache.
//!
//! Each entry is a state dump `<key>.csst` at full precision plus a sidecar
//! `<key>.json` holding the run key and the bookkeeping as raw `f64` bits,
//! so a cache hit reproduces a fresh run bit for bit.  A lock file
//! serialises access between processes; a mutex serialises writers within
//! one.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use critscat::scattering::{CheckpointStore, RunKey, StoredRun};
use critscat::spectral::{read_state, write_state, Precision};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Serialize, Deserialize)]
struct Sidecar {
    key: String,
    splitting_error_bits: u64,
    norm_drift_bits: u64,
    steps_taken: u64,
}

pub struct FileStore {
    dir: PathBuf,
    // Held for the lifetime of the store.
    _lock: File,
    writer: Mutex<()>,
}

impl FileStore {
    /// Opens (creating if needed) the cache in `dir`, blocking until no other
    /// process holds it.
    pub fn open(dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(dir)?;
        let lock = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(dir.join(".lock"))?;
        lock.lock()?;
        Ok(Self {
            dir: dir.to_path_buf(),
            _lock: lock,
            writer: Mutex::new(()),
        })
    }

    fn key_text(key: &RunKey) -> String {
        serde_json::to_string(key).expect("run key serialises")
    }

    fn stem(text: &str) -> String {
        format!("{:x}", Sha256::digest(text.as_bytes()))
    }

    fn try_load(&self, key: &RunKey) -> Option<StoredRun> {
        let text = Self::key_text(key);
        let stem = Self::stem(&text);
        let side: Sidecar = serde_json::from_reader(BufReader::new(File::open(self.dir.join(format!("{stem}.json"))).ok()?)).ok()?;
        if side.key != text {
            return None;
        }
        let state = read_state(BufReader::new(File::open(self.dir.join(format!("{stem}.csst"))).ok()?)).ok()?;
        if state.grid() != &key.grid {
            return None;
        }
        Some(StoredRun {
            state,
            splitting_error: f64::from_bits(side.splitting_error_bits),
            norm_drift: f64::from_bits(side.norm_drift_bits),
            steps_taken: side.steps_taken,
        })
    }

    fn write_atomic(&self, name: &str, bytes: &[u8]) -> std::io::Result<()> {
        let tmp = self.dir.join(format!("{name}.tmp"));
        {
            let mut f = BufWriter::new(File::create(&tmp)?);
            f.write_all(bytes)?;
            f.flush()?;
        }
        fs::rename(tmp, self.dir.join(name))
    }
}

impl CheckpointStore for FileStore {
    fn load(&self, key: &RunKey) -> Option<StoredRun> {
        self.try_load(key)
    }

    fn save(&self, key: &RunKey, run: &StoredRun) -> critscat::Result<()> {
        let text = Self::key_text(key);
        let stem = Self::stem(&text);
        let mut dump = Vec::new();
        write_state(&mut dump, &run.state, Precision::Complex128)?;
        let side = serde_json::to_vec_pretty(&Sidecar {
            key: text,
            splitting_error_bits: run.splitting_error.to_bits(),
            norm_drift_bits: run.norm_drift.to_bits(),
            steps_taken: run.steps_taken,
        })
        .expect("sidecar serialises");
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        // The dump goes first: a sidecar is only ever visible next to a
        // complete state.
        self.write_atomic(&format!("{stem}.csst"), &dump)
            .and_then(|_| self.write_atomic(&format!("{stem}.json"), &side))
            .map_err(|e| critscat::Error::Dump(format!("cache write in {}: {e}", self.dir.display())))
    }
}
