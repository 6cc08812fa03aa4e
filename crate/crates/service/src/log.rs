//! Append-only interaction log.

use std::fs::{File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use crate::wire::InteractionEvent;

#[derive(Serialize)]
struct Line<'a> {
    received_at: u64,
    #[serde(flatten)]
    event: &'a InteractionEvent,
}

struct Inner {
    file: File,
    last: u64,
}

/// One JSON object per line, in receive order. `received_at` (server
/// milliseconds) never decreases, even if the wall clock steps back.
pub struct EventLog {
    path: PathBuf,
    inner: Mutex<Inner>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_millis() as u64)
}

impl EventLog {
    pub fn open(path: impl AsRef<Path>) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(Self {
            path,
            inner: Mutex::new(Inner { file, last: 0 }),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, event: &InteractionEvent) -> io::Result<u64> {
        let mut inner = self.inner.lock().unwrap_or_else(|p| p.into_inner());
        let received_at = now_ms().max(inner.last);
        let mut line = serde_json::to_string(&Line { received_at, event })?;
        line.push('\n');
        inner.file.write_all(line.as_bytes())?;
        inner.file.flush()?;
        inner.last = received_at;
        Ok(received_at)
    }
}
