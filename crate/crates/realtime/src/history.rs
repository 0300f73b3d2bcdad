//! Append-only cycle history, persisted as one JSON record per line.

use std::collections::VecDeque;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use nca_core::contingency::ViolationCounts;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Two years of milliseconds.
pub const DEFAULT_RETENTION_MS: u64 = 2 * 365 * 24 * 3600 * 1000;

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("history file {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("history file {path} line {line}: {source}")]
    Corrupt {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("record timestamp {got} is not after {last}")]
    NotIncreasing { last: u64, got: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub timestamp_ms: u64,
    pub sequence: u64,
    pub total_load_mw: f64,
    /// Lowest monitored bus in the base case.
    pub worst_bus: Option<String>,
    pub worst_voltage_pct: Option<f64>,
    pub top_contingency: Option<String>,
    pub top_severity_index: f64,
    pub counts: ViolationCounts,
}

#[derive(Debug)]
pub struct HistoryStore {
    path: Option<PathBuf>,
    file: Option<File>,
    records: VecDeque<HistoryRecord>,
    pub retention_ms: u64,
}

impl HistoryStore {
    pub fn in_memory(retention_ms: u64) -> Self {
        Self {
            path: None,
            file: None,
            records: VecDeque::new(),
            retention_ms,
        }
    }

    /// Opens `path`, replaying any records already there. A torn final line
    /// (crash mid-write) is dropped; corruption elsewhere is an error.
    pub fn open(path: &Path, retention_ms: u64) -> Result<Self, HistoryError> {
        let io = |source| HistoryError::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut records = VecDeque::new();
        if path.exists() {
            let lines: Vec<String> = BufReader::new(File::open(path).map_err(io)?)
                .lines()
                .collect::<Result<_, _>>()
                .map_err(io)?;
            let last = lines.len();
            for (n, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<HistoryRecord>(line) {
                    Ok(r) => records.push_back(r),
                    Err(_) if n + 1 == last => log::warn!("dropping torn last line of {}", path.display()),
                    Err(source) => {
                        return Err(HistoryError::Corrupt {
                            path: path.to_path_buf(),
                            line: n + 1,
                            source,
                        })
                    }
                }
            }
        }
        let mut store = Self {
            path: Some(path.to_path_buf()),
            file: None,
            records,
            retention_ms,
        };
        // Rewrite once so the file holds exactly the replayed records.
        store.rewrite()?;
        Ok(store)
    }

    fn rewrite(&mut self) -> Result<(), HistoryError> {
        let Some(path) = &self.path else { return Ok(()) };
        let io = |source| HistoryError::Io {
            path: path.clone(),
            source,
        };
        let tmp = path.with_extension("tmp");
        {
            let mut f = File::create(&tmp).map_err(io)?;
            for r in &self.records {
                writeln!(f, "{}", serde_json::to_string(r).expect("record serializes")).map_err(io)?;
            }
            f.sync_all().map_err(io)?;
        }
        std::fs::rename(&tmp, path).map_err(io)?;
        self.file = Some(OpenOptions::new().append(true).open(path).map_err(io)?);
        Ok(())
    }

    pub fn last_timestamp(&self) -> Option<u64> {
        self.records.back().map(|r| r.timestamp_ms)
    }

    pub fn last_sequence(&self) -> Option<u64> {
        self.records.back().map(|r| r.sequence)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends and flushes `record`, then trims anything older than the
    /// retention window measured from it.
    pub fn append(&mut self, record: HistoryRecord) -> Result<(), HistoryError> {
        if let Some(last) = self.last_timestamp() {
            if record.timestamp_ms <= last {
                return Err(HistoryError::NotIncreasing {
                    last,
                    got: record.timestamp_ms,
                });
            }
        }
        if let (Some(f), Some(path)) = (&mut self.file, &self.path) {
            let line = serde_json::to_string(&record).expect("record serializes");
            writeln!(f, "{line}")
                .and_then(|_| f.flush())
                .map_err(|source| HistoryError::Io {
                    path: path.clone(),
                    source,
                })?;
        }
        let now = record.timestamp_ms;
        self.records.push_back(record);
        self.trim(now)
    }

    /// Drops records older than `now − retention`.
    pub fn trim(&mut self, now_ms: u64) -> Result<(), HistoryError> {
        let horizon = now_ms.saturating_sub(self.retention_ms);
        let before = self.records.len();
        while self.records.front().is_some_and(|r| r.timestamp_ms < horizon) {
            self.records.pop_front();
        }
        if self.records.len() != before {
            self.rewrite()?;
        }
        Ok(())
    }

    /// Records with `from ≤ timestamp ≤ to`, oldest first.
    pub fn query(&self, from_ms: u64, to_ms: u64) -> Vec<HistoryRecord> {
        self.records
            .iter()
            .filter(|r| (from_ms..=to_ms).contains(&r.timestamp_ms))
            .cloned()
            .collect()
    }
}
