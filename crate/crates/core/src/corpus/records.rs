use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Classification, CorpusEntry, NamingConvention, Origin, PositionClass};
use crate::syntax::{parse_routine, print_routine};
use crate::transforms::{TaskKind, TaskRequest};

/// Schema version written into every record.
pub const RECORD_VERSION: u32 = 1;

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusRecord {
    pub version: u32,
    pub id: String,
    pub origin: Origin,
    pub classification: Classification,
    #[serde(default)]
    pub position_classes: Vec<PositionClass>,
    pub dedup_key: String,
    /// Canonical routine text.
    pub routine_text: String,
    #[serde(default)]
    pub requests: BTreeMap<TaskKind, TaskRequest>,
    #[serde(default)]
    pub oracle_outputs: BTreeMap<TaskKind, String>,
}

impl From<&CorpusEntry> for CorpusRecord {
    fn from(e: &CorpusEntry) -> Self {
        Self {
            version: RECORD_VERSION,
            id: e.id.clone(),
            origin: e.origin.clone(),
            classification: e.classification,
            position_classes: e.position_classes.clone(),
            dedup_key: e.dedup_key.clone(),
            routine_text: print_routine(&e.routine),
            requests: e.requests.clone(),
            oracle_outputs: e.oracle_outputs.clone(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unsupported record version {version} (expected {RECORD_VERSION})")]
    Version { line: usize, version: u32 },
}

impl CorpusRecord {
    pub fn into_entry(self, line: usize, convention: &NamingConvention) -> Result<CorpusEntry, RecordError> {
        if self.version != RECORD_VERSION {
            return Err(RecordError::Version { line, version: self.version });
        }
        let routine = parse_routine(&self.routine_text)
            .map_err(|e| RecordError::Malformed { line, message: format!("routine_text: {e}") })?
            .canonical();
        let mut entry = CorpusEntry::new(self.id, routine, self.origin, convention);
        if entry.dedup_key != self.dedup_key {
            return Err(RecordError::Malformed { line, message: "dedup_key does not match routine_text".into() });
        }
        entry.classification = self.classification;
        entry.requests = self.requests;
        entry.oracle_outputs = self.oracle_outputs;
        Ok(entry)
    }
}

/// Writes one JSON record per line.
pub fn write_corpus(path: &Path, entries: &[CorpusEntry]) -> Result<(), RecordError> {
    let io = |source| RecordError::Io { path: path.display().to_string(), source };
    let mut w = BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for e in entries {
        let line = serde_json::to_string(&CorpusRecord::from(e)).expect("records serialize");
        writeln!(w, "{line}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a corpus file written by [`write_corpus`]. Blank lines are skipped.
pub fn read_corpus(path: &Path, convention: &NamingConvention) -> Result<Vec<CorpusEntry>, RecordError> {
    let io = |source| RecordError::Io { path: path.display().to_string(), source };
    let reader = BufReader::new(std::fs::File::open(path).map_err(io)?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(&line).map_err(|e| RecordError::Malformed { line: i + 1, message: e.to_string() })?;
        out.push(record.into_entry(i + 1, convention)?);
    }
    Ok(out)
}
