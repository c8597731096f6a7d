use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::{GenerationRecord, InferenceConfig, ReplayBackend, ReplayEntry, TaskInput};
use crate::corpus::ConventionSpec;
use crate::prompts::Language;
use crate::syntax::{parse_routine, print_routine};
use crate::transforms::{TaskKind, TaskRequest, TransformPolicy};

/// Schema version of run logs.
pub const LOG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunInput {
    pub id: String,
    /// Canonical routine texts.
    pub routines: Vec<String>,
    pub request: TaskRequest,
}

impl From<&TaskInput> for RunInput {
    fn from(i: &TaskInput) -> Self {
        Self { id: i.id.clone(), routines: i.routines.iter().map(print_routine).collect(), request: i.request.clone() }
    }
}

/// First line of a run log: everything needed to replay the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub version: u32,
    pub task: TaskKind,
    pub language: Language,
    pub backend: String,
    pub seed: u64,
    pub max_attempts: Option<usize>,
    pub inference: InferenceConfig,
    pub convention: ConventionSpec,
    pub policy: TransformPolicy,
    pub inputs: Vec<RunInput>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LogLine {
    Header(Box<RunHeader>),
    Generation(Box<GenerationRecord>),
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
}

/// Append-only log writer; each line is written whole under a lock.
pub struct RunLogWriter {
    path: String,
    out: Mutex<BufWriter<File>>,
}

impl RunLogWriter {
    pub fn create(path: &Path, header: &RunHeader) -> Result<Self, LogError> {
        let file = File::create(path)
            .map_err(|e| LogError::Io { path: path.display().to_string(), message: e.to_string() })?;
        let writer = Self { path: path.display().to_string(), out: Mutex::new(BufWriter::new(file)) };
        writer.append(&LogLine::Header(Box::new(header.clone())))?;
        Ok(writer)
    }

    pub fn append(&self, line: &LogLine) -> Result<(), LogError> {
        let text = serde_json::to_string(line).expect("log lines serialize");
        let mut out = self.out.lock().unwrap_or_else(|p| p.into_inner());
        writeln!(out, "{text}")
            .and_then(|_| out.flush())
            .map_err(|e| LogError::Io { path: self.path.clone(), message: e.to_string() })
    }
}

/// A parsed run log.
#[derive(Debug, Clone, PartialEq)]
pub struct RunLog {
    pub header: RunHeader,
    pub records: Vec<GenerationRecord>,
}

impl RunLog {
    pub fn read(path: &Path) -> Result<Self, LogError> {
        let io = |e: std::io::Error| LogError::Io { path: path.display().to_string(), message: e.to_string() };
        let reader = BufReader::new(File::open(path).map_err(io)?);
        let mut header = None;
        let mut records = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: LogLine =
                serde_json::from_str(&line).map_err(|e| LogError::Malformed { line: i + 1, message: e.to_string() })?;
            match parsed {
                LogLine::Header(h) if header.is_none() && i == 0 => {
                    if h.version != LOG_VERSION {
                        return Err(LogError::Malformed {
                            line: 1,
                            message: format!("unsupported log version {}", h.version),
                        });
                    }
                    header = Some(*h);
                }
                LogLine::Header(_) => {
                    return Err(LogError::Malformed { line: i + 1, message: "header must be the first line".into() })
                }
                LogLine::Generation(r) => records.push(*r),
            }
        }
        let header = header.ok_or(LogError::Malformed { line: 1, message: "missing header".into() })?;
        Ok(Self { header, records })
    }

    /// Inputs recorded in the header.
    pub fn task_inputs(&self) -> Result<Vec<TaskInput>, LogError> {
        self.header
            .inputs
            .iter()
            .map(|i| {
                let routines = i
                    .routines
                    .iter()
                    .map(|t| parse_routine(t).map(|r| r.canonical()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| LogError::Malformed { line: 1, message: format!("input `{}`: {e}", i.id) })?;
                Ok(TaskInput { id: i.id.clone(), routines, request: i.request.clone() })
            })
            .collect()
    }

    /// Backend answering every logged call with its logged outcome.
    pub fn replay_backend(&self) -> ReplayBackend {
        ReplayBackend::new(self.records.iter().filter_map(|r| {
            let entry = match (&r.raw_text, &r.error) {
                (Some(t), _) => ReplayEntry::Text(t.clone()),
                (None, Some(e)) => ReplayEntry::Error(e.clone()),
                (None, None) => return None,
            };
            Some((r.key(), entry))
        }))
    }
}
