//! Reference flipping sequences for n = 61, 53 and 57, stored as full state
//! traces. The files under `corpus/` are embedded; [`load_from_dir`] reads an
//! on-disk copy instead.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

use crate::verify::{Trace, TraceParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusId {
    A61,
    B53,
    C57,
}

impl CorpusId {
    pub const ALL: [CorpusId; 3] = [CorpusId::A61, CorpusId::B53, CorpusId::C57];

    pub fn n(self) -> usize {
        match self {
            CorpusId::A61 => 61,
            CorpusId::B53 => 53,
            CorpusId::C57 => 57,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CorpusId::A61 => "a61",
            CorpusId::B53 => "b53",
            CorpusId::C57 => "c57",
        }
    }

    fn embedded(self) -> &'static str {
        match self {
            CorpusId::A61 => include_str!("../corpus/a61.trace"),
            CorpusId::B53 => include_str!("../corpus/b53.trace"),
            CorpusId::C57 => include_str!("../corpus/c57.trace"),
        }
    }
}

impl fmt::Display for CorpusId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorpusId {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, CorpusError> {
        CorpusId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| CorpusError::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unknown corpus id {0:?} (expected a61, b53 or c57)")]
    UnknownId(String),
    #[error("corpus {id}: {source}")]
    Parse { id: CorpusId, source: TraceParseError },
    #[error("corpus {id}: {msg}")]
    Invalid { id: CorpusId, msg: String },
    #[error("corpus {id}: {source}")]
    Io { id: CorpusId, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusEntry {
    pub id: CorpusId,
    pub n: usize,
    pub trace: Trace,
}

impl CorpusEntry {
    pub fn flips(&self) -> &[usize] {
        &self.trace.flips
    }
}

fn check(id: CorpusId, trace: Trace) -> Result<CorpusEntry, CorpusError> {
    let invalid = |msg: String| CorpusError::Invalid { id, msg };
    let n = id.n();
    if trace.n() != n {
        return Err(invalid(format!("trace is for n = {}, expected {n}", trace.n())));
    }
    if trace.flips.len() != (3 * n + 3) / 2 {
        return Err(invalid(format!("{} flips, expected {}", trace.flips.len(), (3 * n + 3) / 2)));
    }
    if let Some(i) = trace.first_inconsistency() {
        return Err(invalid(format!("state after flip #{i} does not follow from the flip")));
    }
    if trace.states[0].entries().iter().zip(1..).any(|(&v, i): (&i32, i32)| v != -i) {
        return Err(invalid("trace does not start from -I_n".into()));
    }
    if !trace.final_state().is_sorted() {
        return Err(invalid("trace does not end sorted".into()));
    }
    Ok(CorpusEntry { id, n, trace })
}

/// Parses and checks an embedded entry.
pub fn load(id: CorpusId) -> Result<CorpusEntry, CorpusError> {
    let trace = Trace::parse_text(id.embedded()).map_err(|source| CorpusError::Parse { id, source })?;
    check(id, trace)
}

/// Reads `<dir>/<id>.trace`.
pub fn load_from_dir(dir: &Path, id: CorpusId) -> Result<CorpusEntry, CorpusError> {
    let text = std::fs::read_to_string(dir.join(format!("{id}.trace"))).map_err(|source| CorpusError::Io { id, source })?;
    let trace = Trace::parse_text(&text).map_err(|source| CorpusError::Parse { id, source })?;
    check(id, trace)
}
