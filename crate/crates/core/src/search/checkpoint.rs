//! One JSON file per finished rank range, so an interrupted exhaustive run can
//! resume and skip the ranges it already covered.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{SearchError, SearchRecord};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub range_start: u64,
    pub range_end: u64,
    pub successes: Vec<SearchRecord>,
}

pub(crate) fn path_for(dir: &Path, n: usize, start: u64, end: u64) -> PathBuf {
    dir.join(format!("n{n}-{start}-{end}.json"))
}

/// The checkpoint covering exactly `start..end`, if one was written.
pub fn read(dir: &Path, n: usize, start: u64, end: u64) -> Result<Option<Checkpoint>, SearchError> {
    let path = path_for(dir, n, start, end);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(SearchError::Checkpoint { path, msg: e.to_string() }),
    };
    let cp: Checkpoint =
        serde_json::from_str(&text).map_err(|e| SearchError::Checkpoint { path: path.clone(), msg: e.to_string() })?;
    if cp.n != n || cp.range_start != start || cp.range_end != end {
        return Err(SearchError::Checkpoint { path, msg: "range does not match file name".into() });
    }
    Ok(Some(cp))
}

/// Writes through a temporary file so a crash never leaves a partial checkpoint.
pub fn write(dir: &Path, cp: &Checkpoint) -> Result<(), SearchError> {
    let path = path_for(dir, cp.n, cp.range_start, cp.range_end);
    let err = |msg: String| SearchError::Checkpoint { path: path.clone(), msg };
    fs::create_dir_all(dir).map_err(|e| err(e.to_string()))?;
    let tmp = path.with_extension("json.tmp");
    let body = serde_json::to_string(cp).map_err(|e| err(e.to_string()))?;
    fs::write(&tmp, body).map_err(|e| err(e.to_string()))?;
    fs::rename(&tmp, &path).map_err(|e| err(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn write_then_read() {
        let dir = tempfile::tempdir().unwrap();
        let cp = Checkpoint { n: 9, range_start: 0, range_end: 24, successes: vec![] };
        assert_eq!(read(dir.path(), 9, 0, 24).unwrap(), None);
        write(dir.path(), &cp).unwrap();
        assert_eq!(read(dir.path(), 9, 0, 24).unwrap(), Some(cp));
        assert_eq!(read(dir.path(), 9, 0, 23).unwrap(), None);
    }

    #[test]
    fn corrupt_file_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(path_for(dir.path(), 9, 0, 24), "{").unwrap();
        assert!(matches!(read(dir.path(), 9, 0, 24), Err(SearchError::Checkpoint { .. })));
    }
}
