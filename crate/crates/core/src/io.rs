//! JSONL and snapshot file helpers. Writes go to a temp file in the target
//! directory and are renamed into place.

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl IoError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        IoError::Io { path: path.to_path_buf(), source }
    }
}

/// Serialize with object keys sorted at every level.
pub fn to_canonical_json<T: Serialize>(value: &T) -> Result<serde_json::Value, serde_json::Error> {
    // serde_json::Map is a BTreeMap unless `preserve_order` is enabled.
    serde_json::to_value(value)
}

pub fn canonical_line<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    serde_json::to_string(&to_canonical_json(value)?)
}

pub fn canonical_pretty<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut s = serde_json::to_string_pretty(&to_canonical_json(value)?)?;
    s.push('\n');
    Ok(s)
}

/// Atomically replace `path` with `contents`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| IoError::io(path, e))?;
    tmp.write_all(contents).map_err(|e| IoError::io(path, e))?;
    tmp.flush().map_err(|e| IoError::io(path, e))?;
    tmp.persist(path).map_err(|e| IoError::io(path, e.error))?;
    Ok(())
}

pub fn write_jsonl<T: Serialize>(path: &Path, items: &[T]) -> Result<(), IoError> {
    let mut buf = String::new();
    for item in items {
        buf.push_str(&canonical_line(item)?);
        buf.push('\n');
    }
    write_atomic(path, buf.as_bytes())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    write_atomic(path, canonical_pretty(value)?.as_bytes())
}

/// Read every non-blank line; any malformed line is an error.
pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let (items, skipped) = read_jsonl_lenient(path)?;
    match skipped.into_iter().next() {
        Some((line, message)) => Err(IoError::Parse { path: path.to_path_buf(), line, message }),
        None => Ok(items),
    }
}

/// Parsed items plus `(line number, message)` for each rejected line.
pub type Lenient<T> = (Vec<T>, Vec<(usize, String)>);

/// Read every non-blank line, collecting `(line number, message)` for
/// lines that fail to parse.
pub fn read_jsonl_lenient<T: DeserializeOwned>(
    path: &Path,
) -> Result<Lenient<T>, IoError> {
    let file = fs::File::open(path).map_err(|e| IoError::io(path, e))?;
    let mut items = Vec::new();
    let mut skipped = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| IoError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(&line) {
            Ok(v) => items.push(v),
            Err(e) => skipped.push((idx + 1, e.to_string())),
        }
    }
    Ok((items, skipped))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}
