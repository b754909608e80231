//! Corpus ingestion: JSONL files or directories with one record per file.

use std::fs::{self, File};
use std::io::{self, BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CorpusKind {
    Jsonl,
    SdfDir,
    TextDir,
}

/// One input record. A record that could not be read carries the reason instead of a payload.
#[derive(Debug, Clone, PartialEq)]
pub struct CorpusItem {
    pub id: String,
    pub payload: Result<Value, String>,
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub(crate) fn io_error(path: &Path, e: io::Error) -> CliError {
    match e.kind() {
        io::ErrorKind::NotFound => CliError::InputNotFound(path.to_path_buf()),
        io::ErrorKind::PermissionDenied => CliError::PermissionDenied(path.to_path_buf()),
        _ => CliError::Io(format!("{}: {e}", path.display())),
    }
}

/// Directories holding any `.sdf` or `.mol` file are read as SDF, other directories as text.
pub fn detect_kind(path: &Path) -> Result<CorpusKind, CliError> {
    let meta = fs::metadata(path).map_err(|e| io_error(path, e))?;
    if !meta.is_dir() {
        return Ok(CorpusKind::Jsonl);
    }
    let has_sdf = list_dir(path)?.iter().any(|p| matches!(extension(p).as_deref(), Some("sdf" | "mol")));
    Ok(if has_sdf { CorpusKind::SdfDir } else { CorpusKind::TextDir })
}

fn extension(p: &Path) -> Option<String> {
    p.extension().map(|e| e.to_string_lossy().to_lowercase())
}

/// Regular files in lexicographic file-name order; hidden files are skipped.
fn list_dir(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    let mut files = Vec::new();
    for entry in fs::read_dir(path).map_err(|e| io_error(path, e))? {
        let entry = entry.map_err(|e| io_error(path, e))?;
        let p = entry.path();
        let hidden = entry.file_name().to_string_lossy().starts_with('.');
        if p.is_file() && !hidden {
            files.push(p);
        }
    }
    files.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    Ok(files)
}

/// Streams records from `path`.
///
/// JSONL ids come from an `"id"` field, else the 1-based line number; the payload is
/// `field` of each object, or the whole object when `field` is `None`. Directory
/// records use the file stem as id and the file text as payload. Malformed records
/// become error items; the stream continues.
pub fn load_corpus(
    path: &Path,
    kind: Option<CorpusKind>,
    field: Option<&'static str>,
) -> Result<Box<dyn Iterator<Item = CorpusItem>>, CliError> {
    let kind = match kind {
        Some(k) => k,
        None => detect_kind(path)?,
    };
    match kind {
        CorpusKind::Jsonl => {
            let file = File::open(path).map_err(|e| io_error(path, e))?;
            if file.metadata().map(|m| m.is_dir()).unwrap_or(false) {
                return Err(CliError::Io(format!("{} is a directory, expected a JSONL file", path.display())));
            }
            let lines = BufReader::new(file).lines().enumerate();
            Ok(Box::new(lines.filter_map(move |(n, line)| {
                let fallback = (n + 1).to_string();
                match line {
                    Err(e) => Some(CorpusItem { id: fallback, payload: Err(format!("unreadable line: {e}")) }),
                    Ok(l) if l.trim().is_empty() => None,
                    Ok(l) => Some(jsonl_item(&l, fallback, field)),
                }
            })))
        }
        CorpusKind::SdfDir | CorpusKind::TextDir => {
            let meta = fs::metadata(path).map_err(|e| io_error(path, e))?;
            if !meta.is_dir() {
                return Err(CliError::Io(format!("{} is not a directory", path.display())));
            }
            let files = list_dir(path)?;
            Ok(Box::new(files.into_iter().map(|p| {
                let id = p.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
                let payload = fs::read_to_string(&p).map(Value::String).map_err(|e| format!("{}: {e}", p.display()));
                CorpusItem { id, payload }
            })))
        }
    }
}

fn jsonl_item(line: &str, fallback: String, field: Option<&str>) -> CorpusItem {
    let value: Value = match serde_json::from_str(line) {
        Ok(v) => v,
        Err(e) => return CorpusItem { id: fallback, payload: Err(format!("malformed JSON: {e}")) },
    };
    let Value::Object(mut obj) = value else {
        return CorpusItem { id: fallback, payload: Err("line is not a JSON object".into()) };
    };
    let id = match obj.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => fallback,
    };
    let payload = match field {
        None => Ok(Value::Object(obj)),
        Some(f) => obj.remove(f).ok_or_else(|| format!("missing field \"{f}\"")),
    };
    CorpusItem { id, payload }
}
