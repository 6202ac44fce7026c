//! Atomic file output and CSV number formatting.

use std::io::Write;
use std::path::{Path, PathBuf};

use tempfile::NamedTempFile;

use crate::CliError;

/// 17 significant digits.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Empty field for a missing value.
pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// A file to be written under the output directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self {
            name: name.into(),
            bytes: bytes.into(),
        }
    }
}

/// Writes every artifact to a temporary file in `dir` first and renames them
/// into place only after all writes succeeded, so a failure never leaves a
/// truncated file behind.
pub fn write_all(dir: &Path, artifacts: &[Artifact]) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut staged = Vec::with_capacity(artifacts.len());
    for a in artifacts {
        let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
        tmp.write_all(&a.bytes)
            .and_then(|_| tmp.as_file().sync_all())
            .map_err(|e| CliError::io(tmp.path(), e))?;
        staged.push((tmp, dir.join(&a.name)));
    }
    let mut written = Vec::with_capacity(staged.len());
    for (tmp, path) in staged {
        tmp.persist(&path).map_err(|e| CliError::io(&path, e.error))?;
        written.push(path);
    }
    Ok(written)
}
