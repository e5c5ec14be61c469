//! Reading documents and stimuli from disk.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use sysmodel_core::dsl::{parse_stimuli, parse_with_extension, Document, ParseError, Stimulus};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}:{source}")]
    Parse {
        path: String,
        #[source]
        source: ParseError,
    },
    #[error("{0}: no file extension to tell the document kind")]
    NoExtension(String),
}

pub fn read(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.to_path_buf(), source })
}

/// Parses `path` as the document kind named by its extension. `id` is the
/// name used in diagnostics.
pub fn load_document(path: &Path, id: &str) -> Result<Document, LoadError> {
    let ext = path.extension().and_then(|e| e.to_str()).ok_or_else(|| LoadError::NoExtension(id.to_owned()))?;
    let text = read(path)?;
    parse_with_extension(id, ext, &text).map_err(|source| LoadError::Parse { path: id.to_owned(), source })
}

pub fn load_stimuli(path: &Path) -> Result<Vec<Stimulus>, LoadError> {
    let text = read(path)?;
    parse_stimuli(&text).map_err(|source| LoadError::Parse { path: path.display().to_string(), source })
}

/// Writes through a sibling temporary file and a rename, so readers see
/// either the old or the new content.
pub fn write_atomic(path: &Path, content: &str) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })
}
