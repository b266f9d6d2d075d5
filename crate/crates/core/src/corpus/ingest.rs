//! Loading pre-fetched documents through a JSONL manifest.
//!
//! Each manifest line names one file: `{"id", "source_kind", "mime", "uri",
//! "path", "metadata"?}`. Relative paths resolve against the manifest's
//! directory.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusError, Mime, RawDocument, SourceKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub id: String,
    pub source_kind: SourceKind,
    pub mime: Mime,
    pub uri: String,
    pub path: PathBuf,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

pub fn parse_manifest(text: &str) -> Result<Vec<ManifestEntry>, CorpusError> {
    crate::jsonl::parse_jsonl(text).map_err(|e| CorpusError::Manifest(e.to_string()))
}

/// Reads every file listed in the manifest at `manifest_path`.
pub fn load_manifest(manifest_path: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let text = fs::read_to_string(manifest_path)
        .map_err(|e| CorpusError::Manifest(format!("{}: {e}", manifest_path.display())))?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    load_entries(&parse_manifest(&text)?, base)
}

pub fn load_entries(entries: &[ManifestEntry], base: &Path) -> Result<Vec<RawDocument>, CorpusError> {
    let mut ids = HashSet::new();
    let mut docs = Vec::with_capacity(entries.len());
    for entry in entries {
        if entry.id.trim().is_empty() {
            return Err(CorpusError::Manifest("entry with empty id".into()));
        }
        if !ids.insert(entry.id.as_str()) {
            return Err(CorpusError::Manifest(format!("duplicate id `{}`", entry.id)));
        }
        let path = if entry.path.is_absolute() { entry.path.clone() } else { base.join(&entry.path) };
        let body = fs::read_to_string(&path).map_err(|e| CorpusError::Manifest(format!("{}: {e}", path.display())))?;
        if body.trim().is_empty() {
            return Err(CorpusError::Manifest(format!("document `{}` has an empty body", entry.id)));
        }
        docs.push(RawDocument {
            id: entry.id.clone(),
            source_kind: entry.source_kind,
            mime: entry.mime,
            uri: entry.uri.clone(),
            body,
            metadata: entry.metadata.clone(),
        });
    }
    Ok(docs)
}
