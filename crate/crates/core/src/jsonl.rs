//! Line-delimited JSON helpers shared by every on-disk format.
//!
//! Files written by the pipeline may start with a metadata line of the form
//! `{"_meta": {...}}`. Readers skip such lines.

use std::io::{BufRead, Write};

use serde::de::DeserializeOwned;
use serde::Serialize;

/// Key marking a run-metadata header line.
pub const META_KEY: &str = "_meta";

#[derive(Debug, thiserror::Error)]
pub enum JsonlError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

/// Returns true when `line` is a metadata header rather than a data row.
pub fn is_meta_line(line: &str) -> bool {
    let trimmed = line.trim_start();
    trimmed.starts_with("{\"_meta\"")
}

pub fn read_jsonl<T: DeserializeOwned, R: BufRead>(reader: R) -> Result<Vec<T>, JsonlError> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || is_meta_line(&line) {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|source| JsonlError::Parse {
            line: idx + 1,
            source,
        })?;
        out.push(value);
    }
    Ok(out)
}

pub fn parse_jsonl<T: DeserializeOwned>(text: &str) -> Result<Vec<T>, JsonlError> {
    read_jsonl(text.as_bytes())
}

pub fn write_jsonl<'a, T, W, I>(mut writer: W, items: I) -> Result<(), JsonlError>
where
    T: Serialize + 'a,
    W: Write,
    I: IntoIterator<Item = &'a T>,
{
    for item in items {
        serde_json::to_writer(&mut writer, item)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn to_jsonl_string<'a, T, I>(items: I) -> Result<String, JsonlError>
where
    T: Serialize + 'a,
    I: IntoIterator<Item = &'a T>,
{
    let mut buf = Vec::new();
    write_jsonl(&mut buf, items)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}
