//! Tables file: a version line, a checksum line, then the JSON body.

use sha2::{Digest, Sha256};
use thiserror::Error;

use super::ParseTables;

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "uglr-tables";

#[derive(Debug, Error)]
pub enum TableError {
    #[error("tables file version {found} is not supported (expected {FORMAT_VERSION})")]
    Version { found: String },
    #[error("tables file checksum mismatch")]
    Checksum,
    #[error("malformed tables file: {0}")]
    Format(String),
}

fn digest(body: &str) -> String {
    hex::encode(Sha256::digest(body.as_bytes()))
}

/// Deterministic: identical tables give byte-identical output.
pub fn serialize_tables(t: &ParseTables) -> String {
    let body = serde_json::to_string_pretty(t).expect("tables serialize");
    format!("{MAGIC} {FORMAT_VERSION}\nsha256 {}\n{body}\n", digest(&body))
}

pub fn deserialize_tables(text: &str) -> Result<ParseTables, TableError> {
    let mut parts = text.splitn(3, '\n');
    let header = parts.next().unwrap_or_default();
    let version = header
        .strip_prefix(MAGIC)
        .map(str::trim)
        .ok_or_else(|| TableError::Format("missing header".into()))?;
    if version != FORMAT_VERSION.to_string() {
        return Err(TableError::Version {
            found: version.to_string(),
        });
    }
    let sum = parts
        .next()
        .and_then(|l| l.strip_prefix("sha256 "))
        .ok_or_else(|| TableError::Format("missing checksum line".into()))?;
    let body = parts.next().unwrap_or_default();
    let body = body.strip_suffix('\n').unwrap_or(body);
    if digest(body) != sum.trim() {
        return Err(TableError::Checksum);
    }
    let mut t: ParseTables = serde_json::from_str(body).map_err(|e| TableError::Format(e.to_string()))?;
    t.backbone.reindex();
    t.validate().map_err(TableError::Format)?;
    Ok(t)
}
