//! Shared envelope for versioned JSON model files.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};

pub const MODEL_VERSION: u64 = 1;

/// Compact JSON plus a trailing newline. Floats are written with the shortest
/// representation that parses back to the same bits.
pub fn to_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(value)?;
    out.push(b'\n');
    Ok(out)
}

pub fn write<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_bytes(value)?).map_err(|e| Error::io(path, e))
}

/// Parses a model file, checking `version` and the `kind` discriminator before
/// decoding the body. Anything unparsable is reported as corruption.
pub fn from_bytes<T: DeserializeOwned>(bytes: &[u8], kind: &str) -> Result<T> {
    let value: Value = serde_json::from_slice(bytes).map_err(|e| Error::Corrupt(e.to_string()))?;
    let version = value
        .get("version")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Corrupt("missing `version` field".into()))?;
    if version != MODEL_VERSION {
        return Err(Error::Version {
            found: version,
            expected: MODEL_VERSION,
        });
    }
    match value.get("kind").and_then(Value::as_str) {
        Some(k) if k == kind => {}
        Some(k) => return Err(Error::Corrupt(format!("file holds a `{k}` model, expected `{kind}`"))),
        None => return Err(Error::Corrupt("missing `kind` field".into())),
    }
    serde_json::from_value(value).map_err(|e| Error::Corrupt(e.to_string()))
}

pub fn read<T: DeserializeOwned>(path: impl AsRef<Path>, kind: &str) -> Result<T> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes, kind)
}
