//! `.aic.json` session documents.
//!
//! Documents are canonical: object keys sorted, two-space indentation, a
//! trailing newline, integers only. Identical sessions always serialize to
//! identical bytes.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::catalog::STEP_COUNT;
use crate::error::{Error, Result};
use crate::factors::extract_factors;
use crate::session::{is_valid_session_id, Session};
use crate::validation::{validate_session, Finding};

pub const FORMAT_VERSION: u64 = 1;

pub const FILE_EXTENSION: &str = ".aic.json";

#[derive(Serialize)]
struct DocumentRef<'a> {
    format_version: u64,
    session: &'a Session,
}

#[derive(Deserialize)]
struct Document {
    #[allow(dead_code)]
    format_version: u64,
    session: Session,
}

/// A session read back from a document, with the audit findings for it.
#[derive(Debug, Clone)]
pub struct LoadedSession {
    pub session: Session,
    pub findings: Vec<Finding>,
}

/// Recursively sorts object keys.
pub fn canonicalize(value: &Value) -> Value {
    match value {
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            let mut out = Map::new();
            for key in keys {
                out.insert(key.clone(), canonicalize(&map[key]));
            }
            Value::Object(out)
        }
        Value::Array(items) => Value::Array(items.iter().map(canonicalize).collect()),
        other => other.clone(),
    }
}

/// Canonical pretty JSON for any serializable value.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let value = serde_json::to_value(value).expect("session types serialize to JSON");
    let mut bytes =
        serde_json::to_vec_pretty(&canonicalize(&value)).expect("JSON values always serialize");
    bytes.push(b'\n');
    bytes
}

pub fn save_session(session: &Session) -> Vec<u8> {
    to_canonical_json(&DocumentRef {
        format_version: FORMAT_VERSION,
        session,
    })
}

pub fn load_session(bytes: &[u8]) -> Result<LoadedSession> {
    let raw: Value = serde_json::from_slice(bytes).map_err(parse_error)?;
    let version = raw
        .get("format_version")
        .ok_or_else(|| Error::InvalidDocument("missing format_version".into()))?;
    let version = version.as_u64().ok_or_else(|| {
        Error::InvalidDocument("format_version must be a non-negative integer".into())
    })?;
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let doc: Document = serde_json::from_slice(bytes).map_err(parse_error)?;
    let mut session = doc.session;
    check_integrity(&session)?;
    for a in &mut session.assertions {
        a.factor_tokens = extract_factors(&a.text);
    }
    let findings = validate_session(&session);
    Ok(LoadedSession { session, findings })
}

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

/// Shape checks that the rule audit cannot express as findings.
fn check_integrity(s: &Session) -> Result<()> {
    if !is_valid_session_id(&s.id) {
        return Err(Error::InvalidDocument(format!(
            "invalid session id `{}`",
            s.id
        )));
    }
    if s.name.trim().is_empty() {
        return Err(Error::InvalidDocument("session name is empty".into()));
    }
    if s.config.red_flag_threshold < 1 {
        return Err(Error::InvalidDocument(
            "red_flag_threshold must be at least 1".into(),
        ));
    }
    if s.version < 1 {
        return Err(Error::InvalidDocument("version must be at least 1".into()));
    }
    for (i, st) in s.steps.iter().enumerate() {
        if usize::from(st.index) != i + 1 {
            return Err(Error::InvalidDocument(format!(
                "steps[{i}] has index {}, expected {}",
                st.index,
                i + 1
            )));
        }
    }
    for a in &s.assertions {
        if !(1..=STEP_COUNT).contains(&a.step_index) {
            return Err(Error::InvalidDocument(format!(
                "assertion `{}` has step_index {}",
                a.id, a.step_index
            )));
        }
        if a.revision < 1 {
            return Err(Error::InvalidDocument(format!(
                "assertion `{}` has revision 0",
                a.id
            )));
        }
    }
    let mut seen = BTreeSet::new();
    let ids = s
        .systems
        .iter()
        .map(|x| &x.id)
        .chain(s.aspects.iter().map(|x| &x.id))
        .chain(s.purposes.iter().map(|x| &x.id))
        .chain(s.actions.iter().map(|x| &x.id))
        .chain(s.assertions.iter().map(|x| &x.id));
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::InvalidDocument(format!(
                "duplicate entity id `{id}`"
            )));
        }
    }
    Ok(())
}

pub fn read_session_file(path: &Path) -> Result<LoadedSession> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    load_session(&bytes)
}

pub fn write_session_file(path: &Path, session: &Session) -> Result<()> {
    write_atomic(path, &save_session(session))
}

/// Writes to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file()
        .sync_all()
        .map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}
