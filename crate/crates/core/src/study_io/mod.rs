//! Network and study documents, violation reports and the built-in
//! reference plant.

pub mod fixture;
pub mod network_file;
pub mod report;
pub mod study_file;

use serde::de::DeserializeOwned;
use serde_json::Value;
use thiserror::Error;

pub use network_file::{parse_network_file, serialize_network, NetworkSpec};
pub use report::{write_ranking, write_report, ReportDocument, ReportFormat, StudyReport};
pub use study_file::{parse_study_file, serialize_study, StudySpec};

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Malformed(String),
    #[error("{path}{}: {message}", element.as_ref().map(|e| format!(" ({e})")).unwrap_or_default())]
    Schema {
        path: String,
        element: Option<String>,
        message: String,
    },
    #[error("{0}")]
    Reference(String),
}

/// Singular element noun for a top-level array key.
fn element_noun(key: &str) -> &str {
    match key {
        "buses" => "bus",
        "branches" => "branch",
        "transformers" => "transformer",
        "breakers" => "breaker",
        "loads" => "load",
        "generators" => "generator",
        "contingencies" => "contingency",
        "ras_catalog" => "plan",
        other => other,
    }
}

/// Finds the innermost element with an `id` along `path` (e.g. `buses[1].kind`).
fn element_at(root: &Value, path: &serde_path_to_error::Path) -> Option<String> {
    use serde_path_to_error::Segment;
    let mut cur = root;
    let mut key = String::new();
    let mut found = None;
    for seg in path.iter() {
        match seg {
            Segment::Map { key: k } => {
                key = k.clone();
                cur = cur.get(k)?;
            }
            Segment::Seq { index } => {
                cur = cur.get(*index)?;
                if let Some(id) = cur.get("id").and_then(Value::as_str) {
                    found = Some(format!("{} '{}'", element_noun(&key), id));
                }
            }
            _ => return found,
        }
    }
    found
}

pub(crate) fn parse_document<T: DeserializeOwned>(bytes: &[u8]) -> Result<T, ParseError> {
    let text = std::str::from_utf8(bytes).map_err(|e| ParseError::Malformed(e.to_string()))?;
    let value: Value = serde_json::from_str(text).map_err(|e| ParseError::Malformed(e.to_string()))?;
    serde_path_to_error::deserialize(&value).map_err(|err| {
        let path = err.path().clone();
        ParseError::Schema {
            path: path.to_string(),
            element: element_at(&value, &path),
            message: err.into_inner().to_string(),
        }
    })
}
