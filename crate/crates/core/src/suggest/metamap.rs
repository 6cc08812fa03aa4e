//! Adapters for an external concept mapper in the MetaMap role.
//!
//! The mapper receives keyword texts and returns, per text, the identifiers of
//! the concepts it recognised. Only identifiers that resolve in the loaded
//! vocabulary become suggestions.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::{HttpRequest, Transport};
use crate::text::normalize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapperError {
    #[error("concept mapper unavailable: {0}")]
    Unavailable(String),
    #[error("concept mapper returned a bad response: {0}")]
    BadResponse(String),
    #[error("cannot read concept table {path}: {reason}")]
    Table { path: String, reason: String },
}

pub trait ConceptMapper: Send + Sync {
    fn map_concepts(&self, texts: &[String]) -> Result<Vec<Vec<String>>, MapperError>;
}

#[derive(Serialize)]
struct MapRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct MapResponse {
    concepts: Vec<Vec<String>>,
}

/// `POST {"texts": [...]}` → `{"concepts": [[id, ...], ...]}`, order-preserving.
pub struct HttpConceptMapper {
    url: String,
    transport: Arc<dyn Transport>,
}

impl HttpConceptMapper {
    pub fn new(url: impl Into<String>, transport: Arc<dyn Transport>) -> Self {
        Self {
            url: url.into(),
            transport,
        }
    }
}

impl ConceptMapper for HttpConceptMapper {
    fn map_concepts(&self, texts: &[String]) -> Result<Vec<Vec<String>>, MapperError> {
        let body = serde_json::to_string(&MapRequest { texts })
            .map_err(|e| MapperError::BadResponse(e.to_string()))?;
        let resp = self
            .transport
            .send(&HttpRequest::post_json(&self.url, body))
            .map_err(|e| MapperError::Unavailable(e.to_string()))?;
        if resp.status != 200 {
            return Err(MapperError::Unavailable(format!("status {}", resp.status)));
        }
        let parsed: MapResponse = serde_json::from_str(&resp.body)
            .map_err(|e| MapperError::BadResponse(e.to_string()))?;
        if parsed.concepts.len() != texts.len() {
            return Err(MapperError::BadResponse(format!(
                "{} concept lists for {} texts",
                parsed.concepts.len(),
                texts.len()
            )));
        }
        Ok(parsed.concepts)
    }
}

/// Deterministic mapper backed by a fixed table, for tests and offline runs.
#[derive(Debug, Clone, Default)]
pub struct StubConceptMapper {
    table: HashMap<String, Vec<String>>,
}

impl StubConceptMapper {
    pub fn new<K: AsRef<str>>(entries: impl IntoIterator<Item = (K, Vec<String>)>) -> Self {
        Self {
            table: entries
                .into_iter()
                .map(|(k, v)| (normalize(k.as_ref()), v))
                .collect(),
        }
    }

    /// Reads `keyword<TAB>id;id;...` lines.
    pub fn load(path: impl AsRef<Path>) -> Result<Self, MapperError> {
        let path = path.as_ref();
        let err = |reason: String| MapperError::Table {
            path: path.display().to_string(),
            reason,
        };
        let content = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
        let mut entries = Vec::new();
        for (i, line) in content.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, ids) = line
                .split_once('\t')
                .ok_or_else(|| err(format!("line {}: expected keyword<TAB>ids", i + 1)))?;
            let ids = ids
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
            entries.push((k.to_string(), ids));
        }
        Ok(Self::new(entries))
    }
}

impl ConceptMapper for StubConceptMapper {
    fn map_concepts(&self, texts: &[String]) -> Result<Vec<Vec<String>>, MapperError> {
        Ok(texts
            .iter()
            .map(|t| self.table.get(&normalize(t)).cloned().unwrap_or_default())
            .collect())
    }
}
