//! Service settings from a JSON file and `MESHSUGGEST_*` environment variables.

use std::path::{Path, PathBuf};

use meshsuggest_core::suggest::ResourceSpec;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{var}: {msg}")]
    Env { var: &'static str, msg: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    /// Socket address to listen on.
    pub bind: String,
    pub resources: ResourceSpec,
    /// JSON-lines file that `/log` appends to.
    pub log_path: PathBuf,
    /// Allowed browser origins; `*` allows any.
    pub cors_origins: Vec<String>,
    /// Also accept `ATM`, `MetaMap` and `UMLS` as request types.
    pub lexical_types: bool,
    /// Contact address for E-utilities, needed by `ATM`.
    pub email: Option<String>,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        Self {
            bind: "127.0.0.1:8000".into(),
            resources: ResourceSpec::default(),
            log_path: "interactions.jsonl".into(),
            cors_origins: vec!["*".into()],
            lexical_types: false,
            email: None,
        }
    }
}

impl ServiceConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.into(),
            source,
        })
    }

    /// Starts from `MESHSUGGEST_CONFIG` if set, then applies the other
    /// variables on top.
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_vars(|k| std::env::var(k).ok())
    }

    pub fn from_vars(var: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let mut c = match var("MESHSUGGEST_CONFIG") {
            Some(path) => Self::from_file(Path::new(&path))?,
            None => Self::default(),
        };
        let r = &mut c.resources;
        if let Some(v) = var("MESHSUGGEST_MESH_FILE") {
            r.mesh_file = v.into();
        }
        if let Some(v) = var("MESHSUGGEST_MESH_ENCODING") {
            r.mesh_encoding = Some(v.into());
        }
        if let Some(v) = var("MESHSUGGEST_MODEL") {
            r.model = Some(v);
        }
        if let Some(v) = var("MESHSUGGEST_SEMANTIC_MODEL") {
            r.semantic_model_path = Some(v.into());
        }
        if let Some(v) = var("MESHSUGGEST_METAMAP") {
            r.metamap = Some(v);
        }
        if let Some(v) = var("MESHSUGGEST_TAU") {
            r.tau = v.parse().map_err(|_| ConfigError::Env {
                var: "MESHSUGGEST_TAU",
                msg: format!("not a number: {v:?}"),
            })?;
        }
        if let Some(v) = var("MESHSUGGEST_BIND") {
            c.bind = v;
        }
        if let Some(v) = var("MESHSUGGEST_LOG") {
            c.log_path = v.into();
        }
        if let Some(v) = var("MESHSUGGEST_CORS_ORIGINS") {
            c.cors_origins = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(String::from)
                .collect();
        }
        if let Some(v) = var("MESHSUGGEST_LEXICAL_TYPES") {
            c.lexical_types = match v.as_str() {
                "1" | "true" => true,
                "0" | "false" => false,
                _ => {
                    return Err(ConfigError::Env {
                        var: "MESHSUGGEST_LEXICAL_TYPES",
                        msg: format!("expected true or false, got {v:?}"),
                    })
                }
            };
        }
        if let Some(v) = var("MESHSUGGEST_EMAIL") {
            c.email = Some(v);
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;

    #[test]
    fn env_overrides_file() {
        let dir = tempfile::tempdir().unwrap();
        let file = dir.path().join("service.json");
        std::fs::write(
            &file,
            r#"{"bind":"0.0.0.0:9000","resources":{"mesh_file":"a.tsv","tau":0.5},"lexical_types":true}"#,
        )
        .unwrap();
        let vars: HashMap<&str, String> = [
            ("MESHSUGGEST_CONFIG", file.display().to_string()),
            ("MESHSUGGEST_MESH_FILE", "b.tsv".into()),
            ("MESHSUGGEST_MODEL", "http://enc/encode".into()),
            ("MESHSUGGEST_CORS_ORIGINS", "http://a, http://b".into()),
        ]
        .into();
        let c = ServiceConfig::from_vars(|k| vars.get(k).cloned()).unwrap();
        assert_eq!(c.bind, "0.0.0.0:9000");
        assert_eq!(c.resources.mesh_file, PathBuf::from("b.tsv"));
        assert_eq!(c.resources.model.as_deref(), Some("http://enc/encode"));
        assert_eq!(c.resources.tau, 0.5);
        assert!(c.lexical_types);
        assert_eq!(c.cors_origins, ["http://a", "http://b"]);
        assert_eq!(c.log_path, PathBuf::from("interactions.jsonl"));
    }

    #[test]
    fn rejects_bad_values() {
        let bad = |k: &'static str, v: &'static str| {
            ServiceConfig::from_vars(|q| (q == k).then(|| v.to_string())).is_err()
        };
        assert!(bad("MESHSUGGEST_TAU", "high"));
        assert!(bad("MESHSUGGEST_LEXICAL_TYPES", "yes"));
        assert!(bad("MESHSUGGEST_CONFIG", "/nonexistent/service.json"));
        assert!(ServiceConfig::from_vars(|_| None).is_ok());
    }
}
