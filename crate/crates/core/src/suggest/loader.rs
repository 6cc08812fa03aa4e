//! Loading suggestion resources from files and endpoints.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

use super::{HttpConceptMapper, MapperError, Method, Resources, StubConceptMapper, SuggestError};
use crate::embeddings::{
    EmbeddingError, EmbeddingStore, EncodeError, HttpEncoder, KeywordLookup, QueryEncoder,
    WordVectorModel, DEFAULT_TAU,
};
use crate::http::Transport;
use crate::vocab::{VocabError, Vocabulary};

const ENCODE_BATCH: usize = 256;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("file not found: {what} {path}")]
    MissingFile { what: &'static str, path: PathBuf },
    #[error(transparent)]
    Vocab(#[from] VocabError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Mapper(#[from] MapperError),
    #[error(transparent)]
    Suggest(#[from] SuggestError),
}

/// Where each resource lives. Anything left unset is simply not loaded;
/// methods that need it fail with [`SuggestError::MissingResource`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResourceSpec {
    pub mesh_file: PathBuf,
    /// Precomputed MeSH encodings. Without it, an endpoint `model` encodes
    /// every preferred name at load time.
    pub mesh_encoding: Option<PathBuf>,
    /// A keyword-embedding file, or the URL of an encoder endpoint.
    pub model: Option<String>,
    /// Word vectors for Semantic grouping.
    pub semantic_model_path: Option<PathBuf>,
    /// A concept-mapper URL, or a `keyword<TAB>ids` table.
    pub metamap: Option<String>,
    /// Extra settings sent with every encoder request.
    pub encoder_config: Map<String, Value>,
    pub tau: f64,
}

impl Default for ResourceSpec {
    fn default() -> Self {
        Self {
            mesh_file: PathBuf::new(),
            mesh_encoding: None,
            model: None,
            semantic_model_path: None,
            metamap: None,
            encoder_config: Map::new(),
            tau: DEFAULT_TAU,
        }
    }
}

pub fn is_url(s: &str) -> bool {
    s.starts_with("http://") || s.starts_with("https://")
}

fn existing(path: &Path, what: &'static str) -> Result<(), LoadError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(LoadError::MissingFile {
            what,
            path: path.to_path_buf(),
        })
    }
}

impl ResourceSpec {
    /// The first setting `method` needs that is unset, by field name.
    pub fn missing_for(&self, method: &Method) -> Option<&'static str> {
        let encoded = self.model.as_deref().is_some_and(is_url) || self.mesh_encoding.is_some();
        match method {
            Method::AtomicBert | Method::FragmentBert | Method::SemanticBert
                if self.model.is_none() =>
            {
                Some("model")
            }
            Method::AtomicBert | Method::FragmentBert | Method::SemanticBert if !encoded => {
                Some("mesh_encoding")
            }
            Method::SemanticBert if self.semantic_model_path.is_none() => {
                Some("semantic_model_path")
            }
            Method::MetaMap if self.metamap.is_none() => Some("metamap"),
            _ => None,
        }
    }

    /// Loads every configured resource. `transport` carries encoder and
    /// concept-mapper calls.
    pub fn load(&self, transport: Arc<dyn Transport>) -> Result<Resources, LoadError> {
        existing(&self.mesh_file, "MeSH file")?;
        let vocab = Arc::new(Vocabulary::load(&self.mesh_file)?);
        let mut res = Resources::new(vocab.clone()).with_tau(self.tau);

        if let Some(model) = &self.model {
            let stored = match &self.mesh_encoding {
                Some(path) => {
                    existing(path, "MeSH encoding")?;
                    Some(EmbeddingStore::load(path)?)
                }
                None => None,
            };
            let encoder: Arc<dyn QueryEncoder> = if is_url(model) {
                let dim = stored.as_ref().map_or(0, EmbeddingStore::dim);
                let enc = HttpEncoder::new(model.clone(), transport.clone(), dim)
                    .with_config(self.encoder_config.clone());
                Arc::new(if stored.is_some() {
                    enc
                } else {
                    enc.probe_dim()?
                })
            } else {
                existing(Path::new(model), "keyword embeddings")?;
                Arc::new(KeywordLookup::new(EmbeddingStore::load(model)?))
            };
            let encoding = match stored {
                Some(s) => Some(s),
                None if is_url(model) => Some(encode_vocabulary(&vocab, encoder.as_ref())?),
                None => None,
            };
            if let Some(encoding) = encoding {
                res = res.with_mesh_encoding(Arc::new(encoding))?;
            }
            res = res.with_encoder(encoder);
        }
        if let Some(path) = &self.semantic_model_path {
            existing(path, "word vectors")?;
            res = res.with_word_vectors(Arc::new(WordVectorModel::load(path)?));
        }
        if let Some(mapper) = &self.metamap {
            if is_url(mapper) {
                res = res.with_concept_mapper(Arc::new(HttpConceptMapper::new(
                    mapper.clone(),
                    transport.clone(),
                )));
            } else {
                existing(Path::new(mapper), "concept table")?;
                res = res.with_concept_mapper(Arc::new(StubConceptMapper::load(mapper)?));
            }
        }
        Ok(res)
    }
}

/// Encodes every preferred name of the vocabulary, keyed by uid.
pub fn encode_vocabulary(
    vocab: &Vocabulary,
    encoder: &dyn QueryEncoder,
) -> Result<EmbeddingStore, LoadError> {
    let terms: Vec<_> = vocab.terms().collect();
    let mut vectors = Vec::with_capacity(terms.len());
    for chunk in terms.chunks(ENCODE_BATCH) {
        let names: Vec<String> = chunk.iter().map(|t| t.name.clone()).collect();
        let encoded = encoder.encode_batch(&names)?;
        vectors.extend(chunk.iter().map(|t| t.uid.clone()).zip(encoded));
    }
    Ok(EmbeddingStore::from_vectors(encoder.dim(), vectors)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::http::{HttpRequest, HttpResponse, TransportError};

    fn mini(file: &str) -> PathBuf {
        PathBuf::from(env!("CARGO_MANIFEST_DIR"))
            .join("data/mini")
            .join(file)
    }

    struct NoNetwork;

    impl Transport for NoNetwork {
        fn send(&self, r: &HttpRequest) -> Result<HttpResponse, TransportError> {
            Err(TransportError::Connect(r.url.clone()))
        }
    }

    /// Answers every encoder call with one-hot vectors by name length.
    struct FakeEncoder;

    impl Transport for FakeEncoder {
        fn send(&self, r: &HttpRequest) -> Result<HttpResponse, TransportError> {
            let body: Value = serde_json::from_str(r.body.as_deref().unwrap()).unwrap();
            assert_eq!(body["config"]["q_max_len"], 16);
            let vectors: Vec<Vec<f32>> = body["texts"]
                .as_array()
                .unwrap()
                .iter()
                .map(|t| {
                    let mut v = vec![0.0; 4];
                    v[t.as_str().unwrap().len() % 4] = 1.0;
                    v
                })
                .collect();
            Ok(HttpResponse::ok(
                serde_json::json!({"dim": 4, "vectors": vectors}).to_string(),
            ))
        }
    }

    #[test]
    fn loads_the_mini_fixture_offline() {
        let spec = ResourceSpec {
            mesh_file: mini("mesh.tsv"),
            mesh_encoding: Some(mini("mesh_encoding.vec")),
            model: Some(mini("keywords.vec").display().to_string()),
            semantic_model_path: Some(mini("w2v.vec")),
            metamap: Some(mini("metamap.tsv").display().to_string()),
            ..ResourceSpec::default()
        };
        let res = spec.load(Arc::new(NoNetwork)).unwrap();
        assert_eq!(res.vocab().len(), 20);
        assert_eq!(res.encoder().unwrap().kind(), "lookup");
        assert!(res.word_vectors().is_some() && res.concept_mapper().is_some());
        for m in Method::BUILTIN {
            assert_eq!(spec.missing_for(&m), None);
        }
    }

    #[test]
    fn endpoint_model_encodes_the_vocabulary() {
        let mut config = Map::new();
        config.insert("q_max_len".into(), 16.into());
        let spec = ResourceSpec {
            mesh_file: mini("mesh.tsv"),
            model: Some("http://encoder.test/encode".into()),
            encoder_config: config,
            ..ResourceSpec::default()
        };
        assert_eq!(spec.missing_for(&Method::AtomicBert), None);
        assert_eq!(
            spec.missing_for(&Method::SemanticBert),
            Some("semantic_model_path")
        );
        let res = spec.load(Arc::new(FakeEncoder)).unwrap();
        assert_eq!(res.mesh_encoding().unwrap().len(), 20);
        assert_eq!(res.encoder().unwrap().dim(), 4);
    }

    #[test]
    fn reports_what_is_missing() {
        let spec = ResourceSpec {
            mesh_file: mini("mesh.tsv"),
            model: Some(mini("keywords.vec").display().to_string()),
            ..ResourceSpec::default()
        };
        assert_eq!(
            spec.missing_for(&Method::FragmentBert),
            Some("mesh_encoding")
        );
        assert_eq!(spec.missing_for(&Method::MetaMap), Some("metamap"));
        assert_eq!(spec.missing_for(&Method::Umls), None);
        let absent = ResourceSpec {
            mesh_file: mini("nope.tsv"),
            ..ResourceSpec::default()
        };
        assert!(matches!(
            absent.load(Arc::new(NoNetwork)),
            Err(LoadError::MissingFile {
                what: "MeSH file",
                ..
            })
        ));
    }
}
