//! Query encoders: turn keyword text into a vector in the MeSH encoding space.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EmbeddingStore;
use crate::http::{HttpRequest, Transport};
use crate::text::normalize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("no precomputed vector for keyword {0:?}")]
    UnknownKeyword(String),
    #[error("encoder unavailable: {0}")]
    EncoderUnavailable(String),
    #[error("encoder returned a bad response: {0}")]
    EncoderBadResponse(String),
}

pub trait QueryEncoder: Send + Sync {
    fn dim(&self) -> usize;

    /// Short label for health reports, e.g. `"lookup"` or `"http"`.
    fn kind(&self) -> &'static str;

    /// Encodes texts in order, one vector per text.
    fn encode_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EncodeError>;
}

pub fn encode_query(text: &str, encoder: &dyn QueryEncoder) -> Result<Vec<f32>, EncodeError> {
    let mut out = encoder.encode_batch(&[text.to_string()])?;
    out.pop()
        .ok_or_else(|| EncodeError::EncoderBadResponse("empty vector list".into()))
}

/// Offline encoder over a precomputed keyword store, keyed by normalised text.
pub struct KeywordLookup {
    store: EmbeddingStore,
    by_text: HashMap<String, String>,
}

impl KeywordLookup {
    pub fn new(store: EmbeddingStore) -> Self {
        let mut by_text = HashMap::with_capacity(store.len());
        // Ids iterate in ascending order; the first spelling of a normalised
        // key wins.
        for id in store.ids() {
            by_text.entry(normalize(id)).or_insert_with(|| id.clone());
        }
        Self { store, by_text }
    }

    pub fn store(&self) -> &EmbeddingStore {
        &self.store
    }
}

impl QueryEncoder for KeywordLookup {
    fn dim(&self) -> usize {
        self.store.dim()
    }

    fn kind(&self) -> &'static str {
        "lookup"
    }

    fn encode_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EncodeError> {
        texts
            .iter()
            .map(|t| {
                self.by_text
                    .get(&normalize(t))
                    .and_then(|id| self.store.get(id))
                    .map(<[f32]>::to_vec)
                    .ok_or_else(|| EncodeError::UnknownKeyword(t.clone()))
            })
            .collect()
    }
}

#[derive(Serialize)]
struct EncodeRequest<'a> {
    texts: &'a [String],
    #[serde(skip_serializing_if = "serde_json::Map::is_empty")]
    config: &'a serde_json::Map<String, serde_json::Value>,
}

#[derive(Deserialize)]
struct EncodeResponse {
    dim: usize,
    vectors: Vec<Vec<f32>>,
}

/// Remote encoder speaking `POST {"texts": [...]}` →
/// `{"dim": n, "vectors": [[...], ...]}`.
pub struct HttpEncoder {
    url: String,
    transport: Arc<dyn Transport>,
    dim: usize,
    config: serde_json::Map<String, serde_json::Value>,
}

impl HttpEncoder {
    pub fn new(url: impl Into<String>, transport: Arc<dyn Transport>, dim: usize) -> Self {
        Self {
            url: url.into(),
            transport,
            dim,
            config: serde_json::Map::new(),
        }
    }

    /// Encoder-side settings (tokenizer, maximum lengths) forwarded with every
    /// request under `config`.
    pub fn with_config(mut self, config: serde_json::Map<String, serde_json::Value>) -> Self {
        self.config = config;
        self
    }

    /// Asks the endpoint for its dimension by encoding a probe text, and
    /// adopts it.
    pub fn probe_dim(mut self) -> Result<Self, EncodeError> {
        self.dim = self.call(&["dimension probe".to_string()])?.dim;
        Ok(self)
    }

    fn call(&self, texts: &[String]) -> Result<EncodeResponse, EncodeError> {
        let body = serde_json::to_string(&EncodeRequest {
            texts,
            config: &self.config,
        })
        .map_err(|e| EncodeError::EncoderBadResponse(e.to_string()))?;
        let resp = self
            .transport
            .send(&HttpRequest::post_json(&self.url, body))
            .map_err(|e| EncodeError::EncoderUnavailable(e.to_string()))?;
        if resp.status != 200 {
            return Err(EncodeError::EncoderUnavailable(format!(
                "status {}",
                resp.status
            )));
        }
        serde_json::from_str(&resp.body).map_err(|e| EncodeError::EncoderBadResponse(e.to_string()))
    }
}

impl QueryEncoder for HttpEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn kind(&self) -> &'static str {
        "http"
    }

    fn encode_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, EncodeError> {
        let resp = self.call(texts)?;
        let bad = |msg: String| Err(EncodeError::EncoderBadResponse(msg));
        if resp.dim != self.dim {
            return bad(format!("dimension {} but expected {}", resp.dim, self.dim));
        }
        if resp.vectors.len() != texts.len() {
            return bad(format!(
                "{} vectors for {} texts",
                resp.vectors.len(),
                texts.len()
            ));
        }
        for v in &resp.vectors {
            if v.len() != self.dim {
                return bad(format!(
                    "vector of length {} but dim is {}",
                    v.len(),
                    self.dim
                ));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return bad("non-finite component".into());
            }
        }
        Ok(resp.vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::http::{HttpResponse, TransportError};

    fn lookup() -> KeywordLookup {
        KeywordLookup::new(EmbeddingStore::parse("2\nTB\t1 0\nchild care\t0 1\n").unwrap())
    }

    #[test]
    fn lookup_returns_stored_vector() {
        let enc = lookup();
        assert_eq!(encode_query("tb", &enc).unwrap(), vec![1.0, 0.0]);
        assert_eq!(encode_query(" Child   CARE", &enc).unwrap(), vec![0.0, 1.0]);
        assert_eq!(
            encode_query("xdr", &enc),
            Err(EncodeError::UnknownKeyword("xdr".into()))
        );
    }

    struct Fixed(Result<HttpResponse, ()>);
    impl Transport for Fixed {
        fn send(&self, req: &HttpRequest) -> Result<HttpResponse, TransportError> {
            let body: serde_json::Value =
                serde_json::from_str(req.body.as_deref().unwrap()).unwrap();
            assert!(body["texts"].is_array());
            self.0
                .clone()
                .map_err(|_| TransportError::Timeout("slow".into()))
        }
    }

    fn http(resp: Result<HttpResponse, ()>) -> HttpEncoder {
        HttpEncoder::new("http://encoder/encode", Arc::new(Fixed(resp)), 2)
    }

    #[test]
    fn http_encoder_happy_path() {
        let enc = http(Ok(HttpResponse::ok(r#"{"dim":2,"vectors":[[0.5,0.25]]}"#)));
        assert_eq!(encode_query("tb", &enc).unwrap(), vec![0.5, 0.25]);
    }

    #[test]
    fn http_encoder_wrong_dimension() {
        let enc = http(Ok(HttpResponse::ok(
            r#"{"dim":3,"vectors":[[0.5,0.25,1]]}"#,
        )));
        assert!(matches!(
            encode_query("tb", &enc),
            Err(EncodeError::EncoderBadResponse(_))
        ));
        let enc = http(Ok(HttpResponse::ok(r#"{"dim":2,"vectors":[[0.5]]}"#)));
        assert!(matches!(
            encode_query("tb", &enc),
            Err(EncodeError::EncoderBadResponse(_))
        ));
        let enc = http(Ok(HttpResponse::ok(r#"{"dim":2,"vectors":[]}"#)));
        assert!(matches!(
            encode_query("tb", &enc),
            Err(EncodeError::EncoderBadResponse(_))
        ));
    }

    #[test]
    fn http_encoder_unavailable() {
        let enc = http(Ok(HttpResponse {
            status: 500,
            body: String::new(),
        }));
        assert!(matches!(
            encode_query("tb", &enc),
            Err(EncodeError::EncoderUnavailable(_))
        ));
        let enc = http(Err(()));
        assert!(matches!(
            encode_query("tb", &enc),
            Err(EncodeError::EncoderUnavailable(_))
        ));
    }
}
