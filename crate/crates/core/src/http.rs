//! Minimal blocking HTTP layer used by the E-utilities, encoder and concept
//! mapper clients.
//!
//! Everything that leaves the process goes through [`Transport`], so tests
//! and offline runs can swap the live client for a [`ReplayTransport`] fed
//! from a recorded cassette file.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Query parameters that identify the caller rather than the request. They are
/// ignored when matching a request against a recorded interaction.
pub const VOLATILE_PARAMS: &[&str] = &["email", "api_key", "tool"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum HttpMethod {
    Get,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpRequest {
    pub method: HttpMethod,
    pub url: String,
    #[serde(default)]
    pub query: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub body: Option<String>,
}

impl HttpRequest {
    pub fn get(url: impl Into<String>, query: Vec<(String, String)>) -> Self {
        Self {
            method: HttpMethod::Get,
            url: url.into(),
            query,
            body: None,
        }
    }

    pub fn post_json(url: impl Into<String>, body: String) -> Self {
        Self {
            method: HttpMethod::Post,
            url: url.into(),
            query: Vec::new(),
            body: Some(body),
        }
    }

    /// Stable identity of the request for replay matching.
    fn replay_key(&self) -> String {
        let mut params: Vec<&(String, String)> = self
            .query
            .iter()
            .filter(|(k, _)| !VOLATILE_PARAMS.contains(&k.as_str()))
            .collect();
        params.sort();
        let mut key = format!("{:?} {}", self.method, self.url);
        for (k, v) in params {
            key.push_str(&format!("\n{k}={v}"));
        }
        if let Some(body) = &self.body {
            key.push_str("\n\n");
            key.push_str(body);
        }
        key
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

impl HttpResponse {
    pub fn ok(body: impl Into<String>) -> Self {
        Self {
            status: 200,
            body: body.into(),
        }
    }

    pub fn is_success(&self) -> bool {
        (200..300).contains(&self.status)
    }
}

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("request timed out: {0}")]
    Timeout(String),
    #[error("connection failed: {0}")]
    Connect(String),
    #[error("no recorded interaction for request:\n{0}")]
    NoFixture(String),
    #[error("cassette error: {0}")]
    Cassette(String),
}

pub trait Transport: Send + Sync {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

impl<T: Transport + ?Sized> Transport for std::sync::Arc<T> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        (**self).send(request)
    }
}

/// Live transport backed by a blocking reqwest client.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .user_agent(concat!("meshsuggest/", env!("CARGO_PKG_VERSION")))
            .build()
            .map_err(|e| TransportError::Connect(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for ReqwestTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let builder = match request.method {
            HttpMethod::Get => self.client.get(&request.url),
            HttpMethod::Post => self.client.post(&request.url),
        };
        let mut builder = builder.query(&request.query);
        if let Some(body) = &request.body {
            builder = builder
                .header("content-type", "application/json")
                .body(body.clone());
        }
        let map_err = |e: reqwest::Error| {
            if e.is_timeout() {
                TransportError::Timeout(e.to_string())
            } else {
                TransportError::Connect(e.to_string())
            }
        };
        let resp = builder.send().map_err(map_err)?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(map_err)?;
        Ok(HttpResponse { status, body })
    }
}

/// One recorded request/response pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interaction {
    pub request: HttpRequest,
    pub response: HttpResponse,
}

/// A recorded session, stored as pretty-printed JSON.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cassette {
    pub interactions: Vec<Interaction>,
}

impl Cassette {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        let path = path.as_ref();
        let raw = std::fs::read_to_string(path)
            .map_err(|e| TransportError::Cassette(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&raw)
            .map_err(|e| TransportError::Cassette(format!("{}: {e}", path.display())))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), TransportError> {
        let mut raw = serde_json::to_string_pretty(self)
            .map_err(|e| TransportError::Cassette(e.to_string()))?;
        raw.push('\n');
        std::fs::write(path.as_ref(), raw).map_err(|e| TransportError::Cassette(e.to_string()))
    }
}

/// Serves responses from a [`Cassette`].
///
/// Interactions recorded for the same request are played back in order; once
/// exhausted the last one keeps being returned. Requests with no recording
/// fail with [`TransportError::NoFixture`].
pub struct ReplayTransport {
    tapes: Mutex<HashMap<String, (Vec<HttpResponse>, usize)>>,
}

impl ReplayTransport {
    pub fn new(cassette: Cassette) -> Self {
        let mut tapes: HashMap<String, (Vec<HttpResponse>, usize)> = HashMap::new();
        for it in cassette.interactions {
            tapes
                .entry(it.request.replay_key())
                .or_default()
                .0
                .push(it.response);
        }
        Self {
            tapes: Mutex::new(tapes),
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        Ok(Self::new(Cassette::load(path)?))
    }
}

impl Transport for ReplayTransport {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let key = request.replay_key();
        let mut tapes = self.tapes.lock().expect("replay lock poisoned");
        let (responses, cursor) = tapes
            .get_mut(&key)
            .ok_or_else(|| TransportError::NoFixture(key.clone()))?;
        let idx = (*cursor).min(responses.len() - 1);
        *cursor += 1;
        Ok(responses[idx].clone())
    }
}

/// Wraps a live transport and keeps every exchange for later replay.
pub struct RecordingTransport<T> {
    inner: T,
    recorded: Mutex<Vec<Interaction>>,
}

impl<T: Transport> RecordingTransport<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            recorded: Mutex::new(Vec::new()),
        }
    }

    pub fn cassette(&self) -> Cassette {
        Cassette {
            interactions: self
                .recorded
                .lock()
                .expect("recording lock poisoned")
                .clone(),
        }
    }
}

impl<T: Transport> Transport for RecordingTransport<T> {
    fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let response = self.inner.send(request)?;
        let mut request = request.clone();
        request
            .query
            .retain(|(k, _)| !VOLATILE_PARAMS.contains(&k.as_str()));
        self.recorded
            .lock()
            .expect("recording lock poisoned")
            .push(Interaction {
                request,
                response: response.clone(),
            });
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(term: &str, email: &str) -> HttpRequest {
        HttpRequest::get(
            "https://example.org/esearch",
            vec![
                ("term".into(), term.into()),
                ("email".into(), email.into()),
                ("db".into(), "pubmed".into()),
            ],
        )
    }

    #[test]
    fn replay_matches_ignoring_volatile_params_and_order() {
        let cassette = Cassette {
            interactions: vec![Interaction {
                request: HttpRequest::get(
                    "https://example.org/esearch",
                    vec![("db".into(), "pubmed".into()), ("term".into(), "tb".into())],
                ),
                response: HttpResponse::ok("{}"),
            }],
        };
        let replay = ReplayTransport::new(cassette);
        assert_eq!(replay.send(&get("tb", "a@b.c")).unwrap().body, "{}");
        assert!(matches!(
            replay.send(&get("other", "a@b.c")),
            Err(TransportError::NoFixture(_))
        ));
    }

    #[test]
    fn replay_plays_sequences_then_sticks_on_last() {
        let req = get("tb", "x@y.z");
        let cassette = Cassette {
            interactions: vec![
                Interaction {
                    request: req.clone(),
                    response: HttpResponse {
                        status: 429,
                        body: String::new(),
                    },
                },
                Interaction {
                    request: req.clone(),
                    response: HttpResponse::ok("done"),
                },
            ],
        };
        let replay = ReplayTransport::new(cassette);
        assert_eq!(replay.send(&req).unwrap().status, 429);
        assert_eq!(replay.send(&req).unwrap().status, 200);
        assert_eq!(replay.send(&req).unwrap().status, 200);
    }

    struct Echo;
    impl Transport for Echo {
        fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
            Ok(HttpResponse::ok(request.url.clone()))
        }
    }

    #[test]
    fn recording_strips_contact_details_and_replays() {
        let rec = RecordingTransport::new(Echo);
        rec.send(&get("tb", "secret@example.org")).unwrap();
        let cassette = rec.cassette();
        assert!(cassette.interactions[0]
            .request
            .query
            .iter()
            .all(|(k, _)| k != "email"));

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        cassette.save(&path).unwrap();
        let replay = ReplayTransport::from_file(&path).unwrap();
        assert_eq!(
            replay.send(&get("tb", "other@example.org")).unwrap().body,
            "https://example.org/esearch"
        );
    }
}
