//! PubMed E-utilities `esearch` client.
//!
//! Requests are throttled to 3 per rolling second (10 with an API key) and
//! retried on transport failures, 5xx and 429 responses with 1s/2s/4s
//! backoff. Time is read through [`Clock`] so tests can run throttling and
//! backoff without sleeping.

use std::collections::{HashSet, VecDeque};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::Deserialize;
use thiserror::Error;

use crate::http::{HttpRequest, Transport};

pub const ESEARCH_URL: &str = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi";
/// Environment variable holding an optional NCBI API key.
pub const API_KEY_ENV: &str = "NCBI_API_KEY";
pub const DEFAULT_RETMAX: usize = 10_000;
/// Largest result set fetched for one query.
pub const MAX_RESULTS: u64 = 1_000_000;
const BACKOFF: [Duration; 3] = [
    Duration::from_secs(1),
    Duration::from_secs(2),
    Duration::from_secs(4),
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PubmedError {
    #[error("PubMed unavailable after retries: {0}")]
    UpstreamUnavailable(String),
    #[error("PubMed rejected the query: {0}")]
    QueryRejected(String),
    #[error("PubMed rate limit still exceeded after retries")]
    RateLimited,
    #[error("malformed E-utilities response: {0}")]
    MalformedResponse(String),
    #[error("query matches {0} records, more than the {MAX_RESULTS} that can be fetched")]
    ResultTruncated(u64),
    #[error("invalid search: {0}")]
    InvalidSpec(String),
}

pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        std::thread::sleep(d);
    }
}

/// A clock that only moves when slept on.
#[derive(Default)]
pub struct FakeClock {
    now: Mutex<Duration>,
    sleeps: Mutex<Vec<Duration>>,
}

impl FakeClock {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&self, d: Duration) {
        *self.now.lock().unwrap() += d;
    }

    /// Every sleep requested so far.
    pub fn sleeps(&self) -> Vec<Duration> {
        self.sleeps.lock().unwrap().clone()
    }
}

impl Clock for FakeClock {
    fn now(&self) -> Duration {
        *self.now.lock().unwrap()
    }

    fn sleep(&self, d: Duration) {
        self.sleeps.lock().unwrap().push(d);
        self.advance(d);
    }
}

/// Sliding-window limiter: at most `max_requests` dispatches per `window`.
pub struct Throttle {
    max_requests: usize,
    window: Duration,
    clock: Arc<dyn Clock>,
    sent: Mutex<VecDeque<Duration>>,
}

impl Throttle {
    pub fn new(max_requests: usize, window: Duration, clock: Arc<dyn Clock>) -> Self {
        assert!(max_requests > 0, "throttle needs a positive budget");
        Self {
            max_requests,
            window,
            clock,
            sent: Mutex::new(VecDeque::new()),
        }
    }

    /// Blocks until a request may be sent and records it. The lock is held
    /// while waiting, so concurrent callers are dispatched one at a time.
    pub fn acquire(&self) {
        let mut sent = self.sent.lock().expect("throttle lock poisoned");
        loop {
            let now = self.clock.now();
            while sent.front().is_some_and(|&t| t + self.window <= now) {
                sent.pop_front();
            }
            if sent.len() < self.max_requests {
                sent.push_back(now);
                return;
            }
            let wait = *sent.front().expect("window is full") + self.window - now;
            self.clock.sleep(wait);
        }
    }
}

/// Parameters of one esearch query.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchSpec {
    pub query: String,
    pub mindate: Option<String>,
    pub maxdate: Option<String>,
    pub email: String,
    pub retmax: usize,
}

/// Accepts `YYYY`, `YYYY/MM` or `YYYY/MM/DD`.
pub fn is_valid_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('/').collect();
    let widths = [4, 2, 2];
    !parts.is_empty()
        && parts.len() <= 3
        && parts
            .iter()
            .zip(widths)
            .all(|(p, w)| p.len() == w && p.bytes().all(|b| b.is_ascii_digit()))
}

fn date_key(s: &str) -> String {
    let mut parts: Vec<&str> = s.split('/').collect();
    while parts.len() < 3 {
        parts.push("00");
    }
    parts.join("/")
}

impl SearchSpec {
    pub fn new(query: impl Into<String>, email: impl Into<String>) -> Self {
        Self {
            query: query.into(),
            mindate: None,
            maxdate: None,
            email: email.into(),
            retmax: DEFAULT_RETMAX,
        }
    }

    pub fn with_dates(mut self, mindate: Option<String>, maxdate: Option<String>) -> Self {
        self.mindate = mindate;
        self.maxdate = maxdate;
        self
    }

    pub fn validate(&self) -> Result<(), PubmedError> {
        let invalid = |m: String| Err(PubmedError::InvalidSpec(m));
        if self.email.trim().is_empty() {
            return invalid("a contact email is required by E-utilities".into());
        }
        if self.query.trim().is_empty() {
            return invalid("empty query".into());
        }
        if self.retmax == 0 {
            return invalid("retmax must be positive".into());
        }
        for d in [&self.mindate, &self.maxdate].into_iter().flatten() {
            if !is_valid_date(d) {
                return invalid(format!("bad date {d:?}, expected YYYY/MM/DD"));
            }
        }
        if let (Some(lo), Some(hi)) = (&self.mindate, &self.maxdate) {
            if date_key(lo) > date_key(hi) {
                return invalid(format!("mindate {lo} is after maxdate {hi}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchResult {
    pub pmids: Vec<String>,
    pub total: u64,
}

#[derive(Deserialize)]
struct EsearchEnvelope {
    esearchresult: Option<EsearchBody>,
}

#[derive(Deserialize)]
struct EsearchBody {
    count: Option<String>,
    #[serde(default)]
    idlist: Vec<String>,
    querytranslation: Option<String>,
    #[serde(rename = "ERROR")]
    error: Option<String>,
}

fn parse_envelope(body: &str) -> Result<EsearchBody, PubmedError> {
    let env: EsearchEnvelope =
        serde_json::from_str(body).map_err(|e| PubmedError::MalformedResponse(e.to_string()))?;
    let result = env
        .esearchresult
        .ok_or_else(|| PubmedError::MalformedResponse("missing esearchresult".into()))?;
    if let Some(err) = &result.error {
        return Err(PubmedError::QueryRejected(err.clone()));
    }
    Ok(result)
}

/// Extracts the headings tagged `[MeSH Terms]` from an esearch response's
/// query translation, in order, without quotes or tags.
pub fn parse_atm_translation(body: &str) -> Result<Vec<String>, PubmedError> {
    let result = parse_envelope(body)?;
    let translation = result
        .querytranslation
        .ok_or_else(|| PubmedError::MalformedResponse("missing querytranslation".into()))?;
    Ok(mesh_terms_in_translation(&translation))
}

pub fn mesh_terms_in_translation(translation: &str) -> Vec<String> {
    const TAG: &str = "[mesh terms]";
    let lower = translation.to_ascii_lowercase();
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(found) = lower[from..].find(TAG) {
        let tag_at = from + found;
        from = tag_at + TAG.len();
        let before = translation[..tag_at].trim_end();
        let term = if let Some(inner) = before.strip_suffix('"') {
            match inner.rfind('"') {
                Some(open) => &inner[open + 1..],
                None => continue,
            }
        } else {
            let start = before
                .rfind(|c: char| c.is_whitespace() || c == '(')
                .map_or(0, |i| i + 1);
            &before[start..]
        };
        let term = term.trim();
        if !term.is_empty() {
            out.push(term.to_string());
        }
    }
    out
}

pub struct PubmedClient {
    transport: Arc<dyn Transport>,
    throttle: Throttle,
    clock: Arc<dyn Clock>,
    api_key: Option<String>,
    endpoint: String,
}

impl PubmedClient {
    pub fn new(
        transport: Arc<dyn Transport>,
        clock: Arc<dyn Clock>,
        api_key: Option<String>,
    ) -> Self {
        let per_second = if api_key.is_some() { 10 } else { 3 };
        Self {
            transport,
            throttle: Throttle::new(per_second, Duration::from_secs(1), clock.clone()),
            clock,
            api_key,
            endpoint: ESEARCH_URL.to_string(),
        }
    }

    /// Reads the API key from the environment.
    pub fn from_env(transport: Arc<dyn Transport>, clock: Arc<dyn Clock>) -> Self {
        let key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        Self::new(transport, clock, key)
    }

    pub fn with_endpoint(mut self, endpoint: impl Into<String>) -> Self {
        self.endpoint = endpoint.into();
        self
    }

    fn params(
        &self,
        email: &str,
        term: &str,
        retstart: usize,
        retmax: usize,
    ) -> Vec<(String, String)> {
        let mut p = vec![
            ("db".to_string(), "pubmed".to_string()),
            ("term".to_string(), term.to_string()),
            ("retmode".to_string(), "json".to_string()),
            ("retstart".to_string(), retstart.to_string()),
            ("retmax".to_string(), retmax.to_string()),
            ("tool".to_string(), "meshsuggest".to_string()),
            ("email".to_string(), email.to_string()),
        ];
        if let Some(key) = &self.api_key {
            p.push(("api_key".to_string(), key.clone()));
        }
        p
    }

    /// Sends one request with throttling and retries, returning the body of
    /// the first 2xx response.
    fn fetch(&self, request: &HttpRequest) -> Result<String, PubmedError> {
        let mut last_failure = String::new();
        let mut rate_limited = false;
        for attempt in 0..=BACKOFF.len() {
            if attempt > 0 {
                let wait = BACKOFF[attempt - 1];
                debug!("retrying esearch in {wait:?} after {last_failure}");
                self.clock.sleep(wait);
            }
            self.throttle.acquire();
            match self.transport.send(request) {
                Ok(resp) if resp.is_success() => return Ok(resp.body),
                Ok(resp) if resp.status == 429 => {
                    rate_limited = true;
                    last_failure = "429 Too Many Requests".into();
                }
                Ok(resp) if resp.status >= 500 => {
                    rate_limited = false;
                    last_failure = format!("status {}", resp.status);
                }
                Ok(resp) => {
                    return Err(PubmedError::QueryRejected(format!(
                        "status {}: {}",
                        resp.status,
                        resp.body.trim()
                    )))
                }
                Err(e) => {
                    rate_limited = false;
                    last_failure = e.to_string();
                }
            }
        }
        warn!(
            "esearch failed after {} retries: {last_failure}",
            BACKOFF.len()
        );
        if rate_limited {
            Err(PubmedError::RateLimited)
        } else {
            Err(PubmedError::UpstreamUnavailable(last_failure))
        }
    }

    fn request(&self, spec: &SearchSpec, retstart: usize) -> HttpRequest {
        let mut query = self.params(&spec.email, &spec.query, retstart, spec.retmax);
        if spec.mindate.is_some() || spec.maxdate.is_some() {
            query.push(("datetype".into(), "edat".into()));
            if let Some(d) = &spec.mindate {
                query.push(("mindate".into(), d.clone()));
            }
            if let Some(d) = &spec.maxdate {
                query.push(("maxdate".into(), d.clone()));
            }
        }
        HttpRequest::get(&self.endpoint, query)
    }

    /// Fetches every PMID matching the query, page by page.
    pub fn esearch(&self, spec: &SearchSpec) -> Result<SearchResult, PubmedError> {
        spec.validate()?;
        let mut pmids: Vec<String> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut retstart = 0usize;
        let mut total: Option<u64> = None;
        loop {
            let body = self.fetch(&self.request(spec, retstart))?;
            let page = parse_envelope(&body)?;
            let count: u64 = page
                .count
                .as_deref()
                .ok_or_else(|| PubmedError::MalformedResponse("missing count".into()))?
                .parse()
                .map_err(|_| PubmedError::MalformedResponse("count is not a number".into()))?;
            if count > MAX_RESULTS {
                return Err(PubmedError::ResultTruncated(count));
            }
            let total = *total.get_or_insert(count);
            let page_len = page.idlist.len();
            for id in page.idlist {
                if seen.insert(id.clone()) {
                    pmids.push(id);
                }
            }
            retstart += spec.retmax;
            if retstart as u64 >= total {
                break;
            }
            if page_len == 0 {
                warn!("esearch returned an empty page at retstart {retstart} of {total}; stopping");
                break;
            }
        }
        Ok(SearchResult {
            pmids,
            total: total.unwrap_or(0),
        })
    }

    /// Runs Automatic Term Mapping on free text and returns the MeSH headings
    /// of its translation.
    pub fn atm_translate(&self, text: &str, email: &str) -> Result<Vec<String>, PubmedError> {
        if email.trim().is_empty() {
            return Err(PubmedError::InvalidSpec(
                "a contact email is required by E-utilities".into(),
            ));
        }
        let request = HttpRequest::get(&self.endpoint, self.params(email, text, 0, 0));
        let body = self.fetch(&request)?;
        parse_atm_translation(&body)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::http::{HttpResponse, TransportError};

    #[test]
    fn translation_extraction() {
        let t = r#""extensively drug-resistant tuberculosis"[MeSH Terms] OR xdr[All Fields]"#;
        assert_eq!(
            mesh_terms_in_translation(t),
            vec!["extensively drug-resistant tuberculosis"]
        );
        let t = r#"("tuberculosis"[MeSH Terms] OR "tuberculosis"[All Fields]) AND (child[MeSH Terms] OR "child"[All Fields])"#;
        assert_eq!(mesh_terms_in_translation(t), vec!["tuberculosis", "child"]);
        assert!(mesh_terms_in_translation("tb[All Fields]").is_empty());
    }

    #[test]
    fn atm_response_parsing() {
        let body = r#"{"esearchresult":{"count":"0","idlist":[],"querytranslation":"\"eye\"[MeSH Terms] OR \"eye\"[All Fields]"}}"#;
        assert_eq!(parse_atm_translation(body).unwrap(), vec!["eye"]);
        let body = r#"{"esearchresult":{"count":"0","idlist":[]}}"#;
        assert!(matches!(
            parse_atm_translation(body),
            Err(PubmedError::MalformedResponse(_))
        ));
        assert!(matches!(
            parse_atm_translation("not json"),
            Err(PubmedError::MalformedResponse(_))
        ));
    }

    #[test]
    fn spec_validation() {
        assert!(SearchSpec::new("tb", "a@b.c").validate().is_ok());
        assert!(SearchSpec::new("tb", " ").validate().is_err());
        let dated = SearchSpec::new("tb", "a@b.c")
            .with_dates(Some("2010/01/01".into()), Some("2009/12/31".into()));
        assert!(dated.validate().is_err());
        let dated = SearchSpec::new("tb", "a@b.c")
            .with_dates(Some("2009".into()), Some("2009/12/31".into()));
        assert!(dated.validate().is_ok());
        let bad = SearchSpec::new("tb", "a@b.c").with_dates(Some("2009-01-01".into()), None);
        assert!(bad.validate().is_err());
    }

    #[test]
    fn throttle_window_with_fake_clock() {
        let clock = Arc::new(FakeClock::new());
        let throttle = Throttle::new(3, Duration::from_secs(1), clock.clone());
        let mut stamps = Vec::new();
        for _ in 0..10 {
            throttle.acquire();
            stamps.push(clock.now());
        }
        for (i, t) in stamps.iter().enumerate() {
            let in_window = stamps[i..]
                .iter()
                .filter(|&&u| u < *t + Duration::from_secs(1))
                .count();
            assert!(in_window <= 3, "{stamps:?}");
        }
        assert_eq!(stamps[3], Duration::from_secs(1));
        assert_eq!(stamps[9], Duration::from_secs(3));
    }

    struct Scripted {
        responses: Mutex<VecDeque<Result<HttpResponse, TransportError>>>,
        seen: Mutex<Vec<HttpRequest>>,
    }

    impl Scripted {
        fn new(r: Vec<Result<HttpResponse, TransportError>>) -> Arc<Self> {
            Arc::new(Self {
                responses: Mutex::new(r.into()),
                seen: Mutex::new(Vec::new()),
            })
        }
    }

    impl Transport for Scripted {
        fn send(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
            self.seen.lock().unwrap().push(request.clone());
            self.responses
                .lock()
                .unwrap()
                .pop_front()
                .unwrap_or_else(|| {
                    Ok(HttpResponse {
                        status: 500,
                        body: String::new(),
                    })
                })
        }
    }

    fn status(code: u16) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse {
            status: code,
            body: String::new(),
        })
    }

    fn page(count: u64, ids: &[&str]) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse::ok(
            serde_json::json!({"esearchresult": {"count": count.to_string(), "idlist": ids}})
                .to_string(),
        ))
    }

    #[test]
    fn retries_then_gives_up() {
        let clock = Arc::new(FakeClock::new());
        let t = Scripted::new(vec![]);
        let client = PubmedClient::new(t.clone(), clock.clone(), None);
        let err = client.esearch(&SearchSpec::new("tb", "a@b.c")).unwrap_err();
        assert!(matches!(err, PubmedError::UpstreamUnavailable(_)));
        assert_eq!(t.seen.lock().unwrap().len(), 4);
        assert_eq!(
            clock.sleeps(),
            vec![
                Duration::from_secs(1),
                Duration::from_secs(2),
                Duration::from_secs(4)
            ]
        );
    }

    #[test]
    fn rate_limit_then_success() {
        let clock = Arc::new(FakeClock::new());
        let t = Scripted::new(vec![status(429), page(1, &["42"])]);
        let client = PubmedClient::new(t, clock, None);
        let res = client.esearch(&SearchSpec::new("tb", "a@b.c")).unwrap();
        assert_eq!(res.pmids, vec!["42"]);
    }

    #[test]
    fn persistent_rate_limit_surfaces() {
        let clock = Arc::new(FakeClock::new());
        let t = Scripted::new(vec![status(429), status(429), status(429), status(429)]);
        let client = PubmedClient::new(t, clock, None);
        assert_eq!(
            client.esearch(&SearchSpec::new("tb", "a@b.c")),
            Err(PubmedError::RateLimited)
        );
    }

    #[test]
    fn rejected_queries_are_not_retried() {
        let clock = Arc::new(FakeClock::new());
        let t = Scripted::new(vec![Ok(HttpResponse::ok(
            r#"{"esearchresult":{"ERROR":"Invalid query"}}"#,
        ))]);
        let client = PubmedClient::new(t.clone(), clock, None);
        assert!(matches!(
            client.esearch(&SearchSpec::new("(((", "a@b.c")),
            Err(PubmedError::QueryRejected(_))
        ));
        assert_eq!(t.seen.lock().unwrap().len(), 1);
    }

    #[test]
    fn pages_through_results_with_dates() {
        let clock = Arc::new(FakeClock::new());
        let t = Scripted::new(vec![
            page(5, &["1", "2"]),
            page(5, &["3", "4"]),
            page(5, &["4", "5"]),
        ]);
        let client = PubmedClient::new(t.clone(), clock, None);
        let mut spec = SearchSpec::new("tb", "a@b.c")
            .with_dates(Some("2000/01/01".into()), Some("2010/12/31".into()));
        spec.retmax = 2;
        let res = client.esearch(&spec).unwrap();
        assert_eq!(res.total, 5);
        assert_eq!(res.pmids, vec!["1", "2", "3", "4", "5"]);
        let seen = t.seen.lock().unwrap();
        let starts: Vec<&str> = seen
            .iter()
            .map(|r| {
                r.query
                    .iter()
                    .find(|(k, _)| k == "retstart")
                    .unwrap()
                    .1
                    .as_str()
            })
            .collect();
        assert_eq!(starts, vec!["0", "2", "4"]);
        assert!(seen[0]
            .query
            .contains(&("datetype".to_string(), "edat".to_string())));
        assert!(seen[0]
            .query
            .contains(&("mindate".to_string(), "2000/01/01".to_string())));
    }

    #[test]
    fn empty_result_and_cap() {
        let clock = Arc::new(FakeClock::new());
        let client = PubmedClient::new(Scripted::new(vec![page(0, &[])]), clock.clone(), None);
        let res = client.esearch(&SearchSpec::new("zzz", "a@b.c")).unwrap();
        assert_eq!(
            res,
            SearchResult {
                pmids: vec![],
                total: 0
            }
        );

        let client = PubmedClient::new(Scripted::new(vec![page(2_000_000, &[])]), clock, None);
        assert_eq!(
            client.esearch(&SearchSpec::new("a", "a@b.c")),
            Err(PubmedError::ResultTruncated(2_000_000))
        );
    }

    #[test]
    fn api_key_raises_budget() {
        let clock = Arc::new(FakeClock::new());
        let pages: Vec<_> = (0..10).map(|_| page(0, &[])).collect();
        let t = Scripted::new(pages);
        let client = PubmedClient::new(t, clock.clone(), Some("k".into()));
        for _ in 0..10 {
            client.esearch(&SearchSpec::new("a", "a@b.c")).unwrap();
        }
        assert!(clock.sleeps().is_empty());
    }
}
