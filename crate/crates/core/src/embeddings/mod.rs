//! Dense vectors for MeSH terms and keywords.
//!
//! Vector files are plain text. The first non-blank line holds the
//! dimension, every following line is `id<TAB>v1 v2 ... vdim`. MeSH
//! encodings are keyed by uid, keyword encodings by keyword text and word
//! vectors by lowercase token.

mod encoder;
mod fusion;
mod grouping;

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

pub use encoder::{encode_query, EncodeError, HttpEncoder, KeywordLookup, QueryEncoder};
pub use fusion::combsum_fuse;
pub use grouping::{cosine, group_keywords, keyword_vector, DEFAULT_TAU};

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("embedding file not found: {0}")]
    MissingFile(String),
    #[error("malformed embedding file at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("dimension mismatch at line {line}: expected {expected}, found {found}")]
    DimensionMismatch {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value at line {0}")]
    NonFiniteValue(usize),
    #[error("duplicate id {id} at line {line}")]
    DuplicateId { line: usize, id: String },
    #[error("query vector has dimension {found}, store has {expected}")]
    QueryDimension { expected: usize, found: usize },
    #[error("cut-off must be at least 1")]
    ZeroDepth,
    #[error("empty input")]
    EmptyInput,
    #[error("duplicate keyword {0:?}")]
    DuplicateKeyword(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Precomputed vectors keyed by id, all of one dimension.
///
/// Ids are kept in ascending order so that exhaustive scoring visits them in
/// tie-break order.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingStore {
    dim: usize,
    ids: Vec<String>,
    data: Vec<f32>,
    index: HashMap<String, usize>,
}

impl EmbeddingStore {
    /// Builds a store from `(id, vector)` pairs.
    pub fn from_vectors(
        dim: usize,
        vectors: impl IntoIterator<Item = (String, Vec<f32>)>,
    ) -> Result<Self, EmbeddingError> {
        if dim == 0 {
            return Err(EmbeddingError::Malformed {
                line: 0,
                reason: "dimension must be positive".into(),
            });
        }
        let mut rows: Vec<(String, Vec<f32>)> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (i, (id, v)) in vectors.into_iter().enumerate() {
            let line = i + 1;
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line,
                    expected: dim,
                    found: v.len(),
                });
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(EmbeddingError::NonFiniteValue(line));
            }
            if !seen.insert(id.clone()) {
                return Err(EmbeddingError::DuplicateId { line, id });
            }
            rows.push((id, v));
        }
        rows.sort_by(|a, b| a.0.cmp(&b.0));
        let mut ids = Vec::with_capacity(rows.len());
        let mut data = Vec::with_capacity(rows.len() * dim);
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (id, v)) in rows.into_iter().enumerate() {
            index.insert(id.clone(), i);
            ids.push(id);
            data.extend_from_slice(&v);
        }
        Ok(Self {
            dim,
            ids,
            data,
            index,
        })
    }

    pub fn parse(content: &str) -> Result<Self, EmbeddingError> {
        let mut lines = content
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
            .filter(|(_, l)| !l.trim().is_empty());
        let Some((header_line, header)) = lines.next() else {
            return Err(EmbeddingError::Malformed {
                line: 1,
                reason: "missing dimension header".into(),
            });
        };
        let dim: usize = header
            .trim()
            .parse()
            .ok()
            .filter(|&d| d > 0)
            .ok_or_else(|| EmbeddingError::Malformed {
                line: header_line,
                reason: format!("invalid dimension {:?}", header.trim()),
            })?;

        let mut rows = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for (line, raw) in lines {
            let (id, values) = raw
                .split_once('\t')
                .ok_or_else(|| EmbeddingError::Malformed {
                    line,
                    reason: "expected id<TAB>values".into(),
                })?;
            let id = id.trim();
            if id.is_empty() {
                return Err(EmbeddingError::Malformed {
                    line,
                    reason: "empty id".into(),
                });
            }
            let mut v = Vec::with_capacity(dim);
            for tok in values.split_whitespace() {
                let x: f32 = tok.parse().map_err(|_| EmbeddingError::Malformed {
                    line,
                    reason: format!("not a number: {tok:?}"),
                })?;
                if !x.is_finite() {
                    return Err(EmbeddingError::NonFiniteValue(line));
                }
                v.push(x);
            }
            if v.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    line,
                    expected: dim,
                    found: v.len(),
                });
            }
            if !seen.insert(id.to_string()) {
                return Err(EmbeddingError::DuplicateId {
                    line,
                    id: id.to_string(),
                });
            }
            rows.push((id.to_string(), v));
        }
        Self::from_vectors(dim, rows)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        let path = path.as_ref();
        let content = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            io::ErrorKind::NotFound => EmbeddingError::MissingFile(path.display().to_string()),
            _ => EmbeddingError::Io(e),
        })?;
        Self::parse(&content)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.dim);
        for (id, v) in self.iter() {
            out.push_str(id);
            out.push('\t');
            for (i, x) in v.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "{x}");
            }
            out.push('\n');
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&[f32]> {
        self.index.get(id).map(|&i| self.row(i))
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[f32])> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), self.row(i)))
    }

    fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Keeps only ids accepted by `keep`.
    pub fn retain(&self, mut keep: impl FnMut(&str) -> bool) -> Self {
        let rows = self
            .iter()
            .filter(|(id, _)| keep(id))
            .map(|(id, v)| (id.to_string(), v.to_vec()));
        Self::from_vectors(self.dim, rows).expect("subset of a valid store is valid")
    }
}

/// Dot product accumulated in f64.
pub fn dot(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| f64::from(x) * f64::from(y))
        .sum()
}

/// Token-keyed word vectors for keyword grouping.
#[derive(Debug, Clone, PartialEq)]
pub struct WordVectorModel {
    store: EmbeddingStore,
}

impl WordVectorModel {
    /// Tokens are lowercased; two entries lowercasing to the same token are an
    /// error.
    pub fn new(store: EmbeddingStore) -> Result<Self, EmbeddingError> {
        let rows: Vec<(String, Vec<f32>)> = store
            .iter()
            .map(|(id, v)| (id.to_lowercase(), v.to_vec()))
            .collect();
        Ok(Self {
            store: EmbeddingStore::from_vectors(store.dim(), rows)?,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, EmbeddingError> {
        Self::new(EmbeddingStore::load(path)?)
    }

    pub fn dim(&self) -> usize {
        self.store.dim()
    }

    pub fn len(&self) -> usize {
        self.store.len()
    }

    pub fn is_empty(&self) -> bool {
        self.store.is_empty()
    }

    pub fn token(&self, token: &str) -> Option<&[f32]> {
        self.store.get(token)
    }
}

/// A scored, ordered list of MeSH uids answering one keyword or keyword group.
///
/// Entries are ordered by descending score with ties broken by ascending uid,
/// and each uid appears once.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    for_keys: Vec<String>,
    entries: Vec<(String, f64)>,
}

/// Descending score order in which `-0.0` and `0.0` tie. Scores are finite.
fn desc(a: f64, b: f64) -> Ordering {
    b.partial_cmp(&a).unwrap_or(Ordering::Equal)
}

pub(crate) fn by_score_then_uid(a: &(String, f64), b: &(String, f64)) -> Ordering {
    desc(a.1, b.1).then_with(|| a.0.cmp(&b.0))
}

impl Ranking {
    /// Orders arbitrary scored entries. A repeated uid keeps its best score.
    pub fn from_scores(for_keys: Vec<String>, mut entries: Vec<(String, f64)>) -> Self {
        entries.sort_by(by_score_then_uid);
        let mut seen = std::collections::HashSet::new();
        entries.retain(|(uid, _)| seen.insert(uid.clone()));
        Self { for_keys, entries }
    }

    pub fn empty(for_keys: Vec<String>) -> Self {
        Self {
            for_keys,
            entries: Vec::new(),
        }
    }

    pub fn for_keys(&self) -> &[String] {
        &self.for_keys
    }

    pub fn entries(&self) -> &[(String, f64)] {
        &self.entries
    }

    pub fn uids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|(u, _)| u.as_str())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn truncate(&mut self, k: usize) {
        self.entries.truncate(k);
    }

    pub fn into_entries(self) -> Vec<(String, f64)> {
        self.entries
    }
}

/// Exhaustive dot-product ranking of every vector in `store` against `query`,
/// keeping the best `k`.
pub fn rank_terms(
    query: &[f32],
    store: &EmbeddingStore,
    k: usize,
    for_keys: Vec<String>,
) -> Result<Ranking, EmbeddingError> {
    if k == 0 {
        return Err(EmbeddingError::ZeroDepth);
    }
    if query.len() != store.dim() {
        return Err(EmbeddingError::QueryDimension {
            expected: store.dim(),
            found: query.len(),
        });
    }
    let mut scored: Vec<(usize, f64)> = (0..store.len())
        .map(|i| (i, dot(query, store.row(i))))
        .collect();
    // Row order is uid order, so comparing row indices breaks ties by uid.
    let cmp = |a: &(usize, f64), b: &(usize, f64)| desc(a.1, b.1).then(a.0.cmp(&b.0));
    if scored.len() > k {
        scored.select_nth_unstable_by(k - 1, cmp);
        scored.truncate(k);
    }
    scored.sort_unstable_by(cmp);
    let entries = scored
        .into_iter()
        .map(|(i, s)| (store.ids[i].clone(), s))
        .collect();
    Ok(Ranking { for_keys, entries })
}
