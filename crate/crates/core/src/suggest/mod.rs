//! MeSH term suggestion methods behind one interface.
//!
//! Lexical methods: ATM (PubMed's Automatic Term Mapping), MetaMap (external
//! concept mapper) and UMLS (BM25 over the vocabulary). Neural methods rank
//! precomputed MeSH encodings against encoded keywords: Atomic per keyword,
//! Fragment after fusing all keyword rankings, Semantic after fusing within
//! groups of similar keywords.

mod loader;
pub mod metamap;
mod methods;
mod registry;

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::{
    EmbeddingError, EmbeddingStore, EncodeError, QueryEncoder, WordVectorModel, DEFAULT_TAU,
};
use crate::lexical::LexicalIndex;
use crate::pubmed::{PubmedClient, PubmedError};
use crate::vocab::Vocabulary;

pub use loader::{encode_vocabulary, is_url, LoadError, ResourceSpec};
pub use metamap::{ConceptMapper, HttpConceptMapper, MapperError, StubConceptMapper};
pub use methods::{
    suggest_atm, suggest_atomic, suggest_fragment, suggest_metamap, suggest_semantic, suggest_umls,
};
pub use registry::{MethodRegistry, UserMethod};

/// Default number of fused candidates kept per keyword.
pub const DEFAULT_INTERPOLATION_DEPTH: usize = 20;
/// Default number of terms suggested per group.
pub const DEFAULT_DEPTH: usize = 1;

#[derive(Debug, Error)]
pub enum SuggestError {
    #[error("no keywords given")]
    EmptyKeywords,
    #[error("keyword {0} is blank")]
    BlankKeyword(usize),
    #[error("depth must be at least 1 and interpolation depth at least depth (got {depth}, {interpolation_depth})")]
    InvalidDepth {
        depth: usize,
        interpolation_depth: usize,
    },
    #[error("method needs {0}, which is not configured")]
    MissingResource(&'static str),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("upstream unavailable: {0}")]
    UpstreamUnavailable(String),
    #[error(transparent)]
    Pubmed(PubmedError),
    #[error(transparent)]
    Mapper(MapperError),
    #[error("unknown method {0:?}")]
    UnknownMethod(String),
    #[error("method {0:?} is already registered")]
    DuplicateRegistration(String),
    #[error("suggested uid {0} is not in the vocabulary")]
    UnknownUid(String),
    #[error("MeSH encoding contains {0} ids missing from the vocabulary, e.g. {1}")]
    EncodingOutsideVocabulary(usize, String),
}

impl From<PubmedError> for SuggestError {
    fn from(e: PubmedError) -> Self {
        match e {
            PubmedError::UpstreamUnavailable(m) => SuggestError::UpstreamUnavailable(m),
            other => SuggestError::Pubmed(other),
        }
    }
}

impl From<MapperError> for SuggestError {
    fn from(e: MapperError) -> Self {
        match e {
            MapperError::Unavailable(m) => SuggestError::UpstreamUnavailable(m),
            other => SuggestError::Mapper(other),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Method {
    Atm,
    MetaMap,
    Umls,
    AtomicBert,
    FragmentBert,
    SemanticBert,
    /// A user-registered method; `NEW` is the conventional name.
    User(String),
}

impl Method {
    pub const BUILTIN: [Method; 6] = [
        Method::Atm,
        Method::MetaMap,
        Method::Umls,
        Method::AtomicBert,
        Method::FragmentBert,
        Method::SemanticBert,
    ];

    pub fn new_method() -> Self {
        Method::User("NEW".into())
    }

    pub fn name(&self) -> &str {
        match self {
            Method::Atm => "ATM",
            Method::MetaMap => "MetaMap",
            Method::Umls => "UMLS",
            Method::AtomicBert => "Atomic-BERT",
            Method::FragmentBert => "Fragment-BERT",
            Method::SemanticBert => "Semantic-BERT",
            Method::User(name) => name,
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, Method::User(_))
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = SuggestError;

    /// Built-in names match case-insensitively; anything else names a user
    /// method.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Err(SuggestError::UnknownMethod(String::new()));
        }
        Ok(Method::BUILTIN
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .unwrap_or_else(|| Method::User(s.to_string())))
    }
}

impl Serialize for Method {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for Method {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuggestionRequest {
    pub keywords: Vec<String>,
    pub method: Method,
    pub depth: usize,
    pub interpolation_depth: usize,
}

impl SuggestionRequest {
    pub fn new(keywords: Vec<String>, method: Method) -> Self {
        Self {
            keywords,
            method,
            depth: DEFAULT_DEPTH,
            interpolation_depth: DEFAULT_INTERPOLATION_DEPTH,
        }
    }

    pub fn with_depths(mut self, depth: usize, interpolation_depth: usize) -> Self {
        self.depth = depth;
        self.interpolation_depth = interpolation_depth;
        self
    }

    pub fn validate(&self) -> Result<(), SuggestError> {
        validate_keywords(&self.keywords)?;
        validate_depths(self.depth, self.interpolation_depth)
    }
}

pub(crate) fn validate_keywords(keywords: &[String]) -> Result<(), SuggestError> {
    if keywords.is_empty() {
        return Err(SuggestError::EmptyKeywords);
    }
    if let Some(i) = keywords.iter().position(|k| k.trim().is_empty()) {
        return Err(SuggestError::BlankKeyword(i));
    }
    Ok(())
}

pub(crate) fn validate_depths(
    depth: usize,
    interpolation_depth: usize,
) -> Result<(), SuggestError> {
    if depth == 0 || interpolation_depth < depth {
        return Err(SuggestError::InvalidDepth {
            depth,
            interpolation_depth,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestedTerm {
    pub rank: usize,
    pub name: String,
    pub uid: String,
}

/// Suggestions answering one keyword or keyword group.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuggestionGroup {
    pub keywords: Vec<String>,
    pub method: Method,
    pub terms: Vec<SuggestedTerm>,
}

impl SuggestionGroup {
    /// Builds a group from uids in rank order, numbering ranks from 0.
    pub(crate) fn from_uids<'a>(
        keywords: Vec<String>,
        method: Method,
        uids: impl IntoIterator<Item = &'a str>,
        vocab: &Vocabulary,
    ) -> Result<Self, SuggestError> {
        let mut terms = Vec::new();
        for uid in uids {
            let term = vocab
                .get(uid)
                .ok_or_else(|| SuggestError::UnknownUid(uid.to_string()))?;
            terms.push(SuggestedTerm {
                rank: terms.len(),
                name: term.name.clone(),
                uid: term.uid.clone(),
            });
        }
        Ok(Self {
            keywords,
            method,
            terms,
        })
    }

    pub fn uids(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.uid.as_str())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(|t| t.name.as_str())
    }
}

/// Everything the suggestion methods may need. Only the vocabulary is
/// mandatory; methods report [`SuggestError::MissingResource`] for anything
/// else they lack.
pub struct Resources {
    vocab: Arc<Vocabulary>,
    lexical: OnceLock<LexicalIndex>,
    mesh_encoding: Option<Arc<EmbeddingStore>>,
    encoder: Option<Arc<dyn QueryEncoder>>,
    word_vectors: Option<Arc<WordVectorModel>>,
    concept_mapper: Option<Arc<dyn ConceptMapper>>,
    pubmed: Option<Arc<PubmedClient>>,
    email: String,
    tau: f64,
}

impl Resources {
    pub fn new(vocab: Arc<Vocabulary>) -> Self {
        Self {
            vocab,
            lexical: OnceLock::new(),
            mesh_encoding: None,
            encoder: None,
            word_vectors: None,
            concept_mapper: None,
            pubmed: None,
            email: String::new(),
            tau: DEFAULT_TAU,
        }
    }

    /// MeSH encodings keyed by uid; every id must be in the vocabulary.
    pub fn with_mesh_encoding(mut self, store: Arc<EmbeddingStore>) -> Result<Self, SuggestError> {
        let missing: Vec<&String> = store
            .ids()
            .iter()
            .filter(|id| !self.vocab.contains(id))
            .collect();
        if let Some(first) = missing.first() {
            return Err(SuggestError::EncodingOutsideVocabulary(
                missing.len(),
                (*first).clone(),
            ));
        }
        self.mesh_encoding = Some(store);
        Ok(self)
    }

    pub fn with_encoder(mut self, encoder: Arc<dyn QueryEncoder>) -> Self {
        self.encoder = Some(encoder);
        self
    }

    pub fn with_word_vectors(mut self, model: Arc<WordVectorModel>) -> Self {
        self.word_vectors = Some(model);
        self
    }

    pub fn with_concept_mapper(mut self, mapper: Arc<dyn ConceptMapper>) -> Self {
        self.concept_mapper = Some(mapper);
        self
    }

    pub fn with_pubmed(mut self, client: Arc<PubmedClient>, email: impl Into<String>) -> Self {
        self.pubmed = Some(client);
        self.email = email.into();
        self
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    /// The BM25 index, built on first use.
    pub fn lexical(&self) -> &LexicalIndex {
        self.lexical
            .get_or_init(|| LexicalIndex::build(&self.vocab))
    }

    pub fn mesh_encoding(&self) -> Option<&EmbeddingStore> {
        self.mesh_encoding.as_deref()
    }

    pub fn encoder(&self) -> Option<&dyn QueryEncoder> {
        self.encoder.as_deref()
    }

    pub fn word_vectors(&self) -> Option<&WordVectorModel> {
        self.word_vectors.as_deref()
    }

    pub fn concept_mapper(&self) -> Option<&dyn ConceptMapper> {
        self.concept_mapper.as_deref()
    }

    pub fn pubmed(&self) -> Option<&PubmedClient> {
        self.pubmed.as_deref()
    }

    pub fn email(&self) -> &str {
        &self.email
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub(crate) fn dense(&self) -> Result<(&EmbeddingStore, &dyn QueryEncoder), SuggestError> {
        let store = self
            .mesh_encoding()
            .ok_or(SuggestError::MissingResource("MeSH encodings"))?;
        let encoder = self
            .encoder()
            .ok_or(SuggestError::MissingResource("a query encoder"))?;
        Ok((store, encoder))
    }
}
