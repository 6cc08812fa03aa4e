//! MeSH term suggestion for systematic-review Boolean query construction.
//!
//! The crate is organised around the life of a suggestion run:
//!
//! - [`vocab`] loads the MeSH vocabulary and answers name and tree lookups.
//! - [`embeddings`] holds precomputed dense vectors, ranks terms against a
//!   query vector, fuses rankings with CombSUM and groups keywords.
//! - [`lexical`] is a BM25 index over preferred names and entry terms.
//! - [`suggest`] implements the suggestion methods and the method registry.
//! - [`query`] parses and renders PubMed Boolean queries.
//! - [`pubmed`] talks to the E-utilities search endpoint.
//! - [`eval`] runs the retrieval pipeline over topics and scores runs.
//! - [`http`] is the small transport layer shared by the network clients,
//!   including record/replay fixtures.

pub mod embeddings;
pub mod eval;
pub mod http;
pub mod lexical;
pub mod pubmed;
pub mod query;
pub mod suggest;
pub mod text;
pub mod vocab;

pub use embeddings::{EmbeddingStore, Ranking, WordVectorModel};
pub use query::{BooleanClause, StructuredQuery};
pub use suggest::{
    Method, MethodRegistry, Resources, SuggestedTerm, SuggestionGroup, SuggestionRequest,
};
pub use vocab::{MeshTerm, Vocabulary};
