//! HTTP front for the suggestion methods.
//!
//! - `POST /suggest` takes `{"Keywords": [...], "Type": "Atomic"}` and answers
//!   with an array of groups, each carrying up to ten ranked MeSH names under
//!   string indices `"0"`, `"1"`, ...
//! - `POST /log` appends a front-end interaction to a JSON-lines file.
//! - `GET /health` reports what is loaded; `POST /reload` reloads it.

pub mod app;
pub mod config;
pub mod log;
pub mod wire;

pub use app::{router, AppState};
pub use config::ServiceConfig;
pub use wire::{
    ApiGroup, ApiSuggestionRequest, ApiSuggestionResponse, InteractionEvent, MeshTerms,
};
