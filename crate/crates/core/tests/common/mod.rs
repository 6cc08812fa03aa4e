#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use meshsuggest_core::embeddings::KeywordLookup;
use meshsuggest_core::http::{ReplayTransport, Transport};
use meshsuggest_core::pubmed::{FakeClock, PubmedClient};
use meshsuggest_core::suggest::StubConceptMapper;
use meshsuggest_core::{EmbeddingStore, Resources, Vocabulary, WordVectorModel};

pub const EMAIL: &str = "tests@example.org";

pub fn mini(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("data/mini")
        .join(file)
}

pub fn golden(file: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(file)
}

pub fn vocab() -> Arc<Vocabulary> {
    Arc::new(Vocabulary::load(mini("mesh.tsv")).unwrap())
}

pub fn replay_client() -> (Arc<PubmedClient>, Arc<FakeClock>) {
    let transport: Arc<dyn Transport> =
        Arc::new(ReplayTransport::from_file(mini("cassette.json")).unwrap());
    let clock = Arc::new(FakeClock::new());
    (
        Arc::new(PubmedClient::new(transport, clock.clone(), None)),
        clock,
    )
}

/// Every MINI resource, wired to the replay cassette.
pub fn resources() -> Resources {
    let (client, _) = replay_client();
    Resources::new(vocab())
        .with_mesh_encoding(Arc::new(
            EmbeddingStore::load(mini("mesh_encoding.vec")).unwrap(),
        ))
        .unwrap()
        .with_encoder(Arc::new(KeywordLookup::new(
            EmbeddingStore::load(mini("keywords.vec")).unwrap(),
        )))
        .with_word_vectors(Arc::new(WordVectorModel::load(mini("w2v.vec")).unwrap()))
        .with_concept_mapper(Arc::new(
            StubConceptMapper::load(mini("metamap.tsv")).unwrap(),
        ))
        .with_pubmed(client, EMAIL)
}

/// Compares `actual` with a committed golden file, rewriting the file instead
/// when `MESHSUGGEST_BLESS=1`.
pub fn assert_golden(file: &str, actual: &str) {
    let path = golden(file);
    if std::env::var("MESHSUGGEST_BLESS").as_deref() == Ok("1") {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected =
        std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}
