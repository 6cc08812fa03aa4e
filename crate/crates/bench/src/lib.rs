//! Seeded synthetic inputs at MeSH scale for the benchmarks.

use meshsuggest_core::embeddings::Ranking;
use meshsuggest_core::{EmbeddingStore, MeshTerm, Vocabulary, WordVectorModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Roughly the number of descriptors in a MeSH edition.
pub const MESH_SIZE: usize = 30_000;

const SYLLABLES: [&str; 16] = [
    "cardio", "neuro", "hepat", "nephr", "onco", "derm", "gastr", "pulmon", "itis", "osis", "emia",
    "pathy", "plasia", "ectomy", "logy", "trophy",
];

fn uid(i: usize) -> String {
    format!("D{i:06}")
}

fn unit(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f32> {
    let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let norm = v
        .iter()
        .map(|x| x * x)
        .sum::<f32>()
        .sqrt()
        .max(f32::EPSILON);
    v.into_iter().map(|x| x / norm).collect()
}

/// `n` unit vectors of dimension `dim`, plus a query vector.
pub fn store(n: usize, dim: usize, seed: u64) -> (Vec<f32>, EmbeddingStore) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<(String, Vec<f32>)> = (0..n).map(|i| (uid(i), unit(&mut rng, dim))).collect();
    let query = unit(&mut rng, dim);
    (
        query,
        EmbeddingStore::from_vectors(dim, rows).expect("valid store"),
    )
}

/// `count` rankings of `depth` entries each, drawn from a pool of `pool` uids.
pub fn rankings(count: usize, depth: usize, pool: usize, seed: u64) -> Vec<Ranking> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let mut entries: Vec<(String, f64)> = Vec::with_capacity(depth);
            while entries.len() < depth {
                let u = uid(rng.random_range(0..pool));
                if !entries.iter().any(|(e, _)| *e == u) {
                    entries.push((u, rng.random_range(0.0..1.0)));
                }
            }
            Ranking::from_scores(vec![format!("k{k}")], entries)
        })
        .collect()
}

fn word(rng: &mut ChaCha8Rng) -> String {
    (0..rng.random_range(1..=3))
        .map(|_| SYLLABLES[rng.random_range(0..SYLLABLES.len())])
        .collect()
}

/// A vocabulary of `n` terms with two-word names and a few entry terms each.
pub fn vocabulary(n: usize, seed: u64) -> Vocabulary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<MeshTerm> = (0..n)
        .map(|i| MeshTerm {
            uid: uid(i),
            name: format!("{} {}", word(&mut rng), word(&mut rng)),
            entry_terms: (0..rng.random_range(0..4))
                .map(|_| word(&mut rng))
                .collect(),
            tree_numbers: Vec::new(),
        })
        .collect();
    Vocabulary::from_terms(terms).expect("unique uids")
}

/// `n` keywords with word vectors of dimension `dim`.
pub fn keywords(n: usize, dim: usize, seed: u64) -> (Vec<String>, WordVectorModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let words: Vec<String> = (0..n).map(|i| format!("kw{i}")).collect();
    let rows = words.iter().map(|w| (w.clone(), unit(&mut rng, dim)));
    let model = WordVectorModel::new(EmbeddingStore::from_vectors(dim, rows).expect("valid store"))
        .expect("distinct tokens");
    (words, model)
}
