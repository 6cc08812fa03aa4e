//! Brute-force reference implementations and seeded instance generators.
//!
//! Nothing here depends on `meshsuggest-core`: every oracle recomputes its
//! answer from the definition on plain data, so agreement with the library
//! is evidence rather than tautology.

pub mod gen;
pub mod oracle;

pub use rand_chacha::ChaCha8Rng as Rng;

/// Seeded generator shared by every suite.
pub fn rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
