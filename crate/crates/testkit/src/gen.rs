use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng as _;

use crate::Rng;

/// `(topic, pmid, relevance)`.
pub type Judgment = (String, String, i32);

fn uid(i: usize) -> String {
    format!("D{i:06}")
}

/// Scores drawn from a small grid half of the time so ties are common.
fn score(rng: &mut Rng) -> f64 {
    if rng.random_bool(0.5) {
        f64::from(rng.random_range(-3i32..=3))
    } else {
        rng.random_range(-5.0..5.0)
    }
}

/// Between 1 and `max_rankings` rankings, each over distinct uids drawn from a
/// pool of at most `max_uids`. Rankings are sorted descending, ties by uid.
pub fn rankings(rng: &mut Rng, max_rankings: usize, max_uids: usize) -> Vec<Vec<(String, f64)>> {
    let pool_size = rng.random_range(1..=max_uids);
    let pool: Vec<String> = (0..pool_size).map(uid).collect();
    (0..rng.random_range(1..=max_rankings))
        .map(|_| {
            let len = rng.random_range(1..=pool_size);
            let mut r: Vec<(String, f64)> = pool
                .choose_multiple(rng, len)
                .map(|u| (u.clone(), score(rng)))
                .collect();
            r.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
            r
        })
        .collect()
}

/// A store of at most `max_terms` uids with vectors of dimension at most
/// `max_dim`, plus a query vector. Components are quantised a quarter of the
/// time to force score ties.
pub fn store(
    rng: &mut Rng,
    max_terms: usize,
    max_dim: usize,
) -> (Vec<f32>, Vec<(String, Vec<f32>)>) {
    let dim = rng.random_range(1..=max_dim);
    let n = rng.random_range(1..=max_terms);
    let coarse = rng.random_bool(0.25);
    let component = |rng: &mut Rng| -> f32 {
        if coarse {
            rng.random_range(-2i8..=2) as f32
        } else {
            rng.random_range(-1.0f32..1.0)
        }
    };
    let query = (0..dim).map(|_| component(rng)).collect();
    let mut ids: Vec<usize> = (0..n * 3).collect();
    ids.shuffle(rng);
    let rows = ids[..n]
        .iter()
        .map(|&i| (uid(i), (0..dim).map(|_| component(rng)).collect()))
        .collect();
    (query, rows)
}

const WORDS: &[&str] = &[
    "tb",
    "tuberculosis",
    "child",
    "children",
    "diabetes",
    "type",
    "2",
    "insulin",
    "blood",
    "pressure",
    "drug-resistant",
    "covid-19",
    "sars-cov-2",
    "o'brien",
    "beta-blockers",
    "and",
    "or",
    "not",
    "near",
    "x-ray",
    "hiv/aids",
    "mellitus,",
    "vitamin",
    "d",
    "care",
    "trial*",
    "(acute)",
    "[1]",
    "adult",
    "XDR-TB",
    "MeSH",
    "tiab",
];

/// A term of one to four words; always free of quotes and outer whitespace.
pub fn term(rng: &mut Rng) -> String {
    let n = rng.random_range(1..=4);
    (0..n)
        .map(|_| *WORDS.choose(rng).expect("non-empty"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Clauses of `(keywords, mesh terms)`; every clause has at least one term.
pub fn query(
    rng: &mut Rng,
    max_clauses: usize,
    max_terms: usize,
) -> Vec<(Vec<String>, Vec<String>)> {
    (0..rng.random_range(1..=max_clauses))
        .map(|_| loop {
            let kw: Vec<String> = (0..rng.random_range(0..=max_terms))
                .map(|_| term(rng))
                .collect();
            let mesh: Vec<String> = (0..rng.random_range(0..=max_terms))
                .map(|_| term(rng))
                .collect();
            if !kw.is_empty() || !mesh.is_empty() {
                break (kw, mesh);
            }
        })
        .collect()
}

/// Run records and TREC qrels over up to `max_topics` topics and a PMID pool
/// of `pool` documents. Some topics have no relevant document, some run
/// records repeat.
pub fn run_and_qrels(
    rng: &mut Rng,
    max_topics: usize,
    pool: usize,
) -> (Vec<(String, String)>, Vec<Judgment>) {
    let mut run = Vec::new();
    let mut qrels = Vec::new();
    for t in 0..rng.random_range(1..=max_topics) {
        let topic = format!("T{t:02}");
        let judged = rng.random_range(0..=pool);
        for p in 0..judged {
            let rel = if rng.random_bool(0.3) {
                rng.random_range(1..=2)
            } else {
                0
            };
            qrels.push((topic.clone(), format!("{}", 1000 + p), rel));
        }
        if judged == 0 {
            qrels.push((topic.clone(), "1".into(), 0));
        }
        for _ in 0..rng.random_range(0..=pool) {
            let p = rng.random_range(0..pool + pool / 2 + 1);
            run.push((topic.clone(), format!("{}", 1000 + p)));
        }
    }
    run.shuffle(rng);
    (run, qrels)
}
