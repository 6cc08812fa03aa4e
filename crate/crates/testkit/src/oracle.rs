use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

fn desc_score_asc_id(a: &(String, f64), b: &(String, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .expect("finite scores")
        .then_with(|| a.0.cmp(&b.0))
}

/// Scores every row by dot product (accumulated in f64, left to right) and
/// sorts the whole store: descending score, ascending id.
pub fn full_sort(query: &[f32], rows: &[(String, Vec<f32>)]) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = rows
        .iter()
        .map(|(id, v)| {
            let mut s = 0.0f64;
            for i in 0..query.len() {
                s += query[i] as f64 * v[i] as f64;
            }
            (id.clone(), s)
        })
        .collect();
    all.sort_by(desc_score_asc_id);
    all
}

/// Normalised CombSUM by materialising the rankings × uids matrix of
/// min-max normalised scores (0 where a ranking lacks the uid) and summing
/// its columns.
pub fn combsum_matrix(rankings: &[Vec<(String, f64)>], depth: usize) -> Vec<(String, f64)> {
    let uids: Vec<&String> = rankings
        .iter()
        .flatten()
        .map(|(u, _)| u)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let matrix: Vec<Vec<f64>> = rankings
        .iter()
        .map(|r| {
            let min = r.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
            let max = r.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
            uids.iter()
                .map(|u| match r.iter().find(|(x, _)| x == *u) {
                    Some((_, s)) if max > min => (s - min) / (max - min),
                    Some(_) => 1.0,
                    None => 0.0,
                })
                .collect()
        })
        .collect();
    let mut fused: Vec<(String, f64)> = uids
        .iter()
        .enumerate()
        .map(|(col, u)| ((*u).clone(), matrix.iter().map(|row| row[col]).sum()))
        .collect();
    fused.sort_by(desc_score_asc_id);
    fused.truncate(depth);
    fused
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        -1.0
    } else {
        (dot / (na * nb)).clamp(-1.0, 1.0)
    }
}

/// Average-linkage agglomerative clustering that recomputes every cluster
/// similarity from the member pairs at each step. Returns member indices,
/// groups ordered by first member.
pub fn average_linkage(vectors: &[Vec<f64>], tau: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = (0..vectors.len()).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..clusters.len() {
            for j in (i + 1)..clusters.len() {
                let mut total = 0.0;
                for &a in &clusters[i] {
                    for &b in &clusters[j] {
                        total += cosine(&vectors[a], &vectors[b]);
                    }
                }
                let s = total / (clusters[i].len() * clusters[j].len()) as f64;
                if best.is_none_or(|(_, _, bs)| s > bs) {
                    best = Some((i, j, s));
                }
            }
        }
        match best {
            Some((i, j, s)) if s >= tau => {
                let absorbed = clusters.remove(j);
                clusters[i].extend(absorbed);
                clusters[i].sort_unstable();
            }
            _ => break,
        }
    }
    clusters.sort_by_key(|c| c[0]);
    clusters
}

/// Lowercase alphanumeric runs.
pub fn tokens(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// Okapi BM25 with the Lucene idf `ln(1 + (N - n + 0.5) / (n + 0.5))`,
/// scoring every document directly from its token list. Distinct query
/// tokens only; documents without a matching token are omitted.
pub fn bm25(docs: &[(String, Vec<String>)], query: &str, k1: f64, b: f64) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let avg = docs.iter().map(|(_, t)| t.len()).sum::<usize>() as f64 / n;
    let q: BTreeSet<String> = tokens(query).into_iter().collect();
    let mut out = Vec::new();
    for (id, doc) in docs {
        let mut score = 0.0;
        let mut hit = false;
        for t in &q {
            let tf = doc.iter().filter(|d| *d == t).count() as f64;
            if tf == 0.0 {
                continue;
            }
            hit = true;
            let df = docs.iter().filter(|(_, d)| d.contains(t)).count() as f64;
            let idf = (1.0 + (n - df + 0.5) / (df + 0.5)).ln();
            score += idf * tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc.len() as f64 / avg));
        }
        if hit {
            out.push((id.clone(), score));
        }
    }
    out.sort_by(desc_score_asc_id);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SetScores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub relevant: usize,
}

/// Per-topic set precision, recall and F1 for every topic in the run, plus
/// the macro means over topics with at least one relevant document.
pub fn set_metrics(
    run: &[(String, String)],
    qrels: &[(String, String, i32)],
) -> (BTreeMap<String, SetScores>, [f64; 3]) {
    let mut retrieved: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for (t, p) in run {
        retrieved.entry(t).or_default().insert(p);
    }
    let mut per_topic = BTreeMap::new();
    for (topic, ret) in &retrieved {
        let rel: BTreeSet<&str> = qrels
            .iter()
            .filter(|(t, _, r)| t == topic && *r > 0)
            .map(|(_, p, _)| p.as_str())
            .collect();
        let hits = ret.intersection(&rel).count() as f64;
        let p = if ret.is_empty() {
            0.0
        } else {
            hits / ret.len() as f64
        };
        let r = if rel.is_empty() {
            0.0
        } else {
            hits / rel.len() as f64
        };
        let f = if p + r > 0.0 {
            2.0 * p * r / (p + r)
        } else {
            0.0
        };
        per_topic.insert(
            topic.to_string(),
            SetScores {
                precision: p,
                recall: r,
                f1: f,
                relevant: rel.len(),
            },
        );
    }
    let included: Vec<&SetScores> = per_topic.values().filter(|s| s.relevant > 0).collect();
    let mean = |f: fn(&SetScores) -> f64| {
        if included.is_empty() {
            0.0
        } else {
            included.iter().map(|s| f(s)).sum::<f64>() / included.len() as f64
        }
    };
    let means = [mean(|s| s.precision), mean(|s| s.recall), mean(|s| s.f1)];
    (per_topic, means)
}
