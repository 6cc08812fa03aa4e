//! In-memory BM25 index over MeSH preferred names and entry terms.
//!
//! Each descriptor is one document whose text is its preferred name followed
//! by its entry terms. Terms whose preferred name or an entry term equals the
//! normalised query are placed above every partial match.

use std::collections::HashMap;

use crate::embeddings::Ranking;
use crate::text::{normalize, tokenize};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bm25Params {
    pub k1: f64,
    pub b: f64,
}

impl Default for Bm25Params {
    fn default() -> Self {
        Self { k1: 1.2, b: 0.75 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum ExactTier {
    PreferredName = 0,
    EntryTerm = 1,
}

#[derive(Debug, Clone)]
pub struct LexicalIndex {
    params: Bm25Params,
    uids: Vec<String>,
    doc_len: Vec<u32>,
    avg_len: f64,
    postings: HashMap<String, Vec<(u32, u32)>>,
    exact: HashMap<String, Vec<(ExactTier, u32)>>,
}

/// Lucene-style idf, always positive.
pub fn idf(doc_count: usize, doc_freq: usize) -> f64 {
    let n = doc_count as f64;
    let df = doc_freq as f64;
    (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
}

impl LexicalIndex {
    pub fn build(vocab: &Vocabulary) -> Self {
        Self::with_params(vocab, Bm25Params::default())
    }

    pub fn with_params(vocab: &Vocabulary, params: Bm25Params) -> Self {
        let mut uids = Vec::with_capacity(vocab.len());
        let mut doc_len = Vec::with_capacity(vocab.len());
        let mut postings: HashMap<String, Vec<(u32, u32)>> = HashMap::new();
        let mut exact: HashMap<String, Vec<(ExactTier, u32)>> = HashMap::new();

        for (doc, term) in vocab.terms().enumerate() {
            let doc = doc as u32;
            uids.push(term.uid.clone());
            exact
                .entry(normalize(&term.name))
                .or_default()
                .push((ExactTier::PreferredName, doc));
            for entry in &term.entry_terms {
                let list = exact.entry(normalize(entry)).or_default();
                if !list.iter().any(|&(_, d)| d == doc) {
                    list.push((ExactTier::EntryTerm, doc));
                }
            }

            let mut tokens = tokenize(&term.name);
            for entry in &term.entry_terms {
                tokens.extend(tokenize(entry));
            }
            doc_len.push(tokens.len() as u32);
            let mut tf: HashMap<String, u32> = HashMap::new();
            for t in tokens {
                *tf.entry(t).or_insert(0) += 1;
            }
            for (t, f) in tf {
                postings.entry(t).or_default().push((doc, f));
            }
        }
        for list in exact.values_mut() {
            list.sort();
        }
        let total: u64 = doc_len.iter().map(|&l| u64::from(l)).sum();
        let avg_len = if doc_len.is_empty() {
            0.0
        } else {
            total as f64 / doc_len.len() as f64
        };
        Self {
            params,
            uids,
            doc_len,
            avg_len,
            postings,
            exact,
        }
    }

    pub fn len(&self) -> usize {
        self.uids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.uids.is_empty()
    }

    /// BM25 scores of every matching document, without exact-match boosting.
    /// Repeated query tokens count once.
    pub fn bm25_scores(&self, query: &str) -> Vec<(String, f64)> {
        let mut tokens = tokenize(query);
        tokens.sort();
        tokens.dedup();
        let Bm25Params { k1, b } = self.params;
        let mut acc: HashMap<u32, f64> = HashMap::new();
        for t in &tokens {
            let Some(list) = self.postings.get(t) else {
                continue;
            };
            let w = idf(self.uids.len(), list.len());
            for &(doc, tf) in list {
                let tf = f64::from(tf);
                let len_norm = 1.0 - b + b * f64::from(self.doc_len[doc as usize]) / self.avg_len;
                *acc.entry(doc).or_insert(0.0) += w * tf * (k1 + 1.0) / (tf + k1 * len_norm);
            }
        }
        acc.into_iter()
            .map(|(doc, s)| (self.uids[doc as usize].clone(), s))
            .collect()
    }

    /// Top `k` uids for a free-text query.
    pub fn search(&self, query: &str, k: usize) -> Ranking {
        let key = normalize(query);
        let scores = self.bm25_scores(query);
        let top = scores.iter().map(|(_, s)| *s).fold(0.0f64, f64::max);
        let mut entries: Vec<(String, f64)> = Vec::new();
        if let Some(hits) = self.exact.get(&key) {
            for &(tier, doc) in hits {
                let boost = match tier {
                    ExactTier::PreferredName => 2.0,
                    ExactTier::EntryTerm => 1.0,
                };
                entries.push((self.uids[doc as usize].clone(), top + boost));
            }
        }
        entries.extend(scores);
        let mut ranking = Ranking::from_scores(vec![query.to_string()], entries);
        ranking.truncate(k);
        ranking
    }
}
