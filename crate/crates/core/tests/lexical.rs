mod common;

use meshsuggest_core::lexical::LexicalIndex;
use meshsuggest_core::text::normalize;
use meshsuggest_core::{MeshTerm, Vocabulary};
use meshsuggest_testkit::{gen, oracle, rng};
use proptest::prelude::*;

fn oracle_docs(vocab: &Vocabulary) -> Vec<(String, Vec<String>)> {
    vocab
        .terms()
        .map(|t| {
            let mut tokens = oracle::tokens(&t.name);
            for e in &t.entry_terms {
                tokens.extend(oracle::tokens(e));
            }
            (t.uid.clone(), tokens)
        })
        .collect()
}

fn sorted_scores(index: &LexicalIndex, query: &str) -> Vec<(String, f64)> {
    let mut s = index.bm25_scores(query);
    s.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    s
}

fn assert_close(got: &[(String, f64)], want: &[(String, f64)]) {
    assert_eq!(got.len(), want.len(), "{got:?} vs {want:?}");
    let mut got = got.to_vec();
    let mut want = want.to_vec();
    got.sort_by(|a, b| a.0.cmp(&b.0));
    want.sort_by(|a, b| a.0.cmp(&b.0));
    for (g, w) in got.iter().zip(&want) {
        assert_eq!(g.0, w.0);
        assert!((g.1 - w.1).abs() < 1e-9, "{}: {} vs {}", g.0, g.1, w.1);
    }
}

#[test]
fn bm25_matches_the_reference_on_the_mini_vocabulary() {
    let vocab = common::vocab();
    let index = LexicalIndex::build(&vocab);
    let docs = oracle_docs(&vocab);
    for q in [
        "tuberculosis",
        "tubercul",
        "drug resistant tuberculosis",
        "tuberculosis tuberculosis",
        "type 2 diabetes",
        "blood pressure",
        "antihypertensive",
        "XDR-TB",
        "children",
        "",
    ] {
        assert_close(
            &sorted_scores(&index, q),
            &oracle::bm25(&docs, q, 1.2, 0.75),
        );
    }
}

#[test]
fn exact_names_outrank_every_partial_match() {
    let vocab = common::vocab();
    let index = LexicalIndex::build(&vocab);
    let r = index.search("Diabetes Mellitus", 3);
    let uids: Vec<&str> = r.uids().collect();
    assert_eq!(uids[0], "D003920");
    let r = index.search("high blood pressure", 2);
    assert_eq!(r.uids().next(), Some("D006973"));
    let r = index.search("blood pressure", 2);
    assert_eq!(r.uids().collect::<Vec<_>>(), ["D001794", "D006973"]);
}

proptest! {
    #[test]
    fn bm25_matches_the_reference_on_random_vocabularies(seed in any::<u64>(), n in 1usize..30) {
        let mut r = rng(seed);
        let terms: Vec<MeshTerm> = (0..n)
            .map(|i| MeshTerm {
                uid: format!("D{i:06}"),
                name: gen::term(&mut r),
                entry_terms: (0..i % 3).map(|_| gen::term(&mut r)).collect(),
                tree_numbers: vec![format!("Z01.{:03}", i)],
            })
            .collect();
        let vocab = Vocabulary::from_terms(terms).unwrap();
        let index = LexicalIndex::build(&vocab);
        let docs = oracle_docs(&vocab);
        for _ in 0..5 {
            let q = gen::term(&mut r);
            assert_close(&sorted_scores(&index, &q), &oracle::bm25(&docs, &q, 1.2, 0.75));
            let top = index.search(&q, n);
            let exact: Vec<&str> = vocab
                .terms()
                .filter(|t| {
                    normalize(&t.name) == normalize(&q)
                        || t.entry_terms.iter().any(|e| normalize(e) == normalize(&q))
                })
                .map(|t| t.uid.as_str())
                .collect();
            let head: Vec<&str> = top.uids().take(exact.len()).collect();
            let mut head_sorted = head.clone();
            head_sorted.sort();
            let mut exact_sorted = exact.clone();
            exact_sorted.sort();
            prop_assert_eq!(head_sorted, exact_sorted);
        }
    }
}
