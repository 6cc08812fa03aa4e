use meshsuggest_core::embeddings::{
    combsum_fuse, group_keywords, keyword_vector, rank_terms, DEFAULT_TAU,
};
use meshsuggest_core::{EmbeddingStore, Ranking, WordVectorModel};
use meshsuggest_testkit::{gen, oracle, rng};
use proptest::prelude::*;

fn store_of(rows: &[(String, Vec<f32>)]) -> EmbeddingStore {
    EmbeddingStore::from_vectors(rows[0].1.len(), rows.iter().cloned()).unwrap()
}

fn ranking_of(key: &str, entries: &[(String, f64)]) -> Ranking {
    Ranking::from_scores(vec![key.to_string()], entries.to_vec())
}

fn fused(rankings: &[Vec<(String, f64)>], depth: usize) -> Vec<(String, f64)> {
    let rs: Vec<Ranking> = rankings
        .iter()
        .enumerate()
        .map(|(i, r)| ranking_of(&format!("k{i}"), r))
        .collect();
    combsum_fuse(&rs, depth).unwrap().into_entries()
}

fn assert_same_ranking(got: &[(String, f64)], want: &[(String, f64)]) {
    assert_eq!(got.len(), want.len());
    for (g, w) in got.iter().zip(want) {
        assert_eq!(g.0, w.0);
        assert!(
            (g.1 - w.1).abs() <= 1e-9,
            "{} scored {} vs {}",
            g.0,
            g.1,
            w.1
        );
    }
}

proptest! {
    #[test]
    fn rank_terms_is_a_prefix_of_the_full_sort(seed in any::<u64>(), k in 1usize..40) {
        let (query, rows) = gen::store(&mut rng(seed), 200, 16);
        let got = rank_terms(&query, &store_of(&rows), k, vec!["q".into()]).unwrap();
        let mut want = oracle::full_sort(&query, &rows);
        want.truncate(k);
        prop_assert_eq!(got.entries(), &want[..]);
    }

    #[test]
    fn combsum_matches_the_matrix_oracle(seed in any::<u64>(), depth in 1usize..60) {
        let rankings = gen::rankings(&mut rng(seed), 8, 50);
        assert_same_ranking(&fused(&rankings, depth), &oracle::combsum_matrix(&rankings, depth));
    }

    #[test]
    fn combsum_order_survives_affine_rescaling(
        seed in any::<u64>(),
        which in any::<prop::sample::Index>(),
        exp in -2i32..=3,
        shift in -16i32..=16,
    ) {
        // Scores on a 1/8 grid, power-of-two scales and integer shifts keep
        // every rescaled value exact.
        let mut rankings = gen::rankings(&mut rng(seed), 6, 30);
        for r in &mut rankings {
            for e in r.iter_mut() {
                e.1 = (e.1 * 8.0).round() / 8.0;
            }
        }
        let before: Vec<String> = fused(&rankings, 50).into_iter().map(|e| e.0).collect();
        let i = which.index(rankings.len());
        let scale = 2f64.powi(exp);
        for e in rankings[i].iter_mut() {
            e.1 = e.1 * scale + f64::from(shift);
        }
        let after: Vec<String> = fused(&rankings, 50).into_iter().map(|e| e.0).collect();
        prop_assert_eq!(before, after);
    }

    #[test]
    fn combsum_of_one_ranking_keeps_its_order(seed in any::<u64>()) {
        let rankings = gen::rankings(&mut rng(seed), 1, 40);
        let input = ranking_of("k", &rankings[0]);
        let out = fused(&rankings, rankings[0].len());
        let want: Vec<&str> = input.uids().collect();
        let got: Vec<&str> = out.iter().map(|e| e.0.as_str()).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn grouping_matches_the_recomputing_oracle(
        seed in any::<u64>(),
        n in 1usize..9,
        dim in 2usize..6,
        tau in -1.0f64..1.0,
    ) {
        use rand::Rng as _;
        let mut r = rng(seed);
        let vocab: Vec<(String, Vec<f32>)> = (0..6)
            .map(|i| (format!("w{i}"), (0..dim).map(|_| r.random_range(-1.0f32..1.0)).collect()))
            .collect();
        let model = WordVectorModel::new(store_of(&vocab)).unwrap();
        // Keywords of one or two tokens; token w9 is out of vocabulary.
        let mut keywords: Vec<String> = Vec::new();
        while keywords.len() < n {
            let a = r.random_range(0..10);
            let kw = if r.random_bool(0.3) {
                format!("w{a} W{}", r.random_range(0..6))
            } else {
                format!("w{a}")
            };
            if !keywords.contains(&kw) {
                keywords.push(kw);
            }
        }
        let vectors: Vec<Vec<f64>> = keywords
            .iter()
            .map(|k| {
                let known: Vec<&Vec<f32>> = k
                    .split_whitespace()
                    .filter_map(|t| vocab.iter().find(|(id, _)| *id == t.to_lowercase()).map(|e| &e.1))
                    .collect();
                let mut v = vec![0.0f64; dim];
                for row in &known {
                    for (acc, x) in v.iter_mut().zip(row.iter()) {
                        *acc += f64::from(*x);
                    }
                }
                if !known.is_empty() {
                    v.iter_mut().for_each(|x| *x /= known.len() as f64);
                }
                v
            })
            .collect();
        for (k, v) in keywords.iter().zip(&vectors) {
            prop_assert_eq!(&keyword_vector(k, &model), v);
        }
        let groups = group_keywords(&keywords, &model, tau).unwrap();
        let want: Vec<Vec<String>> = oracle::average_linkage(&vectors, tau)
            .into_iter()
            .map(|g| g.into_iter().map(|i| keywords[i].clone()).collect())
            .collect();
        prop_assert_eq!(&groups, &want);

        let mut flat: Vec<String> = groups.concat();
        flat.sort();
        let mut input = keywords.clone();
        input.sort();
        prop_assert_eq!(flat, input);
    }
}

#[test]
fn hand_evaluated_combsum_tie() {
    let r1 = vec![("A".to_string(), 2.0), ("B".to_string(), 1.0)];
    let r2 = vec![("B".to_string(), 4.0), ("A".to_string(), 0.0)];
    let want = vec![("A".to_string(), 1.0), ("B".to_string(), 1.0)];
    assert_eq!(fused(&[r1.clone(), r2.clone()], 2), want);
    assert_eq!(oracle::combsum_matrix(&[r1, r2], 2), want);
}

#[test]
fn planted_clusters_are_recovered() {
    let vocab = vec![
        ("a1".to_string(), vec![1.0f32, 0.05, 0.0]),
        ("a2".to_string(), vec![0.95, 0.1, 0.05]),
        ("a3".to_string(), vec![0.9, 0.0, 0.1]),
        ("b1".to_string(), vec![0.0, 1.0, 0.05]),
        ("b2".to_string(), vec![0.1, 0.9, 0.0]),
        ("b3".to_string(), vec![0.05, 0.95, 0.1]),
    ];
    let model = WordVectorModel::new(store_of(&vocab)).unwrap();
    let keywords: Vec<String> = ["a1", "b1", "a2", "b2", "a3", "b3"]
        .map(String::from)
        .to_vec();
    let groups = group_keywords(&keywords, &model, DEFAULT_TAU).unwrap();
    assert_eq!(groups, vec![vec!["a1", "a2", "a3"], vec!["b1", "b2", "b3"]]);

    let vectors: Vec<Vec<f64>> = keywords.iter().map(|k| keyword_vector(k, &model)).collect();
    assert_eq!(
        oracle::average_linkage(&vectors, DEFAULT_TAU),
        vec![vec![0, 2, 4], vec![1, 3, 5]]
    );
}

#[test]
fn thresholds_at_the_extremes() {
    let vocab = vec![
        ("x".to_string(), vec![1.0f32, 0.0]),
        ("y".to_string(), vec![-1.0, 0.2]),
        ("z".to_string(), vec![0.0, 1.0]),
    ];
    let model = WordVectorModel::new(store_of(&vocab)).unwrap();
    let keywords: Vec<String> = ["x", "y", "z"].map(String::from).to_vec();
    assert_eq!(group_keywords(&keywords, &model, 1.01).unwrap().len(), 3);
    assert_eq!(
        group_keywords(&keywords, &model, -1.0).unwrap(),
        vec![keywords.clone()]
    );
}

#[test]
fn ranking_is_deterministic() {
    let (query, rows) = gen::store(&mut rng(7), 500, 32);
    let store = store_of(&rows);
    let a = rank_terms(&query, &store, 25, vec![]).unwrap();
    let b = rank_terms(&query, &store, 25, vec![]).unwrap();
    assert_eq!(a, b);
}
