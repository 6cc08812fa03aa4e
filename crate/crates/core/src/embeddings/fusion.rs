//! Normalised CombSUM rank fusion.

use std::collections::HashMap;

use super::{by_score_then_uid, EmbeddingError, Ranking};

/// Fuses rankings by summing per-ranking min-max normalised scores.
///
/// Each ranking's scores are mapped onto `[0, 1]`; a ranking whose scores are
/// all equal maps every entry to `1.0`. A uid missing from a ranking
/// contributes nothing from it. The result keeps the best `depth` uids by
/// fused score, ties by ascending uid, and answers the union of the inputs'
/// keys.
pub fn combsum_fuse(rankings: &[Ranking], depth: usize) -> Result<Ranking, EmbeddingError> {
    if rankings.is_empty() {
        return Err(EmbeddingError::EmptyInput);
    }
    if depth == 0 {
        return Err(EmbeddingError::ZeroDepth);
    }
    let mut fused: HashMap<&str, f64> = HashMap::new();
    let mut for_keys: Vec<String> = Vec::new();
    for ranking in rankings {
        for key in ranking.for_keys() {
            if !for_keys.contains(key) {
                for_keys.push(key.clone());
            }
        }
        let Some((min, max)) = min_max(ranking) else {
            continue;
        };
        let span = max - min;
        for (uid, score) in ranking.entries() {
            let norm = if span > 0.0 {
                (score - min) / span
            } else {
                1.0
            };
            *fused.entry(uid.as_str()).or_insert(0.0) += norm;
        }
    }
    let mut entries: Vec<(String, f64)> = fused
        .into_iter()
        .map(|(uid, s)| (uid.to_string(), s))
        .collect();
    entries.sort_by(by_score_then_uid);
    entries.truncate(depth);
    Ok(Ranking { for_keys, entries })
}

fn min_max(ranking: &Ranking) -> Option<(f64, f64)> {
    let mut it = ranking.entries().iter().map(|(_, s)| *s);
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), s| (lo.min(s), hi.max(s))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ranking(key: &str, entries: &[(&str, f64)]) -> Ranking {
        Ranking::from_scores(
            vec![key.to_string()],
            entries.iter().map(|(u, s)| (u.to_string(), *s)).collect(),
        )
    }

    #[test]
    fn single_ranking_keeps_order_and_normalises() {
        let r = ranking("k", &[("A", 10.0), ("B", 6.0), ("C", 2.0)]);
        let fused = combsum_fuse(&[r], 2).unwrap();
        assert_eq!(
            fused.entries(),
            &[("A".to_string(), 1.0), ("B".to_string(), 0.5)]
        );
        assert_eq!(fused.for_keys(), &["k".to_string()]);
    }

    #[test]
    fn hand_evaluated_tie() {
        // A: 1.0 + 0.0, B: 0.0 + 1.0; tie resolved by uid.
        let r1 = ranking("k1", &[("A", 2.0), ("B", 1.0)]);
        let r2 = ranking("k2", &[("B", 4.0), ("A", 0.0)]);
        let fused = combsum_fuse(&[r1, r2], 10).unwrap();
        assert_eq!(
            fused.entries(),
            &[("A".to_string(), 1.0), ("B".to_string(), 1.0)]
        );
        assert_eq!(fused.for_keys(), &["k1".to_string(), "k2".to_string()]);
    }

    #[test]
    fn flat_ranking_votes_one() {
        let r1 = ranking("k1", &[("A", 3.0)]);
        let r2 = ranking("k2", &[("B", 5.0), ("C", 1.0)]);
        let fused = combsum_fuse(&[r1, r2], 3).unwrap();
        assert_eq!(
            fused.entries(),
            &[
                ("A".to_string(), 1.0),
                ("B".to_string(), 1.0),
                ("C".to_string(), 0.0)
            ]
        );
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            combsum_fuse(&[], 1),
            Err(EmbeddingError::EmptyInput)
        ));
        let r = ranking("k", &[("A", 1.0)]);
        assert!(matches!(
            combsum_fuse(&[r], 0),
            Err(EmbeddingError::ZeroDepth)
        ));
    }

    #[test]
    fn empty_rankings_fuse_to_nothing() {
        let fused = combsum_fuse(&[Ranking::empty(vec!["k".into()])], 3).unwrap();
        assert!(fused.is_empty());
    }
}
