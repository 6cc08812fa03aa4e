//! Keyword grouping with word vectors and average-linkage clustering.

use super::{EmbeddingError, WordVectorModel};

/// Default similarity threshold for merging keyword groups.
pub const DEFAULT_TAU: f64 = 0.7;

/// Mean of the word vectors of a keyword's lowercase whitespace tokens.
/// Tokens missing from the model are skipped; a keyword with no known token
/// gets the zero vector.
pub fn keyword_vector(keyword: &str, model: &WordVectorModel) -> Vec<f64> {
    let mut sum = vec![0.0f64; model.dim()];
    let mut n = 0usize;
    for token in keyword.split_whitespace() {
        if let Some(v) = model.token(&token.to_lowercase()) {
            for (acc, &x) in sum.iter_mut().zip(v) {
                *acc += f64::from(x);
            }
            n += 1;
        }
    }
    if n > 0 {
        for x in &mut sum {
            *x /= n as f64;
        }
    }
    sum
}

/// Cosine similarity clamped to `[-1, 1]`. Similarity with a zero vector is
/// `-1`.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return -1.0;
    }
    let d: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    (d / (na * nb)).clamp(-1.0, 1.0)
}

struct Cluster {
    members: Vec<usize>,
}

/// Partitions keywords into groups of similar meaning.
///
/// Clusters start as singletons and the most similar pair under average
/// linkage is merged while its similarity is at least `tau`. Equal
/// similarities are resolved towards the pair whose first members come
/// earliest in the input. Groups are returned in order of their first
/// keyword, members in input order.
pub fn group_keywords(
    keywords: &[String],
    model: &WordVectorModel,
    tau: f64,
) -> Result<Vec<Vec<String>>, EmbeddingError> {
    if keywords.is_empty() {
        return Err(EmbeddingError::EmptyInput);
    }
    for (i, k) in keywords.iter().enumerate() {
        if keywords[..i].contains(k) {
            return Err(EmbeddingError::DuplicateKeyword(k.clone()));
        }
    }
    let vectors: Vec<Vec<f64>> = keywords.iter().map(|k| keyword_vector(k, model)).collect();
    let n = keywords.len();

    // sim[i][j] holds the average-linkage similarity between live clusters i
    // and j, updated in place with the Lance-Williams rule.
    let mut sim = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = cosine(&vectors[i], &vectors[j]);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }
    let mut clusters: Vec<Option<Cluster>> =
        (0..n).map(|i| Some(Cluster { members: vec![i] })).collect();

    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if clusters[i].is_none() {
                continue;
            }
            for j in (i + 1)..n {
                if clusters[j].is_none() {
                    continue;
                }
                if best.is_none_or(|(_, _, s)| sim[i][j] > s) {
                    best = Some((i, j, sim[i][j]));
                }
            }
        }
        let Some((a, b, s)) = best else { break };
        if s < tau {
            break;
        }
        let absorbed = clusters[b].take().expect("live cluster");
        let kept = clusters[a].as_mut().expect("live cluster");
        let (na, nb) = (kept.members.len() as f64, absorbed.members.len() as f64);
        kept.members.extend(absorbed.members);
        kept.members.sort_unstable();
        for k in 0..n {
            if k == a || k == b || clusters[k].is_none() {
                continue;
            }
            let merged = (na * sim[a][k] + nb * sim[b][k]) / (na + nb);
            sim[a][k] = merged;
            sim[k][a] = merged;
        }
    }

    // Cluster slots are indexed by their smallest member, so slot order is
    // first-member order.
    Ok(clusters
        .into_iter()
        .flatten()
        .map(|c| c.members.into_iter().map(|i| keywords[i].clone()).collect())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::super::EmbeddingStore;
    use super::*;

    fn model(rows: &[(&str, &[f32])]) -> WordVectorModel {
        let dim = rows[0].1.len();
        WordVectorModel::new(
            EmbeddingStore::from_vectors(
                dim,
                rows.iter().map(|(id, v)| (id.to_string(), v.to_vec())),
            )
            .unwrap(),
        )
        .unwrap()
    }

    fn kws(ks: &[&str]) -> Vec<String> {
        ks.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn keyword_vector_averages_known_tokens() {
        let m = model(&[("drug", &[1.0, 0.0]), ("resistant", &[0.0, 1.0])]);
        assert_eq!(keyword_vector("Drug Resistant", &m), vec![0.5, 0.5]);
        assert_eq!(keyword_vector("drug unknown", &m), vec![1.0, 0.0]);
        assert_eq!(keyword_vector("unknown", &m), vec![0.0, 0.0]);
    }

    #[test]
    fn cosine_zero_vector_is_minus_one() {
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), -1.0);
        assert_eq!(cosine(&[2.0, 0.0], &[1.0, 0.0]), 1.0);
    }

    #[test]
    fn unreachable_threshold_gives_singletons() {
        let m = model(&[("a", &[1.0, 0.0]), ("b", &[1.0, 0.0]), ("c", &[0.0, 1.0])]);
        let groups = group_keywords(&kws(&["a", "b", "c"]), &m, 1.01).unwrap();
        assert_eq!(groups, vec![kws(&["a"]), kws(&["b"]), kws(&["c"])]);
    }

    #[test]
    fn minus_one_threshold_merges_everything() {
        let m = model(&[("a", &[1.0, 0.0]), ("b", &[-1.0, 0.0]), ("c", &[0.0, 1.0])]);
        let groups = group_keywords(&kws(&["c", "a", "b"]), &m, -1.0).unwrap();
        assert_eq!(groups, vec![kws(&["c", "a", "b"])]);
    }

    #[test]
    fn out_of_vocabulary_keywords_stay_apart() {
        let m = model(&[("a", &[1.0, 0.0]), ("b", &[0.9, 0.1])]);
        let groups = group_keywords(&kws(&["a", "zzz", "b"]), &m, 0.5).unwrap();
        assert_eq!(groups, vec![kws(&["a", "b"]), kws(&["zzz"])]);
    }

    #[test]
    fn errors() {
        let m = model(&[("a", &[1.0])]);
        assert!(matches!(
            group_keywords(&[], &m, 0.7),
            Err(EmbeddingError::EmptyInput)
        ));
        assert!(matches!(
            group_keywords(&kws(&["a", "a"]), &m, 0.7),
            Err(EmbeddingError::DuplicateKeyword(_))
        ));
    }
}
