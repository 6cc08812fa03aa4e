use std::collections::HashSet;

use super::{validate_depths, validate_keywords, Method, Resources, SuggestError, SuggestionGroup};
use crate::embeddings::{
    combsum_fuse, group_keywords, rank_terms, EmbeddingStore, QueryEncoder, Ranking,
};

/// ATM: one E-utilities translation per keyword. Headings that do not resolve
/// in the vocabulary are dropped; repeats keep their first position.
pub fn suggest_atm(
    keywords: &[String],
    resources: &Resources,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    let client = resources
        .pubmed()
        .ok_or(SuggestError::MissingResource("a PubMed client"))?;
    let vocab = resources.vocab();
    keywords
        .iter()
        .map(|kw| {
            let names = client.atm_translate(kw, resources.email())?;
            let mut seen = HashSet::new();
            let uids: Vec<&str> = names
                .iter()
                .filter_map(|n| vocab.lookup_by_name(n))
                .filter(|u| seen.insert(*u))
                .collect();
            SuggestionGroup::from_uids(vec![kw.clone()], Method::Atm, uids, vocab)
        })
        .collect()
}

/// UMLS-style lexical search: BM25 over the vocabulary, top `depth` per
/// keyword.
pub fn suggest_umls(
    keywords: &[String],
    resources: &Resources,
    depth: usize,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    validate_depths(depth, depth)?;
    let index = resources.lexical();
    keywords
        .iter()
        .map(|kw| {
            let ranking = index.search(kw, depth);
            SuggestionGroup::from_uids(
                vec![kw.clone()],
                Method::Umls,
                ranking.uids(),
                resources.vocab(),
            )
        })
        .collect()
}

/// Concept-mapper suggestions filtered to identifiers in the vocabulary.
pub fn suggest_metamap(
    keywords: &[String],
    resources: &Resources,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    let mapper = resources
        .concept_mapper()
        .ok_or(SuggestError::MissingResource("a concept mapper"))?;
    let concepts = mapper.map_concepts(keywords)?;
    let vocab = resources.vocab();
    keywords
        .iter()
        .zip(concepts)
        .map(|(kw, ids)| {
            let mut seen = HashSet::new();
            let uids = ids
                .iter()
                .map(String::as_str)
                .filter(|id| vocab.contains(id) && seen.insert(*id));
            SuggestionGroup::from_uids(vec![kw.clone()], Method::MetaMap, uids, vocab)
        })
        .collect()
}

fn keyword_rankings(
    keywords: &[String],
    store: &EmbeddingStore,
    encoder: &dyn QueryEncoder,
    k: usize,
) -> Result<Vec<Ranking>, SuggestError> {
    let vectors = encoder.encode_batch(keywords)?;
    keywords
        .iter()
        .zip(vectors)
        .map(|(kw, v)| Ok(rank_terms(&v, store, k, vec![kw.clone()])?))
        .collect()
}

/// Atomic: rank the MeSH encodings against each keyword on its own.
pub fn suggest_atomic(
    keywords: &[String],
    resources: &Resources,
    depth: usize,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    validate_depths(depth, depth)?;
    let (store, encoder) = resources.dense()?;
    keyword_rankings(keywords, store, encoder, depth)?
        .into_iter()
        .map(|r| {
            SuggestionGroup::from_uids(
                r.for_keys().to_vec(),
                Method::AtomicBert,
                r.uids(),
                resources.vocab(),
            )
        })
        .collect()
}

fn fused_group(
    keywords: &[String],
    store: &EmbeddingStore,
    encoder: &dyn QueryEncoder,
    interpolation_depth: usize,
    depth: usize,
    method: Method,
    resources: &Resources,
) -> Result<SuggestionGroup, SuggestError> {
    let rankings = keyword_rankings(keywords, store, encoder, interpolation_depth)?;
    let fused = combsum_fuse(&rankings, depth)?;
    SuggestionGroup::from_uids(keywords.to_vec(), method, fused.uids(), resources.vocab())
}

/// Fragment: fuse the per-keyword rankings of all keywords into one group.
pub fn suggest_fragment(
    keywords: &[String],
    resources: &Resources,
    interpolation_depth: usize,
    depth: usize,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    validate_depths(depth, interpolation_depth)?;
    let (store, encoder) = resources.dense()?;
    let group = fused_group(
        keywords,
        store,
        encoder,
        interpolation_depth,
        depth,
        Method::FragmentBert,
        resources,
    )?;
    Ok(vec![group])
}

/// Semantic: group similar keywords with word vectors, then fuse within each
/// group.
pub fn suggest_semantic(
    keywords: &[String],
    resources: &Resources,
    interpolation_depth: usize,
    depth: usize,
) -> Result<Vec<SuggestionGroup>, SuggestError> {
    validate_keywords(keywords)?;
    validate_depths(depth, interpolation_depth)?;
    let (store, encoder) = resources.dense()?;
    let model = resources
        .word_vectors()
        .ok_or(SuggestError::MissingResource("a word-vector model"))?;
    let mut unique: Vec<String> = Vec::with_capacity(keywords.len());
    for k in keywords {
        if !unique.contains(k) {
            unique.push(k.clone());
        }
    }
    group_keywords(&unique, model, resources.tau())?
        .into_iter()
        .map(|group| {
            fused_group(
                &group,
                store,
                encoder,
                interpolation_depth,
                depth,
                Method::SemanticBert,
                resources,
            )
        })
        .collect()
}
