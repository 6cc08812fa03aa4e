use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use meshsuggest_bench::{keywords, rankings, store, vocabulary, MESH_SIZE};
use meshsuggest_core::embeddings::{combsum_fuse, group_keywords, rank_terms, DEFAULT_TAU};
use meshsuggest_core::lexical::LexicalIndex;
use std::hint::black_box;

fn dense(c: &mut Criterion) {
    let (query, store) = store(MESH_SIZE, 128, 1);
    c.bench_function("rank_terms 30k x 128, k=20", |b| {
        b.iter(|| rank_terms(black_box(&query), &store, 20, vec!["q".into()]).unwrap())
    });
}

fn fusion(c: &mut Criterion) {
    let input = rankings(8, 20, 200, 2);
    c.bench_function("combsum 8 rankings x 20", |b| {
        b.iter(|| combsum_fuse(black_box(&input), 20).unwrap())
    });
}

fn lexical(c: &mut Criterion) {
    let vocab = vocabulary(MESH_SIZE, 3);
    c.bench_function("bm25 index build 30k", |b| {
        b.iter(|| LexicalIndex::build(black_box(&vocab)))
    });
    let index = LexicalIndex::build(&vocab);
    c.bench_function("bm25 search 30k", |b| {
        b.iter(|| index.search(black_box("cardioitis neurologypathy"), 20))
    });
}

fn grouping(c: &mut Criterion) {
    let (words, model) = keywords(40, 100, 4);
    c.bench_function("group 40 keywords", |b| {
        b.iter_batched(
            || words.clone(),
            |w| group_keywords(&w, &model, DEFAULT_TAU).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

criterion_group!(benches, dense, fusion, lexical, grouping);
criterion_main!(benches);
