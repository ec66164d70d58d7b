use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use poskit_core::corpus::{extract_structures, window_code, CorpusRecord};
use poskit_core::prompting::{render_prompt, PromptVariant};
use poskit_core::pyindex::{evaluate, generate_case, PyExpr, PyIndexCategory};
use poskit_core::rng::{lanes, substream};
use poskit_core::scoring::{parse_integer_response, parse_item_response};
use poskit_core::seqgen::{ItemPool, PoolName};
use poskit_core::tasks::{
    gold_answer, resolve_position, valid_offsets, Anchor, Direction, IndexQuery,
};

fn bench_operators(c: &mut Criterion) {
    let pool = ItemPool::builtin(PoolName::Letters);
    let mut stream = substream(1, lanes::SEQUENCE_GEN, 0, 0);
    let seq = pool.sample_sequence(20, &mut stream).unwrap();

    c.bench_function("resolve_position/full_L20_sweep", |b| {
        b.iter(|| {
            let mut acc = 0u32;
            for r in 1..=20u32 {
                for direction in [Direction::Forward, Direction::Backward] {
                    for n in valid_offsets(Anchor::Relative(r), direction, 20) {
                        acc = acc.wrapping_add(
                            resolve_position(Anchor::Relative(r), direction, n, 20).unwrap(),
                        );
                    }
                }
            }
            black_box(acc)
        })
    });

    c.bench_function("gold_answer/endpoint_backward", |b| {
        let query = IndexQuery::PositionToItem {
            anchor: Anchor::Endpoint,
            direction: Direction::Backward,
            offset: 7,
        };
        b.iter(|| black_box(gold_answer(&seq, &query).unwrap()))
    });
}

fn bench_pyindex(c: &mut Criterion) {
    c.bench_function("pyindex/generate_case", |b| {
        let mut i = 0u64;
        b.iter(|| {
            i += 1;
            let category = PyIndexCategory::ALL[(i % 5) as usize];
            let mut stream = substream(9, lanes::PYINDEX, i, 9);
            black_box(generate_case(category, &mut stream).unwrap())
        })
    });

    c.bench_function("pyindex/evaluate_nested", |b| {
        let xs: Vec<i64> = (0..12).map(|v| (v * 5) % 12).collect();
        let expr = PyExpr::Subscript(
            Box::new(PyExpr::List),
            Box::new(PyExpr::Subscript(
                Box::new(PyExpr::List),
                Box::new(PyExpr::Int(3)),
            )),
        );
        b.iter(|| black_box(evaluate(&expr, &xs).unwrap()))
    });
}

fn bench_prompting(c: &mut Criterion) {
    let pool = ItemPool::builtin(PoolName::Animals);
    let mut stream = substream(2, lanes::SEQUENCE_GEN, 1, 0);
    let seq = pool.sample_sequence(20, &mut stream).unwrap();
    let query = IndexQuery::PositionToItem {
        anchor: Anchor::Endpoint,
        direction: Direction::Backward,
        offset: 2,
    };
    let variant = PromptVariant::default_for(&query);

    c.bench_function("prompting/render_three_shot", |b| {
        b.iter_batched(
            || substream(2, lanes::DEMOS, 1, 0),
            |mut demos| black_box(render_prompt(&seq, &query, &variant, &pool, &mut demos).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn bench_corpus(c: &mut Criterion) {
    let doc: String = (0..8)
        .map(|s| {
            let items: String = (1..=10)
                .map(|i| format!("{i}. item {s} {i}\n"))
                .collect();
            format!("Paragraph {s}.\n{items}\n")
        })
        .collect();
    let record = CorpusRecord::new("bench", doc).unwrap();
    c.bench_function("corpus/extract_structures", |b| {
        b.iter(|| black_box(extract_structures(&record)))
    });

    let snippet: String = (0..60).map(|i| format!("let x_{i} = {i};\n")).collect();
    c.bench_function("corpus/window_code", |b| {
        b.iter_batched(
            || substream(3, lanes::MIXTURE_CODE, 0, 0),
            |mut stream| black_box(window_code(&snippet, &mut stream)),
            BatchSize::SmallInput,
        )
    });
}

fn bench_scoring(c: &mut Criterion) {
    let candidates: Vec<poskit_core::tasks::Item> = ItemPool::builtin(PoolName::Animals)
        .members()
        .iter()
        .take(20)
        .map(|w| poskit_core::tasks::Item::word(w.clone()))
        .collect();
    c.bench_function("scoring/parse_item_response", |b| {
        b.iter(|| {
            black_box(parse_item_response(
                "I believe the answer is the badger, not the bat.",
                &candidates,
            ))
        })
    });
    c.bench_function("scoring/parse_integer_response", |b| {
        b.iter(|| black_box(parse_integer_response("It sits at the 17th position.")))
    });
}

criterion_group!(
    benches,
    bench_operators,
    bench_pyindex,
    bench_prompting,
    bench_corpus,
    bench_scoring
);
criterion_main!(benches);
