//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Run with `cargo test -p poskit-core --test acceptance -- --nocapture`
//! to see the per-criterion lines. Everything here is offline: model calls
//! go through the mock backends.

mod common;

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use poskit_core::corpus::{
    build_mixture_into, extract_structures, render_structure, write_mixture, CorpusRecord,
    MixtureConfig, MixtureStats, StructureKind, TrainingExample,
};
use poskit_core::evalplan::{conditions, generate_condition, ConditionSpec, EvalPlan};
use poskit_core::prompting::TaskLabel;
use poskit_core::pyindex::{generate_benchmark, generate_case, PyIndexCategory};
use poskit_core::rng::{lanes, substream};
use poskit_core::runner::{run_condition, OracleBackend, RunContext, UniformRandomBackend};
use poskit_core::scoring::{accuracy, confusion, parse_integer_response, parse_item_response, ParsedAnswer};
use poskit_core::seqgen::PoolName;
use poskit_core::sft::{export, SftError};
use poskit_core::tasks::{
    gold_answer, invert_query, resolve_position, valid_offsets, Anchor, Direction, GoldAnswer,
    IndexQuery, Item, ItemKind, QueryKind,
};

fn pass(n: u32, detail: &str) {
    println!("[PASS] criterion {n}: {detail}");
}

// ---------------------------------------------------------------------------
// Criterion 1: operator exhaustive correctness
// ---------------------------------------------------------------------------

#[test]
fn criterion_1_operator_exhaustive_correctness() {
    let started = Instant::now();
    let mut checked = 0u64;

    for length in 1..=20u32 {
        let pool: Vec<Item> = ('A'..='Z').take(length as usize).map(Item::letter).collect();
        let seq = poskit_core::tasks::Sequence::new(pool).unwrap();
        let mut anchors = vec![Anchor::Endpoint];
        anchors.extend((1..=length).map(Anchor::Relative));
        for anchor in anchors {
            for direction in [Direction::Forward, Direction::Backward] {
                // Differential set check against a brute-force scan.
                let brute: Vec<u32> = (1..=length + 2)
                    .filter(|&n| brute_force_resolve(anchor, direction, n, length).is_some())
                    .collect();
                assert_eq!(valid_offsets(anchor, direction, length), brute);

                for n in valid_offsets(anchor, direction, length) {
                    let resolved = resolve_position(anchor, direction, n, length).unwrap();
                    let expected = brute_force_resolve(anchor, direction, n, length).unwrap();
                    assert_eq!(resolved, expected);

                    // Inversion round-trip on the offset.
                    let query = IndexQuery::PositionToItem {
                        anchor,
                        direction,
                        offset: n,
                    };
                    let inverted = invert_query(&seq, &query).unwrap();
                    assert_eq!(
                        gold_answer(&seq, &inverted),
                        Ok(GoldAnswer::Offset(n)),
                        "round trip failed at L={length} {anchor:?} {direction:?} n={n}"
                    );
                    checked += 1;
                }
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 10,
        "exhaustive sweep took {elapsed:?}, budget is 10 s"
    );
    pass(
        1,
        &format!("{checked} operator instances match brute force and round-trip (in {elapsed:?})"),
    );
}

/// Brute force: scan every index and keep the one the operator names.
fn brute_force_resolve(
    anchor: Anchor,
    direction: Direction,
    n: u32,
    length: u32,
) -> Option<u32> {
    let positions: Vec<i64> = (1..=i64::from(length)).collect();
    let target: i64 = match (anchor, direction) {
        (Anchor::Endpoint, Direction::Forward) => i64::from(n),
        (Anchor::Endpoint, Direction::Backward) => i64::from(length) - i64::from(n) + 1,
        (Anchor::Relative(r), Direction::Forward) => i64::from(r) + i64::from(n),
        (Anchor::Relative(r), Direction::Backward) => i64::from(r) - i64::from(n),
    };
    positions.into_iter().find(|&p| p == target).map(|p| p as u32)
}

// ---------------------------------------------------------------------------
// Criterion 2: PyIndex oracle equivalence
// ---------------------------------------------------------------------------

#[test]
fn criterion_2_pyindex_oracle_equivalence() {
    let started = Instant::now();

    for i in 0..10_000u64 {
        let category = PyIndexCategory::ALL[(i % 5) as usize];
        let mut stream = substream(424_242, lanes::PYINDEX, i, 3);
        let case = generate_case(category, &mut stream).unwrap();
        let reference = common::pyindex_oracle(&case.source_text).unwrap();
        assert_eq!(reference, case.gold, "mismatch on {:?}", case.source_text);
    }

    let benchmark = generate_benchmark(42, 20).unwrap();
    assert_eq!(benchmark.len(), 100);
    for category in PyIndexCategory::ALL {
        assert_eq!(
            benchmark.iter().filter(|c| c.category == category).count(),
            20,
            "{category:?}"
        );
    }
    for case in &benchmark {
        assert_eq!(
            common::pyindex_oracle(&case.source_text).unwrap(),
            case.gold
        );
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "differential run took {elapsed:?}, budget is 60 s"
    );
    pass(
        2,
        &format!("10,000 differential cases and the 100-case fixed-seed benchmark agree (in {elapsed:?})"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 3: mixture statistics (default PosBench build)
// ---------------------------------------------------------------------------

const MIXTURE_SEED: u64 = 42;
// Frozen on the first run of the seed-42 default build.
const FROZEN_SYNTHETIC_FORWARD: u32 = 6_105;
const FROZEN_SYNTHETIC_ENDPOINT: u32 = 6_093;

fn acceptance_mixture_config() -> MixtureConfig {
    MixtureConfig {
        seed: MIXTURE_SEED,
        ..MixtureConfig::default()
    }
}

/// Deterministic stand-in code corpus: plenty of distinct-line snippets.
fn acceptance_code_snippets() -> impl Iterator<Item = String> {
    (0..2_000u32).map(|s| {
        (0..40)
            .map(|i| format!("let value_{s}_{i} = compute({i}) + {s};\n"))
            .collect()
    })
}

/// Deterministic stand-in document corpus: ten structures per document.
fn acceptance_documents() -> impl Iterator<Item = CorpusRecord> {
    (0..6_000u32).map(|d| {
        let mut text = String::new();
        for s in 0..10u32 {
            let items: Vec<String> = (0..8).map(|i| format!("entry {d} {s} {i}")).collect();
            let kind = match s % 4 {
                0 => StructureKind::NumberedList,
                1 => StructureKind::BulletList,
                2 => StructureKind::MarkdownTable,
                _ => StructureKind::CodeBlock,
            };
            text.push_str(&render_structure(kind, &items));
            text.push_str("\n\n");
        }
        CorpusRecord::new(format!("doc-{d}"), text).unwrap()
    })
}

static MIXTURE: OnceLock<(PathBuf, MixtureStats)> = OnceLock::new();

fn mixture_once() -> &'static (PathBuf, MixtureStats) {
    MIXTURE.get_or_init(|| {
        let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_mixture.jsonl");
        let stats = write_mixture(
            &path,
            &acceptance_mixture_config(),
            &mut acceptance_code_snippets(),
            &mut acceptance_documents(),
        )
        .expect("default mixture builds");
        (path, stats)
    })
}

#[test]
fn criterion_3_mixture_statistics() {
    let (path, stats) = mixture_once();
    assert_eq!(stats.synthetic, 20_000);
    assert_eq!(stats.code, 4_000);
    assert_eq!(stats.adapted, 46_000);
    assert_eq!(stats.total(), 70_000);

    let forward_fraction = stats.synthetic_forward as f64 / 20_000.0;
    let endpoint_fraction = stats.synthetic_endpoint as f64 / 20_000.0;
    assert!(
        (0.285..=0.315).contains(&forward_fraction),
        "forward fraction {forward_fraction}"
    );
    assert!(
        (0.285..=0.315).contains(&endpoint_fraction),
        "endpoint fraction {endpoint_fraction}"
    );
    assert_eq!(stats.synthetic_forward, FROZEN_SYNTHETIC_FORWARD);
    assert_eq!(stats.synthetic_endpoint, FROZEN_SYNTHETIC_ENDPOINT);

    // Rebuild under the same seed: byte-identical output.
    let rebuild_path =
        PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance_mixture_rebuild.jsonl");
    let rebuild_stats = write_mixture(
        &rebuild_path,
        &acceptance_mixture_config(),
        &mut acceptance_code_snippets(),
        &mut acceptance_documents(),
    )
    .unwrap();
    assert_eq!(&rebuild_stats, stats);
    let first = std::fs::read(path).unwrap();
    let second = std::fs::read(&rebuild_path).unwrap();
    assert_eq!(first, second, "rebuild is not byte-identical");

    pass(
        3,
        &format!(
            "70,000-example build: forward {forward_fraction:.4}, endpoint {endpoint_fraction:.4}, rebuild byte-identical"
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: extraction fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_4_extraction_fixture() {
    let base = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures");
    let corpus = std::fs::read_to_string(format!("{base}/extraction_corpus.jsonl")).unwrap();
    let expected: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(format!("{base}/extraction_expected.json")).unwrap(),
    )
    .unwrap();
    let expected = expected.as_array().unwrap();

    let mut docs = 0usize;
    let mut structures = 0usize;
    for (line, want) in corpus.lines().filter(|l| !l.trim().is_empty()).zip(expected) {
        let doc: serde_json::Value = serde_json::from_str(line).unwrap();
        let record = CorpusRecord::new(
            doc["source"].as_str().unwrap(),
            doc["text"].as_str().unwrap(),
        )
        .unwrap();
        let found = extract_structures(&record);
        let want_structures = want["structures"].as_array().unwrap();
        assert_eq!(
            found.len(),
            want_structures.len(),
            "{}",
            record.source
        );
        for (got, want_structure) in found.iter().zip(want_structures) {
            let want_items: Vec<&str> = want_structure["items"]
                .as_array()
                .unwrap()
                .iter()
                .map(|v| v.as_str().unwrap())
                .collect();
            assert_eq!(got.items, want_items, "{}", record.source);
            assert!(got.items.len() >= 5);
            assert!(got.items.iter().all(|i| i.chars().count() <= 60));
        }
        docs += 1;
        structures += found.len();
    }
    assert_eq!(docs, 50);
    pass(
        4,
        &format!("50-document fixture: 100% agreement on {structures} structures"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 5: scoring fixture
// ---------------------------------------------------------------------------

#[test]
fn criterion_5_scoring_fixture() {
    let path = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/scoring_pairs.jsonl"
    );
    let text = std::fs::read_to_string(path).unwrap();
    let mut total = 0usize;
    let mut correct = 0usize;
    let mut labeled = 0usize;

    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let pair: serde_json::Value = serde_json::from_str(line).unwrap();
        let raw = pair["raw"].as_str().unwrap();
        let parsed = match pair["mode"].as_str().unwrap() {
            "item" => {
                let kind = match pair["kind"].as_str().unwrap() {
                    "letter" => ItemKind::Letter,
                    "word" => ItemKind::Word,
                    "code_line" => ItemKind::CodeLine,
                    _ => ItemKind::Generic,
                };
                let candidates: Vec<Item> = pair["candidates"]
                    .as_array()
                    .unwrap()
                    .iter()
                    .map(|v| Item::new(v.as_str().unwrap(), kind).unwrap())
                    .collect();
                parse_item_response(raw, &candidates)
            }
            _ => parse_integer_response(raw),
        };

        // Parsed value matches the hand label.
        match (&parsed, &pair["expected"]) {
            (ParsedAnswer::Unparseable, serde_json::Value::Null) => {}
            (ParsedAnswer::Item(item), serde_json::Value::String(s)) => {
                assert_eq!(&item.text, s, "pair {}", pair["id"]);
            }
            (ParsedAnswer::Integer(v), expected) => {
                assert_eq!(Some(*v), expected.as_i64(), "pair {}", pair["id"]);
            }
            (got, want) => panic!("pair {}: {got:?} vs {want:?}", pair["id"]),
        }

        let is_correct = match (&parsed, &pair["gold"]) {
            (ParsedAnswer::Item(item), serde_json::Value::String(gold)) => &item.text == gold,
            (ParsedAnswer::Integer(v), gold) => gold.as_i64() == Some(*v),
            _ => false,
        };
        assert_eq!(is_correct, pair["correct"].as_bool().unwrap(), "pair {}", pair["id"]);
        total += 1;
        if is_correct {
            correct += 1;
        }
        if pair["correct"].as_bool().unwrap() {
            labeled += 1;
        }
    }
    assert_eq!(total, 100);
    assert_eq!(correct, labeled);
    assert_eq!(labeled, 75, "hand-counted accuracy is 75/100");
    pass(
        5,
        &format!("100 hand-labeled pairs parse identically; accuracy {correct}/100 matches the hand count"),
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: end-to-end sanity with mocks
// ---------------------------------------------------------------------------

#[test]
fn criterion_6_end_to_end_with_mocks() {
    let plan = EvalPlan::with_seed(20_260_809);
    let specs = conditions(&plan).unwrap();
    assert_eq!(specs.len(), 54);
    let ctx = RunContext {
        concurrency: 8,
        ..RunContext::default()
    };

    // Oracle backend: 100.0% on every condition; confusion stays diagonal.
    let mut oracle_trials_total = 0usize;
    for spec in &specs {
        let prompts = generate_condition(&plan, spec).unwrap();
        assert!(!prompts.is_empty(), "{}", spec.id());
        let trials = run_condition(&prompts, &OracleBackend, &ctx).unwrap();
        let acc = accuracy(trials.iter()).unwrap();
        assert_eq!(acc, 1.0, "oracle below ceiling on {}", spec.id());

        let matrix = confusion(&trials).unwrap();
        assert_eq!(
            matrix.off_diagonal_pct(),
            0.0,
            "oracle confusion has off-diagonal mass on {}",
            spec.id()
        );
        for (row, counts) in matrix.row_pct.iter().zip(&matrix.counts) {
            if counts.iter().sum::<u64>() > 0 {
                let sum: f64 = row.iter().sum();
                assert!((sum - 100.0).abs() < 1e-9, "row sums to {sum}");
            }
        }
        oracle_trials_total += trials.len();
    }

    // Uniform-random backend at L=20, position-to-item: accuracy within
    // 4 sigma of 1/20, confusion rows stochastic.
    let random = UniformRandomBackend { seed: 7 };
    let mut random_trials = Vec::new();
    for spec in specs
        .iter()
        .filter(|s| s.task == QueryKind::PositionToItem && s.length == 20)
    {
        let prompts = generate_condition(&plan, spec).unwrap();
        let trials = run_condition(&prompts, &random, &ctx).unwrap();
        let matrix = confusion(&trials).unwrap();
        for (row, counts) in matrix.row_pct.iter().zip(&matrix.counts) {
            if counts.iter().sum::<u64>() > 0 {
                let sum: f64 = row.iter().sum();
                assert!((sum - 100.0).abs() < 1e-9);
            }
        }
        random_trials.extend(trials);
    }
    let n = random_trials.len() as f64;
    let acc = accuracy(random_trials.iter()).unwrap();
    let p = 1.0 / 20.0;
    let four_sigma = 4.0 * (p * (1.0 - p) / n).sqrt();
    assert!(
        (acc - p).abs() <= four_sigma,
        "random accuracy {acc:.4} outside {p} +- {four_sigma:.4} over {n} trials"
    );

    pass(
        6,
        &format!(
            "oracle 100.0% on 54 conditions ({oracle_trials_total} trials); random {:.2}% vs 5% +- {:.2}pp; all rows stochastic",
            acc * 100.0,
            four_sigma * 100.0
        ),
    );
}

// ---------------------------------------------------------------------------
// Criterion 7: SFT export integrity
// ---------------------------------------------------------------------------

#[test]
fn criterion_7_sft_export_integrity() {
    let (mixture_path, stats) = mixture_once();
    let examples = poskit_core::corpus::read_training_examples(mixture_path).unwrap();
    assert_eq!(examples.len(), 70_000);

    let out_dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let data_path = out_dir.join("acceptance_sft.jsonl");
    let manifest_path = out_dir.join("acceptance_sft_manifest.json");
    let manifest = export(
        examples.iter().cloned(),
        &data_path,
        &manifest_path,
        Some(MIXTURE_SEED),
    )
    .expect("valid mixture exports cleanly");
    assert_eq!(manifest.total, 70_000);
    let per_source: std::collections::BTreeMap<&str, u64> = manifest
        .counts
        .iter()
        .fold(std::collections::BTreeMap::new(), |mut m, c| {
            *m.entry(c.source.as_str()).or_insert(0) += c.count;
            m
        });
    assert_eq!(per_source["synthetic"], 20_000);
    assert_eq!(per_source["code"], 4_000);
    assert_eq!(per_source["adapted"], 46_000);
    // Manifest direction counts match the mixture's frozen statistics.
    let forward_total: u64 = manifest
        .counts
        .iter()
        .filter(|c| c.direction == "fwd")
        .map(|c| c.count)
        .sum();
    assert_eq!(forward_total, stats.forward as u64);

    // Slice fidelity spot re-check on the exported records.
    let records = poskit_core::sft::read_sft(&data_path).unwrap();
    assert_eq!(records.len(), 70_000);
    for (record, example) in records.iter().zip(&examples).step_by(97) {
        assert_eq!(
            record.answer_text(),
            Some(example.answer_text.as_str()),
            "span does not slice the answer"
        );
    }

    // One induced span corruption aborts the export.
    let mut sabotaged: Vec<TrainingExample> = examples[..100].to_vec();
    sabotaged[50].answer_span = (0, sabotaged[50].answer_span.1 + 7);
    let bad_path = out_dir.join("acceptance_sft_bad.jsonl");
    let bad_manifest = out_dir.join("acceptance_sft_bad_manifest.json");
    let result = export(sabotaged, &bad_path, &bad_manifest, None);
    assert!(matches!(result, Err(SftError::SpanMismatch { index: 50, .. })));
    assert!(!bad_path.exists(), "aborted export must not leave data");

    pass(
        7,
        "70,000 records slice-faithful; manifest totals agree; induced span mismatch aborts",
    );
}

// ---------------------------------------------------------------------------
// Criterion 8: paper-scale reproduction is documented, not asserted
// ---------------------------------------------------------------------------

#[test]
fn criterion_8_reproduction_commands_documented() {
    // Model-level numbers need the original checkpoints; the README must
    // document the exact commands that reproduce them given endpoint
    // access, and criterion 2 pins the benchmark side bit-for-bit.
    let readme_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md");
    let readme = std::fs::read_to_string(readme_path).expect("workspace README present");
    for needle in ["poskit generate", "poskit eval", "poskit score", "poskit pyindex"] {
        assert!(
            readme.contains(needle),
            "README must document `{needle}`"
        );
    }
    assert!(
        readme.contains("Reproducing"),
        "README must carry a reproduction section"
    );
    pass(
        8,
        "reproduction commands documented; benchmark side pinned by criterion 2",
    );
}

// ---------------------------------------------------------------------------
// Supporting checks used by the criteria above
// ---------------------------------------------------------------------------

#[test]
fn mixture_build_smoke_uses_dialog_and_plain_paths() {
    // A small mixture exercising dialog adaptation alongside plain docs.
    let config = MixtureConfig {
        synthetic: 20,
        code: 5,
        adapted: 10,
        seed: 4,
        ..MixtureConfig::default()
    };
    let mut code = (0..4u32).map(|s| {
        (0..30)
            .map(|i| format!("fn step_{s}_{i}() {{ run({i}); }}\n"))
            .collect::<String>()
    });
    let mut adapted = (0..10u32).map(|d| {
        if d % 2 == 0 {
            CorpusRecord::with_turns(
                format!("dlg-{d}"),
                vec![
                    (poskit_core::prompting::Role::User, "List tools.".into()),
                    (
                        poskit_core::prompting::Role::Assistant,
                        format!(
                            "Of course:\n1. hammer{d}\n2. chisel{d}\n3. rasp{d}\n4. plane{d}\n5. auger{d}\n6. clamp{d}"
                        ),
                    ),
                ],
            )
            .unwrap()
        } else {
            let items: Vec<String> = (0..7).map(|i| format!("part {d} {i}")).collect();
            CorpusRecord::new(
                format!("doc-{d}"),
                render_structure(StructureKind::BulletList, &items),
            )
            .unwrap()
        }
    });
    let mut dialog_examples = 0;
    let stats = build_mixture_into(&config, &mut code, &mut adapted, &mut |example| {
        assert_eq!(
            example.sliced_answer(),
            Some(example.answer_text.as_str())
        );
        if example.messages.len() > 2 {
            dialog_examples += 1;
        }
        Ok(())
    })
    .unwrap();
    assert_eq!(stats.total(), 35);
    assert!(dialog_examples > 0, "dialog adaptation path unused");
}

#[test]
fn default_plan_matches_paper_protocol_shape() {
    let plan = EvalPlan::with_seed(1);
    assert_eq!(plan.sequences_per_condition, 50);
    assert_eq!(plan.lengths, vec![5, 10, 20]);
    assert_eq!(plan.pools, vec![PoolName::Letters, PoolName::Animals]);
    let specs = conditions(&plan).unwrap();
    let of: Vec<&ConditionSpec> = specs
        .iter()
        .filter(|s| s.task == QueryKind::Counting)
        .collect();
    assert_eq!(of.len(), 6);
    assert!(specs
        .iter()
        .all(|s| matches!(s.length, 5 | 10 | 20)));
    // Prompt conditions carry the 3-demo protocol.
    let prompts = generate_condition(
        &EvalPlan {
            sequences_per_condition: 1,
            ..plan
        },
        &specs[0],
    )
    .unwrap();
    assert_eq!(prompts[0].messages.len(), 7);
    assert!(matches!(
        prompts[0].condition.task,
        TaskLabel::PositionToItem | TaskLabel::ItemToPosition | TaskLabel::Counting
    ));
}
