//! Corpus adapters: turn external data into training examples.
//!
//! Three sources feed the training mixture. Synthetic examples instantiate
//! the operator family over built-in item pools; code examples window
//! snippets into line sequences; adapted examples extract naturally ordered
//! structures (numbered lists, bullet lists, markdown tables, code blocks)
//! from documents and dialogs. Direction and anchor are drawn per example
//! with configurable probabilities so backward and relative addressing can
//! be overrepresented.

use std::collections::HashSet;

use rand::prelude::IndexedRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompting::{
    render_followup_turn, render_user_turn, ChatMessage, Condition, ListFormat, Phrasing,
    PromptError, PromptVariant, Role, TaskLabel,
};
use crate::rng::{lanes, substream, Stream};
use crate::seqgen::{GenError, ItemPool, PoolName};
use crate::tasks::{
    gold_answer, resolve_position, valid_offsets, Anchor, Direction, IndexQuery, Item, ItemKind,
    QueryKind, Sequence, TaskError,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("{which} source exhausted: needed {needed}, produced {produced}")]
    SourceExhausted {
        which: String,
        needed: u32,
        produced: u32,
    },
    #[error("bad corpus record: {0}")]
    BadRecord(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// One input document or conversation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub source: String,
    pub text: String,
    /// Present for dialog corpora; alternates user/assistant starting with
    /// user (leading system turns are dropped at load time).
    pub turns: Option<Vec<(Role, String)>>,
}

impl CorpusRecord {
    pub fn new(source: impl Into<String>, text: impl Into<String>) -> Result<Self, CorpusError> {
        let text = text.into();
        if text.trim().is_empty() {
            return Err(CorpusError::BadRecord("empty text".into()));
        }
        Ok(CorpusRecord {
            source: source.into(),
            text,
            turns: None,
        })
    }

    pub fn with_turns(
        source: impl Into<String>,
        turns: Vec<(Role, String)>,
    ) -> Result<Self, CorpusError> {
        if turns.is_empty() {
            return Err(CorpusError::BadRecord("dialog has no turns".into()));
        }
        for (i, (role, text)) in turns.iter().enumerate() {
            let expected = if i % 2 == 0 { Role::User } else { Role::Assistant };
            if *role != expected {
                return Err(CorpusError::BadRecord(format!(
                    "turn {i} must be {expected:?}, got {role:?}"
                )));
            }
            if text.trim().is_empty() {
                return Err(CorpusError::BadRecord(format!("turn {i} is empty")));
            }
        }
        let text = turns
            .iter()
            .map(|(_, t)| t.as_str())
            .collect::<Vec<_>>()
            .join("\n\n");
        Ok(CorpusRecord {
            source: source.into(),
            text,
            turns: Some(turns),
        })
    }

    fn final_assistant_turn(&self) -> Option<&str> {
        let turns = self.turns.as_ref()?;
        turns
            .iter()
            .rev()
            .find(|(role, _)| *role == Role::Assistant)
            .map(|(_, text)| text.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    NumberedList,
    BulletList,
    MarkdownTable,
    CodeBlock,
}

impl StructureKind {
    /// How the structure is referred to in a follow-up question.
    pub fn context_phrase(&self) -> &'static str {
        match self {
            StructureKind::NumberedList => "numbered list",
            StructureKind::BulletList => "bullet list",
            StructureKind::MarkdownTable => "table",
            StructureKind::CodeBlock => "code block",
        }
    }
}

/// An ordered structure pulled out of a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractedStructure {
    pub kind: StructureKind,
    pub items: Vec<String>,
    pub source: String,
    /// Byte span of the structure in the source text.
    pub span: (usize, usize),
}

impl ExtractedStructure {
    pub fn to_sequence(&self) -> Result<Sequence, TaskError> {
        Sequence::new(
            self.items
                .iter()
                .map(|t| Item::new(t.clone(), ItemKind::Generic))
                .collect::<Result<Vec<_>, _>>()?,
        )
    }
}

const MIN_ITEMS: usize = 5;
const MAX_ITEM_CHARS: usize = 60;

/// Extracts every maximal numbered list, bullet list, markdown table, and
/// fenced code block with at least five usable items. Items are trimmed,
/// deduplicated (first occurrence kept), and length-capped at 60
/// characters; structures falling below five items are dropped.
pub fn extract_structures(record: &CorpusRecord) -> Vec<ExtractedStructure> {
    extract_from_text(&record.source, &record.text)
}

/// Extraction scoped to a dialog's final assistant turn.
pub fn extract_from_final_assistant(record: &CorpusRecord) -> Vec<ExtractedStructure> {
    match record.final_assistant_turn() {
        Some(text) => extract_from_text(&record.source, text),
        None => Vec::new(),
    }
}

struct Line<'a> {
    text: &'a str,
    start: usize,
    end: usize,
}

fn lines_with_offsets(text: &str) -> Vec<Line<'_>> {
    let mut lines = Vec::new();
    let mut start = 0;
    for segment in text.split_inclusive('\n') {
        let content = segment.strip_suffix('\n').unwrap_or(segment);
        let content = content.strip_suffix('\r').unwrap_or(content);
        lines.push(Line {
            text: content,
            start,
            end: start + content.len(),
        });
        start += segment.len();
    }
    lines
}

fn numbered_item(line: &str) -> Option<(u64, &str)> {
    let t = line.trim_start();
    let digits: usize = t.bytes().take_while(|b| b.is_ascii_digit()).count();
    if digits == 0 || digits > 9 {
        return None;
    }
    let marker = t.as_bytes().get(digits)?;
    if *marker != b'.' && *marker != b')' {
        return None;
    }
    let rest = &t[digits + 1..];
    if !rest.starts_with(' ') && !rest.starts_with('\t') {
        return None;
    }
    let number = t[..digits].parse().ok()?;
    Some((number, rest.trim()))
}

fn bullet_item(line: &str) -> Option<&str> {
    let t = line.trim_start();
    for marker in ["- ", "* ", "\u{2022} "] {
        if let Some(rest) = t.strip_prefix(marker) {
            return Some(rest.trim());
        }
    }
    None
}

fn is_fence(line: &str) -> bool {
    line.trim_start().starts_with("```")
}

fn is_table_separator(line: &str) -> bool {
    let t = line.trim();
    !t.is_empty()
        && t.contains('|')
        && t.contains('-')
        && t.chars().all(|c| matches!(c, '|' | '-' | ':' | ' ' | '\t'))
}

fn table_row_cells(line: &str) -> Option<String> {
    if !line.contains('|') {
        return None;
    }
    let mut cells: Vec<&str> = line.split('|').map(str::trim).collect();
    if cells.first() == Some(&"") {
        cells.remove(0);
    }
    if cells.last() == Some(&"") {
        cells.pop();
    }
    if cells.is_empty() {
        return None;
    }
    Some(cells.join(" | "))
}

fn extract_from_text(source: &str, text: &str) -> Vec<ExtractedStructure> {
    let lines = lines_with_offsets(text);
    let mut out = Vec::new();
    let mut i = 0;

    let mut emit = |kind: StructureKind, raw: Vec<String>, span: (usize, usize)| {
        let mut seen = HashSet::new();
        let items: Vec<String> = raw
            .into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .filter(|s| seen.insert(s.clone()))
            .filter(|s| s.chars().count() <= MAX_ITEM_CHARS)
            .collect();
        if items.len() >= MIN_ITEMS {
            out.push(ExtractedStructure {
                kind,
                items,
                source: source.to_string(),
                span,
            });
        }
    };

    while i < lines.len() {
        let line = &lines[i];

        if is_fence(line.text) {
            let mut j = i + 1;
            while j < lines.len() && !is_fence(lines[j].text) {
                j += 1;
            }
            let body: Vec<String> = lines[i + 1..j.min(lines.len())]
                .iter()
                .map(|l| l.text.to_string())
                .collect();
            let span_end = if j < lines.len() { lines[j].end } else { lines[lines.len() - 1].end };
            emit(StructureKind::CodeBlock, body, (line.start, span_end));
            i = j + 1;
            continue;
        }

        if let Some((first_number, _)) = numbered_item(line.text) {
            let mut j = i;
            let mut previous = first_number;
            let mut raw = Vec::new();
            while j < lines.len() {
                match numbered_item(lines[j].text) {
                    Some((number, item)) if j == i || number > previous => {
                        previous = number;
                        raw.push(item.to_string());
                        j += 1;
                    }
                    _ => break,
                }
            }
            emit(
                StructureKind::NumberedList,
                raw,
                (line.start, lines[j - 1].end),
            );
            i = j;
            continue;
        }

        if bullet_item(line.text).is_some() {
            let mut j = i;
            let mut raw = Vec::new();
            while j < lines.len() {
                match bullet_item(lines[j].text) {
                    Some(item) => {
                        raw.push(item.to_string());
                        j += 1;
                    }
                    None => break,
                }
            }
            emit(
                StructureKind::BulletList,
                raw,
                (line.start, lines[j - 1].end),
            );
            i = j;
            continue;
        }

        if line.text.contains('|')
            && !is_table_separator(line.text)
            && i + 1 < lines.len()
            && is_table_separator(lines[i + 1].text)
        {
            let mut j = i + 2;
            let mut raw = Vec::new();
            while j < lines.len() {
                if is_table_separator(lines[j].text) {
                    break;
                }
                match table_row_cells(lines[j].text) {
                    Some(row) => {
                        raw.push(row);
                        j += 1;
                    }
                    None => break,
                }
            }
            // Header row excluded from items; span covers header to last row.
            emit(
                StructureKind::MarkdownTable,
                raw,
                (line.start, lines[j - 1].end),
            );
            i = j;
            continue;
        }

        i += 1;
    }

    out
}

/// Renders a structure back to text in its own notation. Inverse of
/// extraction for well-formed items.
pub fn render_structure(kind: StructureKind, items: &[String]) -> String {
    match kind {
        StructureKind::NumberedList => items
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{}. {t}", i + 1))
            .collect::<Vec<_>>()
            .join("\n"),
        StructureKind::BulletList => items
            .iter()
            .map(|t| format!("- {t}"))
            .collect::<Vec<_>>()
            .join("\n"),
        StructureKind::MarkdownTable => {
            let mut lines = vec!["| item |".to_string(), "| --- |".to_string()];
            lines.extend(items.iter().map(|t| format!("| {t} |")));
            lines.join("\n")
        }
        StructureKind::CodeBlock => format!("```\n{}\n```", items.join("\n")),
    }
}

const WINDOW_MIN: usize = 5;
const WINDOW_MAX: usize = 30;

/// Splits a snippet into non-empty lines and tiles it with contiguous
/// windows of 5 to 30 lines (length drawn uniformly per window). Snippets
/// under five lines yield nothing; windows containing duplicate lines are
/// discarded.
pub fn window_code(snippet: &str, stream: &mut Stream) -> Vec<Sequence> {
    let lines: Vec<&str> = snippet
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.trim().is_empty())
        .collect();
    if lines.len() < WINDOW_MIN {
        return Vec::new();
    }
    let mut windows = Vec::new();
    let mut position = 0;
    while lines.len() - position >= WINDOW_MIN {
        let upper = (lines.len() - position).min(WINDOW_MAX);
        let width = stream.random_range(WINDOW_MIN..=upper);
        let window = &lines[position..position + width];
        position += width;
        let mut seen = HashSet::new();
        if window.iter().all(|l| seen.insert(*l)) {
            let items = window.iter().map(|l| Item::code_line(*l)).collect();
            windows.push(Sequence::new(items).expect("distinct non-empty lines"));
        }
    }
    windows
}

/// Mixture composition and sampling probabilities.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureConfig {
    /// Probability that a retrieval example indexes forward.
    #[serde(default = "default_p_forward")]
    pub p_forward: f64,
    /// Probability that a retrieval example uses an endpoint anchor.
    #[serde(default = "default_p_endpoint")]
    pub p_endpoint: f64,
    #[serde(default = "default_synthetic")]
    pub synthetic: u32,
    #[serde(default = "default_code")]
    pub code: u32,
    #[serde(default = "default_adapted")]
    pub adapted: u32,
    pub seed: u64,
    /// Retrieval examples generated per extracted structure.
    #[serde(default = "default_queries_per_structure")]
    pub queries_per_structure: u32,
    /// Probability that the assistant turn frames the answer in a sentence.
    #[serde(default = "default_p_framing")]
    pub p_framing: f64,
}

fn default_p_forward() -> f64 {
    0.3
}
fn default_p_endpoint() -> f64 {
    0.3
}
fn default_synthetic() -> u32 {
    20_000
}
fn default_code() -> u32 {
    4_000
}
fn default_adapted() -> u32 {
    46_000
}
fn default_queries_per_structure() -> u32 {
    1
}
fn default_p_framing() -> f64 {
    0.15
}

impl Default for MixtureConfig {
    fn default() -> Self {
        MixtureConfig {
            p_forward: default_p_forward(),
            p_endpoint: default_p_endpoint(),
            synthetic: default_synthetic(),
            code: default_code(),
            adapted: default_adapted(),
            seed: 0,
            queries_per_structure: default_queries_per_structure(),
            p_framing: default_p_framing(),
        }
    }
}

impl MixtureConfig {
    fn validate(&self) -> Result<(), CorpusError> {
        for p in [self.p_forward, self.p_endpoint, self.p_framing] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CorpusError::BadProbability(p));
            }
        }
        Ok(())
    }
}

/// One supervised example: chat turns plus the byte span of the answer
/// inside the final assistant message.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub messages: Vec<ChatMessage>,
    pub answer_text: String,
    pub answer_span: (usize, usize),
    pub condition: Condition,
    pub provenance: String,
}

impl TrainingExample {
    /// The answer bytes the span slices out of the final assistant turn.
    pub fn sliced_answer(&self) -> Option<&str> {
        let last = self.messages.last()?;
        last.content.get(self.answer_span.0..self.answer_span.1)
    }
}

/// Counts tracked while building a mixture.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixtureStats {
    pub synthetic: u32,
    pub code: u32,
    pub adapted: u32,
    pub synthetic_forward: u32,
    pub synthetic_endpoint: u32,
    pub forward: u32,
    pub endpoint: u32,
    pub position_to_item: u32,
    pub item_to_position: u32,
}

impl MixtureStats {
    pub fn total(&self) -> u32 {
        self.synthetic + self.code + self.adapted
    }
}

struct SampledQuery {
    query: IndexQuery,
    variant: PromptVariant,
}

/// Draws direction, anchor, query kind, offset, and surface variant for one
/// retrieval example.
fn sample_retrieval_query(
    seq: &Sequence,
    config: &MixtureConfig,
    formats: &[ListFormat],
    stream: &mut Stream,
) -> Result<SampledQuery, CorpusError> {
    let length = seq.length();
    let direction = if stream.random_bool(config.p_forward) {
        Direction::Forward
    } else {
        Direction::Backward
    };
    let endpoint = stream.random_bool(config.p_endpoint);
    let kind = if stream.random_bool(0.5) {
        QueryKind::PositionToItem
    } else {
        QueryKind::ItemToPosition
    };

    let anchor = if endpoint {
        Anchor::Endpoint
    } else {
        let candidates: Vec<u32> = (1..=length)
            .filter(|&r| !valid_offsets(Anchor::Relative(r), direction, length).is_empty())
            .collect();
        match candidates.choose(stream) {
            Some(&r) => Anchor::Relative(r),
            // A one-item sequence admits no relative query; fall back.
            None => Anchor::Endpoint,
        }
    };
    let offsets = valid_offsets(anchor, direction, length);
    let offset = *offsets.choose(stream).expect("anchor admits offsets");

    let query = if kind == QueryKind::PositionToItem {
        IndexQuery::PositionToItem {
            anchor,
            direction,
            offset,
        }
    } else {
        let position = resolve_position(anchor, direction, offset, length)?;
        IndexQuery::ItemToPosition {
            anchor,
            direction,
            offset,
            target: seq.at(position).expect("in range").clone(),
        }
    };

    let list_format = *formats.choose(stream).expect("formats non-empty");
    let phrasings = Phrasing::compatible(kind, anchor.kind(), direction);
    let phrasing = *phrasings.choose(stream).expect("compatible set non-empty");
    let mut variant = PromptVariant::new(list_format, phrasing);
    if stream.random_bool(config.p_framing) {
        variant.framing = crate::prompting::AnswerFraming::Sentence;
    }

    Ok(SampledQuery { query, variant })
}

fn single_turn_example(
    seq: &Sequence,
    sampled: &SampledQuery,
    provenance: &str,
) -> Result<TrainingExample, CorpusError> {
    let user = render_user_turn(seq, &sampled.query, &sampled.variant)?;
    let gold = gold_answer(seq, &sampled.query)?;
    let answer = gold.canonical_text();
    let (assistant, span) = sampled.variant.framing.render(&answer);
    let condition = Condition {
        task: TaskLabel::from_kind(sampled.query.kind()),
        anchor: sampled.query.anchor().map(|a| a.kind()),
        direction: sampled.query.direction(),
        item_kind: seq.items()[0].kind,
        length: seq.length(),
        variant: sampled.variant.id(),
    };
    Ok(TrainingExample {
        messages: vec![ChatMessage::user(user), ChatMessage::assistant(assistant)],
        answer_text: answer,
        answer_span: span,
        condition,
        provenance: provenance.to_string(),
    })
}

/// Appends a positional follow-up to a dialog whose final assistant turn
/// contains the structure; the original turns are preserved verbatim.
pub fn adapt_dialog(
    record: &CorpusRecord,
    structure: &ExtractedStructure,
    query: &IndexQuery,
    variant: &PromptVariant,
) -> Result<TrainingExample, CorpusError> {
    let turns = record
        .turns
        .as_ref()
        .ok_or_else(|| CorpusError::BadRecord("adapt_dialog requires turns".into()))?;
    let seq = structure.to_sequence()?;
    let question = render_followup_turn(&seq, query, variant, structure.kind.context_phrase())?;
    let gold = gold_answer(&seq, query)?;
    let answer = gold.canonical_text();
    let (assistant, span) = variant.framing.render(&answer);

    let mut messages: Vec<ChatMessage> = turns
        .iter()
        .map(|(role, text)| ChatMessage {
            role: *role,
            content: text.clone(),
        })
        .collect();
    messages.push(ChatMessage::user(question));
    messages.push(ChatMessage::assistant(assistant));

    let condition = Condition {
        task: TaskLabel::from_kind(query.kind()),
        anchor: query.anchor().map(|a| a.kind()),
        direction: query.direction(),
        item_kind: ItemKind::Generic,
        length: seq.length(),
        variant: format!("dialog.{}.{}", variant.phrasing.label(), variant.framing.label()),
    };
    Ok(TrainingExample {
        messages,
        answer_text: answer,
        answer_span: span,
        condition,
        provenance: format!("adapted:{}", record.source),
    })
}

const SYNTHETIC_FORMATS: [ListFormat; 4] = [
    ListFormat::CommaLine,
    ListFormat::BulletList,
    ListFormat::NumberedList,
    ListFormat::CodeBlock,
];
const ADAPTED_FORMATS: [ListFormat; 3] = [
    ListFormat::CommaLine,
    ListFormat::BulletList,
    ListFormat::NumberedList,
];
const SYNTHETIC_LENGTH_RANGE: (u32, u32) = (10, 50);

/// Builds the full mixture, streaming each example into `sink`. Examples are
/// emitted grouped by source (synthetic, then code, then adapted) and the
/// whole stream is deterministic under `config.seed`.
pub fn build_mixture_into(
    config: &MixtureConfig,
    code_snippets: &mut dyn Iterator<Item = String>,
    adapted_records: &mut dyn Iterator<Item = CorpusRecord>,
    sink: &mut dyn FnMut(&TrainingExample) -> Result<(), CorpusError>,
) -> Result<MixtureStats, CorpusError> {
    config.validate()?;
    let mut stats = MixtureStats::default();
    let pools: Vec<ItemPool> = PoolName::ALL.iter().map(|&n| ItemPool::builtin(n)).collect();

    // Synthetic source: operator family over built-in pools.
    for index in 0..config.synthetic {
        let mut stream = substream(config.seed, lanes::MIXTURE_SYNTHETIC, index as u64, 0);
        let pool = pools.choose(&mut stream).expect("pools non-empty");
        let (lo, hi) = SYNTHETIC_LENGTH_RANGE;
        let length = stream.random_range(lo..=hi.min(pool.size()));
        let seq = pool.sample_sequence(length, &mut stream)?;
        let sampled = sample_retrieval_query(&seq, config, &SYNTHETIC_FORMATS, &mut stream)?;
        let example = single_turn_example(&seq, &sampled, "synthetic")?;
        record_stats(&mut stats, &sampled.query, true);
        stats.synthetic += 1;
        sink(&example)?;
    }

    // Code source: windowed line sequences, rendered as code blocks.
    let mut produced = 0u32;
    let mut snippet_index = 0u64;
    'code: while produced < config.code {
        let Some(snippet) = code_snippets.next() else {
            return Err(CorpusError::SourceExhausted {
                which: "code".into(),
                needed: config.code,
                produced,
            });
        };
        let mut window_stream = substream(config.seed, lanes::MIXTURE_CODE, snippet_index, 0);
        snippet_index += 1;
        for window in window_code(&snippet, &mut window_stream) {
            if produced >= config.code {
                break 'code;
            }
            let mut stream = substream(config.seed, lanes::MIXTURE_CODE, produced as u64, 1);
            let sampled = sample_retrieval_query(
                &window,
                config,
                &[ListFormat::CodeBlock],
                &mut stream,
            )?;
            let example = single_turn_example(&window, &sampled, "code")?;
            record_stats(&mut stats, &sampled.query, false);
            stats.code += 1;
            produced += 1;
            sink(&example)?;
        }
    }

    // Adapted source: extracted structures from documents and dialogs.
    let mut produced = 0u32;
    while produced < config.adapted {
        let Some(record) = adapted_records.next() else {
            return Err(CorpusError::SourceExhausted {
                which: "adapted".into(),
                needed: config.adapted,
                produced,
            });
        };
        let structures = if record.turns.is_some() {
            extract_from_final_assistant(&record)
        } else {
            extract_structures(&record)
        };
        for structure in structures {
            for _ in 0..config.queries_per_structure {
                if produced >= config.adapted {
                    break;
                }
                let mut stream =
                    substream(config.seed, lanes::MIXTURE_ADAPTED, produced as u64, 0);
                let seq = structure.to_sequence()?;
                let sampled =
                    sample_retrieval_query(&seq, config, &ADAPTED_FORMATS, &mut stream)?;
                let example = if record.turns.is_some() {
                    adapt_dialog(&record, &structure, &sampled.query, &sampled.variant)?
                } else {
                    single_turn_example(&seq, &sampled, &format!("adapted:{}", record.source))?
                };
                record_stats(&mut stats, &sampled.query, false);
                stats.adapted += 1;
                produced += 1;
                sink(&example)?;
            }
        }
    }

    Ok(stats)
}

fn record_stats(stats: &mut MixtureStats, query: &IndexQuery, synthetic: bool) {
    if query.direction() == Some(Direction::Forward) {
        stats.forward += 1;
        if synthetic {
            stats.synthetic_forward += 1;
        }
    }
    if matches!(query.anchor(), Some(Anchor::Endpoint)) {
        stats.endpoint += 1;
        if synthetic {
            stats.synthetic_endpoint += 1;
        }
    }
    match query.kind() {
        QueryKind::PositionToItem => stats.position_to_item += 1,
        QueryKind::ItemToPosition => stats.item_to_position += 1,
        QueryKind::Counting => {}
    }
}

/// Convenience wrapper collecting the mixture in memory.
pub fn build_mixture(
    config: &MixtureConfig,
    code_snippets: &mut dyn Iterator<Item = String>,
    adapted_records: &mut dyn Iterator<Item = CorpusRecord>,
) -> Result<(Vec<TrainingExample>, MixtureStats), CorpusError> {
    let mut examples = Vec::new();
    let stats = build_mixture_into(config, code_snippets, adapted_records, &mut |example| {
        examples.push(example.clone());
        Ok(())
    })?;
    Ok((examples, stats))
}

/// Streams the mixture to a newline-delimited JSON file.
pub fn write_mixture(
    path: &std::path::Path,
    config: &MixtureConfig,
    code_snippets: &mut dyn Iterator<Item = String>,
    adapted_records: &mut dyn Iterator<Item = CorpusRecord>,
) -> Result<MixtureStats, CorpusError> {
    use std::io::Write;
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    let stats = build_mixture_into(config, code_snippets, adapted_records, &mut |example| {
        serde_json::to_writer(&mut writer, example)
            .map_err(|e| CorpusError::BadRecord(e.to_string()))?;
        writer.write_all(b"\n")?;
        Ok(())
    })?;
    writer.flush()?;
    Ok(stats)
}

/// Reads training examples back from newline-delimited JSON.
pub fn read_training_examples(
    path: &std::path::Path,
) -> Result<Vec<TrainingExample>, CorpusError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(|e| CorpusError::BadRecord(e.to_string())))
        .collect()
}

/// Field mapping for newline-delimited JSON corpora.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusFormat {
    /// Dot-separated path to the document text.
    #[serde(default = "default_text_field")]
    pub text_field: String,
    /// Dot-separated path to a turn array; takes precedence when present.
    #[serde(default)]
    pub turns_field: Option<String>,
    /// Dot-separated path to a source id.
    #[serde(default)]
    pub source_field: Option<String>,
}

fn default_text_field() -> String {
    "text".to_string()
}

impl Default for CorpusFormat {
    fn default() -> Self {
        CorpusFormat {
            text_field: default_text_field(),
            turns_field: None,
            source_field: None,
        }
    }
}

fn lookup<'v>(value: &'v serde_json::Value, dotted: &str) -> Option<&'v serde_json::Value> {
    let pointer = format!("/{}", dotted.replace('.', "/"));
    value.pointer(&pointer)
}

fn parse_turns(value: &serde_json::Value) -> Result<Vec<(Role, String)>, CorpusError> {
    let array = value
        .as_array()
        .ok_or_else(|| CorpusError::BadRecord("turns field is not an array".into()))?;
    let mut turns = Vec::with_capacity(array.len());
    for entry in array {
        let role_text = entry
            .get("role")
            .or_else(|| entry.get("from"))
            .and_then(|r| r.as_str())
            .ok_or_else(|| CorpusError::BadRecord("turn missing role".into()))?;
        let role = match role_text {
            "user" | "human" => Role::User,
            "assistant" | "gpt" | "bot" => Role::Assistant,
            "system" => Role::System,
            other => return Err(CorpusError::BadRecord(format!("unknown role {other:?}"))),
        };
        let content = entry
            .get("content")
            .or_else(|| entry.get("text"))
            .or_else(|| entry.get("value"))
            .and_then(|c| c.as_str())
            .ok_or_else(|| CorpusError::BadRecord("turn missing content".into()))?;
        turns.push((role, content.to_string()));
    }
    // Leading system prompts are dropped so the alternation invariant holds.
    while turns.first().map(|(r, _)| *r) == Some(Role::System) {
        turns.remove(0);
    }
    Ok(turns)
}

/// Reads a newline-delimited JSON corpus, one record per line.
pub fn read_corpus(
    path: &std::path::Path,
    format: &CorpusFormat,
) -> Result<impl Iterator<Item = Result<CorpusRecord, CorpusError>>, CorpusError> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let format = format.clone();
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "corpus".to_string());
    Ok(reader
        .lines()
        .enumerate()
        .filter(|(_, line)| line.as_ref().map(|l| !l.trim().is_empty()).unwrap_or(true))
        .map(move |(index, line)| {
            let line = line.map_err(CorpusError::Io)?;
            let value: serde_json::Value = serde_json::from_str(&line)
                .map_err(|e| CorpusError::BadRecord(format!("line {}: {e}", index + 1)))?;
            let source = format
                .source_field
                .as_ref()
                .and_then(|f| lookup(&value, f))
                .and_then(|v| v.as_str())
                .map(str::to_string)
                .unwrap_or_else(|| format!("{stem}:{}", index + 1));
            if let Some(turns_field) = &format.turns_field {
                if let Some(turns_value) = lookup(&value, turns_field) {
                    let turns = parse_turns(turns_value)?;
                    return CorpusRecord::with_turns(source, turns);
                }
            }
            let text = lookup(&value, &format.text_field)
                .and_then(|v| v.as_str())
                .ok_or_else(|| {
                    CorpusError::BadRecord(format!(
                        "line {}: missing text field {:?}",
                        index + 1,
                        format.text_field
                    ))
                })?;
            CorpusRecord::new(source, text)
        }))
}
