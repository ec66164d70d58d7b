//! Few-shot prompt rendering.
//!
//! Every evaluation prompt follows the same protocol: three in-context
//! demonstrations of the same task on independently sampled sequences,
//! then the unanswered test question. The surface form is controlled by a
//! [`PromptVariant`] (list format plus query phrasing); the gold answer is
//! carried as metadata and never rendered into the test turn.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pyindex::{PyIndexCase, PyIndexCategory};
use crate::rng::Stream;
use crate::seqgen::{GenError, ItemPool};
use crate::tasks::{
    gold_answer, resolve_position, valid_offsets, Anchor, AnchorKind, Direction, GoldAnswer,
    IndexQuery, Item, ItemKind, QueryKind, Sequence, TaskError,
};
use rand::prelude::IndexedRandom;
use rand::Rng;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("variant phrasing {phrasing:?} incompatible with {context}")]
    IncompatibleVariant {
        phrasing: Phrasing,
        context: String,
    },
    #[error("could not sample a distinct demonstration sequence: {0}")]
    DemoSampling(String),
    #[error(transparent)]
    Task(#[from] TaskError),
    #[error(transparent)]
    Gen(#[from] GenError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

/// One chat turn in the de-facto chat-completion wire shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }
    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListFormat {
    CommaLine,
    BulletList,
    NumberedList,
    CodeBlock,
}

impl ListFormat {
    pub const ALL: [ListFormat; 4] = [
        ListFormat::CommaLine,
        ListFormat::BulletList,
        ListFormat::NumberedList,
        ListFormat::CodeBlock,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            ListFormat::CommaLine => "comma_line",
            ListFormat::BulletList => "bullet_list",
            ListFormat::NumberedList => "numbered_list",
            ListFormat::CodeBlock => "code_block",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phrasing {
    OrdinalFromStart,
    OrdinalFromEnd,
    SecondToLastStyle,
    RelationalBeforeAfter,
}

impl Phrasing {
    pub fn label(&self) -> &'static str {
        match self {
            Phrasing::OrdinalFromStart => "ordinal_from_start",
            Phrasing::OrdinalFromEnd => "ordinal_from_end",
            Phrasing::SecondToLastStyle => "second_to_last_style",
            Phrasing::RelationalBeforeAfter => "relational_before_after",
        }
    }

    /// The default phrasing for a query's anchor and direction.
    pub fn default_for(anchor: Option<AnchorKind>, direction: Option<Direction>) -> Phrasing {
        match (anchor, direction) {
            (Some(AnchorKind::Relative), _) => Phrasing::RelationalBeforeAfter,
            (_, Some(Direction::Backward)) => Phrasing::OrdinalFromEnd,
            _ => Phrasing::OrdinalFromStart,
        }
    }

    /// All phrasings compatible with a query shape.
    pub fn compatible(kind: QueryKind, anchor: AnchorKind, direction: Direction) -> Vec<Phrasing> {
        match (anchor, direction) {
            (AnchorKind::Relative, _) => vec![Phrasing::RelationalBeforeAfter],
            (AnchorKind::Endpoint, Direction::Forward) => vec![Phrasing::OrdinalFromStart],
            (AnchorKind::Endpoint, Direction::Backward) => {
                if kind == QueryKind::PositionToItem {
                    vec![Phrasing::OrdinalFromEnd, Phrasing::SecondToLastStyle]
                } else {
                    vec![Phrasing::OrdinalFromEnd]
                }
            }
        }
    }
}

/// Whether the assistant turn wraps the answer in a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerFraming {
    #[default]
    Bare,
    Sentence,
}

impl AnswerFraming {
    pub fn label(&self) -> &'static str {
        match self {
            AnswerFraming::Bare => "bare",
            AnswerFraming::Sentence => "framed",
        }
    }

    /// Renders the assistant turn and the byte span of the answer inside it.
    pub fn render(&self, answer: &str) -> (String, (usize, usize)) {
        match self {
            AnswerFraming::Bare => (answer.to_string(), (0, answer.len())),
            AnswerFraming::Sentence => {
                let prefix = "The answer is ";
                let text = format!("{prefix}{answer}.");
                (text, (prefix.len(), prefix.len() + answer.len()))
            }
        }
    }
}

/// Surface-form controls for one prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptVariant {
    pub list_format: ListFormat,
    pub phrasing: Phrasing,
    #[serde(default)]
    pub framing: AnswerFraming,
    /// Overrides the derived answer instruction when set.
    #[serde(default)]
    pub answer_instruction: Option<String>,
}

impl PromptVariant {
    pub fn new(list_format: ListFormat, phrasing: Phrasing) -> Self {
        PromptVariant {
            list_format,
            phrasing,
            framing: AnswerFraming::Bare,
            answer_instruction: None,
        }
    }

    /// The default variant for a query: comma-line list, anchor-appropriate
    /// phrasing, bare answer.
    pub fn default_for(query: &IndexQuery) -> Self {
        PromptVariant::new(
            ListFormat::CommaLine,
            Phrasing::default_for(query.anchor().map(|a| a.kind()), query.direction()),
        )
    }

    pub fn id(&self) -> String {
        format!(
            "{}.{}.{}",
            self.list_format.label(),
            self.phrasing.label(),
            self.framing.label()
        )
    }
}

/// Task coordinate used in conditions, reports, and file names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskLabel {
    PositionToItem,
    ItemToPosition,
    Counting,
    PyIndex(PyIndexCategory),
}

impl TaskLabel {
    pub fn from_kind(kind: QueryKind) -> Self {
        match kind {
            QueryKind::PositionToItem => TaskLabel::PositionToItem,
            QueryKind::ItemToPosition => TaskLabel::ItemToPosition,
            QueryKind::Counting => TaskLabel::Counting,
        }
    }

    pub fn query_kind(&self) -> Option<QueryKind> {
        match self {
            TaskLabel::PositionToItem => Some(QueryKind::PositionToItem),
            TaskLabel::ItemToPosition => Some(QueryKind::ItemToPosition),
            TaskLabel::Counting => Some(QueryKind::Counting),
            TaskLabel::PyIndex(_) => None,
        }
    }
}

impl std::fmt::Display for TaskLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskLabel::PositionToItem => write!(f, "p2i"),
            TaskLabel::ItemToPosition => write!(f, "i2p"),
            TaskLabel::Counting => write!(f, "count"),
            TaskLabel::PyIndex(cat) => write!(f, "pyindex:{}", cat.label()),
        }
    }
}

impl std::str::FromStr for TaskLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "p2i" => Ok(TaskLabel::PositionToItem),
            "i2p" => Ok(TaskLabel::ItemToPosition),
            "count" => Ok(TaskLabel::Counting),
            other => {
                if let Some(cat) = other.strip_prefix("pyindex:") {
                    PyIndexCategory::parse(cat)
                        .map(TaskLabel::PyIndex)
                        .ok_or_else(|| format!("unknown pyindex category {cat:?}"))
                } else {
                    Err(format!("unknown task label {other:?}"))
                }
            }
        }
    }
}

impl Serialize for TaskLabel {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for TaskLabel {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The coordinates that identify an evaluation cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Condition {
    pub task: TaskLabel,
    pub anchor: Option<AnchorKind>,
    pub direction: Option<Direction>,
    pub item_kind: ItemKind,
    pub length: u32,
    pub variant: String,
}

impl Condition {
    /// Filesystem-safe identifier, excluding the variant. PyIndex cells are
    /// identified by category alone (list lengths vary within a category).
    pub fn id(&self) -> String {
        if let TaskLabel::PyIndex(cat) = self.task {
            return format!("pyindex_{}", cat.label());
        }
        let mut parts: Vec<String> = vec![self.task.to_string()];
        if let Some(anchor) = self.anchor {
            parts.push(anchor.label().to_string());
        }
        if let Some(direction) = self.direction {
            parts.push(direction.label().to_string());
        }
        parts.push(kind_label(self.item_kind).to_string());
        parts.push(format!("L{}", self.length));
        parts.join("_")
    }
}

fn kind_label(kind: ItemKind) -> &'static str {
    match kind {
        ItemKind::Letter => "letters",
        ItemKind::Word => "words",
        ItemKind::CodeLine => "code",
        ItemKind::Generic => "items",
    }
}

/// What a correct response must parse to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedAnswer {
    Item(Item),
    Integer(i64),
}

impl From<GoldAnswer> for ExpectedAnswer {
    fn from(gold: GoldAnswer) -> Self {
        match gold {
            GoldAnswer::Item(item) => ExpectedAnswer::Item(item),
            GoldAnswer::Offset(n) => ExpectedAnswer::Integer(n as i64),
            GoldAnswer::Count(c) => ExpectedAnswer::Integer(c as i64),
        }
    }
}

impl ExpectedAnswer {
    pub fn canonical_text(&self) -> String {
        match self {
            ExpectedAnswer::Item(item) => item.text.clone(),
            ExpectedAnswer::Integer(v) => v.to_string(),
        }
    }
}

/// One in-context demonstration for a retrieval task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetrievalDemo {
    pub sequence: Sequence,
    pub query: IndexQuery,
    pub answer: GoldAnswer,
}

/// What the test turn is about, with its demonstrations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PromptPayload {
    Retrieval {
        sequence: Sequence,
        query: IndexQuery,
        demos: Vec<RetrievalDemo>,
    },
    PyIndex {
        case: PyIndexCase,
        demos: Vec<PyIndexCase>,
    },
}

/// Where a prompt's randomness came from; carried into trial records so
/// resumed runs reproduce the same bytes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedCoords {
    pub seed: u64,
    pub sequence_index: u64,
    pub query_index: u64,
}

/// A rendered few-shot prompt with gold metadata.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptInstance {
    pub messages: Vec<ChatMessage>,
    pub payload: PromptPayload,
    pub expected: ExpectedAnswer,
    pub condition: Condition,
    #[serde(default)]
    pub seed_coords: SeedCoords,
}

impl PromptInstance {
    /// Candidate items for answer parsing (the test sequence), when the
    /// answer space is items.
    pub fn candidates(&self) -> Option<&Sequence> {
        match &self.payload {
            PromptPayload::Retrieval { sequence, query, .. } => {
                if query.kind() == QueryKind::PositionToItem {
                    Some(sequence)
                } else {
                    None
                }
            }
            PromptPayload::PyIndex { .. } => None,
        }
    }

    /// The queried offset, when the task has one.
    pub fn queried_offset(&self) -> Option<u32> {
        match &self.payload {
            PromptPayload::Retrieval { query, .. } => query.offset(),
            PromptPayload::PyIndex { .. } => None,
        }
    }

    /// The user-visible text of the final (test) turn.
    pub fn test_turn(&self) -> &str {
        &self.messages.last().expect("prompt has messages").content
    }
}

const DEMO_COUNT: usize = 3;
const DEMO_RESAMPLE_LIMIT: usize = 200;

/// Renders a query into a three-shot chat prompt.
///
/// Demonstrations repeat the test query's task coordinates (kind, anchor
/// variant, direction, item kind, phrasing) on independently sampled
/// sequences from `pool`, with offsets resampled per demonstration.
pub fn render_prompt(
    seq: &Sequence,
    query: &IndexQuery,
    variant: &PromptVariant,
    pool: &ItemPool,
    demo_stream: &mut Stream,
) -> Result<PromptInstance, PromptError> {
    check_compatibility(query, variant)?;
    let gold = gold_answer(seq, query)?;

    let demos = sample_demos(seq, query, pool, demo_stream)?;

    let mut messages = Vec::with_capacity(DEMO_COUNT * 2 + 1);
    for demo in &demos {
        messages.push(ChatMessage::user(render_user_turn(
            &demo.sequence,
            &demo.query,
            variant,
        )?));
        let (text, _) = variant.framing.render(&demo.answer.canonical_text());
        messages.push(ChatMessage::assistant(text));
    }
    messages.push(ChatMessage::user(render_user_turn(seq, query, variant)?));

    let condition = Condition {
        task: TaskLabel::from_kind(query.kind()),
        anchor: query.anchor().map(|a| a.kind()),
        direction: query.direction(),
        item_kind: seq.items()[0].kind,
        length: seq.length(),
        variant: variant.id(),
    };

    Ok(PromptInstance {
        messages,
        payload: PromptPayload::Retrieval {
            sequence: seq.clone(),
            query: query.clone(),
            demos,
        },
        expected: gold.into(),
        condition,
        seed_coords: SeedCoords::default(),
    })
}

fn check_compatibility(query: &IndexQuery, variant: &PromptVariant) -> Result<(), PromptError> {
    let (Some(anchor), Some(direction)) = (query.anchor(), query.direction()) else {
        return Ok(()); // counting ignores phrasing
    };
    let allowed = Phrasing::compatible(query.kind(), anchor.kind(), direction);
    if allowed.contains(&variant.phrasing) {
        Ok(())
    } else {
        Err(PromptError::IncompatibleVariant {
            phrasing: variant.phrasing,
            context: format!(
                "{:?} {:?} {:?}",
                query.kind(),
                anchor.kind(),
                direction
            ),
        })
    }
}

fn sample_demos(
    test_seq: &Sequence,
    test_query: &IndexQuery,
    pool: &ItemPool,
    stream: &mut Stream,
) -> Result<Vec<RetrievalDemo>, PromptError> {
    let mut used: Vec<Vec<String>> = vec![multiset_key(test_seq)];
    let mut demos = Vec::with_capacity(DEMO_COUNT);
    for _ in 0..DEMO_COUNT {
        let mut attempts = 0;
        let sequence = loop {
            attempts += 1;
            if attempts > DEMO_RESAMPLE_LIMIT {
                return Err(PromptError::DemoSampling(format!(
                    "no distinct sequence of length {} in pool {}",
                    test_seq.length(),
                    pool.name()
                )));
            }
            let length = demo_length(test_query, test_seq.length(), pool, stream);
            let candidate = pool.sample_sequence(length, stream)?;
            let key = multiset_key(&candidate);
            if !used.contains(&key) {
                used.push(key);
                break candidate;
            }
        };
        let query = resample_query(test_query, &sequence, stream)?;
        let answer = gold_answer(&sequence, &query)?;
        demos.push(RetrievalDemo {
            sequence,
            query,
            answer,
        });
    }
    Ok(demos)
}

fn multiset_key(seq: &Sequence) -> Vec<String> {
    let mut texts: Vec<String> = seq.texts().into_iter().map(str::to_string).collect();
    texts.sort();
    texts
}

/// Counting demonstrations vary the length so the demo answers do not give
/// the test answer away; retrieval demonstrations keep the test length.
fn demo_length(query: &IndexQuery, test_len: u32, pool: &ItemPool, stream: &mut Stream) -> u32 {
    if query.kind() != QueryKind::Counting {
        return test_len;
    }
    let lo = test_len.saturating_sub(3).max(2).min(pool.size());
    let hi = (test_len + 3).min(pool.size());
    loop {
        let length = stream.random_range(lo..=hi);
        if length != test_len || lo == hi {
            return length;
        }
    }
}

/// Same task coordinates, fresh anchor position and offset.
fn resample_query(
    template: &IndexQuery,
    seq: &Sequence,
    stream: &mut Stream,
) -> Result<IndexQuery, PromptError> {
    let length = seq.length();
    match template {
        IndexQuery::Counting => Ok(IndexQuery::Counting),
        IndexQuery::PositionToItem {
            anchor, direction, ..
        }
        | IndexQuery::ItemToPosition {
            anchor, direction, ..
        } => {
            let anchor = resample_anchor(*anchor, *direction, length, stream)?;
            let offsets = valid_offsets(anchor, *direction, length);
            let offset = *offsets
                .choose(stream)
                .expect("resampled anchor admits at least one offset");
            if template.kind() == QueryKind::PositionToItem {
                Ok(IndexQuery::PositionToItem {
                    anchor,
                    direction: *direction,
                    offset,
                })
            } else {
                let position = resolve_position(anchor, *direction, offset, length)?;
                let target = seq.at(position).expect("resolved in range").clone();
                Ok(IndexQuery::ItemToPosition {
                    anchor,
                    direction: *direction,
                    offset,
                    target,
                })
            }
        }
    }
}

fn resample_anchor(
    anchor: Anchor,
    direction: Direction,
    length: u32,
    stream: &mut Stream,
) -> Result<Anchor, PromptError> {
    match anchor {
        Anchor::Endpoint => Ok(Anchor::Endpoint),
        Anchor::Relative(_) => {
            let candidates: Vec<u32> = (1..=length)
                .filter(|&r| !valid_offsets(Anchor::Relative(r), direction, length).is_empty())
                .collect();
            candidates
                .choose(stream)
                .map(|&r| Anchor::Relative(r))
                .ok_or_else(|| {
                    PromptError::DemoSampling(format!(
                        "no relative anchor admits offsets at length {length}"
                    ))
                })
        }
    }
}

/// Renders one user turn: intro sentence, question, answer instruction,
/// blank line, then the formatted list.
pub fn render_user_turn(
    seq: &Sequence,
    query: &IndexQuery,
    variant: &PromptVariant,
) -> Result<String, PromptError> {
    let question = question_text(seq, query, variant)?;
    let instruction = variant
        .answer_instruction
        .clone()
        .unwrap_or_else(|| default_instruction(seq, query, variant));
    let intro = if variant.list_format == ListFormat::CodeBlock {
        "Below is a code snippet.".to_string()
    } else {
        format!("Below is a sequence of {}s.", noun(seq, variant))
    };
    Ok(format!(
        "{intro} {question}\n{instruction}\n\n{}",
        render_list(seq, variant.list_format)
    ))
}

fn noun(seq: &Sequence, variant: &PromptVariant) -> &'static str {
    if variant.list_format == ListFormat::CodeBlock {
        "line"
    } else {
        seq.items()[0].kind.noun()
    }
}

fn default_instruction(seq: &Sequence, query: &IndexQuery, variant: &PromptVariant) -> String {
    match query.kind() {
        QueryKind::PositionToItem => format!(
            "Respond with ONLY that single {}, nothing else.",
            noun(seq, variant)
        ),
        QueryKind::ItemToPosition => "Respond with ONLY the position number, nothing else.".into(),
        QueryKind::Counting => "Respond with ONLY the number of items, nothing else.".into(),
    }
}

fn question_text(
    seq: &Sequence,
    query: &IndexQuery,
    variant: &PromptVariant,
) -> Result<String, PromptError> {
    let noun = noun(seq, variant);
    match query {
        IndexQuery::Counting => Ok("How many items are in the sequence?".to_string()),
        IndexQuery::PositionToItem {
            anchor,
            direction,
            offset,
        } => match (anchor, variant.phrasing) {
            (Anchor::Endpoint, Phrasing::SecondToLastStyle) => Ok(format!(
                "What is the {} {noun}?",
                from_end_phrase(*offset)
            )),
            (Anchor::Endpoint, _) => Ok(format!(
                "What is the {noun} at the {}?",
                render_ordinal(*offset, *direction)
            )),
            (Anchor::Relative(r), _) => {
                let anchor_item = anchor_text(seq, *r)?;
                Ok(format!(
                    "What {noun} is {} position{} {} {anchor_item}?",
                    number_words(*offset),
                    plural(*offset),
                    before_after(*direction),
                ))
            }
        },
        IndexQuery::ItemToPosition {
            anchor,
            direction,
            target,
            ..
        } => match anchor {
            Anchor::Endpoint => Ok(format!(
                "At what position from the {} is the {noun} {}?",
                endpoint_name(*direction),
                item_ref(target)
            )),
            Anchor::Relative(r) => {
                let anchor_item = anchor_text(seq, *r)?;
                Ok(format!(
                    "How many positions {} {anchor_item} is the {noun} {}?",
                    before_after(*direction),
                    item_ref(target)
                ))
            }
        },
    }
}

/// Renders a question that refers to a structure already present in the
/// conversation ("In the numbered list above, ...") instead of repeating it.
pub fn render_followup_turn(
    seq: &Sequence,
    query: &IndexQuery,
    variant: &PromptVariant,
    context_phrase: &str,
) -> Result<String, PromptError> {
    check_compatibility(query, variant)?;
    let question = question_text(seq, query, variant)?;
    let mut chars = question.chars();
    let lowered = match chars.next() {
        Some(first) => format!("{}{}", first.to_lowercase(), chars.as_str()),
        None => question,
    };
    let instruction = variant
        .answer_instruction
        .clone()
        .unwrap_or_else(|| default_instruction(seq, query, variant));
    Ok(format!("In the {context_phrase} above, {lowered}\n{instruction}"))
}

fn anchor_text(seq: &Sequence, r: u32) -> Result<String, PromptError> {
    seq.at(r)
        .map(item_ref)
        .ok_or(PromptError::Task(TaskError::InvalidAnchor {
            r,
            length: seq.length(),
        }))
}

/// Code lines are quoted in backticks when referenced inside a question.
fn item_ref(item: &Item) -> String {
    match item.kind {
        ItemKind::CodeLine => format!("`{}`", item.text.trim()),
        _ => item.text.clone(),
    }
}

fn endpoint_name(direction: Direction) -> &'static str {
    match direction {
        Direction::Forward => "beginning",
        Direction::Backward => "end",
    }
}

fn before_after(direction: Direction) -> &'static str {
    match direction {
        Direction::Forward => "after",
        Direction::Backward => "before",
    }
}

fn plural(n: u32) -> &'static str {
    if n == 1 {
        ""
    } else {
        "s"
    }
}

/// "3rd position from the beginning", "2nd position from the end".
pub fn render_ordinal(n: u32, direction: Direction) -> String {
    format!(
        "{n}{} position from the {}",
        ordinal_suffix(n),
        endpoint_name(direction)
    )
}

fn ordinal_suffix(n: u32) -> &'static str {
    match n % 100 {
        11..=13 => "th",
        _ => match n % 10 {
            1 => "st",
            2 => "nd",
            3 => "rd",
            _ => "th",
        },
    }
}

/// "last", "second-to-last", "third-to-last", "4th-to-last", ...
fn from_end_phrase(n: u32) -> String {
    match n {
        1 => "last".to_string(),
        2 => "second-to-last".to_string(),
        3 => "third-to-last".to_string(),
        _ => format!("{n}{}-to-last", ordinal_suffix(n)),
    }
}

/// English number words for offsets in relational phrasing, so a rendered
/// offset can never collide with a numeric item or a numeric gold answer.
pub fn number_words(n: u32) -> String {
    const ONES: [&str; 20] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
        "eighteen", "nineteen",
    ];
    const TENS: [&str; 10] = [
        "", "", "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
    ];
    match n {
        0..=19 => ONES[n as usize].to_string(),
        20..=99 if n.is_multiple_of(10) => TENS[(n / 10) as usize].to_string(),
        20..=99 => format!("{}-{}", TENS[(n / 10) as usize], ONES[(n % 10) as usize]),
        _ => n.to_string(),
    }
}

/// Renders a sequence in the requested list format.
pub fn render_list(seq: &Sequence, format: ListFormat) -> String {
    match format {
        ListFormat::CommaLine => format!("{}.", seq.texts().join(", ")),
        ListFormat::BulletList => seq
            .texts()
            .iter()
            .map(|t| format!("- {t}"))
            .collect::<Vec<_>>()
            .join("\n"),
        ListFormat::NumberedList => seq
            .texts()
            .iter()
            .enumerate()
            .map(|(i, t)| format!("{}. {t}", i + 1))
            .collect::<Vec<_>>()
            .join("\n"),
        ListFormat::CodeBlock => format!("```\n{}\n```", seq.texts().join("\n")),
    }
}

/// Renders a PyIndex case into the same three-shot chat shape. Demo cases
/// must share the test case's category.
pub fn render_pyindex_prompt(case: &PyIndexCase, demos: &[PyIndexCase]) -> PromptInstance {
    let mut messages = Vec::with_capacity(demos.len() * 2 + 1);
    for demo in demos {
        messages.push(ChatMessage::user(pyindex_user_turn(demo)));
        messages.push(ChatMessage::assistant(demo.gold.to_string()));
    }
    messages.push(ChatMessage::user(pyindex_user_turn(case)));
    let condition = Condition {
        task: TaskLabel::PyIndex(case.category),
        anchor: None,
        direction: None,
        item_kind: ItemKind::Generic,
        length: case.values.len() as u32,
        variant: "pyindex".to_string(),
    };
    PromptInstance {
        messages,
        payload: PromptPayload::PyIndex {
            case: case.clone(),
            demos: demos.to_vec(),
        },
        expected: ExpectedAnswer::Integer(case.gold),
        condition,
        seed_coords: SeedCoords {
            seed: case.seed,
            sequence_index: case.case_index as u64,
            query_index: 0,
        },
    }
}

fn pyindex_user_turn(case: &PyIndexCase) -> String {
    format!(
        "Below is a Python snippet. What value does the final expression evaluate to?\n\
         Respond with ONLY the resulting integer, nothing else.\n\n```python\n{}\n```",
        case.source_text
    )
}
