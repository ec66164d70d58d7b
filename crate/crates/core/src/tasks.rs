//! The index-operator family over ordered sequences.
//!
//! A query addresses a sequence item through an anchor (a sequence endpoint
//! or another item at position `r`), a direction, and a positive offset `n`:
//!
//! | anchor, direction    | resolved 1-based index |
//! |----------------------|------------------------|
//! | endpoint, forward    | `n`                    |
//! | endpoint, backward   | `L - n + 1`            |
//! | relative(r), forward | `r + n`                |
//! | relative(r), backward| `r - n`                |
//!
//! Position→item queries return the item at the resolved index; item→position
//! queries invert the same operator and return the offset; counting queries
//! return the sequence length.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum TaskError {
    #[error("resolved index {resolved} out of range for length {length}")]
    OutOfRange { resolved: i64, length: u32 },
    #[error("relative anchor position {r} invalid for length {length}")]
    InvalidAnchor { r: u32, length: u32 },
    #[error("target item {0:?} not found in sequence")]
    TargetNotFound(String),
    #[error("item text must be non-empty")]
    EmptyItem,
    #[error("letter items must be a single uppercase A-Z character, got {0:?}")]
    NotALetter(String),
    #[error("sequence must contain at least one item")]
    EmptySequence,
    #[error("sequence items must be pairwise distinct; duplicate {0:?}")]
    DuplicateItem(String),
    #[error("only position-to-item queries can be inverted")]
    NotInvertible,
    #[error("query kind {0:?} carries no offset")]
    NoOffset(QueryKind),
}

/// What a sequence element is made of; drives prompt wording and parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Letter,
    Word,
    CodeLine,
    Generic,
}

impl ItemKind {
    /// Noun used in questions ("What is the second-to-last letter?").
    pub fn noun(&self) -> &'static str {
        match self {
            ItemKind::Letter => "letter",
            ItemKind::Word => "word",
            ItemKind::CodeLine => "line",
            ItemKind::Generic => "item",
        }
    }
}

/// One sequence element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Item {
    pub text: String,
    pub kind: ItemKind,
}

impl Item {
    pub fn new(text: impl Into<String>, kind: ItemKind) -> Result<Self, TaskError> {
        let text = text.into();
        if text.is_empty() {
            return Err(TaskError::EmptyItem);
        }
        if kind == ItemKind::Letter
            && !(text.len() == 1 && text.chars().all(|c| c.is_ascii_uppercase()))
        {
            return Err(TaskError::NotALetter(text));
        }
        Ok(Item { text, kind })
    }

    pub fn letter(c: char) -> Self {
        Item::new(c.to_string(), ItemKind::Letter).expect("valid letter")
    }

    pub fn word(text: impl Into<String>) -> Self {
        Item::new(text, ItemKind::Word).expect("non-empty word")
    }

    pub fn code_line(text: impl Into<String>) -> Self {
        Item::new(text, ItemKind::CodeLine).expect("non-empty code line")
    }

    pub fn generic(text: impl Into<String>) -> Self {
        Item::new(text, ItemKind::Generic).expect("non-empty item")
    }
}

/// An ordered sequence of pairwise-distinct items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Item>", into = "Vec<Item>")]
pub struct Sequence {
    items: Vec<Item>,
}

impl Sequence {
    pub fn new(items: Vec<Item>) -> Result<Self, TaskError> {
        if items.is_empty() {
            return Err(TaskError::EmptySequence);
        }
        let mut seen = std::collections::HashSet::new();
        for item in &items {
            if !seen.insert(item.text.as_str()) {
                return Err(TaskError::DuplicateItem(item.text.clone()));
            }
        }
        Ok(Sequence { items })
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn length(&self) -> u32 {
        self.items.len() as u32
    }

    /// 1-based position of an item, by text.
    pub fn position_of(&self, text: &str) -> Option<u32> {
        self.items
            .iter()
            .position(|i| i.text == text)
            .map(|p| p as u32 + 1)
    }

    /// Item at a 1-based position.
    pub fn at(&self, position: u32) -> Option<&Item> {
        if position == 0 {
            return None;
        }
        self.items.get(position as usize - 1)
    }

    /// Item texts, in order. Useful as the candidate set for answer parsing.
    pub fn texts(&self) -> Vec<&str> {
        self.items.iter().map(|i| i.text.as_str()).collect()
    }
}

impl TryFrom<Vec<Item>> for Sequence {
    type Error = TaskError;
    fn try_from(items: Vec<Item>) -> Result<Self, TaskError> {
        Sequence::new(items)
    }
}

impl From<Sequence> for Vec<Item> {
    fn from(seq: Sequence) -> Vec<Item> {
        seq.items
    }
}

/// Where offsets are measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    /// The start (forward) or end (backward) of the sequence.
    Endpoint,
    /// Another item, identified by its 1-based position.
    Relative(u32),
}

impl Anchor {
    pub fn kind(&self) -> AnchorKind {
        match self {
            Anchor::Endpoint => AnchorKind::Endpoint,
            Anchor::Relative(_) => AnchorKind::Relative,
        }
    }
}

/// Anchor variant without the position payload, for condition coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorKind {
    Endpoint,
    Relative,
}

impl AnchorKind {
    pub fn label(&self) -> &'static str {
        match self {
            AnchorKind::Endpoint => "end",
            AnchorKind::Relative => "rel",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn label(&self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Backward => "bwd",
        }
    }
}

/// The three query families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    PositionToItem,
    ItemToPosition,
    Counting,
}

impl QueryKind {
    pub fn label(&self) -> &'static str {
        match self {
            QueryKind::PositionToItem => "p2i",
            QueryKind::ItemToPosition => "i2p",
            QueryKind::Counting => "count",
        }
    }
}

/// A fully specified query over a sequence.
///
/// Counting queries carry no anchor, direction, or offset; item→position
/// queries additionally carry the target item (the offset is the gold
/// answer the generator built the query around).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum IndexQuery {
    PositionToItem {
        anchor: Anchor,
        direction: Direction,
        offset: u32,
    },
    ItemToPosition {
        anchor: Anchor,
        direction: Direction,
        offset: u32,
        target: Item,
    },
    Counting,
}

impl IndexQuery {
    pub fn kind(&self) -> QueryKind {
        match self {
            IndexQuery::PositionToItem { .. } => QueryKind::PositionToItem,
            IndexQuery::ItemToPosition { .. } => QueryKind::ItemToPosition,
            IndexQuery::Counting => QueryKind::Counting,
        }
    }

    pub fn anchor(&self) -> Option<Anchor> {
        match self {
            IndexQuery::PositionToItem { anchor, .. }
            | IndexQuery::ItemToPosition { anchor, .. } => Some(*anchor),
            IndexQuery::Counting => None,
        }
    }

    pub fn direction(&self) -> Option<Direction> {
        match self {
            IndexQuery::PositionToItem { direction, .. }
            | IndexQuery::ItemToPosition { direction, .. } => Some(*direction),
            IndexQuery::Counting => None,
        }
    }

    pub fn offset(&self) -> Option<u32> {
        match self {
            IndexQuery::PositionToItem { offset, .. }
            | IndexQuery::ItemToPosition { offset, .. } => Some(*offset),
            IndexQuery::Counting => None,
        }
    }
}

/// A resolved gold answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GoldAnswer {
    Item(Item),
    Offset(u32),
    Count(u32),
}

impl GoldAnswer {
    /// The canonical answer string a correct response must match.
    pub fn canonical_text(&self) -> String {
        match self {
            GoldAnswer::Item(item) => item.text.clone(),
            GoldAnswer::Offset(n) => n.to_string(),
            GoldAnswer::Count(c) => c.to_string(),
        }
    }
}

/// Resolves `(anchor, direction, n)` to a 1-based absolute index in `[1, L]`.
pub fn resolve_position(
    anchor: Anchor,
    direction: Direction,
    n: u32,
    length: u32,
) -> Result<u32, TaskError> {
    debug_assert!(n >= 1, "offsets are positive");
    if let Anchor::Relative(r) = anchor {
        if r < 1 || r > length {
            return Err(TaskError::InvalidAnchor { r, length });
        }
    }
    let l = i64::from(length);
    let n = i64::from(n);
    let resolved = match (anchor, direction) {
        (Anchor::Endpoint, Direction::Forward) => n,
        (Anchor::Endpoint, Direction::Backward) => l - n + 1,
        (Anchor::Relative(r), Direction::Forward) => i64::from(r) + n,
        (Anchor::Relative(r), Direction::Backward) => i64::from(r) - n,
    };
    if resolved < 1 || resolved > l {
        return Err(TaskError::OutOfRange { resolved, length });
    }
    Ok(resolved as u32)
}

/// Computes the gold answer of a query over a sequence.
pub fn gold_answer(seq: &Sequence, query: &IndexQuery) -> Result<GoldAnswer, TaskError> {
    match query {
        IndexQuery::PositionToItem {
            anchor,
            direction,
            offset,
        } => {
            let position = resolve_position(*anchor, *direction, *offset, seq.length())?;
            Ok(GoldAnswer::Item(seq.at(position).expect("in range").clone()))
        }
        IndexQuery::ItemToPosition {
            anchor,
            direction,
            target,
            ..
        } => {
            let position = seq
                .position_of(&target.text)
                .ok_or_else(|| TaskError::TargetNotFound(target.text.clone()))?;
            let n = invert_offset(*anchor, *direction, position, seq.length())?;
            Ok(GoldAnswer::Offset(n))
        }
        IndexQuery::Counting => Ok(GoldAnswer::Count(seq.length())),
    }
}

/// The offset `n` with `resolve_position(anchor, direction, n, L) == position`.
fn invert_offset(
    anchor: Anchor,
    direction: Direction,
    position: u32,
    length: u32,
) -> Result<u32, TaskError> {
    if let Anchor::Relative(r) = anchor {
        if r < 1 || r > length {
            return Err(TaskError::InvalidAnchor { r, length });
        }
    }
    let p = i64::from(position);
    let n = match (anchor, direction) {
        (Anchor::Endpoint, Direction::Forward) => p,
        (Anchor::Endpoint, Direction::Backward) => i64::from(length) - p + 1,
        (Anchor::Relative(r), Direction::Forward) => p - i64::from(r),
        (Anchor::Relative(r), Direction::Backward) => i64::from(r) - p,
    };
    if n < 1 {
        return Err(TaskError::OutOfRange {
            resolved: n,
            length,
        });
    }
    Ok(n as u32)
}

/// Every offset `n >= 1` for which `resolve_position` succeeds, ascending.
///
/// Endpoint anchors admit `1..=L` in both directions; a relative anchor at
/// `r` admits `1..=L-r` forward and `1..=r-1` backward (possibly empty).
pub fn valid_offsets(anchor: Anchor, direction: Direction, length: u32) -> Vec<u32> {
    let upper = match (anchor, direction) {
        (Anchor::Endpoint, _) => length,
        (Anchor::Relative(r), _) if r < 1 || r > length => 0,
        (Anchor::Relative(r), Direction::Forward) => length - r,
        (Anchor::Relative(r), Direction::Backward) => r - 1,
    };
    (1..=upper).collect()
}

/// Turns a position→item query into the item→position query that asks for
/// its offset back: same anchor and direction, target set to the gold item.
pub fn invert_query(seq: &Sequence, query: &IndexQuery) -> Result<IndexQuery, TaskError> {
    match query {
        IndexQuery::PositionToItem {
            anchor,
            direction,
            offset,
        } => {
            let gold = gold_answer(seq, query)?;
            let GoldAnswer::Item(target) = gold else {
                unreachable!("position-to-item gold is an item");
            };
            Ok(IndexQuery::ItemToPosition {
                anchor: *anchor,
                direction: *direction,
                offset: *offset,
                target,
            })
        }
        _ => Err(TaskError::NotInvertible),
    }
}
