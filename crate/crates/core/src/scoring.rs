//! Response parsing and report building.
//!
//! Responses are normalized (code fences, surrounding quotes, and backticks
//! stripped), mapped into the trial's answer space, and scored by exact
//! match. Item responses resolve to the candidate whose first whole-token
//! occurrence is earliest; position, count, and PyIndex responses take the
//! first integer in the text.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompting::TaskLabel;
use crate::runner::TrialRecord;
use crate::tasks::{AnchorKind, Direction, Item, ItemKind, QueryKind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("subset of trials is empty")]
    EmptySubset,
    #[error("trials mix conditions: {0}")]
    MixedConditions(String),
    #[error("missing direction: no task pair covers both forward and backward")]
    MissingDirection,
}

/// A response mapped into an answer space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParsedAnswer {
    Item(Item),
    Integer(i64),
    Unparseable,
}

/// Strips formatting artifacts: outer code fences, surrounding quote pairs,
/// and backticks, then trims whitespace.
pub fn normalize_response(raw: &str) -> String {
    let mut text = raw.trim().to_string();
    // A fenced response keeps only the fence body (language tag dropped).
    // Single-line triple backticks fall through to wrapper stripping.
    if text.starts_with("```") && text.contains('\n') {
        let body: Vec<&str> = text.lines().collect();
        let last_fence = body.iter().rposition(|l| l.trim() == "```");
        let inner: Vec<&str> = match last_fence {
            Some(end) if end > 0 => body[1..end].to_vec(),
            _ => body[1..].to_vec(),
        };
        text = inner.join("\n").trim().to_string();
    }
    loop {
        let stripped = strip_wrappers(&text);
        if stripped == text {
            break;
        }
        text = stripped;
    }
    text
}

fn strip_wrappers(text: &str) -> String {
    let t = text.trim();
    for (open, close) in [('"', '"'), ('\'', '\''), ('`', '`')] {
        if t.len() >= 2 && t.starts_with(open) && t.ends_with(close) {
            return t[open.len_utf8()..t.len() - close.len_utf8()].trim().to_string();
        }
    }
    t.to_string()
}

/// Maps an item-retrieval response to the earliest whole-token candidate
/// occurrence.
///
/// Word and generic candidates match case-insensitively; letter candidates
/// match exactly, except that a response that is a single character after
/// normalization is uppercased first. Code-line candidates match by
/// whole-response or whole-line equality, falling back to the earliest
/// substring occurrence.
pub fn parse_item_response(raw: &str, candidates: &[Item]) -> ParsedAnswer {
    if candidates.is_empty() {
        return ParsedAnswer::Unparseable;
    }
    let mut text = normalize_response(raw);
    let kind = candidates[0].kind;
    if kind == ItemKind::Letter && text.chars().count() == 1 {
        text = text.to_uppercase();
    }

    if kind == ItemKind::CodeLine {
        return parse_code_line_response(&text, candidates);
    }

    let tokens = tokenize(&text);
    let mut best: Option<(usize, &Item)> = None;
    for candidate in candidates {
        let hit = tokens.iter().find(|(_, token)| match kind {
            ItemKind::Letter => *token == candidate.text,
            _ => token.eq_ignore_ascii_case(&candidate.text),
        });
        if let Some((pos, _)) = hit {
            if best.is_none_or(|(b, _)| *pos < b) {
                best = Some((*pos, candidate));
            }
        }
    }
    match best {
        Some((_, item)) => ParsedAnswer::Item(item.clone()),
        None => ParsedAnswer::Unparseable,
    }
}

fn parse_code_line_response(text: &str, candidates: &[Item]) -> ParsedAnswer {
    for candidate in candidates {
        if text.trim() == candidate.text.trim() {
            return ParsedAnswer::Item(candidate.clone());
        }
    }
    for line in text.lines() {
        for candidate in candidates {
            if line.trim() == candidate.text.trim() {
                return ParsedAnswer::Item(candidate.clone());
            }
        }
    }
    let mut best: Option<(usize, &Item)> = None;
    for candidate in candidates {
        if let Some(pos) = text.find(candidate.text.trim()) {
            if best.is_none_or(|(b, _)| pos < b) {
                best = Some((pos, candidate));
            }
        }
    }
    match best {
        Some((_, item)) => ParsedAnswer::Item(item.clone()),
        None => ParsedAnswer::Unparseable,
    }
}

/// Byte offset and text of each maximal alphanumeric run.
fn tokenize(text: &str) -> Vec<(usize, &str)> {
    let mut tokens = Vec::new();
    let mut start: Option<usize> = None;
    for (i, c) in text.char_indices() {
        if c.is_alphanumeric() {
            if start.is_none() {
                start = Some(i);
            }
        } else if let Some(s) = start.take() {
            tokens.push((s, &text[s..i]));
        }
    }
    if let Some(s) = start {
        tokens.push((s, &text[s..]));
    }
    tokens
}

/// Takes the first maximal decimal digit run as the integer answer
/// ("the 4th position" parses to 4).
pub fn parse_integer_response(raw: &str) -> ParsedAnswer {
    let text = normalize_response(raw);
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            return match text[start..i].parse::<i64>() {
                Ok(v) => ParsedAnswer::Integer(v),
                Err(_) => ParsedAnswer::Unparseable,
            };
        }
        i += 1;
    }
    ParsedAnswer::Unparseable
}

/// Exact-match accuracy over a subset of trials.
pub fn accuracy<'a>(
    trials: impl IntoIterator<Item = &'a TrialRecord>,
) -> Result<f64, ScoreError> {
    let mut total = 0usize;
    let mut correct = 0usize;
    for trial in trials {
        total += 1;
        if trial.correct {
            correct += 1;
        }
    }
    if total == 0 {
        return Err(ScoreError::EmptySubset);
    }
    Ok(correct as f64 / total as f64)
}

/// Accuracy over the trials satisfying a predicate.
pub fn accuracy_where(
    trials: &[TrialRecord],
    predicate: impl Fn(&TrialRecord) -> bool,
) -> Result<f64, ScoreError> {
    accuracy(trials.iter().filter(|t| predicate(t)))
}

/// An answered-value column: a numeric bin or the unparseable bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerBin {
    Value(i64),
    Unparseable,
}

impl std::fmt::Display for AnswerBin {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AnswerBin::Value(v) => write!(f, "{v}"),
            AnswerBin::Unparseable => write!(f, "unparseable"),
        }
    }
}

/// Row-normalized confusion of queried vs answered value bins.
///
/// Rows are queried bins (length for counting, absolute position for
/// position→item, offset for item→position, gold value for PyIndex);
/// columns are answered bins plus an unparseable bucket. Backward tasks
/// order axes by decreasing absolute position so correct answers stay on
/// the diagonal.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub task: TaskLabel,
    pub direction: Option<Direction>,
    pub queried_bins: Vec<i64>,
    pub answered_bins: Vec<AnswerBin>,
    /// counts[row][col]
    pub counts: Vec<Vec<u64>>,
    /// Row-normalized percentages; rows with trials sum to 100.
    pub row_pct: Vec<Vec<f64>>,
    /// True when axes are ordered by decreasing absolute position.
    pub descending_axes: bool,
}

/// The queried bin of a trial, per the row conventions above.
pub fn queried_bin(trial: &TrialRecord) -> i64 {
    match trial.condition.task {
        TaskLabel::Counting => trial.condition.length as i64,
        TaskLabel::PositionToItem => {
            absolute_position(trial).expect("position-to-item trials carry offsets") as i64
        }
        TaskLabel::ItemToPosition => {
            trial.queried_offset.expect("item-to-position trials carry offsets") as i64
        }
        TaskLabel::PyIndex(_) => match trial.expected {
            crate::prompting::ExpectedAnswer::Integer(v) => v,
            _ => unreachable!("pyindex expects integers"),
        },
    }
}

fn absolute_position(trial: &TrialRecord) -> Option<u32> {
    let n = trial.queried_offset?;
    let length = trial.condition.length;
    match (trial.condition.anchor, trial.condition.direction) {
        (Some(AnchorKind::Endpoint), Some(Direction::Forward)) => Some(n),
        (Some(AnchorKind::Endpoint), Some(Direction::Backward)) => Some(length - n + 1),
        (Some(AnchorKind::Relative), Some(Direction::Forward)) => {
            trial.anchor_position.map(|r| r + n)
        }
        (Some(AnchorKind::Relative), Some(Direction::Backward)) => {
            trial.anchor_position.map(|r| r - n)
        }
        _ => None,
    }
}

/// The answered bin of a trial: answered absolute position for
/// position→item, parsed integer otherwise.
pub fn answered_bin(trial: &TrialRecord) -> AnswerBin {
    match trial.condition.task {
        TaskLabel::PositionToItem => match trial.answered_position {
            Some(p) => AnswerBin::Value(p as i64),
            None => AnswerBin::Unparseable,
        },
        _ => match trial.parsed {
            ParsedAnswer::Integer(v) => AnswerBin::Value(v),
            _ => AnswerBin::Unparseable,
        },
    }
}

/// Builds the confusion matrix for trials of one (task, anchor, direction).
pub fn confusion(trials: &[TrialRecord]) -> Result<ConfusionMatrix, ScoreError> {
    if trials.is_empty() {
        return Err(ScoreError::EmptySubset);
    }
    let first = &trials[0].condition;
    for trial in trials {
        let c = &trial.condition;
        if c.task != first.task || c.anchor != first.anchor || c.direction != first.direction {
            return Err(ScoreError::MixedConditions(format!(
                "{} vs {}",
                c.id(),
                first.id()
            )));
        }
    }

    let mut queried: Vec<i64> = trials.iter().map(queried_bin).collect();
    queried.sort_unstable();
    queried.dedup();
    let mut answered: Vec<i64> = trials
        .iter()
        .filter_map(|t| match answered_bin(t) {
            AnswerBin::Value(v) => Some(v),
            AnswerBin::Unparseable => None,
        })
        .collect();
    // Columns cover the queried range too, so the diagonal is complete.
    answered.extend(&queried);
    answered.sort_unstable();
    answered.dedup();

    // Backward position→item bins are absolute positions; decreasing order
    // keeps correct answers on the diagonal.
    let descending_axes = first.direction == Some(Direction::Backward);
    if descending_axes && first.task == TaskLabel::PositionToItem {
        queried.reverse();
        answered.reverse();
    }

    let has_unparseable = trials
        .iter()
        .any(|t| answered_bin(t) == AnswerBin::Unparseable);
    let mut answered_bins: Vec<AnswerBin> =
        answered.iter().map(|&v| AnswerBin::Value(v)).collect();
    if has_unparseable {
        answered_bins.push(AnswerBin::Unparseable);
    }

    let row_of: std::collections::HashMap<i64, usize> =
        queried.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let col_of: std::collections::HashMap<AnswerBin, usize> = answered_bins
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();

    let mut counts = vec![vec![0u64; answered_bins.len()]; queried.len()];
    for trial in trials {
        let row = row_of[&queried_bin(trial)];
        let col = col_of[&answered_bin(trial)];
        counts[row][col] += 1;
    }
    let row_pct = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            row.iter()
                .map(|&c| {
                    if total == 0 {
                        0.0
                    } else {
                        100.0 * c as f64 / total as f64
                    }
                })
                .collect()
        })
        .collect();

    Ok(ConfusionMatrix {
        task: first.task,
        direction: first.direction,
        queried_bins: queried,
        answered_bins,
        counts,
        row_pct,
        descending_axes,
    })
}

impl ConfusionMatrix {
    /// Plot-ready long-format CSV: one row per cell.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("queried,answered,count,row_pct\n");
        for (i, &q) in self.queried_bins.iter().enumerate() {
            for (j, a) in self.answered_bins.iter().enumerate() {
                out.push_str(&format!(
                    "{q},{a},{},{:.6}\n",
                    self.counts[i][j], self.row_pct[i][j]
                ));
            }
        }
        out
    }

    /// Total probability mass off the diagonal, in percentage points.
    pub fn off_diagonal_pct(&self) -> f64 {
        let mut off = 0.0;
        for (i, &q) in self.queried_bins.iter().enumerate() {
            for (j, a) in self.answered_bins.iter().enumerate() {
                if *a != AnswerBin::Value(q) {
                    off += self.row_pct[i][j];
                }
            }
        }
        off
    }
}

/// Accuracy per queried bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinAccuracy {
    pub bin: i64,
    pub accuracy: f64,
    pub n_trials: usize,
}

/// Per-bin accuracy table for one condition, in display order.
pub fn per_offset_accuracy(trials: &[TrialRecord]) -> Result<Vec<BinAccuracy>, ScoreError> {
    if trials.is_empty() {
        return Err(ScoreError::EmptySubset);
    }
    let mut by_bin: std::collections::BTreeMap<i64, (usize, usize)> =
        std::collections::BTreeMap::new();
    for trial in trials {
        let entry = by_bin.entry(queried_bin(trial)).or_insert((0, 0));
        entry.0 += 1;
        if trial.correct {
            entry.1 += 1;
        }
    }
    Ok(by_bin
        .into_iter()
        .map(|(bin, (n, c))| BinAccuracy {
            bin,
            accuracy: c as f64 / n as f64,
            n_trials: n,
        })
        .collect())
}

/// Renders a per-position accuracy table as CSV.
pub fn accuracy_csv(rows: &[BinAccuracy]) -> String {
    let mut out = String::from("position,accuracy,n_trials\n");
    for row in rows {
        out.push_str(&format!(
            "{},{:.6},{}\n",
            row.bin, row.accuracy, row.n_trials
        ));
    }
    out
}

/// Summary for one condition: unweighted mean and SD across per-position
/// accuracies, plus the trial-weighted overall accuracy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionSummary {
    pub condition: String,
    pub mean: f64,
    pub sd: f64,
    pub overall: f64,
    pub n_trials: usize,
}

/// Forward minus backward accuracy for one task pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryEntry {
    pub task: TaskLabel,
    pub anchor: Option<AnchorKind>,
    pub item_kind: ItemKind,
    pub length: u32,
    pub forward_mean: f64,
    pub forward_sd: f64,
    pub backward_mean: f64,
    pub backward_sd: f64,
    pub asymmetry: f64,
}

/// The full accuracy report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub overall_accuracy: f64,
    pub n_trials: usize,
    pub per_offset: Vec<BinAccuracy>,
    pub per_condition: Vec<ConditionSummary>,
    pub asymmetry: Vec<AsymmetryEntry>,
}

fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn condition_stats(trials: &[TrialRecord]) -> Result<ConditionSummary, ScoreError> {
    let per_offset = per_offset_accuracy(trials)?;
    let accs: Vec<f64> = per_offset.iter().map(|b| b.accuracy).collect();
    let (mean, sd) = mean_sd(&accs);
    Ok(ConditionSummary {
        condition: trials[0].condition.id(),
        mean,
        sd,
        overall: accuracy(trials.iter())?,
        n_trials: trials.len(),
    })
}

/// Builds the accuracy report with forward/backward asymmetries.
///
/// Task pairs share (task, anchor, item kind, length) and differ only in
/// direction; means follow the per-position convention (unweighted across
/// queried positions, SD across those per-position accuracies).
pub fn asymmetry_report(trials: &[TrialRecord]) -> Result<AccuracyReport, ScoreError> {
    if trials.is_empty() {
        return Err(ScoreError::EmptySubset);
    }
    type PairKey = (TaskLabel, Option<AnchorKind>, ItemKind, u32);
    let mut groups: std::collections::BTreeMap<(PairKey, Option<Direction>), Vec<&TrialRecord>> =
        std::collections::BTreeMap::new();
    for trial in trials {
        let c = &trial.condition;
        let key = ((c.task, c.anchor, c.item_kind, c.length), c.direction);
        groups.entry(key).or_default().push(trial);
    }

    let mut per_condition = Vec::new();
    let mut stats: std::collections::BTreeMap<(PairKey, Direction), (f64, f64)> =
        std::collections::BTreeMap::new();
    for ((pair, direction), group) in &groups {
        let owned: Vec<TrialRecord> = group.iter().map(|t| (*t).clone()).collect();
        let summary = condition_stats(&owned)?;
        if let Some(direction) = direction {
            stats.insert((*pair, *direction), (summary.mean, summary.sd));
        }
        per_condition.push(summary);
    }

    let mut asymmetry = Vec::new();
    let pairs: std::collections::BTreeSet<PairKey> =
        stats.keys().map(|(pair, _)| *pair).collect();
    for pair in pairs {
        let forward = stats.get(&(pair, Direction::Forward));
        let backward = stats.get(&(pair, Direction::Backward));
        if let (Some(&(fm, fs)), Some(&(bm, bs))) = (forward, backward) {
            let (task, anchor, item_kind, length) = pair;
            asymmetry.push(AsymmetryEntry {
                task,
                anchor,
                item_kind,
                length,
                forward_mean: fm,
                forward_sd: fs,
                backward_mean: bm,
                backward_sd: bs,
                asymmetry: fm - bm,
            });
        }
    }
    let directed = trials.iter().any(|t| t.condition.direction.is_some());
    if asymmetry.is_empty() && directed {
        return Err(ScoreError::MissingDirection);
    }

    Ok(AccuracyReport {
        overall_accuracy: accuracy(trials.iter())?,
        n_trials: trials.len(),
        per_offset: per_offset_accuracy(trials)?,
        per_condition,
        asymmetry,
    })
}

/// CSV table of the asymmetry entries (Fig-style columns: task, mean, sd).
pub fn asymmetry_csv(report: &AccuracyReport) -> String {
    let mut out = String::from(
        "task,anchor,item_kind,length,forward_mean,forward_sd,backward_mean,backward_sd,asymmetry\n",
    );
    for e in &report.asymmetry {
        out.push_str(&format!(
            "{},{},{:?},{},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
            e.task,
            e.anchor.map(|a| a.label()).unwrap_or("-"),
            e.item_kind,
            e.length,
            e.forward_mean,
            e.forward_sd,
            e.backward_mean,
            e.backward_sd,
            e.asymmetry
        ));
    }
    out
}

/// True when a parsed answer exactly matches the expected answer.
pub fn matches_expected(parsed: &ParsedAnswer, expected: &crate::prompting::ExpectedAnswer) -> bool {
    match (parsed, expected) {
        (ParsedAnswer::Item(a), crate::prompting::ExpectedAnswer::Item(b)) => a.text == b.text,
        (ParsedAnswer::Integer(a), crate::prompting::ExpectedAnswer::Integer(b)) => a == b,
        _ => false,
    }
}

/// Picks the right parser for a task's answer space.
pub fn parse_for_task(
    kind: Option<QueryKind>,
    raw: &str,
    candidates: Option<&[Item]>,
) -> ParsedAnswer {
    match kind {
        Some(QueryKind::PositionToItem) => {
            parse_item_response(raw, candidates.unwrap_or(&[]))
        }
        _ => parse_integer_response(raw),
    }
}
