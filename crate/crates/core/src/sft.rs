//! Answer-span SFT export.
//!
//! Training examples serialize as newline-delimited JSON with byte-offset
//! answer spans into the final assistant turn, so an external trainer can
//! apply supervision only to answer tokens (any tokenizer that reports
//! character offsets can lift the byte mask to a token mask). Every record
//! is validated before it ships: a span that does not slice the recorded
//! answer aborts the export.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::TrainingExample;
use crate::prompting::{Condition, Role};

#[derive(Debug, Error)]
pub enum SftError {
    #[error(
        "span mismatch in record {index}: span {span:?} slices {sliced:?}, answer is {answer:?}"
    )]
    SpanMismatch {
        index: usize,
        span: (usize, usize),
        sliced: Option<String>,
        answer: String,
    },
    #[error("record {index} has no assistant turn to supervise")]
    NoTarget { index: usize },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
}

/// One exported line: chat turns plus the supervised span.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftRecord {
    pub messages: Vec<crate::prompting::ChatMessage>,
    pub answer_span: (usize, usize),
    pub condition: Condition,
    pub provenance: String,
}

impl SftRecord {
    /// The supervised target text: the final assistant turn.
    pub fn target_text(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::Assistant)
            .map(|m| m.content.as_str())
    }

    /// The answer substring the span selects.
    pub fn answer_text(&self) -> Option<&str> {
        self.target_text()?
            .get(self.answer_span.0..self.answer_span.1)
    }

    /// Character-level mask over the target text: 1 on answer bytes.
    pub fn char_mask(&self) -> Option<Vec<u8>> {
        let target = self.target_text()?;
        let mut mask = vec![0u8; target.len()];
        mask.get_mut(self.answer_span.0..self.answer_span.1)?
            .fill(1);
        Some(mask)
    }
}

/// Per-cell counts in the export manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestCell {
    pub task: String,
    pub anchor: String,
    pub direction: String,
    pub source: String,
    pub count: u64,
}

/// Export summary written alongside the data file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SftManifest {
    pub total: u64,
    pub seed: Option<u64>,
    pub counts: Vec<ManifestCell>,
}

fn validate(example: &TrainingExample, index: usize) -> Result<(), SftError> {
    let last = example
        .messages
        .last()
        .filter(|m| m.role == Role::Assistant)
        .ok_or(SftError::NoTarget { index })?;
    let sliced = last
        .content
        .get(example.answer_span.0..example.answer_span.1);
    if sliced != Some(example.answer_text.as_str()) {
        return Err(SftError::SpanMismatch {
            index,
            span: example.answer_span,
            sliced: sliced.map(str::to_string),
            answer: example.answer_text.clone(),
        });
    }
    Ok(())
}

/// Exports training examples to `data_path` (newline-delimited JSON) and a
/// manifest to `manifest_path`.
///
/// Every example is validated first; a corrupt span aborts the export and
/// removes the partial file, so bad masks never ship. Re-export of the same
/// inputs is byte-identical.
pub fn export(
    examples: impl IntoIterator<Item = TrainingExample>,
    data_path: &Path,
    manifest_path: &Path,
    seed: Option<u64>,
) -> Result<SftManifest, SftError> {
    if let Some(parent) = data_path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let tmp_path = data_path.with_extension("jsonl.tmp");
    let result = write_records(examples, &tmp_path, seed);
    match result {
        Ok(manifest) => {
            std::fs::rename(&tmp_path, data_path)?;
            let manifest_bytes = serde_json::to_vec_pretty(&manifest)?;
            std::fs::write(manifest_path, manifest_bytes)?;
            Ok(manifest)
        }
        Err(error) => {
            let _ = std::fs::remove_file(&tmp_path);
            Err(error)
        }
    }
}

fn write_records(
    examples: impl IntoIterator<Item = TrainingExample>,
    path: &Path,
    seed: Option<u64>,
) -> Result<SftManifest, SftError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    let mut counts: BTreeMap<(String, String, String, String), u64> = BTreeMap::new();
    let mut total = 0u64;

    for (index, example) in examples.into_iter().enumerate() {
        validate(&example, index)?;
        let record = SftRecord {
            messages: example.messages,
            answer_span: example.answer_span,
            condition: example.condition,
            provenance: example.provenance,
        };
        let key = (
            record.condition.task.to_string(),
            record
                .condition
                .anchor
                .map(|a| a.label().to_string())
                .unwrap_or_else(|| "-".to_string()),
            record
                .condition
                .direction
                .map(|d| d.label().to_string())
                .unwrap_or_else(|| "-".to_string()),
            source_of(&record.provenance),
        );
        *counts.entry(key).or_insert(0) += 1;
        total += 1;
        serde_json::to_writer(&mut writer, &record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;

    Ok(SftManifest {
        total,
        seed,
        counts: counts
            .into_iter()
            .map(|((task, anchor, direction, source), count)| ManifestCell {
                task,
                anchor,
                direction,
                source,
                count,
            })
            .collect(),
    })
}

/// The manifest source is the provenance prefix ("adapted:doc-3" counts
/// under "adapted").
fn source_of(provenance: &str) -> String {
    provenance
        .split(':')
        .next()
        .unwrap_or(provenance)
        .to_string()
}

/// Reads back an exported file.
pub fn read_sft(path: &Path) -> Result<Vec<SftRecord>, SftError> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|line| serde_json::from_str(line).map_err(SftError::Serde))
        .collect()
}
