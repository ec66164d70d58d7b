//! Deterministic sequence sampling from item pools.
//!
//! Each sequence draws its items uniformly without replacement from a pool.
//! Generation is keyed by `(seed, index)` substreams, so a batch can be
//! produced in any order (or in parallel) without changing its contents.

mod pools;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rng::{lanes, substream, Stream};
use crate::tasks::{Item, ItemKind, Sequence};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("pool {pool} has {available} members, cannot draw {requested} distinct items")]
    PoolTooSmall {
        pool: String,
        requested: u32,
        available: u32,
    },
    #[error("length range [{lo}, {hi}] is empty or zero")]
    BadLengthRange { lo: u32, hi: u32 },
    #[error("pool file {path}: {reason}")]
    BadPoolFile { path: String, reason: String },
}

/// Built-in pool identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PoolName {
    Letters,
    Digits,
    Animals,
    Fruits,
    Cities,
    Elements,
    Languages,
    Instruments,
}

impl PoolName {
    pub const ALL: [PoolName; 8] = [
        PoolName::Letters,
        PoolName::Digits,
        PoolName::Animals,
        PoolName::Fruits,
        PoolName::Cities,
        PoolName::Elements,
        PoolName::Languages,
        PoolName::Instruments,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            PoolName::Letters => "letters",
            PoolName::Digits => "digits",
            PoolName::Animals => "animals",
            PoolName::Fruits => "fruits",
            PoolName::Cities => "cities",
            PoolName::Elements => "elements",
            PoolName::Languages => "languages",
            PoolName::Instruments => "instruments",
        }
    }

    pub fn parse(label: &str) -> Option<PoolName> {
        PoolName::ALL.iter().copied().find(|p| p.label() == label)
    }
}

/// An ordered pool of distinct item strings.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemPool {
    name: String,
    kind: ItemKind,
    members: Vec<String>,
}

impl ItemPool {
    /// A built-in pool.
    pub fn builtin(name: PoolName) -> ItemPool {
        let (kind, members): (ItemKind, Vec<String>) = match name {
            PoolName::Letters => (
                ItemKind::Letter,
                ('A'..='Z').map(|c| c.to_string()).collect(),
            ),
            PoolName::Digits => (ItemKind::Generic, (0..100).map(|d| d.to_string()).collect()),
            PoolName::Animals => (ItemKind::Word, strs(pools::ANIMALS)),
            PoolName::Fruits => (ItemKind::Word, strs(pools::FRUITS)),
            PoolName::Cities => (ItemKind::Word, strs(pools::CITIES)),
            PoolName::Elements => (ItemKind::Word, strs(pools::ELEMENTS)),
            PoolName::Languages => (ItemKind::Word, strs(pools::LANGUAGES)),
            PoolName::Instruments => (ItemKind::Word, strs(pools::INSTRUMENTS)),
        };
        let pool = ItemPool {
            name: name.label().to_string(),
            kind,
            members,
        };
        pool.validate().expect("built-in pools are well-formed");
        pool
    }

    /// Loads a user pool file: UTF-8 text, one member per line, `#` comments
    /// and blank lines ignored.
    pub fn from_file(path: &std::path::Path, kind: ItemKind) -> Result<ItemPool, GenError> {
        let text = std::fs::read_to_string(path).map_err(|e| GenError::BadPoolFile {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        let members: Vec<String> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".to_string());
        let pool = ItemPool {
            name,
            kind,
            members,
        };
        pool.validate().map_err(|reason| GenError::BadPoolFile {
            path: path.display().to_string(),
            reason,
        })?;
        Ok(pool)
    }

    fn validate(&self) -> Result<(), String> {
        if self.members.is_empty() {
            return Err("pool is empty".into());
        }
        let mut seen = std::collections::HashSet::new();
        for m in &self.members {
            if m.is_empty() {
                return Err("pool contains an empty member".into());
            }
            if m.chars().count() > 30 {
                return Err(format!("member {m:?} exceeds 30 characters"));
            }
            if !seen.insert(m.as_str()) {
                return Err(format!("duplicate member {m:?}"));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ItemKind {
        self.kind
    }

    pub fn members(&self) -> &[String] {
        &self.members
    }

    pub fn size(&self) -> u32 {
        self.members.len() as u32
    }

    /// Draws `length` distinct items uniformly without replacement.
    pub fn sample_sequence(&self, length: u32, stream: &mut Stream) -> Result<Sequence, GenError> {
        if length > self.size() || length == 0 {
            return Err(GenError::PoolTooSmall {
                pool: self.name.clone(),
                requested: length,
                available: self.size(),
            });
        }
        // Partial Fisher-Yates over an index vector: the first `length`
        // slots end up a uniform sample without replacement, in draw order.
        let mut indices: Vec<u32> = (0..self.size()).collect();
        let mut items = Vec::with_capacity(length as usize);
        for slot in 0..length as usize {
            let pick = stream.random_range(slot..indices.len());
            indices.swap(slot, pick);
            let text = &self.members[indices[slot] as usize];
            items.push(Item::new(text.clone(), self.kind).expect("pool members are valid items"));
        }
        Ok(Sequence::new(items).expect("sample is distinct and non-empty"))
    }
}

fn strs(raw: &[&str]) -> Vec<String> {
    raw.iter().map(|s| s.to_string()).collect()
}

/// A fixed length or an inclusive range sampled uniformly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum LengthSpec {
    Fixed(u32),
    Range { lo: u32, hi: u32 },
}

impl LengthSpec {
    pub fn draw(&self, stream: &mut Stream) -> Result<u32, GenError> {
        match *self {
            LengthSpec::Fixed(l) if l >= 1 => Ok(l),
            LengthSpec::Fixed(l) => Err(GenError::BadLengthRange { lo: l, hi: l }),
            LengthSpec::Range { lo, hi } if 1 <= lo && lo <= hi => {
                Ok(stream.random_range(lo..=hi))
            }
            LengthSpec::Range { lo, hi } => Err(GenError::BadLengthRange { lo, hi }),
        }
    }

    pub fn max(&self) -> u32 {
        match *self {
            LengthSpec::Fixed(l) => l,
            LengthSpec::Range { hi, .. } => hi,
        }
    }
}

/// A batch-generation request.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenSpec {
    pub pool: PoolName,
    pub length: LengthSpec,
    pub seed: u64,
    pub count: u32,
}

/// Generates `spec.count` sequences, one per `(seed, index)` substream.
pub fn generate_eval_set(spec: &GenSpec) -> Result<Vec<Sequence>, GenError> {
    let pool = ItemPool::builtin(spec.pool);
    if spec.length.max() > pool.size() {
        return Err(GenError::PoolTooSmall {
            pool: pool.name().to_string(),
            requested: spec.length.max(),
            available: pool.size(),
        });
    }
    (0..spec.count)
        .map(|index| {
            let mut stream = substream(spec.seed, lanes::SEQUENCE_GEN, index as u64, 0);
            let length = spec.length.draw(&mut stream)?;
            pool.sample_sequence(length, &mut stream)
        })
        .collect()
}
