//! Toolkit for position-based retrieval benchmarks over ordered sequences.
//!
//! The crate covers the full pipeline: the index-operator family and its
//! gold-answer resolution ([`tasks`]), deterministic sequence sampling from
//! item pools ([`seqgen`]), few-shot prompt rendering ([`prompting`]), the
//! evaluation condition grid ([`evalplan`]), corpus adaptation into a
//! training mixture ([`corpus`]), the PyIndex list-indexing benchmark with
//! its interpreter ([`pyindex`]), a chat-completion evaluation runner with
//! caching and mock backends ([`runner`]), response parsing and report
//! building ([`scoring`]), and answer-span SFT export ([`sft`]).

pub mod corpus;
pub mod evalplan;
pub mod prompting;
pub mod pyindex;
pub mod rng;
pub mod runner;
pub mod scoring;
pub mod seqgen;
pub mod sft;
pub mod tasks;

pub use prompting::{ChatMessage, Condition, PromptInstance, PromptVariant, Role};
pub use seqgen::{GenSpec, ItemPool, PoolName};
pub use tasks::{Anchor, Direction, GoldAnswer, IndexQuery, Item, ItemKind, QueryKind, Sequence};
