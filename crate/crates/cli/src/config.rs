//! Declarative run configuration: a TOML file plus flag overrides.
//!
//! The seed must be explicit (file or flag); there is no wall-clock
//! default. Every command writes the resolved configuration next to its
//! outputs for provenance.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use poskit_core::corpus::{CorpusFormat, MixtureConfig};
use poskit_core::evalplan::EvalPlan;
use poskit_core::runner::BackendConfig;

/// Raw config file shape. Sections are optional; defaults follow the
/// evaluation protocol.
#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    #[serde(default)]
    pub eval: EvalSection,
    #[serde(default)]
    pub mixture: MixtureSection,
    #[serde(default)]
    pub corpus: CorpusSection,
    pub backend: Option<BackendConfig>,
    #[serde(default)]
    pub pyindex: PyIndexSection,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct EvalSection {
    pub pools: Option<Vec<String>>,
    pub lengths: Option<Vec<u32>>,
    pub anchors: Option<Vec<String>>,
    pub directions: Option<Vec<String>>,
    pub tasks: Option<Vec<String>>,
    pub include_counting: Option<bool>,
    pub sequences_per_condition: Option<u32>,
    pub per_position_trials: Option<u32>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct MixtureSection {
    pub p_forward: Option<f64>,
    pub p_endpoint: Option<f64>,
    pub synthetic: Option<u32>,
    pub code: Option<u32>,
    pub adapted: Option<u32>,
    pub queries_per_structure: Option<u32>,
    pub p_framing: Option<f64>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct CorpusSection {
    #[serde(default)]
    pub code_paths: Vec<PathBuf>,
    #[serde(default)]
    pub adapted_paths: Vec<PathBuf>,
    pub text_field: Option<String>,
    pub turns_field: Option<String>,
    pub source_field: Option<String>,
}

#[derive(Debug, Default, Clone, Serialize, Deserialize)]
pub struct PyIndexSection {
    pub per_category: Option<u32>,
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub seed: u64,
    pub out_dir: PathBuf,
    pub eval: EvalPlan,
    pub mixture: MixtureConfig,
    pub backend: Option<BackendConfig>,
    pub corpus: CorpusSection,
    pub pyindex_per_category: u32,
}

impl FileConfig {
    pub fn load(path: &Path) -> anyhow::Result<FileConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    /// Merges the file with flag overrides. Fails without an explicit seed.
    pub fn resolve(
        &self,
        seed_flag: Option<u64>,
        out_flag: Option<PathBuf>,
    ) -> anyhow::Result<Resolved> {
        let seed = seed_flag
            .or(self.seed)
            .context("seed required: set `seed` in the config or pass --seed")?;
        let out_dir = out_flag
            .or_else(|| self.out_dir.clone())
            .unwrap_or_else(|| PathBuf::from("poskit-out"));

        let mut eval = EvalPlan::with_seed(seed);
        if let Some(pools) = &self.eval.pools {
            eval.pools = pools
                .iter()
                .map(|label| {
                    poskit_core::seqgen::PoolName::parse(label)
                        .with_context(|| format!("unknown pool {label:?}"))
                })
                .collect::<anyhow::Result<_>>()?;
        }
        if let Some(lengths) = &self.eval.lengths {
            eval.lengths = lengths.clone();
        }
        if let Some(anchors) = &self.eval.anchors {
            eval.anchors = anchors
                .iter()
                .map(|label| match label.as_str() {
                    "endpoint" | "end" => Ok(poskit_core::tasks::AnchorKind::Endpoint),
                    "relative" | "rel" => Ok(poskit_core::tasks::AnchorKind::Relative),
                    other => anyhow::bail!("unknown anchor {other:?}"),
                })
                .collect::<anyhow::Result<_>>()?;
        }
        if let Some(directions) = &self.eval.directions {
            eval.directions = directions
                .iter()
                .map(|label| match label.as_str() {
                    "forward" | "fwd" => Ok(poskit_core::tasks::Direction::Forward),
                    "backward" | "bwd" => Ok(poskit_core::tasks::Direction::Backward),
                    other => anyhow::bail!("unknown direction {other:?}"),
                })
                .collect::<anyhow::Result<_>>()?;
        }
        if let Some(tasks) = &self.eval.tasks {
            eval.tasks = tasks
                .iter()
                .map(|label| match label.as_str() {
                    "position_to_item" | "p2i" => Ok(poskit_core::tasks::QueryKind::PositionToItem),
                    "item_to_position" | "i2p" => Ok(poskit_core::tasks::QueryKind::ItemToPosition),
                    other => anyhow::bail!("unknown task {other:?}"),
                })
                .collect::<anyhow::Result<_>>()?;
        }
        if let Some(v) = self.eval.include_counting {
            eval.include_counting = v;
        }
        if let Some(v) = self.eval.sequences_per_condition {
            eval.sequences_per_condition = v;
        }
        eval.per_position_trials = self.eval.per_position_trials;
        for &pool in &eval.pools {
            let size = poskit_core::seqgen::ItemPool::builtin(pool).size();
            for &length in &eval.lengths {
                if length > size {
                    anyhow::bail!(
                        "length {length} exceeds the {} pool ({size} members)",
                        pool.label()
                    );
                }
                if length == 0 {
                    anyhow::bail!("sequence lengths must be at least 1");
                }
            }
        }

        let mut mixture = MixtureConfig {
            seed,
            ..MixtureConfig::default()
        };
        if let Some(v) = self.mixture.p_forward {
            mixture.p_forward = v;
        }
        if let Some(v) = self.mixture.p_endpoint {
            mixture.p_endpoint = v;
        }
        if let Some(v) = self.mixture.synthetic {
            mixture.synthetic = v;
        }
        if let Some(v) = self.mixture.code {
            mixture.code = v;
        }
        if let Some(v) = self.mixture.adapted {
            mixture.adapted = v;
        }
        if let Some(v) = self.mixture.queries_per_structure {
            mixture.queries_per_structure = v;
        }
        if let Some(v) = self.mixture.p_framing {
            mixture.p_framing = v;
        }

        Ok(Resolved {
            seed,
            out_dir,
            eval,
            mixture,
            backend: self.backend.clone(),
            corpus: self.corpus.clone(),
            pyindex_per_category: self.pyindex.per_category.unwrap_or(20),
        })
    }
}

impl Resolved {
    pub fn corpus_format(&self) -> CorpusFormat {
        CorpusFormat {
            text_field: self
                .corpus
                .text_field
                .clone()
                .unwrap_or_else(|| "text".to_string()),
            turns_field: self.corpus.turns_field.clone(),
            source_field: self.corpus.source_field.clone(),
        }
    }

    /// Writes the resolved-config snapshot next to the outputs.
    pub fn write_snapshot(&self) -> anyhow::Result<()> {
        std::fs::create_dir_all(&self.out_dir)?;
        let text = toml::to_string_pretty(self).context("serializing resolved config")?;
        std::fs::write(self.out_dir.join("config.resolved.toml"), text)?;
        Ok(())
    }
}
