//! Evaluation plan: the condition grid and per-condition prompt sets.
//!
//! A condition fixes task, anchor variant, direction, item pool, and
//! sequence length. The default protocol samples 50 independent sequences
//! per condition and instantiates every valid offset for each sequence; a
//! per-position override instead generates a fixed number of trials for
//! each queried position.

use serde::{Deserialize, Serialize};

use crate::prompting::{render_prompt, PromptError, PromptInstance, PromptVariant};
use crate::rng::{lane_of, lanes, substream};
use crate::seqgen::{GenError, ItemPool, PoolName};
use crate::tasks::{
    invert_query, valid_offsets, Anchor, AnchorKind, Direction, IndexQuery, QueryKind, Sequence,
};
use rand::prelude::IndexedRandom;

#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("plan has an empty {0} axis")]
    EmptyAxis(&'static str),
}

/// The full evaluation grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalPlan {
    #[serde(default = "default_pools")]
    pub pools: Vec<PoolName>,
    #[serde(default = "default_lengths")]
    pub lengths: Vec<u32>,
    #[serde(default = "default_anchors")]
    pub anchors: Vec<AnchorKind>,
    #[serde(default = "default_directions")]
    pub directions: Vec<Direction>,
    #[serde(default = "default_tasks")]
    pub tasks: Vec<QueryKind>,
    #[serde(default = "default_true")]
    pub include_counting: bool,
    #[serde(default = "default_sequences")]
    pub sequences_per_condition: u32,
    /// When set, generates this many trials per (condition, position)
    /// instead of instantiating all offsets over the default sequences.
    #[serde(default)]
    pub per_position_trials: Option<u32>,
    pub seed: u64,
}

fn default_pools() -> Vec<PoolName> {
    vec![PoolName::Letters, PoolName::Animals]
}
fn default_lengths() -> Vec<u32> {
    vec![5, 10, 20]
}
fn default_anchors() -> Vec<AnchorKind> {
    vec![AnchorKind::Endpoint, AnchorKind::Relative]
}
fn default_directions() -> Vec<Direction> {
    vec![Direction::Forward, Direction::Backward]
}
fn default_tasks() -> Vec<QueryKind> {
    vec![QueryKind::PositionToItem, QueryKind::ItemToPosition]
}
fn default_true() -> bool {
    true
}
fn default_sequences() -> u32 {
    50
}

impl EvalPlan {
    pub fn with_seed(seed: u64) -> EvalPlan {
        EvalPlan {
            pools: default_pools(),
            lengths: default_lengths(),
            anchors: default_anchors(),
            directions: default_directions(),
            tasks: default_tasks(),
            include_counting: true,
            sequences_per_condition: default_sequences(),
            per_position_trials: None,
            seed,
        }
    }
}

/// One cell of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionSpec {
    pub task: QueryKind,
    /// Absent for counting conditions.
    pub anchor: Option<AnchorKind>,
    pub direction: Option<Direction>,
    pub pool: PoolName,
    pub length: u32,
}

impl ConditionSpec {
    /// Filesystem-safe identifier; matches `Condition::id` of the prompts
    /// the condition generates.
    pub fn id(&self) -> String {
        let mut parts: Vec<String> = vec![self.task.label().to_string()];
        if let Some(anchor) = self.anchor {
            parts.push(anchor.label().to_string());
        }
        if let Some(direction) = self.direction {
            parts.push(direction.label().to_string());
        }
        parts.push(pool_kind_label(self.pool).to_string());
        parts.push(format!("L{}", self.length));
        parts.join("_")
    }
}

fn pool_kind_label(pool: PoolName) -> &'static str {
    match pool {
        PoolName::Letters => "letters",
        PoolName::Digits => "items",
        _ => "words",
    }
}

/// Enumerates the grid: tasks × anchors × directions × pools × lengths,
/// plus one counting condition per (pool, length) when enabled.
pub fn conditions(plan: &EvalPlan) -> Result<Vec<ConditionSpec>, PlanError> {
    for (name, empty) in [
        ("pools", plan.pools.is_empty()),
        ("lengths", plan.lengths.is_empty()),
        ("tasks", plan.tasks.is_empty() && !plan.include_counting),
    ] {
        if empty {
            return Err(PlanError::EmptyAxis(name));
        }
    }
    let mut out = Vec::new();
    for &pool in &plan.pools {
        for &length in &plan.lengths {
            for &task in &plan.tasks {
                for &anchor in &plan.anchors {
                    for &direction in &plan.directions {
                        out.push(ConditionSpec {
                            task,
                            anchor: Some(anchor),
                            direction: Some(direction),
                            pool,
                            length,
                        });
                    }
                }
            }
            if plan.include_counting {
                out.push(ConditionSpec {
                    task: QueryKind::Counting,
                    anchor: None,
                    direction: None,
                    pool,
                    length,
                });
            }
        }
    }
    Ok(out)
}

/// Generates the prompt set for one condition.
pub fn generate_condition(
    plan: &EvalPlan,
    spec: &ConditionSpec,
) -> Result<Vec<PromptInstance>, PlanError> {
    let pool = ItemPool::builtin(spec.pool);
    let lane = lane_of(&spec.id());
    let mut prompts = Vec::new();

    match (spec.task, plan.per_position_trials) {
        (QueryKind::Counting, _) => {
            for seq_index in 0..plan.sequences_per_condition {
                let mut gen = substream(plan.seed, lane, seq_index as u64, 0);
                let seq = pool.sample_sequence(spec.length, &mut gen)?;
                prompts.push(render_one(plan, spec, lane, &seq, &IndexQuery::Counting, seq_index as u64, 0, &pool)?);
            }
        }
        (_, None) => {
            // 50 independent sequences, every valid offset instantiated.
            for seq_index in 0..plan.sequences_per_condition {
                let mut gen = substream(plan.seed, lane, seq_index as u64, 0);
                let seq = pool.sample_sequence(spec.length, &mut gen)?;
                let anchor = draw_anchor(spec, &seq, &mut gen);
                let Some(anchor) = anchor else { continue };
                let direction = spec.direction.expect("retrieval has a direction");
                for (query_index, offset) in
                    valid_offsets(anchor, direction, seq.length()).into_iter().enumerate()
                {
                    let query = build_query(spec.task, anchor, direction, offset, &seq)?;
                    prompts.push(render_one(
                        plan,
                        spec,
                        lane,
                        &seq,
                        &query,
                        seq_index as u64,
                        query_index as u64,
                        &pool,
                    )?);
                }
            }
        }
        (_, Some(trials_per_position)) => {
            // Fixed trial count per queried position, fresh sequences.
            let direction = spec.direction.expect("retrieval has a direction");
            for offset in 1..=spec.length {
                for trial in 0..trials_per_position {
                    let index = offset as u64 * 1_000_000 + trial as u64;
                    let mut gen = substream(plan.seed, lane, index, 0);
                    let seq = pool.sample_sequence(spec.length, &mut gen)?;
                    let anchor = match spec.anchor {
                        Some(AnchorKind::Endpoint) | None => Some(Anchor::Endpoint),
                        Some(AnchorKind::Relative) => {
                            let candidates: Vec<u32> = (1..=seq.length())
                                .filter(|&r| {
                                    valid_offsets(Anchor::Relative(r), direction, seq.length())
                                        .contains(&offset)
                                })
                                .collect();
                            candidates.choose(&mut gen).map(|&r| Anchor::Relative(r))
                        }
                    };
                    let Some(anchor) = anchor else { continue };
                    if !valid_offsets(anchor, direction, seq.length()).contains(&offset) {
                        continue;
                    }
                    let query = build_query(spec.task, anchor, direction, offset, &seq)?;
                    prompts.push(render_one(
                        plan, spec, lane, &seq, &query, index, 0, &pool,
                    )?);
                }
            }
        }
    }
    Ok(prompts)
}

fn draw_anchor(
    spec: &ConditionSpec,
    seq: &Sequence,
    gen: &mut crate::rng::Stream,
) -> Option<Anchor> {
    match spec.anchor {
        Some(AnchorKind::Endpoint) | None => Some(Anchor::Endpoint),
        Some(AnchorKind::Relative) => {
            let direction = spec.direction.expect("relative anchors are directed");
            let candidates: Vec<u32> = (1..=seq.length())
                .filter(|&r| !valid_offsets(Anchor::Relative(r), direction, seq.length()).is_empty())
                .collect();
            candidates.choose(gen).map(|&r| Anchor::Relative(r))
        }
    }
}

fn build_query(
    task: QueryKind,
    anchor: Anchor,
    direction: Direction,
    offset: u32,
    seq: &Sequence,
) -> Result<IndexQuery, PlanError> {
    let base = IndexQuery::PositionToItem {
        anchor,
        direction,
        offset,
    };
    match task {
        QueryKind::PositionToItem => Ok(base),
        QueryKind::ItemToPosition => Ok(invert_query(seq, &base).map_err(PromptError::Task)?),
        QueryKind::Counting => Ok(IndexQuery::Counting),
    }
}

#[allow(clippy::too_many_arguments)]
fn render_one(
    plan: &EvalPlan,
    _spec: &ConditionSpec,
    lane: u64,
    seq: &Sequence,
    query: &IndexQuery,
    seq_index: u64,
    query_index: u64,
    pool: &ItemPool,
) -> Result<PromptInstance, PlanError> {
    let variant = PromptVariant::default_for(query);
    let mut demo_stream = substream(plan.seed, lane ^ lanes::DEMOS, seq_index, query_index + 1);
    let mut prompt = render_prompt(seq, query, &variant, pool, &mut demo_stream)?;
    prompt.seed_coords = crate::prompting::SeedCoords {
        seed: plan.seed,
        sequence_index: seq_index,
        query_index,
    };
    Ok(prompt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_48_retrieval_conditions_plus_counting() {
        // 2 kinds x 2 anchors x 2 directions x 2 query kinds x 3 lengths,
        // plus one counting condition per (kind, length).
        let plan = EvalPlan::with_seed(7);
        let all = conditions(&plan).unwrap();
        let retrieval = all.iter().filter(|c| c.task != QueryKind::Counting).count();
        let counting = all.iter().filter(|c| c.task == QueryKind::Counting).count();
        assert_eq!(retrieval, 48);
        assert_eq!(counting, 6);
    }

    #[test]
    fn condition_ids_are_unique_and_stable() {
        let plan = EvalPlan::with_seed(7);
        let all = conditions(&plan).unwrap();
        let ids: std::collections::HashSet<String> = all.iter().map(|c| c.id()).collect();
        assert_eq!(ids.len(), all.len());
        assert!(ids.contains("p2i_end_bwd_letters_L20"));
        assert!(ids.contains("count_words_L5"));
    }

    #[test]
    fn endpoint_condition_instantiates_every_offset() {
        let mut plan = EvalPlan::with_seed(3);
        plan.sequences_per_condition = 4;
        let spec = ConditionSpec {
            task: QueryKind::PositionToItem,
            anchor: Some(AnchorKind::Endpoint),
            direction: Some(Direction::Backward),
            pool: PoolName::Letters,
            length: 10,
        };
        let prompts = generate_condition(&plan, &spec).unwrap();
        assert_eq!(prompts.len(), 4 * 10);
        let offsets: Vec<u32> = prompts[..10]
            .iter()
            .map(|p| p.queried_offset().unwrap())
            .collect();
        assert_eq!(offsets, (1..=10).collect::<Vec<u32>>());
    }

    #[test]
    fn generation_is_deterministic() {
        let mut plan = EvalPlan::with_seed(11);
        plan.sequences_per_condition = 3;
        let spec = ConditionSpec {
            task: QueryKind::ItemToPosition,
            anchor: Some(AnchorKind::Relative),
            direction: Some(Direction::Forward),
            pool: PoolName::Fruits,
            length: 8,
        };
        let a = generate_condition(&plan, &spec).unwrap();
        let b = generate_condition(&plan, &spec).unwrap();
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn per_position_override_fixes_trial_counts() {
        let mut plan = EvalPlan::with_seed(5);
        plan.per_position_trials = Some(7);
        let spec = ConditionSpec {
            task: QueryKind::PositionToItem,
            anchor: Some(AnchorKind::Endpoint),
            direction: Some(Direction::Forward),
            pool: PoolName::Letters,
            length: 6,
        };
        let prompts = generate_condition(&plan, &spec).unwrap();
        assert_eq!(prompts.len(), 6 * 7);
        for offset in 1..=6u32 {
            let count = prompts
                .iter()
                .filter(|p| p.queried_offset() == Some(offset))
                .count();
            assert_eq!(count, 7, "offset {offset}");
        }
    }
}
