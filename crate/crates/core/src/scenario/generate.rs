//! Seeded scenario generator.
//!
//! Each attempt draws an initial arrangement, derives a goal from it, and
//! keeps the pair only if the oracle confirms the category predicate:
//!
//! | category | predicate |
//! |---|---|
//! | 1 | optimal length == 2 × misplaced |
//! | 2 | optimal length > 2 × misplaced |
//! | 3 | closure proof of unsolvability (more goal stacks than positions, or a larger-on-smaller goal pair under `block_size`) |
//! | 4 | `block_size` optimum longer than the unconstrained optimum |
//! | 5 | solvable, and some initial stack is at least 3 high |
//!
//! Goals for solvable categories keep a bottom prefix of every initial stack
//! and redistribute the removed tops, which bounds the misplaced count.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::ConstraintSetId;
use crate::domain::{block_name, misplaced_count, Block, GoalSpec, GripperStatus, WorldState};
use crate::planner::{self, Budgets, SolveResult};

use super::{recompute_metadata, Category, Scenario};

pub const MIN_BLOCKS: usize = 3;
pub const MAX_BLOCKS: usize = 20;
pub const MIN_POSITIONS: usize = 3;
pub const MAX_POSITIONS: usize = 6;
pub const MAX_MISPLACED: usize = 10;
pub const MIN_LENGTH: usize = 4;
pub const MAX_LENGTH: usize = 80;
pub const MAX_NON_CONSTRUCTIVE: usize = 60;
/// Attempts before giving up on a spec.
pub const MAX_ATTEMPTS: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeProfile {
    /// Sizes are drawn uniformly from `1..=max_size`.
    pub max_size: u32,
}

impl Default for SizeProfile {
    fn default() -> Self {
        Self { max_size: 3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenSpec {
    pub category: Category,
    pub block_count: usize,
    pub positions: usize,
    /// Used by the `block_size` categories; ignored otherwise.
    #[serde(default)]
    pub size_profile: Option<SizeProfile>,
    /// Category 3 only: `base` (capacity) or `block_size` (size order).
    #[serde(default)]
    pub constraint_set: Option<ConstraintSetId>,
    pub seed: u64,
}

impl GenSpec {
    pub fn new(category: Category, block_count: usize, positions: usize, seed: u64) -> Self {
        Self {
            category,
            block_count,
            positions,
            size_profile: None,
            constraint_set: None,
            seed,
        }
    }

    fn constraint_set(&self) -> ConstraintSetId {
        match self.category.get() {
            1 | 2 => ConstraintSetId::Base,
            3 => self.constraint_set.unwrap_or(ConstraintSetId::Base),
            4 => ConstraintSetId::BlockSize,
            _ => ConstraintSetId::PartialObservability,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerationError {
    #[error("generation parameters out of range: {0}")]
    OutOfEnvelope(String),
    #[error("no scenario satisfying the category predicate after {attempts} attempts")]
    GenerationExhausted { attempts: usize },
}

fn check_envelope(spec: &GenSpec, cs: ConstraintSetId) -> Result<(), GenerationError> {
    let out = |m: String| Err(GenerationError::OutOfEnvelope(m));
    if !(MIN_BLOCKS..=MAX_BLOCKS).contains(&spec.block_count) {
        return out(format!(
            "block count {} outside {MIN_BLOCKS}..={MAX_BLOCKS}",
            spec.block_count
        ));
    }
    if !(MIN_POSITIONS..=MAX_POSITIONS).contains(&spec.positions) {
        return out(format!(
            "position count {} outside {MIN_POSITIONS}..={MAX_POSITIONS}",
            spec.positions
        ));
    }
    if !spec.category.allows(cs) {
        return out(format!(
            "category {} cannot use constraint set `{cs}`",
            spec.category
        ));
    }
    if spec.category.get() == 3 && cs == ConstraintSetId::Base && spec.block_count <= spec.positions
    {
        return out(String::from(
            "a capacity-impossible goal needs more blocks than positions",
        ));
    }
    if spec.category.get() == 5 && spec.block_count < 3 {
        return out(String::from(
            "partial observability needs a stack of height 3",
        ));
    }
    Ok(())
}

/// Generates a scenario satisfying the category predicate, deterministically
/// in `spec.seed`. The id is `cat{c}/gen-{seed}`.
pub fn generate_scenario(spec: &GenSpec) -> Result<Scenario, GenerationError> {
    let cs = spec.constraint_set();
    check_envelope(spec, cs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sized = cs == ConstraintSetId::BlockSize;
    let profile = spec.size_profile.unwrap_or_default();
    for _ in 0..MAX_ATTEMPTS {
        let blocks: Vec<Block> = (0..spec.block_count)
            .map(|i| {
                let size = if sized {
                    rng.gen_range(1..=profile.max_size.max(1))
                } else {
                    1
                };
                Block::new(block_name(i), size)
            })
            .collect();
        let initial = random_state(&mut rng, &blocks, spec.positions, sized);
        let goal = match (spec.category.get(), cs) {
            (3, ConstraintSetId::Base) => random_partition(&mut rng, &blocks, spec.positions),
            (3, _) => perturb(&mut rng, &initial, &blocks, false),
            _ => perturb(&mut rng, &initial, &blocks, sized),
        };
        let goal = GoalSpec::new(goal);
        let scenario = Scenario {
            id: format!("cat{}/gen-{}", spec.category, spec.seed),
            category: Some(spec.category),
            constraint_set: cs,
            initial,
            goal,
            metadata: None,
        };
        if let Some(scenario) = accept(scenario) {
            return Ok(scenario);
        }
    }
    Err(GenerationError::GenerationExhausted {
        attempts: MAX_ATTEMPTS,
    })
}

/// Splits `items` into `parts` nonempty runs at random cut points.
fn split<T: Clone>(rng: &mut ChaCha8Rng, items: &[T], parts: usize) -> Vec<Vec<T>> {
    let mut cuts: Vec<usize> = (1..items.len()).collect();
    cuts.shuffle(rng);
    cuts.truncate(parts - 1);
    cuts.sort_unstable();
    let mut out = Vec::with_capacity(parts);
    let mut from = 0;
    for cut in cuts.into_iter().chain([items.len()]) {
        out.push(items[from..cut].to_vec());
        from = cut;
    }
    out
}

fn random_state(
    rng: &mut ChaCha8Rng,
    blocks: &[Block],
    positions: usize,
    monotone: bool,
) -> WorldState {
    let mut order: Vec<&Block> = blocks.iter().collect();
    order.shuffle(rng);
    let stacks = rng.gen_range(1..=positions.min(blocks.len()));
    let mut table = vec![Vec::new(); positions];
    let mut slots: Vec<usize> = (0..positions).collect();
    slots.shuffle(rng);
    for (slot, mut stack) in slots.into_iter().zip(split(rng, &order, stacks)) {
        if monotone {
            stack.sort_by(|a, b| b.size.cmp(&a.size));
        }
        table[slot] = stack.into_iter().map(|b| b.name.clone()).collect();
    }
    WorldState::new(blocks.iter().cloned(), table, GripperStatus::Idle)
        .expect("generated arrangements conserve blocks")
}

/// Every block in one of `positions + 1 ..= positions + 2` random stacks.
fn random_partition(rng: &mut ChaCha8Rng, blocks: &[Block], positions: usize) -> Vec<Vec<String>> {
    let mut names: Vec<String> = blocks.iter().map(|b| b.name.clone()).collect();
    names.shuffle(rng);
    let parts = rng.gen_range(positions + 1..=(positions + 2).min(names.len()));
    split(rng, &names, parts)
}

/// Removes a random number of tops (up to the misplaced limit) from the
/// initial stacks and places them back, one at a time, on a new stack or on
/// top of any goal stack. With `monotone`, a block only goes on a block at
/// least as large.
fn perturb(
    rng: &mut ChaCha8Rng,
    initial: &WorldState,
    blocks: &[Block],
    monotone: bool,
) -> Vec<Vec<String>> {
    let size = |name: &str| blocks.iter().find(|b| b.name == name).map_or(1, |b| b.size);
    let mut goal: Vec<Vec<String>> = initial.nonempty_stacks().map(<[String]>::to_vec).collect();
    let target = rng.gen_range(2..=MAX_MISPLACED.min(blocks.len()));
    let mut moved = Vec::with_capacity(target);
    while moved.len() < target {
        let candidates: Vec<usize> = (0..goal.len()).filter(|&i| !goal[i].is_empty()).collect();
        let pick = *candidates.choose(rng).expect("some block remains");
        moved.push(goal[pick].pop().expect("nonempty"));
    }
    goal.retain(|s| !s.is_empty());
    moved.shuffle(rng);
    for block in moved {
        let options: Vec<usize> = (0..goal.len())
            .filter(|&i| {
                let top = goal[i].last().expect("goal stacks are nonempty");
                !monotone || size(&block) <= size(top)
            })
            .collect();
        let choice = rng.gen_range(0..=options.len());
        match options.get(choice) {
            Some(&i) => goal[i].push(block),
            None => goal.push(vec![block]),
        }
    }
    goal
}

fn size_violating_pair(s: &Scenario) -> bool {
    s.goal.stacks.iter().any(|stack| {
        stack
            .windows(2)
            .any(|w| s.initial.size_of(&w[1]) > s.initial.size_of(&w[0]))
    })
}

fn optimal_length(s: &Scenario, cs: ConstraintSetId) -> Option<usize> {
    match planner::solve(&s.initial, &s.goal, cs, Budgets::default()).ok()? {
        SolveResult::Solved {
            plan,
            optimal: true,
        } => Some(plan.len()),
        _ => None,
    }
}

/// Applies the category predicate; on success fills in metadata.
fn accept(mut s: Scenario) -> Option<Scenario> {
    let category = s
        .category
        .expect("generated scenarios have a category")
        .get();
    let misplaced = misplaced_count(&s.initial, &s.goal).ok()?;
    if misplaced > MAX_MISPLACED {
        return None;
    }
    if category == 3 {
        let cs = s.constraint_set;
        if cs == ConstraintSetId::BlockSize
            && (!size_violating_pair(&s) || s.goal.stacks.len() > s.positions())
        {
            return None;
        }
        let proof = planner::prove_unsolvable(&s.initial, &s.goal, cs, Budgets::default()).ok()?;
        if !matches!(proof, SolveResult::Unsolvable { .. }) {
            return None;
        }
    } else {
        if misplaced < 2 || s.goal.stacks.len() > s.positions() {
            return None;
        }
        if category == 5 && s.initial.positions().iter().all(|p| p.len() < 3) {
            return None;
        }
        let length = optimal_length(&s, s.constraint_set)?;
        let keep = match category {
            1 => length == 2 * misplaced,
            2 => length > 2 * misplaced,
            4 => length > optimal_length(&s, ConstraintSetId::Base)?,
            _ => true,
        };
        if !keep || !(MIN_LENGTH..=MAX_LENGTH).contains(&length) {
            return None;
        }
    }
    let meta = recompute_metadata(&s, Budgets::default()).ok()?;
    if meta.length_is_upper_bound
        || meta
            .non_constructive_in_optimal
            .is_some_and(|n| n > MAX_NON_CONSTRUCTIVE)
    {
        return None;
    }
    s.metadata = Some(meta);
    Some(s)
}
