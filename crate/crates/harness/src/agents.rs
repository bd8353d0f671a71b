//! Scripted reference agents. They see the world only through tool results.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use blocksbench_core::constraints::{ConstraintSetId, UNKNOWN};
use blocksbench_core::domain::{
    in_position_blocks, is_goal, Action, Block, GoalSpec, GripperStatus, WorldState,
};
use blocksbench_core::planner::{solve_with, SolveOptions, SolveResult};
use blocksbench_service::StatusPayload;

use crate::episode::{give_up, ActOutcome, Agent, AgentError, Episode, Judgment};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Oracle,
    Reveal,
    Greedy,
}

impl AgentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AgentKind::Oracle => "oracle",
            AgentKind::Reveal => "reveal",
            AgentKind::Greedy => "greedy",
        }
    }

    pub fn build(self, seed: u64, options: SolveOptions) -> Box<dyn Agent> {
        match self {
            AgentKind::Oracle => Box::new(OracleAgent::new(options)),
            AgentKind::Reveal => Box::new(RevealAgent::new(options)),
            AgentKind::Greedy => Box::new(GreedyAgent::new(seed)),
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgentKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "oracle" => Ok(AgentKind::Oracle),
            "reveal" => Ok(AgentKind::Reveal),
            "greedy" => Ok(AgentKind::Greedy),
            other => Err(format!("unknown agent `{other}` (oracle, reveal, greedy)")),
        }
    }
}

fn has_hidden(status: &StatusPayload) -> bool {
    status.stacks.iter().flatten().any(|b| b == UNKNOWN)
}

fn gripper(status: &StatusPayload) -> GripperStatus {
    match &status.gripper.block {
        Some(block) => GripperStatus::Holding(block.clone()),
        None => GripperStatus::Idle,
    }
}

/// World state from a fully visible status.
fn world(status: &StatusPayload) -> Result<WorldState, AgentError> {
    WorldState::new(
        status.blocks.iter().cloned(),
        status.stacks.clone(),
        gripper(status),
    )
    .map_err(|e| give_up(format!("inconsistent status: {e}")))
}

/// Plans from `state`; `None` means the goal is unreachable.
fn plan(
    state: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    options: &SolveOptions,
) -> Result<Option<Vec<Action>>, AgentError> {
    match solve_with(state, goal, cs, options) {
        Ok(SolveResult::Solved { plan, .. }) => Ok(Some(plan.steps)),
        Ok(SolveResult::Unsolvable { .. }) => Ok(None),
        Ok(SolveResult::ResourceLimit {
            explored_states, ..
        }) => Err(give_up(format!(
            "planner budget exhausted after {explored_states} states"
        ))),
        Err(e) => Err(give_up(format!("planner: {e}"))),
    }
}

/// Verifies `steps` once, executes them, and confirms with a final status.
fn verify_then_execute(
    episode: &mut Episode<'_>,
    steps: &[Action],
) -> Result<Judgment, AgentError> {
    let report = episode.verify(steps)?;
    if report["verified"] != true || report["reaches_goal"] != true {
        return Err(give_up(format!(
            "verification rejected the plan: {}",
            report["message"].as_str().unwrap_or_default()
        )));
    }
    for action in steps {
        if let ActOutcome::Rejected { message, .. } = episode.act(action)? {
            return Err(give_up(format!("verified step rejected live: {message}")));
        }
    }
    episode.status()?;
    Ok(Judgment::Completed)
}

/// Rules, status, optimal plan, one verification, execution, confirmation.
/// Declares impossibility when the planner proves the goal unreachable.
pub struct OracleAgent {
    options: SolveOptions,
}

impl OracleAgent {
    pub fn new(options: SolveOptions) -> Self {
        Self { options }
    }
}

impl Agent for OracleAgent {
    fn name(&self) -> &str {
        "oracle"
    }

    fn run(&mut self, episode: &mut Episode<'_>) -> Result<Judgment, AgentError> {
        episode.rules()?;
        let status = episode.status()?;
        if has_hidden(&status) {
            return Err(give_up("some blocks are hidden"));
        }
        let state = world(&status)?;
        match plan(&state, &status.goal, status.constraint_set, &self.options)? {
            Some(steps) => verify_then_execute(episode, &steps),
            None => Ok(Judgment::Impossible),
        }
    }
}

/// What the agent knows of each stack; `None` marks a block not yet seen.
#[derive(Debug, Clone, PartialEq)]
struct Belief {
    stacks: Vec<Vec<Option<String>>>,
    held: Option<String>,
    sizes: BTreeMap<String, u32>,
}

impl Belief {
    fn new(status: &StatusPayload) -> Self {
        let mut belief = Self {
            stacks: status.stacks.iter().map(|s| vec![None; s.len()]).collect(),
            held: None,
            sizes: BTreeMap::new(),
        };
        belief
            .merge(status)
            .expect("an empty belief accepts any observation");
        belief
    }

    /// Folds an observation in; fails if it contradicts the belief.
    fn merge(&mut self, status: &StatusPayload) -> Result<(), String> {
        if status.stacks.len() != self.stacks.len() {
            return Err(String::from("position count changed"));
        }
        for (i, (believed, seen)) in self.stacks.iter_mut().zip(&status.stacks).enumerate() {
            if believed.len() != seen.len() {
                return Err(format!("stack at p{i} has an unexpected height"));
            }
            for (slot, name) in believed.iter_mut().zip(seen) {
                if name == UNKNOWN {
                    continue;
                }
                match slot {
                    Some(known) if known != name => {
                        return Err(format!("expected {known} at p{i}, saw {name}"));
                    }
                    _ => *slot = Some(name.clone()),
                }
            }
        }
        self.held = status.gripper.block.clone();
        for block in &status.blocks {
            self.sizes.insert(block.name.clone(), block.size);
        }
        Ok(())
    }

    fn hidden(&self) -> usize {
        self.stacks.iter().flatten().filter(|b| b.is_none()).count()
    }

    fn top(&self, position: usize) -> Option<&str> {
        self.stacks[position].last().and_then(|b| b.as_deref())
    }

    /// Mirrors the effect of an executed action.
    fn apply(&mut self, action: &Action) {
        match action {
            Action::PickUp { block } | Action::Unstack { block, .. } => {
                if let Some(stack) = self
                    .stacks
                    .iter_mut()
                    .find(|s| s.last().and_then(|b| b.as_deref()) == Some(block.as_str()))
                {
                    stack.pop();
                }
                self.held = Some(block.clone());
            }
            Action::PutDown { block } => {
                if let Some(stack) = self.stacks.iter_mut().find(|s| s.is_empty()) {
                    stack.push(Some(block.clone()));
                }
                self.held = None;
            }
            Action::Stack { block, target } => {
                if let Some(stack) = self
                    .stacks
                    .iter_mut()
                    .find(|s| s.last().and_then(|b| b.as_deref()) == Some(target.as_str()))
                {
                    stack.push(Some(block.clone()));
                }
                self.held = None;
            }
        }
    }

    fn state(&self) -> Result<WorldState, AgentError> {
        let stacks: Vec<Vec<String>> = self
            .stacks
            .iter()
            .map(|s| s.iter().map(|b| b.clone().unwrap_or_default()).collect())
            .collect();
        let blocks = self
            .sizes
            .iter()
            .map(|(name, &size)| Block::new(name.clone(), size));
        let gripper = match &self.held {
            Some(block) => GripperStatus::Holding(block.clone()),
            None => GripperStatus::Idle,
        };
        WorldState::new(blocks, stacks, gripper)
            .map_err(|e| give_up(format!("belief is not a consistent state: {e}")))
    }
}

/// For partially observable scenarios: moves visible blocks off the stack
/// whose topmost hidden block is shallowest until it surfaces, re-reads the
/// status after each round, and plans like [`OracleAgent`] once every block
/// has been seen. Fully visible scenarios go straight to planning.
pub struct RevealAgent {
    options: SolveOptions,
}

impl RevealAgent {
    pub fn new(options: SolveOptions) -> Self {
        Self { options }
    }

    /// Stack to dig into and how many blocks must come off it.
    fn dig_site(belief: &Belief) -> Option<(usize, usize)> {
        belief
            .stacks
            .iter()
            .enumerate()
            .filter_map(|(i, s)| {
                let topmost_hidden = s.iter().rposition(Option::is_none)?;
                Some((s.len() - 2 - topmost_hidden, i))
            })
            .min()
            .map(|(removals, i)| (i, removals))
    }

    /// Where to set down `block` taken from `from`.
    fn placement(belief: &Belief, block: &str, from: usize, cs: ConstraintSetId) -> Option<Action> {
        if belief.stacks.iter().any(Vec::is_empty) {
            return Some(Action::put_down(block));
        }
        let fits = |target: &str| {
            !cs.enforces_size_order()
                || matches!(
                    (belief.sizes.get(block), belief.sizes.get(target)),
                    (Some(a), Some(b)) if a <= b
                )
        };
        let candidates = (0..belief.stacks.len()).filter(|&i| i != from);
        let fully_known = |i: &usize| belief.stacks[*i].iter().all(Option::is_some);
        candidates
            .clone()
            .filter(fully_known)
            .chain(candidates)
            .filter_map(|i| belief.top(i).filter(|t| fits(t)))
            .map(|target| Action::stack(block, target))
            .next()
    }

    fn uncover(
        &self,
        episode: &mut Episode<'_>,
        belief: &mut Belief,
        cs: ConstraintSetId,
    ) -> Result<(), AgentError> {
        while let Some((site, removals)) = Self::dig_site(belief) {
            let before = belief.hidden();
            for _ in 0..removals {
                let stack = &belief.stacks[site];
                let (Some(Some(top)), Some(Some(below))) =
                    (stack.last(), stack.get(stack.len().wrapping_sub(2)))
                else {
                    return Err(give_up("the blocks to move are not visible"));
                };
                let (top, below) = (top.clone(), below.clone());
                for action in [
                    Some(Action::unstack(&top, below)),
                    Self::placement(belief, &top, site, cs),
                ] {
                    let action =
                        action.ok_or_else(|| give_up(format!("nowhere to set {top} aside")))?;
                    if let ActOutcome::Rejected { message, .. } = episode.act(&action)? {
                        return Err(give_up(format!("uncovering move rejected: {message}")));
                    }
                    belief.apply(&action);
                }
            }
            let status = episode.status()?;
            belief.merge(&status).map_err(give_up)?;
            if belief.hidden() >= before {
                return Err(give_up("uncovering made no progress"));
            }
        }
        Ok(())
    }
}

impl Agent for RevealAgent {
    fn name(&self) -> &str {
        "reveal"
    }

    fn run(&mut self, episode: &mut Episode<'_>) -> Result<Judgment, AgentError> {
        episode.rules()?;
        let status = episode.status()?;
        let mut belief = Belief::new(&status);
        self.uncover(episode, &mut belief, status.constraint_set)?;
        let state = belief.state()?;
        match plan(&state, &status.goal, status.constraint_set, &self.options)? {
            Some(steps) => verify_then_execute(episode, &steps),
            None => Ok(Judgment::Impossible),
        }
    }
}

/// Naive baseline: never verifies, never plans ahead, and only makes moves
/// that put a block straight into its goal place, choosing among them at
/// random. Gives up when no such move exists or an action is rejected.
pub struct GreedyAgent {
    seed: u64,
    max_steps: usize,
}

impl GreedyAgent {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            max_steps: 400,
        }
    }

    fn rng(&self, scenario_id: &str) -> ChaCha8Rng {
        // FNV-1a keeps each episode's choices independent of run order.
        let id_hash = scenario_id.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
            (h ^ u64::from(b)).wrapping_mul(0x0100_0000_01b3)
        });
        ChaCha8Rng::seed_from_u64(self.seed ^ id_hash)
    }

    /// Moves after which the moved (or grasped) block can go straight home.
    fn constructive_moves(state: &WorldState, goal: &GoalSpec) -> Vec<Action> {
        let support = goal.support();
        let placed = in_position_blocks(state, goal);
        // The home of `block` is open: a free table slot or a clear, placed support.
        let home = |block: &str| match support.get(block) {
            Some(None) => state
                .free_position()
                .is_some()
                .then(|| Action::put_down(block)),
            Some(Some(target)) if placed.contains(target) && state.is_clear(target) => {
                Some(Action::stack(block, *target))
            }
            _ => None,
        };
        if let Some(held) = state.gripper().held() {
            return home(held).into_iter().collect();
        }
        state
            .positions()
            .iter()
            .filter_map(|stack| {
                let top = stack.last()?;
                if placed.contains(top.as_str()) {
                    return None;
                }
                home(top)?;
                Some(match stack.len() {
                    1 => Action::pick_up(top),
                    n => Action::unstack(top, &stack[n - 2]),
                })
            })
            .collect()
    }
}

impl Agent for GreedyAgent {
    fn name(&self) -> &str {
        "greedy"
    }

    fn run(&mut self, episode: &mut Episode<'_>) -> Result<Judgment, AgentError> {
        let mut rng = self.rng(episode.scenario_id());
        episode.rules()?;
        let mut status = episode.status()?;
        for _ in 0..self.max_steps {
            if has_hidden(&status) {
                return Err(give_up("some blocks are hidden"));
            }
            let state = world(&status)?;
            if is_goal(&state, &status.goal) {
                return Ok(Judgment::Completed);
            }
            let moves = Self::constructive_moves(&state, &status.goal);
            let action = moves
                .choose(&mut rng)
                .ok_or_else(|| give_up("no constructive move available"))?;
            match episode.act(action)? {
                ActOutcome::Executed(next) => status = *next,
                ActOutcome::Rejected { message, .. } => {
                    return Err(give_up(format!("action rejected: {message}")))
                }
            }
        }
        Err(give_up(format!("no goal after {} actions", self.max_steps)))
    }
}
