//! Oracle planner: optimal plans by breadth-first search or IDA*, closure
//! proofs of unsolvability, and per-plan complexity statistics.
//!
//! All engines search canonical nodes (see [`compact`]) and plan on the true
//! state; masking never applies here.

mod compact;
mod search;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraints::{validate, ConstraintSetId, Violation};
use crate::domain::{classify_action, ActionClass, GoalSpec, WorldState};
use crate::verifier::Plan;

use compact::{CompactProblem, Move};
use search::Outcome;

/// BFS is used up to this many blocks in [`SearchMethod::Auto`].
pub const BFS_BLOCK_LIMIT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budgets {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_states: 5_000_000,
            max_depth: 120,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMethod {
    #[default]
    Auto,
    Bfs,
    IdaStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub budgets: Budgets,
    pub method: SearchMethod,
    /// Report more goal stacks than positions as unsolvable without searching.
    pub structural_precheck: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            budgets: Budgets::default(),
            method: SearchMethod::Auto,
            structural_precheck: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum SolveResult {
    Solved {
        plan: Plan,
        optimal: bool,
    },
    Unsolvable {
        explored_states: usize,
    },
    ResourceLimit {
        explored_states: usize,
        depth_reached: usize,
    },
}

impl SolveResult {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveResult::Solved { plan, .. } => Some(plan),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlannerError {
    #[error("goal does not mention exactly the blocks of the state")]
    BlockSetMismatch,
    #[error("too many blocks for the planner ({0})")]
    TooManyBlocks(usize),
    #[error("goal is unreachable ({explored_states} states explored)")]
    Unsolvable { explored_states: usize },
    #[error("search budget exhausted after {explored_states} states at depth {depth_reached}")]
    ResourceLimit {
        explored_states: usize,
        depth_reached: usize,
    },
    #[error("plan step {index} is invalid: {}", violation.message)]
    Rejected { index: usize, violation: Violation },
}

fn problem(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
) -> Result<CompactProblem, PlannerError> {
    if initial.block_count() > compact::MAX_BLOCKS {
        return Err(PlannerError::TooManyBlocks(initial.block_count()));
    }
    CompactProblem::new(initial, goal, cs).ok_or(PlannerError::BlockSetMismatch)
}

fn to_plan(problem: &CompactProblem, moves: &[Move]) -> Plan {
    Plan::new(moves.iter().map(|&mv| problem.action(mv)).collect())
}

fn finish(problem: &CompactProblem, outcome: Outcome, optimal: bool) -> SolveResult {
    match outcome {
        Outcome::Found(moves) => SolveResult::Solved {
            plan: to_plan(problem, &moves),
            optimal,
        },
        Outcome::Exhausted { explored } => SolveResult::Unsolvable {
            explored_states: explored,
        },
        Outcome::Limit { explored, depth } => SolveResult::ResourceLimit {
            explored_states: explored,
            depth_reached: depth,
        },
    }
}

/// Optimal solve with default options and the given budgets.
pub fn solve(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    budgets: Budgets,
) -> Result<SolveResult, PlannerError> {
    solve_with(
        initial,
        goal,
        cs,
        &SolveOptions {
            budgets,
            ..SolveOptions::default()
        },
    )
}

pub fn solve_with(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    options: &SolveOptions,
) -> Result<SolveResult, PlannerError> {
    let problem = problem(initial, goal, cs)?;
    if options.structural_precheck && problem.goal_stack_count() > problem.positions() {
        return Ok(SolveResult::Unsolvable { explored_states: 0 });
    }
    let start = problem.node(initial);
    let use_bfs = match options.method {
        SearchMethod::Bfs => true,
        SearchMethod::IdaStar => false,
        SearchMethod::Auto => problem.block_count() <= BFS_BLOCK_LIMIT,
    };
    let outcome = if use_bfs {
        search::bfs(&problem, start, &options.budgets)
    } else {
        search::ida_star(&problem, start, &options.budgets)
    };
    Ok(finish(&problem, outcome, true))
}

/// Exhaustive breadth-first closure with no structural shortcut. Returns
/// `Unsolvable` only once the reachable set is closed without a goal node.
pub fn prove_unsolvable(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    budgets: Budgets,
) -> Result<SolveResult, PlannerError> {
    solve_with(
        initial,
        goal,
        cs,
        &SolveOptions {
            budgets,
            method: SearchMethod::Bfs,
            structural_precheck: false,
        },
    )
}

/// Some plan, not necessarily optimal, from greedy best-first search.
pub fn best_effort(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    budgets: Budgets,
) -> Result<SolveResult, PlannerError> {
    let problem = problem(initial, goal, cs)?;
    let start = problem.node(initial);
    let outcome = search::greedy(&problem, start, &budgets);
    Ok(finish(&problem, outcome, false))
}

pub fn min_solution_length(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    budgets: Budgets,
) -> Result<usize, PlannerError> {
    match solve(initial, goal, cs, budgets)? {
        SolveResult::Solved { plan, .. } => Ok(plan.len()),
        SolveResult::Unsolvable { explored_states } => {
            Err(PlannerError::Unsolvable { explored_states })
        }
        SolveResult::ResourceLimit {
            explored_states,
            depth_reached,
        } => Err(PlannerError::ResourceLimit {
            explored_states,
            depth_reached,
        }),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanStats {
    pub length: usize,
    pub constructive: usize,
    pub non_constructive: usize,
}

/// Classifies every step of a plan that must be executable from `initial`.
pub fn plan_stats(
    initial: &WorldState,
    goal: &GoalSpec,
    cs: ConstraintSetId,
    plan: &Plan,
) -> Result<PlanStats, PlannerError> {
    goal.check_coverage(initial)
        .map_err(|_| PlannerError::BlockSetMismatch)?;
    let mut stats = PlanStats::default();
    let mut state = initial.clone();
    for (index, action) in plan.steps.iter().enumerate() {
        validate(&state, action, cs)
            .map_err(|violation| PlannerError::Rejected { index, violation })?;
        match classify_action(&state, action, goal).map_err(|_| PlannerError::BlockSetMismatch)? {
            ActionClass::Constructive => stats.constructive += 1,
            ActionClass::NonConstructive => stats.non_constructive += 1,
        }
        state = state.apply(action).expect("validated action applies");
        stats.length += 1;
    }
    Ok(stats)
}
