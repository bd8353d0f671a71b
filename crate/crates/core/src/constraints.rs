//! Constraint sets: action validation with English violation messages,
//! observation masking, and the rules text served to agents.
//!
//! Rule ids form a closed set:
//!
//! | rule id              | meaning                                              |
//! |----------------------|------------------------------------------------------|
//! | `gripper_occupied`   | acquire while already holding a block                |
//! | `gripper_empty`      | place while holding nothing                          |
//! | `block_not_clear`    | grasp a covered block, or stack onto a covered block |
//! | `block_not_on_table` | `pick_up` of a block resting on another block        |
//! | `not_on_target`      | `unstack(x, y)` where x is not directly on y         |
//! | `no_free_position`   | `put_down` with every table position occupied        |
//! | `held_mismatch`      | place a block other than the one held                |
//! | `unknown_block`      | argument names no block of the scenario              |
//! | `size_order`         | `block_size`: stacking a larger block on a smaller   |
//! | `malformed`          | step that is not a well-formed action                |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::domain::{Action, Block, DomainError, GripperStatus, Location, WorldState};

/// Placeholder for a block whose identity is hidden.
pub const UNKNOWN: &str = "unknown";

/// Number of top blocks per stack that stay visible under partial observability.
pub const VISIBLE_DEPTH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintSetId {
    Base,
    BlockSize,
    PartialObservability,
}

impl ConstraintSetId {
    pub const ALL: [ConstraintSetId; 3] = [
        ConstraintSetId::Base,
        ConstraintSetId::BlockSize,
        ConstraintSetId::PartialObservability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConstraintSetId::Base => "base",
            ConstraintSetId::BlockSize => "block_size",
            ConstraintSetId::PartialObservability => "partial_observability",
        }
    }

    pub fn enforces_size_order(self) -> bool {
        self == ConstraintSetId::BlockSize
    }

    pub fn masks_observation(self) -> bool {
        self == ConstraintSetId::PartialObservability
    }
}

impl fmt::Display for ConstraintSetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ConstraintSetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConstraintSetId::ALL
            .into_iter()
            .find(|cs| cs.as_str() == s)
            .ok_or_else(|| format!("unknown constraint set `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleId {
    GripperOccupied,
    GripperEmpty,
    BlockNotClear,
    BlockNotOnTable,
    NotOnTarget,
    NoFreePosition,
    HeldMismatch,
    UnknownBlock,
    SizeOrder,
    Malformed,
}

impl RuleId {
    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::GripperOccupied => "gripper_occupied",
            RuleId::GripperEmpty => "gripper_empty",
            RuleId::BlockNotClear => "block_not_clear",
            RuleId::BlockNotOnTable => "block_not_on_table",
            RuleId::NotOnTarget => "not_on_target",
            RuleId::NoFreePosition => "no_free_position",
            RuleId::HeldMismatch => "held_mismatch",
            RuleId::UnknownBlock => "unknown_block",
            RuleId::SizeOrder => "size_order",
            RuleId::Malformed => "malformed",
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A rejected action: machine rule id plus an explanation an agent can read.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: RuleId,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<Action>,
}

impl Violation {
    pub fn malformed(message: impl Into<String>) -> Self {
        Self {
            rule_id: RuleId::Malformed,
            message: message.into(),
            action: None,
        }
    }
}

/// Checks `action` against the structural rules and the rules of `cs`.
/// Legality is always judged on the true state, masking only affects views.
pub fn validate(state: &WorldState, action: &Action, cs: ConstraintSetId) -> Result<(), Violation> {
    if let Err(err) = state.apply(action) {
        return Err(violation_for(state, action, &err, cs));
    }
    if let (true, Action::Stack { block, target }) = (cs.enforces_size_order(), action) {
        let (held, below) = (size(state, block), size(state, target));
        if held > below {
            return Err(Violation {
                rule_id: RuleId::SizeOrder,
                message: format!(
                    "Cannot stack {block} on {target}: {block} has size {held} but {target} has size {below}. \
                     A block may only be placed on a block of equal or larger size."
                ),
                action: Some(action.clone()),
            });
        }
    }
    Ok(())
}

fn size(state: &WorldState, name: &str) -> u32 {
    state.size_of(name).unwrap_or(1)
}

/// Validates and applies in one step.
pub fn validate_and_apply(
    state: &WorldState,
    action: &Action,
    cs: ConstraintSetId,
) -> Result<WorldState, Violation> {
    validate(state, action, cs)?;
    Ok(state
        .apply(action)
        .expect("validated actions apply structurally"))
}

/// Whether `name` would be named in an observation under `cs`.
pub fn is_visible(state: &WorldState, name: &str, cs: ConstraintSetId) -> bool {
    if !cs.masks_observation() {
        return true;
    }
    match state.locate(name) {
        Some(Location::Stack { position, level }) => {
            level + VISIBLE_DEPTH >= state.positions()[position].len()
        }
        Some(Location::Gripper) | None => true,
    }
}

fn refer(state: &WorldState, name: &str, cs: ConstraintSetId) -> String {
    if is_visible(state, name, cs) {
        format!("block {name}")
    } else {
        String::from("a hidden block")
    }
}

fn phrase(action: &Action) -> String {
    match action {
        Action::PickUp { block } => format!("pick up {block}"),
        Action::PutDown { block } => format!("put down {block}"),
        Action::Stack { block, target } => format!("stack {block} on {target}"),
        Action::Unstack { block, target } => format!("unstack {block} from {target}"),
    }
}

fn violation_for(
    state: &WorldState,
    action: &Action,
    err: &DomainError,
    cs: ConstraintSetId,
) -> Violation {
    let what = phrase(action);
    let x = action.block();
    let (rule_id, message) = match err {
        DomainError::UnknownBlock(name) => {
            let known: Vec<&str> = state.blocks().map(|b| b.name.as_str()).collect();
            (
                RuleId::UnknownBlock,
                format!(
                    "Cannot {what}: there is no block named {name}. The blocks in this scenario are {}.",
                    known.join(", ")
                ),
            )
        }
        DomainError::GripperOccupied { held } => (
            RuleId::GripperOccupied,
            format!(
                "Cannot {what}: the gripper is already holding {held}. Only one block can be held at a time; \
                 put {held} down or stack it first."
            ),
        ),
        DomainError::GripperEmpty => (
            RuleId::GripperEmpty,
            format!("Cannot {what}: the gripper is empty. Grasp {x} with pick_up or unstack first."),
        ),
        DomainError::HeldBlockMismatch { held, .. } => (
            RuleId::HeldMismatch,
            format!("Cannot {what}: the gripper is holding {held}, not {x}."),
        ),
        DomainError::BlockNotClear { block, above } if block == x => (
            RuleId::BlockNotClear,
            format!(
                "Cannot {what}: {} rests on top of {x}. A block can only be grasped when nothing is on top of it.",
                refer(state, above, cs)
            ),
        ),
        DomainError::BlockNotClear { block, above } => (
            RuleId::BlockNotClear,
            format!(
                "Cannot {what}: {} rests on top of {block}. Blocks can only be stacked on the top block of a stack.",
                refer(state, above, cs)
            ),
        ),
        DomainError::BlockNotOnTable { below, .. } => (
            RuleId::BlockNotOnTable,
            format!(
                "Cannot {what}: {x} rests on {} rather than directly on the table. Use unstack to take it off that block.",
                refer(state, below, cs)
            ),
        ),
        DomainError::NotOnTarget { target, actual, .. } => {
            let actually = match actual {
                Some(below) => format!("it rests on {}", refer(state, below, cs)),
                None => format!("it stands directly on the table, use pick_up({x}) instead"),
            };
            (
                RuleId::NotOnTarget,
                format!("Cannot {what}: {x} is not directly on top of {target}; {actually}."),
            )
        }
        DomainError::NoFreePosition { positions } => (
            RuleId::NoFreePosition,
            format!(
                "Cannot {what}: all {positions} table positions are occupied. Stack {x} on the top block of a stack instead."
            ),
        ),
        DomainError::SameBlock(name) => (
            RuleId::Malformed,
            format!("Cannot {what}: {name} cannot be both the moved block and the target."),
        ),
        other => (RuleId::Malformed, format!("Cannot {what}: {other}.")),
    };
    Violation {
        rule_id,
        message,
        action: Some(action.clone()),
    }
}

/// What an agent is allowed to see of a state.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// One bottom-to-top list per position; hidden entries read `"unknown"`.
    pub stacks: Vec<Vec<String>>,
    /// Properties of the named blocks only, in name order.
    pub blocks: Vec<Block>,
    pub gripper: GripperStatus,
}

impl Observation {
    pub fn unknown_count(&self) -> usize {
        self.stacks
            .iter()
            .flatten()
            .filter(|b| *b == UNKNOWN)
            .count()
    }
}

/// Masks `state` per `cs`. Hidden entries expose neither name nor size.
pub fn observe(state: &WorldState, cs: ConstraintSetId) -> Observation {
    let stacks: Vec<Vec<String>> = state
        .positions()
        .iter()
        .map(|stack| {
            let hidden = if cs.masks_observation() {
                stack.len().saturating_sub(VISIBLE_DEPTH)
            } else {
                0
            };
            stack
                .iter()
                .enumerate()
                .map(|(level, name)| {
                    if level < hidden {
                        UNKNOWN.to_string()
                    } else {
                        name.clone()
                    }
                })
                .collect()
        })
        .collect();
    let blocks = state
        .blocks()
        .filter(|b| is_visible(state, &b.name, cs))
        .cloned()
        .collect();
    Observation {
        stacks,
        blocks,
        gripper: state.gripper().clone(),
    }
}

/// Rules text for a scenario with `positions` table positions under `cs`.
pub fn describe_rules(cs: ConstraintSetId, positions: usize) -> String {
    let last = positions.saturating_sub(1);
    let mut text = format!(
        "Blocksworld rules (constraint set: {cs})\n\
         \n\
         The table has {positions} discrete positions, numbered 0 to {last}. A robotic gripper moves blocks one at a time.\n\
         \n\
         Actions:\n\
         - pick_up(block_x): grasp block x and remove it directly from the table surface. x must stand alone on its table position with nothing on top, and the gripper must be empty.\n\
         - put_down(block_x): place the held block x on an unoccupied table position. The block goes to the lowest-numbered free position.\n\
         - stack(block_x, block_y): place the held block x on top of block y. y must be the top block of a stack.\n\
         - unstack(block_x, block_y): grasp block x and remove it from the top of block y. x must be directly on y with nothing on top of it, and the gripper must be empty.\n\
         \n\
         Constraints:\n\
         1. Only one block can be held by the gripper at a time.\n\
         2. A block can only be grasped if no other block rests on top of it.\n\
         3. Each block can have at most one block directly on top of it.\n\
         4. The table has exactly {positions} positions and each position holds at most one stack of blocks.\n"
    );
    if cs.enforces_size_order() {
        text.push_str(
            "5. Block sizes: a block may only be placed on a block of equal or larger size. \
             Stacking a larger block on a smaller one is rejected.\n",
        );
    }
    if cs.masks_observation() {
        text.push_str(
            "\nObservation: only the names of the top two blocks of each stack are visible. \
             Deeper blocks are reported as \"unknown\" and their properties are withheld. \
             Move the blocks above them to reveal them.\n",
        );
    }
    text.push_str(
        "\nA goal is reached when the gripper is empty and the stacks on the table match the goal stacks; \
         which position holds which stack does not matter.\n",
    );
    text
}
