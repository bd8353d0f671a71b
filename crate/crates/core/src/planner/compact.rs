//! Index-based search representation.
//!
//! Blocks are numbered in name order. A node keeps only the nonempty stacks,
//! sorted lexicographically, so states that differ by a permutation of whole
//! stacks across positions collapse to one node. That is sound because goals
//! are position-agnostic and `put_down` always targets the lowest free slot.

use std::collections::HashMap;

use crate::constraints::ConstraintSetId;
use crate::domain::{Action, GoalSpec, WorldState};

pub(crate) type Id = u8;

const TABLE: Id = Id::MAX;
const STACK_END: u8 = 0xFE;
const EMPTY_HAND: u8 = 0xFF;

/// Largest block count the compact encoding supports.
pub(crate) const MAX_BLOCKS: usize = 250;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Move {
    PickUp(Id),
    PutDown(Id),
    Stack(Id, Id),
    Unstack(Id, Id),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct Node {
    pub stacks: Vec<Vec<Id>>,
    pub held: Option<Id>,
}

impl Node {
    pub fn key(&self) -> Box<[u8]> {
        let len: usize = self.stacks.iter().map(|s| s.len() + 1).sum();
        let mut key = Vec::with_capacity(len + 1);
        for stack in &self.stacks {
            key.extend_from_slice(stack);
            key.push(STACK_END);
        }
        key.push(self.held.unwrap_or(EMPTY_HAND));
        key.into_boxed_slice()
    }

    pub fn from_key(key: &[u8]) -> Self {
        let (held, body) = key.split_last().expect("keys are nonempty");
        let stacks = body
            .split(|b| *b == STACK_END)
            .filter(|s| !s.is_empty())
            .map(<[u8]>::to_vec)
            .collect();
        Node {
            stacks,
            held: (*held != EMPTY_HAND).then_some(*held),
        }
    }

    fn canonicalize(&mut self) {
        self.stacks.retain(|s| !s.is_empty());
        self.stacks.sort_unstable();
    }
}

/// The problem in index space: sizes, goal support relation, table capacity.
#[derive(Debug, Clone)]
pub(crate) struct CompactProblem {
    names: Vec<String>,
    index: HashMap<String, Id>,
    sizes: Vec<u32>,
    positions: usize,
    size_order: bool,
    goal_support: Vec<Id>,
    goal_stacks: Vec<Vec<Id>>,
}

impl CompactProblem {
    /// `None` when the goal does not cover exactly the state's blocks.
    pub fn new(state: &WorldState, goal: &GoalSpec, cs: ConstraintSetId) -> Option<Self> {
        if state.block_count() > MAX_BLOCKS || goal.check_coverage(state).is_err() {
            return None;
        }
        let names: Vec<String> = state.blocks().map(|b| b.name.clone()).collect();
        let index: HashMap<String, Id> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as Id))
            .collect();
        let sizes = state.blocks().map(|b| b.size).collect();
        let mut goal_support = vec![TABLE; names.len()];
        let mut goal_stacks: Vec<Vec<Id>> = goal
            .stacks
            .iter()
            .map(|stack| stack.iter().map(|n| index[n]).collect())
            .collect();
        for stack in &goal_stacks {
            for pair in stack.windows(2) {
                goal_support[pair[1] as usize] = pair[0];
            }
        }
        goal_stacks.sort_unstable();
        Some(Self {
            names,
            index,
            sizes,
            positions: state.position_count(),
            size_order: cs.enforces_size_order(),
            goal_support,
            goal_stacks,
        })
    }

    pub fn block_count(&self) -> usize {
        self.names.len()
    }

    pub fn goal_stack_count(&self) -> usize {
        self.goal_stacks.len()
    }

    pub fn positions(&self) -> usize {
        self.positions
    }

    pub fn node(&self, state: &WorldState) -> Node {
        let mut node = Node {
            stacks: state
                .positions()
                .iter()
                .map(|s| s.iter().map(|n| self.index[n]).collect())
                .collect(),
            held: state.gripper().held().map(|n| self.index[n]),
        };
        node.canonicalize();
        node
    }

    pub fn is_goal(&self, node: &Node) -> bool {
        node.held.is_none() && node.stacks == self.goal_stacks
    }

    /// Blocks not in-position; a held block counts as misplaced.
    pub fn misplaced(&self, node: &Node) -> usize {
        let mut placed = 0;
        for stack in &node.stacks {
            let mut below = TABLE;
            for &block in stack {
                if self.goal_support[block as usize] != below {
                    break;
                }
                placed += 1;
                below = block;
            }
        }
        self.block_count() - placed
    }

    /// Admissible and consistent lower bound in primitive actions: every
    /// misplaced block on the table needs a grasp and a placement, a held
    /// one at least a placement.
    pub fn heuristic(&self, node: &Node) -> usize {
        let held = usize::from(node.held.is_some());
        2 * (self.misplaced(node) - held) + held
    }

    /// Appends every legal successor in a deterministic order.
    pub fn successors(&self, node: &Node, out: &mut Vec<(Move, Node)>) {
        match node.held {
            None => {
                for (i, stack) in node.stacks.iter().enumerate() {
                    let mut next = node.clone();
                    let top = next.stacks[i].pop().expect("stacks are nonempty");
                    next.held = Some(top);
                    let mv = match stack.len() {
                        1 => Move::PickUp(top),
                        n => Move::Unstack(top, stack[n - 2]),
                    };
                    next.canonicalize();
                    out.push((mv, next));
                }
            }
            Some(held) => {
                if node.stacks.len() < self.positions {
                    let mut next = node.clone();
                    next.held = None;
                    next.stacks.push(vec![held]);
                    next.canonicalize();
                    out.push((Move::PutDown(held), next));
                }
                for i in 0..node.stacks.len() {
                    let top = *node.stacks[i].last().expect("stacks are nonempty");
                    if self.size_order && self.sizes[held as usize] > self.sizes[top as usize] {
                        continue;
                    }
                    let mut next = node.clone();
                    next.held = None;
                    next.stacks[i].push(held);
                    next.canonicalize();
                    out.push((Move::Stack(held, top), next));
                }
            }
        }
    }

    pub fn action(&self, mv: Move) -> Action {
        let name = |id: Id| self.names[id as usize].clone();
        match mv {
            Move::PickUp(x) => Action::pick_up(name(x)),
            Move::PutDown(x) => Action::put_down(name(x)),
            Move::Stack(x, y) => Action::stack(name(x), name(y)),
            Move::Unstack(x, y) => Action::unstack(name(x), name(y)),
        }
    }

    #[cfg(test)]
    pub fn gripper(&self, node: &Node) -> crate::domain::GripperStatus {
        use crate::domain::GripperStatus;
        node.held.map_or(GripperStatus::Idle, |h| {
            GripperStatus::Holding(self.names[h as usize].clone())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Block, GripperStatus};

    #[test]
    fn key_round_trip() {
        let node = Node {
            stacks: vec![vec![0, 2], vec![1]],
            held: Some(3),
        };
        assert_eq!(Node::from_key(&node.key()), node);
        let idle = Node {
            stacks: vec![],
            held: None,
        };
        assert_eq!(Node::from_key(&idle.key()), idle);
    }

    #[test]
    fn successors_respect_capacity_and_sizes() {
        let st = WorldState::new(
            [Block::new("A", 1), Block::new("B", 3), Block::new("C", 2)],
            vec![vec!["A".into()], vec!["C".into()]],
            GripperStatus::Holding("B".into()),
        )
        .unwrap();
        let goal = GoalSpec::new(vec![vec!["B".into(), "C".into(), "A".into()]]);
        let base = CompactProblem::new(&st, &goal, ConstraintSetId::Base).unwrap();
        let mut out = Vec::new();
        base.successors(&base.node(&st), &mut out);
        // two positions, both full: only stacking on A or C
        assert_eq!(out.len(), 2);
        assert_eq!(base.gripper(&out[0].1), GripperStatus::Idle);

        let sized = CompactProblem::new(&st, &goal, ConstraintSetId::BlockSize).unwrap();
        out.clear();
        sized.successors(&sized.node(&st), &mut out);
        assert!(out.is_empty(), "B (3) fits on neither A (1) nor C (2)");
    }
}
