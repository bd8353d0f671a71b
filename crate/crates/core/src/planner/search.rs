//! Search engines over canonical nodes: breadth-first, IDA*, and a greedy
//! best-first fallback used only for upper bounds.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use indexmap::IndexSet;

use super::compact::{CompactProblem, Move, Node};
use super::Budgets;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Outcome {
    Found(Vec<Move>),
    /// The reachable set was closed without meeting the goal.
    Exhausted {
        explored: usize,
    },
    Limit {
        explored: usize,
        depth: usize,
    },
}

fn trace(parents: &[(u32, Option<Move>)], mut at: usize) -> Vec<Move> {
    let mut moves = Vec::new();
    while let (parent, Some(mv)) = parents[at] {
        moves.push(mv);
        at = parent as usize;
    }
    moves.reverse();
    moves
}

/// Level-by-level BFS with duplicate detection on canonical keys.
pub(crate) fn bfs(problem: &CompactProblem, start: Node, budgets: &Budgets) -> Outcome {
    if problem.is_goal(&start) {
        return Outcome::Found(Vec::new());
    }
    let mut seen: IndexSet<Box<[u8]>> = IndexSet::new();
    let mut parents: Vec<(u32, Option<Move>)> = Vec::new();
    seen.insert(start.key());
    parents.push((0, None));

    let mut level_start = 0;
    let mut depth = 0;
    let mut successors = Vec::new();
    while level_start < seen.len() {
        let level_end = seen.len();
        if depth >= budgets.max_depth {
            return Outcome::Limit {
                explored: seen.len(),
                depth,
            };
        }
        for at in level_start..level_end {
            let node = Node::from_key(&seen[at]);
            successors.clear();
            problem.successors(&node, &mut successors);
            for (mv, next) in successors.drain(..) {
                let (index, fresh) = seen.insert_full(next.key());
                if !fresh {
                    continue;
                }
                parents.push((at as u32, Some(mv)));
                if problem.is_goal(&next) {
                    return Outcome::Found(trace(&parents, index));
                }
                if seen.len() > budgets.max_states {
                    return Outcome::Limit {
                        explored: seen.len(),
                        depth: depth + 1,
                    };
                }
            }
        }
        level_start = level_end;
        depth += 1;
    }
    Outcome::Exhausted {
        explored: seen.len(),
    }
}

/// IDA* with a per-iteration transposition table keyed on canonical nodes.
///
/// A node already expanded in the current iteration at a cost no larger
/// than the current one is skipped. Nodes cut off by the bound are recorded;
/// a cut-off node that was also expanded at no greater cost is not a real
/// frontier. An iteration that leaves no real frontier has expanded a set
/// closed under successors, so the goal is unreachable.
pub(crate) fn ida_star(problem: &CompactProblem, start: Node, budgets: &Budgets) -> Outcome {
    let mut search = Ida {
        problem,
        budgets,
        table: HashMap::new(),
        frontier: HashMap::new(),
        path: Vec::new(),
        over_budget: false,
    };
    let mut bound = problem.heuristic(&start);
    loop {
        if bound > budgets.max_depth {
            return Outcome::Limit {
                explored: search.table.len(),
                depth: bound,
            };
        }
        search.table.clear();
        search.frontier.clear();
        search.path.clear();
        if search.visit(&start, 0, bound) {
            return Outcome::Found(std::mem::take(&mut search.path));
        }
        if search.over_budget {
            return Outcome::Limit {
                explored: search.table.len(),
                depth: bound,
            };
        }
        match search.next_bound() {
            Some(next) => bound = next,
            None => {
                return Outcome::Exhausted {
                    explored: search.table.len(),
                }
            }
        }
    }
}

struct Ida<'a> {
    problem: &'a CompactProblem,
    budgets: &'a Budgets,
    /// Expanded nodes and the cheapest cost they were expanded at.
    table: HashMap<Box<[u8]>, usize>,
    /// Nodes cut off by the bound and the cheapest cost they were reached at.
    frontier: HashMap<Box<[u8]>, usize>,
    path: Vec<Move>,
    over_budget: bool,
}

impl Ida<'_> {
    fn visit(&mut self, node: &Node, cost: usize, bound: usize) -> bool {
        if cost + self.problem.heuristic(node) > bound {
            let slot = self.frontier.entry(node.key()).or_insert(cost);
            *slot = (*slot).min(cost);
            return false;
        }
        if self.problem.is_goal(node) {
            return true;
        }
        let key = node.key();
        if self.table.get(&key).is_some_and(|&seen| seen <= cost) {
            return false;
        }
        self.table.insert(key, cost);
        if self.table.len() + self.frontier.len() > self.budgets.max_states {
            self.over_budget = true;
            return false;
        }

        let mut successors = Vec::new();
        self.problem.successors(node, &mut successors);
        // Expand the most promising children first; ties keep generation order.
        successors.sort_by_key(|(_, next)| self.problem.heuristic(next));
        for (mv, next) in successors {
            self.path.push(mv);
            if self.visit(&next, cost + 1, bound) {
                return true;
            }
            self.path.pop();
            if self.over_budget {
                return false;
            }
        }
        false
    }

    /// Smallest f-value on the real frontier, `None` if there is none.
    fn next_bound(&self) -> Option<usize> {
        self.frontier
            .iter()
            .filter(|(key, &cost)| !self.table.get(*key).is_some_and(|&seen| seen <= cost))
            .map(|(key, &cost)| cost + self.problem.heuristic(&Node::from_key(key)))
            .min()
    }
}

/// Greedy best-first search on the heuristic. Finds some plan quickly on
/// instances too large for the optimal engines; the plan is not optimal.
pub(crate) fn greedy(problem: &CompactProblem, start: Node, budgets: &Budgets) -> Outcome {
    let mut seen: IndexSet<Box<[u8]>> = IndexSet::new();
    let mut parents: Vec<(u32, Option<Move>)> = Vec::new();
    let mut open = BinaryHeap::new();
    let (start_index, _) = seen.insert_full(start.key());
    parents.push((0, None));
    open.push(Reverse((problem.heuristic(&start), start_index)));
    let mut successors = Vec::new();
    while let Some(Reverse((_, at))) = open.pop() {
        let node = Node::from_key(&seen[at]);
        if problem.is_goal(&node) {
            return Outcome::Found(trace(&parents, at));
        }
        successors.clear();
        problem.successors(&node, &mut successors);
        for (mv, next) in successors.drain(..) {
            let (index, fresh) = seen.insert_full(next.key());
            if fresh {
                parents.push((at as u32, Some(mv)));
                open.push(Reverse((problem.heuristic(&next), index)));
            }
        }
        if seen.len() > budgets.max_states {
            return Outcome::Limit {
                explored: seen.len(),
                depth: 0,
            };
        }
    }
    Outcome::Exhausted {
        explored: seen.len(),
    }
}
