//! Checks of shipped scenarios against the suite envelope and their
//! category's defining property.

use crate::constraints::ConstraintSetId;
use crate::planner::{self, Budgets, SolveResult};

use super::generate::{
    MAX_BLOCKS, MAX_LENGTH, MAX_MISPLACED, MAX_NON_CONSTRUCTIVE, MAX_POSITIONS, MIN_BLOCKS,
    MIN_LENGTH, MIN_POSITIONS,
};
use super::{recompute_metadata, Category, Scenario};

pub const SUITE_SIZE: usize = 50;
pub const PER_CATEGORY: usize = 10;

fn optimal_length(s: &Scenario, cs: ConstraintSetId, budgets: Budgets) -> Option<usize> {
    match planner::solve(&s.initial, &s.goal, cs, budgets).ok()? {
        SolveResult::Solved {
            plan,
            optimal: true,
        } => Some(plan.len()),
        _ => None,
    }
}

/// Problems with one categorized scenario; empty when it is sound.
pub fn audit_scenario(s: &Scenario, budgets: Budgets) -> Vec<String> {
    let mut problems = Vec::new();
    let Some(category) = s.category else {
        return vec![String::from("no category")];
    };
    let meta = match recompute_metadata(s, budgets) {
        Ok(meta) => meta,
        Err(e) => return vec![format!("metadata cannot be recomputed: {e}")],
    };
    if s.metadata.as_ref() != Some(&meta) {
        problems.push(format!(
            "stored metadata {:?} differs from recomputed {meta:?}",
            s.metadata
        ));
    }
    let mut check = |ok: bool, what: String| {
        if !ok {
            problems.push(what);
        }
    };
    let blocks = s.block_count();
    check(
        (MIN_BLOCKS..=MAX_BLOCKS).contains(&blocks),
        format!("{blocks} blocks, outside {MIN_BLOCKS}..={MAX_BLOCKS}"),
    );
    let positions = s.positions();
    check(
        (MIN_POSITIONS..=MAX_POSITIONS).contains(&positions),
        format!("{positions} positions, outside {MIN_POSITIONS}..={MAX_POSITIONS}"),
    );
    let m = meta.misplaced_blocks;
    check(
        m <= MAX_MISPLACED,
        format!("{m} misplaced blocks, above {MAX_MISPLACED}"),
    );
    check(
        category.allows(s.constraint_set),
        format!(
            "constraint set {} does not fit the category",
            s.constraint_set
        ),
    );
    if !category.is_solvable() {
        check(
            meta.min_solution_length.is_none(),
            String::from("an impossible scenario has a plan"),
        );
        return problems;
    }
    let Some(length) = meta
        .min_solution_length
        .filter(|_| !meta.length_is_upper_bound)
    else {
        problems.push(String::from("no proven optimal plan"));
        return problems;
    };
    check(
        (MIN_LENGTH..=MAX_LENGTH).contains(&length),
        format!("optimal length {length}, outside {MIN_LENGTH}..={MAX_LENGTH}"),
    );
    let nc = meta.non_constructive_in_optimal.unwrap_or(0);
    check(
        nc <= MAX_NON_CONSTRUCTIVE,
        format!("{nc} non-constructive actions, above {MAX_NON_CONSTRUCTIVE}"),
    );
    match category.get() {
        1 => check(
            length == 2 * m,
            format!("length {length} is not twice the {m} misplaced blocks"),
        ),
        2 => check(
            length > 2 * m,
            format!("length {length} does not exceed twice the {m} misplaced blocks"),
        ),
        4 => {
            let base = optimal_length(s, ConstraintSetId::Base, budgets);
            check(
                base.is_some_and(|b| length > b),
                format!("size ordering does not lengthen the plan ({length} vs {base:?})"),
            );
        }
        5 => check(
            s.initial.positions().iter().any(|p| p.len() >= 3),
            String::from("no stack is tall enough to hide a block"),
        ),
        _ => {}
    }
    problems
}

/// Shape problems of a whole suite: total size and per-category counts.
pub fn audit_suite_shape<'a>(scenarios: impl IntoIterator<Item = &'a Scenario>) -> Vec<String> {
    let mut counts = [0usize; 5];
    let mut total = 0;
    let mut problems = Vec::new();
    for s in scenarios {
        total += 1;
        match s.category {
            Some(c) => counts[usize::from(c.get()) - 1] += 1,
            None => problems.push(format!("{} has no category", s.id)),
        }
    }
    if total != SUITE_SIZE {
        problems.push(format!("{total} scenarios, expected {SUITE_SIZE}"));
    }
    for (c, n) in Category::ALL.iter().zip(counts) {
        if n != PER_CATEGORY {
            problems.push(format!(
                "category {} has {n} scenarios, expected {PER_CATEGORY}",
                c.get()
            ));
        }
    }
    problems
}
