//! Property tests over randomly drawn small worlds.

use blocksbench_core::constraints::{observe, validate, ConstraintSetId, UNKNOWN};
use blocksbench_core::domain::{
    block_name, in_position_blocks, is_goal, misplaced_count, Action, Block, GoalSpec,
    GripperStatus, WorldState,
};
use blocksbench_core::fsm::{run_action, GripperPhase};
use blocksbench_core::planner::{self, Budgets, SearchMethod, SolveOptions, SolveResult};
use blocksbench_core::verifier::{verify_plan, Plan, PlanVerdict};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn arrangement(rng: &mut ChaCha8Rng, names: &[String], positions: usize) -> Vec<Vec<String>> {
    let mut order = names.to_vec();
    order.shuffle(rng);
    let mut table = vec![Vec::new(); positions];
    for name in order {
        let slot = rng.gen_range(0..positions);
        table[slot].push(name);
    }
    table
}

fn world(seed: u64, blocks: usize, positions: usize, sized: bool) -> (WorldState, GoalSpec) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..blocks).map(block_name).collect();
    let registry: Vec<Block> = names
        .iter()
        .map(|n| Block::new(n.clone(), if sized { rng.gen_range(1..=3) } else { 1 }))
        .collect();
    let mut table = arrangement(&mut rng, &names, positions);
    if sized {
        for stack in &mut table {
            stack.sort_by_key(|n| {
                std::cmp::Reverse(registry.iter().find(|b| &b.name == n).unwrap().size)
            });
        }
    }
    let state = WorldState::new(registry, table, GripperStatus::Idle).unwrap();
    let goal: Vec<Vec<String>> = arrangement(&mut rng, &names, positions)
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    (state, GoalSpec::new(goal))
}

fn legal_actions(state: &WorldState, cs: ConstraintSetId) -> Vec<Action> {
    let names: Vec<String> = state.blocks().map(|b| b.name.clone()).collect();
    let mut all = Vec::new();
    for x in &names {
        all.push(Action::pick_up(x));
        all.push(Action::put_down(x));
        for y in &names {
            if x != y {
                all.push(Action::stack(x, y));
                all.push(Action::unstack(x, y));
            }
        }
    }
    all.retain(|a| validate(state, a, cs).is_ok());
    all
}

/// Random legal walk of up to `len` steps.
fn walk(state: &WorldState, cs: ConstraintSetId, seed: u64, len: usize) -> Vec<Action> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut current = state.clone();
    let mut plan = Vec::new();
    for _ in 0..len {
        let options = legal_actions(&current, cs);
        let Some(action) = options.choose(&mut rng) else {
            break;
        };
        current = current.apply(action).unwrap();
        plan.push(action.clone());
    }
    plan
}

fn cs_strategy() -> impl Strategy<Value = ConstraintSetId> {
    prop_oneof![
        Just(ConstraintSetId::Base),
        Just(ConstraintSetId::BlockSize),
        Just(ConstraintSetId::PartialObservability),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn bfs_and_ida_agree_and_plans_verify(
        seed in any::<u64>(), blocks in 3usize..=5, positions in 3usize..=4, cs in cs_strategy()
    ) {
        let (state, goal) = world(seed, blocks, positions, cs.enforces_size_order());
        let run = |method| planner::solve_with(&state, &goal, cs, &SolveOptions {
            method,
            ..SolveOptions::default()
        }).unwrap();
        let bfs = run(SearchMethod::Bfs);
        let ida = run(SearchMethod::IdaStar);
        match (&bfs, &ida) {
            (SolveResult::Solved { plan: a, .. }, SolveResult::Solved { plan: b, .. }) => {
                prop_assert_eq!(a.len(), b.len());
                for plan in [a, b] {
                    prop_assert!(verify_plan(&state, &goal, plan, cs).reaches_goal());
                }
                let misplaced = misplaced_count(&state, &goal).unwrap();
                prop_assert!(a.len() >= 2 * misplaced);
            }
            (SolveResult::Unsolvable { .. }, SolveResult::Unsolvable { .. }) => {}
            _ => prop_assert!(false, "engines disagree: {:?} vs {:?}", bfs, ida),
        }
    }

    #[test]
    fn permuting_whole_stacks_preserves_optimal_length(
        seed in any::<u64>(), blocks in 3usize..=5, shuffle_seed in any::<u64>()
    ) {
        let (state, goal) = world(seed, blocks, 4, false);
        let mut table = state.positions().to_vec();
        table.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle_seed));
        let permuted = WorldState::new(state.blocks().cloned(), table, GripperStatus::Idle).unwrap();
        let length = |s: &WorldState| {
            planner::min_solution_length(s, &goal, ConstraintSetId::Base, Budgets::default()).ok()
        };
        prop_assert_eq!(length(&state), length(&permuted));
        prop_assert_eq!(misplaced_count(&state, &goal), misplaced_count(&permuted, &goal));
    }

    #[test]
    fn zero_misplaced_iff_goal(seed in any::<u64>(), blocks in 3usize..=6, positions in 3usize..=5) {
        let (state, goal) = world(seed, blocks, positions, false);
        prop_assert_eq!(misplaced_count(&state, &goal).unwrap() == 0, is_goal(&state, &goal));
        let target = WorldState::new(
            state.blocks().cloned(),
            {
                let mut t = goal.stacks.clone();
                t.resize(positions.max(goal.stacks.len()), Vec::new());
                t
            },
            GripperStatus::Idle,
        ).unwrap();
        prop_assert!(is_goal(&target, &goal));
        prop_assert_eq!(in_position_blocks(&target, &goal).len(), blocks);
    }

    #[test]
    fn verification_never_mutates_and_rejects_at_first_bad_step(
        seed in any::<u64>(), cs in cs_strategy(), cut in 0usize..12, junk in 0usize..4
    ) {
        let (state, goal) = world(seed, 5, 3, cs.enforces_size_order());
        let snapshot = state.clone();
        let mut steps = walk(&state, cs, seed ^ 0x5eed, 12);
        let cut = cut.min(steps.len());
        steps.truncate(cut);
        let bad = [Action::pick_up("A"), Action::put_down("B"), Action::stack("C", "D"), Action::unstack("E", "A")];
        steps.push(bad[junk].clone());
        let verdict = verify_plan(&state, &goal, &Plan::new(steps.clone()), cs);
        prop_assert_eq!(&state, &snapshot);
        let mut current = state.clone();
        let mut expected = None;
        for (i, step) in steps.iter().enumerate() {
            if validate(&current, step, cs).is_err() {
                expected = Some(i);
                break;
            }
            current = current.apply(step).unwrap();
        }
        match verdict {
            PlanVerdict::Rejected { first_bad_index, .. } => prop_assert_eq!(Some(first_bad_index), expected),
            PlanVerdict::Verified { reaches_goal, .. } => {
                prop_assert_eq!(expected, None);
                prop_assert_eq!(reaches_goal, is_goal(&current, &goal));
            }
        }
    }

    #[test]
    fn walks_preserve_invariants_and_fsm_tracks_gripper(
        seed in any::<u64>(), cs in cs_strategy(), positions in 3usize..=5
    ) {
        let (state, _) = world(seed, 6, positions, cs.enforces_size_order());
        let mut current = state.clone();
        let mut phase = GripperPhase::Idle;
        for action in walk(&state, cs, seed.rotate_left(7), 40) {
            let phases = run_action(&phase, &action).unwrap();
            phase = phases.last().unwrap().clone();
            current = current.apply(&action).unwrap();
            prop_assert_eq!(phase.block(), current.gripper().held());
            let placed: usize = current.positions().iter().map(Vec::len).sum::<usize>()
                + usize::from(current.gripper().held().is_some());
            prop_assert_eq!(placed, 6);
            prop_assert_eq!(current.position_count(), positions);
            if cs.enforces_size_order() {
                for stack in current.positions() {
                    for pair in stack.windows(2) {
                        prop_assert!(current.size_of(&pair[1]) <= current.size_of(&pair[0]));
                    }
                }
            }
            let seen = observe(&current, cs);
            for (shown, real) in seen.stacks.iter().zip(current.positions()) {
                let hidden = if cs.masks_observation() { real.len().saturating_sub(2) } else { 0 };
                prop_assert_eq!(shown.iter().filter(|b| *b == UNKNOWN).count(), hidden);
                prop_assert_eq!(&shown[hidden..], &real[hidden..]);
            }
        }
    }
}
