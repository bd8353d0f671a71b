//! The shipped 50-scenario suite: ten frozen generator specs per category.
//! Category 4 also carries two Towers of Hanoi encodings.

use crate::constraints::ConstraintSetId;
use crate::domain::{Block, GoalSpec, GripperStatus, WorldState};
use crate::planner::Budgets;

use super::generate::{generate_scenario, GenSpec, GenerationError};
use super::{recompute_metadata, Category, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuiteEntry {
    Random {
        category: u8,
        blocks: usize,
        positions: usize,
        constraint_set: Option<ConstraintSetId>,
        seed: u64,
    },
    /// Disks `D1 < D2 < ...` stacked on one position, to be moved onto a
    /// fixed base block `T` larger than every disk; three positions.
    Hanoi { disks: usize },
}

const fn random(category: u8, blocks: usize, positions: usize, seed: u64) -> SuiteEntry {
    SuiteEntry::Random {
        category,
        blocks,
        positions,
        constraint_set: None,
        seed,
    }
}

const fn sized_impossible(blocks: usize, positions: usize, seed: u64) -> SuiteEntry {
    SuiteEntry::Random {
        category: 3,
        blocks,
        positions,
        constraint_set: Some(ConstraintSetId::BlockSize),
        seed,
    }
}

/// In id order: `cat1/s01` .. `cat5/s10`.
pub const SUITE: [SuiteEntry; 50] = [
    random(1, 3, 3, 101),
    random(1, 4, 3, 102),
    random(1, 5, 4, 103),
    random(1, 6, 3, 104),
    random(1, 8, 5, 105),
    random(1, 10, 4, 106),
    random(1, 12, 6, 107),
    random(1, 14, 5, 108),
    random(1, 17, 4, 109),
    random(1, 20, 6, 110),
    random(2, 4, 3, 201),
    random(2, 5, 3, 202),
    random(2, 6, 4, 203),
    random(2, 7, 3, 204),
    random(2, 8, 4, 205),
    random(2, 9, 3, 206),
    random(2, 10, 5, 207),
    random(2, 12, 4, 208),
    random(2, 14, 6, 209),
    random(2, 16, 5, 210),
    random(3, 4, 3, 301),
    random(3, 5, 3, 302),
    random(3, 5, 4, 303),
    random(3, 6, 3, 304),
    random(3, 6, 4, 305),
    random(3, 7, 5, 306),
    sized_impossible(4, 3, 307),
    sized_impossible(5, 3, 308),
    sized_impossible(6, 4, 309),
    sized_impossible(7, 3, 310),
    SuiteEntry::Hanoi { disks: 3 },
    SuiteEntry::Hanoi { disks: 5 },
    random(4, 4, 3, 403),
    random(4, 5, 3, 404),
    random(4, 6, 3, 405),
    random(4, 7, 4, 406),
    random(4, 8, 3, 407),
    random(4, 9, 4, 408),
    random(4, 10, 3, 409),
    random(4, 12, 4, 410),
    random(5, 5, 3, 501),
    random(5, 6, 3, 502),
    random(5, 7, 4, 503),
    random(5, 8, 3, 504),
    random(5, 9, 4, 505),
    random(5, 10, 5, 506),
    random(5, 11, 3, 507),
    random(5, 12, 4, 508),
    random(5, 14, 5, 509),
    random(5, 16, 6, 510),
];

/// Towers of Hanoi with `disks` disks as a category-4 scenario.
pub fn hanoi_scenario(id: &str, disks: usize) -> Scenario {
    let disk = |i: usize| format!("D{i}");
    let mut blocks: Vec<Block> = (1..=disks).map(|i| Block::new(disk(i), i as u32)).collect();
    blocks.push(Block::new("T", disks as u32 + 1));
    let tower: Vec<String> = (1..=disks).rev().map(disk).collect();
    let initial = WorldState::new(
        blocks,
        vec![tower.clone(), Vec::new(), vec!["T".to_string()]],
        GripperStatus::Idle,
    )
    .expect("hanoi arrangement is well formed");
    let mut goal = vec!["T".to_string()];
    goal.extend(tower);
    let mut scenario = Scenario {
        id: id.to_string(),
        category: Category::new(4),
        constraint_set: ConstraintSetId::BlockSize,
        initial,
        goal: GoalSpec::new(vec![goal]),
        metadata: None,
    };
    scenario.metadata =
        Some(recompute_metadata(&scenario, Budgets::default()).expect("hanoi instances are small"));
    scenario
}

fn build_entry(id: String, entry: &SuiteEntry) -> Result<Scenario, GenerationError> {
    match *entry {
        SuiteEntry::Hanoi { disks } => Ok(hanoi_scenario(&id, disks)),
        SuiteEntry::Random {
            category,
            blocks,
            positions,
            constraint_set,
            seed,
        } => {
            let mut spec = GenSpec::new(Category(category), blocks, positions, seed);
            spec.constraint_set = constraint_set;
            let mut scenario = generate_scenario(&spec)?;
            scenario.id = id;
            Ok(scenario)
        }
    }
}

/// Suite id of the `index`-th entry (0-based).
pub fn suite_id(index: usize) -> String {
    format!("cat{}/s{:02}", index / 10 + 1, index % 10 + 1)
}

/// Regenerates the suite entry at `index`.
pub fn build_suite_entry(index: usize) -> Result<Scenario, GenerationError> {
    build_entry(suite_id(index), &SUITE[index])
}

/// Regenerates all 50 scenarios.
pub fn build_suite() -> Result<Vec<Scenario>, GenerationError> {
    (0..SUITE.len()).map(build_suite_entry).collect()
}
