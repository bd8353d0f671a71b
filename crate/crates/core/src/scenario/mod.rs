//! Scenario documents: schema, loading with pointer-addressed errors,
//! metadata recomputation, the seeded generator and the shipped suite.
//!
//! Field order of the serialized document is fixed:
//! `id, category, constraint_set, positions, blocks, initial, goal, metadata`.
//! Stacks are bottom-to-top. `category` and `metadata` may be omitted only in
//! custom documents passed inline to a live session.

mod audit;
mod generate;
mod suite;

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_path_to_error::Segment;
use thiserror::Error;

use crate::constraints::ConstraintSetId;
use crate::domain::{misplaced_count, Block, DomainError, GoalSpec, GripperStatus, WorldState};
use crate::planner::{self, Budgets, PlannerError, SolveResult};

pub use audit::{audit_scenario, audit_suite_shape, PER_CATEGORY, SUITE_SIZE};
pub use generate::{generate_scenario, GenSpec, GenerationError, SizeProfile};
pub use suite::{build_suite, build_suite_entry, hanoi_scenario, suite_id, SuiteEntry, SUITE};

/// One of the five complexity categories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Category(u8);

impl Category {
    pub const ALL: [Category; 5] = [
        Category(1),
        Category(2),
        Category(3),
        Category(4),
        Category(5),
    ];

    pub fn new(n: u8) -> Option<Self> {
        (1..=5).contains(&n).then_some(Self(n))
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn is_solvable(self) -> bool {
        self.0 != 3
    }

    /// Constraint sets a scenario of this category may use.
    pub fn allows(self, cs: ConstraintSetId) -> bool {
        match self.0 {
            1 | 2 => cs == ConstraintSetId::Base,
            3 => cs != ConstraintSetId::PartialObservability,
            4 => cs == ConstraintSetId::BlockSize,
            _ => cs == ConstraintSetId::PartialObservability,
        }
    }
}

impl TryFrom<u8> for Category {
    type Error = String;

    fn try_from(n: u8) -> Result<Self, String> {
        Category::new(n).ok_or_else(|| format!("category must be within 1..=5, got {n}"))
    }
}

impl From<Category> for u8 {
    fn from(c: Category) -> u8 {
        c.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioMetadata {
    pub min_solution_length: Option<usize>,
    pub length_is_upper_bound: bool,
    pub block_count: usize,
    pub stack_positions: usize,
    pub misplaced_blocks: usize,
    pub non_constructive_in_optimal: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub id: String,
    /// `None` for custom documents.
    pub category: Option<Category>,
    pub constraint_set: ConstraintSetId,
    pub initial: WorldState,
    pub goal: GoalSpec,
    pub metadata: Option<ScenarioMetadata>,
}

impl Scenario {
    pub fn positions(&self) -> usize {
        self.initial.position_count()
    }

    pub fn block_count(&self) -> usize {
        self.initial.block_count()
    }

    /// Category label used on the wire: `"1"`..`"5"` or `"custom"`.
    pub fn category_label(&self) -> String {
        self.category
            .map_or_else(|| String::from("custom"), |c| c.to_string())
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&ScenarioDoc::from(self))
            .expect("scenario documents always serialize");
        text.push('\n');
        text
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDoc {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    category: Option<Category>,
    constraint_set: ConstraintSetId,
    positions: usize,
    blocks: Vec<Block>,
    initial: InitialDoc,
    goal: GoalSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    metadata: Option<ScenarioMetadata>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialDoc {
    stacks: Vec<Vec<String>>,
    gripper: GripperStatus,
}

impl From<&Scenario> for ScenarioDoc {
    fn from(s: &Scenario) -> Self {
        ScenarioDoc {
            id: s.id.clone(),
            category: s.category,
            constraint_set: s.constraint_set,
            positions: s.positions(),
            blocks: s.initial.blocks().cloned().collect(),
            initial: InitialDoc {
                stacks: s.initial.positions().to_vec(),
                gripper: s.initial.gripper().clone(),
            },
            goal: s.goal.clone(),
            metadata: s.metadata.clone(),
        }
    }
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScenarioDoc::from(self).serialize(serializer)
    }
}

/// A document that failed to parse or validate, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("schema error at {pointer}: {message}")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

impl SchemaError {
    fn at(pointer: impl Into<String>, message: impl fmt::Display) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.to_string(),
        }
    }
}

fn pointer_of(path: &serde_path_to_error::Path) -> String {
    let mut pointer = String::new();
    for segment in path.iter() {
        pointer.push('/');
        match segment {
            Segment::Seq { index } => pointer.push_str(&index.to_string()),
            Segment::Map { key } => pointer.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => pointer.push_str(variant),
            Segment::Unknown => pointer.push('?'),
        }
    }
    if pointer.is_empty() {
        pointer.push('/');
    }
    pointer
}

/// Loads a catalog scenario; `category` and `metadata` are required.
pub fn load_scenario(bytes: &[u8]) -> Result<Scenario, SchemaError> {
    let scenario = load_custom_scenario(bytes)?;
    if scenario.category.is_none() {
        return Err(SchemaError::at("/category", "missing field `category`"));
    }
    if scenario.metadata.is_none() {
        return Err(SchemaError::at("/metadata", "missing field `metadata`"));
    }
    Ok(scenario)
}

/// Loads a scenario document in which `category` and `metadata` are optional.
pub fn load_custom_scenario(bytes: &[u8]) -> Result<Scenario, SchemaError> {
    let de = &mut serde_json::Deserializer::from_slice(bytes);
    let doc: ScenarioDoc = serde_path_to_error::deserialize(de)
        .map_err(|e| SchemaError::at(pointer_of(e.path()), e.inner()))?;
    from_doc(doc)
}

pub fn scenario_from_value(value: serde_json::Value) -> Result<Scenario, SchemaError> {
    let doc: ScenarioDoc = serde_path_to_error::deserialize(value)
        .map_err(|e| SchemaError::at(pointer_of(e.path()), e.inner()))?;
    from_doc(doc)
}

fn from_doc(doc: ScenarioDoc) -> Result<Scenario, SchemaError> {
    if doc.id.is_empty() {
        return Err(SchemaError::at("/id", "id must be nonempty"));
    }
    if doc.positions == 0 {
        return Err(SchemaError::at(
            "/positions",
            "at least one position is required",
        ));
    }
    if doc.initial.stacks.len() != doc.positions {
        return Err(SchemaError::at(
            "/initial/stacks",
            format!(
                "expected {} stacks (one per position), found {}",
                doc.positions,
                doc.initial.stacks.len()
            ),
        ));
    }
    let mut seen = std::collections::HashSet::new();
    for (i, block) in doc.blocks.iter().enumerate() {
        if !seen.insert(block.name.as_str()) {
            return Err(SchemaError::at(
                format!("/blocks/{i}/name"),
                format!("duplicate block `{}`", block.name),
            ));
        }
    }
    let initial = WorldState::new(
        doc.blocks.iter().cloned(),
        doc.initial.stacks,
        doc.initial.gripper,
    )
    .map_err(|e| {
        let pointer = match e {
            DomainError::InvalidName(_) | DomainError::InvalidSize(_) => "/blocks",
            _ => "/initial",
        };
        SchemaError::at(pointer, e)
    })?;
    if doc.constraint_set.enforces_size_order() {
        let unordered = initial.positions().iter().position(|stack| {
            stack
                .windows(2)
                .any(|w| initial.size_of(&w[1]) > initial.size_of(&w[0]))
        });
        if let Some(i) = unordered {
            return Err(SchemaError::at(
                format!("/initial/stacks/{i}"),
                "under block_size no block may rest on a smaller one",
            ));
        }
    }
    if doc.goal.stacks.iter().any(Vec::is_empty) {
        return Err(SchemaError::at(
            "/goal/stacks",
            "goal stacks must be nonempty",
        ));
    }
    doc.goal
        .check_coverage(&initial)
        .map_err(|e| SchemaError::at("/goal", e))?;
    if let Some(category) = doc.category {
        if !category.allows(doc.constraint_set) {
            return Err(SchemaError::at(
                "/constraint_set",
                format!(
                    "category {category} cannot use constraint set `{}`",
                    doc.constraint_set
                ),
            ));
        }
        if category.is_solvable() && doc.goal.stacks.len() > doc.positions {
            return Err(SchemaError::at(
                "/goal/stacks",
                format!(
                    "{} goal stacks do not fit on {} positions",
                    doc.goal.stacks.len(),
                    doc.positions
                ),
            ));
        }
    }
    if let Some(meta) = &doc.metadata {
        if meta.block_count != initial.block_count() {
            return Err(SchemaError::at(
                "/metadata/block_count",
                format!(
                    "expected {}, found {}",
                    initial.block_count(),
                    meta.block_count
                ),
            ));
        }
        if meta.stack_positions != doc.positions {
            return Err(SchemaError::at(
                "/metadata/stack_positions",
                format!("expected {}, found {}", doc.positions, meta.stack_positions),
            ));
        }
    }
    let mut goal = doc.goal;
    if goal.description.is_empty() {
        goal = GoalSpec::new(goal.stacks);
    }
    Ok(Scenario {
        id: doc.id,
        category: doc.category,
        constraint_set: doc.constraint_set,
        initial,
        goal,
        metadata: doc.metadata,
    })
}

/// Recomputes metadata with the oracle. When the optimal search runs out of
/// budget, a greedy plan supplies an upper bound.
pub fn recompute_metadata(
    s: &Scenario,
    budgets: Budgets,
) -> Result<ScenarioMetadata, PlannerError> {
    let misplaced =
        misplaced_count(&s.initial, &s.goal).map_err(|_| PlannerError::BlockSetMismatch)?;
    let mut meta = ScenarioMetadata {
        min_solution_length: None,
        length_is_upper_bound: false,
        block_count: s.block_count(),
        stack_positions: s.positions(),
        misplaced_blocks: misplaced,
        non_constructive_in_optimal: None,
    };
    let result = match planner::solve(&s.initial, &s.goal, s.constraint_set, budgets)? {
        SolveResult::ResourceLimit { .. } => {
            planner::best_effort(&s.initial, &s.goal, s.constraint_set, budgets)?
        }
        other => other,
    };
    match result {
        SolveResult::Solved { plan, optimal } => {
            let stats = planner::plan_stats(&s.initial, &s.goal, s.constraint_set, &plan)?;
            meta.min_solution_length = Some(stats.length);
            meta.length_is_upper_bound = !optimal;
            meta.non_constructive_in_optimal = Some(stats.non_constructive);
        }
        SolveResult::Unsolvable { .. } => {}
        SolveResult::ResourceLimit {
            explored_states,
            depth_reached,
        } => {
            return Err(PlannerError::ResourceLimit {
                explored_states,
                depth_reached,
            })
        }
    }
    Ok(meta)
}

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Schema { path: PathBuf, source: SchemaError },
    #[error("{path}: file id `{found}` does not match its location (`{expected}`)")]
    IdMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },
}

/// Catalog entry served by scenario listings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub id: String,
    pub category: Category,
    pub constraint_set: ConstraintSetId,
    pub block_count: usize,
}

/// Read-only scenario collection ordered by id.
#[derive(Debug, Clone, Default)]
pub struct ScenarioStore {
    scenarios: Vec<Scenario>,
}

impl ScenarioStore {
    pub fn new(mut scenarios: Vec<Scenario>) -> Self {
        scenarios.sort_by(|a, b| a.id.cmp(&b.id));
        Self { scenarios }
    }

    /// Loads every `cat*/*.json` below `dir`. Ids must equal `cat{c}/{stem}`.
    pub fn load_dir(dir: &Path) -> Result<Self, StoreError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| StoreError::Io { path, source }
        };
        let mut scenarios = Vec::new();
        let mut categories: Vec<_> = fs::read_dir(dir)
            .map_err(io(dir))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(io(dir))?;
        categories.sort_by_key(|e| e.file_name());
        for category in categories {
            let cat_path = category.path();
            let cat_name = category.file_name().to_string_lossy().into_owned();
            if !cat_path.is_dir() || !cat_name.starts_with("cat") {
                continue;
            }
            let mut files: Vec<_> = fs::read_dir(&cat_path)
                .map_err(io(&cat_path))?
                .collect::<Result<Vec<_>, _>>()
                .map_err(io(&cat_path))?;
            files.sort_by_key(|e| e.file_name());
            for file in files {
                let path = file.path();
                if path.extension().and_then(|e| e.to_str()) != Some("json") {
                    continue;
                }
                let bytes = fs::read(&path).map_err(io(&path))?;
                let scenario = load_scenario(&bytes).map_err(|source| StoreError::Schema {
                    path: path.clone(),
                    source,
                })?;
                let stem = path.file_stem().unwrap_or_default().to_string_lossy();
                let expected = format!("{cat_name}/{stem}");
                if scenario.id != expected {
                    return Err(StoreError::IdMismatch {
                        path,
                        expected,
                        found: scenario.id,
                    });
                }
                scenarios.push(scenario);
            }
        }
        Ok(Self::new(scenarios))
    }

    /// The repository's `scenarios/` directory, overridable by
    /// `BLOCKSBENCH_SCENARIOS`.
    pub fn default_dir() -> PathBuf {
        std::env::var_os("BLOCKSBENCH_SCENARIOS")
            .map(PathBuf::from)
            .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios"))
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Scenario> {
        self.scenarios
            .binary_search_by(|s| s.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.scenarios[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scenario> {
        self.scenarios.iter()
    }

    pub fn in_category(&self, category: Category) -> impl Iterator<Item = &Scenario> {
        self.scenarios
            .iter()
            .filter(move |s| s.category == Some(category))
    }

    pub fn catalog(&self) -> Vec<CatalogEntry> {
        self.scenarios
            .iter()
            .filter_map(|s| {
                Some(CatalogEntry {
                    id: s.id.clone(),
                    category: s.category?,
                    constraint_set: s.constraint_set,
                    block_count: s.block_count(),
                })
            })
            .collect()
    }
}

/// Writes `scenario` to `dir/{id}.json`, creating the category directory.
pub fn write_scenario(dir: &Path, scenario: &Scenario) -> std::io::Result<PathBuf> {
    let path = dir.join(format!("{}.json", scenario.id));
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(&path, scenario.to_json())?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn minimal() -> serde_json::Value {
        json!({
            "id": "cat1/s00",
            "category": 1,
            "constraint_set": "base",
            "positions": 3,
            "blocks": [
                {"name": "A", "size": 1},
                {"name": "B", "size": 1},
                {"name": "C", "size": 1}
            ],
            "initial": {
                "stacks": [["A"], ["B"], ["C"]],
                "gripper": {"state": "idle"}
            },
            "goal": {
                "stacks": [["A", "B", "C"]],
                "description": "Place A on the table; stack B on A; stack C on B."
            },
            "metadata": {
                "min_solution_length": 4,
                "length_is_upper_bound": false,
                "block_count": 3,
                "stack_positions": 3,
                "misplaced_blocks": 2,
                "non_constructive_in_optimal": 2
            }
        })
    }

    fn load(value: &serde_json::Value) -> Result<Scenario, SchemaError> {
        load_scenario(value.to_string().as_bytes())
    }

    #[test]
    fn minimal_document_loads_and_round_trips() {
        let doc = minimal();
        let s = load(&doc).unwrap();
        assert_eq!(s.block_count(), 3);
        assert_eq!(s.category, Category::new(1));
        let text = s.to_json();
        assert!(text.ends_with("}\n"));
        let back: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
        let keys: Vec<_> = text
            .lines()
            .filter(|l| l.starts_with("  \""))
            .map(|l| l.trim().split('"').nth(1).unwrap().to_string())
            .collect();
        assert_eq!(
            keys,
            [
                "id",
                "category",
                "constraint_set",
                "positions",
                "blocks",
                "initial",
                "goal",
                "metadata"
            ]
        );
    }

    #[test]
    fn goal_missing_a_block_points_at_goal() {
        let mut doc = minimal();
        doc["blocks"]
            .as_array_mut()
            .unwrap()
            .push(json!({"name": "D", "size": 1}));
        doc["initial"]["stacks"][2] = json!(["C", "D"]);
        let err = load(&doc).unwrap_err();
        assert_eq!(err.pointer, "/goal");
    }

    #[test]
    fn type_errors_carry_a_pointer() {
        let mut doc = minimal();
        doc["blocks"][1]["size"] = json!("big");
        assert_eq!(load(&doc).unwrap_err().pointer, "/blocks/1/size");
        let mut doc = minimal();
        doc["category"] = json!(7);
        assert_eq!(load(&doc).unwrap_err().pointer, "/category");
        let mut doc = minimal();
        doc["initial"]["gripper"] = json!({"state": "flying"});
        assert_eq!(load(&doc).unwrap_err().pointer, "/initial/gripper/state");
    }

    #[test]
    fn structural_violations_are_located() {
        let mut doc = minimal();
        doc["constraint_set"] = json!("block_size");
        assert_eq!(load(&doc).unwrap_err().pointer, "/constraint_set");
        let mut doc = minimal();
        doc["initial"]["stacks"] = json!([["A"], ["B", "C"]]);
        assert_eq!(load(&doc).unwrap_err().pointer, "/initial/stacks");
        let mut doc = minimal();
        doc["blocks"][2]["name"] = json!("A");
        assert_eq!(load(&doc).unwrap_err().pointer, "/blocks/2/name");
        let mut doc = minimal();
        doc["goal"]["stacks"] = json!([["A"], ["B"], ["C"], []]);
        assert_eq!(load(&doc).unwrap_err().pointer, "/goal/stacks");
    }

    #[test]
    fn size_constrained_initial_stacks_must_be_ordered() {
        let mut doc = minimal();
        let obj = doc.as_object_mut().unwrap();
        obj.remove("category");
        obj.remove("metadata");
        doc["constraint_set"] = json!("block_size");
        doc["blocks"][0]["size"] = json!(2);
        doc["initial"]["stacks"] = json!([["A"], ["C", "B"], []]);
        assert!(load_custom_scenario(doc.to_string().as_bytes()).is_ok());
        doc["initial"]["stacks"] = json!([[], ["B", "A"], ["C"]]);
        let err = load_custom_scenario(doc.to_string().as_bytes()).unwrap_err();
        assert_eq!(err.pointer, "/initial/stacks/1");
    }

    #[test]
    fn custom_documents_may_omit_category_and_metadata() {
        let mut doc = minimal();
        let obj = doc.as_object_mut().unwrap();
        obj.remove("category");
        obj.remove("metadata");
        assert_eq!(load(&doc).unwrap_err().pointer, "/category");
        let s = load_custom_scenario(doc.to_string().as_bytes()).unwrap();
        assert_eq!(s.category_label(), "custom");
    }

    #[test]
    fn identity_metadata() {
        let mut doc = minimal();
        doc["goal"] = json!({"stacks": [["A"], ["B"], ["C"]], "description": ""});
        let s = load(&doc).unwrap();
        let meta = recompute_metadata(&s, Budgets::default()).unwrap();
        assert_eq!(
            meta,
            ScenarioMetadata {
                min_solution_length: Some(0),
                length_is_upper_bound: false,
                block_count: 3,
                stack_positions: 3,
                misplaced_blocks: 0,
                non_constructive_in_optimal: Some(0),
            }
        );
    }

    #[test]
    fn minimal_document_metadata_is_honest() {
        let s = load(&minimal()).unwrap();
        assert_eq!(
            recompute_metadata(&s, Budgets::default()).unwrap(),
            s.metadata.clone().unwrap()
        );
    }
}
