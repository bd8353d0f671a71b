//! Blocksworld benchmark core: world model, constraint sets, gripper state
//! machine, plan verification, oracle planner and scenario store.

pub mod constraints;
pub mod domain;
pub mod fsm;
pub mod planner;
pub mod scenario;
pub mod verifier;

pub use constraints::{ConstraintSetId, Observation, RuleId, Violation};
pub use domain::{Action, ActionKind, Block, GoalSpec, GripperStatus, WorldState};
pub use fsm::GripperPhase;
pub use planner::{Budgets, SolveResult};
pub use scenario::{Category, Scenario, ScenarioMetadata, ScenarioStore};
pub use verifier::{Plan, PlanVerdict, VerifyReport};
