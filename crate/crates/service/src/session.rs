//! The single live simulation and its operations, independent of HTTP.
//!
//! Mutations (start, stop, actions) are serialized by `exec`; the session
//! itself sits behind a read-write lock that mutations hold only briefly, so
//! queries observe intermediate gripper phases when a phase delay is set.

use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use blocksbench_core::constraints::{describe_rules, observe, validate, ConstraintSetId, RuleId};
use blocksbench_core::domain::{is_goal, Action, Block, GoalSpec, WorldState};
use blocksbench_core::fsm::{events_for, transition, GripperPhase};
use blocksbench_core::scenario::{
    scenario_from_value, CatalogEntry, Scenario, ScenarioStore, SchemaError,
};
use blocksbench_core::verifier::{parse_plan, verify_parsed, VerifyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ServiceError {
    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),
    #[error("a simulation is already running ({0}); stop it first or pass \"force\": true")]
    AlreadyRunning(String),
    #[error("no simulation is running; start one with POST /simulation/start")]
    NoActiveSession,
    #[error("invalid scenario document: {0}")]
    Schema(#[from] SchemaError),
    #[error("bad request: {0}")]
    BadRequest(String),
}

impl ServiceError {
    /// HTTP status class for the error.
    pub fn status_code(&self) -> u16 {
        match self {
            ServiceError::UnknownScenario(_) => 404,
            ServiceError::AlreadyRunning(_) | ServiceError::NoActiveSession => 409,
            ServiceError::Schema(_) | ServiceError::BadRequest(_) => 400,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario_id: Option<String>,
    /// Inline scenario document; `category` and `metadata` are optional.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<Value>,
    #[serde(default)]
    pub force: bool,
}

impl StartRequest {
    pub fn id(id: impl Into<String>) -> Self {
        Self {
            scenario_id: Some(id.into()),
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSummary {
    pub running: bool,
    pub scenario: String,
    pub category: String,
    pub constraint_set: ConstraintSetId,
    pub positions: usize,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GripperView {
    pub state: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block: Option<String>,
    pub phase: String,
}

/// Masked view of the live session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusPayload {
    pub scenario: String,
    pub category: String,
    pub constraint_set: ConstraintSetId,
    pub positions: usize,
    /// Bottom-to-top per position; hidden entries read `"unknown"`.
    pub stacks: Vec<Vec<String>>,
    /// Name and size of every identifiable block.
    pub blocks: Vec<Block>,
    pub gripper: GripperView,
    pub goal: GoalSpec,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RulesPayload {
    pub constraint_set: ConstraintSetId,
    pub rules: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionPayload {
    pub message: String,
    pub status: StatusPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RejectedAction {
    pub rule_id: RuleId,
    pub message: String,
}

/// Result of an action request on a live session.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ActionOutcome {
    Executed(ActionPayload),
    Rejected(RejectedAction),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogEntry {
    pub index: usize,
    pub action: Action,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogPayload {
    pub scenario: String,
    pub constraint_set: ConstraintSetId,
    pub actions: Vec<LogEntry>,
    pub goal_reached: bool,
}

#[derive(Debug, Clone)]
struct Session {
    scenario: Scenario,
    state: WorldState,
    phase: GripperPhase,
    log: Vec<LogEntry>,
    started: Instant,
}

impl Session {
    fn status(&self) -> StatusPayload {
        let seen = observe(&self.state, self.scenario.constraint_set);
        let held = seen.gripper.held().map(str::to_string);
        StatusPayload {
            scenario: self.scenario.id.clone(),
            category: self.scenario.category_label(),
            constraint_set: self.scenario.constraint_set,
            positions: self.state.position_count(),
            stacks: seen.stacks,
            blocks: seen.blocks,
            gripper: GripperView {
                state: if held.is_some() { "holding" } else { "idle" }.to_string(),
                block: held,
                phase: self.phase.name().to_string(),
            },
            goal: self.scenario.goal.clone(),
            steps: self.log.len(),
        }
    }

    fn summary(&self, running: bool) -> SessionSummary {
        SessionSummary {
            running,
            scenario: self.scenario.id.clone(),
            category: self.scenario.category_label(),
            constraint_set: self.scenario.constraint_set,
            positions: self.state.position_count(),
            steps: self.log.len(),
        }
    }
}

/// One simulation service instance.
pub struct SimService {
    store: Arc<ScenarioStore>,
    session: RwLock<Option<Session>>,
    exec: Mutex<()>,
    phase_delay: Duration,
}

impl SimService {
    pub fn new(store: Arc<ScenarioStore>) -> Self {
        Self::with_phase_delay(store, Duration::ZERO)
    }

    /// `delay` is slept after each intermediate gripper phase.
    pub fn with_phase_delay(store: Arc<ScenarioStore>, delay: Duration) -> Self {
        Self {
            store,
            session: RwLock::new(None),
            exec: Mutex::new(()),
            phase_delay: delay,
        }
    }

    pub fn store(&self) -> &ScenarioStore {
        &self.store
    }

    fn read<T>(&self, f: impl FnOnce(&Session) -> T) -> Result<T, ServiceError> {
        let guard = self.session.read().unwrap_or_else(|e| e.into_inner());
        guard.as_ref().map(f).ok_or(ServiceError::NoActiveSession)
    }

    fn write<T>(&self, f: impl FnOnce(&mut Option<Session>) -> T) -> T {
        let mut guard = self.session.write().unwrap_or_else(|e| e.into_inner());
        f(&mut guard)
    }

    pub fn start(&self, request: StartRequest) -> Result<SessionSummary, ServiceError> {
        let _exec = self.exec.lock().unwrap_or_else(|e| e.into_inner());
        let scenario = match (request.scenario_id, request.scenario) {
            (Some(id), None) => self
                .store
                .get(&id)
                .cloned()
                .ok_or(ServiceError::UnknownScenario(id))?,
            (None, Some(doc)) => scenario_from_value(doc)?,
            _ => {
                return Err(ServiceError::BadRequest(String::from(
                    "give exactly one of `scenario_id` or `scenario`",
                )))
            }
        };
        self.write(|slot| {
            if let (Some(current), false) = (slot.as_ref(), request.force) {
                return Err(ServiceError::AlreadyRunning(current.scenario.id.clone()));
            }
            let session = Session {
                state: scenario.initial.clone(),
                phase: scenario
                    .initial
                    .gripper()
                    .held()
                    .map_or(GripperPhase::Idle, |b| GripperPhase::Holding(b.to_string())),
                scenario,
                log: Vec::new(),
                started: Instant::now(),
            };
            let summary = session.summary(true);
            *slot = Some(session);
            Ok(summary)
        })
    }

    pub fn stop(&self) -> Result<SessionSummary, ServiceError> {
        let _exec = self.exec.lock().unwrap_or_else(|e| e.into_inner());
        self.write(|slot| {
            slot.take()
                .map(|s| s.summary(false))
                .ok_or(ServiceError::NoActiveSession)
        })
    }

    pub fn status(&self) -> Result<StatusPayload, ServiceError> {
        self.read(Session::status)
    }

    pub fn rules(&self) -> Result<RulesPayload, ServiceError> {
        self.read(|s| RulesPayload {
            constraint_set: s.scenario.constraint_set,
            rules: describe_rules(s.scenario.constraint_set, s.state.position_count()),
        })
    }

    pub fn scenarios(&self) -> Vec<CatalogEntry> {
        self.store.catalog()
    }

    pub fn log(&self) -> Result<LogPayload, ServiceError> {
        self.read(|s| LogPayload {
            scenario: s.scenario.id.clone(),
            constraint_set: s.scenario.constraint_set,
            actions: s.log.clone(),
            goal_reached: is_goal(&s.state, &s.scenario.goal),
        })
    }

    /// Dry-runs a plan document against the live true state.
    pub fn verify(&self, plan: &Value) -> Result<VerifyReport, ServiceError> {
        let parsed = parse_plan(plan).map_err(|e| ServiceError::BadRequest(e.to_string()))?;
        self.read(|s| {
            verify_parsed(
                &s.state,
                &s.scenario.goal,
                &parsed,
                s.scenario.constraint_set,
            )
            .report(parsed.steps.len())
        })
    }

    /// Validates and executes one action, driving the gripper through its
    /// phase pair. A violation leaves the session untouched.
    pub fn execute(&self, action: &Action) -> Result<ActionOutcome, ServiceError> {
        let _exec = self.exec.lock().unwrap_or_else(|e| e.into_inner());
        let checked = self.read(|s| {
            validate(&s.state, action, s.scenario.constraint_set)
                .map(|()| (s.state.clone(), s.phase.clone()))
        })?;
        let (state, mut phase) = match checked {
            Ok(pair) => pair,
            Err(violation) => {
                return Ok(ActionOutcome::Rejected(RejectedAction {
                    rule_id: violation.rule_id,
                    message: violation.message,
                }))
            }
        };
        let next = state.apply(action).expect("validated action applies");
        let [first, second] = events_for(action);
        phase = transition(&phase, &first).expect("resting phase accepts the action");
        self.set_phase(&phase);
        if !self.phase_delay.is_zero() {
            std::thread::sleep(self.phase_delay);
        }
        phase = transition(&phase, &second).expect("second half of the cycle");
        let payload = self.write(|slot| {
            let session = slot.as_mut().expect("session held by exec lock");
            session.state = next;
            session.phase = phase;
            let entry = LogEntry {
                index: session.log.len(),
                action: action.clone(),
                elapsed_ms: session.started.elapsed().as_millis() as u64,
            };
            session.log.push(entry);
            ActionPayload {
                message: format!("Executed {action}."),
                status: session.status(),
            }
        });
        Ok(ActionOutcome::Executed(payload))
    }

    fn set_phase(&self, phase: &GripperPhase) {
        self.write(|slot| {
            if let Some(session) = slot.as_mut() {
                session.phase = phase.clone();
            }
        });
    }
}
