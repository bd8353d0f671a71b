//! One agent run on one scenario, and the agent interfaces.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use blocksbench_core::domain::Action;
use blocksbench_mcp::tools::descriptors;
use blocksbench_mcp::{ToolDescriptor, TOOL_NAMES};
use blocksbench_service::StatusPayload;

use crate::transport::{ToolReply, Transport, TransportError, TransportKind};

/// How an agent ended a successful run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Judgment {
    /// The agent believes the goal is reached.
    Completed,
    /// The agent declares the goal unreachable.
    Impossible,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("agent gave up: {0}")]
    GiveUp(String),
    #[error(transparent)]
    Transport(#[from] TransportError),
}

pub fn give_up(reason: impl Into<String>) -> AgentError {
    AgentError::GiveUp(reason.into())
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActOutcome {
    Executed(Box<StatusPayload>),
    Rejected { rule_id: String, message: String },
}

/// Tool access for one episode; counts every call.
pub struct Episode<'a> {
    scenario_id: &'a str,
    transport: &'a mut dyn Transport,
    tool_calls: BTreeMap<String, u64>,
    verify_payloads: Vec<Value>,
    actions_executed: usize,
    actions_rejected: usize,
}

impl<'a> Episode<'a> {
    pub fn new(scenario_id: &'a str, transport: &'a mut dyn Transport) -> Self {
        Self {
            scenario_id,
            transport,
            tool_calls: TOOL_NAMES.iter().map(|t| (t.to_string(), 0)).collect(),
            verify_payloads: Vec::new(),
            actions_executed: 0,
            actions_rejected: 0,
        }
    }

    pub fn scenario_id(&self) -> &str {
        self.scenario_id
    }

    pub fn tool_calls(&self) -> &BTreeMap<String, u64> {
        &self.tool_calls
    }

    /// Distinct plan payloads submitted to `verify_plan`.
    pub fn attempts(&self) -> usize {
        self.verify_payloads.len()
    }

    pub fn actions_executed(&self) -> usize {
        self.actions_executed
    }

    pub fn actions_rejected(&self) -> usize {
        self.actions_rejected
    }

    /// Raw tool call; the typed helpers below go through here.
    pub fn call(&mut self, tool: &str, arguments: Value) -> Result<ToolReply, TransportError> {
        *self.tool_calls.entry(tool.to_string()).or_insert(0) += 1;
        if tool == "verify_plan" && !self.verify_payloads.contains(&arguments) {
            self.verify_payloads.push(arguments.clone());
        }
        let reply = self.transport.call(tool, arguments)?;
        if matches!(tool, "pick_up" | "put_down" | "stack" | "unstack") {
            match reply {
                ToolReply::Data(_) => self.actions_executed += 1,
                ToolReply::Violation { .. } => self.actions_rejected += 1,
                ToolReply::Error(_) => {}
            }
        }
        Ok(reply)
    }

    fn data(&mut self, tool: &str, arguments: Value) -> Result<Value, AgentError> {
        match self.call(tool, arguments)? {
            ToolReply::Data(data) => Ok(data),
            ToolReply::Violation { message, .. } | ToolReply::Error(message) => {
                Err(give_up(format!("{tool} failed: {message}")))
            }
        }
    }

    pub fn rules(&mut self) -> Result<String, AgentError> {
        let data = self.data("get_rules", json!({}))?;
        Ok(data["rules"].as_str().unwrap_or_default().to_string())
    }

    pub fn status(&mut self) -> Result<StatusPayload, AgentError> {
        let data = self.data("get_status", json!({}))?;
        serde_json::from_value(data).map_err(|e| give_up(format!("unreadable status: {e}")))
    }

    /// Verification report for `plan` (`verified`, `reaches_goal`, ...).
    pub fn verify(&mut self, plan: &[Action]) -> Result<Value, AgentError> {
        self.data("verify_plan", json!({"steps": plan}))
    }

    pub fn act(&mut self, action: &Action) -> Result<ActOutcome, AgentError> {
        let mut args = json!({"block": action.block()});
        if let Some(target) = action.target() {
            args["target"] = json!(target);
        }
        match self.call(action.kind().as_str(), args)? {
            ToolReply::Data(mut data) => {
                let status = serde_json::from_value(data["status"].take())
                    .map_err(|e| give_up(format!("unreadable action result: {e}")))?;
                Ok(ActOutcome::Executed(Box::new(status)))
            }
            ToolReply::Violation { rule_id, message } => {
                Ok(ActOutcome::Rejected { rule_id, message })
            }
            ToolReply::Error(message) => Err(give_up(format!("{action} failed: {message}"))),
        }
    }
}

pub trait Agent {
    fn name(&self) -> &str;

    /// Runs the agent loop; the session is already started.
    fn run(&mut self, episode: &mut Episode<'_>) -> Result<Judgment, AgentError>;

    /// Called with the scored report after each episode.
    fn finish(&mut self, _report: &EpisodeReport) {}
}

/// Per-episode record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeReport {
    pub scenario: String,
    pub category: u8,
    pub agent: String,
    pub transport: TransportKind,
    pub success: bool,
    pub declared_impossible: bool,
    pub goal_reached: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    pub wall_time: f64,
    pub attempts: usize,
    pub actions_executed: usize,
    pub actions_rejected: usize,
    pub tool_calls: BTreeMap<String, u64>,
    /// Disagreements between the service log, its status and a local replay.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invariant_violations: Vec<String>,
}

/// Next move of an externally driven agent.
#[derive(Debug, Clone, PartialEq)]
pub enum AdapterStep {
    Call { tool: String, arguments: Value },
    Finish(Judgment),
}

/// Callback interface for agents driven from outside the crate, such as a
/// language-model client: `start` once, then alternate `act` and `observe`
/// until `act` returns `Finish`, then `finish` with the scored report.
pub trait AgentAdapter {
    fn name(&self) -> &str;
    fn start(&mut self, scenario_id: &str, tools: &[ToolDescriptor]);
    fn act(&mut self) -> AdapterStep;
    fn observe(&mut self, tool: &str, reply: &ToolReply);
    fn finish(&mut self, report: &EpisodeReport);
}

/// Runs an [`AgentAdapter`] as an [`Agent`], bounded by `max_calls`.
pub struct Adapted<A> {
    pub adapter: A,
    pub max_calls: usize,
}

impl<A: AgentAdapter> Adapted<A> {
    pub fn new(adapter: A) -> Self {
        Self {
            adapter,
            max_calls: 500,
        }
    }
}

impl<A: AgentAdapter> Agent for Adapted<A> {
    fn name(&self) -> &str {
        self.adapter.name()
    }

    fn run(&mut self, episode: &mut Episode<'_>) -> Result<Judgment, AgentError> {
        self.adapter.start(episode.scenario_id(), &descriptors());
        for _ in 0..self.max_calls {
            match self.adapter.act() {
                AdapterStep::Finish(judgment) => return Ok(judgment),
                AdapterStep::Call { tool, arguments } => {
                    let reply = episode.call(&tool, arguments)?;
                    self.adapter.observe(&tool, &reply);
                }
            }
        }
        Err(give_up(format!(
            "no verdict after {} tool calls",
            self.max_calls
        )))
    }

    fn finish(&mut self, report: &EpisodeReport) {
        self.adapter.finish(report);
    }
}
