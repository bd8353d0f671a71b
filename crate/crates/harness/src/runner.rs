//! Episode runner: fresh session per scenario, agent loop, scoring, and
//! cross-checks of the service's account against a local replay.

use std::time::Instant;

use thiserror::Error;

use blocksbench_core::constraints::{observe, validate_and_apply};
use blocksbench_core::domain::is_goal;
use blocksbench_core::planner::SolveOptions;
use blocksbench_core::scenario::{Category, Scenario, ScenarioStore};
use blocksbench_service::session::LogPayload;
use blocksbench_service::{RestClient, StatusPayload};

use crate::agents::AgentKind;
use crate::episode::{Agent, AgentError, Episode, EpisodeReport, Judgment};
use crate::report::{aggregate, BenchReport, Manifest};
use crate::transport::Transport;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no scenario `{0}` in the store")]
    UnknownScenario(String),
    #[error("scenario `{0}` has no category")]
    Uncategorized(String),
}

/// Drives agents through episodes. `control` starts sessions and reads the
/// action log; agents only reach the world through `transport`.
pub struct Bench<'a> {
    store: &'a ScenarioStore,
    control: RestClient,
    transport: Box<dyn Transport + 'a>,
}

impl<'a> Bench<'a> {
    pub fn new(
        store: &'a ScenarioStore,
        service_url: &str,
        transport: Box<dyn Transport + 'a>,
    ) -> Self {
        Self {
            store,
            control: RestClient::new(service_url),
            transport,
        }
    }

    pub fn run_episode(
        &mut self,
        agent: &mut dyn Agent,
        scenario_id: &str,
    ) -> Result<EpisodeReport, HarnessError> {
        let scenario = self
            .store
            .get(scenario_id)
            .ok_or_else(|| HarnessError::UnknownScenario(scenario_id.to_string()))?;
        let category = scenario
            .category
            .ok_or_else(|| HarnessError::Uncategorized(scenario_id.to_string()))?;

        let started = self
            .control
            .start(scenario_id)
            .map_err(|e| e.to_string())
            .and_then(|env| env.into_result().map(drop).map_err(|e| e.message));
        let clock = Instant::now();
        let mut episode = Episode::new(&scenario.id, self.transport.as_mut());
        let outcome = match started {
            Ok(()) => agent.run(&mut episode),
            Err(message) => Err(AgentError::GiveUp(format!(
                "session did not start: {message}"
            ))),
        };
        let wall_time = clock.elapsed().as_secs_f64();
        let (attempts, actions_executed, actions_rejected, tool_calls) = (
            episode.attempts(),
            episode.actions_executed(),
            episode.actions_rejected(),
            episode.tool_calls().clone(),
        );

        let (goal_reached, invariant_violations) = self.audit(scenario);
        let declared_impossible = matches!(outcome, Ok(Judgment::Impossible));
        let success = if category.is_solvable() {
            !declared_impossible && goal_reached
        } else {
            declared_impossible
        };
        let failure = match &outcome {
            Err(e) => Some(e.to_string()),
            Ok(_) if success => None,
            Ok(Judgment::Impossible) => Some(String::from("declared a solvable goal impossible")),
            Ok(Judgment::Completed) if category.is_solvable() => {
                Some(String::from("finished without reaching the goal"))
            }
            Ok(Judgment::Completed) => Some(String::from("did not recognize an impossible goal")),
        };
        let report = EpisodeReport {
            scenario: scenario.id.clone(),
            category: category.get(),
            agent: agent.name().to_string(),
            transport: self.transport.kind(),
            success,
            declared_impossible,
            goal_reached,
            failure,
            wall_time,
            attempts,
            actions_executed,
            actions_rejected,
            tool_calls,
            invariant_violations,
        };
        agent.finish(&report);
        let _ = self.control.stop();
        Ok(report)
    }

    /// Replays the service log from the scenario's initial state and checks
    /// the log's goal flag and the live status against the replay.
    fn audit(&self, scenario: &Scenario) -> (bool, Vec<String>) {
        let mut violations = Vec::new();
        let log: LogPayload = match self.read(&self.control.log()) {
            Ok(log) => log,
            Err(message) => return (false, vec![format!("log unavailable: {message}")]),
        };
        if log.scenario != scenario.id {
            violations.push(format!("log belongs to `{}`", log.scenario));
        }
        let cs = scenario.constraint_set;
        let mut state = scenario.initial.clone();
        for entry in &log.actions {
            match validate_and_apply(&state, &entry.action, cs) {
                Ok(next) => state = next,
                Err(v) => {
                    violations.push(format!(
                        "logged step {} does not replay: {}",
                        entry.index, v.message
                    ));
                    return (false, violations);
                }
            }
        }
        let replayed_goal = is_goal(&state, &scenario.goal);
        if replayed_goal != log.goal_reached {
            violations.push(format!(
                "log says goal_reached={}, replay says {replayed_goal}",
                log.goal_reached
            ));
        }
        match self.read::<StatusPayload>(&self.control.status()) {
            Ok(status) if status.stacks != observe(&state, cs).stacks => {
                violations.push(String::from("live status differs from the replayed state"));
            }
            Ok(_) => {}
            Err(message) => violations.push(format!("status unavailable: {message}")),
        }
        (replayed_goal && log.goal_reached, violations)
    }

    fn read<T: serde::de::DeserializeOwned>(
        &self,
        response: &Result<blocksbench_service::Envelope, blocksbench_service::ClientError>,
    ) -> Result<T, String> {
        let envelope = response.as_ref().map_err(|e| e.to_string())?;
        let data = envelope.clone().into_result().map_err(|e| e.message)?;
        serde_json::from_value(data).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub agent: AgentKind,
    pub categories: Vec<Category>,
    pub seed: u64,
    pub options: SolveOptions,
}

/// Runs `config.agent` on every scenario of the selected categories, in id
/// order, and aggregates the results.
pub fn run_bench(
    store: &ScenarioStore,
    service_url: &str,
    transport: Box<dyn Transport + '_>,
    config: &BenchConfig,
) -> Result<BenchReport, HarnessError> {
    let kind = transport.kind();
    let mut bench = Bench::new(store, service_url, transport);
    let mut agent = config.agent.build(config.seed, config.options);
    let ids: Vec<String> = store
        .iter()
        .filter(|s| s.category.is_some_and(|c| config.categories.contains(&c)))
        .map(|s| s.id.clone())
        .collect();
    let episodes = ids
        .iter()
        .map(|id| bench.run_episode(agent.as_mut(), id))
        .collect::<Result<Vec<_>, _>>()?;
    let (summaries, mut warnings) = aggregate(&episodes);
    warnings.retain(|w| {
        config
            .categories
            .iter()
            .any(|c| w.starts_with(&format!("category {} ", c.get())))
    });
    Ok(BenchReport {
        manifest: Manifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            agent: config.agent.as_str().to_string(),
            transport: kind,
            seed: config.seed,
            categories: config.categories.iter().map(|c| c.get()).collect(),
            budgets: config.options.budgets,
        },
        summaries,
        episodes,
        warnings,
    })
}
