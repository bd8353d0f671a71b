//! Evaluation harness: scripted reference agents, episode runner, and
//! per-category aggregation into JSON and markdown reports.

pub mod agents;
pub mod episode;
pub mod report;
pub mod runner;
pub mod transport;

pub use agents::{AgentKind, GreedyAgent, OracleAgent, RevealAgent};
pub use episode::{
    ActOutcome, Adapted, AdapterStep, Agent, AgentAdapter, AgentError, Episode, EpisodeReport,
    Judgment,
};
pub use report::{aggregate, render_markdown, BenchReport, CategorySummary, Manifest};
pub use runner::{run_bench, Bench, BenchConfig, HarnessError};
pub use transport::{
    McpProcess, McpTransport, RestTransport, ToolReply, Transport, TransportError, TransportKind,
};
