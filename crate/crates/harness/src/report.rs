//! Per-category aggregation and report rendering.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use blocksbench_core::planner::Budgets;
use blocksbench_mcp::TOOL_NAMES;

use crate::episode::EpisodeReport;
use crate::transport::TransportKind;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategorySummary {
    pub category: u8,
    pub n: usize,
    pub successes: usize,
    /// `100 * successes / n`.
    pub success_rate: f64,
    pub mean_wall_time: f64,
    pub mean_attempts: f64,
    pub mean_actions: f64,
    pub mean_tool_calls: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub agent: String,
    pub transport: TransportKind,
    pub seed: u64,
    pub categories: Vec<u8>,
    pub budgets: Budgets,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub manifest: Manifest,
    pub summaries: Vec<CategorySummary>,
    pub episodes: Vec<EpisodeReport>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl BenchReport {
    /// Invariant violations across all episodes, prefixed by scenario id.
    pub fn invariant_failures(&self) -> Vec<String> {
        self.episodes
            .iter()
            .flat_map(|e| {
                e.invariant_violations
                    .iter()
                    .map(move |v| format!("{}: {v}", e.scenario))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("reports serialize");
        text.push('\n');
        text
    }
}

fn mean(values: impl Iterator<Item = f64>, n: usize) -> f64 {
    values.sum::<f64>() / n as f64
}

/// Summaries for categories 1 to 5 that have reports, plus a warning for
/// each category without any.
pub fn aggregate(reports: &[EpisodeReport]) -> (Vec<CategorySummary>, Vec<String>) {
    let mut summaries = Vec::new();
    let mut warnings = Vec::new();
    for category in 1..=5u8 {
        let group: Vec<&EpisodeReport> =
            reports.iter().filter(|r| r.category == category).collect();
        let n = group.len();
        if n == 0 {
            warnings.push(format!("category {category} has no episodes; row omitted"));
            continue;
        }
        let successes = group.iter().filter(|r| r.success).count();
        let mean_tool_calls = TOOL_NAMES
            .iter()
            .map(|&tool| {
                let calls = group
                    .iter()
                    .map(|r| r.tool_calls.get(tool).copied().unwrap_or(0) as f64);
                (tool.to_string(), mean(calls, n))
            })
            .collect();
        summaries.push(CategorySummary {
            category,
            n,
            successes,
            success_rate: 100.0 * successes as f64 / n as f64,
            mean_wall_time: mean(group.iter().map(|r| r.wall_time), n),
            mean_attempts: mean(group.iter().map(|r| r.attempts as f64), n),
            mean_actions: mean(group.iter().map(|r| r.actions_executed as f64), n),
            mean_tool_calls,
        });
    }
    (summaries, warnings)
}

/// Markdown table with one column per category; rows are metrics.
pub fn render_markdown(report: &BenchReport) -> String {
    let m = &report.manifest;
    let mut out = String::from("# Blocksworld benchmark report\n\n");
    let categories: Vec<String> = m.categories.iter().map(u8::to_string).collect();
    let _ = writeln!(
        out,
        "agent `{}`, transport `{}`, seed {}, categories {}, version {}\n",
        m.agent,
        m.transport,
        m.seed,
        categories.join(","),
        m.version
    );
    out.push_str("| Metric | Category 1 | Category 2 | Category 3 | Category 4 | Category 5 |\n");
    out.push_str("|---|---|---|---|---|---|\n");
    let by_category: BTreeMap<u8, &CategorySummary> =
        report.summaries.iter().map(|s| (s.category, s)).collect();
    let mut row = |label: &str, cell: &dyn Fn(&CategorySummary) -> String| {
        let cells: Vec<String> = (1..=5u8)
            .map(|c| {
                by_category
                    .get(&c)
                    .map_or_else(|| String::from("n/a"), |s| cell(s))
            })
            .collect();
        let _ = writeln!(out, "| {label} | {} |", cells.join(" | "));
    };
    row("Scenarios", &|s| s.n.to_string());
    row("Success rate (%)", &|s| format!("{:.1}", s.success_rate));
    row("Mean time (s)", &|s| format!("{:.3}", s.mean_wall_time));
    row("Mean attempts", &|s| format!("{:.2}", s.mean_attempts));
    row("Mean actions executed", &|s| {
        format!("{:.2}", s.mean_actions)
    });
    for tool in TOOL_NAMES {
        row(&format!("Mean `{tool}` calls"), &|s| {
            format!("{:.2}", s.mean_tool_calls.get(tool).copied().unwrap_or(0.0))
        });
    }
    for warning in &report.warnings {
        let _ = writeln!(out, "\nWarning: {warning}");
    }
    out
}
