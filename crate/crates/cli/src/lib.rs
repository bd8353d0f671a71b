//! `blocksbench` command line. Flags take precedence over environment
//! variables, which take precedence over built-in defaults.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage error.

mod commands;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use blocksbench_core::constraints::ConstraintSetId;
use blocksbench_core::planner::{Budgets, SearchMethod};
use blocksbench_harness::{AgentKind, TransportKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "blocksbench",
    version,
    about = "Blocksworld planning benchmark"
)]
pub struct Cli {
    /// Machine-readable JSON output.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the REST simulation service until interrupted.
    Serve(ServeArgs),
    /// Run the MCP gateway on stdin/stdout, forwarding to a running service.
    Mcp(McpArgs),
    /// Solve a scenario file optimally and print the plan.
    Solve(SolveArgs),
    /// Prove a scenario unsolvable by exhausting its reachable states.
    ProveImpossible(PlanArgs),
    /// Print oracle metadata of a scenario file.
    Stats(PlanArgs),
    /// Generate one scenario from a seed.
    Gen(GenArgs),
    /// Regenerate the shipped 50-scenario suite.
    GenSuite(GenSuiteArgs),
    /// Check scenario files: schema, metadata, envelope and category.
    Validate(ValidateArgs),
    /// Evaluate agents.
    #[command(subcommand)]
    Bench(BenchCommand),
    /// Draw the initial and goal arrangement of a scenario file.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct ScenarioDirArg {
    /// Scenario directory (`cat1/` .. `cat5/`).
    #[arg(long = "scenarios", env = "BLOCKSBENCH_SCENARIOS")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct BudgetArgs {
    /// Maximum states a search may store.
    #[arg(long, env = "BLOCKSBENCH_MAX_STATES", default_value_t = Budgets::default().max_states)]
    pub max_states: usize,
    /// Maximum plan length a search explores.
    #[arg(long, env = "BLOCKSBENCH_MAX_DEPTH", default_value_t = Budgets::default().max_depth)]
    pub max_depth: usize,
}

impl BudgetArgs {
    pub fn budgets(self) -> Budgets {
        Budgets {
            max_states: self.max_states,
            max_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "BLOCKSBENCH_HOST", default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "BLOCKSBENCH_PORT", default_value_t = blocksbench_service::DEFAULT_PORT)]
    pub port: u16,
    /// Pause between gripper phases of each action, in milliseconds.
    #[arg(long, env = "BLOCKSBENCH_PHASE_DELAY_MS", default_value_t = 0)]
    pub phase_delay_ms: u64,
    #[command(flatten)]
    pub scenarios: ScenarioDirArg,
}

#[derive(Debug, Args)]
pub struct McpArgs {
    /// Base URL of the simulation service.
    #[arg(long, env = "BLOCKSBENCH_URL", default_value = "http://127.0.0.1:8350")]
    pub url: String,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Scenario JSON file.
    pub file: PathBuf,
    #[command(flatten)]
    pub budgets: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Search engine: auto picks BFS for small instances and IDA* otherwise.
    #[arg(long, default_value = "auto", value_parser = parse_method)]
    pub method: SearchMethod,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=5))]
    pub category: u8,
    #[arg(long)]
    pub blocks: usize,
    #[arg(long)]
    pub positions: usize,
    #[arg(long, env = "BLOCKSBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Category 3 only: `base` or `block_size`.
    #[arg(long, value_parser = parse_constraint_set)]
    pub constraint_set: Option<ConstraintSetId>,
    /// Largest block size for size-constrained scenarios.
    #[arg(long)]
    pub max_size: Option<u32>,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenSuiteArgs {
    /// Target directory; defaults to the scenario directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub scenarios: ScenarioDirArg,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// A scenario file or a suite directory; defaults to the scenario directory.
    pub path: Option<PathBuf>,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    pub scenarios: ScenarioDirArg,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Run one agent over the selected categories and report.
    Run(BenchRunArgs),
}

#[derive(Debug, Args)]
pub struct BenchRunArgs {
    #[arg(long, default_value = "oracle", value_parser = parse_agent)]
    pub agent: AgentKind,
    /// Category list such as `1-5`, `1,2,4` or `3`.
    #[arg(long, default_value = "1-5", value_parser = parse_categories)]
    pub categories: CategoryList,
    /// `rest`, `mcp` (gateway in process) or `mcp-stdio` (gateway subprocess).
    #[arg(long, default_value = "mcp", value_parser = parse_transport)]
    pub transport: TransportKind,
    #[arg(long, env = "BLOCKSBENCH_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Service to evaluate against; a private one is started when omitted.
    #[arg(long)]
    pub url: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the markdown table here.
    #[arg(long)]
    pub markdown: Option<PathBuf>,
    #[command(flatten)]
    pub budgets: BudgetArgs,
    #[command(flatten)]
    pub scenarios: ScenarioDirArg,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Scenario JSON file.
    pub file: PathBuf,
}

fn parse_method(s: &str) -> Result<SearchMethod, String> {
    match s {
        "auto" => Ok(SearchMethod::Auto),
        "bfs" => Ok(SearchMethod::Bfs),
        "ida-star" | "ida_star" => Ok(SearchMethod::IdaStar),
        other => Err(format!("unknown method `{other}` (auto, bfs, ida-star)")),
    }
}

fn parse_constraint_set(s: &str) -> Result<ConstraintSetId, String> {
    s.parse::<ConstraintSetId>().map_err(|e| e.to_string())
}

fn parse_agent(s: &str) -> Result<AgentKind, String> {
    s.parse()
}

fn parse_transport(s: &str) -> Result<TransportKind, String> {
    s.parse()
}

/// Parses `1-5`, `1,3,5`, `2-3,5`; the result is sorted and deduplicated.
pub fn parse_category_list(s: &str) -> Result<Vec<u8>, String> {
    let mut out = Vec::new();
    for part in s.split(',') {
        let bound = |t: &str| -> Result<u8, String> {
            t.trim()
                .parse::<u8>()
                .ok()
                .filter(|c| (1..=5).contains(c))
                .ok_or_else(|| format!("`{t}` is not a category (1 to 5)"))
        };
        match part.split_once('-') {
            Some((lo, hi)) => {
                let (lo, hi) = (bound(lo)?, bound(hi)?);
                if lo > hi {
                    return Err(format!("empty range `{part}`"));
                }
                out.extend(lo..=hi);
            }
            None => out.push(bound(part)?),
        }
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// Sorted, deduplicated category numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryList(pub Vec<u8>);

fn parse_categories(s: &str) -> Result<CategoryList, String> {
    parse_category_list(s).map(CategoryList)
}

/// Parses `args` (program name first), runs the command, returns the exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match commands::run(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn category_lists() {
        assert_eq!(parse_category_list("1-5"), Ok(vec![1, 2, 3, 4, 5]));
        assert_eq!(parse_category_list("5,1,2-3,1"), Ok(vec![1, 2, 3, 5]));
        assert!(parse_category_list("0-2").is_err());
        assert!(parse_category_list("4-2").is_err());
        assert!(parse_category_list("x").is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(
            dispatch(["blocksbench", "frobnicate"], &mut out, &mut err),
            EXIT_USAGE
        );
        assert!(!err.is_empty());
        let code = dispatch(
            [
                "blocksbench",
                "gen",
                "--category",
                "9",
                "--blocks",
                "4",
                "--positions",
                "3",
            ],
            &mut out,
            &mut err,
        );
        assert_eq!(code, EXIT_USAGE);
        let mut help = Vec::new();
        assert_eq!(
            dispatch(["blocksbench", "solve", "--help"], &mut help, &mut err),
            EXIT_OK
        );
        assert!(String::from_utf8(help).unwrap().contains("--max-states"));
    }
}
