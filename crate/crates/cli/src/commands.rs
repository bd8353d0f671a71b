//! Subcommand implementations. Each returns the process exit code.

use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};

use blocksbench_core::domain::{render_ascii, GripperStatus, WorldState};
use blocksbench_core::planner::{prove_unsolvable, solve_with, SolveOptions, SolveResult};
use blocksbench_core::scenario::{
    audit_scenario, audit_suite_shape, build_suite, generate_scenario, load_custom_scenario,
    load_scenario, recompute_metadata, write_scenario, Category, GenSpec, Scenario, ScenarioStore,
    SizeProfile,
};
use blocksbench_harness::{
    render_markdown, run_bench, BenchConfig, McpProcess, McpTransport, RestTransport, Transport,
    TransportKind,
};
use blocksbench_mcp::{run_stdio, Gateway};
use blocksbench_service::{serve, spawn_server, RestClient, SimService};

use crate::{
    BenchCommand, BenchRunArgs, Cli, Command, GenArgs, GenSuiteArgs, McpArgs, PlanArgs, RenderArgs,
    ScenarioDirArg, ServeArgs, SolveArgs, ValidateArgs, EXIT_FAILURE, EXIT_OK,
};

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    let json = cli.json;
    match &cli.command {
        Command::Serve(args) => serve_cmd(args, out),
        Command::Mcp(args) => mcp_cmd(args, out),
        Command::Solve(args) => solve_cmd(args, json, out),
        Command::ProveImpossible(args) => prove_cmd(args, json, out),
        Command::Stats(args) => stats_cmd(args, json, out),
        Command::Gen(args) => gen_cmd(args, out),
        Command::GenSuite(args) => gen_suite_cmd(args, json, out),
        Command::Validate(args) => validate_cmd(args, json, out),
        Command::Bench(BenchCommand::Run(args)) => bench_cmd(args, json, out),
        Command::Render(args) => render_cmd(args, json, out),
    }
}

fn print_json(out: &mut dyn Write, value: &Value) -> Result<()> {
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn scenario_dir(arg: &ScenarioDirArg) -> PathBuf {
    arg.dir.clone().unwrap_or_else(ScenarioStore::default_dir)
}

fn load_store(arg: &ScenarioDirArg) -> Result<ScenarioStore> {
    let dir = scenario_dir(arg);
    ScenarioStore::load_dir(&dir)
        .with_context(|| format!("loading scenarios from {}", dir.display()))
}

/// Loads a scenario file; `category` and `metadata` are optional.
fn load_file(path: &Path) -> Result<Scenario> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_custom_scenario(&bytes).with_context(|| format!("invalid scenario {}", path.display()))
}

fn serve_cmd(args: &ServeArgs, out: &mut dyn Write) -> Result<i32> {
    let store = Arc::new(load_store(&args.scenarios)?);
    let delay = Duration::from_millis(args.phase_delay_ms);
    let service = Arc::new(SimService::with_phase_delay(store, delay));
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .with_context(|| format!("binding {}:{}", args.host, args.port))?;
        writeln!(out, "listening on http://{}", listener.local_addr()?)?;
        out.flush()?;
        serve(listener, service, async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
        Ok(EXIT_OK)
    })
}

fn mcp_cmd(args: &McpArgs, out: &mut dyn Write) -> Result<i32> {
    let mut gateway = Gateway::new(RestClient::new(args.url.as_str()));
    run_stdio(&mut gateway, std::io::stdin().lock(), out)?;
    Ok(EXIT_OK)
}

fn solve_cmd(args: &SolveArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let s = load_file(&args.plan.file)?;
    let options = SolveOptions {
        budgets: args.plan.budgets.budgets(),
        method: args.method,
        structural_precheck: true,
    };
    let result = solve_with(&s.initial, &s.goal, s.constraint_set, &options)?;
    let code = match result {
        SolveResult::ResourceLimit { .. } => EXIT_FAILURE,
        _ => EXIT_OK,
    };
    if json {
        let mut doc = json!({"scenario": s.id, "solution": result});
        if let Some(plan) = result.plan() {
            doc["length"] = json!(plan.len());
        }
        print_json(out, &doc)?;
        return Ok(code);
    }
    match &result {
        SolveResult::Solved { plan, optimal } => {
            let kind = if *optimal {
                "optimal plan"
            } else {
                "plan (not proven optimal)"
            };
            writeln!(out, "{}: {kind} of {} actions", s.id, plan.len())?;
            for (i, action) in plan.steps.iter().enumerate() {
                writeln!(out, "{:>4}. {action}", i + 1)?;
            }
        }
        SolveResult::Unsolvable { explored_states } => {
            writeln!(
                out,
                "{}: unsolvable ({explored_states} reachable states, none is a goal)",
                s.id
            )?;
        }
        SolveResult::ResourceLimit {
            explored_states,
            depth_reached,
        } => {
            writeln!(
                out,
                "{}: budget exhausted after {explored_states} states at depth {depth_reached}",
                s.id
            )?;
        }
    }
    Ok(code)
}

fn prove_cmd(args: &PlanArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let s = load_file(&args.file)?;
    let result = prove_unsolvable(
        &s.initial,
        &s.goal,
        s.constraint_set,
        args.budgets.budgets(),
    )?;
    let (proven, text) = match &result {
        SolveResult::Unsolvable { explored_states } => (
            true,
            format!("proven impossible: all {explored_states} reachable states explored, none is a goal"),
        ),
        SolveResult::Solved { plan, .. } => (false, format!("solvable: plan of {} actions", plan.len())),
        SolveResult::ResourceLimit { explored_states, .. } => (
            false,
            format!("undecided: budget exhausted after {explored_states} states"),
        ),
    };
    if json {
        print_json(
            out,
            &json!({"scenario": s.id, "proven_impossible": proven, "result": result}),
        )?;
    } else {
        writeln!(out, "{}: {text}", s.id)?;
    }
    Ok(if proven { EXIT_OK } else { EXIT_FAILURE })
}

fn stats_cmd(args: &PlanArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let s = load_file(&args.file)?;
    let meta = recompute_metadata(&s, args.budgets.budgets())?;
    if json {
        print_json(out, &json!({"scenario": s.id, "metadata": meta}))?;
        return Ok(EXIT_OK);
    }
    let length = match (meta.min_solution_length, meta.length_is_upper_bound) {
        (Some(n), false) => n.to_string(),
        (Some(n), true) => format!("at most {n}"),
        (None, _) => String::from("unsolvable"),
    };
    writeln!(out, "scenario             {}", s.id)?;
    writeln!(out, "category             {}", s.category_label())?;
    writeln!(out, "constraint set       {}", s.constraint_set)?;
    writeln!(out, "blocks               {}", meta.block_count)?;
    writeln!(out, "positions            {}", meta.stack_positions)?;
    writeln!(out, "misplaced            {}", meta.misplaced_blocks)?;
    writeln!(out, "min solution length  {length}")?;
    if let Some(nc) = meta.non_constructive_in_optimal {
        writeln!(out, "non-constructive     {nc}")?;
    }
    Ok(EXIT_OK)
}

fn gen_cmd(args: &GenArgs, out: &mut dyn Write) -> Result<i32> {
    let category = Category::new(args.category).context("category must be 1 to 5")?;
    let mut spec = GenSpec::new(category, args.blocks, args.positions, args.seed);
    spec.constraint_set = args.constraint_set;
    spec.size_profile = args.max_size.map(|max_size| SizeProfile { max_size });
    let scenario = generate_scenario(&spec)?;
    match &args.out {
        Some(path) => {
            fs::write(path, scenario.to_json())
                .with_context(|| format!("writing {}", path.display()))?;
            writeln!(out, "wrote {} to {}", scenario.id, path.display())?;
        }
        None => out.write_all(scenario.to_json().as_bytes())?,
    }
    Ok(EXIT_OK)
}

fn gen_suite_cmd(args: &GenSuiteArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let dir = args
        .out
        .clone()
        .unwrap_or_else(|| scenario_dir(&args.scenarios));
    let suite = build_suite()?;
    for scenario in &suite {
        write_scenario(&dir, scenario).with_context(|| format!("writing {}", scenario.id))?;
    }
    if json {
        print_json(out, &json!({"written": suite.len(), "dir": dir}))?;
    } else {
        writeln!(out, "wrote {} scenarios to {}", suite.len(), dir.display())?;
    }
    Ok(EXIT_OK)
}

fn validate_cmd(args: &ValidateArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let path = args
        .path
        .clone()
        .unwrap_or_else(|| scenario_dir(&args.scenarios));
    let budgets = args.budgets.budgets();
    let mut problems: Vec<(String, String)> = Vec::new();
    let checked = if path.is_dir() {
        let store = ScenarioStore::load_dir(&path)
            .with_context(|| format!("loading scenarios from {}", path.display()))?;
        problems.extend(
            audit_suite_shape(store.iter())
                .into_iter()
                .map(|p| (String::from("suite"), p)),
        );
        for s in store.iter() {
            problems.extend(
                audit_scenario(s, budgets)
                    .into_iter()
                    .map(|p| (s.id.clone(), p)),
            );
        }
        store.len()
    } else {
        let bytes = fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let s = load_scenario(&bytes)
            .with_context(|| format!("invalid scenario {}", path.display()))?;
        problems.extend(
            audit_scenario(&s, budgets)
                .into_iter()
                .map(|p| (s.id.clone(), p)),
        );
        1
    };
    if json {
        let list: Vec<Value> = problems
            .iter()
            .map(|(id, p)| json!({"scenario": id, "problem": p}))
            .collect();
        print_json(out, &json!({"checked": checked, "problems": list}))?;
    } else {
        for (id, p) in &problems {
            writeln!(out, "{id}: {p}")?;
        }
        writeln!(
            out,
            "{checked} scenarios checked, {} problems",
            problems.len()
        )?;
    }
    Ok(if problems.is_empty() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn bench_cmd(args: &BenchRunArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let store = Arc::new(load_store(&args.scenarios)?);
    let private = match &args.url {
        Some(_) => None,
        None => {
            let addr: SocketAddr = "127.0.0.1:0".parse().expect("literal address");
            Some(spawn_server(
                Arc::new(SimService::new(store.clone())),
                addr,
            )?)
        }
    };
    let url = match (&args.url, &private) {
        (Some(url), _) => url.clone(),
        (None, Some(server)) => server.url(),
        (None, None) => unreachable!("a private server runs when no url is given"),
    };
    let transport: Box<dyn Transport> = match args.transport {
        TransportKind::Rest => Box::new(RestTransport::new(&url)),
        TransportKind::Mcp => Box::new(McpTransport::new(&url)?),
        TransportKind::McpStdio => {
            let exe = std::env::current_exe().context("locating the blocksbench binary")?;
            let mut command = std::process::Command::new(exe);
            command.args(["mcp", "--url", &url]);
            Box::new(McpProcess::spawn(command)?)
        }
    };
    let categories = args
        .categories
        .0
        .iter()
        .map(|&c| Category::new(c).expect("parsed categories are 1 to 5"))
        .collect();
    let config = BenchConfig {
        agent: args.agent,
        categories,
        seed: args.seed,
        options: SolveOptions {
            budgets: args.budgets.budgets(),
            ..SolveOptions::default()
        },
    };
    let report = run_bench(&store, &url, transport, &config)?;
    if let Some(path) = &args.out {
        fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    let markdown = render_markdown(&report);
    if let Some(path) = &args.markdown {
        fs::write(path, &markdown).with_context(|| format!("writing {}", path.display()))?;
    }
    if json {
        out.write_all(report.to_json().as_bytes())?;
    } else {
        out.write_all(markdown.as_bytes())?;
    }
    let failures = report.invariant_failures();
    if !failures.is_empty() {
        bail!("invariant checks failed:\n{}", failures.join("\n"));
    }
    Ok(EXIT_OK)
}

fn render_cmd(args: &RenderArgs, json: bool, out: &mut dyn Write) -> Result<i32> {
    let s = load_file(&args.file)?;
    let slots = s.positions().max(s.goal.stacks.len());
    let mut goal_stacks = s.goal.stacks.clone();
    goal_stacks.resize(slots, Vec::new());
    let goal = WorldState::new(
        s.initial.blocks().cloned(),
        goal_stacks,
        GripperStatus::Idle,
    )?;
    let (initial, goal) = (render_ascii(&s.initial), render_ascii(&goal));
    if json {
        print_json(
            out,
            &json!({"scenario": s.id, "initial": initial, "goal": goal}),
        )?;
    } else {
        writeln!(
            out,
            "{} ({})\n\ninitial:\n{initial}\ngoal:\n{goal}",
            s.id, s.goal.description
        )?;
    }
    Ok(EXIT_OK)
}
