//! The `nimlog` command line. Exit codes: 0 ok, 1 I/O, 2 language error
//! (parse, safety, stratification), 3 schema violations, 4 infeasible
//! scenario.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::ast::{format_facts, Fact, Program};
use crate::engine::{evaluate_naive, evaluate_seminaive, stratify, FactStore, Origin};
use crate::export::{render_report, to_dot, to_json};
use crate::inference::{Pipeline, PipelineError, RuleSet};
use crate::parser::{parse_fact_file, parse_program};
use crate::schema::{load_store, validate_facts, Catalog};
use crate::sim::{generate, score, GroundTruth, ScenarioConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_LANGUAGE: i32 = 2;
pub const EXIT_SCHEMA: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "nimlog", version, about = "Datalog-based integration network inference")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate Datalog programs over fact files and print the derived facts.
    Eval(EvalArgs),
    /// Reconstruct the integration network from raw fact files.
    Infer(InferArgs),
    /// Generate a random landscape as raw facts plus its ground truth.
    Simulate(SimulateArgs),
    /// Print the predicate catalog.
    Schema(SchemaArgs),
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// `.dl` program files and `.facts` fact files, in any order.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Use naive instead of semi-naive iteration.
    #[arg(long)]
    pub naive: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Raw fact files.
    pub facts: Vec<PathBuf>,
    /// Directory of `.dl` files replacing or extending the bundled rules.
    #[arg(long, value_name = "DIR")]
    pub rules: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub json: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub dot: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    pub report: Option<PathBuf>,
    /// Ground-truth JSON to score the result against (shown in the report).
    #[arg(long, value_name = "PATH")]
    pub truth: Option<PathBuf>,
    /// Drop facts that violate the catalog instead of failing.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    pub systems: usize,
    /// Defaults to half the number of systems, rounded up.
    #[arg(long)]
    pub hosts: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub middlewares: usize,
    #[arg(long, default_value_t = 0)]
    pub flows: usize,
    #[arg(long, default_value_t = 0.0)]
    pub duplication: f64,
    #[arg(long = "attr-loss", default_value_t = 0.0)]
    pub attr_loss: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub attrs_per_system: usize,
    #[arg(long, default_value_t = 2)]
    pub attrs_per_flow: usize,
    #[arg(long, value_name = "PATH")]
    pub out_facts: PathBuf,
    #[arg(long, value_name = "PATH")]
    pub out_truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct SchemaArgs {
    #[arg(long)]
    pub markdown: bool,
}

/// A failed command: exit code plus message for stderr.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> CmdResult {
    fs::write(path, contents).map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))
}

fn parse_facts_at(path: &Path) -> Result<Vec<Fact>, Failure> {
    parse_fact_file(&read(path)?)
        .map_err(|e| Failure::new(EXIT_LANGUAGE, format!("{}:{e}", path.display())))
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> CmdResult {
    let mut programs = Vec::new();
    let mut facts = Vec::new();
    for path in &args.inputs {
        if path.extension().is_some_and(|x| x == "dl") {
            let p = parse_program(&read(path)?)
                .map_err(|e| Failure::new(EXIT_LANGUAGE, format!("{}:{e}", path.display())))?;
            programs.push(p);
        } else {
            facts.extend(parse_facts_at(path)?);
        }
    }
    let mut program = Program::merge(programs);
    program.facts.extend(facts);
    let strat = stratify(&program).map_err(|e| Failure::new(EXIT_LANGUAGE, e.to_string()))?;
    let mut base = FactStore::new();
    base.ingest_snapshot(&program.facts, Origin::Discovered)
        .map_err(|e| Failure::new(EXIT_LANGUAGE, e.to_string()))?;
    let result = if args.naive {
        evaluate_naive(&strat, &base)
    } else {
        evaluate_seminaive(&strat, &base)
    };
    let derived = result.sorted_facts(|f| f.origin == Origin::Derived && !f.outdated);
    out.write_all(format_facts(&derived).as_bytes())
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

pub fn cmd_infer(args: &InferArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let catalog = Catalog::nim();
    let mut facts = Vec::new();
    for path in &args.facts {
        facts.extend(parse_facts_at(path)?);
    }
    let validation = validate_facts(&catalog, &facts);
    if !validation.is_ok() {
        for v in &validation.violations {
            let _ = writeln!(err, "{v}");
        }
        if !args.lenient {
            return Err(Failure::new(
                EXIT_SCHEMA,
                format!("{} fact(s) violate the catalog", validation.violations.len()),
            ));
        }
    }
    let store = load_store(&catalog, &validation.valid)
        .map_err(|e| Failure::new(EXIT_SCHEMA, e.to_string()))?;
    let rules = match &args.rules {
        Some(dir) => RuleSet::bundled()
            .with_overrides(dir)
            .map_err(|e| Failure::new(EXIT_IO, e.to_string()))?,
        None => RuleSet::bundled(),
    };
    let graph = Pipeline::with_rules(rules).run(&store).map_err(|e| match e {
        PipelineError::Rules(e) => Failure::new(EXIT_LANGUAGE, e.to_string()),
        PipelineError::Engine(e) => Failure::new(EXIT_LANGUAGE, e.to_string()),
    })?;

    let scored = match &args.truth {
        Some(path) => {
            let truth: GroundTruth = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::new(EXIT_IO, format!("{}: {e}", path.display())))?;
            Some(score(&graph, &truth))
        }
        None => None,
    };
    if let Some(p) = &args.json {
        write(p, &to_json(&graph))?;
    }
    if let Some(p) = &args.dot {
        write(p, &to_dot(&graph))?;
    }
    let report = render_report(&graph, scored.as_ref());
    if let Some(p) = &args.report {
        write(p, &report)?;
    }
    let summary = if args.json.is_none() && args.dot.is_none() && args.report.is_none() {
        report
    } else {
        format!(
            "{} systems, {} groups, {} flows\n",
            graph.systems.len(),
            graph.groups.len(),
            graph.flow_count()
        )
    };
    out.write_all(summary.as_bytes())
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> CmdResult {
    let config = ScenarioConfig {
        n_systems: args.systems,
        n_hosts: args.hosts.unwrap_or(args.systems.div_ceil(2)),
        n_middlewares: args.middlewares,
        n_flows: args.flows,
        duplication_rate: args.duplication,
        attr_loss_rate: args.attr_loss,
        rng_seed: args.seed,
        attrs_per_system: args.attrs_per_system,
        attrs_per_flow: args.attrs_per_flow,
    };
    let (facts, truth) = generate(&config).map_err(|e| Failure::new(EXIT_CONFIG, e.to_string()))?;
    write(&args.out_facts, &format_facts(&facts))?;
    let mut truth_json = serde_json::to_string_pretty(&truth).expect("truth serializes");
    truth_json.push('\n');
    write(&args.out_truth, &truth_json)?;
    writeln!(
        out,
        "{} facts, {} systems, {} hosts, {} flows, {} groups",
        facts.len(),
        truth.systems.len(),
        truth.hosts.len(),
        truth.flows.len(),
        truth.groups().len()
    )
    .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

pub fn cmd_schema(args: &SchemaArgs, out: &mut dyn Write) -> CmdResult {
    let catalog = Catalog::nim();
    let text = if args.markdown {
        catalog.as_markdown()
    } else {
        catalog.as_declarations()
    };
    out.write_all(text.as_bytes())
        .map_err(|e| Failure::new(EXIT_IO, e.to_string()))
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Infer(a) => cmd_infer(a, out, err),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Schema(a) => cmd_schema(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
