//! `staticfilter`: rewrite, check, evaluate and benchmark filtered programs.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use staticfilter_bench::{pool, reports_to_json, Workload};
use staticfilter_core::ast::idb_predicates;
use staticfilter_core::emit::{emit_program, render_rule, Dialect};
use staticfilter_core::engine::{compute_filters, explain, EngineError, FilterConfig, Mode};
use staticfilter_core::eval::{
    stable_models, stratified_evaluate, EvalError, EvalOptions, FactStore, Model,
};
use staticfilter_core::filter::{auto_theory, HornTheory, Regime};
use staticfilter_core::normalize::normalize;
use staticfilter_core::parser::{load_facts_path, parse_program, parse_str, SourceProgram};
use staticfilter_core::rewrite::rewrite_with_report;
use staticfilter_core::{Pred, Program};

const ITER_CAP_VAR: &str = "STATICFILTER_ITER_CAP";

#[derive(Parser)]
#[command(
    name = "staticfilter",
    version,
    about = "Static filter pushing for Datalog programs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute filters and print the rewritten program
    Rewrite(RewriteArgs),
    /// Compare the outputs of two programs on fact sets
    Check(CheckArgs),
    /// Evaluate a stratified program and print output facts as CSV
    Eval(EvalArgs),
    /// Enumerate stable models
    Stable(StableArgs),
    /// Run a benchmark family and print a JSON report
    Bench(BenchArgs),
    /// Show how the filter of one predicate was derived
    Explain(ExplainArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Full,
    Casf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Prop,
    Horn,
}

#[derive(Clone, Copy, ValueEnum)]
enum EmitArg {
    Generic,
    Clingo,
    Souffle,
}

#[derive(Args)]
struct FilterArgs {
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    #[arg(long, value_enum, default_value = "horn")]
    regime: RegimeArg,
    /// `auto` adds the order theory for the program's numeric constants;
    /// anything else is a file of theory rules
    #[arg(long, default_value = "auto")]
    theory: String,
}

#[derive(Args)]
struct RewriteArgs {
    input: PathBuf,
    #[command(flatten)]
    filter: FilterArgs,
    #[arg(long, value_enum, default_value = "generic")]
    emit: EmitArg,
    /// Print every filter update to stderr
    #[arg(long)]
    trace: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Rewrite even without @output declarations, which deletes every rule
    #[arg(long)]
    allow_empty_outputs: bool,
}

#[derive(Args)]
struct FactArgs {
    /// `pred=path` or `pred/arity=path`; repeatable
    #[arg(long = "facts", value_name = "PRED=PATH")]
    facts: Vec<String>,
    #[arg(long)]
    max_rounds: Option<u64>,
}

#[derive(Args)]
struct CheckArgs {
    original: PathBuf,
    rewritten: PathBuf,
    /// Fact sets, each a comma-separated list of `pred=path`. Without any,
    /// the original's @facts bindings are used.
    #[arg(long = "facts", value_name = "PRED=PATH,..")]
    fact_sets: Vec<String>,
    #[arg(long)]
    max_rounds: Option<u64>,
}

#[derive(Args)]
struct EvalArgs {
    input: PathBuf,
    #[command(flatten)]
    facts: FactArgs,
    /// Print every IDB predicate, not only outputs
    #[arg(long)]
    all: bool,
    /// Write one `<pred>.csv` per predicate into this directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StableArgs {
    input: PathBuf,
    #[command(flatten)]
    facts: FactArgs,
    /// Largest number of undetermined ground atoms to enumerate over
    #[arg(long, default_value_t = 20)]
    atom_cap: usize,
    #[arg(long)]
    all: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Counter,
    Witness,
    Reach,
    Tc,
    Permutation,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(value_enum)]
    family: FamilyArg,
    /// Counter width, permutation k, or edge count for graph families;
    /// repeatable, jobs run in parallel
    #[arg(long = "size", required = true)]
    sizes: Vec<usize>,
    /// Node count for graph families; defaults to the edge count
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, default_value_t = 5)]
    bound: i64,
    /// Facts for the permutation family
    #[arg(long, default_value_t = 100)]
    facts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    runs: usize,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExplainArgs {
    input: PathBuf,
    /// `name` or `name/arity`
    predicate: String,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Mismatch(String),
    Cap(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Mismatch(_) => 2,
            Failure::Cap(_) => 3,
        }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Failure {
        match e {
            EngineError::IterationCap { .. } => Failure::Cap(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Failure {
        match e {
            EvalError::StepCap { .. }
            | EvalError::FactCap { .. }
            | EvalError::DomainBound { .. }
            | EvalError::TooManyAtoms { .. } => Failure::Cap(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn read_program(path: &Path) -> Result<Program> {
    let text =
        std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    parse_program(&SourceProgram::new(text, path.display().to_string())).map_err(usage)
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn resolve_pred(program: &Program, spec: &str) -> Result<Pred> {
    if let Some((name, arity)) = spec.rsplit_once('/') {
        let arity = arity
            .parse()
            .map_err(|_| usage(format!("bad arity in {spec}")))?;
        return Ok(Pred::new(name, arity));
    }
    let matches: Vec<Pred> = program
        .predicates()
        .into_iter()
        .filter(|p| p.name.as_ref() == spec)
        .collect();
    match matches.as_slice() {
        [p] => Ok(p.clone()),
        [] => Err(usage(format!("unknown predicate {spec}"))),
        _ => Err(usage(format!(
            "predicate {spec} is ambiguous; write {spec}/arity"
        ))),
    }
}

/// Inline facts, @facts bindings and `pred=path` arguments.
fn load_store(program: &Program, program_path: &Path, specs: &[String]) -> Result<FactStore> {
    let mut store = FactStore::load_bindings(program, &base_dir(program_path)).map_err(usage)?;
    for spec in specs {
        let (pred, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("expected PRED=PATH, got {spec}")))?;
        let pred = resolve_pred(program, pred)?;
        store.add_file(
            &load_facts_path(Path::new(path), &pred).map_err(|e| usage(format!("{path}: {e}")))?,
        );
    }
    Ok(store)
}

fn eval_options(max_rounds: Option<u64>) -> EvalOptions {
    match max_rounds {
        Some(n) => EvalOptions::default().with_max_rounds(Some(n)),
        None => EvalOptions::default(),
    }
}

fn filter_config(program: &Program, args: &FilterArgs, trace: bool) -> Result<FilterConfig> {
    let regime = match args.regime {
        RegimeArg::Prop => Regime::prop(),
        RegimeArg::Horn => Regime::horn(theory(program, &args.theory)?),
    };
    let mode = match args.mode {
        ModeArg::Full => Mode::Full,
        ModeArg::Casf => Mode::Casf,
    };
    let mut cfg = FilterConfig::new(mode, regime);
    if trace {
        cfg = cfg.with_trace();
    }
    if let Ok(v) = std::env::var(ITER_CAP_VAR) {
        let cap = v.trim().parse().map_err(|_| {
            usage(format!(
                "{ITER_CAP_VAR} must be a positive integer, got {v:?}"
            ))
        })?;
        cfg = cfg.with_iteration_cap(Some(cap));
    }
    Ok(cfg)
}

fn theory(program: &Program, spec: &str) -> Result<HornTheory> {
    if spec == "auto" {
        return Ok(auto_theory(program));
    }
    let text = std::fs::read_to_string(spec).map_err(|e| usage(format!("{spec}: {e}")))?;
    let text = if text.contains("@theory") {
        text
    } else {
        format!("@theory {{\n{text}\n}}\n")
    };
    let file = parse_str(&text).map_err(|e| usage(format!("{spec}: {e}")))?;
    Ok(program.theory.merge(&file.theory))
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_rewrite(args: &RewriteArgs) -> Result<()> {
    let program = read_program(&args.input)?;
    if program.outputs.is_empty() {
        if !args.allow_empty_outputs {
            eprintln!("warning: no outputs: all filters ⊤, program unchanged");
            return Err(usage("refusing to rewrite without @output; pass --allow-empty-outputs to delete every rule"));
        }
        eprintln!("warning: no outputs: every filter is ⊥ and every rule is deleted");
    }
    let cfg = filter_config(&program, &args.filter, args.trace)?;
    let normalized = normalize(&program).map_err(usage)?;
    let assignment = compute_filters(&normalized, &cfg)?;
    let report = rewrite_with_report(&normalized, &assignment, &cfg.regime)?;
    let dialect = match args.emit {
        EmitArg::Generic => Dialect::Generic,
        EmitArg::Clingo => Dialect::Clingo,
        EmitArg::Souffle => Dialect::Souffle,
    };
    let text = emit_program(&report.program, dialect).map_err(usage)?;
    if args.trace {
        for e in &assignment.trace {
            eprintln!("{e}");
        }
    }
    for (p, theta) in &assignment.filters {
        eprintln!("Θ_{p} = {theta}");
    }
    eprintln!("iterationCount = {}", assignment.iteration_count);
    if assignment.weakened {
        eprintln!("note: a filter hit the DNF size cap and was weakened");
    }
    if report.deleted.is_empty() {
        eprintln!("dropped rules: none");
    } else {
        for i in &report.deleted {
            eprintln!(
                "dropped rule {i}: {}",
                render_rule(&normalized.rules[i - 1])
            );
        }
    }
    write_output(args.out.as_deref(), &text)
}

fn run(program: &Program, store: &FactStore, opts: &EvalOptions) -> Result<Model> {
    Ok(stratified_evaluate(program, store, opts)?)
}

fn parse_fact_set(program: &Program, spec: &str) -> Result<FactStore> {
    let mut store = FactStore::new();
    for item in spec.split(',').filter(|s| !s.is_empty()) {
        let (pred, path) = item
            .split_once('=')
            .ok_or_else(|| usage(format!("expected PRED=PATH, got {item}")))?;
        let pred = resolve_pred(program, pred)?;
        store.add_file(
            &load_facts_path(Path::new(path), &pred).map_err(|e| usage(format!("{path}: {e}")))?,
        );
    }
    Ok(store)
}

fn cmd_check(args: &CheckArgs) -> Result<()> {
    let original = read_program(&args.original)?;
    let rewritten = read_program(&args.rewritten)?;
    let a: BTreeSet<&Pred> = original.outputs.iter().collect();
    let b: BTreeSet<&Pred> = rewritten.outputs.iter().collect();
    if a != b {
        return Err(usage("the programs declare different outputs"));
    }
    let sets = if args.fact_sets.is_empty() {
        vec![FactStore::load_bindings(&original, &base_dir(&args.original)).map_err(usage)?]
    } else {
        args.fact_sets
            .iter()
            .map(|s| parse_fact_set(&original, s))
            .collect::<Result<_>>()?
    };
    let opts = eval_options(args.max_rounds);
    for (i, store) in sets.iter().enumerate() {
        let left = run(&original, store, &opts)?.outputs(&original).atom_set();
        let right = run(&rewritten, store, &opts)?.outputs(&original).atom_set();
        if let Some(w) = left.difference(&right).next() {
            return Err(Failure::Mismatch(format!(
                "mismatch on fact set {}: {w} derived only by {}",
                i + 1,
                args.original.display()
            )));
        }
        if let Some(w) = right.difference(&left).next() {
            return Err(Failure::Mismatch(format!(
                "mismatch on fact set {}: {w} derived only by {}",
                i + 1,
                args.rewritten.display()
            )));
        }
    }
    println!(
        "equivalent on {} fact set{}",
        sets.len(),
        if sets.len() == 1 { "" } else { "s" }
    );
    Ok(())
}

fn shown(program: &Program, all: bool) -> Vec<Pred> {
    if all {
        idb_predicates(program).into_iter().collect()
    } else {
        program.outputs.clone()
    }
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let program = read_program(&args.input)?;
    let store = load_store(&program, &args.input, &args.facts.facts)?;
    let model = run(&program, &store, &eval_options(args.facts.max_rounds))?;
    let preds = shown(&program, args.all);
    match &args.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(usage)?;
            for p in &preds {
                let path = dir.join(format!("{}.csv", p.name));
                std::fs::write(&path, model.facts.to_csv(p))
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
        }
        None => {
            for p in &preds {
                println!("# {p}");
                print!("{}", model.facts.to_csv(p));
            }
        }
    }
    eprintln!(
        "rounds = {}, firings = {}",
        model.rounds,
        model.total_firings()
    );
    Ok(())
}

fn cmd_stable(args: &StableArgs) -> Result<()> {
    let program = read_program(&args.input)?;
    let store = load_store(&program, &args.input, &args.facts.facts)?;
    let models = stable_models(&program, &store, args.atom_cap)?;
    let preds: BTreeSet<Pred> = shown(&program, args.all).into_iter().collect();
    for (i, m) in models.iter().enumerate() {
        println!("Answer {}:", i + 1);
        let atoms: Vec<String> = m
            .iter()
            .filter(|a| preds.contains(&a.pred))
            .map(ToString::to_string)
            .collect();
        println!("{}", atoms.join(" "));
    }
    println!(
        "{} stable model{}",
        models.len(),
        if models.len() == 1 { "" } else { "s" }
    );
    Ok(())
}

fn cmd_bench(args: &BenchArgs) -> Result<()> {
    let loads: Vec<Workload> = args
        .sizes
        .iter()
        .map(|&n| match args.family {
            FamilyArg::Counter => Workload::Counter { width: n },
            FamilyArg::Witness => Workload::Witness { width: n },
            FamilyArg::Reach => Workload::Reach {
                bound: args.bound,
                nodes: args.nodes.unwrap_or(n),
                edges: n,
            },
            FamilyArg::Tc => Workload::TransitiveClosure {
                nodes: args.nodes.unwrap_or(n),
                edges: n,
            },
            FamilyArg::Permutation => Workload::Permutation {
                k: n,
                facts: args.facts,
            },
        })
        .collect();
    let workers = args.jobs.unwrap_or_else(pool::default_workers);
    let reports = pool::run_pool(loads, workers, |w| w.run(args.seed, args.runs));
    let reports = reports
        .into_iter()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(usage)?;
    for r in &reports {
        for v in &r.variants {
            if let Some(e) = &v.error {
                eprintln!("{} {}: {e}", r.name, v.variant);
            }
        }
    }
    write_output(args.out.as_deref(), &(reports_to_json(&reports) + "\n"))
}

fn cmd_explain(args: &ExplainArgs) -> Result<()> {
    let program = read_program(&args.input)?;
    let pred = resolve_pred(&program, &args.predicate)?;
    let normalized = normalize(&program).map_err(usage)?;
    if !idb_predicates(&normalized).contains(&pred) {
        return Err(usage(format!("{pred} is not an IDB predicate")));
    }
    let cfg = filter_config(&program, &args.filter, true)?;
    let assignment = compute_filters(&normalized, &cfg)?;
    let text = explain(&assignment, &pred).ok_or_else(|| usage(format!("no filter for {pred}")))?;
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Rewrite(a) => cmd_rewrite(a),
        Command::Check(a) => cmd_check(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Stable(a) => cmd_stable(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Explain(a) => cmd_explain(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Mismatch(m) | Failure::Cap(m) => m,
            };
            eprintln!("error: {msg}");
            ExitCode::from(f.code())
        }
    }
}
