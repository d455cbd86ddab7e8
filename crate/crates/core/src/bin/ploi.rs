use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use ploi::benchgen::{generate_suite, Family, Suite, SuiteSpec};
use ploi::experiment::{extras_csv, iterations_csv, read_rows, run_experiment, times_markdown, ExperimentConfig, Method, Split};
use ploi::importance::{train, Aggregation, ImportanceModel, ModelConfig, TrainConfig};
use ploi::labeling::{build_dataset, LabeledDataset, RemovalOrder};
use ploi::planner::{validate, PlannerConfig, PlannerMode};
use ploi::runtime::{neighbors_plan, ploi_plan, pure_plan, PloiConfig, Scorer};
use ploi::strips::{parse_domain, parse_plan, parse_problem, print_plan, DomainModel, Problem};

#[derive(Parser)]
#[command(name = "ploi", version, about = "Planning with learned object importance")]
struct Cli {
    /// Log progress (repeat for more detail). RUST_LOG overrides this.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a train/test suite of generated problems.
    Generate(GenerateArgs),
    /// Label the objects of a suite's training problems.
    Label(LabelArgs),
    /// Train an importance model on a labeled dataset.
    Train(TrainArgs),
    /// Run planning methods over a suite split.
    Run(RunArgs),
    /// Turn results files into tables and plot data.
    Report(ReportArgs),
    /// Solve one problem file.
    Plan(PlanArgs),
    /// Check a plan file against a problem.
    Validate(ValidateArgs),
}

/// `lo-hi` or a single number.
fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    match s.split_once('-') {
        Some((lo, hi)) => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                return Err(format!("empty range {lo}-{hi}"));
            }
            Ok((lo, hi))
        }
        None => parse(s).map(|v| (v, v)),
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: Family,
    #[arg(long)]
    train: usize,
    #[arg(long)]
    test: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Total objects per training problem (disks for hanoi), e.g. `36-52`.
    #[arg(long, value_parser = parse_range)]
    train_size: Option<(usize, usize)>,
    #[arg(long, value_parser = parse_range)]
    test_size: Option<(usize, usize)>,
    #[arg(long, value_parser = parse_range)]
    train_goal: Option<(usize, usize)>,
    #[arg(long, value_parser = parse_range)]
    test_goal: Option<(usize, usize)>,
    /// Extra objects added to every test problem.
    #[arg(long, default_value_t = 0)]
    extraneous: usize,
    /// Write each test problem once per listed extraneous count.
    #[arg(long, value_delimiter = ',', conflicts_with = "extraneous")]
    sweep: Option<Vec<usize>>,
    /// Blocks only: put some extras on top of goal piles.
    #[arg(long)]
    obstruct: bool,
}

#[derive(Args, Clone)]
struct PlannerArgs {
    /// gbfs, bfs or external.
    #[arg(long, default_value = "gbfs")]
    planner: PlannerMode,
    /// Command for the external planner, with {domain}, {problem} and {plan-out}.
    #[arg(long)]
    planner_cmd: Option<String>,
}

impl PlannerArgs {
    fn config(&self, timeout: f64) -> Result<PlannerConfig> {
        if !(timeout > 0.0 && timeout.is_finite()) {
            bail!("timeout must be a positive number of seconds");
        }
        let t = Duration::from_secs_f64(timeout);
        Ok(match self.planner {
            PlannerMode::BuiltinGbfs => PlannerConfig::gbfs(t),
            PlannerMode::BuiltinBfs => PlannerConfig::bfs(t),
            PlannerMode::External => {
                let cmd = self
                    .planner_cmd
                    .as_deref()
                    .ok_or_else(|| anyhow!("--planner external needs --planner-cmd"))?;
                PlannerConfig::external(cmd, t)
            }
        })
    }
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "train")]
    split: Split,
    /// Seconds per sufficiency check.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Try removals in a seeded random order instead of by name.
    #[arg(long)]
    shuffle_seed: Option<u64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    #[arg(long, default_value_t = 1000)]
    epochs: usize,
    #[arg(long, default_value_t = 16)]
    batch_size: usize,
    #[arg(long, default_value_t = 16)]
    hidden: usize,
    /// Message-passing iterations.
    #[arg(long, default_value_t = 3)]
    k: usize,
    /// Loss weight on objects labeled 1.
    #[arg(long, default_value_t = 10.0)]
    weight: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "sum")]
    aggregation: Aggregation,
    /// Add goal channels for negative literals.
    #[arg(long)]
    negative_goals: bool,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    suite: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "pure,ploi")]
    methods: Vec<Method>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    /// Seconds per cell.
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[command(flatten)]
    planner: PlannerArgs,
    #[arg(long, default_value = "test")]
    split: Split,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Args)]
struct ReportArgs {
    /// results.csv files or run directories holding one.
    #[arg(long, required = true, num_args = 1..)]
    results: Vec<PathBuf>,
    /// Directory for times.md, extras.csv and iterations.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, default_value = "pure")]
    method: Method,
    #[arg(long)]
    model: Option<PathBuf>,
    /// Seed for random-score.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 120.0)]
    timeout: f64,
    #[arg(long, default_value_t = 0.9)]
    gamma: f64,
    #[command(flatten)]
    planner: PlannerArgs,
    /// Plan file to write; stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON-lines trace of every planner call.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    domain: PathBuf,
    #[arg(long)]
    problem: PathBuf,
    #[arg(long)]
    plan: PathBuf,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_domain(path: &Path) -> Result<Arc<DomainModel>> {
    let text = read(path)?;
    parse_domain(&text)
        .map(Arc::new)
        .map_err(|e| anyhow!(e.render(&path.display().to_string())))
}

fn load_problem(path: &Path, domain: &Arc<DomainModel>) -> Result<Problem> {
    let text = read(path)?;
    parse_problem(&text, domain).map_err(|e| anyhow!(e.render(&path.display().to_string())))
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let mut spec = SuiteSpec::defaults(a.family, a.train, a.test, a.seed);
    if let Some(r) = a.train_size {
        spec.train_size = r;
    }
    if let Some(r) = a.test_size {
        spec.test_size = r;
    }
    if let Some(r) = a.train_goal {
        spec.train_goal = r;
    }
    if let Some(r) = a.test_goal {
        spec.test_goal = r;
    }
    spec.extraneous = a.extraneous;
    spec.sweep = a.sweep;
    spec.obstruct = a.obstruct;
    let suite = generate_suite(&spec, &a.out)?;
    println!(
        "wrote {} train and {} test problems to {}",
        suite.train.len(),
        suite.test.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_label(a: LabelArgs) -> Result<()> {
    let planner = a.planner.config(a.timeout)?;
    let suite = Suite::load(&a.suite)?;
    let problems = match a.split {
        Split::Train => suite.train,
        Split::Test => suite.test,
    };
    let problems = problems
        .into_iter()
        .map(|p| {
            let id = p.entry.file.trim_end_matches(".pddl").replace('/', "-");
            (id, p.problem)
        })
        .collect();
    let order = match a.shuffle_seed {
        Some(seed) => RemovalOrder::Shuffled { seed },
        None => RemovalOrder::Lexicographic,
    };
    let dataset = build_dataset(problems, &planner, order)?;
    dataset.save(&a.out)?;
    println!(
        "labeled {} problems ({} skipped), {} object labels, in {}",
        dataset.entries.len(),
        dataset.skipped.len(),
        dataset.total_labels(),
        a.out.display()
    );
    Ok(())
}

fn cmd_train(a: TrainArgs) -> Result<()> {
    let dataset = LabeledDataset::load(&a.dataset)?;
    let model_cfg = ModelConfig {
        hidden: a.hidden,
        iterations: a.k,
        aggregation: a.aggregation,
        negative_goals: a.negative_goals,
    };
    let cfg = TrainConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        positive_weight: a.weight,
        seed: a.seed,
    };
    let model = train(&dataset.examples(), &model_cfg, &cfg)?;
    model.save(&a.out)?;
    println!(
        "trained on {} problems, final epoch loss {:.4}, saved {}",
        model.meta.examples,
        model.meta.final_loss,
        a.out.display()
    );
    Ok(())
}

fn cmd_run(a: RunArgs) -> Result<()> {
    let cfg = ExperimentConfig {
        suite: a.suite,
        split: a.split,
        methods: a.methods,
        model: a.model,
        seeds: a.seeds,
        timeout_s: a.timeout,
        gamma: a.gamma,
        planner: a.planner.config(a.timeout)?,
        output: a.out,
        jobs: a.jobs,
    };
    let out = run_experiment(&cfg)?;
    for m in &out.summary.methods {
        println!(
            "{:<13} solved {:>3}/{:<3} fail rate {:.2}  mean time {}",
            m.method,
            m.solved,
            m.cells,
            m.failure_rate,
            m.mean_time_s.map_or("-".to_string(), |t| format!("{t:.3}s"))
        );
    }
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let mut rows = Vec::new();
    for path in &a.results {
        let file = if path.is_dir() { path.join("results.csv") } else { path.clone() };
        rows.extend(read_rows(&file)?);
    }
    let table = times_markdown(&rows);
    print!("{table}");
    if let Some(out) = a.out {
        std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        for (name, text) in [("times.md", table), ("extras.csv", extras_csv(&rows)), ("iterations.csv", iterations_csv(&rows))] {
            let path = out.join(name);
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
    }
    Ok(())
}

/// Exit code 1 when no plan was found.
fn cmd_plan(a: PlanArgs) -> Result<ExitCode> {
    let domain = load_domain(&a.domain)?;
    let problem = load_problem(&a.problem, &domain)?;
    let config = PloiConfig {
        gamma: a.gamma,
        ..PloiConfig::new(a.planner.config(a.timeout)?)
    };
    let (result, trace) = match a.method {
        Method::Pure => pure_plan(&problem, &config)?,
        Method::Neighbors => neighbors_plan(&problem, &config)?,
        Method::Constant => ploi_plan(&problem, &Scorer::Constant(1.0), &config)?,
        Method::RandomScore => ploi_plan(&problem, &Scorer::Random { seed: a.seed }, &config)?,
        Method::Ploi => {
            let path = a.model.as_ref().ok_or_else(|| anyhow!("--method ploi needs --model"))?;
            let model = ImportanceModel::load_for(path, &domain)?;
            ploi_plan(&problem, &Scorer::Learned(Arc::new(model)), &config)?
        }
    };
    if let Some(path) = &a.trace {
        std::fs::write(path, trace.to_jsonl()).with_context(|| format!("writing {}", path.display()))?;
    }
    let Some(plan) = result.outcome.plan() else {
        eprintln!("no plan: {}", result.outcome.label());
        return Ok(ExitCode::from(1));
    };
    let text = print_plan(plan);
    match &a.out {
        Some(path) => std::fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    log::info!(
        "{} steps, {} planner calls, {:.3}s",
        plan.len(),
        trace.planner_calls(),
        trace.total_time_s
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_validate(a: ValidateArgs) -> Result<ExitCode> {
    let domain = load_domain(&a.domain)?;
    let problem = load_problem(&a.problem, &domain)?;
    let plan = parse_plan(&read(&a.plan)?, &problem)
        .map_err(|(line, msg)| anyhow!("{}:{line}: {msg}", a.plan.display()))?;
    if validate(&plan, &problem) {
        println!("valid ({} steps)", plan.len());
        Ok(ExitCode::SUCCESS)
    } else {
        println!("invalid");
        Ok(ExitCode::from(1))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = match cli.command {
        Command::Generate(a) => cmd_generate(a).map(|_| ExitCode::SUCCESS),
        Command::Label(a) => cmd_label(a).map(|_| ExitCode::SUCCESS),
        Command::Train(a) => cmd_train(a).map(|_| ExitCode::SUCCESS),
        Command::Run(a) => cmd_run(a).map(|_| ExitCode::SUCCESS),
        Command::Report(a) => cmd_report(a).map(|_| ExitCode::SUCCESS),
        Command::Plan(a) => cmd_plan(a),
        Command::Validate(a) => cmd_validate(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::from(1)
    })
}
