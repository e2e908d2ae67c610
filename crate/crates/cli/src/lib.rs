//! Command-line driver for pathshap: query evaluation, answer enumeration,
//! Shapley values and nonzero decisions over labeled graph files.

pub mod output;

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathshap::explain::{decide_nonzero, solve, ExplainRequest, Limits, Mode, PlayerKind, Verdict};
use pathshap::game::PlayerId;
use pathshap::graph::LabeledGraph;
use pathshap::query::{enumerate_answers, eval_crpq_bound, Assignment, Crpq, DEFAULT_ANSWER_CAP};
use thiserror::Error;

pub use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "pathshap",
    version,
    about = "Shapley values of graph edges and vertices for path query answers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print 1 if the bound query holds on the graph, 0 otherwise.
    Eval(RunConfig),
    /// List every answer of the query, sorted.
    Answers(RunConfig),
    /// Shapley value of every player, or of --focus.
    Shapley(RunConfig),
    /// Whether --focus has a positive Shapley value: true, false or unknown.
    Nonzero(RunConfig),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Edge,
    Vertex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Exact,
    ApproxAdditive,
    ApproxMultiplicative,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    /// Graph file: `src label dst n|x` edge lines and `v id n|x` vertex lines.
    #[arg(long)]
    pub graph: PathBuf,
    /// A regular expression, or atoms `(x, regex, y)` joined by `&`.
    #[arg(long)]
    pub query: String,
    /// Variable binding such as `x=v1,y=v6`.
    #[arg(long, default_value = "")]
    pub bind: String,
    #[arg(long, value_enum, default_value_t = KindArg::Edge)]
    pub player_kind: KindArg,
    /// Player id: `src->dst` for edges, the vertex id for vertices.
    #[arg(long)]
    pub focus: Option<String>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Enumeration cap: answers for `answers`, players for exact subset
    /// enumeration in `shapley`.
    #[arg(long)]
    pub cap: Option<usize>,
    /// Search steps allowed for `nonzero`.
    #[arg(long)]
    pub budget: Option<u64>,
    /// Most Monte-Carlo trials per run.
    #[arg(long)]
    pub max_samples: Option<u64>,
    /// Do not assert that the query atoms are non-redundant.
    #[arg(long)]
    pub redundant_atoms: bool,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Engine(#[from] pathshap::Error),
    #[error("output failed: {0}")]
    Output(String),
}

impl CliError {
    /// 2 for bad input, 3 for enumeration overflow, 4 for a multiplicative
    /// request on an infinite language, 5 for an exhausted budget.
    pub fn exit_code(&self) -> u8 {
        use pathshap::Error as E;
        match self {
            CliError::Io { .. } | CliError::Usage(_) => 2,
            CliError::Output(_) => 1,
            CliError::Engine(e) => match e {
                E::EnumerationOverflow { .. } => 3,
                E::InfiniteLanguage { .. } => 4,
                E::BudgetExceeded { .. } | E::TooManySamples { .. } => 5,
                E::NonDisjointStructure(_) | E::NotApplicable { .. } => 1,
                _ => 2,
            },
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e.to_string())
    }
}

struct Loaded {
    graph: LabeledGraph,
    query: Crpq,
    binding: Assignment,
}

fn load(cfg: &RunConfig) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(&cfg.graph).map_err(|source| CliError::Io {
        path: cfg.graph.clone(),
        source,
    })?;
    let graph = LabeledGraph::parse(&text)?;
    let query = Crpq::parse(&cfg.query, &graph)?;
    let binding = Assignment::parse(&cfg.bind)?;
    Ok(Loaded {
        graph,
        query,
        binding,
    })
}

fn request<'a>(cfg: &RunConfig, loaded: &'a Loaded) -> ExplainRequest<'a> {
    let mut req = ExplainRequest::new(&loaded.graph, &loaded.query, loaded.binding.clone());
    req.player_kind = match cfg.player_kind {
        KindArg::Edge => PlayerKind::Edge,
        KindArg::Vertex => PlayerKind::Vertex,
    };
    req.mode = match cfg.mode {
        ModeArg::Auto => Mode::Auto,
        ModeArg::Exact => Mode::Exact,
        ModeArg::ApproxAdditive => Mode::ApproxAdditive,
        ModeArg::ApproxMultiplicative => Mode::ApproxMultiplicative,
    };
    req.focus = cfg.focus.clone().map(PlayerId::new);
    req.eps = cfg.eps;
    req.delta = cfg.delta;
    req.seed = cfg.seed;
    req.non_redundant = !cfg.redundant_atoms;
    let defaults = Limits::default();
    req.limits = Limits {
        subset_cap: cfg.cap.unwrap_or(defaults.subset_cap),
        search_budget: cfg.budget.unwrap_or(defaults.search_budget),
        max_samples: cfg.max_samples.unwrap_or(defaults.max_samples),
        ..defaults
    };
    req
}

/// Runs one command, writing its report to `out`. Returns the exit status.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<u8, CliError> {
    match &cli.command {
        Command::Eval(cfg) => {
            let loaded = load(cfg)?;
            let holds = eval_crpq_bound(&loaded.graph, &loaded.query, &loaded.binding)?;
            writeln!(out, "{}", u8::from(holds))?;
            Ok(0)
        }
        Command::Answers(cfg) => {
            let loaded = load(cfg)?;
            let cap = cfg.cap.unwrap_or(DEFAULT_ANSWER_CAP);
            let answers = enumerate_answers(&loaded.graph, &loaded.query, cap)?;
            output::write_answers(out, cfg.format, loaded.query.variables(), &answers)?;
            Ok(0)
        }
        Command::Shapley(cfg) => {
            let loaded = load(cfg)?;
            let report = solve(&request(cfg, &loaded))?;
            output::write_report(out, cfg.format, &report)?;
            Ok(0)
        }
        Command::Nonzero(cfg) => {
            let loaded = load(cfg)?;
            let focus = cfg
                .focus
                .clone()
                .ok_or_else(|| CliError::Usage("nonzero needs --focus".into()))?;
            let verdict = decide_nonzero(&request(cfg, &loaded), &PlayerId::new(focus))?;
            writeln!(out, "{verdict}")?;
            Ok(if verdict == Verdict::Unknown { 5 } else { 0 })
        }
    }
}
