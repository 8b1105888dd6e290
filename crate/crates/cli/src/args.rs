use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "doe",
    version,
    about = "Design, run and analyse experiments on a system under test"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Seed for design generation and run-order randomization.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for every file a command writes.
    #[arg(long, global = true, default_value = ".")]
    pub out_dir: PathBuf,
    /// Ignore unknown fields in spec files.
    #[arg(long, global = true)]
    pub lenient: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodChoice {
    /// Pick by purpose of investigation.
    Auto,
    Anova,
    Regression,
    Ancova,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check spec files against the schema.
    Validate {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
    },
    /// Generate a design from a test specification and, with --plan, a run plan.
    Design(DesignArgs),
    /// Execute a run plan against the runner of an experiment specification.
    Run(RunArgs),
    /// Analyse a results file.
    Analyze(AnalyzeArgs),
    /// Screen the bundled fault ride-through case end to end.
    ScreenDemo(ScreenDemoArgs),
    /// Advisory recommendations: analysis method, design category, nuisance handling.
    Recommend(RecommendArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct DesignOverrides {
    /// Replace the requested design family.
    #[arg(long)]
    pub family: Option<String>,
    /// Generators for fractional factorials, e.g. D=ABC (repeatable).
    #[arg(long = "generator")]
    pub generators: Vec<String>,
    #[arg(long)]
    pub n_samples: Option<usize>,
    #[arg(long)]
    pub n_center: Option<usize>,
    /// Orthogonal array name (L4, L8, L9).
    #[arg(long)]
    pub array: Option<String>,
    /// Block on this nuisance_known_controllable factor.
    #[arg(long)]
    pub block: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DesignArgs {
    pub spec: PathBuf,
    #[command(flatten)]
    pub overrides: DesignOverrides,
    /// Also write a randomized run plan (plan.json, plan.csv).
    #[arg(long)]
    pub plan: bool,
    #[arg(long, default_value_t = 1)]
    pub replicates: u32,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment specification.
    pub experiment: PathBuf,
    /// Plan file from `doe design --plan`; built from the experiment
    /// specification when omitted.
    #[arg(long)]
    pub plan: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Continue an interrupted results file.
    #[arg(long)]
    pub resume: bool,
    /// Stop after this many runs.
    #[arg(long)]
    pub limit: Option<usize>,
    /// Results CSV (default: <out-dir>/results.csv).
    #[arg(long)]
    pub results: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    pub results: PathBuf,
    /// Test or experiment specification the results belong to.
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodChoice::Auto)]
    pub method: MethodChoice,
    #[arg(long, default_value_t = doe_core::analysis::DEFAULT_ALPHA)]
    pub alpha: f64,
    /// Preliminary screening: rank terms and decide which factors to keep.
    #[arg(long)]
    pub screening: bool,
    /// Preliminary check for curvature.
    #[arg(long)]
    pub nonlinearity_check: bool,
    /// Analyse only these responses (repeatable; default: all).
    #[arg(long = "response")]
    pub responses: Vec<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ScreenDemoArgs {
    /// Measurement noise standard deviation added by the example system.
    #[arg(long, default_value_t = 1e-4)]
    pub noise: f64,
    #[arg(long, default_value_t = 2)]
    pub replicates: u32,
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    /// Smallest peak speed deviation difference worth detecting, for the
    /// power check.
    #[arg(long, default_value_t = 1e-3)]
    pub min_effect: f64,
}

#[derive(Debug, Clone, Args)]
pub struct RecommendArgs {
    /// Test specification to take purpose and factors from.
    pub spec: Option<PathBuf>,
    #[arg(long)]
    pub purpose: Option<String>,
    #[arg(long)]
    pub screening: bool,
    #[arg(long)]
    pub nonlinearity_check: bool,
    #[arg(long)]
    pub factors: Option<usize>,
    #[arg(long)]
    pub max_treatments: Option<usize>,
    #[arg(long)]
    pub fluctuations: bool,
    #[arg(long)]
    pub nonlinear: bool,
    /// Nuisance factor role to look up (repeatable).
    #[arg(long = "role")]
    pub roles: Vec<String>,
}
