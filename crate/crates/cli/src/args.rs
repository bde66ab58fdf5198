use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "grn-padic",
    version,
    about = "Hierarchical stability analysis of gene-network dynamics via base-p digit encodings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Score one gene ordering: mu values, per-level counts, contributions
    Analyze(AnalyzeArgs),
    /// Search gene orderings minimizing mu_E
    Optimize(OptimizeArgs),
    /// List fixed points with containing balls and class sequences
    FixedPoints(FixedPointsArgs),
    /// Emit the ball hierarchy as DOT or JSON
    ExportTree(ExportTreeArgs),
    /// Check per-ball affine approximations against the exact dynamics
    Verify(VerifyArgs),
}

#[derive(Args)]
pub struct CommonArgs {
    /// Network file path, or builtin:toy4 / builtin:athaliana13
    #[arg(long)]
    pub network: String,

    /// Gene ordering: "identity", comma-separated gene names, an ordering
    /// name declared in the network file, or optimal:<exhaustive|bnb|ga>
    #[arg(long, default_value = "identity")]
    pub ordering: String,

    /// Seed for randomized searches and sampling
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Omit timestamp and wall-time lines so identical runs are byte-identical
    #[arg(long)]
    pub no_timestamp: bool,

    /// Cap worker threads used by ordering searches
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
    Dot,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Output format: text, json, or csv
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Exhaustive,
    Bnb,
    Ga,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Output format: text or json
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Search strategy
    #[arg(long, value_enum, default_value_t = Method::Bnb)]
    pub method: Method,

    /// Stop branch-and-bound after this many prefix evaluations (uncertified)
    #[arg(long)]
    pub max_evaluations: Option<u64>,

    /// Stop branch-and-bound after this many seconds (uncertified)
    #[arg(long)]
    pub max_seconds: Option<u64>,

    /// Genetic algorithm population size
    #[arg(long)]
    pub ga_population: Option<usize>,

    /// Genetic algorithm generation count
    #[arg(long)]
    pub ga_generations: Option<usize>,
}

#[derive(Args)]
pub struct FixedPointsArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Output format: text, json, or csv
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Levels of the ball chain and class sequence to display
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
}

#[derive(Args)]
pub struct ExportTreeArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Output format: dot or json
    #[arg(long, value_enum, default_value_t = Format::Dot)]
    pub format: Format,

    /// Deepest ball level to include
    #[arg(long, default_value_t = 4)]
    pub depth: usize,

    /// Add same-level arrows from each ball to the ball holding its image
    #[arg(long)]
    pub image_arrows: bool,

    /// Write to a file instead of stdout
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Output format: text or json
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    /// Samples per ball at levels <= 4; deeper levels use min(samples, 10)
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
}
