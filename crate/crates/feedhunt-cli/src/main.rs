//! Batch front-end over the feed analytics library. Subcommands mirror the
//! pipeline: extract features, label, characterize, cluster, evaluate,
//! classify clusters, hunt undetected samples, and detect late flips.
//!
//! Exit codes: 0 success, 1 data errors, 2 usage errors.

mod commands;
mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use config::{parse_gaps, PipelineConfig};
use feedhunt::features::ClusterFeature;

#[derive(Parser)]
#[command(name = "feedhunt", version, about = "Scan-report feed analytics and threat hunting")]
struct Cli {
    /// TOML configuration file; flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for every randomized choice, for bit-reproducible outputs.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Spill directory for external sorts (also honors FEEDHUNT_TMPDIR).
    #[arg(long, global = true)]
    temp_dir: Option<PathBuf>,
    /// External-sort memory budget in bytes (min 64 MiB).
    #[arg(long, global = true)]
    memory_budget: Option<usize>,
    /// Analysis window start, UTC epoch seconds (inclusive).
    #[arg(long, global = true)]
    window_start: Option<i64>,
    /// Analysis window end, UTC epoch seconds (exclusive).
    #[arg(long, global = true)]
    window_end: Option<i64>,
    /// Collection gaps as `start..end[,start..end...]` epoch seconds.
    #[arg(long, global = true)]
    gaps: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a report stream into a per-sample feature file.
    Extract(ExtractArgs),
    /// Fill the family/is_pup columns of a feature file from report labels.
    Label(LabelArgs),
    /// Feed characterization statistics.
    Stats {
        #[command(subcommand)]
        which: StatsCommand,
    },
    /// Cluster samples.
    Cluster {
        #[command(subcommand)]
        engine: ClusterCommand,
    },
    /// Score a clustering against family ground truth.
    Eval(EvalArgs),
    /// Classify clusters by detection ratios.
    Verdict(VerdictArgs),
    /// Flag zero-detection members of mostly-detected clusters.
    Hunt(HuntArgs),
    /// Detect samples that flipped from zero detections to detected.
    Fud(FudArgs),
    /// Synthetic feed generator (testing and benchmarks).
    #[command(hide = true)]
    Gen {
        #[command(subcommand)]
        what: GenCommand,
    },
}

#[derive(Args)]
struct ExtractArgs {
    /// Report file; .gz accepted.
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-sample view: latest report, first report of new samples, or one
    /// row per report.
    #[arg(long, default_value = "latest", value_parser = ["latest", "first", "all"])]
    view: String,
    /// Label samples while extracting (uses --taxonomy or the built-in).
    #[arg(long)]
    label: bool,
    /// Taxonomy file for labeling; implies --label.
    #[arg(long)]
    taxonomy: Option<PathBuf>,
    /// Filetype mapping file (defaults to the built-in tables).
    #[arg(long)]
    filetypes: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    taxonomy: Option<PathBuf>,
}

#[derive(Subcommand)]
enum StatsCommand {
    /// Per-day report/sample/new-sample volumes.
    Daily {
        #[arg(long)]
        reports: PathBuf,
        /// Write the day series as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the full result as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Detection-count histogram and reverse ECDF.
    Detections {
        /// Per-sample view (feature file).
        #[arg(long, conflicts_with = "reports")]
        features: Option<PathBuf>,
        /// Per-report view (report file).
        #[arg(long)]
        reports: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Ranked canonical filetype counts.
    Filetypes {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Family prevalence buckets and per-filetype top families.
    Families {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// First-seen delay between this feed and another dataset.
    Telemetry {
        /// Two-column file: sha256<TAB>epoch (this feed).
        #[arg(long)]
        feed_fseen: PathBuf,
        /// Two-column file: sha256<TAB>epoch (the other dataset).
        #[arg(long)]
        other_fseen: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ClusterCommand {
    /// Group by a single feature's value (sorts on disk; scales past RAM).
    Fvg {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Grouping feature.
        #[arg(long)]
        feature: ClusterFeature,
    },
    /// Single-linkage agglomerative clustering (quadratic; guarded).
    Hac {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Distance threshold in [0,1].
        #[arg(long)]
        threshold: Option<f64>,
        /// Comma-separated feature subset for the distance.
        #[arg(long)]
        distance_features: Option<String>,
        /// Refuse inputs larger than this.
        #[arg(long)]
        limit: Option<usize>,
    },
    /// Threshold clustering of tlsh digests over a vantage-point tree.
    Hact {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Cluster distance threshold.
        #[arg(long)]
        cdist: Option<u32>,
        /// Exact neighbor search: optimal clusters at some speed cost.
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    clusters: PathBuf,
    /// Ground truth: sha256<TAB>family.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerdictArgs {
    #[arg(long)]
    clusters: PathBuf,
    /// Feature file carrying each sample's detection count.
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also classify singleton clusters.
    #[arg(long)]
    include_singletons: bool,
}

#[derive(Args)]
struct HuntArgs {
    #[arg(long)]
    clusters: PathBuf,
    #[arg(long)]
    features: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Minimum detection ratio for a cluster to flag its members.
    #[arg(long, default_value_t = 0.5)]
    min_ratio: f64,
    /// Which ratio to filter on: r1 or r4.
    #[arg(long, default_value = "r1")]
    ratio: String,
    #[arg(long)]
    include_singletons: bool,
}

#[derive(Args)]
struct FudArgs {
    #[arg(long)]
    reports: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Detections needed to call the flip (last report must reach it).
    #[arg(long)]
    threshold: Option<u32>,
    /// Flips within this many seconds of first submission are ignored.
    #[arg(long)]
    grace: Option<i64>,
}

#[derive(Subcommand)]
enum GenCommand {
    /// Generate a synthetic feed plus its ground-truth manifest.
    Feed {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 100)]
        clusters: usize,
        #[arg(long, default_value_t = 6)]
        mean_size: usize,
        #[arg(long, default_value_t = 0.15)]
        null_pct: f64,
        #[arg(long, default_value_t = 0.2)]
        rescan_pct: f64,
        #[arg(long, default_value_t = 0.01)]
        corrupt_pct: f64,
        #[arg(long, default_value_t = 5)]
        fud_units: usize,
    },
}

fn apply_overrides(config: &mut PipelineConfig, cli: &Cli) -> anyhow::Result<()> {
    if let Some(t) = cli.threads {
        config.threads = t;
    }
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(d) = &cli.temp_dir {
        config.temp_dir = Some(d.clone());
    } else if let Ok(env_dir) = std::env::var("FEEDHUNT_TMPDIR") {
        if !env_dir.is_empty() && config.temp_dir.is_none() {
            config.temp_dir = Some(PathBuf::from(env_dir));
        }
    }
    if let Some(b) = cli.memory_budget {
        config.memory_budget = b;
    }
    if let Some(s) = cli.window_start {
        config.window.start = s;
    }
    if let Some(e) = cli.window_end {
        config.window.end = e;
    }
    if let Some(g) = &cli.gaps {
        config.gaps = parse_gaps(g)?;
    }
    config.validate()
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let mut config = PipelineConfig::load(cli.config.as_deref())?;
    apply_overrides(&mut config, &cli)?;
    if config.threads > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(config.threads).build_global().ok();
    }

    match &cli.command {
        Command::Extract(args) => commands::extract(&config, args),
        Command::Label(args) => commands::label(&config, args),
        Command::Stats { which } => commands::stats(&config, which),
        Command::Cluster { engine } => commands::cluster(&config, engine),
        Command::Eval(args) => commands::eval(&config, args),
        Command::Verdict(args) => commands::verdict(&config, args),
        Command::Hunt(args) => commands::hunt(&config, args),
        Command::Fud(args) => commands::fud(&config, args),
        Command::Gen { what } => commands::gen(&config, what),
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
