use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use eda_core::attack::{AttackBudget, AttackMode, GaConfig};
use eda_core::bench::{
    budget_count, evaluate_metrics, export_embedding_coordinates, flip_statistics, run_attack, run_experiment,
    AttackKind, Dataset, DatasetSpec, ExperimentConfig, FlipStats, Metric, OUTPUT_DIR_ENV, RESULTS_FILE,
};
use eda_core::embed::{DeepWalkConfig, EmbedderConfig, HopeConfig};
use eda_core::graph::Perturbation;

#[derive(Parser)]
#[command(name = "eda", version, about = "Embedding-distance attacks on graphs and their downstream damage")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one attack and write the perturbation and its record.
    Attack(AttackArgs),
    /// Run a full sweep described by a TOML config and write results.csv.
    Sweep(SweepArgs),
    /// Score downstream metrics on a graph, optionally after a perturbation.
    Eval(EvalArgs),
    /// Count intra/inter-community additions and deletions.
    Stats(StatsArgs),
    /// Write raw embedding coordinates, one line per node.
    ExportEmbedding(ExportArgs),
}

#[derive(Args)]
struct DatasetArgs {
    /// Bundled dataset name, or the label to use for --edges.
    #[arg(long, default_value = "karate")]
    dataset: String,
    /// Edge list file; without it --dataset must name a bundled graph.
    #[arg(long)]
    edges: Option<PathBuf>,
    /// `node label` ground-truth file.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Endpoints are names rather than 0-based ids.
    #[arg(long)]
    named: bool,
    #[arg(long)]
    edges_sha256: Option<String>,
    #[arg(long)]
    labels_sha256: Option<String>,
}

impl DatasetArgs {
    fn spec(&self) -> DatasetSpec {
        DatasetSpec {
            name: self.dataset.clone(),
            edges: self.edges.clone(),
            labels: self.labels.clone(),
            edges_sha256: self.edges_sha256.clone(),
            labels_sha256: self.labels_sha256.clone(),
            named: self.named,
        }
    }

    fn load(&self) -> Result<Dataset> {
        Ok(self.spec().load()?)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EmbedderKind {
    Deepwalk,
    Hope,
}

#[derive(Args)]
struct EmbedArgs {
    #[arg(long, value_enum, default_value = "deepwalk")]
    embedder: EmbedderKind,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    #[arg(long, default_value_t = 10)]
    walks_per_node: usize,
    #[arg(long, default_value_t = 40)]
    walk_length: usize,
    #[arg(long, default_value_t = 5)]
    window: usize,
    /// Katz decay for HOPE; half the convergence limit when absent.
    #[arg(long)]
    beta: Option<f64>,
}

impl EmbedArgs {
    fn config(&self) -> EmbedderConfig {
        match self.embedder {
            EmbedderKind::Deepwalk => EmbedderConfig::Deepwalk(DeepWalkConfig {
                dim: self.dim,
                walks_per_node: self.walks_per_node,
                walk_length: self.walk_length,
                window: self.window,
                ..Default::default()
            }),
            EmbedderKind::Hope => EmbedderConfig::Hope(HopeConfig {
                dim: self.dim,
                beta: self.beta,
            }),
        }
    }
}

#[derive(Args)]
struct AttackArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[arg(long, value_parser = parse_attack, default_value = "eda")]
    attack: AttackKind,
    #[arg(long, value_parser = parse_mode, default_value = "rewire")]
    mode: AttackMode,
    /// Number of flips; overrides --fraction.
    #[arg(long)]
    count: Option<usize>,
    /// Budget as a fraction of |E|.
    #[arg(long, default_value_t = 0.05)]
    fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sweep config whose ga, attack_embedder and gda_candidates are used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// GA generations; overrides the config.
    #[arg(long)]
    iterations: Option<usize>,
    #[arg(long)]
    population: Option<usize>,
    /// Attack-side DeepWalk dimension; overrides the config.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    walks_per_node: Option<usize>,
    #[arg(long)]
    walk_length: Option<usize>,
    #[arg(long, env = OUTPUT_DIR_ENV, default_value = "eda-output")]
    output_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    config: PathBuf,
    /// Overrides the config's output_dir.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    /// Perturbation to apply before scoring.
    #[arg(long)]
    perturbation: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_parser = parse_metric, default_value = "kmeans_nmi,lr_f1,lpa_nmi,em_nmi")]
    metrics: Vec<Metric>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write `metric_name,metric_value` lines here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Perturbation files; counts are pooled over all of them.
    #[arg(required = true)]
    perturbations: Vec<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    embed: EmbedArgs,
    #[arg(long)]
    perturbation: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: PathBuf,
}

fn parse_attack(s: &str) -> Result<AttackKind, String> {
    s.parse().map_err(|e: eda_core::error::Error| e.to_string())
}

fn parse_mode(s: &str) -> Result<AttackMode, String> {
    s.parse().map_err(|e: eda_core::error::Error| e.to_string())
}

fn parse_metric(s: &str) -> Result<Metric, String> {
    s.parse().map_err(|e: eda_core::error::Error| e.to_string())
}

fn read_perturbation(path: &Path) -> Result<Perturbation> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Perturbation::from_text(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn attack(args: AttackArgs) -> Result<()> {
    let dataset = args.data.load()?;
    let mut cfg = match &args.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::new(args.data.spec(), vec![args.attack], vec![args.fraction], vec![Metric::KmeansNmi]),
    };
    let ga = &mut cfg.ga;
    *ga = GaConfig {
        iterations: args.iterations.unwrap_or(ga.iterations),
        population: args.population.unwrap_or(ga.population),
        ..ga.clone()
    };
    let dw = &mut cfg.attack_embedder;
    dw.dim = args.dim.unwrap_or(dw.dim);
    dw.walks_per_node = args.walks_per_node.unwrap_or(dw.walks_per_node);
    dw.walk_length = args.walk_length.unwrap_or(dw.walk_length);
    cfg.validate()?;

    let count = args
        .count
        .unwrap_or_else(|| budget_count(args.fraction, dataset.graph.edge_count()));
    let budget = AttackBudget::new(args.mode, count);
    let (p, record) = run_attack(args.attack, &dataset, budget, &cfg, args.seed)?;
    fs::create_dir_all(&args.output_dir).with_context(|| format!("creating {}", args.output_dir.display()))?;
    let out = |name: &str| args.output_dir.join(name);
    fs::write(out("perturbation.txt"), p.to_text())?;
    fs::write(out("record.json"), record.to_json())?;
    match record.best_fitness {
        Some(f) => eprintln!("{} flips, best fitness {f:.6}", p.len()),
        None => eprintln!("{} flips", p.len()),
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(dir) = args.output_dir {
        cfg.output_dir = Some(dir);
    }
    if let Some(w) = args.workers {
        cfg.workers = w;
    }
    let rows = run_experiment(&cfg)?;
    eprintln!("{} rows in {}", rows.len(), cfg.resolved_output_dir().join(RESULTS_FILE).display());
    Ok(())
}

fn eval(args: EvalArgs) -> Result<()> {
    let dataset = args.data.load()?;
    let graph = match &args.perturbation {
        Some(p) => dataset.graph.apply(&read_perturbation(p)?)?,
        None => dataset.graph.clone(),
    };
    let mut cfg = ExperimentConfig::new(args.data.spec(), vec![AttackKind::Ra], vec![1.0], args.metrics.clone());
    cfg.embedder = args.embed.config();
    let mut text = String::from("metric_name,metric_value\n");
    for (name, value) in evaluate_metrics(&graph, &dataset, &cfg, args.seed)? {
        text.push_str(&format!("{name},{value}\n"));
    }
    emit(args.output.as_deref(), &text)
}

fn stats(args: StatsArgs) -> Result<()> {
    let dataset = args.data.load()?;
    let labels = dataset.require_labels()?;
    let mut total = FlipStats::default();
    for path in &args.perturbations {
        let p = read_perturbation(path)?;
        p.validate(&dataset.graph)
            .with_context(|| format!("{} does not fit {}", path.display(), dataset.name))?;
        total += flip_statistics(&p, labels)?;
    }
    let share = |x: Option<f64>| x.map_or_else(|| "NaN".to_owned(), |v| v.to_string());
    let text = format!(
        "added_intra,added_inter,deleted_intra,deleted_inter,added_inter_share,deleted_intra_share\n{},{},{},{},{},{}\n",
        total.added_intra,
        total.added_inter,
        total.deleted_intra,
        total.deleted_inter,
        share(total.added_inter_share()),
        share(total.deleted_intra_share()),
    );
    emit(args.output.as_deref(), &text)
}

fn export(args: ExportArgs) -> Result<()> {
    let dataset = args.data.load()?;
    let graph = match &args.perturbation {
        Some(p) => dataset.graph.apply(&read_perturbation(p)?)?,
        None => dataset.graph.clone(),
    };
    let labels = dataset.node_label_names();
    export_embedding_coordinates(&graph, &args.embed.config(), args.seed, labels.as_deref(), &args.output)?;
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Attack(a) => attack(a),
        Command::Sweep(a) => sweep(a),
        Command::Eval(a) => eval(a),
        Command::Stats(a) => stats(a),
        Command::ExportEmbedding(a) => export(a),
    }
}
