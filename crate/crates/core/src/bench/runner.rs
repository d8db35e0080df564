use std::collections::HashSet;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AttackKind, Dataset, ExperimentConfig, Metric};
use crate::attack::{
    dba_attack, dice_attack, eda_attack, gda_attack, ra_attack, AttackBudget, AttackMode, AttackRecord,
};
use crate::derive_seed;
use crate::downstream::{em_communities, f1_report, kmeans, lpa, nmi, stratified_split, train_logistic};
use crate::embed::Embedder;
use crate::error::{Error, Result};
use crate::graph::{Graph, Perturbation};
use crate::seed;

pub const CSV_HEADER: &str = "dataset,attack,mode,budget_fraction,repetition,seed,metric_name,metric_value,wall_time_ms";

/// `metric_name` of the marker row left for a budget the graph cannot
/// accommodate. Its `metric_value` is NaN.
pub const SKIPPED_METRIC: &str = "skipped";

/// `attack` and `mode` of unattacked baseline rows.
pub const BASELINE: &str = "none";

pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub attack: String,
    pub mode: String,
    pub budget_fraction: f64,
    pub repetition: usize,
    pub seed: u64,
    pub metric_name: String,
    pub metric_value: f64,
    pub wall_time_ms: u64,
}

type RowKey<'a> = (&'a str, &'a str, &'a str, u64, usize, &'a str);

impl ResultRow {
    fn key(&self) -> RowKey<'_> {
        (
            &self.dataset,
            &self.attack,
            &self.mode,
            self.budget_fraction.to_bits(),
            self.repetition,
            &self.metric_name,
        )
    }
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        (&a.dataset, &a.attack, &a.mode)
            .cmp(&(&b.dataset, &b.attack, &b.mode))
            .then(a.budget_fraction.total_cmp(&b.budget_fraction))
            .then(a.repetition.cmp(&b.repetition))
            .then(a.metric_name.cmp(&b.metric_name))
    });
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for r in rows {
        w.serialize(r).expect("rows serialize");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8");
    format!("{CSV_HEADER}\n{body}")
}

pub fn parse_rows(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim_end() == CSV_HEADER => {}
        Some(h) => return Err(Error::validation(format!("unexpected CSV header `{h}`"))),
        None => return Ok(Vec::new()),
    }
    let mut r = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    r.deserialize()
        .enumerate()
        .map(|(i, row)| {
            row.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })
        })
        .collect()
}

/// `max(1, round(fraction * edges))`.
pub fn budget_count(fraction: f64, edges: usize) -> usize {
    ((fraction * edges as f64).round() as usize).max(1)
}

/// Seed of one sweep task; a pure function of its coordinates.
pub fn task_seed(master: u64, dataset: &str, attack: &str, mode: &str, fraction: f64, repetition: usize) -> u64 {
    derive_seed!(master, dataset, attack, mode, fraction, repetition)
}

/// Seed for the downstream evaluation of repetition `repetition`. Shared by
/// the baseline and every attack of that repetition, so their embeddings,
/// splits and clusterings draw from the same streams.
pub fn evaluation_seed(master: u64, dataset: &str, repetition: usize) -> u64 {
    derive_seed!(master, dataset, "evaluation", repetition)
}

/// One unit of sweep work. `attack = None` is the unattacked baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    pub attack: Option<AttackKind>,
    pub mode: Option<AttackMode>,
    pub budget_fraction: f64,
    pub repetition: usize,
}

impl Task {
    fn attack_name(&self) -> &'static str {
        self.attack.map_or(BASELINE, AttackKind::as_str)
    }

    fn mode_name(&self) -> &'static str {
        self.mode.map_or(BASELINE, AttackMode::as_str)
    }

    fn file_stem(&self, dataset: &str) -> String {
        format!(
            "{dataset}-{}-{}-{}-r{}",
            self.attack_name(),
            self.mode_name(),
            self.budget_fraction,
            self.repetition
        )
    }
}

/// Every task of the sweep in a fixed order: baselines first, then attacks
/// by attack, mode, budget and repetition.
pub fn tasks(cfg: &ExperimentConfig) -> Vec<Task> {
    let mut out: Vec<Task> = (0..cfg.repetitions)
        .map(|repetition| Task {
            attack: None,
            mode: None,
            budget_fraction: 0.0,
            repetition,
        })
        .collect();
    for &attack in &cfg.attacks {
        for &mode in &cfg.modes {
            for &budget_fraction in &cfg.budgets {
                for repetition in 0..cfg.repetitions {
                    out.push(Task {
                        attack: Some(attack),
                        mode: Some(mode),
                        budget_fraction,
                        repetition,
                    });
                }
            }
        }
    }
    out
}

/// Runs one attack and returns its perturbation with a serializable record.
pub fn run_attack(
    kind: AttackKind,
    dataset: &Dataset,
    budget: AttackBudget,
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Perturbation, AttackRecord)> {
    let g = &dataset.graph;
    let mut rng = seed::rng(seed);
    let p = match kind {
        AttackKind::Eda => {
            let result = eda_attack(g, budget, &cfg.ga, &cfg.attack_embedder, seed)?;
            let record = AttackRecord::from_result(budget, seed, &result);
            return Ok((result.perturbation, record));
        }
        AttackKind::Ra => ra_attack(g, budget, &mut rng)?,
        AttackKind::Dice => dice_attack(g, budget, dataset.require_labels()?, &mut rng)?,
        AttackKind::Dba => dba_attack(g, budget, &mut rng)?,
        AttackKind::Gda => gda_attack(g, budget, &cfg.attack_embedder, cfg.gda_candidates, seed)?,
    };
    let record = AttackRecord::new(kind.as_str(), budget, seed, &p);
    Ok((p, record))
}

/// Every configured metric on `g` against the dataset's labels, as
/// `(metric_name, value)` pairs.
pub fn evaluate_metrics(g: &Graph, dataset: &Dataset, cfg: &ExperimentConfig, seed: u64) -> Result<Vec<(String, f64)>> {
    let labels = dataset.require_labels()?;
    let embedding = if cfg.metrics.iter().any(|m| m.needs_embedding()) {
        Some(cfg.embedder.embed(g, derive_seed!(seed, "embed"))?)
    } else {
        None
    };
    let mut out = Vec::new();
    for &metric in &cfg.metrics {
        match metric {
            Metric::KmeansNmi => {
                let r = embedding.as_ref().expect("embedded above");
                let mut rng = seed::rng(derive_seed!(seed, "kmeans"));
                let p = kmeans(r, labels.num_blocks(), cfg.kmeans_restarts, &mut rng)?;
                out.push(("kmeans_nmi".to_owned(), nmi(&p, labels)?));
            }
            Metric::LrF1 => {
                let r = embedding.as_ref().expect("embedded above");
                let y = labels.assignment();
                let mut rng = seed::rng(derive_seed!(seed, "split"));
                let (train, test) = stratified_split(y, cfg.train_fraction, &mut rng)?;
                let model = train_logistic(r, y, &train, &cfg.logistic)?;
                let truth: Vec<usize> = test.iter().map(|&i| y[i]).collect();
                let report = f1_report(&model.predict(r, &test), &truth)?;
                out.push(("lr_micro_f1".to_owned(), report.micro_f1));
                out.push(("lr_macro_f1".to_owned(), report.macro_f1));
            }
            Metric::LpaNmi => {
                let mut rng = seed::rng(derive_seed!(seed, "lpa"));
                out.push(("lpa_nmi".to_owned(), nmi(&lpa(g, cfg.lpa_max_iters, &mut rng), labels)?));
            }
            Metric::EmNmi => {
                out.push(("em_nmi".to_owned(), nmi(&em_communities(g)?.partition, labels)?));
            }
        }
    }
    Ok(out)
}

fn expected_names(cfg: &ExperimentConfig) -> Vec<&'static str> {
    cfg.metrics.iter().flat_map(|m| m.row_names().iter().copied()).collect()
}

fn run_task(task: &Task, dataset: &Dataset, cfg: &ExperimentConfig, out_dir: &Path) -> Result<Vec<ResultRow>> {
    let started = Instant::now();
    let name = dataset.name.as_str();
    let seed = task_seed(
        cfg.master_seed,
        name,
        task.attack_name(),
        task.mode_name(),
        task.budget_fraction,
        task.repetition,
    );
    let row = |metric_name: &str, metric_value: f64, wall_time_ms: u64| ResultRow {
        dataset: name.to_owned(),
        attack: task.attack_name().to_owned(),
        mode: task.mode_name().to_owned(),
        budget_fraction: task.budget_fraction,
        repetition: task.repetition,
        seed,
        metric_name: metric_name.to_owned(),
        metric_value,
        wall_time_ms,
    };
    let attacked = match (task.attack, task.mode) {
        (Some(kind), Some(mode)) => {
            let budget = AttackBudget::new(mode, budget_count(task.budget_fraction, dataset.graph.edge_count()));
            if budget.validate(&dataset.graph).is_err() {
                return Ok(vec![row(SKIPPED_METRIC, f64::NAN, 0)]);
            }
            let (p, record) = run_attack(kind, dataset, budget, cfg, seed)?;
            let stem = task.file_stem(name);
            write_file(&out_dir.join("perturbations").join(format!("{stem}.txt")), &p.to_text())?;
            write_file(&out_dir.join("records").join(format!("{stem}.json")), &record.to_json())?;
            dataset.graph.apply(&p)?
        }
        _ => dataset.graph.clone(),
    };
    let metrics = evaluate_metrics(&attacked, dataset, cfg, evaluation_seed(cfg.master_seed, name, task.repetition))?;
    let elapsed = started.elapsed().as_millis() as u64;
    Ok(metrics.into_iter().map(|(m, v)| row(&m, v, elapsed)).collect())
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn read_existing(path: &Path) -> Result<Vec<ResultRow>> {
    match fs::read_to_string(path) {
        Ok(text) => parse_rows(&text).map_err(|e| Error::Format {
            path: path.to_owned(),
            message: e.to_string(),
        }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Vec::new()),
        Err(e) => Err(Error::io(path, e)),
    }
}

/// Where a sweep writes: `results.csv` plus one perturbation file and one
/// JSON attack record per attacked task.
pub fn results_path(cfg: &ExperimentConfig) -> PathBuf {
    cfg.resolved_output_dir().join(RESULTS_FILE)
}

/// Runs the sweep, appending rows to `results.csv` as tasks finish. Tasks
/// whose rows are already in the file are skipped, so an interrupted sweep
/// resumes where it stopped. The file is finally rewritten sorted by key,
/// and the sorted rows are returned.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let dataset = cfg.dataset.load()?;
    dataset.require_labels()?;
    let out_dir = cfg.resolved_output_dir();
    fs::create_dir_all(&out_dir).map_err(|e| Error::io(&out_dir, e))?;
    let path = out_dir.join(RESULTS_FILE);

    let existing = read_existing(&path)?;
    let done: HashSet<(String, String, String, u64, usize, String)> = existing
        .iter()
        .map(|r| {
            let (d, a, m, b, rep, name) = r.key();
            (d.to_owned(), a.to_owned(), m.to_owned(), b, rep, name.to_owned())
        })
        .collect();
    let names = expected_names(cfg);
    let is_done = |t: &Task| {
        let key = |metric: &str| {
            (
                dataset.name.clone(),
                t.attack_name().to_owned(),
                t.mode_name().to_owned(),
                t.budget_fraction.to_bits(),
                t.repetition,
                metric.to_owned(),
            )
        };
        done.contains(&key(SKIPPED_METRIC)) || names.iter().all(|m| done.contains(&key(m)))
    };
    let pending: Vec<Task> = tasks(cfg).into_iter().filter(|t| !is_done(t)).collect();

    if existing.is_empty() {
        fs::write(&path, format!("{CSV_HEADER}\n")).map_err(|e| Error::io(&path, e))?;
    }
    let writer = Mutex::new(
        OpenOptions::new()
            .append(true)
            .open(&path)
            .map_err(|e| Error::io(&path, e))?,
    );
    let work = || -> Result<()> {
        pending.par_iter().try_for_each(|task| {
            let rows = run_task(task, &dataset, cfg, &out_dir)?;
            let text = rows_to_csv(&rows);
            let body = text.split_once('\n').map_or("", |(_, b)| b);
            let mut f = writer.lock().expect("writer lock");
            f.write_all(body.as_bytes()).and_then(|_| f.flush()).map_err(|e| Error::io(&path, e))
        })
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::validation(format!("thread pool: {e}")))?;
    pool.install(work)?;

    let mut rows = read_existing(&path)?;
    let mut seen = HashSet::new();
    rows.retain(|r| {
        let (d, a, m, b, rep, name) = r.key();
        seen.insert((d.to_owned(), a.to_owned(), m.to_owned(), b, rep, name.to_owned()))
    });
    sort_rows(&mut rows);
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, rows_to_csv(&rows)).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}
