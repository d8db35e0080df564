use std::fs;
use std::path::Path;

use eda_core::attack::{AttackBudget, AttackMode};
use eda_core::bench::{
    budget_count, export_embedding_coordinates, parse_rows, results_path, rows_to_csv, run_attack, run_experiment, task_seed,
    AttackKind, Dataset, DatasetSpec, ExperimentConfig, Metric, ResultRow, BASELINE, CSV_HEADER, SKIPPED_METRIC,
};
use eda_core::embed::{DeepWalkConfig, EmbedderConfig, EmbeddingMatrix};
use tempfile::TempDir;

fn small_deepwalk() -> DeepWalkConfig {
    DeepWalkConfig {
        walks_per_node: 2,
        walk_length: 10,
        window: 2,
        dim: 4,
        ..Default::default()
    }
}

fn ra_config(out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(
        DatasetSpec::builtin("karate"),
        vec![AttackKind::Ra],
        vec![0.01],
        vec![Metric::KmeansNmi],
    );
    cfg.repetitions = 2;
    cfg.embedder = EmbedderConfig::Deepwalk(small_deepwalk());
    cfg.kmeans_restarts = 2;
    cfg.output_dir = Some(out.to_owned());
    cfg
}

/// CSV text with the wall-time column dropped.
fn without_wall_time(text: &str) -> String {
    text.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn random_attack_sweep_row_counts() {
    let dir = TempDir::new().unwrap();
    let rows = run_experiment(&ra_config(dir.path())).unwrap();
    assert_eq!(rows.len(), 4);
    let baseline: Vec<&ResultRow> = rows.iter().filter(|r| r.attack == BASELINE).collect();
    assert_eq!(baseline.len(), 2);
    assert!(baseline.iter().all(|r| r.mode == BASELINE && r.budget_fraction == 0.0));
    let attacked: Vec<&ResultRow> = rows.iter().filter(|r| r.attack == "ra").collect();
    assert_eq!(attacked.len(), 2);
    for r in &attacked {
        assert_eq!(r.seed, task_seed(0, "karate", "ra", "rewire", 0.01, r.repetition));
        assert!((0.0..=1.0).contains(&r.metric_value));
    }

    let text = fs::read_to_string(results_path(&ra_config(dir.path()))).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    assert_eq!(parse_rows(&text).unwrap(), rows);
    assert!(dir.path().join("perturbations").is_dir() && dir.path().join("records").is_dir());
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    run_experiment(&ra_config(a.path())).unwrap();
    let mut cfg = ra_config(b.path());
    cfg.workers = 2;
    run_experiment(&cfg).unwrap();
    let read = |d: &TempDir| fs::read_to_string(d.path().join("results.csv")).unwrap();
    assert_eq!(without_wall_time(&read(&a)), without_wall_time(&read(&b)));
}

#[test]
fn resumed_sweep_matches_uninterrupted_sweep() {
    let full = TempDir::new().unwrap();
    let mut cfg = ra_config(full.path());
    cfg.attacks = vec![AttackKind::Ra, AttackKind::Dba];
    cfg.budgets = vec![0.01, 0.05];
    run_experiment(&cfg).unwrap();
    let complete = fs::read_to_string(full.path().join("results.csv")).unwrap();

    let partial = TempDir::new().unwrap();
    let kept: Vec<&str> = complete.lines().take(4).collect();
    fs::write(partial.path().join("results.csv"), kept.join("\n") + "\n").unwrap();
    cfg.output_dir = Some(partial.path().to_owned());
    run_experiment(&cfg).unwrap();
    let resumed = fs::read_to_string(partial.path().join("results.csv")).unwrap();
    assert_eq!(without_wall_time(&resumed), without_wall_time(&complete));
    // rows that were already present keep their original timing
    assert_eq!(resumed.lines().take(4).collect::<Vec<_>>(), kept);
}

#[test]
fn infeasible_budget_leaves_a_skipped_marker() {
    let dir = TempDir::new().unwrap();
    // K4 has no non-edges, so any rewire is infeasible
    fs::write(dir.path().join("k4.txt"), "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n").unwrap();
    fs::write(dir.path().join("k4.labels"), "0 a\n1 a\n2 b\n3 b\n").unwrap();
    let spec = DatasetSpec {
        name: "k4".into(),
        edges: Some(dir.path().join("k4.txt")),
        labels: Some(dir.path().join("k4.labels")),
        ..Default::default()
    };
    let mut cfg = ExperimentConfig::new(spec, vec![AttackKind::Ra], vec![0.5], vec![Metric::LpaNmi]);
    cfg.repetitions = 1;
    cfg.output_dir = Some(dir.path().join("out"));
    let rows = run_experiment(&cfg).unwrap();
    let skipped: Vec<&ResultRow> = rows.iter().filter(|r| r.metric_name == SKIPPED_METRIC).collect();
    assert_eq!(skipped.len(), 1);
    assert!(skipped[0].metric_value.is_nan());
    assert_eq!(skipped[0].attack, "ra");
    // the baseline still ran
    assert!(rows.iter().any(|r| r.attack == BASELINE && r.metric_name == "lpa_nmi"));
}

#[test]
fn csv_rows_round_trip() {
    let rows = vec![
        ResultRow {
            dataset: "karate".into(),
            attack: "eda".into(),
            mode: "add_only".into(),
            budget_fraction: 0.07,
            repetition: 9,
            seed: 1 << 63,
            metric_name: "lr_macro_f1".into(),
            metric_value: 1.0 / 3.0,
            wall_time_ms: 0,
        },
        ResultRow {
            dataset: "karate".into(),
            attack: BASELINE.into(),
            mode: BASELINE.into(),
            budget_fraction: 0.0,
            repetition: 0,
            seed: 42,
            metric_name: "em_nmi".into(),
            metric_value: 0.6,
            wall_time_ms: 1234,
        },
    ];
    assert_eq!(parse_rows(&rows_to_csv(&rows)).unwrap(), rows);
}

#[test]
fn export_shape_and_determinism() {
    let dir = TempDir::new().unwrap();
    let data = Dataset::karate();
    let labels = data.node_label_names().unwrap();
    let dw = DeepWalkConfig::default();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    export_embedding_coordinates(&data.graph, &dw, 3, Some(&labels), &a).unwrap();
    export_embedding_coordinates(&data.graph, &dw, 3, Some(&labels), &b).unwrap();
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 34);
    for (i, line) in lines.iter().enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        assert_eq!(fields.len(), 1 + 16 + 1);
        assert_eq!(fields[0], i.to_string());
    }
    let (m, parsed_labels) = EmbeddingMatrix::from_text(&text, 16).unwrap();
    assert_eq!((m.rows(), m.dim()), (34, 16));
    assert_eq!(parsed_labels.unwrap(), labels);
}

#[test]
fn adversarial_export_keeps_the_format() {
    let dir = TempDir::new().unwrap();
    let data = Dataset::karate();
    let cfg = ra_config(dir.path());
    let count = budget_count(0.07, data.graph.edge_count());
    let (p, _) = run_attack(AttackKind::Ra, &data, AttackBudget::new(AttackMode::Rewire, count), &cfg, 8).unwrap();
    assert_eq!((count, p.additions().len()), (5, 5));
    let attacked = data.graph.apply(&p).unwrap();
    let path = dir.path().join("attacked.txt");
    export_embedding_coordinates(&attacked, &DeepWalkConfig::default(), 3, None, &path).unwrap();
    let (m, labels) = EmbeddingMatrix::from_text(&fs::read_to_string(&path).unwrap(), 16).unwrap();
    assert_eq!((m.rows(), m.dim()), (34, 16));
    assert!(labels.is_none());
}
