//! Grid execution and result files.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ComposerSpec, DigitSource, ExperimentConfig, ExperimentKind, MnistSettings, TableSettings};
use crate::data::mnist::{read_idx_images, read_idx_labels, synthetic_digits};
use crate::data::{
    build_mnist_tournament, generate_ltl_two_modes_test_tasks, generate_two_modes, load_task_table, MnistTournament,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    evaluate_ltl, evaluate_mtl, mean_std, multiclass_01, refine_task_blocks, task_folds, with_capacity, MetricKind,
    SharedComponent,
};
use crate::models::{Model, ModelConfig};
use crate::solver::{solve, SolveReport};
use crate::task::{LossKind, SplitDataset};
use crate::theory::{bound_comparison, verify_tail_bound, write_comparison_csv, BoundReport};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "MTL_OUTPUT_DIR";

pub const RESULTS_HEADER: &str = "experiment,composer,capacity,replicate,metric_kind,max_value,mean_value,std,wall_time_ms";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub output_dir: Option<PathBuf>,
    /// Worker threads; all available cores when unset.
    pub workers: Option<usize>,
    /// Write per-cell solver traces.
    pub trace: bool,
}

/// One line of `results.csv`. When a grid cell has several replicates or
/// folds, an aggregate row follows them with replicate `all`, the mean of
/// the per-replicate values, and the standard deviation of `max_value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub experiment: String,
    pub composer: String,
    pub capacity: f64,
    pub replicate: String,
    pub metric_kind: String,
    pub max_value: f64,
    pub mean_value: f64,
    pub std: Option<f64>,
    pub wall_time_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub composer: String,
    pub capacity: f64,
    pub replicate: usize,
    pub iterations_run: usize,
    pub best_objective: f64,
    pub final_objective: f64,
    pub converged: bool,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellSummary>,
    pub theory: Vec<BoundReport>,
    pub output_dir: PathBuf,
}

impl RunOutput {
    /// Rows of one metric for one composer, per replicate (no aggregates).
    pub fn replicate_rows<'a>(&'a self, composer: &'a str, metric_kind: &'a str) -> impl Iterator<Item = &'a ResultRow> {
        self.rows
            .iter()
            .filter(move |r| r.composer == composer && r.metric_kind == metric_kind && r.replicate != "all")
    }

    pub fn aggregate(&self, composer: &str, capacity: f64, metric_kind: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| {
            r.composer == composer && r.capacity == capacity && r.metric_kind == metric_kind && r.replicate == "all"
        })
    }
}

/// Process exit status for an error: 2 for configuration problems, 3 for
/// unreadable or malformed data, 4 for solver divergence, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::InvalidParameter(_) | Error::Inconclusive(_) | Error::Json(_) | Error::ModeMismatch { .. } => 2,
        Error::Data(_)
        | Error::Table(_)
        | Error::NonNumeric { .. }
        | Error::MissingColumn(_)
        | Error::EmptySplit { .. }
        | Error::Idx(_)
        | Error::ClassAbsent(_)
        | Error::EmptyTask(_)
        | Error::InvalidLabel(_) => 3,
        Error::Divergence { .. } => 4,
        _ => 1,
    }
}

fn data_error(err: Error) -> Error {
    match err {
        Error::Io(e) => Error::Data(e.to_string()),
        Error::Csv(e) => Error::Data(e.to_string()),
        Error::DimensionMismatch { .. } | Error::LengthMismatch { .. } => Error::Data(err.to_string()),
        other => other,
    }
}

/// Flag, then environment, then the config value (relative to `base_dir`).
pub fn resolve_output_dir(config: &ExperimentConfig, base_dir: &Path, flag: Option<&Path>) -> PathBuf {
    if let Some(dir) = flag {
        return dir.to_path_buf();
    }
    if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(dir);
    }
    base_dir.join(&config.output_dir)
}

/// Reads the config at `path` and runs it; data paths in the config are
/// relative to the config's directory.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunOutput> {
    let config = ExperimentConfig::from_path(path)?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    run(&config, &base, opts)
}

pub fn run(config: &ExperimentConfig, base_dir: &Path, opts: &RunOptions) -> Result<RunOutput> {
    config.validate()?;
    let output_dir = resolve_output_dir(config, base_dir, opts.output_dir.as_deref());
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(Error::Config("workers: must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("workers: {e}")))?;
    let (rows, cells, theory, traces) = pool.install(|| execute(config, base_dir))?;

    std::fs::create_dir_all(&output_dir)?;
    write_results(&rows, &output_dir.join("results.csv"))?;
    if opts.trace {
        let dir = output_dir.join("traces");
        std::fs::create_dir_all(&dir)?;
        for (cell, report) in cells.iter().zip(&traces) {
            let name = format!("{}_c{}_r{}.csv", file_safe(&cell.composer), cell.capacity, cell.replicate);
            report.write_trace_csv(&dir.join(name))?;
        }
    }
    if let (Some(settings), false) = (&config.theory, theory.is_empty()) {
        let mut comparison = Vec::new();
        for report in &theory {
            let c = settings.environment.representations.len();
            comparison.extend(bound_comparison(
                c,
                report.delta,
                settings.environment.clip_bound,
                report.mean_train_risk,
                settings.bound.epsilon,
                &[report.tasks],
                &settings.comparison_gammas,
            )?);
        }
        write_comparison_csv(&comparison, std::fs::File::create(output_dir.join("bound_comparison.csv"))?)?;
    }
    let manifest = serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "experiment": config.experiment.label(),
        "seed": config.seed,
        "config": config,
        "cells": cells,
        "theory": theory,
    });
    std::fs::write(output_dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(RunOutput { rows, cells, theory, output_dir })
}

fn file_safe(label: &str) -> String {
    label.chars().map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '_' { c } else { '_' }).collect()
}

pub fn write_results(rows: &[ResultRow], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

type Executed = (Vec<ResultRow>, Vec<CellSummary>, Vec<BoundReport>, Vec<SolveReport>);

struct Cell {
    composer: usize,
    capacity: usize,
    replicate: usize,
}

struct CellOutcome {
    rows: Vec<ResultRow>,
    summary: CellSummary,
    report: SolveReport,
}

/// Everything a cell needs besides its grid coordinates.
enum Prepared {
    TwoModes,
    Table { data: SplitDataset, settings: TableSettings },
    Mnist { tournament: MnistTournament, inputs: Vec<Vec<f64>>, labels: Vec<usize>, n_classes: usize },
}

fn execute(config: &ExperimentConfig, base_dir: &Path) -> Result<Executed> {
    if config.experiment == ExperimentKind::Theory {
        let (rows, reports) = run_theory(config)?;
        return Ok((rows, Vec::new(), reports, Vec::new()));
    }
    let prepared = prepare(config, base_dir)?;
    let per_replicate = match &prepared {
        Prepared::Table { settings, .. } => settings.folds.unwrap_or(1),
        _ => 1,
    };
    let mut grid = Vec::new();
    for composer in 0..config.composers.len() {
        for capacity in 0..config.capacity_grid.len() {
            for replicate in 0..config.replicates * per_replicate {
                grid.push(Cell { composer, capacity, replicate });
            }
        }
    }
    let outcomes: Vec<CellOutcome> =
        grid.par_iter().map(|cell| run_cell(config, &prepared, cell)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut cells = Vec::with_capacity(outcomes.len());
    let mut reports = Vec::with_capacity(outcomes.len());
    // outcomes follow the grid order, so each (composer, capacity) block is contiguous
    for block in outcomes.chunks(config.replicates * per_replicate) {
        let block_rows: Vec<&ResultRow> = block.iter().flat_map(|o| &o.rows).collect();
        rows.extend(block_rows.iter().map(|r| (*r).clone()));
        if block.len() > 1 {
            rows.extend(aggregate(&block_rows));
        }
    }
    for o in outcomes {
        cells.push(o.summary);
        reports.push(o.report);
    }
    Ok((rows, cells, Vec::new(), reports))
}

fn aggregate(rows: &[&ResultRow]) -> Vec<ResultRow> {
    let mut kinds: Vec<&str> = Vec::new();
    for r in rows {
        if !kinds.contains(&r.metric_kind.as_str()) {
            kinds.push(&r.metric_kind);
        }
    }
    kinds
        .into_iter()
        .map(|kind| {
            let group: Vec<&&ResultRow> = rows.iter().filter(|r| r.metric_kind == kind).collect();
            let maxes: Vec<f64> = group.iter().map(|r| r.max_value).collect();
            let means: Vec<f64> = group.iter().map(|r| r.mean_value).collect();
            let (max_value, std) = mean_std(&maxes);
            let first = group[0];
            ResultRow {
                experiment: first.experiment.clone(),
                composer: first.composer.clone(),
                capacity: first.capacity,
                replicate: "all".into(),
                metric_kind: kind.to_string(),
                max_value,
                mean_value: mean_std(&means).0,
                std: Some(std),
                wall_time_ms: group.iter().map(|r| r.wall_time_ms).sum(),
            }
        })
        .collect()
}

fn prepare(config: &ExperimentConfig, base_dir: &Path) -> Result<Prepared> {
    match config.experiment {
        ExperimentKind::TwoModes => Ok(Prepared::TwoModes),
        ExperimentKind::TaskTable => {
            let settings = config.table.clone().expect("validated");
            let table = load_task_table(&base_dir.join(&settings.path), &settings.schema, &settings.holdout)
                .map_err(data_error)?;
            let data = table.to_split_dataset().map_err(data_error)?;
            if let Some(k) = settings.folds {
                if k > data.num_tasks() {
                    return Err(Error::Config(format!("table.folds: {k} folds but only {} tasks", data.num_tasks())));
                }
            }
            Ok(Prepared::Table { data, settings })
        }
        ExperimentKind::Mnist => prepare_mnist(config.mnist.as_ref().expect("validated"), base_dir),
        ExperimentKind::Theory => unreachable!("theory has no cells"),
    }
}

fn prepare_mnist(settings: &MnistSettings, base_dir: &Path) -> Result<Prepared> {
    let n_classes = settings.tournament.n_classes;
    let ((train, train_labels), (test, test_labels)) = match &settings.source {
        DigitSource::Idx { train_images, train_labels, test_images, test_labels } => {
            let read = |img: &Path, lab: &Path| -> Result<_> {
                Ok((read_idx_images(&base_dir.join(img))?, read_idx_labels(&base_dir.join(lab))?))
            };
            (
                read(train_images, train_labels).map_err(data_error)?,
                read(test_images, test_labels).map_err(data_error)?,
            )
        }
        DigitSource::Synthetic { train_per_class, test_per_class, seed } => (
            synthetic_digits(*train_per_class, n_classes, *seed, 0),
            synthetic_digits(*test_per_class, n_classes, *seed, 1),
        ),
    };
    let tournament = build_mnist_tournament(&train, &train_labels, &settings.tournament).map_err(data_error)?;
    if test.len() != test_labels.len() || test.is_empty() {
        return Err(Error::Data(format!("{} test images but {} labels", test.len(), test_labels.len())));
    }
    if let Some(l) = test_labels.iter().find(|&&l| usize::from(l) >= n_classes) {
        return Err(Error::Data(format!("test label {l} outside 0..{n_classes}")));
    }
    let inputs = (0..test.len()).map(|i| tournament.pca.transform(&test.scaled(i))).collect::<Result<Vec<_>>>()?;
    let labels = test_labels.iter().map(|&l| usize::from(l)).collect();
    Ok(Prepared::Mnist { tournament, inputs, labels, n_classes })
}

fn train_model(
    config: &ExperimentConfig,
    model_config: &ModelConfig,
    spec: &ComposerSpec,
    data: &SplitDataset,
    kind: LossKind,
) -> Result<(Model, SolveReport)> {
    let composer = spec.build(data.num_tasks())?;
    let (model, report) = solve(&data.train, model_config, &composer, kind, &config.solver)?;
    let model = if config.refine_task_blocks {
        refine_task_blocks(&model, &data.train, model_config, kind, &config.solver)?
    } else {
        model
    };
    Ok((model, report))
}

fn run_cell(config: &ExperimentConfig, prepared: &Prepared, cell: &Cell) -> Result<CellOutcome> {
    let start = Instant::now();
    let spec = &config.composers[cell.composer];
    let capacity = config.capacity_grid[cell.capacity];
    let model_config = with_capacity(&config.base_model_config()?, capacity);
    let mut metrics: Vec<(String, f64, f64)> = Vec::new();
    let report = match prepared {
        Prepared::TwoModes => {
            let settings = config.two_modes.clone().unwrap_or_default();
            let cfg = crate::data::TwoModesConfig { seed: config.seed, ..settings.data };
            let rep = cell.replicate as u64;
            let generated = generate_two_modes(&cfg, rep)?;
            let n_new = settings.ltl_tasks.unwrap_or(cfg.n_type1 + cfg.n_type2);
            let (new_tasks, _) = generate_ltl_two_modes_test_tasks(&cfg, rep, &generated.mu, n_new)?;
            let (model, report) = train_model(config, &model_config, spec, &generated.data, LossKind::SQUARED)?;
            let mtl = evaluate_mtl(&model, &generated.data.test, LossKind::SQUARED, MetricKind::L2Risk)?;
            let shared = SharedComponent::from_model(&model)?;
            let ltl = evaluate_ltl(&shared, &new_tasks, &model_config, LossKind::SQUARED, &config.solver, MetricKind::L2Risk)?;
            metrics.push(("mtl_l2_risk".into(), mtl.max_risk, mtl.mean_risk));
            metrics.push(("ltl_l2_risk".into(), ltl.metrics.max_risk, ltl.metrics.mean_risk));
            report
        }
        Prepared::Table { data, settings } => {
            let label = settings.metric.label();
            match settings.folds {
                None => {
                    let (model, report) = train_model(config, &model_config, spec, data, LossKind::SQUARED)?;
                    let mtl = evaluate_mtl(&model, &data.test, LossKind::SQUARED, settings.metric)?;
                    metrics.push((format!("mtl_{label}"), mtl.max_risk, mtl.mean_risk));
                    report
                }
                Some(k) => {
                    let (rep, fold) = (cell.replicate / k, cell.replicate % k);
                    let folds = task_folds(data.num_tasks(), k, config.seed.wrapping_add(rep as u64))?;
                    let held = &folds[fold];
                    let rest: Vec<usize> = (0..data.num_tasks()).filter(|t| held.binary_search(t).is_err()).collect();
                    let train = data.subset(&rest)?;
                    let (model, report) = train_model(config, &model_config, spec, &train, LossKind::SQUARED)?;
                    let mtl = evaluate_mtl(&model, &train.test, LossKind::SQUARED, settings.metric)?;
                    let shared = SharedComponent::from_model(&model)?;
                    let ltl =
                        evaluate_ltl(&shared, &data.subset(held)?, &model_config, LossKind::SQUARED, &config.solver, settings.metric)?;
                    metrics.push((format!("mtl_{label}"), mtl.max_risk, mtl.mean_risk));
                    metrics.push((format!("ltl_{label}"), ltl.metrics.max_risk, ltl.metrics.mean_risk));
                    report
                }
            }
        }
        Prepared::Mnist { tournament, inputs, labels, n_classes } => {
            let composer = spec.build(tournament.data.num_tasks())?;
            let (model, report) = solve(&tournament.data, &model_config, &composer, LossKind::HINGE, &config.solver)?;
            let error = multiclass_01(&model, inputs, labels, *n_classes)?;
            let train = model.risk_vector(&tournament.data, LossKind::HINGE)?;
            metrics.push(("multiclass_01".into(), error, error));
            metrics.push(("train_hinge_risk".into(), train.max(), train.mean()));
            report
        }
    };
    let wall = start.elapsed().as_millis() as u64;
    let composer = spec.label();
    let rows = metrics
        .into_iter()
        .map(|(metric_kind, max_value, mean_value)| ResultRow {
            experiment: config.experiment.label().into(),
            composer: composer.clone(),
            capacity,
            replicate: cell.replicate.to_string(),
            metric_kind,
            max_value,
            mean_value,
            std: None,
            wall_time_ms: wall,
        })
        .collect();
    let summary = CellSummary {
        composer,
        capacity,
        replicate: cell.replicate,
        iterations_run: report.iterations_run,
        best_objective: report.best_objective,
        final_objective: report.final_objective,
        converged: report.converged,
    };
    Ok(CellOutcome { rows, summary, report })
}

fn run_theory(config: &ExperimentConfig) -> Result<(Vec<ResultRow>, Vec<BoundReport>)> {
    let settings = config.theory.clone().unwrap_or_default();
    let bound = crate::theory::TailBoundConfig { seed: config.seed, ..settings.bound };
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    for &t in &settings.tasks {
        let start = Instant::now();
        let r = verify_tail_bound(&settings.environment, t, &bound)?;
        let wall = start.elapsed().as_millis() as u64;
        let values = [
            ("violation_freq", r.empirical_tail_freq),
            ("allowed_freq", r.allowed_freq),
            ("mean_tail_estimate", r.mean_tail_estimate),
            ("lemma1_bound", r.lemma1_bound),
            ("theorem_tail_freq", r.theorem_tail_freq),
            ("theorem1_rhs", r.theorem1_rhs),
            ("theorem1_threshold", r.theorem1_threshold),
            ("markov_rhs", r.markov_rhs),
            ("skip_rate", r.skip_rate),
        ];
        rows.extend(values.into_iter().map(|(kind, v)| ResultRow {
            experiment: "theory".into(),
            composer: "none".into(),
            capacity: t as f64,
            replicate: "all".into(),
            metric_kind: kind.into(),
            max_value: v,
            mean_value: v,
            std: None,
            wall_time_ms: wall,
        }));
        reports.push(r);
    }
    Ok((rows, reports))
}
