//! Prequential training and the evaluation protocols built on it.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::learner::{Learner, ObserveMode, PtncnLearner};
use super::metrics::{compute_metric, MetricKind, MetricsLog};
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::ptncn::{Hyperparams, PtncnModel};

/// A sequence of observation columns.
pub type Seq = Vec<Matrix>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecordLevel {
    /// One record per time step (per batch step).
    Step,
    /// One record per sequence batch: the metric summed over its steps.
    Sequence,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OnlineConfig {
    pub metric: MetricKind,
    /// Number of sequences advanced side by side as matrix columns.
    pub batch: usize,
    pub record: RecordLevel,
    pub timing: bool,
    pub epochs: usize,
    pub mode: ObserveMode,
}

impl OnlineConfig {
    pub fn new(metric: MetricKind) -> Self {
        Self {
            metric,
            batch: 1,
            record: RecordLevel::Step,
            timing: true,
            epochs: 1,
            mode: ObserveMode::Learn,
        }
    }
}

fn stack_step(group: &[Seq], t: usize) -> Matrix {
    if group.len() == 1 {
        return group[0][t].clone();
    }
    let cols: Vec<&Matrix> = group.iter().map(|s| &s[t]).collect();
    Matrix::hcat(&cols)
}

fn check_group(group: &[Seq]) -> Result<usize> {
    let len = group[0].len();
    if len == 0 {
        return Err(Error::Empty("sequence"));
    }
    if group.iter().any(|s| s.len() != len) {
        return Err(Error::Config(
            "sequences batched together must have equal length".into(),
        ));
    }
    Ok(len)
}

/// Runs one sequence batch through the learner, returning the metric summed
/// over steps. `on_step` receives each step's metric.
fn run_group(
    learner: &mut dyn Learner,
    group: &[Seq],
    metric: MetricKind,
    mode: ObserveMode,
    mut on_step: impl FnMut(f64) -> Result<()>,
) -> Result<f64> {
    let len = check_group(group)?;
    learner.begin_sequence(group.len());
    let mut total = 0.0;
    for t in 0..len {
        let x = stack_step(group, t);
        let pred = learner.predict()?;
        let value = compute_metric(metric, &pred, &x)?;
        learner.observe(&x, mode)?;
        total += value;
        on_step(value)?;
    }
    learner.end_sequence(mode)?;
    Ok(total)
}

/// Test-then-train over every sequence: each prediction is scored before its
/// target is observed, then the learner updates.
pub fn run_online_training(learner: &mut dyn Learner, data: &[Seq], cfg: &OnlineConfig) -> Result<MetricsLog> {
    if data.is_empty() {
        return Err(Error::Empty("training stream"));
    }
    if cfg.batch == 0 {
        return Err(Error::Config("batch must be at least 1".into()));
    }
    let name = cfg.metric.name();
    let mut log = MetricsLog::default();
    let mut step = 0usize;
    let mut seq_index = 0usize;
    for _ in 0..cfg.epochs {
        for group in data.chunks(cfg.batch) {
            let started = Instant::now();
            let mut last = Instant::now();
            let total = run_group(learner, group, cfg.metric, cfg.mode, |v| {
                step += 1;
                if cfg.record == RecordLevel::Step {
                    let now = Instant::now();
                    let ms = if cfg.timing { (now - last).as_secs_f64() * 1e3 } else { 0.0 };
                    last = now;
                    log.push(step, name, v, ms);
                }
                if !v.is_finite() {
                    return Err(Error::Numerical(format!("non-finite {name} at step {step}")));
                }
                Ok(())
            })?;
            seq_index += 1;
            if cfg.record == RecordLevel::Sequence {
                let ms = if cfg.timing { started.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
                log.push(seq_index, name, total, ms);
            }
        }
    }
    Ok(log)
}

/// Mean per-sequence metric (summed over steps) with weights untouched.
/// Sequences are evaluated independently on forks of the learner, in
/// parallel, and reduced in input order.
pub fn evaluate(learner: &dyn Learner, data: &[Seq], metric: MetricKind, mode: ObserveMode) -> Result<f64> {
    if mode == ObserveMode::Learn {
        return Err(Error::Config("evaluation cannot run in learn mode".into()));
    }
    if data.is_empty() {
        return Err(Error::Empty("evaluation set"));
    }
    let per_seq: Vec<f64> = data
        .par_iter()
        .map(|s| {
            let mut l = learner.fork();
            run_group(l.as_mut(), std::slice::from_ref(s), metric, mode, |_| Ok(()))
        })
        .collect::<Result<_>>()?;
    Ok(per_seq.iter().sum::<f64>() / per_seq.len() as f64)
}

/// Evaluates a trained P-TNCN with its weights frozen. With correction the
/// states still settle against each observation; without it the model runs
/// on its own predictions.
pub fn run_zero_shot(
    model: &PtncnModel,
    hp: &Hyperparams,
    data: &[Seq],
    correction_enabled: bool,
    metric: MetricKind,
) -> Result<f64> {
    let learner = PtncnLearner::new(model.clone(), hp.clone());
    let mode = if correction_enabled {
        ObserveMode::Adapt
    } else {
        ObserveMode::Frozen
    };
    evaluate(&learner, data, metric, mode)
}

#[derive(Clone, Debug)]
pub struct ContinualTask {
    pub name: String,
    pub train: Vec<Seq>,
    pub valid: Vec<Seq>,
    /// Run an online pass over `train`.
    pub train_online: bool,
    /// During that pass keep weights fixed (states still adapt).
    pub frozen: bool,
}

/// Lower-triangular grid: `rows[i][j]` is the validation metric of task `j`
/// after training through task `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl TaskMatrix {
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.rows.get(i).and_then(|r| r.get(j)).copied()
    }

    /// `m[n][j] − m[j][j]`: growth of task `j`'s metric by the end.
    pub fn forgetting(&self, j: usize) -> Option<f64> {
        let last = self.rows.last()?;
        Some(last.get(j)? - self.get(j, j)?)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("after_task");
        for n in &self.names {
            s.push(',');
            s.push_str(n);
        }
        s.push('\n');
        for (i, row) in self.rows.iter().enumerate() {
            s.push_str(&self.names[i]);
            for j in 0..self.names.len() {
                s.push(',');
                if let Some(v) = row.get(j) {
                    s.push_str(&format!("{v:e}"));
                }
            }
            s.push('\n');
        }
        s
    }
}

/// One online pass per task in order; after each, every task seen so far is
/// evaluated on its validation set with `eval_mode`.
pub fn run_continual(
    learner_factory: &dyn Fn() -> Result<Box<dyn Learner>>,
    tasks: &[ContinualTask],
    cfg: &OnlineConfig,
    eval_mode: ObserveMode,
) -> Result<TaskMatrix> {
    if tasks.is_empty() {
        return Err(Error::Empty("task list"));
    }
    let mut learner = learner_factory()?;
    let mut rows = Vec::with_capacity(tasks.len());
    for (i, task) in tasks.iter().enumerate() {
        if task.train_online {
            let pass = OnlineConfig {
                mode: if task.frozen { ObserveMode::Adapt } else { cfg.mode },
                ..cfg.clone()
            };
            run_online_training(learner.as_mut(), &task.train, &pass)?;
        }
        let row = tasks[..=i]
            .iter()
            .map(|t| evaluate(learner.as_ref(), &t.valid, cfg.metric, eval_mode))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok(TaskMatrix {
        names: tasks.iter().map(|t| t.name.clone()).collect(),
        rows,
    })
}
