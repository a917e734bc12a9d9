use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::ptncn::OutputLikelihood;

/// Probabilities are floored to `[EPS, 1 − EPS]` before taking logs.
pub const PROB_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    SquaredError,
    BernoulliCe,
    CategoricalCe,
    Bpc,
}

impl MetricKind {
    pub fn name(self) -> &'static str {
        match self {
            MetricKind::SquaredError => "squared_error",
            MetricKind::BernoulliCe => "bernoulli_ce",
            MetricKind::CategoricalCe => "categorical_ce",
            MetricKind::Bpc => "bpc",
        }
    }

    /// Natural metric for a likelihood.
    pub fn for_likelihood(l: OutputLikelihood) -> Self {
        match l {
            OutputLikelihood::Gaussian => MetricKind::SquaredError,
            OutputLikelihood::Bernoulli => MetricKind::BernoulliCe,
            OutputLikelihood::Categorical => MetricKind::Bpc,
        }
    }
}

/// Metric of predictions against targets, summed over the rows of each
/// column and averaged over columns (one column per sequence in a batch).
///
/// - squared error `Σ(p − t)²`
/// - Bernoulli CE `−Σ[t·ln p + (1−t)·ln(1−p)]`
/// - categorical CE `−Σ t·ln p` (`−ln p_target` for one-hot targets)
/// - bits per character: categorical CE divided by `ln 2`
pub fn compute_metric(kind: MetricKind, preds: &Matrix, targets: &Matrix) -> Result<f64> {
    if !preds.same_shape(targets) {
        return Err(Error::shape(
            "compute_metric",
            format!("{:?}", preds.shape()),
            format!("{:?}", targets.shape()),
        ));
    }
    if preds.cols() == 0 {
        return Err(Error::Empty("metric batch"));
    }
    let p = preds.as_slice().iter();
    let t = targets.as_slice().iter();
    let total: f64 = match kind {
        MetricKind::SquaredError => p.zip(t).map(|(p, t)| (p - t) * (p - t)).sum(),
        MetricKind::BernoulliCe => p
            .zip(t)
            .map(|(&p, &t)| {
                let p = p.clamp(PROB_EPS, 1.0 - PROB_EPS);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            })
            .sum(),
        MetricKind::CategoricalCe | MetricKind::Bpc => {
            let ce: f64 = p
                .zip(t)
                .filter(|(_, &t)| t != 0.0)
                .map(|(&p, &t)| -t * p.clamp(PROB_EPS, 1.0).ln())
                .sum();
            if kind == MetricKind::Bpc {
                ce / std::f64::consts::LN_2
            } else {
                ce
            }
        }
    };
    Ok(total / preds.cols() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub step: usize,
    pub metric: String,
    pub value: f64,
    pub wall_ms: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub records: Vec<MetricRecord>,
}

pub const CSV_HEADER: &str = "step,metric,value,wall_ms";

impl MetricsLog {
    pub fn push(&mut self, step: usize, metric: &str, value: f64, wall_ms: f64) {
        debug_assert!(self.records.last().is_none_or(|r| r.step <= step));
        self.records.push(MetricRecord {
            step,
            metric: metric.to_string(),
            value,
            wall_ms,
        });
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Mean of all values recorded under `metric`.
    pub fn mean(&self, metric: &str) -> Option<f64> {
        let vals: Vec<f64> = self
            .records
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| r.value)
            .collect();
        (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// CSV with header `step,metric,value,wall_ms`. With `timing` off the
    /// wall-time column is written as `0` so identical runs give identical bytes.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::with_capacity(32 * (self.records.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let w = if timing { r.wall_ms } else { 0.0 };
            let _ = writeln!(s, "{},{},{:e},{:.3}", r.step, r.metric, r.value, w);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernoulli_perfect_and_half() {
        let t = Matrix::column(&[0.0, 1.0, 1.0]);
        assert!(compute_metric(MetricKind::BernoulliCe, &t, &t).unwrap() < 1e-11);
        let p = Matrix::column(&[0.5]);
        let one = Matrix::column(&[1.0]);
        let ce = compute_metric(MetricKind::BernoulliCe, &p, &one).unwrap();
        assert!((ce - 0.693_147_180_559_945_3).abs() < 1e-15);
    }

    #[test]
    fn uniform_bpc_over_49_symbols() {
        let p = Matrix::filled(49, 1, 1.0 / 49.0);
        let mut t = Matrix::zeros(49, 1);
        t.set(7, 0, 1.0);
        let bpc = compute_metric(MetricKind::Bpc, &p, &t).unwrap();
        assert!((bpc - 49f64.log2()).abs() < 1e-12);
        assert!((bpc - 5.6147).abs() < 1e-4);
    }

    #[test]
    fn squared_error_is_per_column_mean() {
        let p = Matrix::from_rows(&[&[1.0, 0.0], &[1.0, 0.0]]);
        let t = Matrix::zeros(2, 2);
        assert_eq!(compute_metric(MetricKind::SquaredError, &p, &t).unwrap(), 1.0);
    }

    #[test]
    fn shape_mismatch() {
        assert!(compute_metric(MetricKind::SquaredError, &Matrix::zeros(2, 1), &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut log = MetricsLog::default();
        log.push(1, "squared_error", 0.25, 1.5);
        log.push(2, "squared_error", 0.75, 2.0);
        assert_eq!(
            log.to_csv(false),
            "step,metric,value,wall_ms\n1,squared_error,2.5e-1,0.000\n2,squared_error,7.5e-1,0.000\n"
        );
        assert_eq!(log.mean("squared_error"), Some(0.5));
        assert_eq!(log.mean("other"), None);
    }
}
