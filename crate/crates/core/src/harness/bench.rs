//! Per-step wall-time scaling against hidden width.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::learner::{EsnLearner, Learner, ObserveMode, PtncnLearner, RnnAlgorithm, RnnLearner};
use crate::baselines::{ElmanConfig, EsnConfig, Optimizer};
use crate::error::{Error, Result};
use crate::numerics::{ActivationKind, Matrix, Rng};
use crate::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};

/// Input width used for every benchmarked learner.
pub const BENCH_INPUT_DIM: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchKind {
    /// Two hidden layers of width n.
    Ptncn,
    Rtrl,
    Uoro,
    Esn,
}

impl BenchKind {
    pub fn name(self) -> &'static str {
        match self {
            BenchKind::Ptncn => "ptncn",
            BenchKind::Rtrl => "rtrl",
            BenchKind::Uoro => "uoro",
            BenchKind::Esn => "esn",
        }
    }

    fn build(self, n: usize, rng: &mut Rng) -> Result<Box<dyn Learner>> {
        let k = BENCH_INPUT_DIM;
        let gaussian = OutputLikelihood::Gaussian;
        Ok(match self {
            BenchKind::Ptncn => {
                let cfg = PtncnConfig::new(k, &[n, n], ActivationKind::Tanh, ActivationKind::Identity, gaussian);
                Box::new(PtncnLearner::build(&cfg, Hyperparams::default(), 0.025, rng)?)
            }
            BenchKind::Rtrl | BenchKind::Uoro => {
                let alg = if self == BenchKind::Rtrl { RnnAlgorithm::Rtrl } else { RnnAlgorithm::Uoro };
                let cfg = ElmanConfig::new(k, n, k, gaussian);
                let opt = Optimizer::Sgd { lr: 1e-3 };
                Box::new(RnnLearner::build(&cfg, alg, 1, opt, 0.1 / n as f64, rng)?)
            }
            BenchKind::Esn => Box::new(EsnLearner::build(&EsnConfig::new(k, n, k, gaussian), 1e-3, rng)?),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub kinds: Vec<BenchKind>,
    pub widths: Vec<usize>,
    pub reps: usize,
    pub warmup: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            kinds: vec![BenchKind::Ptncn, BenchKind::Rtrl, BenchKind::Uoro, BenchKind::Esn],
            widths: vec![32, 64, 128, 256],
            reps: 20,
            warmup: 5,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.widths.len() < 3 {
            return Err(Error::Config("scaling benchmark needs at least 3 widths".into()));
        }
        if self.widths.contains(&0) {
            return Err(Error::Config("benchmark widths must be positive".into()));
        }
        if self.reps < 20 {
            return Err(Error::Config("scaling benchmark needs at least 20 repetitions".into()));
        }
        if self.kinds.is_empty() {
            return Err(Error::Empty("benchmark learner list"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub learner: String,
    pub width: usize,
    pub median_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of ln(time) against ln(width), per learner.
    pub slopes: Vec<(String, f64)>,
}

impl ScalingReport {
    pub fn slope(&self, learner: &str) -> Option<f64> {
        self.slopes.iter().find(|(n, _)| n == learner).map(|(_, s)| *s)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("learner,width,median_ms\n");
        for r in &self.rows {
            s.push_str(&format!("{},{},{:.6}\n", r.learner, r.width, r.median_ms));
        }
        s
    }
}

/// Slope of the ordinary least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 || points.iter().any(|&(x, y)| x <= 0.0 || y <= 0.0) {
        return Err(Error::Numerical("log-log fit needs ≥2 positive points".into()));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Numerical("log-log fit needs distinct widths".into()));
    }
    Ok(sxy / sxx)
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 0 {
        0.5 * (xs[m - 1] + xs[m])
    } else {
        xs[m]
    }
}

/// Median wall time of one learning step (predict then observe) at each
/// width, after `warmup` untimed steps.
pub fn benchmark_scaling(cfg: &BenchConfig, seed: u64) -> Result<ScalingReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for (ki, &kind) in cfg.kinds.iter().enumerate() {
        let mut points = Vec::with_capacity(cfg.widths.len());
        for &n in &cfg.widths {
            let mut rng = Rng::new(seed).derive((ki as u64) << 32 | n as u64);
            let mut learner = kind.build(n, &mut rng)?;
            learner.begin_sequence(1);
            let xs: Vec<Matrix> = (0..cfg.warmup + cfg.reps)
                .map(|_| {
                    let v: Vec<f64> = (0..BENCH_INPUT_DIM).map(|_| rng.standard_normal()).collect();
                    Matrix::column(&v)
                })
                .collect();
            let mut times = Vec::with_capacity(cfg.reps);
            for (i, x) in xs.iter().enumerate() {
                let t0 = Instant::now();
                learner.predict()?;
                learner.observe(x, ObserveMode::Learn)?;
                let ms = t0.elapsed().as_secs_f64() * 1e3;
                if i >= cfg.warmup {
                    times.push(ms);
                }
            }
            let median_ms = median(times);
            points.push((n as f64, median_ms.max(1e-9)));
            rows.push(ScalingRow {
                learner: kind.name().to_string(),
                width: n,
                median_ms,
            });
        }
        slopes.push((kind.name().to_string(), loglog_slope(&points)?));
    }
    Ok(ScalingReport { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let pts: Vec<(f64, f64)> = [2.0, 4.0, 8.0].iter().map(|&x: &f64| (x, 3.0 * x.powi(4))).collect();
        assert!((loglog_slope(&pts).unwrap() - 4.0).abs() < 1e-12);
        assert!(loglog_slope(&[(1.0, 1.0)]).is_err());
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(vec![4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn report_has_row_per_learner_and_width() {
        let cfg = BenchConfig {
            widths: vec![2, 3, 4],
            ..BenchConfig::default()
        };
        let r = benchmark_scaling(&cfg, 0).unwrap();
        assert_eq!(r.rows.len(), 12);
        assert_eq!(r.slopes.len(), 4);
        assert_eq!(r.to_csv().lines().count(), 13);
        assert!(r.slope("rtrl").unwrap().is_finite());
    }

    #[test]
    fn too_few_widths_or_reps() {
        let mut cfg = BenchConfig {
            widths: vec![2, 4],
            ..BenchConfig::default()
        };
        assert!(benchmark_scaling(&cfg, 0).is_err());
        cfg.widths = vec![2, 4, 8];
        cfg.reps = 5;
        assert!(benchmark_scaling(&cfg, 0).is_err());
    }
}
