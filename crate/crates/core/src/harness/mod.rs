//! Online training loop, metrics, evaluation protocols, the scaling
//! benchmark and checkpoint files.

pub mod bench;
pub mod checkpoint;
pub mod learner;
pub mod metrics;
pub mod online;

pub use bench::{benchmark_scaling, loglog_slope, BenchConfig, BenchKind, ScalingReport, ScalingRow};
pub use checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
pub use learner::{
    learner_from_checkpoint, CosineOracle, EsnLearner, Learner, ObserveMode, PtncnLearner, RnnAlgorithm,
    RnnLearner,
};
pub use metrics::{compute_metric, MetricKind, MetricRecord, MetricsLog};
pub use online::{
    evaluate, run_continual, run_online_training, run_zero_shot, ContinualTask, OnlineConfig, RecordLevel, Seq,
    TaskMatrix,
};
