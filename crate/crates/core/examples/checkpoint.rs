//! Saves a trained learner, reloads it and checks the reloaded copy encodes
//! to the same bytes. Weights are stored as f32, so the reloaded model
//! scores within f32 rounding of the original.

use tncn::datagen::{gen_noisy_cosine, CosineConfig};
use tncn::harness::{
    evaluate, learner_from_checkpoint, load_checkpoint, run_online_training, save_checkpoint, Learner, MetricKind,
    ObserveMode, OnlineConfig, PtncnLearner,
};
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Matrix, Rng};

fn main() -> tncn::Result<()> {
    let cosine = CosineConfig {
        steps: 5_000,
        ..CosineConfig::default()
    };
    let xs = gen_noisy_cosine(&cosine, &mut Rng::new(0))?;
    let stream = vec![xs.iter().map(|&v| Matrix::column(&[v])).collect::<Vec<_>>()];
    let cfg = PtncnConfig::new(1, &[20, 20], ActivationKind::Tanh, ActivationKind::Identity, OutputLikelihood::Gaussian);
    let mut model = PtncnLearner::build(&cfg, Hyperparams::default(), 0.025, &mut Rng::new(1))?;
    run_online_training(&mut model, &stream, &OnlineConfig::new(MetricKind::SquaredError))?;

    let path = std::env::temp_dir().join("tncn_example.ptnc");
    save_checkpoint(&model.checkpoint()?, &path)?;
    let restored = learner_from_checkpoint(&load_checkpoint(&path)?)?;
    let same_bytes = restored.checkpoint()?.encode()? == std::fs::read(&path).map_err(|e| tncn::Error::Config(e.to_string()))?;

    let a = evaluate(&model, &stream, MetricKind::SquaredError, ObserveMode::Adapt)?;
    let b = evaluate(restored.as_ref(), &stream, MetricKind::SquaredError, ObserveMode::Adapt)?;
    println!("{} ({} bytes)", path.display(), std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0));
    println!("byte-identical re-encode: {same_bytes}");
    println!("evaluation before/after reload: {a:.6} / {b:.6} (relative gap {:.1e})", (a - b).abs() / a.abs());
    std::fs::remove_file(&path).ok();
    Ok(())
}
