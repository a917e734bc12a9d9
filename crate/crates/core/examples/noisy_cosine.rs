//! Online next-step prediction of a noisy cosine with a two-layer P-TNCN,
//! next to the noise-free oracle.
//!
//! cargo run --release --example noisy_cosine -- [seed]

use tncn::datagen::{gen_noisy_cosine, CosineConfig};
use tncn::harness::{run_online_training, CosineOracle, MetricKind, OnlineConfig, PtncnLearner};
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Matrix, Rng};

fn main() -> tncn::Result<()> {
    let seed: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1);
    let cosine = CosineConfig::default();
    let xs = gen_noisy_cosine(&cosine, &mut Rng::new(seed))?;
    let stream = vec![xs.iter().map(|&v| Matrix::column(&[v])).collect::<Vec<_>>()];

    let cfg = PtncnConfig::new(1, &[20, 20], ActivationKind::Tanh, ActivationKind::Identity, OutputLikelihood::Gaussian);
    let mut model = PtncnLearner::build(&cfg, Hyperparams::default(), 0.025, &mut Rng::new(seed + 1))?;
    let oc = OnlineConfig::new(MetricKind::SquaredError);
    let log = run_online_training(&mut model, &stream, &oc)?;

    let mut oracle = CosineOracle::new(cosine.dt);
    let gold = run_online_training(&mut oracle, &stream, &oc)?;

    let pse = log.mean("squared_error").unwrap_or(f64::NAN);
    let tail: Vec<f64> = log.records.iter().rev().take(10_000).map(|r| r.value).collect();
    println!("steps            {}", log.len());
    println!("pSE              {pse:.5}");
    println!("last 10k steps   {:.5}", tail.iter().sum::<f64>() / tail.len() as f64);
    println!("gold predictor   {:.5}", gold.mean("squared_error").unwrap_or(f64::NAN));
    Ok(())
}
