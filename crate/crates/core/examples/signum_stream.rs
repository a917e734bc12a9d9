//! The same cosine stream with signum state units. Learning never touches
//! an activation derivative, which the thread-local counter confirms.

use tncn::datagen::{gen_noisy_cosine, CosineConfig};
use tncn::harness::{run_online_training, MetricKind, OnlineConfig, PtncnLearner};
use tncn::numerics::derivative_evaluations;
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Matrix, Rng};

fn main() -> tncn::Result<()> {
    let xs = gen_noisy_cosine(&CosineConfig::default(), &mut Rng::new(0))?;
    let stream = vec![xs.iter().map(|&v| Matrix::column(&[v])).collect::<Vec<_>>()];
    let cfg = PtncnConfig::new(1, &[20, 20], ActivationKind::Signum, ActivationKind::Identity, OutputLikelihood::Gaussian);
    let mut model = PtncnLearner::build(&cfg, Hyperparams::default(), 0.025, &mut Rng::new(1))?;

    let before = derivative_evaluations();
    let log = run_online_training(&mut model, &stream, &OnlineConfig::new(MetricKind::SquaredError))?;
    println!("pSE {:.5}", log.mean("squared_error").unwrap_or(f64::NAN));
    println!("activation derivatives evaluated: {}", derivative_evaluations() - before);
    Ok(())
}
