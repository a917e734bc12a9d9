//! Next-frame prediction on small bouncing-glyph videos: P-TNCN against an
//! echo state network and a BPTT-trained Elman network.

use tncn::baselines::{ElmanConfig, EsnConfig, Optimizer};
use tncn::datagen::{binarize, builtin_glyphs, gen_bouncing_dataset, BounceConfig, GlyphSet};
use tncn::harness::{
    evaluate, run_online_training, EsnLearner, Learner, MetricKind, ObserveMode, OnlineConfig, PtncnLearner,
    RecordLevel, RnnAlgorithm, RnnLearner, Seq,
};
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Rng};

fn videos(count: usize, seed: u64) -> tncn::Result<Vec<Seq>> {
    let cfg = BounceConfig {
        frame_size: 16,
        seq_len: 10,
        num_objects: 1,
        speed_range: [0.5, 1.25],
        ..BounceConfig::default()
    };
    let seqs = gen_bouncing_dataset(&builtin_glyphs(GlyphSet::Digits, 1), &cfg, count, seed)?;
    Ok(seqs.into_iter().map(|s| s.frames.iter().map(binarize).collect()).collect())
}

fn main() -> tncn::Result<()> {
    let train = videos(1000, 1)?;
    let test = videos(100, 2)?;
    let d = 256;
    let b = OutputLikelihood::Bernoulli;
    let mut rng = Rng::new(7);

    let pc = PtncnConfig::new(d, &[128], ActivationKind::Tanh, ActivationKind::Sigmoid, b);
    let hp = Hyperparams {
        eta: 0.2,
        beta: 0.3,
        hebbian_enabled: false,
        ..Hyperparams::default()
    };
    let rms = Optimizer::RmsProp { lr: 0.01, decay: 0.9, eps: 1e-8 };
    let mut learners: Vec<Box<dyn Learner>> = vec![
        Box::new(PtncnLearner::build(&pc, hp, 0.01, &mut rng)?),
        Box::new(EsnLearner::build(&EsnConfig::new(d, 512, d, b), 0.05, &mut rng)?),
        Box::new(RnnLearner::build(&ElmanConfig::new(d, 64, d, b), RnnAlgorithm::Bptt, 10, rms, 0.025, &mut rng)?),
    ];

    let oc = OnlineConfig {
        batch: 20,
        record: RecordLevel::Sequence,
        ..OnlineConfig::new(MetricKind::BernoulliCe)
    };
    for l in &mut learners {
        let before = evaluate(l.as_ref(), &test, MetricKind::BernoulliCe, ObserveMode::Adapt)?;
        run_online_training(l.as_mut(), &train, &oc)?;
        let after = evaluate(l.as_ref(), &test, MetricKind::BernoulliCe, ObserveMode::Adapt)?;
        println!("{:<6} test CE per sequence: {before:7.1} -> {after:7.1}", l.name());
    }
    Ok(())
}
