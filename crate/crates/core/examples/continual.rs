//! Three glyph families learned one after another; prints the task matrix
//! and the forgetting of the first task for P-TNCN and a BPTT network.

use tncn::baselines::{ElmanConfig, Optimizer};
use tncn::datagen::{binarize, builtin_glyphs, gen_bouncing_dataset, BounceConfig, GlyphSet};
use tncn::harness::{
    run_continual, ContinualTask, Learner, MetricKind, ObserveMode, OnlineConfig, PtncnLearner, RecordLevel,
    RnnAlgorithm, RnnLearner, Seq,
};
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Rng};

fn videos(set: GlyphSet, count: usize, seed: u64) -> tncn::Result<Vec<Seq>> {
    let cfg = BounceConfig {
        frame_size: 16,
        seq_len: 10,
        num_objects: 1,
        speed_range: [0.5, 1.25],
        ..BounceConfig::default()
    };
    let seqs = gen_bouncing_dataset(&builtin_glyphs(set, 1), &cfg, count, seed)?;
    Ok(seqs.into_iter().map(|s| s.frames.iter().map(binarize).collect()).collect())
}

fn main() -> tncn::Result<()> {
    let sets = [GlyphSet::Digits, GlyphSet::Letters, GlyphSet::Clothing];
    let mut tasks = Vec::new();
    for (i, &set) in sets.iter().enumerate() {
        tasks.push(ContinualTask {
            name: format!("{set:?}").to_lowercase(),
            train: videos(set, 300, 300 + i as u64)?,
            valid: videos(set, 50, 400 + i as u64)?,
            train_online: true,
            frozen: false,
        });
    }
    let b = OutputLikelihood::Bernoulli;
    let ptncn = || -> tncn::Result<Box<dyn Learner>> {
        let cfg = PtncnConfig::new(256, &[128], ActivationKind::Tanh, ActivationKind::Sigmoid, b);
        let hp = Hyperparams {
            eta: 0.2,
            beta: 0.3,
            hebbian_enabled: false,
            ..Hyperparams::default()
        };
        Ok(Box::new(PtncnLearner::build(&cfg, hp, 0.01, &mut Rng::new(0))?))
    };
    let bptt = || -> tncn::Result<Box<dyn Learner>> {
        let opt = Optimizer::RmsProp { lr: 0.01, decay: 0.9, eps: 1e-8 };
        let cfg = ElmanConfig::new(256, 64, 256, b);
        Ok(Box::new(RnnLearner::build(&cfg, RnnAlgorithm::Bptt, 10, opt, 0.025, &mut Rng::new(0))?))
    };

    let oc = OnlineConfig {
        record: RecordLevel::Sequence,
        ..OnlineConfig::new(MetricKind::SquaredError)
    };
    for (name, factory) in [("ptncn", &ptncn as &dyn Fn() -> _), ("bptt", &bptt)] {
        let m = run_continual(factory, &tasks, &oc, ObserveMode::Adapt)?;
        println!("{name}\n{}", m.to_csv());
        println!("{name} forgetting of the first task: {:.3}\n", m.forgetting(0).unwrap_or(f64::NAN));
    }
    Ok(())
}
