//! Train on digit videos, then run the frozen model on letter videos with
//! and without its state-correction dynamics.

use tncn::datagen::{binarize, builtin_glyphs, gen_bouncing_dataset, BounceConfig, GlyphSet};
use tncn::harness::{run_online_training, run_zero_shot, MetricKind, OnlineConfig, PtncnLearner, RecordLevel, Seq};
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
    let cfg = PtncnConfig::new(256, &[64, 64], ActivationKind::Tanh, ActivationKind::Sigmoid, OutputLikelihood::Bernoulli);
    let hp = Hyperparams {
        eta: 0.14,
        beta: 0.3,
        hebbian_enabled: false,
        ..Hyperparams::default()
    };
    let mut model = PtncnLearner::build(&cfg, hp, 0.01, &mut Rng::new(0))?;
    let oc = OnlineConfig {
        batch: 20,
        record: RecordLevel::Sequence,
        ..OnlineConfig::new(MetricKind::BernoulliCe)
    };
    run_online_training(&mut model, &videos(GlyphSet::Digits, 2000, 100)?, &oc)?;

    let unseen = videos(GlyphSet::Letters, 200, 200)?;
    let on = run_zero_shot(&model.model, &model.hp, &unseen, true, MetricKind::SquaredError)?;
    let off = run_zero_shot(&model.model, &model.hp, &unseen, false, MetricKind::SquaredError)?;
    println!("letters, SE per sequence: correction on {on:.3}, off {off:.3}");
    Ok(())
}
