//! Character-level next-symbol prediction, reported in bits per character.
//!
//! cargo run --release --example char_model -- [path/to/text]

use tncn::datagen::{encode_char_corpus, one_hot};
use tncn::harness::{evaluate, run_online_training, MetricKind, ObserveMode, OnlineConfig, PtncnLearner, RecordLevel, Seq};
use tncn::ptncn::{Hyperparams, OutputLikelihood, PtncnConfig};
use tncn::{ActivationKind, Rng};

const FALLBACK: &str = "the quick brown fox jumps over the lazy dog while the cat sleeps by the door. ";

fn main() -> tncn::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(&p).map_err(|e| tncn::Error::Config(format!("{p}: {e}")))?,
        None => FALLBACK.repeat(40),
    };
    let stream = encode_char_corpus(&text, None)?;
    let v = stream.vocab_size();
    let chunks: Vec<Seq> = stream
        .ids
        .chunks(50)
        .map(|c| c.iter().map(|&id| one_hot(id, v)).collect())
        .collect();
    let split = chunks.len() * 9 / 10;
    let (train, test) = chunks.split_at(split);

    let cfg = PtncnConfig::new(v, &[64, 64], ActivationKind::Tanh, ActivationKind::Softmax, OutputLikelihood::Categorical);
    let hp = Hyperparams {
        eta: 0.05,
        hebbian_enabled: false,
        ..Hyperparams::default()
    };
    let mut model = PtncnLearner::build(&cfg, hp, 0.01, &mut Rng::new(3))?;
    let oc = OnlineConfig {
        epochs: 2,
        record: RecordLevel::Sequence,
        ..OnlineConfig::new(MetricKind::Bpc)
    };
    let log = run_online_training(&mut model, train, &oc)?;
    let steps = test.iter().map(Vec::len).sum::<usize>() as f64 / test.len() as f64;
    let held_out = evaluate(&model, test, MetricKind::Bpc, ObserveMode::Adapt)? / steps;
    let per_seq = log.mean("bpc").unwrap_or(f64::NAN) / 50.0;
    println!("vocabulary {v}, {} training chunks", train.len());
    println!("online bpc {per_seq:.3}, held-out bpc {held_out:.3} (uniform {:.3})", (v as f64).log2());
    Ok(())
}
