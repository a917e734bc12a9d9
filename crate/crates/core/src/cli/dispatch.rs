//! Materializes data and learners from a [`RunConfig`] and runs the selected
//! protocol, writing its artifacts under the output directory.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{DataSpec, Experiment, ModelSpec, RunConfig};
use crate::baselines::{ElmanConfig, EsnConfig};
use crate::datagen::{
    binarize, builtin_glyphs, encode_char_corpus, encode_idx_sprites, gen_bouncing_dataset, gen_noisy_cosine,
    load_idx_sprites, Sprite,
};
use crate::error::{Error, Result};
use crate::harness::{
    benchmark_scaling, evaluate, learner_from_checkpoint, load_checkpoint, run_continual, run_online_training,
    run_zero_shot, save_checkpoint, ContinualTask, EsnLearner, Learner, MetricKind, ObserveMode, OnlineConfig,
    PtncnLearner, RecordLevel, RnnLearner, Seq,
};
use crate::numerics::{mix_seed, ActivationKind, Matrix, Rng};
use crate::ptncn::{OutputLikelihood, PtncnConfig};

/// Generated or loaded sequences with their observation width.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub train: Vec<Seq>,
    pub test: Vec<Seq>,
    pub dim: usize,
    pub likelihood: OutputLikelihood,
}

/// Seed streams, so train and test splits never share draws.
const TRAIN_STREAM: u64 = 1;
const TEST_STREAM: u64 = 2;
const MODEL_STREAM: u64 = 3;

pub fn build_dataset(spec: &DataSpec, seed: u64) -> Result<Dataset> {
    match spec {
        DataSpec::Cosine(c) => {
            let stream = |s| -> Result<Seq> {
                let xs = gen_noisy_cosine(c, &mut Rng::new(mix_seed(seed, s)))?;
                Ok(xs.into_iter().map(|v| Matrix::column(&[v])).collect())
            };
            Ok(Dataset {
                train: vec![stream(TRAIN_STREAM)?],
                test: vec![stream(TEST_STREAM)?],
                dim: 1,
                likelihood: OutputLikelihood::Gaussian,
            })
        }
        DataSpec::Bouncing(b) => {
            let base = match &b.idx_path {
                Some(p) => load_idx_sprites(p)?,
                None => builtin_glyphs(b.sprites, 1),
            };
            let sprites = if b.scale > 1 { base.upscale(b.scale) } else { base };
            let cfg = b.bounce_config();
            let frames = |count, s| -> Result<Vec<Seq>> {
                let seqs = gen_bouncing_dataset(&sprites, &cfg, count, mix_seed(seed, s))?;
                Ok(seqs
                    .into_iter()
                    .map(|q| {
                        if b.binarize {
                            q.frames.iter().map(binarize).collect()
                        } else {
                            q.frames
                        }
                    })
                    .collect())
            };
            Ok(Dataset {
                train: frames(b.train_count, TRAIN_STREAM)?,
                test: if b.test_count > 0 { frames(b.test_count, TEST_STREAM)? } else { Vec::new() },
                dim: cfg.frame_dim(),
                likelihood: OutputLikelihood::Bernoulli,
            })
        }
        DataSpec::Text(t) => {
            let text = std::fs::read_to_string(&t.path).map_err(|e| Error::io(&t.path, e))?;
            let stream = encode_char_corpus(&text, None)?;
            let chunks: Vec<Seq> = stream
                .ids
                .chunks(t.seq_len)
                .map(|c| {
                    c.iter()
                        .map(|&id| crate::datagen::one_hot(id, stream.vocab_size()))
                        .collect()
                })
                .collect();
            let n_test = ((chunks.len() as f64) * t.valid_fraction).round() as usize;
            let n_train = chunks.len() - n_test;
            if n_train == 0 {
                return Err(Error::Empty("text training split"));
            }
            let mut train = chunks;
            let test = train.split_off(n_train);
            Ok(Dataset {
                train,
                test,
                dim: stream.vocab_size(),
                likelihood: OutputLikelihood::Categorical,
            })
        }
    }
}

fn head_for(likelihood: OutputLikelihood) -> ActivationKind {
    match likelihood {
        OutputLikelihood::Gaussian => ActivationKind::Identity,
        OutputLikelihood::Bernoulli => ActivationKind::Sigmoid,
        OutputLikelihood::Categorical => ActivationKind::Softmax,
    }
}

pub fn build_learner(cfg: &RunConfig, dim: usize, likelihood: OutputLikelihood) -> Result<Box<dyn Learner>> {
    let mut rng = Rng::new(mix_seed(cfg.seed, MODEL_STREAM));
    Ok(match &cfg.model {
        ModelSpec::Ptncn {
            layer_dims,
            state_activation,
            output_activation,
            init_variance,
            biases,
            parallel,
        } => {
            let head = output_activation.unwrap_or_else(|| head_for(likelihood));
            let mut pc = PtncnConfig::new(dim, layer_dims, *state_activation, head, likelihood);
            pc.biases = *biases;
            let mut l = PtncnLearner::build(&pc, cfg.hyperparams.clone(), *init_variance, &mut rng)?;
            l.parallel = *parallel;
            Box::new(l)
        }
        ModelSpec::Rnn {
            algorithm,
            hidden,
            window,
            optimizer,
            init_variance,
        } => {
            let ec = ElmanConfig::new(dim, *hidden, dim, likelihood);
            Box::new(RnnLearner::build(&ec, *algorithm, *window, optimizer.clone(), *init_variance, &mut rng)?)
        }
        ModelSpec::Esn {
            reservoir,
            spectral_radius,
            leak,
            input_scale,
            density,
            lr,
        } => {
            let mut ec = EsnConfig::new(dim, *reservoir, dim, likelihood);
            ec.spectral_radius = *spectral_radius;
            ec.leak = *leak;
            ec.input_scale = *input_scale;
            ec.density = *density;
            Box::new(EsnLearner::build(&ec, *lr, &mut rng)?)
        }
    })
}

/// Key-value lines written to `summary.txt`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub entries: Vec<(String, String)>,
}

impl Summary {
    pub fn put(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(s, "{k}={v}");
        }
        s
    }
}

fn write(dir: &Path, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn metric_for(cfg: &RunConfig, explicit: Option<MetricKind>, likelihood: OutputLikelihood) -> MetricKind {
    explicit
        .or(cfg.train.metric)
        .unwrap_or_else(|| MetricKind::for_likelihood(likelihood))
}

fn online_config(cfg: &RunConfig, metric: MetricKind) -> OnlineConfig {
    OnlineConfig {
        metric,
        batch: cfg.train.batch,
        record: cfg.train.record,
        timing: cfg.output.timing,
        epochs: cfg.train.epochs,
        mode: ObserveMode::Learn,
    }
}

fn data_spec(cfg: &RunConfig) -> Result<&DataSpec> {
    cfg.data
        .as_ref()
        .ok_or_else(|| Error::Config(format!("{} needs a `data` section", cfg.experiment.name())))
}

/// Trains on the `data` section's training split, writing the metrics CSV
/// and, when enabled, a checkpoint.
fn train_model(cfg: &RunConfig, dir: &Path, summary: &mut Summary) -> Result<(Box<dyn Learner>, Dataset)> {
    let data = build_dataset(data_spec(cfg)?, cfg.seed)?;
    let mut learner = build_learner(cfg, data.dim, data.likelihood)?;
    let metric = metric_for(cfg, None, data.likelihood);
    let log = run_online_training(learner.as_mut(), &data.train, &online_config(cfg, metric))?;
    write(dir, "metrics.csv", log.to_csv(cfg.output.timing))?;
    summary.put("learner", learner.name());
    summary.put("metric", metric.name());
    summary.put("records", log.len());
    summary.put("train_mean", format!("{:e}", log.mean(metric.name()).unwrap_or(f64::NAN)));
    if cfg.output.checkpoint {
        save_checkpoint(&learner.checkpoint()?, dir.join("checkpoint.ptnc"))?;
        summary.put("checkpoint", "checkpoint.ptnc");
    }
    Ok((learner, data))
}

/// Runs the configured experiment. The effective configuration is written
/// first so every output directory carries its own audit trail.
pub fn dispatch(cfg: &RunConfig) -> Result<Summary> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(dir, "effective_config.json", cfg.to_json())?;
    let mut summary = Summary::default();
    summary.put("experiment", cfg.experiment.name());
    summary.put("seed", cfg.seed);
    match cfg.experiment {
        Experiment::Train => {
            let (learner, data) = train_model(cfg, dir, &mut summary)?;
            if !data.test.is_empty() {
                let metric = metric_for(cfg, None, data.likelihood);
                let v = evaluate(learner.as_ref(), &data.test, metric, cfg.eval.mode)?;
                let steps = data.test.iter().map(Vec::len).sum::<usize>() as f64 / data.test.len() as f64;
                summary.put("test_mean", format!("{v:e}"));
                summary.put("test_mean_per_step", format!("{:e}", v / steps));
            }
        }
        Experiment::Eval => {
            let learner = match &cfg.eval.checkpoint {
                Some(p) => learner_from_checkpoint(&load_checkpoint(p)?)?,
                None => train_model(cfg, dir, &mut summary)?.0,
            };
            let data = build_dataset(data_spec(cfg)?, cfg.seed)?;
            if data.test.is_empty() {
                return Err(Error::Empty("evaluation set"));
            }
            if learner.input_dim() != data.dim {
                return Err(Error::shape("eval data width", learner.input_dim(), data.dim));
            }
            let metric = metric_for(cfg, None, data.likelihood);
            let oc = OnlineConfig {
                record: RecordLevel::Sequence,
                mode: cfg.eval.mode,
                batch: 1,
                epochs: 1,
                ..online_config(cfg, metric)
            };
            let mut probe = learner.fork();
            let log = run_online_training(probe.as_mut(), &data.test, &oc)?;
            write(dir, "metrics.csv", log.to_csv(cfg.output.timing))?;
            summary.put("learner", learner.name());
            summary.put("metric", metric.name());
            summary.put("test_mean", format!("{:e}", log.mean(metric.name()).unwrap_or(f64::NAN)));
        }
        Experiment::Zeroshot => {
            let z = cfg
                .zeroshot
                .as_ref()
                .ok_or_else(|| Error::Config("zeroshot needs a `zeroshot` section".into()))?;
            let trained = match &z.checkpoint {
                Some(p) => PtncnLearner::from_checkpoint(&load_checkpoint(p)?)?,
                None => {
                    let (l, _) = train_model(cfg, dir, &mut summary)?;
                    PtncnLearner::from_checkpoint(&l.checkpoint()?)?
                }
            };
            let unseen = build_dataset(&z.data, mix_seed(cfg.seed, 0x2e50))?;
            if unseen.test.is_empty() {
                return Err(Error::Empty("zero-shot evaluation set"));
            }
            let metric = metric_for(cfg, z.metric, unseen.likelihood);
            let on = run_zero_shot(&trained.model, &trained.hp, &unseen.test, true, metric)?;
            let off = run_zero_shot(&trained.model, &trained.hp, &unseen.test, false, metric)?;
            summary.put("zeroshot_metric", metric.name());
            summary.put("correction_on", format!("{on:e}"));
            summary.put("correction_off", format!("{off:e}"));
        }
        Experiment::Continual => {
            let c = cfg
                .continual
                .as_ref()
                .ok_or_else(|| Error::Config("continual needs a `continual` section".into()))?;
            let mut tasks = Vec::with_capacity(c.tasks.len());
            let mut shape = None;
            for (i, t) in c.tasks.iter().enumerate() {
                let d = build_dataset(&t.data, mix_seed(cfg.seed, 0xc0_0000 + i as u64))?;
                if *shape.get_or_insert((d.dim, d.likelihood)) != (d.dim, d.likelihood) {
                    return Err(Error::Config(format!(
                        "section `continual`: task `{}` has a different observation shape",
                        t.name
                    )));
                }
                if d.test.is_empty() {
                    return Err(Error::Empty("continual validation split"));
                }
                tasks.push(ContinualTask {
                    name: t.name.clone(),
                    train: d.train,
                    valid: d.test,
                    train_online: t.train_online,
                    frozen: t.frozen,
                });
            }
            let (dim, likelihood) = shape.expect("at least one task");
            let metric = metric_for(cfg, None, likelihood);
            let factory = || build_learner(cfg, dim, likelihood);
            let m = run_continual(&factory, &tasks, &online_config(cfg, metric), c.eval_mode)?;
            write(dir, "task_matrix.csv", m.to_csv())?;
            summary.put("metric", metric.name());
            for (j, name) in m.names.iter().enumerate() {
                if let Some(f) = m.forgetting(j) {
                    summary.put(&format!("forgetting_{name}"), format!("{f:e}"));
                }
            }
        }
        Experiment::Bench => {
            let r = benchmark_scaling(&cfg.bench, cfg.seed)?;
            write(dir, "scaling.csv", r.to_csv())?;
            for (name, s) in &r.slopes {
                summary.put(&format!("slope_{name}"), format!("{s:.4}"));
            }
        }
        Experiment::Gendata => {
            let spec = data_spec(cfg)?;
            let data = build_dataset(spec, cfg.seed)?;
            match spec {
                DataSpec::Cosine(_) => {
                    let mut s = String::from("step,value\n");
                    for (k, x) in data.train[0].iter().enumerate() {
                        let _ = writeln!(s, "{},{:e}", k + 1, x.get(0, 0));
                    }
                    write(dir, "cosine.csv", s)?;
                }
                DataSpec::Bouncing(b) => {
                    for (name, split) in [("train.idx", &data.train), ("test.idx", &data.test)] {
                        if split.is_empty() {
                            continue;
                        }
                        let frames: Vec<Sprite> = split
                            .iter()
                            .flatten()
                            .map(|f| Sprite {
                                rows: b.frame_size,
                                cols: b.frame_size,
                                pixels: f.as_slice().to_vec(),
                            })
                            .collect();
                        write(dir, name, encode_idx_sprites(&frames)?)?;
                    }
                }
                DataSpec::Text(_) => {
                    return Err(Error::Config(
                        "section `data`: gendata supports cosine and bouncing data".into(),
                    ))
                }
            }
            summary.put("train_sequences", data.train.len());
            summary.put("test_sequences", data.test.len());
        }
    }
    write(dir, "summary.txt", summary.render())?;
    Ok(summary)
}

/// Process exit status for an error: 1 for usage or configuration
/// problems, 2 for failures while running.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::{parse_config_str, Overrides};

    fn run(text: &str, dir: &Path) -> Result<Summary> {
        let ov = Overrides {
            out: Some(dir.to_path_buf()),
            no_timing: true,
            ..Overrides::default()
        };
        dispatch(&parse_config_str(text, &ov)?)
    }

    #[test]
    fn train_writes_artifacts() {
        let tmp = tempfile::tempdir().unwrap();
        let s = run(
            r#"{"experiment": "train", "data": {"kind": "cosine", "steps": 300}}"#,
            tmp.path(),
        )
        .unwrap();
        assert_eq!(s.get("records"), Some("300"));
        let csv = std::fs::read_to_string(tmp.path().join("metrics.csv")).unwrap();
        assert_eq!(csv.lines().count(), 301);
        assert!(tmp.path().join("checkpoint.ptnc").is_file());
        assert!(tmp.path().join("summary.txt").is_file());
        let eff = std::fs::read_to_string(tmp.path().join("effective_config.json")).unwrap();
        let again = parse_config_str(&eff, &Overrides::default()).unwrap();
        assert_eq!(again.to_json(), eff);
    }

    #[test]
    fn eval_from_checkpoint_matches_training_run() {
        let tmp = tempfile::tempdir().unwrap();
        let train = r#"{"experiment": "train", "model": {"kind": "esn", "reservoir": 16},
            "data": {"kind": "bouncing", "frame_size": 12, "seq_len": 4, "num_objects": 1,
                     "train_count": 6, "test_count": 3}}"#;
        let s = run(train, &tmp.path().join("a")).unwrap();
        let ckpt = tmp.path().join("a/checkpoint.ptnc");
        let eval = format!(
            r#"{{"experiment": "eval", "eval": {{"checkpoint": {:?}}},
            "data": {{"kind": "bouncing", "frame_size": 12, "seq_len": 4, "num_objects": 1,
                     "train_count": 6, "test_count": 3}}}}"#,
            ckpt
        );
        let e = run(&eval, &tmp.path().join("b")).unwrap();
        let a: f64 = s.get("test_mean").unwrap().parse().unwrap();
        let b: f64 = e.get("test_mean").unwrap().parse().unwrap();
        assert!((a - b).abs() <= 1e-4 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn zeroshot_and_continual_and_gendata() {
        let tmp = tempfile::tempdir().unwrap();
        let bounce = |set: &str| {
            format!(
                r#"{{"kind": "bouncing", "sprites": "{set}", "frame_size": 12, "seq_len": 4,
                    "num_objects": 1, "train_count": 4, "test_count": 2}}"#
            )
        };
        let z = format!(
            r#"{{"experiment": "zeroshot", "model": {{"kind": "ptncn", "layer_dims": [8]}},
                "data": {d}, "zeroshot": {{"data": {l}, "metric": "squared_error"}}}}"#,
            d = bounce("digits"),
            l = bounce("letters")
        );
        let s = run(&z, &tmp.path().join("z")).unwrap();
        assert!(s.get("correction_on").is_some() && s.get("correction_off").is_some());

        let c = format!(
            r#"{{"experiment": "continual", "model": {{"kind": "ptncn", "layer_dims": [8]}},
                "continual": {{"tasks": [{{"name": "T1", "data": {a}}}, {{"name": "T2", "data": {b}}}]}}}}"#,
            a = bounce("digits"),
            b = bounce("clothing")
        );
        run(&c, &tmp.path().join("c")).unwrap();
        let m = std::fs::read_to_string(tmp.path().join("c/task_matrix.csv")).unwrap();
        assert_eq!(m.lines().count(), 3);

        let g = format!(r#"{{"experiment": "gendata", "data": {}}}"#, bounce("digits"));
        run(&g, &tmp.path().join("g")).unwrap();
        let frames = crate::datagen::load_idx_sprites(tmp.path().join("g/train.idx")).unwrap();
        assert_eq!(frames.len(), 16);
    }

    #[test]
    fn text_corpus_trains_with_bpc() {
        let tmp = tempfile::tempdir().unwrap();
        let corpus = tmp.path().join("corpus.txt");
        std::fs::write(&corpus, "abcabcabcabcabcabcabcabcabcabc").unwrap();
        let t = format!(
            r#"{{"experiment": "train", "model": {{"kind": "rnn", "algorithm": "tbptt", "hidden": 6, "window": 3}},
                "data": {{"kind": "text", "path": {corpus:?}, "seq_len": 10, "valid_fraction": 0.34}}}}"#
        );
        let s = run(&t, &tmp.path().join("out")).unwrap();
        assert_eq!(s.get("metric"), Some("bpc"));
        assert!(s.get("test_mean").is_some());
    }

    #[test]
    fn identical_runs_give_identical_csv() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = r#"{"experiment": "train", "seed": 3, "data": {"kind": "cosine", "steps": 200}}"#;
        run(cfg, &tmp.path().join("a")).unwrap();
        run(cfg, &tmp.path().join("b")).unwrap();
        let a = std::fs::read(tmp.path().join("a/metrics.csv")).unwrap();
        let b = std::fs::read(tmp.path().join("b/metrics.csv")).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn error_classes() {
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
        assert_eq!(exit_code(&Error::Numerical("x".into())), 2);
    }
}
