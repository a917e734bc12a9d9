//! A common streaming interface over every learner.
//!
//! A learner sees one sequence at a time (or a batch of equally long
//! sequences as matrix columns). At each step it first [`predict`]s the next
//! observation from what it has seen so far and then [`observe`]s the true
//! one. The harness scores the prediction before calling `observe`, so the
//! prediction of `x_t` never depends on `x_t`.
//!
//! [`predict`]: Learner::predict
//! [`observe`]: Learner::observe

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::checkpoint::Checkpoint;
use crate::baselines::{
    bptt_gradients, elman_step, esn_step, esn_train_output, rtrl_advance, rtrl_gradient,
    uoro_advance, uoro_gradient, ElmanConfig, ElmanModel, EsnConfig, EsnModel, Optimizer,
    OptimizerState, RtrlCarry, UoroCarry, ELMAN_PARAM_NAMES,
};
use crate::datagen::cosine_clean;
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};
use crate::ptncn::{
    apply_updates, build_model, compute_updates, correct_step, correct_step_parallel,
    predict_step, predict_step_parallel, reset_state, skip_correction, Hyperparams,
    PtncnConfig, PtncnModel, StepTrace,
};

/// What a learner may do with an observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObserveMode {
    /// Update states and weights.
    Learn,
    /// Run state inference (including P-TNCN error correction) but keep
    /// weights fixed.
    Adapt,
    /// Keep weights fixed and skip error correction.
    Frozen,
}

pub trait Learner: Send + Sync {
    fn name(&self) -> &'static str;

    fn input_dim(&self) -> usize;

    /// Resets the per-sequence state for `batch` parallel sequences.
    fn begin_sequence(&mut self, batch: usize);

    /// Prediction of the next observation, one column per sequence.
    fn predict(&mut self) -> Result<Matrix>;

    fn observe(&mut self, x: &Matrix, mode: ObserveMode) -> Result<()>;

    /// Called after the last observation of a sequence.
    fn end_sequence(&mut self, _mode: ObserveMode) -> Result<()> {
        Ok(())
    }

    fn fork(&self) -> Box<dyn Learner>;

    fn checkpoint(&self) -> Result<Checkpoint>;
}

fn columns(x: &Matrix) -> impl Iterator<Item = Matrix> + '_ {
    (0..x.cols()).map(move |c| x.columns(c, 1))
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("config types serialize")
}


fn from_json<T: for<'de> Deserialize<'de>>(v: &Value, what: &str) -> Result<T> {
    serde_json::from_value(v.clone()).map_err(|e| Error::Checkpoint(format!("bad {what}: {e}")))
}

#[derive(Clone, Debug)]
pub struct PtncnLearner {
    pub model: PtncnModel,
    pub hp: Hyperparams,
    /// Evaluate layers on the rayon pool.
    pub parallel: bool,
    prev: StepTrace,
    x_prev: Matrix,
    pending: Option<StepTrace>,
}

impl PtncnLearner {
    pub fn new(model: PtncnModel, hp: Hyperparams) -> Self {
        let prev = reset_state(&model.cfg, 1);
        let x_prev = Matrix::zeros(model.cfg.input_dim, 1);
        Self {
            model,
            hp,
            parallel: false,
            prev,
            x_prev,
            pending: None,
        }
    }

    pub fn build(cfg: &PtncnConfig, hp: Hyperparams, variance: f64, rng: &mut Rng) -> Result<Self> {
        hp.validate()?;
        Ok(Self::new(build_model(cfg, variance, rng)?, hp))
    }

    /// Corrected trace of the last observed step.
    pub fn last_trace(&self) -> &StepTrace {
        &self.prev
    }

    fn ensure_prediction(&mut self) -> Result<()> {
        if self.pending.is_none() {
            let t = if self.parallel {
                predict_step_parallel(&self.model, &self.prev, &self.x_prev)?
            } else {
                predict_step(&self.model, &self.prev, &self.x_prev)?
            };
            self.pending = Some(t);
        }
        Ok(())
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind("ptncn")?;
        let cfg: PtncnConfig = from_json(&ckpt.config, "ptncn config")?;
        let hp: Hyperparams = from_json(&ckpt.hyperparams, "hyperparams")?;
        let mut model = build_model(&cfg, 0.0, &mut Rng::new(0))?;
        let expected = model.named_matrices().len();
        if ckpt.matrices.len() != expected {
            return Err(Error::Checkpoint(format!(
                "expected {expected} matrices, found {}",
                ckpt.matrices.len()
            )));
        }
        for (name, m) in model.named_matrices_mut() {
            ckpt.fill(&name, m)?;
        }
        Ok(Self::new(model, hp))
    }
}

impl Learner for PtncnLearner {
    fn name(&self) -> &'static str {
        "ptncn"
    }

    fn input_dim(&self) -> usize {
        self.model.cfg.input_dim
    }

    fn begin_sequence(&mut self, batch: usize) {
        self.prev = reset_state(&self.model.cfg, batch);
        self.x_prev = Matrix::zeros(self.model.cfg.input_dim, batch);
        self.pending = None;
    }

    fn predict(&mut self) -> Result<Matrix> {
        self.ensure_prediction()?;
        Ok(self.pending.as_ref().expect("just computed").prediction().clone())
    }

    fn observe(&mut self, x: &Matrix, mode: ObserveMode) -> Result<()> {
        self.ensure_prediction()?;
        let trace = self.pending.take().expect("just computed");
        let corrected = match (mode, self.parallel) {
            (ObserveMode::Frozen, _) => skip_correction(&self.model, trace, x)?,
            (_, true) => correct_step_parallel(&self.model, trace, x, &self.hp)?,
            (_, false) => correct_step(&self.model, trace, x, &self.hp)?,
        };
        if mode == ObserveMode::Learn {
            let up = compute_updates(&self.model, &corrected, &self.prev, &self.x_prev, &self.hp)?;
            apply_updates(&mut self.model, &up, &self.hp)?;
        }
        self.prev = corrected;
        self.x_prev = x.clone();
        Ok(())
    }

    fn fork(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint {
            model_kind: "ptncn".into(),
            config: to_json(&self.model.cfg),
            hyperparams: to_json(&self.hp),
            rng: None,
            matrices: self
                .model
                .named_matrices()
                .into_iter()
                .map(|(n, m)| (n, m.clone()))
                .collect(),
        })
    }
}

/// How an Elman learner obtains its gradients.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RnnAlgorithm {
    /// Full BPTT, one update per sequence.
    Bptt,
    /// BPTT over consecutive windows of `window` steps, one update each.
    Tbptt,
    /// Exact forward-mode gradients, one update per step.
    Rtrl,
    /// Rank-one RTRL estimate, one update per step.
    Uoro,
}

impl RnnAlgorithm {
    fn name(self) -> &'static str {
        match self {
            RnnAlgorithm::Bptt => "bptt",
            RnnAlgorithm::Tbptt => "tbptt",
            RnnAlgorithm::Rtrl => "rtrl",
            RnnAlgorithm::Uoro => "uoro",
        }
    }
}

#[derive(Clone, Debug)]
enum RnnState {
    Rtrl(Vec<RtrlCarry>),
    Uoro(Vec<UoroCarry>),
    Buffer {
        z: Matrix,
        start: Matrix,
        inputs: Vec<Matrix>,
        targets: Vec<Matrix>,
    },
}

#[derive(Clone, Debug)]
pub struct RnnLearner {
    pub model: ElmanModel,
    pub algorithm: RnnAlgorithm,
    /// Truncation window for [`RnnAlgorithm::Tbptt`].
    pub window: usize,
    opt: OptimizerState,
    rng: Rng,
    state: RnnState,
}

impl RnnLearner {
    pub fn new(model: ElmanModel, algorithm: RnnAlgorithm, window: usize, optimizer: Optimizer, rng: Rng) -> Result<Self> {
        if algorithm == RnnAlgorithm::Tbptt && window < 1 {
            return Err(Error::Config("truncation window must be at least 1".into()));
        }
        let mut l = Self {
            model,
            algorithm,
            window,
            opt: OptimizerState::new(optimizer),
            rng,
            state: RnnState::Rtrl(Vec::new()),
        };
        l.begin_sequence(1);
        Ok(l)
    }

    pub fn build(
        cfg: &ElmanConfig,
        algorithm: RnnAlgorithm,
        window: usize,
        optimizer: Optimizer,
        variance: f64,
        rng: &mut Rng,
    ) -> Result<Self> {
        let model = ElmanModel::new(cfg, variance, rng)?;
        let own = rng.derive(0x5eed);
        Self::new(model, algorithm, window, optimizer, own)
    }

    fn flush(&mut self) -> Result<()> {
        let RnnState::Buffer {
            start,
            inputs,
            targets,
            ..
        } = &mut self.state
        else {
            return Ok(());
        };
        let n = targets.len();
        if n > 0 {
            let batch = start.cols() as f64;
            let mut g = bptt_gradients(&self.model, start, &inputs[..n], targets)?;
            g.scale(1.0 / batch);
            self.opt.apply_elman(&mut self.model, &g);
        }
        inputs.clear();
        targets.clear();
        Ok(())
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind("rnn")?;
        let cfg: ElmanConfig = from_json(&ckpt.config["elman"], "rnn config")?;
        let algorithm: RnnAlgorithm = from_json(&ckpt.config["algorithm"], "rnn algorithm")?;
        let window: usize = from_json(&ckpt.config["window"], "rnn window")?;
        let optimizer: Optimizer = from_json(&ckpt.hyperparams, "optimizer")?;
        let mut model = ElmanModel::new(&cfg, 0.0, &mut Rng::new(0))?;
        for (name, m) in ELMAN_PARAM_NAMES.iter().zip(model.params_mut()) {
            ckpt.fill(name, m)?;
        }
        let rng = ckpt.rng.clone().map(Rng::from_state).unwrap_or_else(|| Rng::new(0));
        Self::new(model, algorithm, window, optimizer, rng)
    }
}

impl Learner for RnnLearner {
    fn name(&self) -> &'static str {
        self.algorithm.name()
    }

    fn input_dim(&self) -> usize {
        self.model.cfg.input_dim
    }

    fn begin_sequence(&mut self, batch: usize) {
        self.state = match self.algorithm {
            RnnAlgorithm::Rtrl => RnnState::Rtrl(vec![RtrlCarry::new(&self.model); batch]),
            RnnAlgorithm::Uoro => RnnState::Uoro(vec![UoroCarry::new(&self.model); batch]),
            RnnAlgorithm::Bptt | RnnAlgorithm::Tbptt => {
                let z = Matrix::zeros(self.model.hidden(), batch);
                RnnState::Buffer {
                    start: z.clone(),
                    z,
                    inputs: Vec::new(),
                    targets: Vec::new(),
                }
            }
        };
    }

    fn predict(&mut self) -> Result<Matrix> {
        Ok(match &self.state {
            RnnState::Rtrl(c) => {
                let cols: Vec<Matrix> = c.iter().map(|c| self.model.output(&c.z)).collect();
                Matrix::hcat(&cols.iter().collect::<Vec<_>>())
            }
            RnnState::Uoro(c) => {
                let cols: Vec<Matrix> = c.iter().map(|c| self.model.output(&c.z)).collect();
                Matrix::hcat(&cols.iter().collect::<Vec<_>>())
            }
            RnnState::Buffer { z, .. } => self.model.output(z),
        })
    }

    fn observe(&mut self, x: &Matrix, mode: ObserveMode) -> Result<()> {
        let learn = mode == ObserveMode::Learn;
        match &mut self.state {
            RnnState::Rtrl(carries) => {
                if x.cols() != carries.len() {
                    return Err(Error::shape("rnn observe batch", carries.len(), x.cols()));
                }
                if learn {
                    let mut g = self.model.zero_grads();
                    for (carry, col) in carries.iter().zip(columns(x)) {
                        g.add(&rtrl_gradient(&self.model, carry, &col)?.0);
                    }
                    g.scale(1.0 / carries.len() as f64);
                    self.opt.apply_elman(&mut self.model, &g);
                }
                for (carry, col) in carries.iter_mut().zip(columns(x)) {
                    rtrl_advance(&self.model, carry, &col)?;
                }
            }
            RnnState::Uoro(carries) => {
                if x.cols() != carries.len() {
                    return Err(Error::shape("rnn observe batch", carries.len(), x.cols()));
                }
                if learn {
                    let mut g = self.model.zero_grads();
                    for (carry, col) in carries.iter().zip(columns(x)) {
                        g.add(&uoro_gradient(&self.model, carry, &col)?.0);
                    }
                    g.scale(1.0 / carries.len() as f64);
                    self.opt.apply_elman(&mut self.model, &g);
                }
                for (carry, col) in carries.iter_mut().zip(columns(x)) {
                    uoro_advance(&self.model, carry, &col, &mut self.rng)?;
                }
            }
            RnnState::Buffer { inputs, targets, .. } => {
                if learn && !inputs.is_empty() {
                    targets.push(x.clone());
                    let window = match self.algorithm {
                        RnnAlgorithm::Tbptt => self.window,
                        _ => usize::MAX,
                    };
                    if targets.len() >= window {
                        self.flush()?;
                    }
                }
                let RnnState::Buffer {
                    z, start, inputs, ..
                } = &mut self.state
                else {
                    unreachable!()
                };
                if learn {
                    if inputs.is_empty() {
                        *start = z.clone();
                    }
                    inputs.push(x.clone());
                }
                *z = elman_step(&self.model, z, x)?.0;
            }
        }
        Ok(())
    }

    fn end_sequence(&mut self, mode: ObserveMode) -> Result<()> {
        if let RnnState::Buffer { inputs, targets, .. } = &mut self.state {
            inputs.truncate(targets.len());
            if mode == ObserveMode::Learn {
                self.flush()?;
            } else {
                inputs.clear();
                targets.clear();
            }
        }
        Ok(())
    }

    fn fork(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint {
            model_kind: "rnn".into(),
            config: json!({
                "elman": to_json(&self.model.cfg),
                "algorithm": to_json(&self.algorithm),
                "window": self.window,
            }),
            hyperparams: to_json(&self.opt.rule),
            rng: Some(self.rng.state()),
            matrices: ELMAN_PARAM_NAMES
                .iter()
                .zip(self.model.params())
                .map(|(n, m)| (n.to_string(), m.clone()))
                .collect(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct EsnLearner {
    pub model: EsnModel,
    /// Readout step size.
    pub lr: f64,
}

impl EsnLearner {
    pub fn build(cfg: &EsnConfig, lr: f64, rng: &mut Rng) -> Result<Self> {
        Ok(Self {
            model: EsnModel::new(cfg, rng)?,
            lr,
        })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        ckpt.expect_kind("esn")?;
        let cfg: EsnConfig = from_json(&ckpt.config, "esn config")?;
        let lr: f64 = from_json(&ckpt.hyperparams["lr"], "esn lr")?;
        cfg.validate()?;
        let n = cfg.reservoir;
        let mut model = EsnModel {
            w_x: Matrix::zeros(n, cfg.input_dim + 1),
            w_r: Matrix::zeros(n, n),
            w_y: Matrix::zeros(cfg.output_dim, n + 1),
            state: Matrix::zeros(n, 1),
            cfg,
        };
        ckpt.fill("w_x", &mut model.w_x)?;
        ckpt.fill("w_r", &mut model.w_r)?;
        ckpt.fill("w_y", &mut model.w_y)?;
        Ok(Self { model, lr })
    }
}

impl Learner for EsnLearner {
    fn name(&self) -> &'static str {
        "esn"
    }

    fn input_dim(&self) -> usize {
        self.model.cfg.input_dim
    }

    fn begin_sequence(&mut self, batch: usize) {
        self.model.reset_state(batch);
    }

    fn predict(&mut self) -> Result<Matrix> {
        Ok(self.model.readout(&self.model.state))
    }

    fn observe(&mut self, x: &Matrix, mode: ObserveMode) -> Result<()> {
        if mode == ObserveMode::Learn {
            let z = self.model.state.clone();
            esn_train_output(&mut self.model, &z, x, self.lr)?;
        }
        esn_step(&mut self.model, x)?;
        Ok(())
    }

    fn fork(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn checkpoint(&self) -> Result<Checkpoint> {
        Ok(Checkpoint {
            model_kind: "esn".into(),
            config: to_json(&self.model.cfg),
            hyperparams: json!({ "lr": self.lr }),
            rng: None,
            matrices: vec![
                ("w_x".into(), self.model.w_x.clone()),
                ("w_r".into(), self.model.w_r.clone()),
                ("w_y".into(), self.model.w_y.clone()),
            ],
        })
    }
}

/// Predicts the noise-free cosine `cos(k·dt)` for the `k`-th observation.
#[derive(Clone, Debug)]
pub struct CosineOracle {
    pub dt: f64,
    k: usize,
    batch: usize,
}

impl CosineOracle {
    pub fn new(dt: f64) -> Self {
        Self { dt, k: 0, batch: 1 }
    }
}

impl Learner for CosineOracle {
    fn name(&self) -> &'static str {
        "cosine_oracle"
    }

    fn input_dim(&self) -> usize {
        1
    }

    fn begin_sequence(&mut self, batch: usize) {
        self.k = 0;
        self.batch = batch;
    }

    fn predict(&mut self) -> Result<Matrix> {
        Ok(Matrix::filled(1, self.batch, cosine_clean(self.k, self.dt)))
    }

    fn observe(&mut self, _x: &Matrix, _mode: ObserveMode) -> Result<()> {
        self.k += 1;
        Ok(())
    }

    fn fork(&self) -> Box<dyn Learner> {
        Box::new(self.clone())
    }

    fn checkpoint(&self) -> Result<Checkpoint> {
        Err(Error::Checkpoint("the cosine oracle has no parameters to save".into()))
    }
}

/// Rebuilds a learner from any supported checkpoint.
pub fn learner_from_checkpoint(ckpt: &Checkpoint) -> Result<Box<dyn Learner>> {
    match ckpt.model_kind.as_str() {
        "ptncn" => Ok(Box::new(PtncnLearner::from_checkpoint(ckpt)?)),
        "rnn" => Ok(Box::new(RnnLearner::from_checkpoint(ckpt)?)),
        "esn" => Ok(Box::new(EsnLearner::from_checkpoint(ckpt)?)),
        other => Err(Error::Checkpoint(format!("unknown model kind `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{bptt::final_state, sequence_loss};
    use crate::numerics::{gaussian_init, ActivationKind};
    use crate::ptncn::OutputLikelihood;

    fn stream(n: usize, k: usize, seed: u64) -> Vec<Matrix> {
        let mut rng = Rng::new(seed);
        (0..n).map(|_| gaussian_init(k, 1, 1.0, &mut rng)).collect()
    }

    fn ptncn() -> PtncnLearner {
        let cfg = PtncnConfig::new(2, &[5, 4], ActivationKind::Tanh, ActivationKind::Identity, OutputLikelihood::Gaussian);
        PtncnLearner::build(&cfg, Hyperparams::default(), 0.025, &mut Rng::new(1)).unwrap()
    }

    #[test]
    fn prediction_is_idempotent_until_observe() {
        let mut l = ptncn();
        l.begin_sequence(1);
        let x = stream(3, 2, 0);
        l.observe(&x[0], ObserveMode::Learn).unwrap();
        let a = l.predict().unwrap();
        let b = l.predict().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_learning_modes_keep_weights() {
        for mode in [ObserveMode::Adapt, ObserveMode::Frozen] {
            let mut l = ptncn();
            let before = l.model.clone();
            l.begin_sequence(1);
            for x in stream(20, 2, 3) {
                l.predict().unwrap();
                l.observe(&x, mode).unwrap();
            }
            assert_eq!(l.model, before);
        }
    }

    #[test]
    fn frozen_differs_from_adapt() {
        let xs = stream(10, 2, 4);
        let run = |mode| {
            let mut l = ptncn();
            l.begin_sequence(1);
            xs.iter()
                .map(|x| {
                    let p = l.predict().unwrap();
                    l.observe(x, mode).unwrap();
                    p
                })
                .collect::<Vec<_>>()
        };
        assert_ne!(run(ObserveMode::Adapt), run(ObserveMode::Frozen));
        assert_eq!(run(ObserveMode::Frozen), run(ObserveMode::Frozen));
    }

    fn rnn(alg: RnnAlgorithm) -> RnnLearner {
        let cfg = ElmanConfig::new(2, 4, 2, OutputLikelihood::Gaussian);
        RnnLearner::build(&cfg, alg, 3, Optimizer::Sgd { lr: 0.05 }, 0.3, &mut Rng::new(7)).unwrap()
    }

    #[test]
    fn bptt_learner_takes_one_exact_step_per_sequence() {
        let xs = stream(6, 2, 8);
        let mut l = rnn(RnnAlgorithm::Bptt);
        let m0 = l.model.clone();
        l.begin_sequence(1);
        for x in &xs {
            l.predict().unwrap();
            l.observe(x, ObserveMode::Learn).unwrap();
        }
        l.end_sequence(ObserveMode::Learn).unwrap();
        let z0 = Matrix::zeros(4, 1);
        let g = bptt_gradients(&m0, &z0, &xs[..5], &xs[1..]).unwrap();
        let mut expect = m0.clone();
        OptimizerState::new(Optimizer::Sgd { lr: 0.05 }).apply_elman(&mut expect, &g);
        assert!(l.model.params().iter().zip(expect.params()).all(|(a, b)| a.sub(b).max_abs() < 1e-15));
        assert!(sequence_loss(&m0, &z0, &xs[..5], &xs[1..]).unwrap().is_finite());
    }

    #[test]
    fn tbptt_learner_updates_every_window() {
        let xs = stream(7, 2, 9);
        let mut l = rnn(RnnAlgorithm::Tbptt);
        let m0 = l.model.clone();
        l.begin_sequence(1);
        for x in &xs[..4] {
            l.predict().unwrap();
            l.observe(x, ObserveMode::Learn).unwrap();
        }
        // three targets seen: exactly one window update on x1..x3 -> x2..x4
        let g = bptt_gradients(&m0, &Matrix::zeros(4, 1), &xs[..3], &xs[1..4]).unwrap();
        let mut expect = m0.clone();
        OptimizerState::new(Optimizer::Sgd { lr: 0.05 }).apply_elman(&mut expect, &g);
        assert_eq!(l.model, expect);
        // the state kept running with the weights in force at each step
        let z = final_state(&m0, &Matrix::zeros(4, 1), &xs[..3]).unwrap();
        let z = elman_step(&expect, &z, &xs[3]).unwrap().0;
        assert_eq!(l.predict().unwrap(), expect.output(&z));
    }

    #[test]
    fn rtrl_and_uoro_learn_online() {
        for alg in [RnnAlgorithm::Rtrl, RnnAlgorithm::Uoro] {
            let mut l = rnn(alg);
            let m0 = l.model.clone();
            l.begin_sequence(2);
            for x in stream(5, 2, 10).chunks(2).filter(|c| c.len() == 2) {
                let x = Matrix::hcat(&[&x[0], &x[1]]);
                assert_eq!(l.predict().unwrap().shape(), (2, 2));
                l.observe(&x, ObserveMode::Learn).unwrap();
            }
            assert_ne!(l.model, m0, "{alg:?}");
        }
    }

    #[test]
    fn esn_learner_only_moves_readout() {
        let cfg = EsnConfig::new(2, 10, 2, OutputLikelihood::Gaussian);
        let mut l = EsnLearner::build(&cfg, 0.1, &mut Rng::new(2)).unwrap();
        let (wx, wr) = (l.model.w_x.clone(), l.model.w_r.clone());
        l.begin_sequence(1);
        for x in stream(10, 2, 5) {
            l.predict().unwrap();
            l.observe(&x, ObserveMode::Learn).unwrap();
        }
        assert_eq!((l.model.w_x.clone(), l.model.w_r.clone()), (wx, wr));
        assert!(l.model.w_y.max_abs() > 0.0);
    }

    #[test]
    fn checkpoints_rebuild_every_learner() {
        let learners: Vec<Box<dyn Learner>> = vec![
            Box::new(ptncn()),
            Box::new(rnn(RnnAlgorithm::Uoro)),
            Box::new(EsnLearner::build(&EsnConfig::new(2, 6, 2, OutputLikelihood::Gaussian), 0.1, &mut Rng::new(2)).unwrap()),
        ];
        for l in learners {
            let c = l.checkpoint().unwrap();
            let bytes = c.encode().unwrap();
            let back = learner_from_checkpoint(&Checkpoint::decode(&bytes).unwrap()).unwrap();
            assert_eq!(back.name(), l.name());
            assert_eq!(back.checkpoint().unwrap().encode().unwrap(), bytes);
        }
        assert!(CosineOracle::new(0.05).checkpoint().is_err());
    }

    #[test]
    fn cosine_oracle_tracks_time() {
        let mut o = CosineOracle::new(0.5);
        o.begin_sequence(1);
        assert_eq!(o.predict().unwrap().get(0, 0), 1.0);
        o.observe(&Matrix::zeros(1, 1), ObserveMode::Learn).unwrap();
        assert_eq!(o.predict().unwrap().get(0, 0), 0.5f64.cos());
    }
}
