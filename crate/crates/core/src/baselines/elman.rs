use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{clip_update_norm, gaussian_init, ActivationKind, Matrix, Rng};
use crate::ptncn::OutputLikelihood;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElmanConfig {
    pub input_dim: usize,
    pub hidden: usize,
    pub output_dim: usize,
    pub state_activation: ActivationKind,
    pub output_activation: ActivationKind,
    pub likelihood: OutputLikelihood,
}

impl ElmanConfig {
    pub fn new(input_dim: usize, hidden: usize, output_dim: usize, likelihood: OutputLikelihood) -> Self {
        let output_activation = match likelihood {
            OutputLikelihood::Gaussian => ActivationKind::Identity,
            OutputLikelihood::Bernoulli => ActivationKind::Sigmoid,
            OutputLikelihood::Categorical => ActivationKind::Softmax,
        };
        Self {
            input_dim,
            hidden,
            output_dim,
            state_activation: ActivationKind::Tanh,
            output_activation,
            likelihood,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden == 0 || self.output_dim == 0 {
            return Err(Error::Config("elman dimensions must be at least 1".into()));
        }
        if !self.state_activation.is_differentiable() {
            return Err(Error::Config(format!(
                "gradient-based learners need a differentiable state activation, got {:?}",
                self.state_activation
            )));
        }
        let paired = matches!(
            (self.likelihood, self.output_activation),
            (OutputLikelihood::Gaussian, ActivationKind::Identity)
                | (OutputLikelihood::Bernoulli, ActivationKind::Sigmoid)
                | (OutputLikelihood::Categorical, ActivationKind::Softmax)
        );
        if !paired {
            return Err(Error::Config(format!(
                "{:?} likelihood cannot use a {:?} output head",
                self.likelihood, self.output_activation
            )));
        }
        Ok(())
    }
}

/// `z_t = φ(W_rec·z_{t−1} + W_in·x_t + b)`, `y_t = ψ(W_out·z_t + c)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmanModel {
    pub cfg: ElmanConfig,
    pub w_in: Matrix,
    pub w_rec: Matrix,
    pub b: Matrix,
    pub w_out: Matrix,
    pub c: Matrix,
}

/// Gradients (or update directions) shaped like [`ElmanModel`]'s parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmanGrads {
    pub w_in: Matrix,
    pub w_rec: Matrix,
    pub b: Matrix,
    pub w_out: Matrix,
    pub c: Matrix,
}

pub const ELMAN_PARAM_NAMES: [&str; 5] = ["w_in", "w_rec", "b", "w_out", "c"];

impl ElmanModel {
    pub fn new(cfg: &ElmanConfig, variance: f64, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg: cfg.clone(),
            w_in: gaussian_init(cfg.hidden, cfg.input_dim, variance, rng),
            w_rec: gaussian_init(cfg.hidden, cfg.hidden, variance, rng),
            b: Matrix::zeros(cfg.hidden, 1),
            w_out: gaussian_init(cfg.output_dim, cfg.hidden, variance, rng),
            c: Matrix::zeros(cfg.output_dim, 1),
        })
    }

    pub fn hidden(&self) -> usize {
        self.cfg.hidden
    }

    pub fn params(&self) -> [&Matrix; 5] {
        [&self.w_in, &self.w_rec, &self.b, &self.w_out, &self.c]
    }

    pub fn params_mut(&mut self) -> [&mut Matrix; 5] {
        [
            &mut self.w_in,
            &mut self.w_rec,
            &mut self.b,
            &mut self.w_out,
            &mut self.c,
        ]
    }

    pub fn zero_grads(&self) -> ElmanGrads {
        let z = |m: &Matrix| Matrix::zeros(m.rows(), m.cols());
        ElmanGrads {
            w_in: z(&self.w_in),
            w_rec: z(&self.w_rec),
            b: z(&self.b),
            w_out: z(&self.w_out),
            c: z(&self.c),
        }
    }

    /// Pre-activation `W_rec·z_prev + W_in·x + b`.
    pub fn pre_activation(&self, z_prev: &Matrix, x: &Matrix) -> Matrix {
        let mut a = self.w_rec.dot(z_prev);
        a.axpy(1.0, &self.w_in.dot(x));
        a.add_column_broadcast(&self.b);
        a
    }

    pub fn output(&self, z: &Matrix) -> Matrix {
        let mut o = self.w_out.dot(z);
        o.add_column_broadcast(&self.c);
        self.cfg.output_activation.apply(&o)
    }

    pub fn check_io(&self, z_prev: &Matrix, x: &Matrix) -> Result<()> {
        z_prev.check_shape("elman state", self.cfg.hidden, z_prev.cols())?;
        x.check_shape("elman input", self.cfg.input_dim, z_prev.cols())
    }
}

/// One forward step of the Elman network.
pub fn elman_step(model: &ElmanModel, z_prev: &Matrix, x: &Matrix) -> Result<(Matrix, Matrix)> {
    model.check_io(z_prev, x)?;
    let z = model
        .cfg
        .state_activation
        .apply(&model.pre_activation(z_prev, x));
    let y = model.output(&z);
    Ok((z, y))
}

/// Negative log-likelihood of `targets` under predictions `y`, summed over
/// all entries (`½‖y − t‖²` for the Gaussian head).
pub fn step_loss(likelihood: OutputLikelihood, y: &Matrix, target: &Matrix) -> f64 {
    const FLOOR: f64 = 1e-12;
    match likelihood {
        OutputLikelihood::Gaussian => 0.5 * y.sub(target).sum_sq(),
        OutputLikelihood::Bernoulli => y
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .map(|(&p, &t)| {
                let p = p.clamp(FLOOR, 1.0 - FLOOR);
                -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
            })
            .sum(),
        OutputLikelihood::Categorical => y
            .as_slice()
            .iter()
            .zip(target.as_slice())
            .filter(|(_, &t)| t != 0.0)
            .map(|(&p, &t)| -t * p.max(FLOOR).ln())
            .sum(),
    }
}

/// Summed loss over a sequence from the initial state `z0`.
pub fn sequence_loss(model: &ElmanModel, z0: &Matrix, inputs: &[Matrix], targets: &[Matrix]) -> Result<f64> {
    let mut z = z0.clone();
    let mut total = 0.0;
    for (x, t) in inputs.iter().zip(targets) {
        let (zn, y) = elman_step(model, &z, x)?;
        total += step_loss(model.cfg.likelihood, &y, t);
        z = zn;
    }
    Ok(total)
}

impl ElmanGrads {
    pub fn tensors(&self) -> [&Matrix; 5] {
        [&self.w_in, &self.w_rec, &self.b, &self.w_out, &self.c]
    }

    pub fn tensors_mut(&mut self) -> [&mut Matrix; 5] {
        [
            &mut self.w_in,
            &mut self.w_rec,
            &mut self.b,
            &mut self.w_out,
            &mut self.c,
        ]
    }

    pub fn add(&mut self, other: &ElmanGrads) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.axpy(1.0, b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        for a in self.tensors_mut() {
            a.scale_inplace(s);
        }
    }

    /// All entries flattened in parameter order.
    pub fn flatten(&self) -> Vec<f64> {
        self.tensors()
            .iter()
            .flat_map(|m| m.as_slice().iter().copied())
            .collect()
    }

    pub fn max_abs_diff(&self, other: &ElmanGrads) -> f64 {
        self.tensors()
            .iter()
            .zip(other.tensors())
            .map(|(a, b)| a.sub(b).max_abs())
            .fold(0.0, f64::max)
    }
}

/// Parameter update rule shared by the gradient-based baselines. Each tensor's
/// gradient is clipped to unit Frobenius norm before the step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Optimizer {
    Sgd { lr: f64 },
    RmsProp { lr: f64, decay: f64, eps: f64 },
}

impl Default for Optimizer {
    fn default() -> Self {
        Optimizer::RmsProp {
            lr: 0.002,
            decay: 0.9,
            eps: 1e-8,
        }
    }
}

/// Optimizer together with its per-parameter state.
#[derive(Clone, Debug)]
pub struct OptimizerState {
    pub rule: Optimizer,
    sq: Option<Vec<Matrix>>,
}

impl OptimizerState {
    pub fn new(rule: Optimizer) -> Self {
        Self { rule, sq: None }
    }

    pub fn step(&mut self, params: Vec<&mut Matrix>, grads: Vec<&Matrix>) {
        assert_eq!(params.len(), grads.len());
        match self.rule {
            Optimizer::Sgd { lr } => {
                for (p, g) in params.into_iter().zip(grads) {
                    p.axpy(-lr, &clip_update_norm(g));
                }
            }
            Optimizer::RmsProp { lr, decay, eps } => {
                let sq = self.sq.get_or_insert_with(|| {
                    grads
                        .iter()
                        .map(|g| Matrix::zeros(g.rows(), g.cols()))
                        .collect()
                });
                for ((p, g), s) in params.into_iter().zip(grads).zip(sq.iter_mut()) {
                    let g = clip_update_norm(g);
                    let pv = p.as_mut_slice();
                    for ((pv, gv), sv) in pv.iter_mut().zip(g.as_slice()).zip(s.as_mut_slice()) {
                        *sv = decay * *sv + (1.0 - decay) * gv * gv;
                        *pv -= lr * gv / (sv.sqrt() + eps);
                    }
                }
            }
        }
    }

    pub fn apply_elman(&mut self, model: &mut ElmanModel, grads: &ElmanGrads) {
        self.step(model.params_mut().into(), grads.tensors().into());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(w_rec: f64, w_in: f64) -> ElmanModel {
        let mut cfg = ElmanConfig::new(1, 1, 1, OutputLikelihood::Gaussian);
        cfg.state_activation = ActivationKind::Identity;
        let mut m = ElmanModel::new(&cfg, 0.0, &mut Rng::new(0)).unwrap();
        m.w_rec = Matrix::column(&[w_rec]);
        m.w_in = Matrix::column(&[w_in]);
        m.w_out = Matrix::column(&[1.0]);
        m
    }

    #[test]
    fn zero_model_stays_at_zero() {
        let cfg = ElmanConfig::new(3, 4, 3, OutputLikelihood::Gaussian);
        let m = ElmanModel::new(&cfg, 0.0, &mut Rng::new(0)).unwrap();
        let (z, y) = elman_step(&m, &Matrix::zeros(4, 1), &Matrix::column(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert_eq!(y.max_abs(), 0.0);
    }

    #[test]
    fn scalar_recursion() {
        let m = scalar_model(0.5, 1.0);
        let one = Matrix::column(&[1.0]);
        let (z1, _) = elman_step(&m, &Matrix::zeros(1, 1), &one).unwrap();
        let (z2, _) = elman_step(&m, &z1, &one).unwrap();
        assert_eq!(z1.get(0, 0), 1.0);
        assert_eq!(z2.get(0, 0), 1.5);
    }

    #[test]
    fn step_is_deterministic_and_checks_shapes() {
        let cfg = ElmanConfig::new(2, 3, 2, OutputLikelihood::Bernoulli);
        let m = ElmanModel::new(&cfg, 0.1, &mut Rng::new(4)).unwrap();
        let x = Matrix::column(&[0.3, -0.7]);
        let z0 = Matrix::zeros(3, 1);
        assert_eq!(elman_step(&m, &z0, &x).unwrap(), elman_step(&m, &z0, &x).unwrap());
        assert!(elman_step(&m, &z0, &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn head_must_match_likelihood() {
        let mut cfg = ElmanConfig::new(2, 3, 2, OutputLikelihood::Bernoulli);
        cfg.output_activation = ActivationKind::Identity;
        assert!(cfg.validate().is_err());
        let mut cfg = ElmanConfig::new(2, 3, 2, OutputLikelihood::Gaussian);
        cfg.state_activation = ActivationKind::Signum;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn losses() {
        let p = Matrix::column(&[0.5]);
        let t = Matrix::column(&[1.0]);
        assert!((step_loss(OutputLikelihood::Bernoulli, &p, &t) - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(step_loss(OutputLikelihood::Gaussian, &p, &t), 0.125);
    }

    #[test]
    fn sgd_clips_before_stepping() {
        let mut p = Matrix::column(&[0.0]);
        let g = Matrix::column(&[3.0]);
        OptimizerState::new(Optimizer::Sgd { lr: 0.1 }).step(vec![&mut p], vec![&g]);
        assert!((p.get(0, 0) + 0.1).abs() < 1e-15);
    }
}
