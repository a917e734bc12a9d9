//! Leaky echo-state network. The input and reservoir weights are fixed at
//! construction; only the readout `W_y` is trained.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{spectral_radius_rescale, ActivationKind, Matrix, Rng};
use crate::ptncn::OutputLikelihood;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EsnConfig {
    pub input_dim: usize,
    pub reservoir: usize,
    pub output_dim: usize,
    pub spectral_radius: f64,
    pub leak: f64,
    pub input_scale: f64,
    /// Fraction of nonzero reservoir weights.
    pub density: f64,
    pub output_activation: ActivationKind,
    pub likelihood: OutputLikelihood,
}

impl EsnConfig {
    pub fn new(input_dim: usize, reservoir: usize, output_dim: usize, likelihood: OutputLikelihood) -> Self {
        let output_activation = match likelihood {
            OutputLikelihood::Gaussian => ActivationKind::Identity,
            OutputLikelihood::Bernoulli => ActivationKind::Sigmoid,
            OutputLikelihood::Categorical => ActivationKind::Softmax,
        };
        Self {
            input_dim,
            reservoir,
            output_dim,
            spectral_radius: 0.9,
            leak: 0.5,
            input_scale: 0.5,
            density: 0.2,
            output_activation,
            likelihood,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.reservoir == 0 || self.output_dim == 0 {
            return Err(Error::Config("esn dimensions must be at least 1".into()));
        }
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return Err(Error::Config(format!("esn leak must lie in (0, 1], got {}", self.leak)));
        }
        if !(self.spectral_radius > 0.0) || !(self.density > 0.0 && self.density <= 1.0) {
            return Err(Error::Config(
                "esn spectral_radius must be positive and density in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// Reservoir state update `z ← (1−α)·z + α·tanh(W_x·[1; x] + W_r·z)` and
/// readout `y = ψ(W_y·[1; z])`.
#[derive(Clone, Debug, PartialEq)]
pub struct EsnModel {
    pub cfg: EsnConfig,
    pub w_x: Matrix,
    pub w_r: Matrix,
    pub w_y: Matrix,
    pub state: Matrix,
}

fn with_bias(m: &Matrix) -> Matrix {
    Matrix::vcat(&[&Matrix::filled(1, m.cols(), 1.0), m])
}

impl EsnModel {
    pub fn new(cfg: &EsnConfig, rng: &mut Rng) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.reservoir;
        let mut w_x = Matrix::zeros(n, cfg.input_dim + 1);
        for v in w_x.as_mut_slice() {
            *v = rng.uniform_range(-cfg.input_scale, cfg.input_scale);
        }
        let mut raw = Matrix::zeros(n, n);
        // keep drawing until the sparse reservoir has a usable spectrum
        let mut attempts = 0;
        let w_r = loop {
            for v in raw.as_mut_slice() {
                *v = if rng.uniform() < cfg.density {
                    rng.standard_normal()
                } else {
                    0.0
                };
            }
            match spectral_radius_rescale(&raw, cfg.spectral_radius) {
                Ok(w) => break w,
                Err(e) if attempts >= 16 => return Err(e),
                Err(_) => attempts += 1,
            }
        };
        Ok(Self {
            cfg: cfg.clone(),
            w_x,
            w_r,
            w_y: Matrix::zeros(cfg.output_dim, n + 1),
            state: Matrix::zeros(n, 1),
        })
    }

    pub fn reset_state(&mut self, batch: usize) {
        self.state = Matrix::zeros(self.cfg.reservoir, batch);
    }

    pub fn readout(&self, z: &Matrix) -> Matrix {
        self.cfg.output_activation.apply(&self.w_y.dot(&with_bias(z)))
    }
}

/// Advance the reservoir on `x` and return `(z, y)`.
pub fn esn_step(model: &mut EsnModel, x: &Matrix) -> Result<(Matrix, Matrix)> {
    x.check_shape("esn input", model.cfg.input_dim, model.state.cols())?;
    let mut a = model.w_x.dot(&with_bias(x));
    a.axpy(1.0, &model.w_r.dot(&model.state));
    let alpha = model.cfg.leak;
    let z = model
        .state
        .zip_map(&a, |z, a| (1.0 - alpha) * z + alpha * a.tanh());
    model.state = z.clone();
    let y = model.readout(&z);
    Ok((z, y))
}

/// One SGD step on the readout for a batch of `(z, target)` columns, using
/// the canonical-link gradient `(y − t)·[1; z]ᵀ` averaged over the batch.
pub fn esn_train_output(model: &mut EsnModel, z: &Matrix, target: &Matrix, lr: f64) -> Result<()> {
    target.check_shape("esn target", model.cfg.output_dim, z.cols())?;
    let zb = with_bias(z);
    let y = model.cfg.output_activation.apply(&model.w_y.dot(&zb));
    let grad = y.sub(target).dot_t(&zb).scale(1.0 / z.cols() as f64);
    model.w_y.axpy(-lr, &grad);
    Ok(())
}

/// Closed-form ridge readout `W_y = T·Zᵀ(Z·Zᵀ + λI)⁻¹` over collected state
/// columns. Only meaningful for an identity output head.
pub fn esn_fit_ridge(model: &mut EsnModel, states: &Matrix, targets: &Matrix, ridge: f64) -> Result<()> {
    if model.cfg.output_activation != ActivationKind::Identity {
        return Err(Error::Config("ridge readout needs an identity output head".into()));
    }
    targets.check_shape("esn ridge targets", model.cfg.output_dim, states.cols())?;
    let zb = with_bias(states);
    let mut gram = zb.dot_t(&zb);
    for i in 0..gram.rows() {
        gram.set(i, i, gram.get(i, i) + ridge);
    }
    let rhs = zb.dot_t(targets);
    let sol = cholesky_solve(&gram, &rhs)?;
    model.w_y = sol.transpose();
    Ok(())
}

/// Solves `A·X = B` for symmetric positive definite `A`.
fn cholesky_solve(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    let n = a.rows();
    let mut l = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l.get(i, k) * l.get(j, k)).sum();
            if i == j {
                let d = a.get(i, i) - s;
                if d <= 0.0 {
                    return Err(Error::Numerical("ridge system is not positive definite".into()));
                }
                l.set(i, i, d.sqrt());
            } else {
                l.set(i, j, (a.get(i, j) - s) / l.get(j, j));
            }
        }
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l.get(i, k) * x.get(k, c)).sum();
            x.set(i, c, (x.get(i, c) - s) / l.get(i, i));
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l.get(k, i) * x.get(k, c)).sum();
            x.set(i, c, (x.get(i, c) - s) / l.get(i, i));
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::spectral_radius;

    fn model(seed: u64) -> EsnModel {
        let cfg = EsnConfig::new(3, 40, 2, OutputLikelihood::Gaussian);
        EsnModel::new(&cfg, &mut Rng::new(seed)).unwrap()
    }

    #[test]
    fn reservoir_has_requested_radius() {
        let m = model(1);
        assert!((spectral_radius(&m.w_r).unwrap() - 0.9).abs() < 1e-6);
    }

    #[test]
    fn training_touches_only_the_readout() {
        let mut m = model(2);
        let (w_x, w_r) = (m.w_x.clone(), m.w_r.clone());
        let mut rng = Rng::new(3);
        for _ in 0..50 {
            let x = Matrix::column(&[rng.standard_normal(), rng.standard_normal(), 1.0]);
            let (z, _) = esn_step(&mut m, &x).unwrap();
            esn_train_output(&mut m, &z, &Matrix::column(&[1.0, -1.0]), 0.1).unwrap();
        }
        assert_eq!(m.w_x, w_x);
        assert_eq!(m.w_r, w_r);
        assert!(m.w_y.max_abs() > 0.0);
    }

    #[test]
    fn leak_one_is_plain_tanh_reservoir() {
        let mut m = model(4);
        m.cfg.leak = 1.0;
        let x = Matrix::column(&[0.1, 0.2, 0.3]);
        let (z, _) = esn_step(&mut m, &x).unwrap();
        let expect = m.w_x.dot(&with_bias(&x)).map(f64::tanh);
        assert!(z.sub(&expect).max_abs() < 1e-15);
    }

    #[test]
    fn leak_zero_freezes_state() {
        let mut m = model(4);
        m.state = Matrix::filled(40, 1, 0.25);
        m.cfg.leak = 0.0;
        let (z, _) = esn_step(&mut m, &Matrix::column(&[1.0, 2.0, 3.0])).unwrap();
        assert_eq!(z, Matrix::filled(40, 1, 0.25));
    }

    #[test]
    fn ridge_recovers_linear_readout() {
        let mut m = model(5);
        let mut rng = Rng::new(6);
        let states = Matrix::from_vec(40, 200, (0..8000).map(|_| rng.standard_normal()).collect()).unwrap();
        let truth = Matrix::from_vec(2, 41, (0..82).map(|_| rng.standard_normal()).collect()).unwrap();
        let targets = truth.dot(&with_bias(&states));
        esn_fit_ridge(&mut m, &states, &targets, 1e-9).unwrap();
        assert!(m.w_y.sub(&truth).max_abs() < 1e-5);
    }

    #[test]
    fn invalid_leak_rejected() {
        let mut cfg = EsnConfig::new(1, 4, 1, OutputLikelihood::Gaussian);
        cfg.leak = 0.0;
        assert!(EsnModel::new(&cfg, &mut Rng::new(0)).is_err());
    }
}
