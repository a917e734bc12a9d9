use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{gaussian_init, ActivationKind, Matrix, Rng};

/// Likelihood attached to the data-prediction head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputLikelihood {
    Gaussian,
    Bernoulli,
    Categorical,
}

/// Sign convention of the sparsity term in the state correction.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SparsitySign {
    /// `a − (β·E·e − λ·sign(z))`: the sparsity term pushes units away from zero.
    AsWritten,
    /// `a − (β·E·e + λ·sign(z))`: gradient descent on `λ·|z|`.
    #[default]
    Descent,
}

/// Presynaptic vectors used by the M/V/U updates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateInputs {
    /// Corrected states `y(t−1)`, the vectors the forward pass consumed.
    #[default]
    Corrected,
    /// Uncorrected states `z(t−1)`.
    Literal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtncnConfig {
    pub input_dim: usize,
    /// Widths `n1..nm`, bottom to top.
    pub layer_dims: Vec<usize>,
    /// `φ_z` per layer, bottom to top.
    pub state_activation: Vec<ActivationKind>,
    /// `φ_o` per prediction head; entry `i` is the head of layer `i+1`, which
    /// predicts layer `i` (entry 0 predicts the data).
    pub output_activation: Vec<ActivationKind>,
    pub output_likelihood: OutputLikelihood,
    #[serde(default = "default_true")]
    pub biases: bool,
}

fn default_true() -> bool {
    true
}

impl PtncnConfig {
    /// Uniform state activation, given data head, identity hidden heads.
    pub fn new(
        input_dim: usize,
        layer_dims: &[usize],
        state: ActivationKind,
        data_head: ActivationKind,
        likelihood: OutputLikelihood,
    ) -> Self {
        let m = layer_dims.len();
        let mut output_activation = vec![ActivationKind::Identity; m];
        if m > 0 {
            output_activation[0] = data_head;
        }
        Self {
            input_dim,
            layer_dims: layer_dims.to_vec(),
            state_activation: vec![state; m],
            output_activation,
            output_likelihood: likelihood,
            biases: true,
        }
    }

    pub fn num_layers(&self) -> usize {
        self.layer_dims.len()
    }

    /// Width of layer `l` in `0..=m`, where layer 0 is the data.
    pub fn width(&self, l: usize) -> usize {
        if l == 0 {
            self.input_dim
        } else {
            self.layer_dims[l - 1]
        }
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.layer_dims.len();
        if m == 0 {
            return Err(Error::Config("at least one hidden layer is required".into()));
        }
        if self.input_dim == 0 || self.layer_dims.contains(&0) {
            return Err(Error::Config("all layer widths must be at least 1".into()));
        }
        if self.state_activation.len() != m || self.output_activation.len() != m {
            return Err(Error::Config(format!(
                "expected {m} state and {m} output activations, got {} and {}",
                self.state_activation.len(),
                self.output_activation.len()
            )));
        }
        if self.state_activation.contains(&ActivationKind::Softmax) {
            return Err(Error::Config("softmax is not a valid state activation".into()));
        }
        let head = self.output_activation[0];
        match self.output_likelihood {
            OutputLikelihood::Categorical if head != ActivationKind::Softmax => {
                return Err(Error::Config(
                    "categorical likelihood requires a softmax data head".into(),
                ))
            }
            OutputLikelihood::Bernoulli if head != ActivationKind::Sigmoid => {
                return Err(Error::Config(
                    "bernoulli likelihood requires a sigmoid data head".into(),
                ))
            }
            _ => {}
        }
        if self.output_activation[1..].contains(&ActivationKind::Softmax) {
            return Err(Error::Config("softmax is only valid on the data head".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hyperparams {
    /// Bottom-up correction strength.
    pub beta: f64,
    /// Top-down modulation.
    pub gamma: f64,
    /// Sparsity coefficient.
    pub lambda_sparse: f64,
    /// Hebbian decay factor.
    pub xi: f64,
    /// SGD step size.
    pub eta: f64,
    /// Column max-norm radius.
    pub max_norm_radius: f64,
    pub sparsity_sign: SparsitySign,
    pub update_inputs: UpdateInputs,
    pub hebbian_enabled: bool,
    /// Normalize every update to unit norm instead of clipping.
    pub always_unit_norm: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            beta: 0.15,
            gamma: 0.01,
            lambda_sparse: 0.001,
            xi: 0.4,
            eta: 0.035,
            max_norm_radius: 30.0,
            sparsity_sign: SparsitySign::Descent,
            update_inputs: UpdateInputs::Corrected,
            hebbian_enabled: true,
            always_unit_norm: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("gamma", self.gamma),
            ("lambda_sparse", self.lambda_sparse),
            ("xi", self.xi),
            ("eta", self.eta),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        if !(self.max_norm_radius > 0.0) {
            return Err(Error::Config("max_norm_radius must be > 0".into()));
        }
        Ok(())
    }
}

/// Parameters owned by hidden layer `ℓ` (1-based in the docs, 0-based in
/// [`PtncnModel::layers`]).
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    /// Prediction weights, `n_{ℓ−1} × n_ℓ`.
    pub w: Matrix,
    /// Bottom-up weights, `n_ℓ × n_{ℓ−1}`.
    pub m: Matrix,
    /// Recurrent weights, `n_ℓ × n_ℓ`.
    pub v: Matrix,
    /// Top-down weights `n_ℓ × n_{ℓ+1}`; absent on the top layer.
    pub u: Option<Matrix>,
    /// Error feedback weights, `n_ℓ × n_{ℓ−1}`.
    pub e: Matrix,
    /// State bias, `n_ℓ × 1`.
    pub b: Matrix,
    /// Prediction bias, `n_{ℓ−1} × 1`.
    pub c: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PtncnModel {
    pub cfg: PtncnConfig,
    pub layers: Vec<Layer>,
}

/// Samples every weight matrix from `N(0, variance)`; biases start at zero.
pub fn build_model(cfg: &PtncnConfig, variance: f64, rng: &mut Rng) -> Result<PtncnModel> {
    cfg.validate()?;
    if !(variance >= 0.0) {
        return Err(Error::Config("initialization variance must be >= 0".into()));
    }
    let m = cfg.num_layers();
    let mut layers = Vec::with_capacity(m);
    for l in 1..=m {
        let below = cfg.width(l - 1);
        let here = cfg.width(l);
        let w = gaussian_init(below, here, variance, rng);
        let mm = gaussian_init(here, below, variance, rng);
        let v = gaussian_init(here, here, variance, rng);
        let u = (l < m).then(|| gaussian_init(here, cfg.width(l + 1), variance, rng));
        let e = gaussian_init(here, below, variance, rng);
        layers.push(Layer {
            w,
            m: mm,
            v,
            u,
            e,
            b: Matrix::zeros(here, 1),
            c: Matrix::zeros(below, 1),
        });
    }
    Ok(PtncnModel {
        cfg: cfg.clone(),
        layers,
    })
}

impl PtncnModel {
    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    /// Named parameter tensors in a fixed order (`W1, M1, V1, U1, E1, b1, c1, W2, …`).
    pub fn named_matrices(&self) -> Vec<(String, &Matrix)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter().enumerate() {
            let l = i + 1;
            out.push((format!("W{l}"), &layer.w));
            out.push((format!("M{l}"), &layer.m));
            out.push((format!("V{l}"), &layer.v));
            if let Some(u) = &layer.u {
                out.push((format!("U{l}"), u));
            }
            out.push((format!("E{l}"), &layer.e));
            out.push((format!("b{l}"), &layer.b));
            out.push((format!("c{l}"), &layer.c));
        }
        out
    }

    pub fn named_matrices_mut(&mut self) -> Vec<(String, &mut Matrix)> {
        let mut out = Vec::new();
        for (i, layer) in self.layers.iter_mut().enumerate() {
            let l = i + 1;
            out.push((format!("W{l}"), &mut layer.w));
            out.push((format!("M{l}"), &mut layer.m));
            out.push((format!("V{l}"), &mut layer.v));
            if let Some(u) = &mut layer.u {
                out.push((format!("U{l}"), u));
            }
            out.push((format!("E{l}"), &mut layer.e));
            out.push((format!("b{l}"), &mut layer.b));
            out.push((format!("c{l}"), &mut layer.c));
        }
        out
    }

    /// Number of weight matrices excluding biases.
    pub fn weight_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| 4 + usize::from(l.u.is_some()))
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.named_matrices().iter().all(|(_, m)| m.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_cfg() -> PtncnConfig {
        PtncnConfig::new(
            1,
            &[1, 1],
            ActivationKind::Identity,
            ActivationKind::Identity,
            OutputLikelihood::Gaussian,
        )
    }

    #[test]
    fn two_layer_model_has_nine_weight_matrices() {
        let model = build_model(&scalar_cfg(), 0.025, &mut Rng::new(1)).unwrap();
        // W1 W2 M1 M2 U1 V1 V2 + E1 E2
        assert_eq!(model.weight_count(), 9);
        assert!(model.layers[0].u.is_some());
        assert!(model.layers[1].u.is_none());
    }

    #[test]
    fn shapes_follow_layer_widths() {
        let cfg = PtncnConfig::new(
            5,
            &[4, 3, 2],
            ActivationKind::Tanh,
            ActivationKind::Sigmoid,
            OutputLikelihood::Bernoulli,
        );
        let model = build_model(&cfg, 0.025, &mut Rng::new(2)).unwrap();
        let l1 = &model.layers[0];
        assert_eq!(l1.w.shape(), (5, 4));
        assert_eq!(l1.e.shape(), (4, 5));
        assert_eq!(l1.m.shape(), (4, 5));
        assert_eq!(l1.u.as_ref().unwrap().shape(), (4, 3));
        assert_eq!(model.layers[2].w.shape(), (3, 2));
        assert_eq!(model.layers[2].c.shape(), (3, 1));
    }

    #[test]
    fn zero_variance_gives_zero_model() {
        let model = build_model(&scalar_cfg(), 0.0, &mut Rng::new(3)).unwrap();
        assert!(model.named_matrices().iter().all(|(_, m)| m.max_abs() == 0.0));
    }

    #[test]
    fn same_seed_same_model() {
        let a = build_model(&scalar_cfg(), 0.025, &mut Rng::new(4)).unwrap();
        let b = build_model(&scalar_cfg(), 0.025, &mut Rng::new(4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = scalar_cfg();
        cfg.layer_dims = vec![];
        cfg.state_activation = vec![];
        cfg.output_activation = vec![];
        assert!(build_model(&cfg, 0.025, &mut Rng::new(0)).is_err());

        let mut cfg = scalar_cfg();
        cfg.layer_dims[1] = 0;
        assert!(build_model(&cfg, 0.025, &mut Rng::new(0)).is_err());

        let mut cfg = scalar_cfg();
        cfg.output_likelihood = OutputLikelihood::Categorical;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn hyperparam_defaults() {
        let hp = Hyperparams::default();
        assert_eq!((hp.beta, hp.gamma, hp.lambda_sparse), (0.15, 0.01, 0.001));
        assert_eq!((hp.xi, hp.eta, hp.max_norm_radius), (0.4, 0.035, 30.0));
        assert!(hp.validate().is_ok());
        let bad = Hyperparams {
            max_norm_radius: 0.0,
            ..Hyperparams::default()
        };
        assert!(bad.validate().is_err());
    }
}
