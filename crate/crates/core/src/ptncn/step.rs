//! Prediction and error-correction phases.
//!
//! Every layer's pre-activation at time `t` reads only corrected states from
//! `t−1`, so layers can be evaluated in any order or concurrently; the
//! `*_parallel` variants farm layers out to rayon and return bit-identical
//! traces.

use rayon::prelude::*;

use super::model::{Hyperparams, OutputLikelihood, PtncnConfig, PtncnModel, SparsitySign};
use crate::error::{Error, Result};
use crate::numerics::{ActivationKind, Matrix};

/// Quantities of one hidden layer `ℓ` at one time step (batched by column).
#[derive(Clone, Debug, PartialEq)]
pub struct LayerTrace {
    /// Pre-activation `a_ℓ`.
    pub a: Matrix,
    /// State `z_ℓ = φ_z(a_ℓ)`.
    pub z: Matrix,
    /// Prediction `z_{ℓ−1,o}` of the layer below (the data for `ℓ = 1`).
    pub pred: Matrix,
    /// Error unit `e_{ℓ−1} = −(z_{ℓ−1} − z_{ℓ−1,o})`.
    pub err: Option<Matrix>,
    /// Corrected state `y_ℓ`.
    pub y: Option<Matrix>,
    /// State error `e_{ℓ,z} = −(y_ℓ − z_ℓ)`.
    pub ez: Option<Matrix>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepTrace {
    pub layers: Vec<LayerTrace>,
    /// Observed data `z⁰ = x_t`, present once corrected.
    pub observed: Option<Matrix>,
    pub batch: usize,
    corrected: bool,
}

impl StepTrace {
    pub fn is_corrected(&self) -> bool {
        self.corrected
    }

    /// Data prediction `z⁰_o`.
    pub fn prediction(&self) -> &Matrix {
        &self.layers[0].pred
    }

    pub fn corrected_state(&self, i: usize) -> &Matrix {
        self.layers[i]
            .y
            .as_ref()
            .expect("corrected trace carries y")
    }

    pub fn state_error(&self, i: usize) -> &Matrix {
        self.layers[i]
            .ez
            .as_ref()
            .expect("corrected trace carries e_z")
    }

    pub fn error_unit(&self, i: usize) -> &Matrix {
        self.layers[i]
            .err
            .as_ref()
            .expect("corrected trace carries error units")
    }
}

/// All-zero corrected trace used at sequence start (`x₀ = 0`).
pub fn reset_state(cfg: &PtncnConfig, batch: usize) -> StepTrace {
    let layers = (1..=cfg.num_layers())
        .map(|l| {
            let here = cfg.width(l);
            let below = cfg.width(l - 1);
            LayerTrace {
                a: Matrix::zeros(here, batch),
                z: Matrix::zeros(here, batch),
                pred: Matrix::zeros(below, batch),
                err: Some(Matrix::zeros(below, batch)),
                y: Some(Matrix::zeros(here, batch)),
                ez: Some(Matrix::zeros(here, batch)),
            }
        })
        .collect();
    StepTrace {
        layers,
        observed: Some(Matrix::zeros(cfg.input_dim, batch)),
        batch,
        corrected: true,
    }
}

fn check_prev(model: &PtncnModel, prev: &StepTrace, x_prev: &Matrix) -> Result<()> {
    if !prev.corrected {
        return Err(Error::TraceState("previous trace must be corrected"));
    }
    if prev.layers.len() != model.num_layers() {
        return Err(Error::shape(
            "predict_step",
            format!("{} layers", model.num_layers()),
            prev.layers.len(),
        ));
    }
    x_prev.check_shape("predict_step input", model.cfg.input_dim, prev.batch)
}

fn predict_layer(model: &PtncnModel, prev: &StepTrace, x_prev: &Matrix, i: usize) -> LayerTrace {
    let layer = &model.layers[i];
    let below = if i == 0 {
        x_prev
    } else {
        prev.corrected_state(i - 1)
    };
    let mut a = layer.m.dot(below);
    a.axpy(1.0, &layer.v.dot(prev.corrected_state(i)));
    if let Some(u) = &layer.u {
        a.axpy(1.0, &u.dot(prev.corrected_state(i + 1)));
    }
    if model.cfg.biases {
        a.add_column_broadcast(&layer.b);
    }
    let z = model.cfg.state_activation[i].apply(&a);
    let mut logits = layer.w.dot(&z);
    if model.cfg.biases {
        logits.add_column_broadcast(&layer.c);
    }
    let pred = model.cfg.output_activation[i].apply(&logits);
    LayerTrace {
        a,
        z,
        pred,
        err: None,
        y: None,
        ez: None,
    }
}

/// Prediction phase: computes `a_ℓ, z_ℓ` and each layer's guess of the layer
/// below from `t−1` quantities only.
pub fn predict_step(model: &PtncnModel, prev: &StepTrace, x_prev: &Matrix) -> Result<StepTrace> {
    check_prev(model, prev, x_prev)?;
    let layers = (0..model.num_layers())
        .map(|i| predict_layer(model, prev, x_prev, i))
        .collect();
    Ok(StepTrace {
        layers,
        observed: None,
        batch: prev.batch,
        corrected: false,
    })
}

/// [`predict_step`] with one rayon task per layer.
pub fn predict_step_parallel(
    model: &PtncnModel,
    prev: &StepTrace,
    x_prev: &Matrix,
) -> Result<StepTrace> {
    check_prev(model, prev, x_prev)?;
    let layers = (0..model.num_layers())
        .into_par_iter()
        .map(|i| predict_layer(model, prev, x_prev, i))
        .collect();
    Ok(StepTrace {
        layers,
        observed: None,
        batch: prev.batch,
        corrected: false,
    })
}

fn check_uncorrected(model: &PtncnModel, trace: &StepTrace, x_t: &Matrix) -> Result<()> {
    if trace.corrected {
        return Err(Error::TraceState("trace is already corrected"));
    }
    x_t.check_shape("correct_step observation", model.cfg.input_dim, trace.batch)
}

/// `e_{ℓ−1} = z_{ℓ−1,o} − z_{ℓ−1}` for every layer, with `z⁰ = x_t`.
fn error_units(trace: &StepTrace, x_t: &Matrix) -> Vec<Matrix> {
    (0..trace.layers.len())
        .map(|i| {
            let target = if i == 0 { x_t } else { &trace.layers[i - 1].z };
            trace.layers[i].pred.sub(target)
        })
        .collect()
}

fn correct_layer(
    model: &PtncnModel,
    trace: &StepTrace,
    errs: &[Matrix],
    hp: &Hyperparams,
    i: usize,
) -> (Matrix, Matrix) {
    let lt = &trace.layers[i];
    let mut pre = lt.a.clone();
    pre.axpy(-hp.beta, &model.layers[i].e.dot(&errs[i]));
    if i + 1 < errs.len() {
        pre.axpy(hp.gamma, &errs[i + 1]);
    }
    if hp.lambda_sparse != 0.0 {
        let sign = ActivationKind::Signum.apply(&lt.z);
        let s = match hp.sparsity_sign {
            SparsitySign::AsWritten => hp.lambda_sparse,
            SparsitySign::Descent => -hp.lambda_sparse,
        };
        pre.axpy(s, &sign);
    }
    let y = model.cfg.state_activation[i].apply(&pre);
    let ez = lt.z.sub(&y);
    (y, ez)
}

fn finish(mut trace: StepTrace, x_t: &Matrix, errs: Vec<Matrix>, yz: Vec<(Matrix, Matrix)>) -> StepTrace {
    for ((lt, err), (y, ez)) in trace.layers.iter_mut().zip(errs).zip(yz) {
        lt.err = Some(err);
        lt.y = Some(y);
        lt.ez = Some(ez);
    }
    trace.observed = Some(x_t.clone());
    trace.corrected = true;
    trace
}

/// Error-correction phase: forms the error units against the observed `x_t`
/// and moves every pre-activation against its local error signal.
pub fn correct_step(
    model: &PtncnModel,
    trace: StepTrace,
    x_t: &Matrix,
    hp: &Hyperparams,
) -> Result<StepTrace> {
    check_uncorrected(model, &trace, x_t)?;
    let errs = error_units(&trace, x_t);
    let yz = (0..trace.layers.len())
        .map(|i| correct_layer(model, &trace, &errs, hp, i))
        .collect();
    Ok(finish(trace, x_t, errs, yz))
}

/// [`correct_step`] with one rayon task per layer.
pub fn correct_step_parallel(
    model: &PtncnModel,
    trace: StepTrace,
    x_t: &Matrix,
    hp: &Hyperparams,
) -> Result<StepTrace> {
    check_uncorrected(model, &trace, x_t)?;
    let errs = error_units(&trace, x_t);
    let yz = (0..trace.layers.len())
        .into_par_iter()
        .map(|i| correct_layer(model, &trace, &errs, hp, i))
        .collect();
    Ok(finish(trace, x_t, errs, yz))
}

/// Accepts the guessed states as-is (`y = z`), recording error units only.
/// This is the correction-disabled ablation.
pub fn skip_correction(model: &PtncnModel, trace: StepTrace, x_t: &Matrix) -> Result<StepTrace> {
    check_uncorrected(model, &trace, x_t)?;
    let errs = error_units(&trace, x_t);
    let yz = trace
        .layers
        .iter()
        .map(|lt| (lt.z.clone(), Matrix::zeros(lt.z.rows(), lt.z.cols())))
        .collect();
    Ok(finish(trace, x_t, errs, yz))
}

/// Sum of all local objectives for a corrected trace, averaged over the batch:
///
/// ```text
/// D = Σ_ℓ [ β/2·‖z_{ℓ−1} − z_{ℓ−1,o}‖² + λ·‖z_ℓ‖₁ ]
///   + Σ_{ℓ<m} γ/2·‖z_ℓ − z_{ℓ,o}‖²
///   + Σ_ℓ 1/2·‖y_ℓ − z_ℓ‖²
/// ```
///
/// A categorical data head replaces the first `ℓ = 1` term by `β·CE`.
pub fn compute_total_discrepancy(
    trace: &StepTrace,
    hp: &Hyperparams,
    likelihood: OutputLikelihood,
) -> Result<f64> {
    if !trace.corrected {
        return Err(Error::TraceState("total discrepancy needs a corrected trace"));
    }
    let m = trace.layers.len();
    let mut d = 0.0;
    for i in 0..m {
        let lt = &trace.layers[i];
        let err = lt.err.as_ref().expect("corrected");
        if i == 0 && likelihood == OutputLikelihood::Categorical {
            let x = trace.observed.as_ref().expect("corrected");
            let ce: f64 = x
                .as_slice()
                .iter()
                .zip(lt.pred.as_slice())
                .filter(|(t, _)| **t != 0.0)
                .map(|(t, p)| -t * p.max(1e-300).ln())
                .sum();
            d += hp.beta * ce;
        } else {
            d += 0.5 * hp.beta * err.sum_sq();
        }
        d += hp.lambda_sparse * lt.z.l1_norm();
        if i + 1 < m {
            d += 0.5 * hp.gamma * trace.layers[i + 1].err.as_ref().expect("corrected").sum_sq();
        }
        d += 0.5 * lt.y.as_ref().expect("corrected").sub(&lt.z).sum_sq();
    }
    Ok(d / trace.batch.max(1) as f64)
}
