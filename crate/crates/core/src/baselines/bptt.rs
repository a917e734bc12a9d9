//! Back-propagation through the unrolled Elman graph.

use super::elman::{elman_step, ElmanGrads, ElmanModel};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

struct Forward {
    /// `states[0] = z0`, `states[t+1] = z` after consuming `inputs[t]`.
    states: Vec<Matrix>,
    outputs: Vec<Matrix>,
}

fn forward(model: &ElmanModel, z0: &Matrix, inputs: &[Matrix]) -> Result<Forward> {
    let mut states = Vec::with_capacity(inputs.len() + 1);
    let mut outputs = Vec::with_capacity(inputs.len());
    states.push(z0.clone());
    for x in inputs {
        let (z, y) = elman_step(model, states.last().expect("non-empty"), x)?;
        states.push(z);
        outputs.push(y);
    }
    Ok(Forward { states, outputs })
}

/// Gradient of `Σ_{t ∈ window} L_t` where the window is the last `h` steps
/// and the state entering the window is held constant.
fn backward(
    model: &ElmanModel,
    fwd: &Forward,
    inputs: &[Matrix],
    targets: &[Matrix],
    h: usize,
) -> Result<ElmanGrads> {
    let len = inputs.len();
    let start = len.saturating_sub(h);
    let mut g = model.zero_grads();
    let mut carry = Matrix::zeros(model.hidden(), fwd.states[0].cols());
    for t in (start..len).rev() {
        let z = &fwd.states[t + 1];
        let z_prev = &fwd.states[t];
        let delta_out = fwd.outputs[t].sub(&targets[t]);
        g.w_out.axpy(1.0, &delta_out.dot_t(z));
        g.c.axpy(1.0, &row_sums(&delta_out));
        let mut dz = model.w_out.t_dot(&delta_out);
        dz.axpy(1.0, &carry);
        let da = dz.hadamard(&model.cfg.state_activation.derivative_from_output(z)?);
        g.w_in.axpy(1.0, &da.dot_t(&inputs[t]));
        g.w_rec.axpy(1.0, &da.dot_t(z_prev));
        g.b.axpy(1.0, &row_sums(&da));
        carry = model.w_rec.t_dot(&da);
    }
    Ok(g)
}

fn row_sums(m: &Matrix) -> Matrix {
    let mut out = m.column_mean();
    out.scale_inplace(m.cols() as f64);
    out
}

fn check_sequence(model: &ElmanModel, z0: &Matrix, inputs: &[Matrix], targets: &[Matrix]) -> Result<()> {
    if inputs.is_empty() {
        return Err(Error::Empty("sequence"));
    }
    if inputs.len() != targets.len() {
        return Err(Error::shape("bptt targets", inputs.len(), targets.len()));
    }
    z0.check_shape("bptt initial state", model.hidden(), z0.cols())?;
    for t in targets {
        t.check_shape("bptt target", model.cfg.output_dim, z0.cols())?;
    }
    Ok(())
}

/// Exact gradient of the summed loss over the whole sequence, started from `z0`.
/// Losses and gradients are summed over batch columns.
pub fn bptt_gradients(
    model: &ElmanModel,
    z0: &Matrix,
    inputs: &[Matrix],
    targets: &[Matrix],
) -> Result<ElmanGrads> {
    check_sequence(model, z0, inputs, targets)?;
    let fwd = forward(model, z0, inputs)?;
    backward(model, &fwd, inputs, targets, inputs.len())
}

/// BPTT restricted to the last `h` steps of the buffer; the state entering
/// the window is treated as a constant.
pub fn tbptt_gradients(
    model: &ElmanModel,
    h: usize,
    z0: &Matrix,
    inputs: &[Matrix],
    targets: &[Matrix],
) -> Result<ElmanGrads> {
    if h < 1 {
        return Err(Error::Config("truncation window must be at least 1".into()));
    }
    check_sequence(model, z0, inputs, targets)?;
    let fwd = forward(model, z0, inputs)?;
    backward(model, &fwd, inputs, targets, h)
}

/// Final state after running the whole buffer forward.
pub fn final_state(model: &ElmanModel, z0: &Matrix, inputs: &[Matrix]) -> Result<Matrix> {
    let mut z = z0.clone();
    for x in inputs {
        z = elman_step(model, &z, x)?.0;
    }
    Ok(z)
}
