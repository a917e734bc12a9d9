//! Real-time recurrent learning: forward-mode sensitivities of the Elman
//! state with respect to every recurrent parameter.

use super::elman::{elman_step, ElmanGrads, ElmanModel};
use crate::error::Result;
use crate::numerics::Matrix;

/// State and sensitivities carried between steps. Column `p·cols + q` of a
/// Jacobian block is `∂z/∂θ[p, q]` for that parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct RtrlCarry {
    pub z: Matrix,
    pub j_in: Matrix,
    pub j_rec: Matrix,
    pub j_b: Matrix,
}

impl RtrlCarry {
    pub fn new(model: &ElmanModel) -> Self {
        let n = model.hidden();
        let k = model.cfg.input_dim;
        Self {
            z: Matrix::zeros(n, 1),
            j_in: Matrix::zeros(n, n * k),
            j_rec: Matrix::zeros(n, n * n),
            j_b: Matrix::zeros(n, n),
        }
    }
}

/// `J ← D·(W_rec·J + ∂a/∂θ)` for one parameter block whose immediate
/// Jacobian puts `pre` in row `i`, columns `i·len(pre)..`.
fn propagate(w_rec: &Matrix, j: &Matrix, pre: &[f64], d: &[f64]) -> Matrix {
    let mut out = w_rec.dot(j);
    let width = pre.len();
    for (i, &di) in d.iter().enumerate() {
        let row = out.row_mut(i);
        for (q, &p) in pre.iter().enumerate() {
            row[i * width + q] += p;
        }
        for v in row.iter_mut() {
            *v *= di;
        }
    }
    out
}

/// Advances state and sensitivities on input `x` (a single column).
pub fn rtrl_advance(model: &ElmanModel, carry: &mut RtrlCarry, x: &Matrix) -> Result<()> {
    x.check_shape("rtrl input", model.cfg.input_dim, 1)?;
    let (z, _) = elman_step(model, &carry.z, x)?;
    let d = model.cfg.state_activation.derivative_from_output(&z)?;
    let d = d.as_slice();
    carry.j_in = propagate(&model.w_rec, &carry.j_in, x.as_slice(), d);
    carry.j_rec = propagate(&model.w_rec, &carry.j_rec, carry.z.as_slice(), d);
    carry.j_b = propagate(&model.w_rec, &carry.j_b, &[1.0], d);
    carry.z = z;
    Ok(())
}

/// Loss gradient of the prediction read out from the carried state against
/// `target`, together with that prediction.
pub fn rtrl_gradient(model: &ElmanModel, carry: &RtrlCarry, target: &Matrix) -> Result<(ElmanGrads, Matrix)> {
    target.check_shape("rtrl target", model.cfg.output_dim, 1)?;
    let y = model.output(&carry.z);
    let delta_out = y.sub(target);
    let g = model.w_out.t_dot(&delta_out);
    let n = model.hidden();
    let project = |j: &Matrix, cols: usize| {
        g.t_dot(j)
            .reshape(n, cols)
            .expect("jacobian width matches parameter size")
    };
    let grads = ElmanGrads {
        w_in: project(&carry.j_in, model.cfg.input_dim),
        w_rec: project(&carry.j_rec, n),
        b: project(&carry.j_b, 1),
        w_out: delta_out.dot_t(&carry.z),
        c: delta_out,
    };
    Ok((grads, y))
}

/// [`rtrl_advance`] on `x` followed by [`rtrl_gradient`] for `target`.
pub fn rtrl_step(
    model: &ElmanModel,
    carry: &mut RtrlCarry,
    x: &Matrix,
    target: &Matrix,
) -> Result<(ElmanGrads, Matrix)> {
    target.check_shape("rtrl target", model.cfg.output_dim, 1)?;
    rtrl_advance(model, carry, x)?;
    rtrl_gradient(model, carry, target)
}
