//! Unbiased online recurrent optimization: a rank-one stochastic estimate
//! `s̃ ⊗ θ̃` of the RTRL sensitivity matrix.

use super::elman::{elman_step, ElmanGrads, ElmanModel};
use crate::error::Result;
use crate::numerics::{Matrix, Rng};

const NORM_FLOOR: f64 = 1e-12;

/// State plus the rank-one factors. `theta_*` are shaped like the recurrent
/// parameter tensors.
#[derive(Clone, Debug, PartialEq)]
pub struct UoroCarry {
    pub z: Matrix,
    pub s_tilde: Matrix,
    pub theta_in: Matrix,
    pub theta_rec: Matrix,
    pub theta_b: Matrix,
}

impl UoroCarry {
    pub fn new(model: &ElmanModel) -> Self {
        let n = model.hidden();
        Self {
            z: Matrix::zeros(n, 1),
            s_tilde: Matrix::zeros(n, 1),
            theta_in: Matrix::zeros(n, model.cfg.input_dim),
            theta_rec: Matrix::zeros(n, n),
            theta_b: Matrix::zeros(n, 1),
        }
    }

    fn theta_norm(&self) -> f64 {
        (self.theta_in.sum_sq() + self.theta_rec.sum_sq() + self.theta_b.sum_sq()).sqrt()
    }
}

/// Advances the state and the rank-one factors on input `x` (one column).
pub fn uoro_advance(model: &ElmanModel, carry: &mut UoroCarry, x: &Matrix, rng: &mut Rng) -> Result<()> {
    x.check_shape("uoro input", model.cfg.input_dim, 1)?;
    let n = model.hidden();
    let (z, _) = elman_step(model, &carry.z, x)?;
    let d = model.cfg.state_activation.derivative_from_output(&z)?;

    let fz_s = model.w_rec.dot(&carry.s_tilde).hadamard(&d);
    let nu = Matrix::from_vec(n, 1, (0..n).map(|_| rng.rademacher()).collect())?;
    // νᵀ·∂F/∂θ factorises as (ν∘D)·[x; z_prev; 1]ᵀ per tensor
    let nu_d = nu.hadamard(&d);
    let p_in = nu_d.dot_t(x);
    let p_rec = nu_d.dot_t(&carry.z);
    let p_b = nu_d;

    let p_norm = (p_in.sum_sq() + p_rec.sum_sq() + p_b.sum_sq()).sqrt();
    let rho0 = (carry.theta_norm().max(NORM_FLOOR) / fz_s.frobenius_norm().max(NORM_FLOOR)).sqrt();
    let rho1 = (p_norm.max(NORM_FLOOR) / nu.frobenius_norm().max(NORM_FLOOR)).sqrt();

    let mut s = fz_s.scale(rho0);
    s.axpy(rho1, &nu);
    carry.s_tilde = s;
    for (theta, p) in [
        (&mut carry.theta_in, &p_in),
        (&mut carry.theta_rec, &p_rec),
        (&mut carry.theta_b, &p_b),
    ] {
        theta.scale_inplace(1.0 / rho0);
        theta.axpy(1.0 / rho1, p);
    }
    carry.z = z;
    Ok(())
}

/// Gradient estimate `(gᵀ·s̃)·θ̃` for the prediction read out from the
/// carried state; the output head receives its exact gradient.
pub fn uoro_gradient(model: &ElmanModel, carry: &UoroCarry, target: &Matrix) -> Result<(ElmanGrads, Matrix)> {
    target.check_shape("uoro target", model.cfg.output_dim, 1)?;
    let y = model.output(&carry.z);
    let delta_out = y.sub(target);
    let g = model.w_out.t_dot(&delta_out);
    let coeff = g.dot_flat(&carry.s_tilde);
    let grads = ElmanGrads {
        w_in: carry.theta_in.scale(coeff),
        w_rec: carry.theta_rec.scale(coeff),
        b: carry.theta_b.scale(coeff),
        w_out: delta_out.dot_t(&carry.z),
        c: delta_out,
    };
    Ok((grads, y))
}

/// [`uoro_advance`] on `x` followed by [`uoro_gradient`] for `target`.
pub fn uoro_step(
    model: &ElmanModel,
    carry: &mut UoroCarry,
    x: &Matrix,
    target: &Matrix,
    rng: &mut Rng,
) -> Result<(ElmanGrads, Matrix)> {
    target.check_shape("uoro target", model.cfg.output_dim, 1)?;
    uoro_advance(model, carry, x, rng)?;
    uoro_gradient(model, carry, target)
}
