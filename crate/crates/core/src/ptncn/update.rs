//! Local weight updates derived from error units and corrected states.

use super::model::{Hyperparams, PtncnModel, UpdateInputs};
use super::step::StepTrace;
use crate::error::{Error, Result};
use crate::numerics::{
    clip_update_norm, normalize_update_norm, project_columns_l2_inplace, Matrix,
};

/// Update directions for one layer. Parameters move by `θ ← θ − η·Δθ`.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerUpdate {
    pub dw: Matrix,
    pub dm: Matrix,
    pub dv: Matrix,
    pub du: Option<Matrix>,
    pub de: Matrix,
    pub db: Matrix,
    pub dc: Matrix,
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpdateSet {
    pub layers: Vec<LayerUpdate>,
}

/// `post · preᵀ` averaged over batch columns.
fn outer_mean(post: &Matrix, pre: &Matrix) -> Matrix {
    let mut out = post.dot_t(pre);
    out.scale_inplace(1.0 / post.cols() as f64);
    out
}

/// `−post·preᵀ / ‖post·preᵀ‖_F`, or zero when the product vanishes.
pub fn hebbian_term(post: &Matrix, pre: &Matrix) -> Matrix {
    let mut h = post.dot_t(pre);
    let norm = h.frobenius_norm();
    if norm > 0.0 {
        h.scale_inplace(-1.0 / norm);
    }
    h
}

/// Computes every layer's update from the corrected trace at `t` and the
/// corrected trace at `t−1` (whose state errors feed the temporal-difference
/// rule for the error weights).
pub fn compute_updates(
    model: &PtncnModel,
    trace: &StepTrace,
    prev: &StepTrace,
    x_prev: &Matrix,
    hp: &Hyperparams,
) -> Result<UpdateSet> {
    if !trace.is_corrected() || !prev.is_corrected() {
        return Err(Error::TraceState("updates need corrected traces at t and t-1"));
    }
    let m = model.num_layers();
    if trace.layers.len() != m || prev.layers.len() != m {
        return Err(Error::shape("compute_updates", format!("{m} layers"), trace.layers.len()));
    }
    if trace.batch != prev.batch {
        return Err(Error::shape("compute_updates batch", trace.batch, prev.batch));
    }
    x_prev.check_shape("compute_updates input", model.cfg.input_dim, trace.batch)?;

    let prev_input = |i: usize| -> &Matrix {
        match hp.update_inputs {
            UpdateInputs::Corrected => prev.corrected_state(i),
            UpdateInputs::Literal => &prev.layers[i].z,
        }
    };

    let mut layers = Vec::with_capacity(m);
    for i in 0..m {
        let lt = &trace.layers[i];
        let err = trace.error_unit(i);
        let ez = trace.state_error(i);
        let below_prev = if i == 0 { x_prev } else { prev_input(i - 1) };
        let self_prev = prev_input(i);
        let above_prev = (i + 1 < m).then(|| prev_input(i + 1));

        let mut dw = outer_mean(err, &lt.z);
        let mut dm = outer_mean(ez, below_prev);
        let mut dv = outer_mean(ez, self_prev);
        let mut du = above_prev.map(|above| outer_mean(ez, above));
        let de = outer_mean(&ez.sub(prev.state_error(i)), err);

        if hp.hebbian_enabled && hp.xi != 0.0 {
            dw.axpy(hp.xi, &hebbian_term(&lt.pred, &lt.z));
            dm.axpy(hp.xi, &hebbian_term(&lt.z, below_prev));
            dv.axpy(hp.xi, &hebbian_term(&lt.z, self_prev));
            if let (Some(du), Some(above)) = (du.as_mut(), above_prev) {
                du.axpy(hp.xi, &hebbian_term(&lt.z, above));
            }
        }

        layers.push(LayerUpdate {
            dw,
            dm,
            dv,
            du,
            de,
            db: ez.column_mean(),
            dc: err.column_mean(),
        });
    }
    Ok(UpdateSet { layers })
}

fn step(param: &mut Matrix, delta: &Matrix, hp: &Hyperparams) {
    let scaled = if hp.always_unit_norm {
        normalize_update_norm(delta)
    } else {
        clip_update_norm(delta)
    };
    param.axpy(-hp.eta, &scaled);
}

/// SGD on norm-rescaled updates, then max-norm projection of the columns of
/// `W`, `M`, `V` and `U`. Error weights and biases are not projected.
pub fn apply_updates(model: &mut PtncnModel, updates: &UpdateSet, hp: &Hyperparams) -> Result<()> {
    if updates.layers.len() != model.num_layers() {
        return Err(Error::shape(
            "apply_updates",
            format!("{} layers", model.num_layers()),
            updates.layers.len(),
        ));
    }
    for (layer, up) in model.layers.iter().zip(&updates.layers) {
        let pairs = [
            (&layer.w, &up.dw),
            (&layer.m, &up.dm),
            (&layer.v, &up.dv),
            (&layer.e, &up.de),
            (&layer.b, &up.db),
            (&layer.c, &up.dc),
        ];
        for (p, d) in pairs {
            if !p.same_shape(d) {
                return Err(Error::shape(
                    "apply_updates",
                    format!("{:?}", p.shape()),
                    format!("{:?}", d.shape()),
                ));
            }
        }
        if layer.u.is_some() != up.du.is_some() {
            return Err(Error::shape("apply_updates", "matching top-down weights", "mismatch"));
        }
    }
    let radius = hp.max_norm_radius;
    let biases = model.cfg.biases;
    for (layer, up) in model.layers.iter_mut().zip(&updates.layers) {
        step(&mut layer.w, &up.dw, hp);
        step(&mut layer.m, &up.dm, hp);
        step(&mut layer.v, &up.dv, hp);
        if let (Some(u), Some(du)) = (layer.u.as_mut(), up.du.as_ref()) {
            step(u, du, hp);
            project_columns_l2_inplace(u, radius);
        }
        step(&mut layer.e, &up.de, hp);
        if biases {
            step(&mut layer.b, &up.db, hp);
            step(&mut layer.c, &up.dc, hp);
        }
        project_columns_l2_inplace(&mut layer.w, radius);
        project_columns_l2_inplace(&mut layer.m, radius);
        project_columns_l2_inplace(&mut layer.v, radius);
    }
    Ok(())
}
