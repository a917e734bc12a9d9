//! Parallel temporal neural coding network.
//!
//! A P-TNCN with `m` hidden layers is a stack of small recurrent networks.
//! At each step every layer `ℓ` forms its pre-activation from the corrected
//! states of itself and its neighbours at `t−1`,
//!
//! ```text
//! a_ℓ = U_ℓ·y_{ℓ+1}(t−1) + V_ℓ·y_ℓ(t−1) + M_ℓ·y_{ℓ−1}(t−1)      (y_0 = x_{t−1})
//! z_ℓ = φ_z(a_ℓ)            z_{ℓ−1,o} = φ_o(W_ℓ·z_ℓ)
//! ```
//!
//! and guesses the state of the layer below. Once `x_t` is observed, the
//! error units `e_{ℓ−1} = z_{ℓ−1,o} − z_{ℓ−1}` are fed back through the
//! error weights `E_ℓ` to correct every state,
//!
//! ```text
//! y_ℓ = φ_z(a_ℓ − (β·E_ℓ·e_{ℓ−1} − γ·e_ℓ − λ·sign(z_ℓ)))
//! ```
//!
//! (the `γ` term is absent on the top layer) and the weights follow local
//! rules built from outer products of error units and presynaptic activity.
//! See [`step`] and [`update`].

pub mod model;
pub mod step;
pub mod update;

pub use model::{
    build_model, Hyperparams, Layer, OutputLikelihood, PtncnConfig, PtncnModel, SparsitySign,
    UpdateInputs,
};
pub use step::{
    compute_total_discrepancy, correct_step, correct_step_parallel, predict_step,
    predict_step_parallel, reset_state, skip_correction, LayerTrace, StepTrace,
};
pub use update::{apply_updates, compute_updates, hebbian_term, LayerUpdate, UpdateSet};
