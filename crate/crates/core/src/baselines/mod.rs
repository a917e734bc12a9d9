//! Reference learners: an Elman RNN trained by BPTT, truncated BPTT, RTRL
//! or UORO, and a leaky echo-state network with a trained readout.
//!
//! Every gradient path uses the canonical-link output gradient `y − target`
//! and sums over time steps and batch columns; callers decide on averaging.

pub mod bptt;
pub mod elman;
pub mod esn;
pub mod rtrl;
pub mod uoro;

pub use bptt::{bptt_gradients, final_state, tbptt_gradients};
pub use elman::{
    elman_step, sequence_loss, step_loss, ElmanConfig, ElmanGrads, ElmanModel, Optimizer,
    OptimizerState, ELMAN_PARAM_NAMES,
};
pub use esn::{esn_fit_ridge, esn_step, esn_train_output, EsnConfig, EsnModel};
pub use rtrl::{rtrl_advance, rtrl_gradient, rtrl_step, RtrlCarry};
pub use uoro::{uoro_advance, uoro_gradient, uoro_step, UoroCarry};
