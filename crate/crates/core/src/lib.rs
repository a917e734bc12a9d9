//! Online sequence learning without graph unrolling.
//!
//! The centerpiece is [`ptncn`], a parallel temporal neural coding network:
//! a stack of loosely coupled recurrent layers in which every layer predicts
//! the state of the layer below from quantities of the previous time step,
//! corrects its own state from the resulting error units, and learns with
//! purely local rules. No activation derivative is ever evaluated, so
//! non-differentiable units such as `signum` train as easily as `tanh`.
//!
//! Alongside it live exact and approximate online baselines for an Elman
//! network ([`baselines`]: BPTT, truncated BPTT, RTRL, UORO) and an echo
//! state network, deterministic data sources ([`datagen`]), and the
//! experiment machinery ([`harness`]) for prequential training, zero-shot
//! adaptation, continual learning, scaling benchmarks and checkpoints.
//! [`cli`] wires all of it to the `tncn` binary.

pub mod baselines;
pub mod cli;
pub mod datagen;
pub mod error;
pub mod harness;
pub mod numerics;
pub mod ptncn;

pub use error::{Error, Result};
pub use numerics::{ActivationKind, Matrix, Rng};
