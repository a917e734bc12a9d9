use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

/// Element-wise (or, for softmax, column-wise) nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivationKind {
    Identity,
    Tanh,
    Sigmoid,
    Relu,
    /// `sign(x)` with `sign(0) = 0`.
    Signum,
    /// Normalizes each column to a probability vector.
    Softmax,
}

thread_local! {
    static DERIVATIVE_EVALS: Cell<u64> = const { Cell::new(0) };
}

/// Number of activation-derivative evaluations made on the current thread.
///
/// Only the gradient-based baselines call [`ActivationKind::derivative_from_output`];
/// the predictive-coding path never does, and tests check that through this counter.
pub fn derivative_evaluations() -> u64 {
    DERIVATIVE_EVALS.with(|c| c.get())
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn signum(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

impl ActivationKind {
    pub fn apply(self, x: &Matrix) -> Matrix {
        match self {
            ActivationKind::Identity => x.clone(),
            ActivationKind::Tanh => x.map(f64::tanh),
            ActivationKind::Sigmoid => x.map(sigmoid),
            ActivationKind::Relu => x.map(|v| v.max(0.0)),
            ActivationKind::Signum => x.map(signum),
            ActivationKind::Softmax => softmax_columns(x),
        }
    }

    /// Derivative `φ'(a)` expressed through the output `φ(a)`, for the
    /// element-wise differentiable kinds. Softmax is only used as an output
    /// head paired with cross entropy and has no element-wise derivative here.
    pub fn derivative_from_output(self, out: &Matrix) -> Result<Matrix> {
        DERIVATIVE_EVALS.with(|c| c.set(c.get() + 1));
        match self {
            ActivationKind::Identity => Ok(Matrix::filled(out.rows(), out.cols(), 1.0)),
            ActivationKind::Tanh => Ok(out.map(|z| 1.0 - z * z)),
            ActivationKind::Sigmoid => Ok(out.map(|z| z * (1.0 - z))),
            ActivationKind::Relu => Ok(out.map(|z| if z > 0.0 { 1.0 } else { 0.0 })),
            ActivationKind::Signum | ActivationKind::Softmax => Err(Error::Config(format!(
                "{self:?} has no element-wise derivative"
            ))),
        }
    }

    pub fn is_differentiable(self) -> bool {
        !matches!(self, ActivationKind::Signum | ActivationKind::Softmax)
    }
}

fn softmax_columns(x: &Matrix) -> Matrix {
    let (rows, cols) = x.shape();
    let mut out = Matrix::zeros(rows, cols);
    for c in 0..cols {
        let mut max = f64::NEG_INFINITY;
        for r in 0..rows {
            max = max.max(x.get(r, c));
        }
        let mut total = 0.0;
        for r in 0..rows {
            let e = (x.get(r, c) - max).exp();
            out.set(r, c, e);
            total += e;
        }
        for r in 0..rows {
            out.set(r, c, out.get(r, c) / total);
        }
    }
    out
}

/// Applies `kind` to `x`.
pub fn apply_activation(kind: ActivationKind, x: &Matrix) -> Matrix {
    kind.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn signum_has_zero_at_zero() {
        let x = Matrix::column(&[-2.0, 0.0, 3.0]);
        assert_eq!(
            apply_activation(ActivationKind::Signum, &x).as_slice(),
            &[-1.0, 0.0, 1.0]
        );
    }

    #[test]
    fn identity_and_tanh_at_origin() {
        let x = Matrix::column(&[0.3, -1.2]);
        assert_eq!(apply_activation(ActivationKind::Identity, &x), x);
        let z = Matrix::column(&[0.0]);
        assert_eq!(apply_activation(ActivationKind::Tanh, &z).as_slice(), &[0.0]);
    }

    #[test]
    fn softmax_columns_sum_to_one() {
        let x = Matrix::from_rows(&[&[1.0, -500.0], &[2.0, 700.0], &[3.0, 0.0]]);
        let p = apply_activation(ActivationKind::Softmax, &x);
        for c in 0..2 {
            let s: f64 = p.col(c).iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn signum_derivative_is_refused() {
        let z = Matrix::column(&[1.0]);
        assert!(ActivationKind::Signum.derivative_from_output(&z).is_err());
    }

    #[test]
    fn derivative_counter_is_thread_local() {
        let before = derivative_evaluations();
        ActivationKind::Tanh
            .derivative_from_output(&Matrix::column(&[0.5]))
            .unwrap();
        assert_eq!(derivative_evaluations(), before + 1);
        let other = std::thread::spawn(derivative_evaluations).join().unwrap();
        assert_eq!(other, 0);
    }

    proptest! {
        #[test]
        fn elementwise_kinds_are_monotone(a in -50.0f64..50.0, d in 0.0f64..10.0) {
            for kind in [
                ActivationKind::Identity,
                ActivationKind::Tanh,
                ActivationKind::Sigmoid,
                ActivationKind::Relu,
                ActivationKind::Signum,
            ] {
                let lo = kind.apply(&Matrix::column(&[a])).get(0, 0);
                let hi = kind.apply(&Matrix::column(&[a + d])).get(0, 0);
                prop_assert!(lo <= hi, "{kind:?} not monotone at {a} + {d}");
            }
        }
    }
}
