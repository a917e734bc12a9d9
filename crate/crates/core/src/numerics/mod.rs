//! Dense linear algebra, seeded generation, activations and norm utilities.

mod activation;
mod matrix;
mod rng;

pub use activation::{apply_activation, derivative_evaluations, ActivationKind};
pub use matrix::{gemm, Matrix};
pub use rng::{mix_seed, Rng, RngState};

use crate::error::{Error, Result};

/// Matrix with i.i.d. `N(0, variance)` entries drawn row-major from `rng`.
pub fn gaussian_init(rows: usize, cols: usize, variance: f64, rng: &mut Rng) -> Matrix {
    assert!(variance >= 0.0, "variance must be non-negative");
    if variance == 0.0 {
        return Matrix::zeros(rows, cols);
    }
    let std = variance.sqrt();
    let mut m = Matrix::zeros(rows, cols);
    for v in m.as_mut_slice() {
        *v = std * rng.standard_normal();
    }
    m
}

/// Rescales `update` to unit Frobenius norm when its norm exceeds one.
pub fn clip_update_norm(update: &Matrix) -> Matrix {
    let norm = update.frobenius_norm();
    if norm > 1.0 {
        update.scale(1.0 / norm)
    } else {
        update.clone()
    }
}

/// Rescales `update` to unit Frobenius norm unconditionally (zero stays zero).
pub fn normalize_update_norm(update: &Matrix) -> Matrix {
    let norm = update.frobenius_norm();
    if norm > 0.0 {
        update.scale(1.0 / norm)
    } else {
        update.clone()
    }
}

/// Projects every column onto the L2 ball of the given radius.
pub fn project_columns_l2(w: &Matrix, radius: f64) -> Matrix {
    let mut out = w.clone();
    project_columns_l2_inplace(&mut out, radius);
    out
}

pub fn project_columns_l2_inplace(w: &mut Matrix, radius: f64) {
    assert!(radius > 0.0, "radius must be positive");
    for c in 0..w.cols() {
        let norm = w.column_norm(c);
        if norm > radius {
            let s = radius / norm;
            for r in 0..w.rows() {
                let v = w.get(r, c);
                w.set(r, c, v * s);
            }
        }
    }
}

const GELFAND_SQUARINGS: u32 = 40;

/// Spectral radius from Gelfand's formula `ρ = lim ‖Aᵏ‖^(1/k)`, evaluated at
/// `k = 2^40` by repeated squaring with renormalization.
pub fn spectral_radius(w: &Matrix) -> Result<f64> {
    if w.rows() != w.cols() {
        return Err(Error::shape(
            "spectral_radius",
            "square matrix",
            format!("{}x{}", w.rows(), w.cols()),
        ));
    }
    let mut a = w.clone();
    // A^(2^j) = exp(log_scale) * a
    let mut log_scale = 0.0f64;
    let mut estimate = f64::NEG_INFINITY;
    for j in 0..=GELFAND_SQUARINGS {
        let norm = a.frobenius_norm();
        if norm == 0.0 || !norm.is_finite() {
            if j == 0 || norm == 0.0 {
                return Err(Error::Numerical(
                    "spectral radius is zero; rescale undefined".into(),
                ));
            }
            break;
        }
        a.scale_inplace(1.0 / norm);
        log_scale += norm.ln();
        estimate = log_scale / 2f64.powi(j as i32);
        if j < GELFAND_SQUARINGS {
            a = a.dot(&a);
            log_scale *= 2.0;
        }
    }
    Ok(estimate.exp())
}

/// Scales a square matrix so its spectral radius equals `target`.
pub fn spectral_radius_rescale(w: &Matrix, target: f64) -> Result<Matrix> {
    if target <= 0.0 {
        return Err(Error::Config("target spectral radius must be positive".into()));
    }
    let rho = spectral_radius(w)?;
    if rho < 1e-300 {
        return Err(Error::Numerical(
            "spectral radius is zero; rescale undefined".into(),
        ));
    }
    Ok(w.scale(target / rho))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::numerics::Rng;

    #[test]
    fn zero_variance_init_is_zero() {
        let m = gaussian_init(2, 2, 0.0, &mut Rng::new(5));
        assert_eq!(m, Matrix::zeros(2, 2));
    }

    #[test]
    fn gaussian_init_moments() {
        // 1e6 draws: std error of the mean is sqrt(0.025/1e6) = 1.6e-4, of the
        // variance sqrt(2)*0.025/1e3 = 3.5e-5.
        let m = gaussian_init(1000, 1000, 0.025, &mut Rng::new(7));
        let n = m.len() as f64;
        let mean = m.sum() / n;
        let var = m.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.001, "mean {mean}");
        assert!((var - 0.025).abs() < 0.002, "var {var}");
    }

    #[test]
    fn gaussian_init_is_deterministic() {
        let a = gaussian_init(4, 3, 0.025, &mut Rng::new(11));
        let b = gaussian_init(4, 3, 0.025, &mut Rng::new(11));
        assert!(a
            .as_slice()
            .iter()
            .zip(b.as_slice())
            .all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_update_norm(&Matrix::zeros(2, 1)), Matrix::zeros(2, 1));
        let c = clip_update_norm(&Matrix::column(&[3.0, 4.0]));
        assert!((c.get(0, 0) - 0.6).abs() < 1e-15 && (c.get(1, 0) - 0.8).abs() < 1e-15);
        let small = Matrix::column(&[0.3, 0.4]);
        assert_eq!(clip_update_norm(&small), small);
        let n = normalize_update_norm(&small);
        assert!((n.frobenius_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn projection_examples() {
        let w = Matrix::from_rows(&[&[24.0, 1.0, 0.0], &[32.0, 2.0, 0.0]]);
        let p = project_columns_l2(&w, 30.0);
        assert!((p.get(0, 0) - 18.0).abs() < 1e-12);
        assert!((p.get(1, 0) - 24.0).abs() < 1e-12);
        assert_eq!(p.col(1), vec![1.0, 2.0]);
        assert_eq!(p.col(2), vec![0.0, 0.0]);
    }

    #[test]
    fn rescale_diagonal() {
        let w = Matrix::diag(&[2.0, 1.0]);
        let r = spectral_radius_rescale(&w, 0.9).unwrap();
        assert!((r.get(0, 0) - 0.9).abs() < 1e-9);
        assert!((r.get(1, 1) - 0.45).abs() < 1e-9);
        assert_eq!(r.get(0, 1), 0.0);
    }

    #[test]
    fn rescale_at_target_is_identity() {
        let w = Matrix::diag(&[0.9, -0.3, 0.1]);
        let r = spectral_radius_rescale(&w, 0.9).unwrap();
        assert!(r.sub(&w).max_abs() < 1e-9);
    }

    #[test]
    fn rescale_errors() {
        assert!(spectral_radius_rescale(&Matrix::zeros(3, 3), 0.9).is_err());
        assert!(spectral_radius_rescale(&Matrix::zeros(2, 3), 0.9).is_err());
        let nilpotent = Matrix::from_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(spectral_radius_rescale(&nilpotent, 0.9).is_err());
    }

    #[test]
    fn spectral_radius_matches_eigen_oracle() {
        for seed in 0..5 {
            let w = gaussian_init(30, 30, 1.0 / 30.0, &mut Rng::new(seed));
            let est = spectral_radius(&w).unwrap();
            let na = nalgebra::DMatrix::from_row_slice(30, 30, w.as_slice());
            let exact = na
                .complex_eigenvalues()
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
            assert!((est - exact).abs() < 1e-8 * exact.max(1.0), "{est} vs {exact}");
        }
    }

    proptest! {
        #[test]
        fn clip_never_increases_norm(v in proptest::collection::vec(-10.0f64..10.0, 1..12)) {
            let m = Matrix::column(&v);
            let c = clip_update_norm(&m);
            let n_in = m.frobenius_norm();
            let n_out = c.frobenius_norm();
            prop_assert!(n_out <= n_in + 1e-12);
            prop_assert!(n_out <= 1.0f64.max(n_in) + 1e-12);
            prop_assert!(n_out <= 1.0 + 1e-12);
        }

        #[test]
        fn projection_is_idempotent(v in proptest::collection::vec(-50.0f64..50.0, 12), radius in 0.5f64..40.0) {
            let m = Matrix::from_vec(3, 4, v).unwrap();
            let once = project_columns_l2(&m, radius);
            let twice = project_columns_l2(&once, radius);
            prop_assert!(once.sub(&twice).max_abs() <= 1e-12 * radius);
            for c in 0..4 {
                prop_assert!(once.column_norm(c) <= radius * (1.0 + 1e-12));
            }
        }
    }
}
