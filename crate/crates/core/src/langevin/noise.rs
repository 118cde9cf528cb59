//! Symmetrized white-noise covariance of the Langevin sources `(xi_x, xi_y, xi_N)`.
//!
//! The quantum cross-correlators between `xi_y` and the other two sources are
//! purely imaginary and drop out of the symmetric part, so a real c-number
//! process can only carry the table below:
//!
//! ```text
//! (x,x) = (y,y) = kappa/2 (1 - mu/2)
//! (x,N)         = -kappa/2 (1 - mu) sqrt(n)
//! (N,N)         = kappa (1 - mu) Gamma1 (2 - p) / c
//! (x,y) = (y,N) = 0
//! ```
//!
//! Entries are coefficients of `delta(t - t')`: `<xi_i(t) xi_j(t')> = S_ij delta(t - t')`.

use nalgebra::{Matrix3, SymmetricEigen};
use serde::Serialize;
use thiserror::Error;

use crate::model::OperatingPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("noise covariance is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPositiveSemidefinite { eigenvalue: f64 },
    #[error("noise covariance is not symmetric: ({row},{col}) differs from its transpose")]
    NotSymmetric { row: usize, col: usize },
    #[error("noise covariance has a non-finite entry")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseCovariance {
    #[serde(serialize_with = "crate::langevin::serialize_matrix3")]
    matrix: Matrix3<f64>,
}

impl NoiseCovariance {
    pub fn zero() -> Self {
        NoiseCovariance {
            matrix: Matrix3::zeros(),
        }
    }

    /// Checks symmetry (to one ulp of the larger entry) and positive
    /// semidefiniteness (smallest eigenvalue >= -1e-12 trace).
    pub fn from_matrix(matrix: Matrix3<f64>) -> Result<Self, NoiseError> {
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(NoiseError::NonFinite);
        }
        for row in 0..3 {
            for col in row + 1..3 {
                let (a, b) = (matrix[(row, col)], matrix[(col, row)]);
                if (a - b).abs() > f64::EPSILON * a.abs().max(b.abs()) {
                    return Err(NoiseError::NotSymmetric { row, col });
                }
            }
        }
        let sym = 0.5 * (matrix + matrix.transpose());
        let min_eig = SymmetricEigen::new(sym).eigenvalues.min();
        if min_eig < -1e-12 * sym.trace().abs() {
            return Err(NoiseError::NotPositiveSemidefinite { eigenvalue: min_eig });
        }
        Ok(NoiseCovariance { matrix: sym })
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        SymmetricEigen::new(self.matrix).eigenvalues.min()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|v| *v == 0.0)
    }

    /// Lower-triangular `L` with `L L^T = S`. Semidefinite directions get a
    /// zero column instead of failing.
    pub fn cholesky_factor(&self) -> Matrix3<f64> {
        super::psd_cholesky(&self.matrix)
    }
}

/// The symmetric source table in terms of the operating-point quantities.
pub fn noise_covariance_matrix(
    kappa: f64,
    mu: f64,
    n: f64,
    c: f64,
    gamma1_eff: f64,
    p: f64,
) -> Matrix3<f64> {
    let xx = 0.5 * kappa * (1.0 - 0.5 * mu);
    let xn = -0.5 * kappa * (1.0 - mu) * n.sqrt();
    let nn = kappa * (1.0 - mu) * gamma1_eff * (2.0 - p) / c;
    Matrix3::new(
        xx, 0.0, xn, //
        0.0, xx, 0.0, //
        xn, 0.0, nn,
    )
}

pub fn build_noise_covariance(op: &OperatingPoint) -> Result<NoiseCovariance, NoiseError> {
    NoiseCovariance::from_matrix(noise_covariance_matrix(
        op.kappa(),
        op.mu,
        op.n,
        op.c,
        op.gamma1_eff,
        op.pump_p(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Eigenvalues of a symmetric 3x3 matrix through the characteristic
    /// cubic (trigonometric form), independent of nalgebra's eigensolver.
    fn cubic_eigenvalues(m: &Matrix3<f64>) -> [f64; 3] {
        let p1 = m[(0, 1)].powi(2) + m[(0, 2)].powi(2) + m[(1, 2)].powi(2);
        let q = m.trace() / 3.0;
        let p2 = (m[(0, 0)] - q).powi(2) + (m[(1, 1)] - q).powi(2) + (m[(2, 2)] - q).powi(2) + 2.0 * p1;
        let p = (p2 / 6.0).sqrt();
        if p == 0.0 {
            return [q; 3];
        }
        let b = (m - Matrix3::identity() * q) / p;
        let r = (b.determinant() / 2.0).clamp(-1.0, 1.0);
        let phi = r.acos() / 3.0;
        let e1 = q + 2.0 * p * phi.cos();
        let e3 = q + 2.0 * p * (phi + 2.0 * std::f64::consts::PI / 3.0).cos();
        [e1, 3.0 * q - e1 - e3, e3]
    }

    #[test]
    fn regular_pump_free_running_table() {
        // kappa = 1, mu = 0, p = 1, n = 1e6, Gamma1 = c n
        let c = 2e-5;
        let m = noise_covariance_matrix(1.0, 0.0, 1e6, c, c * 1e6, 1.0);
        let expect = Matrix3::new(0.5, 0.0, -500.0, 0.0, 0.5, 0.0, -500.0, 0.0, 1e6);
        assert!((m - expect).abs().max() < 1e-9);
        let xn_det = m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)];
        assert!((xn_det - 2.5e5).abs() < 1e-6);
        let eig = cubic_eigenvalues(&m);
        assert!(eig.iter().all(|e| *e > 0.0), "{eig:?}");
        // the (x, N) block's small eigenvalue, in the cancellation-free form det / lambda_max
        let tr = m[(0, 0)] + m[(2, 2)];
        let block_min = xn_det / (0.5 * (tr + (tr * tr - 4.0 * xn_det).sqrt()));
        let nc = NoiseCovariance::from_matrix(m).unwrap();
        let min = block_min.min(m[(1, 1)]);
        assert!((nc.min_eigenvalue() - min).abs() < 1e-9 * min, "{} vs {min}", nc.min_eigenvalue());
    }

    #[test]
    fn poisson_pump_has_larger_margin() {
        let c = 2e-5;
        let regular = noise_covariance_matrix(1.0, 0.0, 1e6, c, c * 1e6, 1.0);
        let poisson = noise_covariance_matrix(1.0, 0.0, 1e6, c, c * 1e6, 0.0);
        assert!((poisson[(2, 2)] - 2e6).abs() < 1e-6);
        let min_r = cubic_eigenvalues(&regular).iter().cloned().fold(f64::INFINITY, f64::min);
        let min_p = cubic_eigenvalues(&poisson).iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(min_p > min_r && min_r > 0.0);
    }

    #[test]
    fn full_injection_is_diagonal() {
        let m = noise_covariance_matrix(1.0, 1.0, 1e6, 2e-5, 20.0, 1.0);
        assert_eq!(m, Matrix3::from_diagonal(&nalgebra::Vector3::new(0.25, 0.25, 0.0)));
        let nc = NoiseCovariance::from_matrix(m).unwrap();
        let l = nc.cholesky_factor();
        assert!((l * l.transpose() - m).abs().max() < 1e-15);
    }

    #[test]
    fn super_poissonian_guard() {
        // p > 1 is rejected upstream; the guard still catches the indefinite table
        let c = 2e-5;
        let m = noise_covariance_matrix(1.0, 0.0, 1e6, c, c * 1e6, 1.9);
        assert!(matches!(
            NoiseCovariance::from_matrix(m),
            Err(NoiseError::NotPositiveSemidefinite { .. })
        ));
    }

    #[test]
    fn cholesky_reconstructs() {
        let c = 3e-6;
        let m = noise_covariance_matrix(2.0, 0.03, 4e6, c, 0.5 + c * 4e6, 0.7);
        let nc = NoiseCovariance::from_matrix(m).unwrap();
        let l = nc.cholesky_factor();
        assert_eq!(l[(0, 1)], 0.0);
        assert!((l * l.transpose() - m).abs().max() <= 1e-12 * m.abs().max());
    }

    #[test]
    fn asymmetric_rejected() {
        let mut m = Matrix3::identity();
        m[(0, 2)] = 0.1;
        assert!(matches!(
            NoiseCovariance::from_matrix(m),
            Err(NoiseError::NotSymmetric { row: 0, col: 2 })
        ));
    }
}
