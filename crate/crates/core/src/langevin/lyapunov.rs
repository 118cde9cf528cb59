//! Stationary covariance of a stable linear SDE `dv = A v dt + dW`,
//! `<dW dW^T> = Q dt`, from `A C + C A^T + Q = 0`.

use nalgebra::{Matrix3, SMatrix, SVector};

use super::SimError;
use crate::model::OperatingPoint;
use crate::spectra::TransferModel;

/// Solves `A X + X A^T + Q = 0` through its 9x9 Kronecker form. The result is
/// symmetrized.
///
/// The state is rescaled by the square roots of `diag(Q)` first, which keeps
/// the system well conditioned when the components live on very different
/// scales (field quadratures vs. population).
pub fn solve_continuous_lyapunov(a: &Matrix3<f64>, q: &Matrix3<f64>) -> Result<Matrix3<f64>, SimError> {
    let scale: [f64; 3] = std::array::from_fn(|i| {
        let d = q[(i, i)].abs().sqrt();
        if d > 0.0 && d.is_finite() {
            d
        } else {
            1.0
        }
    });
    // v = D w  =>  A_w = D^-1 A D,  Q_w = D^-1 Q D^-1
    let a_w = Matrix3::from_fn(|i, j| a[(i, j)] * scale[j] / scale[i]);
    let q_w = Matrix3::from_fn(|i, j| q[(i, j)] / (scale[i] * scale[j]));

    let mut k = SMatrix::<f64, 9, 9>::zeros();
    for j in 0..3 {
        for i in 0..3 {
            let row = 3 * j + i;
            for m in 0..3 {
                // (A X)_{ij} = sum_m A_im X_mj
                k[(row, 3 * j + m)] += a_w[(i, m)];
                // (X A^T)_{ij} = sum_m X_im A_jm
                k[(row, 3 * m + i)] += a_w[(j, m)];
            }
        }
    }
    let rhs = SVector::<f64, 9>::from_fn(|r, _| -q_w[(r % 3, r / 3)]);
    let sol = k.lu().solve(&rhs).ok_or(SimError::SingularLyapunov)?;
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(SimError::SingularLyapunov);
    }
    let x_w = Matrix3::from_fn(|i, j| sol[3 * j + i]);
    let x_w = 0.5 * (x_w + x_w.transpose());
    Ok(Matrix3::from_fn(|i, j| x_w[(i, j)] * scale[i] * scale[j]))
}

pub fn stationary_covariance_of(model: &TransferModel) -> Result<Matrix3<f64>, SimError> {
    model.ensure_stable()?;
    solve_continuous_lyapunov(&model.drift, model.noise.matrix())
}

/// Equal-time covariance of `(dx, dy, dN1)` at an operating point.
pub fn stationary_covariance(op: &OperatingPoint) -> Result<Matrix3<f64>, SimError> {
    stationary_covariance_of(&TransferModel::from_operating_point(op)?)
}
