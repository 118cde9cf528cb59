//! Monte-Carlo integration of the linearized Langevin equations and the
//! spectral estimators used to compare them with the closed forms.

pub mod lyapunov;
pub mod noise;
pub mod sim;
pub mod welch;

use nalgebra::Matrix3;
use serde::Serializer;
use thiserror::Error;

use crate::spectra::SpectraError;
pub use lyapunov::{solve_continuous_lyapunov, stationary_covariance, stationary_covariance_of};
pub use noise::{build_noise_covariance, NoiseCovariance, NoiseError};
pub use welch::WelchAccumulator;
pub use sim::{simulate, simulate_model, Integrator, SimConfig, SimResult};
pub use welch::{WelchPlan, Window};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("drift has an eigenvalue with non-negative real part ({re:e} + {im:e}i)")]
    UnstableDrift { re: f64, im: f64 },
    #[error("time step {dt:e} exceeds the stability guard {limit:e} (0.01 / fastest rate)")]
    StepTooLarge { dt: f64, limit: f64 },
    #[error("duration {duration:e} is shorter than 50 periods of the locking line ({required:e})")]
    DurationTooShort { duration: f64, required: f64 },
    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),
    #[error("Lyapunov system is singular")]
    SingularLyapunov,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

impl From<SpectraError> for SimError {
    fn from(e: SpectraError) -> Self {
        match e {
            SpectraError::UnstableDrift { re, im } => SimError::UnstableDrift { re, im },
            SpectraError::Noise(n) => SimError::Noise(n),
            other => SimError::InvalidConfig(other.to_string()),
        }
    }
}

/// Lower-triangular factor of a symmetric positive semidefinite matrix.
/// Directions with (numerically) zero variance get a zero column.
pub fn psd_cholesky(m: &Matrix3<f64>) -> Matrix3<f64> {
    let scale = m.diagonal().max().max(0.0);
    let mut l = Matrix3::zeros();
    for j in 0..3 {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 1e-14 * scale {
            continue;
        }
        let pivot = d.sqrt();
        l[(j, j)] = pivot;
        for i in j + 1..3 {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / pivot;
        }
    }
    l
}

pub(crate) fn serialize_matrix3<S: Serializer>(m: &Matrix3<f64>, s: S) -> Result<S::Ok, S::Error> {
    let rows: [[f64; 3]; 3] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    serde::Serialize::serialize(&rows, s)
}
