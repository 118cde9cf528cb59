//! Noise spectra of an injection-locked sub-Poissonian laser, a Monte-Carlo
//! cross-check of those spectra, and the quantum-protocol figures of merit
//! (Duan criterion, dense coding, teleportation) of a two-laser EPR source.
//!
//! ```
//! use sublaser_core::model::{solve_steady_state, LaserParams};
//! use sublaser_core::spectra::{external_x, Form};
//!
//! let params = LaserParams::new(1.0, 0.0313, 0.01, 1e3, 1e3, 1e6, 1.0, 400.0, 0.0).unwrap();
//! let op = solve_steady_state(&params).unwrap();
//! assert!((op.mu - 0.0198).abs() < 1e-4);
//! // amplitude noise far below the shot-noise level 1/4
//! assert!(external_x(&op, 0.0, Form::Saturated) < 1e-4);
//! ```

pub mod certify;
pub mod io;
pub mod langevin;
pub mod model;
pub mod par;
pub mod protocols;
pub mod quadrature;
pub mod spectra;

pub use model::{solve_steady_state, validate_regime, LaserParams, ModelError, OperatingPoint};
pub use par::Execution;

use thiserror::Error;

/// Any library failure, with a stable machine-readable code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] spectra::SpectraError),
    #[error(transparent)]
    Sim(#[from] langevin::SimError),
    #[error(transparent)]
    Protocol(#[from] protocols::ProtocolError),
}

/// Whether a failure is the caller's fault or a numerical breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Numerical,
}

impl Error {
    pub fn code(&self) -> &'static str {
        use langevin::{NoiseError, SimError};
        use protocols::ProtocolError as P;
        use spectra::SpectraError as S;
        fn spectra_code(e: &S) -> &'static str {
            match e {
                S::EmptyGrid => "empty_grid",
                S::InvalidGrid(_) => "invalid_grid",
                S::PhaseDiffusionDivergence => "phase_diffusion_divergence",
                S::SingularSystem { .. } => "singular_system",
                S::UnstableDrift { .. } => "unstable_drift",
                S::Noise(n) => noise_code(n),
                S::Quadrature(_) => "quadrature_non_convergence",
            }
        }
        fn noise_code(e: &NoiseError) -> &'static str {
            match e {
                NoiseError::NotPositiveSemidefinite { .. } => "noise_not_psd",
                NoiseError::NotSymmetric { .. } => "noise_not_symmetric",
                NoiseError::NonFinite => "noise_non_finite",
            }
        }
        fn model_code(e: &ModelError) -> &'static str {
            match e {
                ModelError::NonPositiveRate { .. } => "non_positive_rate",
                ModelError::PumpStatistics(_) => "pump_statistics",
                ModelError::NegativeInjection(_) => "negative_injection",
                ModelError::NonFinite { .. } => "non_finite_parameter",
                ModelError::NoLasing => "no_lasing",
            }
        }
        match self {
            Error::Model(e) => model_code(e),
            Error::Spectra(e) => spectra_code(e),
            Error::Sim(e) => match e {
                SimError::UnstableDrift { .. } => "unstable_drift",
                SimError::StepTooLarge { .. } => "step_too_large",
                SimError::DurationTooShort { .. } => "duration_too_short",
                SimError::InvalidConfig(_) => "invalid_sim_config",
                SimError::SingularLyapunov => "singular_lyapunov",
                SimError::Noise(n) => noise_code(n),
            },
            Error::Protocol(e) => match e {
                P::NonIdenticalLasers => "non_identical_lasers",
                P::NonPositiveInputVariance { .. } => "non_positive_input_variance",
                P::QuadratureNonConvergence { .. } => "quadrature_non_convergence",
                P::InvalidDenseCoding(_) => "invalid_dense_coding",
                P::Model(m) => model_code(m),
                P::Spectra(s) => spectra_code(s),
            },
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self.code() {
            "singular_system" | "unstable_drift" | "quadrature_non_convergence" | "singular_lyapunov"
            | "noise_not_psd" | "noise_non_finite" | "noise_not_symmetric" => ErrorKind::Numerical,
            _ => ErrorKind::Validation,
        }
    }
}
