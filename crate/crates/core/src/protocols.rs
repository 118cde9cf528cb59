//! Two-laser EPR resource and the protocols built on it: the Duan
//! inseparability test, dense coding (SNR and Shannon information) and
//! coherent-state teleportation fidelity.
//!
//! Laser 1 is locked at `phi_in = 0` and squeezes the lab `X` quadrature;
//! laser 2 at `phi_in = pi/2` squeezes `Y`. A 50/50 beamsplitter
//! `E1,2 = (S1 +- S2)/sqrt(2)` turns the pair into the resource, so that
//!
//! ```text
//! 2 ((dQ1 + dQ2)^2) = 4 (dX_S1^2),   2 ((dP1 - dP2)^2) = 4 (dY_S2^2)
//! ```

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{solve_steady_state, LaserParams, ModelError, OperatingPoint};
use crate::par::{self, Execution};
use crate::quadrature::{integrate_real_line, QuadOptions, QuadratureError};
use crate::spectra::{external_x, external_y, Form, FrequencyGrid, SpectralCurve, SpectraError};

/// Absolute tolerance of the Shannon-information quadratures.
pub const SMI_ABS_TOL: f64 = 1e-10;
/// Relative bracket width at which the Duan band bisection stops.
pub const BAND_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("the protocol requires two lasers identical except for the injection phase")]
    NonIdenticalLasers,
    #[error("input variance must be positive, got {value:e} at omega = {omega:e}")]
    NonPositiveInputVariance { omega: f64, value: f64 },
    #[error(
        "quadrature did not converge: value {value:e}, error estimate {error:e} \
         after {intervals} intervals / {evaluations} evaluations"
    )]
    QuadratureNonConvergence {
        value: f64,
        error: f64,
        intervals: usize,
        evaluations: usize,
    },
    #[error("invalid dense-coding parameters: {0}")]
    InvalidDenseCoding(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
}

impl From<QuadratureError> for ProtocolError {
    fn from(e: QuadratureError) -> Self {
        match e {
            QuadratureError::NonConvergence {
                value,
                error,
                intervals,
                evaluations,
            } => ProtocolError::QuadratureNonConvergence {
                value,
                error,
                intervals,
                evaluations,
            },
            other => ProtocolError::Spectra(SpectraError::Quadrature(other)),
        }
    }
}

/// Lab-frame external quadrature variances of a laser locked at `phi_in`.
///
/// The laser's own amplitude quadrature points along `phi_in`, and its
/// amplitude and phase fluctuations are uncorrelated, so the lab `X`
/// variance is `cos^2 V_amp + sin^2 V_phase` and vice versa.
pub fn lab_quadrature_variances(op: &OperatingPoint, omega: f64, form: Form) -> (f64, f64) {
    let amp = external_x(op, omega, form);
    let phase = external_y(op, omega);
    let (s, c) = op.params.phi_in().sin_cos();
    let (c2, s2) = (c * c, s * s);
    (c2 * amp + s2 * phase, s2 * amp + c2 * phase)
}

/// Two independently pumped lasers feeding the EPR beamsplitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprSource {
    pub laser1: OperatingPoint,
    pub laser2: OperatingPoint,
    pub identical_params: bool,
}

impl EprSource {
    /// Two copies of `params`, locked at `phi_in = 0` and `pi/2`.
    pub fn symmetric(params: &LaserParams) -> Result<Self, ProtocolError> {
        Self::from_pair(&params.with_phi_in(0.0), &params.with_phi_in(FRAC_PI_2))
    }

    pub fn from_pair(laser1: &LaserParams, laser2: &LaserParams) -> Result<Self, ProtocolError> {
        Ok(EprSource {
            laser1: solve_steady_state(laser1)?,
            laser2: solve_steady_state(laser2)?,
            identical_params: laser1.same_except_phase(laser2),
        })
    }

    fn require_identical(&self) -> Result<(), ProtocolError> {
        if self.identical_params {
            Ok(())
        } else {
            Err(ProtocolError::NonIdenticalLasers)
        }
    }

    pub fn kappa(&self) -> f64 {
        self.laser1.kappa()
    }

    /// `(dX_S1^2)_w`, the squeezed quadrature of laser 1.
    pub fn source_x_variance(&self, omega: f64, form: Form) -> f64 {
        lab_quadrature_variances(&self.laser1, omega, form).0
    }

    /// `(dY_S2^2)_w`, the squeezed quadrature of laser 2.
    pub fn source_y_variance(&self, omega: f64, form: Form) -> f64 {
        lab_quadrature_variances(&self.laser2, omega, form).1
    }
}

// Duan criterion -----------------------------------------------------------

/// `(w^2 + kappa^2 [mu^2/4 + (1 - p)(1 - mu)]) / (w^2 + kappa^2 (1 - mu/2)^2)`.
pub fn duan_closed_form(op: &OperatingPoint, omega: f64) -> f64 {
    let k2 = op.kappa() * op.kappa();
    let mu = op.mu;
    let p = op.pump_p();
    let w2 = omega * omega;
    let num = w2 + k2 * (0.25 * mu * mu + (1.0 - p) * (1.0 - mu));
    let den = w2 + k2 * (1.0 - 0.5 * mu).powi(2);
    num / den
}

/// The saturated combined variance `2((dQ1 + dQ2)^2)_w` on a grid.
pub fn duan_combined_variance(src: &EprSource, grid: &FrequencyGrid) -> Result<SpectralCurve, ProtocolError> {
    src.require_identical()?;
    Ok(SpectralCurve::tabulate("duan", grid, |w| duan_closed_form(&src.laser1, w)))
}

/// Both EPR combinations built from the source spectra at `form`:
/// `4 (dX_S1^2)_w` and `4 (dY_S2^2)_w`.
pub fn duan_combined_variance_general(
    src: &EprSource,
    grid: &FrequencyGrid,
    form: Form,
) -> Result<(SpectralCurve, SpectralCurve), ProtocolError> {
    src.require_identical()?;
    Ok((
        SpectralCurve::tabulate("duan_q", grid, |w| 4.0 * src.source_x_variance(w, form)),
        SpectralCurve::tabulate("duan_p", grid, |w| 4.0 * src.source_y_variance(w, form)),
    ))
}

/// Frequencies at which the combined variance is below threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntangledBand {
    /// The criterion is not met even at `w = 0`.
    Empty,
    /// Entangled on `(-omega_star, omega_star)`.
    Bounded { omega_star: f64 },
    /// Below threshold at every finite frequency; `cap` is the grid edge
    /// reported in place of an infinite band.
    Everywhere { cap: f64 },
}

/// Largest symmetric band where the saturated combined variance is below
/// `threshold`. The variance is monotone in `|w|`; the edge is bisected to
/// [`BAND_REL_TOL`].
pub fn duan_entangled_band(src: &EprSource, threshold: f64, grid: &FrequencyGrid) -> Result<EntangledBand, ProtocolError> {
    src.require_identical()?;
    let op = &src.laser1;
    let f = |w: f64| duan_closed_form(op, w) - threshold;
    let cap = grid.as_slice().iter().fold(0.0f64, |m, w| m.max(w.abs()));
    if f(0.0) >= 0.0 {
        return Ok(EntangledBand::Empty);
    }
    // limit w -> infinity is 1
    if threshold >= 1.0 {
        return Ok(EntangledBand::Everywhere { cap });
    }
    let mut lo = 0.0;
    let mut hi = op.kappa();
    while f(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > BAND_REL_TOL * hi {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EntangledBand::Bounded {
        omega_star: 0.5 * (lo + hi),
    })
}

// Dense coding -------------------------------------------------------------

/// Alice's channel: beamsplitter reflectivity `R`, mean photon flux `P` and
/// Gaussian signal bandwidth `delta_omega_A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseCodingParams {
    #[serde(rename = "reflectivity_R")]
    pub reflectivity_r: f64,
    #[serde(rename = "P")]
    pub photon_flux: f64,
    #[serde(rename = "delta_omega_A")]
    pub delta_omega_a: f64,
}

impl DenseCodingParams {
    pub fn new(reflectivity_r: f64, photon_flux: f64, delta_omega_a: f64) -> Result<Self, ProtocolError> {
        let dc = DenseCodingParams {
            reflectivity_r,
            photon_flux,
            delta_omega_a,
        };
        dc.validate()?;
        Ok(dc)
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidDenseCoding(m));
        if !(self.reflectivity_r > 0.0 && self.reflectivity_r < 1.0) {
            return bad(format!("reflectivity_R must lie in (0, 1), got {}", self.reflectivity_r));
        }
        if !(self.photon_flux >= 0.0 && self.photon_flux.is_finite()) {
            return bad(format!("P must be finite and >= 0, got {}", self.photon_flux));
        }
        if !(self.delta_omega_a > 0.0 && self.delta_omega_a.is_finite()) {
            return bad(format!("delta_omega_A must be positive, got {}", self.delta_omega_a));
        }
        Ok(())
    }

    pub fn transmissivity(&self) -> f64 {
        1.0 - self.reflectivity_r
    }

    /// `d_A = 2 pi delta_omega_A / kappa`.
    pub fn d_a(&self, kappa: f64) -> f64 {
        2.0 * PI * self.delta_omega_a / kappa
    }

    /// `script_P = 2 pi P / kappa`.
    pub fn script_p(&self, kappa: f64) -> f64 {
        2.0 * PI * self.photon_flux / kappa
    }

    /// `sigma^A_w = P / sqrt(pi dw^2 / 2) exp(-w^2 / (dw^2 / 2))`.
    pub fn signal_density(&self, omega: f64) -> f64 {
        gaussian_density(self.photon_flux, self.delta_omega_a, omega)
    }
}

fn gaussian_density(total: f64, width: f64, omega: f64) -> f64 {
    let half_var = 0.5 * width * width;
    total / (PI * half_var).sqrt() * (-omega * omega / half_var).exp()
}

pub fn alice_signal_spectrum(dc: &DenseCodingParams, grid: &FrequencyGrid) -> Result<SpectralCurve, ProtocolError> {
    dc.validate()?;
    Ok(SpectralCurve::tabulate("sigma_A", grid, |w| dc.signal_density(w)))
}

/// `SNR_w = R sigma_w / (R + T 4 (dX_S1^2)_w)` at a single frequency.
pub fn snr_at(src: &EprSource, dc: &DenseCodingParams, omega: f64, form: Form) -> f64 {
    let r = dc.reflectivity_r;
    r * dc.signal_density(omega) / (r + dc.transmissivity() * 4.0 * src.source_x_variance(omega, form))
}

pub fn snr_spectrum(
    src: &EprSource,
    dc: &DenseCodingParams,
    grid: &FrequencyGrid,
    form: Form,
) -> Result<SpectralCurve, ProtocolError> {
    src.require_identical()?;
    dc.validate()?;
    Ok(SpectralCurve::tabulate("snr", grid, |w| snr_at(src, dc, w, form)))
}

/// Saturated SNR written as
/// `R sigma (w^2 + (1 - mu/2)^2 k^2) / (w^2 + (1 - mu/2)^2 k^2 - T p (1 - mu) k^2)`.
pub fn snr_saturated_closed_form(op: &OperatingPoint, dc: &DenseCodingParams, omega: f64) -> f64 {
    let k2 = op.kappa() * op.kappa();
    let mu = op.mu;
    let base = omega * omega + (1.0 - 0.5 * mu).powi(2) * k2;
    let dip = dc.transmissivity() * op.pump_p() * (1.0 - mu) * k2;
    dc.reflectivity_r * dc.signal_density(omega) * base / (base - dip)
}

/// Leading-order `p = 1` form `(w^2 + k^2) / (w^2 + (R + lambda) k^2) R sigma`,
/// `lambda = mu^2 / 4`.
pub fn snr_lambda_form(op: &OperatingPoint, dc: &DenseCodingParams, omega: f64) -> f64 {
    let k2 = op.kappa() * op.kappa();
    let lambda = 0.25 * op.mu * op.mu;
    let w2 = omega * omega;
    (w2 + k2) / (w2 + (dc.reflectivity_r + lambda) * k2) * dc.reflectivity_r * dc.signal_density(omega)
}

/// Shannon information `I = int ln(1 + SNR_w) dw` (nats per unit time) and
/// its two dimensionless normalizations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShannonInformation {
    pub raw: f64,
    /// `2 pi I / kappa`.
    pub two_pi_over_kappa: f64,
    /// `I / kappa`.
    pub over_kappa: f64,
    pub quadrature_error: f64,
}

pub fn shannon_information(src: &EprSource, dc: &DenseCodingParams, form: Form) -> Result<ShannonInformation, ProtocolError> {
    src.require_identical()?;
    dc.validate()?;
    let kappa = src.kappa();
    let scale = dc.delta_omega_a.min(kappa);
    let integral = integrate_real_line(
        |w| snr_at(src, dc, w, form).ln_1p(),
        scale,
        QuadOptions::abs(SMI_ABS_TOL),
    )?;
    Ok(ShannonInformation {
        raw: integral.value,
        two_pi_over_kappa: 2.0 * PI * integral.value / kappa,
        over_kappa: integral.value / kappa,
        quadrature_error: integral.error,
    })
}

/// How the dimensionless SMI variables are tied to physical ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DimensionlessConvention {
    /// `script_P = P / kappa`, `d_A = delta_omega_A / kappa`, `I / kappa`:
    /// the information integral with `kappa = 1`.
    #[default]
    KappaUnit,
    /// `script_P = 2 pi P / kappa`, `d_A = 2 pi delta_omega_A / kappa`,
    /// `2 pi I / kappa`.
    TwoPi,
}

impl DimensionlessConvention {
    /// Cavity linewidth in the scaled frequency variable.
    fn cavity_scale(self) -> f64 {
        match self {
            DimensionlessConvention::KappaUnit => 1.0,
            DimensionlessConvention::TwoPi => 2.0 * PI,
        }
    }
}

/// Inputs of the dimensionless information curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmiParams {
    /// Beamsplitter reflectivity `R`.
    #[serde(rename = "reflectivity_R")]
    pub reflectivity_r: f64,
    #[serde(rename = "script_P")]
    pub script_p: f64,
    /// `lambda = mu^2 / 4`.
    pub lambda: f64,
    /// Pump statistics: 1 regular, 0 Poissonian.
    pub pump_p: f64,
    #[serde(default)]
    pub convention: DimensionlessConvention,
}

impl SmiParams {
    /// Constant of the SNR gain denominator: `R + lambda` at `p = 1` and
    /// `R + T = 1` (no gain) at `p = 0`, linear in `p` between.
    fn gain_floor(&self) -> f64 {
        let p = self.pump_p;
        self.reflectivity_r + p * self.lambda + (1.0 - p) * (1.0 - self.reflectivity_r)
    }

    /// `ln(1 + SNR)` at scaled frequency `u` for bandwidth `d`.
    pub fn integrand(&self, u: f64, d: f64) -> f64 {
        let s2 = self.convention.cavity_scale().powi(2);
        let u2 = u * u;
        let gain = (u2 + s2) / (u2 + s2 * self.gain_floor());
        (gain * self.reflectivity_r * gaussian_density(self.script_p, d, u)).ln_1p()
    }

    fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::InvalidDenseCoding(m));
        if !(self.reflectivity_r > 0.0 && self.reflectivity_r < 1.0) {
            return bad(format!("reflectivity_R must lie in (0, 1), got {}", self.reflectivity_r));
        }
        if !(self.script_p >= 0.0 && self.script_p.is_finite()) {
            return bad(format!("script_P must be finite and >= 0, got {}", self.script_p));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be finite and >= 0, got {}", self.lambda));
        }
        if !(0.0..=1.0).contains(&self.pump_p) {
            return bad(format!("pump p must lie in [0, 1], got {}", self.pump_p));
        }
        Ok(())
    }
}

/// Dimensionless Shannon information at bandwidth `d_a`.
pub fn smi(params: &SmiParams, d_a: f64) -> Result<f64, ProtocolError> {
    params.validate()?;
    if !(d_a > 0.0 && d_a.is_finite()) {
        return Err(ProtocolError::InvalidDenseCoding(format!("d_A must be positive, got {d_a}")));
    }
    let scale = d_a.min(params.convention.cavity_scale());
    let integral = integrate_real_line(|u| params.integrand(u, d_a), scale, QuadOptions::abs(SMI_ABS_TOL))?;
    Ok(integral.value)
}

/// `smi` at every bandwidth, in input order.
pub fn smi_sweep(params: &SmiParams, d_values: &[f64], exec: Execution) -> Result<Vec<(f64, f64)>, ProtocolError> {
    params.validate()?;
    par::try_map_indexed(d_values.len(), exec, |i| smi(params, d_values[i]).map(|v| (d_values[i], v)))
}

/// `d_A,smi` CSV at 17 significant digits.
pub fn smi_sweep_csv(points: &[(f64, f64)]) -> String {
    let (d, v): (Vec<f64>, Vec<f64>) = points.iter().copied().unzip();
    crate::io::two_column_csv(("d_A", "smi"), &d, &v)
}

/// Linear-combination coefficients of one homodyne output beam over
/// `(signal A, vacuum 1, vacuum 2, source S)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OutputField {
    pub signal: f64,
    pub vac1: f64,
    pub vac2: f64,
    pub source: f64,
}

impl OutputField {
    pub fn as_array(&self) -> [f64; 4] {
        [self.signal, self.vac1, self.vac2, self.source]
    }

    /// Sum of all four squared coefficients, every port counted as its own mode.
    pub fn naive_norm(&self) -> f64 {
        self.as_array().iter().map(|c| c * c).sum()
    }

    /// Squared norm over physical modes. The signal is a displacement of the
    /// first vacuum port, so `signal` and `vac1` address one mode and count once.
    pub fn physical_norm(&self) -> f64 {
        self.signal * self.signal + self.vac2 * self.vac2 + self.source * self.source
    }

    /// Noise variance of the measured quadrature in units of the shot-noise
    /// level, given the source quadrature variance and vacuum at `1/4`.
    pub fn noise_variance(&self, source_variance: f64) -> f64 {
        4.0 * (0.25 * self.vac1 * self.vac1 + 0.25 * self.vac2 * self.vac2 + self.source * self.source * source_variance)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DenseCodingFields {
    pub b1: OutputField,
    pub b2: OutputField,
}

/// `B1 = sqrt(R/2)(A + v1 + v2) + sqrt(T) S1`,
/// `B2 = sqrt(R/2)(A + v1 - v2) + sqrt(T) S2`.
pub fn dense_coding_output_fields(dc: &DenseCodingParams) -> Result<DenseCodingFields, ProtocolError> {
    dc.validate()?;
    let a = (0.5 * dc.reflectivity_r).sqrt();
    let t = dc.transmissivity().sqrt();
    Ok(DenseCodingFields {
        b1: OutputField {
            signal: a,
            vac1: a,
            vac2: a,
            source: t,
        },
        b2: OutputField {
            signal: a,
            vac1: a,
            vac2: -a,
            source: t,
        },
    })
}

// Teleportation ------------------------------------------------------------

/// Variances of the state to be teleported.
#[derive(Debug, Clone, PartialEq)]
pub enum InputVariances {
    /// Coherent state, `1/4` in both quadratures.
    Coherent,
    Curves { x: SpectralCurve, y: SpectralCurve },
}

/// `F_w = [1 + (dX_S1^2)/(dX_in^2)]^-1/2 [1 + (dY_S2^2)/(dY_in^2)]^-1/2`
/// from the source spectra at `form`.
pub fn teleport_fidelity_spectrum(
    src: &EprSource,
    input: &InputVariances,
    grid: &FrequencyGrid,
    form: Form,
) -> Result<SpectralCurve, ProtocolError> {
    src.require_identical()?;
    let omega = grid.as_slice();
    let (vx, vy): (Vec<f64>, Vec<f64>) = match input {
        InputVariances::Coherent => (vec![0.25; omega.len()], vec![0.25; omega.len()]),
        InputVariances::Curves { x, y } => {
            if x.omega != omega || y.omega != omega {
                return Err(SpectraError::InvalidGrid("input variance curves must share the output grid".into()).into());
            }
            (x.value.clone(), y.value.clone())
        }
    };
    for (k, &w) in omega.iter().enumerate() {
        for v in [vx[k], vy[k]] {
            if v.is_nan() || v <= 0.0 {
                return Err(ProtocolError::NonPositiveInputVariance { omega: w, value: v });
            }
        }
    }
    let value = omega
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            let fx = 1.0 / (1.0 + src.source_x_variance(w, form) / vx[k]);
            let fy = 1.0 / (1.0 + src.source_y_variance(w, form) / vy[k]);
            (fx * fy).sqrt()
        })
        .collect();
    Ok(SpectralCurve::new("fidelity", omega.to_vec(), value))
}

/// Coherent-input fidelity `1/2 (w^2 + k^2) / (w^2 + k^2 (1 - p/2))`, the
/// saturated form with `mu -> 0`.
pub fn teleport_fidelity_closed_form(op: &OperatingPoint, omega: f64) -> f64 {
    let k2 = op.kappa() * op.kappa();
    let w2 = omega * omega;
    0.5 * (w2 + k2) / (w2 + k2 * (1.0 - 0.5 * op.pump_p()))
}

/// Coherent-input fidelity of the saturated spectra keeping `mu`:
/// `(w^2 + k^2 a) / (2 w^2 + k^2 (a + mu^2/4 + (1 - p)(1 - mu)))`, `a = (1 - mu/2)^2`.
pub fn teleport_fidelity_saturated(op: &OperatingPoint, omega: f64) -> f64 {
    let k2 = op.kappa() * op.kappa();
    let mu = op.mu;
    let p = op.pump_p();
    let w2 = omega * omega;
    let a = (1.0 - 0.5 * mu).powi(2);
    (w2 + k2 * a) / (2.0 * w2 + k2 * (a + 0.25 * mu * mu + (1.0 - p) * (1.0 - mu)))
}
