//! Closed-form quadrature noise spectra of the locked laser and the general
//! transfer-matrix spectrum they are checked against.
//!
//! Two evaluation forms are kept side by side:
//!
//! * [`Form::Full`] keeps `Gamma1 = gamma1 + c n` and all frequency
//!   dependence of the coupled amplitude/population response.
//! * [`Form::Saturated`] takes `gamma1 << c n` and `omega << c n`, which
//!   collapses the response to a single Lorentzian of half-width
//!   `kappa (1 - mu/2)`.
//!
//! Frequencies are angular. Symmetric-ordering variances are "spectral
//! variances" in the delta-normalized sense: `<v_w v_w'> = (v^2)_w delta(w + w')`,
//! so the stationary variance is `1/(2 pi)` times their integral.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::io;
use crate::langevin::noise::{build_noise_covariance, NoiseCovariance, NoiseError};
use crate::model::OperatingPoint;
use crate::par::{self, Execution};
use crate::quadrature::{integrate_real_line, QuadOptions, QuadratureError};

pub type C64 = Complex<f64>;

/// Largest tolerated 1-norm condition number of `drift - i omega I`.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectraError {
    #[error("frequency grid is empty")]
    EmptyGrid,
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("phase diffusion is unbounded (mu = 0) and the grid contains omega = 0")]
    PhaseDiffusionDivergence,
    #[error("drift - i omega I is numerically singular at omega = {omega:e} (condition {condition:e})")]
    SingularSystem { omega: f64, condition: f64 },
    #[error("drift has an eigenvalue with non-negative real part ({re:e} + {im:e}i)")]
    UnstableDrift { re: f64, im: f64 },
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Which approximation level a closed form is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    #[default]
    Full,
    Saturated,
}

/// Strictly increasing, finite, non-empty list of angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(omega: Vec<f64>) -> Result<Self, SpectraError> {
        if omega.is_empty() {
            return Err(SpectraError::EmptyGrid);
        }
        if let Some(i) = omega.iter().position(|w| !w.is_finite()) {
            return Err(SpectraError::InvalidGrid(format!("omega[{i}] is not finite")));
        }
        if let Some(i) = omega.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SpectraError::InvalidGrid(format!(
                "omega must be strictly increasing (omega[{}] = {}, omega[{}] = {})",
                i,
                omega[i],
                i + 1,
                omega[i + 1]
            )));
        }
        Ok(FrequencyGrid(omega))
    }

    /// `points` equally spaced frequencies including both ends.
    pub fn linear(min: f64, max: f64, points: usize) -> Result<Self, SpectraError> {
        match points {
            0 => Err(SpectraError::EmptyGrid),
            1 => Self::new(vec![min]),
            _ => {
                let step = (max - min) / (points - 1) as f64;
                Self::new(
                    (0..points)
                        .map(|k| if k + 1 == points { max } else { min + step * k as f64 })
                        .collect(),
                )
            }
        }
    }

    /// Symmetric grid `{-w_k} ∪ {0} ∪ {w_k}` with `w_k` log-spaced in
    /// `[low, high]` at `per_decade` points per decade.
    pub fn log_symmetric(low: f64, high: f64, per_decade: usize) -> Result<Self, SpectraError> {
        check_log_range(low, high)?;
        let decades = (high / low).log10();
        let count = ((decades * per_decade as f64).ceil() as usize).max(1) + 1;
        Self::log_symmetric_points(low, high, count)
    }

    /// Symmetric grid with exactly `count` log-spaced positive frequencies
    /// in `[low, high]`, their negatives and zero: `2 count + 1` points.
    pub fn log_symmetric_points(low: f64, high: f64, count: usize) -> Result<Self, SpectraError> {
        check_log_range(low, high)?;
        if count < 2 {
            return Err(SpectraError::InvalidGrid(format!(
                "log-symmetric grid needs at least 2 positive points, got {count}"
            )));
        }
        let step = (high / low).log10() / (count - 1) as f64;
        let positive: Vec<f64> = (0..count)
            .map(|k| if k + 1 == count { high } else { low * 10f64.powf(step * k as f64) })
            .collect();
        let mut omega: Vec<f64> = positive.iter().rev().map(|w| -w).collect();
        omega.push(0.0);
        omega.extend(positive);
        Self::new(omega)
    }

    /// Log-symmetric grid resolving both the locking half-width
    /// `kappa mu / 2` and the cavity scale `kappa`, with `margin` decades on
    /// either side and at least 16 points per decade.
    pub fn resolving(op: &OperatingPoint, margin_decades: f64, per_decade: usize) -> Result<Self, SpectraError> {
        let kappa = op.kappa();
        let lock = if op.mu > 0.0 { 0.5 * kappa * op.mu } else { 1e-3 * kappa };
        let low = lock.min(kappa) * 10f64.powf(-margin_decades);
        let high = lock.max(kappa) * 10f64.powf(margin_decades);
        Self::log_symmetric(low, high, per_decade.max(16))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains_zero(&self) -> bool {
        self.0.contains(&0.0)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

fn check_log_range(low: f64, high: f64) -> Result<(), SpectraError> {
    if low > 0.0 && high > low && high.is_finite() {
        Ok(())
    } else {
        Err(SpectraError::InvalidGrid(format!(
            "log-symmetric grid needs 0 < low < high, got [{low}, {high}]"
        )))
    }
}

/// One real value per grid frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralCurve {
    pub omega: Vec<f64>,
    pub value: Vec<f64>,
    pub label: String,
}

impl SpectralCurve {
    pub fn new(label: impl Into<String>, omega: Vec<f64>, value: Vec<f64>) -> Self {
        assert_eq!(omega.len(), value.len(), "grid/value length mismatch");
        SpectralCurve {
            omega,
            value,
            label: label.into(),
        }
    }

    /// Evaluates `f` at every grid point.
    pub fn tabulate(label: impl Into<String>, grid: &FrequencyGrid, f: impl Fn(f64) -> f64) -> Self {
        let omega = grid.as_slice().to_vec();
        let value = omega.iter().map(|&w| f(w)).collect();
        Self::new(label, omega, value)
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.omega.iter().copied().zip(self.value.iter().copied())
    }

    pub fn map(&self, label: impl Into<String>, f: impl Fn(f64, f64) -> f64) -> Self {
        Self::new(
            label,
            self.omega.clone(),
            self.points().map(|(w, v)| f(w, v)).collect(),
        )
    }

    /// `omega,value` CSV, 17 significant digits.
    pub fn to_csv(&self) -> String {
        io::two_column_csv(("omega", "value"), &self.omega, &self.value)
    }

    pub fn from_csv(label: impl Into<String>, text: &str) -> Result<Self, String> {
        let (omega, value) = io::parse_two_column_csv(text, ("omega", "value"))?;
        Ok(Self::new(label, omega, value))
    }

    /// JSON array of `[omega, value]` pairs.
    pub fn to_json(&self) -> String {
        let pairs: Vec<[f64; 2]> = self.points().map(|(w, v)| [w, v]).collect();
        serde_json::to_string(&pairs).expect("finite floats serialize")
    }

    pub fn max_value(&self) -> f64 {
        self.value.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

// Pointwise closed forms ---------------------------------------------------

/// `|D(omega)|^2` of the coupled amplitude/population response.
fn response_denominator(op: &OperatingPoint, w2: f64) -> f64 {
    let kappa = op.kappa();
    let mu = op.mu;
    let g1 = op.gamma1_eff;
    let cn = op.cn();
    let re = w2 - cn * kappa * (1.0 - mu) - 0.5 * kappa * mu * g1;
    re * re + w2 * (g1 + 0.5 * kappa * mu).powi(2)
}

/// Saturated single-Lorentzian denominator `kappa^2 (1 - mu/2)^2 + omega^2`.
fn saturated_denominator(op: &OperatingPoint, w2: f64) -> f64 {
    let k = op.kappa() * (1.0 - 0.5 * op.mu);
    k * k + w2
}

/// Symmetric-ordering intracavity amplitude-quadrature spectrum.
pub fn x_variance(op: &OperatingPoint, omega: f64, form: Form) -> f64 {
    let kappa = op.kappa();
    let mu = op.mu;
    let p = op.pump_p();
    let w2 = omega * omega;
    match form {
        Form::Full => {
            let g1 = op.gamma1_eff;
            let num = w2 + g1 * g1 - op.cn() * g1 * 0.5 * p * (1.0 - mu) / (1.0 - 0.5 * mu);
            0.5 * kappa * (1.0 - 0.5 * mu) * num / response_denominator(op, w2)
        }
        Form::Saturated => {
            0.5 * kappa * (1.0 - 0.5 * mu - 0.5 * (1.0 - mu) * p) / saturated_denominator(op, w2)
        }
    }
}

/// Symmetric-ordering intracavity phase-quadrature spectrum. Infinite at
/// `omega = 0` when `mu = 0`.
pub fn y_variance(op: &OperatingPoint, omega: f64) -> f64 {
    let kappa = op.kappa();
    let mu = op.mu;
    0.5 * kappa * (1.0 - 0.5 * mu) / (omega * omega + 0.25 * kappa * kappa * mu * mu)
}

/// Normally ordered intracavity amplitude-quadrature spectrum (may be negative).
pub fn x_normal_variance(op: &OperatingPoint, omega: f64, form: Form) -> f64 {
    let kappa = op.kappa();
    let mu = op.mu;
    let p = op.pump_p();
    let w2 = omega * omega;
    match form {
        Form::Full => {
            let g1 = op.gamma1_eff;
            // Gamma1^2 - c n Gamma1 = gamma1 Gamma1, written out to avoid cancellation
            let num = w2 + op.params.gamma1 * g1 - 0.5 * op.cn() * g1 * p;
            0.5 * kappa * (1.0 - mu) * num / response_denominator(op, w2)
        }
        Form::Saturated => -0.25 * kappa * (1.0 - mu) * p / saturated_denominator(op, w2),
    }
}

/// Normally ordered intracavity phase-quadrature spectrum.
pub fn y_normal_variance(op: &OperatingPoint, omega: f64) -> f64 {
    let kappa = op.kappa();
    let mu = op.mu;
    0.5 * kappa * (1.0 - mu) / (omega * omega + 0.25 * kappa * kappa * mu * mu)
}

/// External amplitude-quadrature spectrum; the shot-noise floor is `1/4`.
pub fn external_x(op: &OperatingPoint, omega: f64, form: Form) -> f64 {
    0.25 + op.kappa() * x_normal_variance(op, omega, form)
}

pub fn external_y(op: &OperatingPoint, omega: f64) -> f64 {
    0.25 + op.kappa() * y_normal_variance(op, omega)
}

fn check_y_grid(op: &OperatingPoint, grid: &FrequencyGrid) -> Result<(), SpectraError> {
    if op.mu == 0.0 && grid.contains_zero() {
        Err(SpectraError::PhaseDiffusionDivergence)
    } else {
        Ok(())
    }
}

fn form_tag(form: Form) -> &'static str {
    match form {
        Form::Full => "full",
        Form::Saturated => "saturated",
    }
}

pub fn intracavity_variance_x(op: &OperatingPoint, grid: &FrequencyGrid, form: Form) -> SpectralCurve {
    SpectralCurve::tabulate(format!("dx2_{}", form_tag(form)), grid, |w| x_variance(op, w, form))
}

pub fn intracavity_variance_y(op: &OperatingPoint, grid: &FrequencyGrid) -> Result<SpectralCurve, SpectraError> {
    check_y_grid(op, grid)?;
    Ok(SpectralCurve::tabulate("dy2", grid, |w| y_variance(op, w)))
}

/// `(:dx^2:)_w` at the requested form and `(:dy^2:)_w`.
pub fn normally_ordered_variances(
    op: &OperatingPoint,
    grid: &FrequencyGrid,
    form: Form,
) -> Result<(SpectralCurve, SpectralCurve), SpectraError> {
    check_y_grid(op, grid)?;
    Ok((
        SpectralCurve::tabulate(format!("normal_dx2_{}", form_tag(form)), grid, |w| {
            x_normal_variance(op, w, form)
        }),
        SpectralCurve::tabulate("normal_dy2", grid, |w| y_normal_variance(op, w)),
    ))
}

/// `(dX^2)_w` and `(dY^2)_w` outside the cavity.
pub fn external_variances(
    op: &OperatingPoint,
    grid: &FrequencyGrid,
    form: Form,
) -> Result<(SpectralCurve, SpectralCurve), SpectraError> {
    check_y_grid(op, grid)?;
    Ok((
        SpectralCurve::tabulate(format!("dX2_{}", form_tag(form)), grid, |w| external_x(op, w, form)),
        SpectralCurve::tabulate("dY2", grid, |w| external_y(op, w)),
    ))
}

// Transfer-matrix route ----------------------------------------------------

/// Linear drift of `(dx, dy, dN1)` together with its source covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferModel {
    pub drift: Matrix3<f64>,
    pub noise: NoiseCovariance,
}

impl TransferModel {
    pub fn new(drift: Matrix3<f64>, noise: NoiseCovariance) -> Self {
        TransferModel { drift, noise }
    }

    pub fn from_operating_point(op: &OperatingPoint) -> Result<Self, SpectraError> {
        Ok(TransferModel {
            drift: drift_matrix(op),
            noise: build_noise_covariance(op)?,
        })
    }

    pub fn eigenvalues(&self) -> [C64; 3] {
        let e = self.drift.complex_eigenvalues();
        [e[0], e[1], e[2]]
    }

    /// Largest eigenvalue modulus, the fastest relaxation rate.
    pub fn max_rate(&self) -> f64 {
        self.eigenvalues().iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn ensure_stable(&self) -> Result<(), SpectraError> {
        match self.eigenvalues().iter().find(|e| e.re >= 0.0) {
            Some(e) => Err(SpectraError::UnstableDrift { re: e.re, im: e.im }),
            None => Ok(()),
        }
    }
}

/// Rows `x: (-kappa mu/2, 0, c sqrt(n)/2)`, `y: (0, -kappa mu/2, 0)`,
/// `N: (-2 kappa (1 - mu) sqrt(n), 0, -Gamma1)`.
pub fn drift_matrix(op: &OperatingPoint) -> Matrix3<f64> {
    let kappa = op.kappa();
    let mu = op.mu;
    let s = op.sqrt_n();
    let lock = -0.5 * kappa * mu;
    Matrix3::new(
        lock, 0.0, 0.5 * op.c * s, //
        0.0, lock, 0.0, //
        -2.0 * kappa * (1.0 - mu) * s, 0.0, -op.gamma1_eff,
    )
}

fn norm1(m: &Matrix3<C64>) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `S(w) = (A - i w I)^-1 Sigma (A + i w I)^-T` at a single frequency.
pub fn spectral_matrix_at(model: &TransferModel, omega: f64) -> Result<Matrix3<C64>, SpectraError> {
    let shifted: Matrix3<C64> =
        model.drift.map(|v| C64::new(v, 0.0)) - Matrix3::<C64>::identity() * C64::new(0.0, omega);
    let h = shifted
        .try_inverse()
        .ok_or(SpectraError::SingularSystem {
            omega,
            condition: f64::INFINITY,
        })?;
    let condition = norm1(&shifted) * norm1(&h);
    if condition.is_nan() || condition > MAX_CONDITION {
        return Err(SpectraError::SingularSystem { omega, condition });
    }
    let sigma = model.noise.matrix().map(|v| C64::new(v, 0.0));
    Ok(h * sigma * h.adjoint())
}

/// Full 3x3 spectral matrix on a grid, indices `(x, y, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMatrix {
    pub omega: Vec<f64>,
    pub values: Vec<Matrix3<C64>>,
}

pub const COMPONENT_LABELS: [&str; 3] = ["x", "y", "N"];

impl SpectralMatrix {
    /// Real part (co-spectrum) of entry `(i, j)`.
    pub fn curve(&self, i: usize, j: usize) -> SpectralCurve {
        SpectralCurve::new(
            format!("S_{}{}", COMPONENT_LABELS[i], COMPONENT_LABELS[j]),
            self.omega.clone(),
            self.values.iter().map(|m| m[(i, j)].re).collect(),
        )
    }

    /// Imaginary part (quadrature spectrum) of entry `(i, j)`.
    pub fn quad_curve(&self, i: usize, j: usize) -> SpectralCurve {
        SpectralCurve::new(
            format!("Q_{}{}", COMPONENT_LABELS[i], COMPONENT_LABELS[j]),
            self.omega.clone(),
            self.values.iter().map(|m| m[(i, j)].im).collect(),
        )
    }
}

pub fn general_spectrum(
    model: &TransferModel,
    grid: &FrequencyGrid,
    exec: Execution,
) -> Result<SpectralMatrix, SpectraError> {
    model.ensure_stable()?;
    let omega = grid.as_slice();
    let values = par::try_map_indexed(omega.len(), exec, |k| spectral_matrix_at(model, omega[k]))?;
    Ok(SpectralMatrix {
        omega: omega.to_vec(),
        values,
    })
}

// Phase locking ------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseVariance {
    /// `<dy^2>` from adaptive quadrature of the y spectrum.
    pub y_variance: f64,
    /// `<dphi^2> = <dy^2> / n`.
    pub phase_variance: f64,
    /// Lorentzian antiderivative `(1 - mu/2) / (2 mu)`.
    pub y_variance_exact: f64,
    pub quadrature_error: f64,
    /// `sqrt(n / (4 n_in))`, the leading-order estimate of `<dy^2>`.
    pub y_variance_leading_order: f64,
    /// `1 / sqrt(4 n_in n)`, the leading-order estimate of `<dphi^2>`.
    pub phase_variance_leading_order: f64,
    /// `phase_variance / phase_variance_leading_order`.
    pub ratio_to_leading_order: f64,
}

pub fn phase_variance(op: &OperatingPoint) -> Result<PhaseVariance, SpectraError> {
    if op.mu == 0.0 {
        return Err(SpectraError::PhaseDiffusionDivergence);
    }
    let half_width = 0.5 * op.kappa() * op.mu;
    let peak = y_variance(op, 0.0);
    let integral = integrate_real_line(|w| y_variance(op, w), half_width, QuadOptions::abs(1e-12 * peak))?;
    let y = integral.value / (2.0 * PI);
    let phase = y / op.n;
    let n_in = op.params.n_in;
    let lead_phase = 1.0 / (4.0 * n_in * op.n).sqrt();
    Ok(PhaseVariance {
        y_variance: y,
        phase_variance: phase,
        y_variance_exact: (1.0 - 0.5 * op.mu) / (2.0 * op.mu),
        quadrature_error: integral.error / (2.0 * PI),
        y_variance_leading_order: (op.n / (4.0 * n_in)).sqrt(),
        phase_variance_leading_order: lead_phase,
        ratio_to_leading_order: phase / lead_phase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{solve_steady_state, LaserParams};
    use num::{BigInt, BigRational, ToPrimitive};

    fn op(g: f64, gamma1: f64, p: f64, n_in: f64) -> OperatingPoint {
        let params = LaserParams::new(1.0, g, gamma1, 1e3, 1e3, 1e6, p, n_in, 0.0).unwrap();
        solve_steady_state(&params).unwrap()
    }

    fn rat(x: f64) -> BigRational {
        BigRational::from_float(x).unwrap()
    }

    /// Full amplitude spectrum in exact rational arithmetic on the f64 inputs.
    fn x_variance_exact(op: &OperatingPoint, omega: f64) -> f64 {
        let one = BigRational::from_integer(BigInt::from(1));
        let half = &one / BigRational::from_integer(BigInt::from(2));
        let (k, mu, p, w, c, n, g1) = (
            rat(op.kappa()),
            rat(op.mu),
            rat(op.pump_p()),
            rat(omega),
            rat(op.c),
            rat(op.n),
            rat(op.gamma1_eff),
        );
        let w2 = &w * &w;
        let cn = &c * &n;
        let lock = &one - &half * &mu;
        let num = &w2 + &g1 * &g1 - &cn * &g1 * &half * &p * (&one - &mu) / &lock;
        let re = &w2 - &cn * &k * (&one - &mu) - &half * &k * &mu * &g1;
        let im = &g1 + &half * &k * &mu;
        let den = &re * &re + &w2 * &im * &im;
        (&half * &k * &lock * num / den).to_f64().unwrap()
    }

    #[test]
    fn full_form_matches_rational_oracle() {
        let o = op(0.0313, 0.01, 1.0, 400.0);
        for w in [0.0, 1e-3, 0.1, 0.99, 1.0, 3.0, 1e2] {
            let exact = x_variance_exact(&o, w);
            let got = x_variance(&o, w, Form::Full);
            assert!((got / exact - 1.0).abs() < 1e-12, "w={w}: {got} vs {exact}");
        }
    }

    #[test]
    fn closed_forms_match_transfer_matrix() {
        for (g, gamma1, p, n_in) in [
            (0.0313, 0.01, 1.0, 400.0),
            (0.01, 0.5, 0.3, 1e4),
            (0.1, 1e-3, 0.0, 25.0),
            (0.0313, 0.01, -2.0, 400.0),
        ] {
            let o = op(g, gamma1, p, n_in);
            let model = TransferModel::from_operating_point(&o).unwrap();
            for w in [-5.0, -1.0, -0.01, 0.0, 0.003, 0.5, 1.0, 2.0, 40.0] {
                let s = spectral_matrix_at(&model, w).unwrap();
                let x = x_variance(&o, w, Form::Full);
                let y = y_variance(&o, w);
                assert!((s[(0, 0)].re / x - 1.0).abs() < 1e-10, "x at {w}: {} vs {x}", s[(0, 0)].re);
                assert!((s[(1, 1)].re / y - 1.0).abs() < 1e-10);
                assert!(s[(0, 0)].im.abs() <= 1e-12 * x);
                assert_eq!(s[(0, 1)], C64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn saturated_limit() {
        // c n / gamma1 ~ 2e6 and omega << c n
        let o = op(1.0, 1e-3, 1.0, 400.0);
        for w in [0.0, 0.2, 1.0] {
            let full = x_variance(&o, w, Form::Full);
            let sat = x_variance(&o, w, Form::Saturated);
            assert!((full / sat - 1.0).abs() < 1e-2, "{w}: {full} vs {sat}");
            let fe = external_x(&o, w, Form::Full);
            let se = external_x(&o, w, Form::Saturated);
            assert!((fe - se).abs() < 0.02 * 0.25);
        }
    }

    #[test]
    fn poisson_pump_is_shot_noise_limited() {
        let o = op(0.0313, 0.01, 0.0, 400.0);
        for w in [0.0, 0.1, 1.0, 10.0] {
            assert_eq!(external_x(&o, w, Form::Saturated), 0.25);
        }
    }

    #[test]
    fn uncertainty_product() {
        let grid = FrequencyGrid::log_symmetric(1e-4, 1e3, 24).unwrap();
        for p in [0.0, 0.5, 1.0] {
            let o = op(0.0313, 0.01, p, 400.0);
            for form in [Form::Full, Form::Saturated] {
                let (x, y) = external_variances(&o, &grid, form).unwrap();
                for k in 0..grid.len() {
                    assert!(x.value[k] * y.value[k] >= 1.0 / 16.0, "p={p} {form:?} k={k}");
                }
            }
        }
    }

    #[test]
    fn phase_variance_matches_lorentzian_area() {
        let o = op(0.0313, 0.01, 1.0, 400.0);
        let pv = phase_variance(&o).unwrap();
        assert!((pv.y_variance / pv.y_variance_exact - 1.0).abs() < 1e-9);
        assert!((pv.ratio_to_leading_order - (1.0 - 0.5 * o.mu)).abs() < 1e-9);
        let free = op(0.0313, 0.01, 1.0, 0.0);
        assert_eq!(phase_variance(&free), Err(SpectraError::PhaseDiffusionDivergence));
        let grid = FrequencyGrid::linear(-1.0, 1.0, 5).unwrap();
        assert_eq!(intracavity_variance_y(&free, &grid), Err(SpectraError::PhaseDiffusionDivergence));
        let off_zero = FrequencyGrid::linear(0.1, 1.0, 5).unwrap();
        assert!(intracavity_variance_y(&free, &off_zero).is_ok());
    }

    #[test]
    fn grid_validation() {
        assert_eq!(FrequencyGrid::new(vec![]), Err(SpectraError::EmptyGrid));
        assert!(matches!(FrequencyGrid::new(vec![0.0, 0.0]), Err(SpectraError::InvalidGrid(_))));
        assert!(matches!(FrequencyGrid::new(vec![0.0, f64::NAN]), Err(SpectraError::InvalidGrid(_))));
        let g = FrequencyGrid::log_symmetric(0.01, 100.0, 16).unwrap();
        let w = g.as_slice();
        assert_eq!(w.len(), 2 * 65 + 1);
        assert_eq!(w[65], 0.0);
        assert_eq!(*w.last().unwrap(), 100.0);
        assert_eq!(w[0], -100.0);
        let lin = FrequencyGrid::linear(-3.0, 3.0, 7).unwrap();
        assert_eq!(lin.as_slice(), &[-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn curve_csv_round_trip() {
        let o = op(0.0313, 0.01, 1.0, 400.0);
        let grid = FrequencyGrid::log_symmetric(1e-2, 10.0, 16).unwrap();
        let c = intracavity_variance_x(&o, &grid, Form::Full);
        let back = SpectralCurve::from_csv(c.label.clone(), &c.to_csv()).unwrap();
        assert_eq!(back, c);
        assert!(c.to_csv().starts_with("omega,value\n"));
    }

    #[test]
    fn ill_conditioned_and_unstable_systems() {
        let near_singular = TransferModel::new(
            Matrix3::from_diagonal(&nalgebra::Vector3::new(-1e-13, -1.0, -1.0)),
            NoiseCovariance::zero(),
        );
        assert!(matches!(
            spectral_matrix_at(&near_singular, 0.0),
            Err(SpectraError::SingularSystem { .. })
        ));
        assert!(spectral_matrix_at(&near_singular, 1.0).is_ok());
        let unstable = TransferModel::new(Matrix3::identity(), NoiseCovariance::zero());
        let grid = FrequencyGrid::linear(0.0, 1.0, 3).unwrap();
        assert!(matches!(
            general_spectrum(&unstable, &grid, Execution::Sequential),
            Err(SpectraError::UnstableDrift { .. })
        ));
    }

    #[test]
    fn parallel_grid_is_identical() {
        let o = op(0.0313, 0.01, 1.0, 400.0);
        let model = TransferModel::from_operating_point(&o).unwrap();
        let grid = FrequencyGrid::resolving(&o, 1.0, 16).unwrap();
        let seq = general_spectrum(&model, &grid, Execution::Sequential).unwrap();
        let par = general_spectrum(&model, &grid, Execution::Parallel).unwrap();
        assert_eq!(seq, par);
    }
}
