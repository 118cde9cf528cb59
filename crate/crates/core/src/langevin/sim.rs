//! Monte-Carlo trajectories of the linearized fluctuation equations
//!
//! ```text
//! d(dx)  = (-kappa mu/2 dx + c sqrt(n)/2 dN1) dt + dW_x
//! d(dy)  = -kappa mu/2 dy dt + dW_y
//! d(dN1) = (-Gamma1 dN1 - 2 kappa (1 - mu) sqrt(n) dx) dt + dW_N
//! ```
//!
//! with `<dW dW^T> = Sigma dt`. Each trajectory starts from a draw of the
//! stationary distribution, is sampled every `stride` steps, and is cut
//! into 50%-overlapping Welch segments of which the first is discarded.
//!
//! Trajectory `i` draws its normals from ChaCha8 stream `i` of the seed, so
//! the result does not depend on thread scheduling; accumulators are merged
//! in trajectory order.

use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::lyapunov::stationary_covariance_of;
use super::welch::{WelchAccumulator, WelchPlan, Window};
use super::{psd_cholesky, SimError};
use crate::model::OperatingPoint;
use crate::par::{self, Execution};
use crate::spectra::{SpectralCurve, SpectralMatrix, TransferModel, COMPONENT_LABELS};

/// Largest `dt * (fastest drift rate)` accepted.
pub const STEP_GUARD: f64 = 0.01;
/// Required duration in periods `2 pi / (kappa mu)` of the locking line.
pub const MIN_LOCK_PERIODS: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Integrator {
    #[default]
    EulerMaruyama,
    /// Exact Gaussian transition over each step via the matrix exponential.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub duration: f64,
    pub n_segments: usize,
    #[serde(default)]
    pub window: Window,
    pub seed: u64,
    #[serde(default = "one")]
    pub n_trajectories: usize,
    /// Spacing of recorded samples; rounded to a whole number of steps.
    /// Defaults to `0.05 / max(kappa, fastest rate)`.
    #[serde(default)]
    pub sample_interval: Option<f64>,
    #[serde(default)]
    pub integrator: Integrator,
}

fn one() -> usize {
    1
}

impl SimConfig {
    /// `dt = 1e-3 / fastest rate`, 64 segments, and a duration of
    /// `max(2e4 / kappa, 50 locking periods)`.
    pub fn recommended(op: &OperatingPoint, seed: u64, n_trajectories: usize) -> Result<Self, SimError> {
        let model = TransferModel::from_operating_point(op)?;
        let kappa = op.kappa();
        let mut duration = 2e4 / kappa;
        if op.mu > 0.0 {
            duration = duration.max(MIN_LOCK_PERIODS * 2.0 * std::f64::consts::PI / (kappa * op.mu));
        }
        Ok(SimConfig {
            dt: 1e-3 / model.max_rate(),
            duration,
            n_segments: 64,
            window: Window::Hann,
            seed,
            n_trajectories,
            sample_interval: None,
            integrator: Integrator::EulerMaruyama,
        })
    }
}

/// Resolved sampling layout of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimLayout {
    pub stride: usize,
    pub sample_interval: f64,
    pub segment_len: usize,
    /// Samples recorded per trajectory.
    pub samples: usize,
    pub steps: usize,
}

fn layout(model: &TransferModel, kappa_hint: f64, cfg: &SimConfig) -> Result<SimLayout, SimError> {
    let bad = |msg: String| Err(SimError::InvalidConfig(msg));
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return bad(format!("dt must be positive, got {}", cfg.dt));
    }
    if !(cfg.duration > 0.0 && cfg.duration.is_finite()) {
        return bad(format!("duration must be positive, got {}", cfg.duration));
    }
    if cfg.n_segments < 8 {
        return bad(format!("n_segments must be >= 8, got {}", cfg.n_segments));
    }
    if cfg.n_trajectories == 0 {
        return bad("n_trajectories must be >= 1".into());
    }
    let rate = model.max_rate();
    let limit = STEP_GUARD / rate;
    if cfg.dt > limit {
        return Err(SimError::StepTooLarge { dt: cfg.dt, limit });
    }
    let wanted = cfg
        .sample_interval
        .unwrap_or_else(|| 0.05 / kappa_hint.max(rate));
    if wanted.is_nan() || wanted <= 0.0 {
        return bad(format!("sample_interval must be positive, got {wanted}"));
    }
    let stride = ((wanted / cfg.dt).round() as usize).max(1);
    let sample_interval = stride as f64 * cfg.dt;
    let available = (cfg.duration / sample_interval).floor() as usize;
    // n_segments kept + 1 discarded, 50% overlap
    let segment_len = 2 * (available / (cfg.n_segments + 2));
    if segment_len < 16 {
        return bad(format!(
            "duration {} holds only {available} samples; too few for {} segments",
            cfg.duration, cfg.n_segments
        ));
    }
    let samples = (cfg.n_segments + 2) * segment_len / 2;
    Ok(SimLayout {
        stride,
        sample_interval,
        segment_len,
        samples,
        steps: samples * stride,
    })
}

/// Welch estimate of the 3x3 spectral matrix with per-bin standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub estimated: SpectralMatrix,
    /// Standard error of the real part of each entry.
    pub stderr: Vec<Matrix3<f64>>,
    pub config: SimConfig,
    pub layout: SimLayout,
    pub segments_used: usize,
    pub wall_time: Duration,
}

impl SimResult {
    pub fn omega(&self) -> &[f64] {
        &self.estimated.omega
    }

    /// False for the few lowest bins distorted by per-segment mean removal,
    /// see [`Window::mean_leakage_halfwidth`].
    pub fn is_unbiased_bin(&self, k: usize) -> bool {
        let center = self.estimated.omega.len() / 2;
        k.abs_diff(center) > self.config.window.mean_leakage_halfwidth()
    }

    pub fn curve(&self, i: usize, j: usize) -> SpectralCurve {
        self.estimated.curve(i, j)
    }

    pub fn stderr_curve(&self, i: usize, j: usize) -> SpectralCurve {
        SpectralCurve::new(
            format!("stderr_{}{}", COMPONENT_LABELS[i], COMPONENT_LABELS[j]),
            self.estimated.omega.clone(),
            self.stderr.iter().map(|m| m[(i, j)]).collect(),
        )
    }

    /// `(file name, contents)` of every artifact of a run: one `omega,value`
    /// CSV per unique component (`S_xx.csv`, ...) and the `sim.json` sidecar.
    pub fn output_files(&self) -> Vec<(String, String)> {
        let mut files: Vec<(String, String)> = UNIQUE_PAIRS
            .iter()
            .map(|&(i, j)| {
                let c = self.curve(i, j);
                (format!("{}.csv", c.label), c.to_csv())
            })
            .collect();
        let sidecar = serde_json::to_string_pretty(&self.sidecar_json()).expect("finite values serialize");
        files.push(("sim.json".to_string(), sidecar + "\n"));
        files
    }

    /// Config echo, seed, layout and standard errors. Excludes wall time so
    /// that equal inputs give byte-identical files.
    pub fn sidecar_json(&self) -> serde_json::Value {
        let mut stderr = serde_json::Map::new();
        for (i, j) in UNIQUE_PAIRS {
            let key = format!("{}{}", COMPONENT_LABELS[i], COMPONENT_LABELS[j]);
            let v: Vec<f64> = self.stderr.iter().map(|m| m[(i, j)]).collect();
            stderr.insert(key, serde_json::json!(v));
        }
        serde_json::json!({
            "config": self.config,
            "seed": self.config.seed,
            "layout": self.layout,
            "segments_used": self.segments_used,
            "omega": self.estimated.omega,
            "stderr": stderr,
        })
    }
}

/// Upper-triangle component pairs in output order.
pub const UNIQUE_PAIRS: [(usize, usize); 6] = [(0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2)];

impl SimConfig {
    /// Validates this config against `op` and resolves the sampling layout
    /// without simulating.
    pub fn layout_for(&self, op: &OperatingPoint) -> Result<SimLayout, SimError> {
        let model = TransferModel::from_operating_point(op)?;
        check_lock_duration(op, self)?;
        model.ensure_stable()?;
        layout(&model, op.kappa(), self)
    }
}

fn check_lock_duration(op: &OperatingPoint, cfg: &SimConfig) -> Result<(), SimError> {
    if op.mu > 0.0 {
        let required = MIN_LOCK_PERIODS * 2.0 * std::f64::consts::PI / (op.kappa() * op.mu);
        if cfg.duration < required {
            return Err(SimError::DurationTooShort {
                duration: cfg.duration,
                required,
            });
        }
    }
    Ok(())
}

/// Runs the linearized model of `op`.
pub fn simulate(op: &OperatingPoint, cfg: &SimConfig, exec: Execution) -> Result<SimResult, SimError> {
    let model = TransferModel::from_operating_point(op)?;
    check_lock_duration(op, cfg)?;
    simulate_model(&model, op.kappa(), cfg, exec)
}

/// Runs an arbitrary stable three-component linear model. `kappa_hint`
/// only enters the default sample interval.
pub fn simulate_model(
    model: &TransferModel,
    kappa_hint: f64,
    cfg: &SimConfig,
    exec: Execution,
) -> Result<SimResult, SimError> {
    let started = Instant::now();
    model.ensure_stable()?;
    let lay = layout(model, kappa_hint, cfg)?;
    let stationary = stationary_covariance_of(model)?;
    let init_factor = psd_cholesky(&stationary);
    let stepper = Stepper::new(model, &stationary, cfg.dt, cfg.integrator);
    let plan = WelchPlan::new(lay.segment_len, cfg.window, lay.sample_interval);

    let per_trajectory = par::map_indexed(cfg.n_trajectories, exec, |traj| {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(traj as u64);
        let x0 = init_factor * standard_normal(&mut rng);
        let record = stepper.run(x0, lay.steps, lay.stride, || standard_normal(&mut rng));
        let mut acc = WelchAccumulator::new(plan.bins());
        plan.accumulate(
            [&record[0], &record[1], &record[2]],
            1,
            cfg.n_segments,
            &mut acc,
        );
        acc
    });

    let mut total = WelchAccumulator::new(plan.bins());
    for acc in &per_trajectory {
        total.merge(acc);
    }
    Ok(SimResult {
        estimated: SpectralMatrix {
            omega: plan.omega(),
            values: total.mean(),
        },
        stderr: total.stderr(),
        config: *cfg,
        layout: lay,
        segments_used: total.segments,
        wall_time: started.elapsed(),
    })
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> Vector3<f64> {
    Vector3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    )
}

/// One-step update `v <- F v + G z` with `z` standard normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepper {
    pub transition: Matrix3<f64>,
    pub noise_factor: Matrix3<f64>,
}

impl Stepper {
    pub fn new(model: &TransferModel, stationary: &Matrix3<f64>, dt: f64, integrator: Integrator) -> Self {
        match integrator {
            Integrator::EulerMaruyama => Stepper {
                transition: Matrix3::identity() + model.drift * dt,
                noise_factor: model.noise.cholesky_factor() * dt.sqrt(),
            },
            Integrator::Exact => {
                let phi = (model.drift * dt).exp();
                let q = stationary - phi * stationary * phi.transpose();
                let q = 0.5 * (q + q.transpose());
                Stepper {
                    transition: phi,
                    noise_factor: psd_cholesky(&q),
                }
            }
        }
    }

    /// Integrates `steps` steps from `x0`, recording every `stride`-th state
    /// (after the step). `normals` supplies one standard-normal vector per step.
    pub fn run(
        &self,
        x0: Vector3<f64>,
        steps: usize,
        stride: usize,
        mut normals: impl FnMut() -> Vector3<f64>,
    ) -> [Vec<f64>; 3] {
        let samples = steps / stride;
        let mut out: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(samples));
        let mut x = x0;
        for step in 1..=steps {
            x = self.transition * x + self.noise_factor * normals();
            if step % stride == 0 {
                out[0].push(x[0]);
                out[1].push(x[1]);
                out[2].push(x[2]);
            }
        }
        out
    }
}
