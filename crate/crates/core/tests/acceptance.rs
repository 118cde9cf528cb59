//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use num::{BigRational, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sublaser_core::certify::{self, certification_params, RMS_THRESHOLD};
use sublaser_core::langevin::{simulate, stationary_covariance};
use sublaser_core::protocols::{
    duan_closed_form, duan_combined_variance, shannon_information, smi_sweep, teleport_fidelity_closed_form,
    teleport_fidelity_saturated, teleport_fidelity_spectrum, DenseCodingParams, DimensionlessConvention,
    EprSource, InputVariances, SmiParams,
};
use sublaser_core::quadrature::{integrate_real_line, QuadOptions};
use sublaser_core::spectra::{external_variances, external_x, spectral_matrix_at, Form, FrequencyGrid, TransferModel};
use sublaser_core::{solve_steady_state, Execution, LaserParams, OperatingPoint};

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn pinned() -> OperatingPoint {
    solve_steady_state(&certification_params()).unwrap()
}

fn with_pump(p: f64) -> LaserParams {
    let mut params = certification_params();
    params.pump_p = p;
    params
}

fn grid() -> FrequencyGrid {
    FrequencyGrid::log_symmetric(1e-4, 1e3, 24).unwrap()
}

fn analytic_vs_monte_carlo() -> Outcome {
    let started = Instant::now();
    let report = certify::certify(20240611, Execution::Sequential).map_err(|e| e.to_string())?;
    let secs = started.elapsed().as_secs_f64();
    let parts: Vec<String> = report
        .components
        .iter()
        .map(|c| {
            format!(
                "{} rms {:.4} over {} bins ({:.4} with the 3 mean-removal bins)",
                c.component, c.rms_relative, c.bins, c.rms_relative_all_bins
            )
        })
        .collect();
    check(
        report.passed && secs < 60.0,
        format!("{}; threshold {RMS_THRESHOLD}; one core {secs:.1} s", parts.join(", ")),
    )
}

fn shot_noise_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = grid();
    let mut worst_x = 0.0f64;
    let mut worst_duan = 0.0f64;
    for _ in 0..100 {
        let kappa = 10f64.powf(rng.random_range(-1.0..1.0));
        let g = rng.random_range(0.005..0.1);
        let gamma1 = kappa * rng.random_range(1e-3..0.1);
        let r = kappa * 10f64.powf(rng.random_range(5.0..8.0));
        let mu = rng.random_range(1e-4..0.0999);
        let n = r / kappa / (1.0 - mu);
        let params = LaserParams::new(kappa, g, gamma1, 1e3 * kappa, 1e3 * kappa, r, 0.0, mu * mu * n, 0.0)
            .map_err(|e| e.to_string())?;
        let src = EprSource::symmetric(&params).map_err(|e| e.to_string())?;
        let omega: Vec<f64> = grid.as_slice().iter().map(|w| w * kappa).collect();
        let scaled = FrequencyGrid::new(omega).unwrap();
        for &w in scaled.as_slice() {
            worst_x = worst_x.max((external_x(&src.laser1, w, Form::Saturated) - 0.25).abs());
        }
        let duan = duan_combined_variance(&src, &scaled).map_err(|e| e.to_string())?;
        for v in duan.value {
            worst_duan = worst_duan.max((v - 1.0).abs());
        }
    }
    check(
        worst_x <= 1e-12 && worst_duan <= 1e-12,
        format!("max |dX2 - 1/4| = {worst_x:e}, max |duan - 1| = {worst_duan:e} over 100 draws"),
    )
}

fn squeezing_depth() -> Outcome {
    let op = pinned();
    let got = external_x(&op, 0.0, Form::Saturated);
    // (mu^2/4) / (4 (1 - mu/2)^2) in exact rational arithmetic
    let mu = BigRational::from_float(op.mu).unwrap();
    let one = BigRational::from_float(1.0).unwrap();
    let two = BigRational::from_float(2.0).unwrap();
    let four = BigRational::from_float(4.0).unwrap();
    let lock = &one - &mu / &two;
    let exact = (&mu * &mu / &four / (&four * &lock * &lock)).to_f64().unwrap();
    let rel = (got / exact - 1.0).abs();
    let grid = grid();
    let mut min_product = f64::INFINITY;
    for form in [Form::Full, Form::Saturated] {
        let (x, y) = external_variances(&op, &grid, form).map_err(|e| e.to_string())?;
        for (a, b) in x.value.iter().zip(&y.value) {
            min_product = min_product.min(a * b);
        }
    }
    check(
        rel < 1e-6 && min_product >= 1.0 / 16.0,
        format!(
            "mu = {:.6}, (dX2)_0 = {got:.6e} vs oracle {exact:.6e} (rel {rel:.1e}); min product {min_product:.6} >= 1/16",
            op.mu
        ),
    )
}

fn duan_band() -> Outcome {
    let src = EprSource::symmetric(&with_pump(1.0)).map_err(|e| e.to_string())?;
    let mu = src.laser1.mu;
    let expect = 0.25 * mu * mu / (1.0 - 0.5 * mu).powi(2);
    let at_zero = duan_closed_form(&src.laser1, 0.0);
    let rel = (at_zero / expect - 1.0).abs();
    let curve = duan_combined_variance(&src, &grid()).map_err(|e| e.to_string())?;
    let max = curve.max_value();
    check(
        rel < 1e-9 && max < 1.0,
        format!("value at 0 = {at_zero:.6e} (rel {rel:.1e}); max on grid {max:.9}"),
    )
}

fn dense_coding_weak_signal() -> Outcome {
    // R P = 0.01 delta_omega_A
    let dc = DenseCodingParams::new(0.01, 1.0, 1.0).map_err(|e| e.to_string())?;
    let target = dc.reflectivity_r * dc.script_p(1.0);
    // saturated spectra at the pinned point, and full spectra of a deeply
    // saturated laser (c n ~ 2e3 kappa)
    let mut deep = with_pump(0.0);
    deep.g = 1.0;
    let mut parts = Vec::new();
    let mut ok = true;
    for (tag, params, form) in [("saturated", with_pump(0.0), Form::Saturated), ("full, c n = 2e3", deep, Form::Full)] {
        let src = EprSource::symmetric(&params).map_err(|e| e.to_string())?;
        let info = shannon_information(&src, &dc, form).map_err(|e| e.to_string())?;
        let rel = (info.two_pi_over_kappa / target - 1.0).abs();
        ok &= rel < 0.02;
        parts.push(format!("{tag}: I = {:.6} (rel {rel:.2e})", info.two_pi_over_kappa));
    }
    check(ok, format!("R P = {target:.6}; {}", parts.join("; ")))
}

fn fig6_reproduction() -> Outcome {
    let d: Vec<f64> = (0..120).map(|k| 0.1 * 200f64.powf(k as f64 / 119.0)).collect();
    let curve = |lambda: f64, p: f64| {
        let params = SmiParams {
            reflectivity_r: 0.01,
            script_p: 3.0,
            lambda,
            pump_p: p,
            convention: DimensionlessConvention::KappaUnit,
        };
        let t = Instant::now();
        let pts = smi_sweep(&params, &d, Execution::Sequential).map_err(|e| e.to_string())?;
        Ok::<_, String>((pts, t.elapsed().as_secs_f64()))
    };
    let peak = |pts: &[(f64, f64)]| pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (c1, t1) = curve(0.1, 1.0)?;
    let (c2, t2) = curve(0.01, 1.0)?;
    let (c3, t3) = curve(0.001, 1.0)?;
    let (c0, t0) = curve(0.001, 0.0)?;
    let ordered = (0..d.len()).all(|k| c1[k].1 < c2[k].1 && c2[k].1 < c3[k].1);
    let (p3, p0) = (peak(&c3), peak(&c0));
    let slowest = [t0, t1, t2, t3].into_iter().fold(0.0, f64::max);
    check(
        (p3 - 0.6).abs() <= 0.1 && (p0 - 0.04).abs() <= 0.02 && ordered && slowest < 5.0,
        format!(
            "peaks: lambda 0.1 {:.3}, 0.01 {:.3}, 0.001 {p3:.3}, p=0 {p0:.3}; ordered {ordered}; slowest curve {slowest:.2} s",
            peak(&c1),
            peak(&c2)
        ),
    )
}

fn teleportation() -> Outcome {
    let regular = pinned();
    let poisson = solve_steady_state(&with_pump(0.0)).unwrap();
    let f0_regular = teleport_fidelity_closed_form(&regular, 0.0);
    let f0_poisson = teleport_fidelity_closed_form(&poisson, 0.0);
    let f_kappa = teleport_fidelity_closed_form(&regular, regular.kappa());
    let rel = (f_kappa / (2.0 / 3.0) - 1.0).abs();
    // general route vs the mu-retaining saturated closed form
    let src = EprSource::symmetric(&with_pump(1.0)).map_err(|e| e.to_string())?;
    let g = FrequencyGrid::linear(-3.0, 3.0, 61).unwrap();
    let general = teleport_fidelity_spectrum(&src, &InputVariances::Coherent, &g, Form::Saturated)
        .map_err(|e| e.to_string())?;
    let cross = general
        .points()
        .map(|(w, v)| (v / teleport_fidelity_saturated(&src.laser1, w) - 1.0).abs())
        .fold(0.0f64, f64::max);
    check(
        f0_regular == 1.0 && f0_poisson == 0.5 && rel < 1e-12 && cross < 1e-3,
        format!(
            "F0 = {f0_regular} (p=1), {f0_poisson} (p=0); F(kappa) = {f_kappa:.15} (rel {rel:.1e}); general vs closed form {cross:.1e}"
        ),
    )
}

fn lyapunov_vs_quadrature() -> Outcome {
    let op = pinned();
    let model = TransferModel::from_operating_point(&op).map_err(|e| e.to_string())?;
    let cov = stationary_covariance(&op).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..3 {
        for j in i..3 {
            let size = (cov[(i, i)] * cov[(j, j)]).sqrt();
            let scale = if i == 1 || j == 1 { 0.5 * op.kappa() * op.mu } else { op.kappa() };
            let integral = integrate_real_line(
                |w| spectral_matrix_at(&model, w).map(|s| s[(i, j)].re).unwrap_or(f64::NAN),
                scale,
                QuadOptions::abs(1e-12 * 2.0 * PI * size).with_rel(1e-11),
            )
            .map_err(|e| e.to_string())?;
            let value = integral.value / (2.0 * PI);
            let dev = if cov[(i, j)].abs() > 1e-9 * size {
                (value / cov[(i, j)] - 1.0).abs()
            } else {
                (value - cov[(i, j)]).abs() / size
            };
            worst = worst.max(dev);
        }
    }
    check(worst < 1e-6, format!("max entrywise relative deviation {worst:.2e}"))
}

fn determinism() -> Outcome {
    let op = pinned();
    let mut cfg = certify::certification_config(&op, 99).map_err(|e| e.to_string())?;
    cfg.n_trajectories = 2;
    let a = simulate(&op, &cfg, Execution::Parallel).map_err(|e| e.to_string())?;
    let b = simulate(&op, &cfg, Execution::Sequential).map_err(|e| e.to_string())?;
    let dir = std::env::temp_dir().join(format!("sublaser-acceptance-{}", std::process::id()));
    let mut identical = true;
    let mut count = 0;
    for (tag, run) in [("a", &a), ("b", &b)] {
        let sub = dir.join(tag);
        std::fs::create_dir_all(&sub).map_err(|e| e.to_string())?;
        for (name, text) in run.output_files() {
            std::fs::write(sub.join(name), text).map_err(|e| e.to_string())?;
        }
    }
    for (name, _) in a.output_files() {
        let x = std::fs::read(dir.join("a").join(&name)).map_err(|e| e.to_string())?;
        let y = std::fs::read(dir.join("b").join(&name)).map_err(|e| e.to_string())?;
        identical &= x == y;
        count += 1;
    }
    let _ = std::fs::remove_dir_all(&dir);
    check(identical, format!("{count} files compared, parallel vs sequential run, seed 99"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        ("analytic/MC spectra within 5% RMS", analytic_vs_monte_carlo),
        ("shot-noise limit and Duan identity at p=0", shot_noise_limit),
        ("squeezing depth and uncertainty bound", squeezing_depth),
        ("Duan band at p=1", duan_band),
        ("dense coding weak-signal limit", dense_coding_weak_signal),
        ("SMI sweep peaks and ordering", fig6_reproduction),
        ("teleportation fidelity", teleportation),
        ("Lyapunov covariance vs spectral integral", lyapunov_vs_quadrature),
        ("bit-identical simulate output", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
