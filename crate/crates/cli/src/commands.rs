//! One adapter per subcommand: build library inputs from the config, call
//! the library, package the result.

use serde::Serialize;
use serde_json::{json, Map, Value};
use sublaser_core::certify::{certify, RMS_THRESHOLD};
use sublaser_core::io::{format_sci, table_csv};
use sublaser_core::langevin::simulate;
use sublaser_core::protocols::{
    alice_signal_spectrum, dense_coding_output_fields, duan_combined_variance, duan_combined_variance_general,
    duan_entangled_band, shannon_information, smi_sweep, smi_sweep_csv, snr_spectrum, teleport_fidelity_closed_form,
    teleport_fidelity_spectrum, EntangledBand, EprSource, InputVariances, OutputField,
};
use sublaser_core::spectra::{
    external_variances, intracavity_variance_x, intracavity_variance_y, phase_variance, FrequencyGrid, SpectralCurve,
};
use sublaser_core::{solve_steady_state, validate_regime, LaserParams, OperatingPoint};

use crate::config::{Operation, RunConfig, Units};
use crate::error::CliError;

/// Seed of `selftest` when none is given.
pub const DEFAULT_SELFTEST_SEED: u64 = 20_240_611;

/// What a subcommand produced. `csv` is `None` when there is no tabular form;
/// `files` is non-empty only for `simulate`.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub record: Value,
    pub csv: Option<String>,
    pub files: Vec<(String, String)>,
    pub warnings: Vec<Value>,
    /// Set when the computation ran but its verdict is a failure.
    pub failed: Option<CliError>,
}

impl Output {
    fn new(record: Value, csv: Option<String>) -> Self {
        Output {
            record,
            csv,
            files: Vec::new(),
            warnings: Vec::new(),
            failed: None,
        }
    }
}

fn record(op: Operation, inputs: Value, values: Value, notes: &[&str], warnings: &[Value]) -> Value {
    json!({
        "operation": op.name(),
        "inputs": inputs,
        "values": values,
        "warnings": warnings,
        "tolerance_notes": notes,
    })
}

fn regime_warnings(ops: &[&OperatingPoint]) -> Vec<Value> {
    ops.iter()
        .enumerate()
        .flat_map(|(i, op)| {
            validate_regime(op).into_iter().map(move |w| {
                json!({ "laser": i, "flag": w.flag, "inequality": w.inequality, "ratio": w.ratio, "message": w.to_string() })
            })
        })
        .collect()
}

/// Quantity/value CSV for scalar results.
fn scalar_csv(rows: &[(&str, f64)]) -> String {
    let mut out = String::from("quantity,value\n");
    for (name, v) in rows {
        out.push_str(name);
        out.push(',');
        out.push_str(&format_sci(*v));
        out.push('\n');
    }
    out
}

/// Frequency grid in rad/s plus the axis reported back in the configured unit.
struct Axis {
    grid: FrequencyGrid,
    reported: Vec<f64>,
    scale: f64,
}

fn axis(cfg: &RunConfig, kappa: f64) -> Result<Axis, CliError> {
    let spec = cfg.grid.as_ref().expect("grid presence checked");
    let given = spec.build()?;
    match cfg.units.unwrap_or_default() {
        Units::RadPerSecond => Ok(Axis {
            reported: given.as_slice().to_vec(),
            grid: given,
            scale: 1.0,
        }),
        Units::Kappa => Ok(Axis {
            grid: FrequencyGrid::new(given.as_slice().iter().map(|w| w * kappa).collect())?,
            reported: given.into_vec(),
            scale: kappa,
        }),
    }
}

fn curves_output(op: Operation, inputs: Value, axis: &Axis, curves: &[&SpectralCurve], extra: Map<String, Value>, notes: &[&str], warnings: Vec<Value>) -> Output {
    let mut header = vec!["omega"];
    let mut columns: Vec<&[f64]> = vec![&axis.reported];
    let mut values = Map::new();
    values.insert("omega".into(), json!(axis.reported));
    for c in curves {
        header.push(&c.label);
        columns.push(&c.value);
        values.insert(c.label.clone(), json!(c.value));
    }
    values.extend(extra);
    let csv = table_csv(&header, &columns);
    let mut out = Output::new(record(op, inputs, Value::Object(values), notes, &warnings), Some(csv));
    out.warnings = warnings;
    out
}

fn laser(cfg: &RunConfig) -> LaserParams {
    cfg.laser.expect("laser presence checked")
}

fn source(cfg: &RunConfig) -> Result<EprSource, CliError> {
    Ok(match (&cfg.laser, &cfg.lasers) {
        (Some(l), None) => EprSource::symmetric(l)?,
        (None, Some([a, b])) => EprSource::from_pair(a, b)?,
        _ => unreachable!("laser/lasers exclusivity checked"),
    })
}

fn pair_inputs(cfg: &RunConfig) -> Value {
    match (&cfg.laser, &cfg.lasers) {
        (Some(l), _) => json!({ "laser": l }),
        (_, Some(p)) => json!({ "lasers": p }),
        _ => Value::Null,
    }
}

fn with(mut base: Value, key: &str, v: impl Serialize) -> Value {
    base[key] = json!(v);
    base
}

/// Executes `op`. Section presence has already been checked.
pub fn run(op: Operation, cfg: &RunConfig, seed: Option<u64>) -> Result<Output, CliError> {
    let exec = cfg.execution.unwrap_or_default();
    let form = cfg.form.unwrap_or_default();
    match op {
        Operation::SteadyState => {
            let p = laser(cfg);
            let o = solve_steady_state(&p)?;
            let warnings = regime_warnings(&[&o]);
            let values = with(json!(o), "steady_state_residual", o.steady_state_residual());
            let csv = scalar_csv(&[
                ("n", o.n),
                ("mu", o.mu),
                ("N1", o.n1),
                ("c", o.c),
                ("Gamma1", o.gamma1_eff),
                ("steady_state_residual", o.steady_state_residual()),
            ]);
            let notes = ["closed-form root; residual is relative to R / kappa"];
            let mut out = Output::new(record(op, json!({ "laser": p }), values, &notes, &warnings), Some(csv));
            out.warnings = warnings;
            Ok(out)
        }
        Operation::Spectrum | Operation::ExternalSpectrum => {
            let p = laser(cfg);
            let o = solve_steady_state(&p)?;
            let axis = axis(cfg, o.kappa())?;
            let (x, y) = if op == Operation::Spectrum {
                (intracavity_variance_x(&o, &axis.grid, form), intracavity_variance_y(&o, &axis.grid)?)
            } else {
                external_variances(&o, &axis.grid, form)?
            };
            let inputs = json!({ "laser": p, "grid": cfg.grid, "form": form, "units": cfg.units.unwrap_or_default() });
            let notes = ["closed forms agree with the transfer-matrix spectrum to relative 1e-10"];
            Ok(curves_output(op, inputs, &axis, &[&x, &y], Map::new(), &notes, regime_warnings(&[&o])))
        }
        Operation::PhaseVariance => {
            let p = laser(cfg);
            let o = solve_steady_state(&p)?;
            let v = phase_variance(&o)?;
            let csv = scalar_csv(&[
                ("y_variance", v.y_variance),
                ("phase_variance", v.phase_variance),
                ("y_variance_exact", v.y_variance_exact),
                ("quadrature_error", v.quadrature_error),
                ("y_variance_leading_order", v.y_variance_leading_order),
                ("phase_variance_leading_order", v.phase_variance_leading_order),
                ("ratio_to_leading_order", v.ratio_to_leading_order),
            ]);
            let warnings = regime_warnings(&[&o]);
            let notes = ["adaptive quadrature, absolute tolerance 1e-12 times the peak of the y spectrum"];
            let mut out = Output::new(record(op, json!({ "laser": p }), json!(v), &notes, &warnings), Some(csv));
            out.warnings = warnings;
            Ok(out)
        }
        Operation::Simulate => {
            let p = laser(cfg);
            let o = solve_steady_state(&p)?;
            let mut sim = cfg.sim.expect("sim presence checked");
            if let Some(s) = seed {
                sim.seed = s;
            }
            let r = simulate(&o, &sim, exec)?;
            let mut spectra = Map::new();
            for (name, content) in r.output_files() {
                if let Some(stem) = name.strip_suffix(".csv") {
                    let c = SpectralCurve::from_csv(stem, &content).expect("library CSV parses");
                    spectra.insert(stem.to_owned(), json!(c.value));
                }
            }
            let values = json!({ "sidecar": r.sidecar_json(), "spectra": spectra });
            let warnings = regime_warnings(&[&o]);
            let notes = ["Welch estimates; per-bin standard errors in sidecar.stderr"];
            let inputs = json!({ "laser": p, "sim": sim, "execution": exec });
            let mut out = Output::new(record(op, inputs, values, &notes, &warnings), None);
            out.files = r.output_files();
            out.warnings = warnings;
            Ok(out)
        }
        Operation::Duan => {
            let src = source(cfg)?;
            let axis = axis(cfg, src.kappa())?;
            let threshold = cfg.duan.map_or(1.0, |d| d.threshold);
            let closed = duan_combined_variance(&src, &axis.grid)?;
            let (q, pp) = duan_combined_variance_general(&src, &axis.grid, form)?;
            let band = match duan_entangled_band(&src, threshold, &axis.grid)? {
                EntangledBand::Bounded { omega_star } => EntangledBand::Bounded {
                    omega_star: omega_star / axis.scale,
                },
                EntangledBand::Everywhere { cap } => EntangledBand::Everywhere { cap: cap / axis.scale },
                EntangledBand::Empty => EntangledBand::Empty,
            };
            let mut extra = Map::new();
            extra.insert("threshold".into(), json!(threshold));
            extra.insert("entangled_band".into(), json!(band));
            let inputs = with(pair_inputs(cfg), "grid", &cfg.grid);
            let inputs = with(with(inputs, "form", form), "units", cfg.units.unwrap_or_default());
            let notes = ["band edge bisected to relative 1e-9"];
            let warnings = regime_warnings(&[&src.laser1, &src.laser2]);
            Ok(curves_output(op, inputs, &axis, &[&closed, &q, &pp], extra, &notes, warnings))
        }
        Operation::DenseCodingSnr => {
            let src = source(cfg)?;
            let dc = cfg.dense_coding.expect("dense_coding presence checked");
            let axis = axis(cfg, src.kappa())?;
            let snr = snr_spectrum(&src, &dc, &axis.grid, form)?;
            let sigma = alice_signal_spectrum(&dc, &axis.grid)?;
            let inputs = with(pair_inputs(cfg), "grid", &cfg.grid);
            let inputs = with(with(with(inputs, "dense_coding", dc), "form", form), "units", cfg.units.unwrap_or_default());
            let warnings = regime_warnings(&[&src.laser1, &src.laser2]);
            Ok(curves_output(op, inputs, &axis, &[&snr, &sigma], Map::new(), &[], warnings))
        }
        Operation::DenseCodingSmi => {
            let src = source(cfg)?;
            let dc = cfg.dense_coding.expect("dense_coding presence checked");
            let info = shannon_information(&src, &dc, form)?;
            let fields = dense_coding_output_fields(&dc)?;
            let describe = |f: &OutputField| {
                json!({
                    "coefficients": f,
                    "naive_norm": f.naive_norm(),
                    "physical_norm": f.physical_norm(),
                })
            };
            let values = json!({
                "information": info,
                "output_fields": { "b1": describe(&fields.b1), "b2": describe(&fields.b2) },
            });
            let csv = scalar_csv(&[
                ("information", info.raw),
                ("two_pi_over_kappa", info.two_pi_over_kappa),
                ("over_kappa", info.over_kappa),
                ("quadrature_error", info.quadrature_error),
            ]);
            let inputs = with(with(pair_inputs(cfg), "dense_coding", dc), "form", form);
            let notes = ["adaptive quadrature, absolute tolerance 1e-10"];
            let warnings = regime_warnings(&[&src.laser1, &src.laser2]);
            let mut out = Output::new(record(op, inputs, values, &notes, &warnings), Some(csv));
            out.warnings = warnings;
            Ok(out)
        }
        Operation::SmiSweep => {
            let spec = cfg.smi.expect("smi presence checked");
            let d = spec.d_a.values()?;
            let points = smi_sweep(&spec.params, &d, exec)?;
            let peak = points.iter().copied().fold((f64::NAN, f64::NEG_INFINITY), |m, p| if p.1 > m.1 { p } else { m });
            let values = json!({
                "d_A": d,
                "smi": points.iter().map(|p| p.1).collect::<Vec<_>>(),
                "peak": { "d_A": peak.0, "smi": peak.1 },
            });
            let notes = ["adaptive quadrature per point, absolute tolerance 1e-10"];
            let inputs = json!({ "smi": spec, "execution": exec });
            Ok(Output::new(record(op, inputs, values, &notes, &[]), Some(smi_sweep_csv(&points))))
        }
        Operation::TeleportFidelity => {
            let src = source(cfg)?;
            let axis = axis(cfg, src.kappa())?;
            let input = match &cfg.teleport {
                None => InputVariances::Coherent,
                Some(t) => {
                    let n = axis.grid.len();
                    if t.input_x.len() != n || t.input_y.len() != n {
                        return Err(CliError::config(format!(
                            "teleport: input_x and input_y need one value per grid point ({n})"
                        )));
                    }
                    let omega = axis.grid.as_slice().to_vec();
                    InputVariances::Curves {
                        x: SpectralCurve::new("input_x", omega.clone(), t.input_x.clone()),
                        y: SpectralCurve::new("input_y", omega, t.input_y.clone()),
                    }
                }
            };
            let fidelity = teleport_fidelity_spectrum(&src, &input, &axis.grid, form)?;
            let mut extra = Map::new();
            if cfg.teleport.is_none() {
                let closed = SpectralCurve::tabulate("fidelity_closed_form", &axis.grid, |w| {
                    teleport_fidelity_closed_form(&src.laser1, w)
                });
                extra.insert(closed.label.clone(), json!(closed.value));
            }
            let inputs = with(pair_inputs(cfg), "grid", &cfg.grid);
            let inputs = with(with(with(inputs, "teleport", &cfg.teleport), "form", form), "units", cfg.units.unwrap_or_default());
            let warnings = regime_warnings(&[&src.laser1, &src.laser2]);
            Ok(curves_output(op, inputs, &axis, &[&fidelity], extra, &[], warnings))
        }
        Operation::Selftest => {
            let seed = seed.unwrap_or(DEFAULT_SELFTEST_SEED);
            let report = certify(seed, exec)?;
            let verdict = if report.passed { "PASS" } else { "FAIL" };
            let values = with(json!(report), "result", verdict);
            let notes = ["mean-removal bins (k = 0, +-1) are excluded from the RMS; see rms_relative_all_bins"];
            let mut out = Output::new(record(op, json!({ "seed": seed, "execution": exec }), values, &notes, &[]), None);
            if !report.passed {
                let worst = report.components.iter().map(|c| c.rms_relative).fold(0.0, f64::max);
                out.failed = Some(CliError {
                    code: "certification_failed".into(),
                    message: format!("largest RMS relative deviation {worst} exceeds {RMS_THRESHOLD}"),
                    kind: sublaser_core::ErrorKind::Numerical,
                });
            }
            Ok(out)
        }
    }
}

/// Cheap validation of every input `op` would use, without computing.
pub fn check(op: Operation, cfg: &RunConfig) -> Result<(), CliError> {
    cfg.check_sections(op)?;
    if let Some(g) = &cfg.grid {
        g.build()?;
    }
    if op.takes_pair() {
        source(cfg)?;
    } else if let Some(l) = &cfg.laser {
        let o = solve_steady_state(l)?;
        if let Some(sim) = &cfg.sim {
            sim.layout_for(&o)?;
        }
    }
    if let Some(dc) = &cfg.dense_coding {
        dc.validate()?;
    }
    if let Some(s) = &cfg.smi {
        s.d_a.values()?;
    }
    Ok(())
}
