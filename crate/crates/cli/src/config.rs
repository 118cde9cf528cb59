//! Run configuration: one JSON file, strictly validated per subcommand.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sublaser_core::langevin::SimConfig;
use sublaser_core::protocols::{DenseCodingParams, SmiParams};
use sublaser_core::spectra::{Form, FrequencyGrid};
use sublaser_core::{Execution, LaserParams};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Operation {
    SteadyState,
    Spectrum,
    ExternalSpectrum,
    PhaseVariance,
    Simulate,
    Duan,
    DenseCodingSnr,
    DenseCodingSmi,
    SmiSweep,
    TeleportFidelity,
    Selftest,
}

impl Operation {
    pub fn name(self) -> &'static str {
        match self {
            Operation::SteadyState => "steady-state",
            Operation::Spectrum => "spectrum",
            Operation::ExternalSpectrum => "external-spectrum",
            Operation::PhaseVariance => "phase-variance",
            Operation::Simulate => "simulate",
            Operation::Duan => "duan",
            Operation::DenseCodingSnr => "dense-coding-snr",
            Operation::DenseCodingSmi => "dense-coding-smi",
            Operation::SmiSweep => "smi-sweep",
            Operation::TeleportFidelity => "teleport-fidelity",
            Operation::Selftest => "selftest",
        }
    }

    /// Sections that must be present.
    fn required(self) -> &'static [Section] {
        use Section::*;
        match self {
            Operation::SteadyState | Operation::PhaseVariance => &[Laser],
            Operation::Spectrum | Operation::ExternalSpectrum => &[Laser, Grid],
            Operation::Simulate => &[Laser, Sim],
            Operation::Duan | Operation::TeleportFidelity => &[Grid],
            Operation::DenseCodingSnr => &[Grid, DenseCoding],
            Operation::DenseCodingSmi => &[DenseCoding],
            Operation::SmiSweep => &[Smi],
            Operation::Selftest => &[],
        }
    }

    /// Sections that may be present in addition to the required ones.
    fn optional(self) -> &'static [Section] {
        use Section::*;
        match self {
            Operation::SteadyState | Operation::PhaseVariance => &[],
            Operation::Spectrum | Operation::ExternalSpectrum => &[Form, Units],
            Operation::Simulate | Operation::SmiSweep | Operation::Selftest => &[Execution],
            Operation::Duan => &[Form, Units, Duan],
            Operation::DenseCodingSnr => &[Form, Units],
            Operation::DenseCodingSmi => &[Form],
            Operation::TeleportFidelity => &[Form, Units, Teleport],
        }
    }

    /// Two-laser protocols accept either `laser` (a symmetric pair) or `lasers`.
    pub fn takes_pair(self) -> bool {
        matches!(
            self,
            Operation::Duan | Operation::DenseCodingSnr | Operation::DenseCodingSmi | Operation::TeleportFidelity
        )
    }

    pub fn default_format(self) -> Format {
        match self {
            Operation::SteadyState | Operation::PhaseVariance | Operation::DenseCodingSmi | Operation::Selftest => {
                Format::Json
            }
            _ => Format::Csv,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Laser,
    Lasers,
    Grid,
    Form,
    Units,
    Execution,
    Sim,
    DenseCoding,
    Duan,
    Teleport,
    Smi,
}

impl Section {
    const ALL: [Section; 11] = [
        Section::Laser,
        Section::Lasers,
        Section::Grid,
        Section::Form,
        Section::Units,
        Section::Execution,
        Section::Sim,
        Section::DenseCoding,
        Section::Duan,
        Section::Teleport,
        Section::Smi,
    ];

    fn key(self) -> &'static str {
        match self {
            Section::Laser => "laser",
            Section::Lasers => "lasers",
            Section::Grid => "grid",
            Section::Form => "form",
            Section::Units => "units",
            Section::Execution => "execution",
            Section::Sim => "sim",
            Section::DenseCoding => "dense_coding",
            Section::Duan => "duan",
            Section::Teleport => "teleport",
            Section::Smi => "smi",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Frequency unit of grid input and of the `omega` output column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Units {
    #[default]
    RadPerSecond,
    /// Frequencies in units of the cavity decay rate `kappa`.
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Spacing {
    #[default]
    Linear,
    /// Zero, plus `points` log-spaced positive frequencies and their negatives.
    LogSymmetric,
}

/// Either a generated grid or an explicit list under `values`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<Spacing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl GridSpec {
    /// The grid in the configured unit.
    pub fn build(&self) -> Result<FrequencyGrid, CliError> {
        let generated = [
            self.omega_min.is_some(),
            self.omega_max.is_some(),
            self.points.is_some(),
            self.spacing.is_some(),
        ];
        if let Some(values) = &self.values {
            if generated.iter().any(|&g| g) {
                return Err(CliError::config("grid: give either `values` or omega_min/omega_max/points, not both"));
            }
            return Ok(FrequencyGrid::new(values.clone())?);
        }
        let (Some(min), Some(max), Some(points)) = (self.omega_min, self.omega_max, self.points) else {
            return Err(CliError::config("grid: omega_min, omega_max and points are required"));
        };
        let grid = match self.spacing.unwrap_or_default() {
            Spacing::Linear => FrequencyGrid::linear(min, max, points),
            Spacing::LogSymmetric => FrequencyGrid::log_symmetric_points(min, max, points),
        };
        Ok(grid?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DuanSpec {
    pub threshold: f64,
}

/// Input-state variances on the output grid; coherent input when absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TeleportSpec {
    pub input_x: Vec<f64>,
    pub input_y: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandwidthRange {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub spacing: SweepSpacing,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepSpacing {
    #[default]
    Linear,
    Log,
}

impl BandwidthRange {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let ok = self.min > 0.0 && self.max >= self.min && self.max.is_finite() && self.points > 0;
        if !ok || (self.points == 1 && self.max != self.min) {
            return Err(CliError::config(format!(
                "smi.d_A: need 0 < min <= max and points >= 1 (points = 1 only when min = max), got {self:?}"
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let last = self.points - 1;
        Ok((0..self.points)
            .map(|k| {
                let t = k as f64 / last as f64;
                match (k == last, self.spacing) {
                    (true, _) => self.max,
                    (false, SweepSpacing::Linear) => self.min + (self.max - self.min) * t,
                    (false, SweepSpacing::Log) => self.min * (self.max / self.min).powf(t),
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmiSpec {
    pub params: SmiParams,
    #[serde(rename = "d_A")]
    pub d_a: BandwidthRange,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operation: Option<Operation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laser: Option<LaserParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lasers: Option<[LaserParams; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<Form>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub units: Option<Units>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub execution: Option<Execution>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dense_coding: Option<DenseCodingParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duan: Option<DuanSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub teleport: Option<TeleportSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smi: Option<SmiSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::config(e.to_string()))
    }

    fn has(&self, s: Section) -> bool {
        match s {
            Section::Laser => self.laser.is_some(),
            Section::Lasers => self.lasers.is_some(),
            Section::Grid => self.grid.is_some(),
            Section::Form => self.form.is_some(),
            Section::Units => self.units.is_some(),
            Section::Execution => self.execution.is_some(),
            Section::Sim => self.sim.is_some(),
            Section::DenseCoding => self.dense_coding.is_some(),
            Section::Duan => self.duan.is_some(),
            Section::Teleport => self.teleport.is_some(),
            Section::Smi => self.smi.is_some(),
        }
    }

    /// Checks that exactly the sections `op` uses are present.
    pub fn check_sections(&self, op: Operation) -> Result<(), CliError> {
        if let Some(named) = self.operation {
            if named != op {
                return Err(CliError::config(format!(
                    "config is for operation `{named}` but `{op}` was requested"
                )));
            }
        }
        for s in op.required() {
            if !self.has(*s) {
                return Err(CliError::new(
                    "missing_section",
                    format!("`{op}` requires the `{}` section", s.key()),
                ));
            }
        }
        if op.takes_pair() {
            match (self.laser.is_some(), self.lasers.is_some()) {
                (true, true) => {
                    return Err(CliError::config(format!("`{op}`: give either `laser` or `lasers`, not both")))
                }
                (false, false) => {
                    return Err(CliError::new(
                        "missing_section",
                        format!("`{op}` requires a `laser` or `lasers` section"),
                    ))
                }
                _ => {}
            }
        }
        for s in Section::ALL {
            let pair = op.takes_pair() && matches!(s, Section::Laser | Section::Lasers);
            if self.has(s) && !pair && !op.required().contains(&s) && !op.optional().contains(&s) {
                return Err(CliError::new(
                    "unexpected_section",
                    format!("`{op}` does not use the `{}` section", s.key()),
                ));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LASER: &str = r#"{"kappa": 1, "g": 0.0313, "gamma1": 0.01, "gamma2": 1000, "gamma_perp": 1000,
        "pump_rate_R": 1e6, "pump_p": 1, "n_in": 400, "phi_in": 0}"#;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::parse(r#"{"lazer": {}}"#).unwrap_err();
        assert_eq!(err.code, "invalid_config");
        let err = RunConfig::parse(r#"{"grid": {"omega_min": 0, "omega_max": 1, "points": 3, "step": 1}}"#).unwrap_err();
        assert!(err.message.contains("step"), "{}", err.message);
    }

    #[test]
    fn sections_must_match_the_operation() {
        let cfg = RunConfig::parse(&format!(r#"{{"laser": {LASER}}}"#)).unwrap();
        cfg.check_sections(Operation::SteadyState).unwrap();
        assert_eq!(cfg.check_sections(Operation::Spectrum).unwrap_err().code, "missing_section");

        let cfg = RunConfig::parse(&format!(r#"{{"laser": {LASER}, "form": "saturated"}}"#)).unwrap();
        assert_eq!(cfg.check_sections(Operation::SteadyState).unwrap_err().code, "unexpected_section");

        let cfg = RunConfig::parse(&format!(
            r#"{{"lasers": [{LASER}, {LASER}], "grid": {{"values": [0, 1]}}}}"#
        ))
        .unwrap();
        cfg.check_sections(Operation::Duan).unwrap();
        assert_eq!(cfg.check_sections(Operation::Spectrum).unwrap_err().code, "missing_section");
    }

    #[test]
    fn named_operation_must_agree() {
        let cfg = RunConfig::parse(&format!(r#"{{"operation": "spectrum", "laser": {LASER}}}"#)).unwrap();
        assert_eq!(cfg.check_sections(Operation::SteadyState).unwrap_err().code, "invalid_config");
    }

    #[test]
    fn grids() {
        let g = GridSpec {
            omega_min: Some(-1.0),
            omega_max: Some(1.0),
            points: Some(5),
            ..Default::default()
        };
        assert_eq!(g.build().unwrap().as_slice(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
        let g = GridSpec {
            omega_min: Some(0.01),
            omega_max: Some(100.0),
            points: Some(5),
            spacing: Some(Spacing::LogSymmetric),
            values: None,
        };
        let w = g.build().unwrap();
        assert_eq!(w.len(), 11);
        assert_eq!(w.as_slice()[5], 0.0);
        assert!((w.as_slice()[7] - 0.1).abs() < 1e-15);
        let both = GridSpec {
            points: Some(3),
            values: Some(vec![0.0]),
            ..Default::default()
        };
        assert_eq!(both.build().unwrap_err().code, "invalid_config");
        let unsorted = GridSpec {
            values: Some(vec![1.0, 0.0]),
            ..Default::default()
        };
        assert_eq!(unsorted.build().unwrap_err().code, "invalid_grid");
    }

    #[test]
    fn bandwidth_sweeps() {
        let r = BandwidthRange {
            min: 0.1,
            max: 20.0,
            points: 3,
            spacing: SweepSpacing::Log,
        };
        let v = r.values().unwrap();
        assert_eq!(v.len(), 3);
        assert!((v[1] - 200f64.sqrt() * 0.1).abs() < 1e-12);
        assert_eq!(v[2], 20.0);
        let bad = BandwidthRange { min: 0.0, ..r };
        assert!(bad.values().is_err());
    }
}
