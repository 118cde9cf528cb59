//! Laser parameters, semiclassical steady state and the validity regime of
//! the adiabatic/linearized description.
//!
//! The injection ratio is `mu = sqrt(n_in / n)`: injected over intracavity
//! amplitude. With that orientation the steady-state condition
//! `sqrt(n) (sqrt(n) - sqrt(n_in)) = R / kappa` becomes `n (1 - mu) = R / kappa`,
//! so a weak lock (`mu << 1`) leaves the free-running photon number intact.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Minimum ratio `min(gamma2, gamma_perp) / max(gamma1, kappa)` for the
/// polarization and lower level to be eliminated adiabatically.
pub const ADIABATIC_RATIO: f64 = 100.0;
/// Minimum ratio `c n / gamma1` for the saturated closed forms.
pub const SATURATION_RATIO: f64 = 100.0;
/// Largest injection ratio counted as a weak lock.
pub const WEAK_INJECTION_MAX_MU: f64 = 0.1;
/// Smallest mean photon number for which linearization is trusted.
pub const MACROSCOPIC_MIN_N: f64 = 1e4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{name} must be strictly positive, got {value}")]
    NonPositiveRate { name: &'static str, value: f64 },
    #[error("pump statistics parameter must satisfy p <= 1, got {0}")]
    PumpStatistics(f64),
    #[error("injected photon number must be >= 0, got {0}")]
    NegativeInjection(f64),
    #[error("{name} is not finite")]
    NonFinite { name: &'static str },
    #[error("no pump and no injection: the only fixed point has zero amplitude")]
    NoLasing,
}

/// Raw physical description of one injection-locked laser.
///
/// All rates are angular (rad/s) except `pump_rate_r`, which counts excited
/// atoms per second.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LaserParamsRepr", into = "LaserParamsRepr")]
pub struct LaserParams {
    pub kappa: f64,
    pub g: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma_perp: f64,
    pub pump_rate_r: f64,
    pub pump_p: f64,
    pub n_in: f64,
    phi_in: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaserParamsRepr {
    kappa: f64,
    g: f64,
    gamma1: f64,
    gamma2: f64,
    gamma_perp: f64,
    #[serde(rename = "pump_rate_R")]
    pump_rate_r: f64,
    pump_p: f64,
    n_in: f64,
    #[serde(default)]
    phi_in: f64,
}

impl TryFrom<LaserParamsRepr> for LaserParams {
    type Error = ModelError;

    fn try_from(r: LaserParamsRepr) -> Result<Self, ModelError> {
        LaserParams::new(
            r.kappa,
            r.g,
            r.gamma1,
            r.gamma2,
            r.gamma_perp,
            r.pump_rate_r,
            r.pump_p,
            r.n_in,
            r.phi_in,
        )
    }
}

impl From<LaserParams> for LaserParamsRepr {
    fn from(p: LaserParams) -> Self {
        LaserParamsRepr {
            kappa: p.kappa,
            g: p.g,
            gamma1: p.gamma1,
            gamma2: p.gamma2,
            gamma_perp: p.gamma_perp,
            pump_rate_r: p.pump_rate_r,
            pump_p: p.pump_p,
            n_in: p.n_in,
            phi_in: p.phi_in,
        }
    }
}

fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl LaserParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        kappa: f64,
        g: f64,
        gamma1: f64,
        gamma2: f64,
        gamma_perp: f64,
        pump_rate_r: f64,
        pump_p: f64,
        n_in: f64,
        phi_in: f64,
    ) -> Result<Self, ModelError> {
        let p = LaserParams {
            kappa,
            g,
            gamma1,
            gamma2,
            gamma_perp,
            pump_rate_r,
            pump_p,
            n_in,
            phi_in: wrap_phase(phi_in),
        };
        p.validate()?;
        Ok(p)
    }

    /// Re-checks every invariant. Useful after mutating public fields.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("kappa", self.kappa),
            ("g", self.g),
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("gamma_perp", self.gamma_perp),
            ("pump_rate_R", self.pump_rate_r),
            ("pump_p", self.pump_p),
            ("n_in", self.n_in),
            ("phi_in", self.phi_in),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name });
            }
        }
        if self.pump_rate_r == 0.0 && self.n_in == 0.0 {
            return Err(ModelError::NoLasing);
        }
        for (name, value) in &fields[..6] {
            if *value <= 0.0 {
                return Err(ModelError::NonPositiveRate { name, value: *value });
            }
        }
        if self.pump_p > 1.0 {
            return Err(ModelError::PumpStatistics(self.pump_p));
        }
        if self.n_in < 0.0 {
            return Err(ModelError::NegativeInjection(self.n_in));
        }
        Ok(())
    }

    /// Injection phase in `[0, 2 pi)`.
    pub fn phi_in(&self) -> f64 {
        self.phi_in
    }

    pub fn with_phi_in(mut self, phi: f64) -> Self {
        self.phi_in = wrap_phase(phi);
        self
    }

    /// Saturation rate constant `c = 2 g^2 / gamma_perp`.
    pub fn saturation_constant(&self) -> f64 {
        2.0 * self.g * self.g / self.gamma_perp
    }

    /// True when every field except the injection phase matches exactly.
    pub fn same_except_phase(&self, other: &LaserParams) -> bool {
        self.kappa == other.kappa
            && self.g == other.g
            && self.gamma1 == other.gamma1
            && self.gamma2 == other.gamma2
            && self.gamma_perp == other.gamma_perp
            && self.pump_rate_r == other.pump_rate_r
            && self.pump_p == other.pump_p
            && self.n_in == other.n_in
    }
}

/// One boolean regime check together with the ratio that decided it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub ok: bool,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RegimeFlag {
    AdiabaticOk,
    SaturationOk,
    WeakInjectionOk,
    MacroscopicOk,
}

impl RegimeFlag {
    pub fn name(self) -> &'static str {
        match self {
            RegimeFlag::AdiabaticOk => "adiabatic_ok",
            RegimeFlag::SaturationOk => "saturation_ok",
            RegimeFlag::WeakInjectionOk => "weak_injection_ok",
            RegimeFlag::MacroscopicOk => "macroscopic_ok",
        }
    }

    pub fn inequality(self) -> &'static str {
        match self {
            RegimeFlag::AdiabaticOk => "min(gamma2, gamma_perp) / max(gamma1, kappa) >= 100",
            RegimeFlag::SaturationOk => "c n / gamma1 >= 100",
            RegimeFlag::WeakInjectionOk => "mu <= 0.1",
            RegimeFlag::MacroscopicOk => "n >= 1e4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeFlags {
    pub adiabatic_ok: RegimeCheck,
    pub saturation_ok: RegimeCheck,
    pub weak_injection_ok: RegimeCheck,
    pub macroscopic_ok: RegimeCheck,
}

impl RegimeFlags {
    pub fn iter(&self) -> impl Iterator<Item = (RegimeFlag, RegimeCheck)> {
        [
            (RegimeFlag::AdiabaticOk, self.adiabatic_ok),
            (RegimeFlag::SaturationOk, self.saturation_ok),
            (RegimeFlag::WeakInjectionOk, self.weak_injection_ok),
            (RegimeFlag::MacroscopicOk, self.macroscopic_ok),
        ]
        .into_iter()
    }
}

/// Solved semiclassical steady state plus the derived rates that enter the
/// linearized fluctuation equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    /// Mean intracavity photon number.
    pub n: f64,
    /// Injection ratio `sqrt(n_in / n)`.
    pub mu: f64,
    /// Steady upper-level population `R / gamma1`.
    #[serde(rename = "N1")]
    pub n1: f64,
    /// Saturation rate constant `2 g^2 / gamma_perp`.
    pub c: f64,
    /// Population relaxation `gamma1 + c n`.
    #[serde(rename = "Gamma1")]
    pub gamma1_eff: f64,
    pub flags: RegimeFlags,
    #[serde(skip)]
    pub params: LaserParams,
}

impl OperatingPoint {
    pub fn kappa(&self) -> f64 {
        self.params.kappa
    }

    pub fn pump_p(&self) -> f64 {
        self.params.pump_p
    }

    pub fn sqrt_n(&self) -> f64 {
        self.n.sqrt()
    }

    /// `c n`, the stimulated part of the population relaxation.
    pub fn cn(&self) -> f64 {
        self.c * self.n
    }

    /// Relative residual of the steady-state amplitude equation.
    pub fn steady_state_residual(&self) -> f64 {
        let p = &self.params;
        let target = p.pump_rate_r / p.kappa;
        let s = self.n.sqrt();
        (s * (s - p.n_in.sqrt()) - target).abs() / target.max(f64::MIN_POSITIVE)
    }
}

/// Solves `sqrt(n) (sqrt(n) - sqrt(n_in)) = R / kappa` for its positive root.
pub fn solve_steady_state(params: &LaserParams) -> Result<OperatingPoint, ModelError> {
    params.validate()?;
    let p = params;
    let target = p.pump_rate_r / p.kappa;
    let sqrt_in = p.n_in.sqrt();
    let sqrt_n = 0.5 * (sqrt_in + (p.n_in + 4.0 * target).sqrt());
    let n = sqrt_n * sqrt_n;
    let mu = sqrt_in / sqrt_n;
    let c = p.saturation_constant();
    let gamma1_eff = p.gamma1 + c * n;

    let adiabatic = p.gamma2.min(p.gamma_perp) / p.gamma1.max(p.kappa);
    let saturation = c * n / p.gamma1;
    let flags = RegimeFlags {
        adiabatic_ok: RegimeCheck {
            ok: adiabatic >= ADIABATIC_RATIO,
            ratio: adiabatic,
        },
        saturation_ok: RegimeCheck {
            ok: saturation >= SATURATION_RATIO,
            ratio: saturation,
        },
        weak_injection_ok: RegimeCheck {
            ok: mu <= WEAK_INJECTION_MAX_MU,
            ratio: mu,
        },
        macroscopic_ok: RegimeCheck {
            ok: n >= MACROSCOPIC_MIN_N,
            ratio: n,
        },
    };

    Ok(OperatingPoint {
        n,
        mu,
        n1: p.pump_rate_r / p.gamma1,
        c,
        gamma1_eff,
        flags,
        params: *p,
    })
}

/// A violated regime assumption. Not an error: results are still computed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeWarning {
    pub flag: RegimeFlag,
    pub inequality: &'static str,
    pub ratio: f64,
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated, ratio {} (requires {})",
            self.flag.name(),
            self.ratio,
            self.inequality
        )
    }
}

pub fn validate_regime(op: &OperatingPoint) -> Vec<RegimeWarning> {
    op.flags
        .iter()
        .filter(|(_, check)| !check.ok)
        .map(|(flag, check)| RegimeWarning {
            flag,
            inequality: flag.inequality(),
            ratio: check.ratio,
        })
        .collect()
}
