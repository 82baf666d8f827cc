//! Scenario files: TOML with the sections `solenoid`, `charge`, `shield`,
//! `squid`, `quadrature` and `output`. Every key is optional; unknown keys
//! are rejected.

use std::fmt;
use std::path::PathBuf;

use abflux::constants::ELEMENTARY_CHARGE;
use abflux::fields::{ChargeState, SolenoidLength, SolenoidSpec};
use abflux::shield::ShieldSpec;
use abflux::squid::{Protocol, SquidSpec};
use abflux::Vec3;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Syntax(String),
    Constraint { key: String, constraint: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(f, "config syntax error: {msg}"),
            ConfigError::Constraint { key, constraint } => write!(f, "config error in `{key}`: {constraint}"),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolenoidSection {
    pub center: [f64; 3],
    pub axis: [f64; 3],
    pub radius: f64,
    /// Absent means the infinite idealization.
    pub length: Option<f64>,
    pub turns_per_meter: f64,
    pub current: f64,
    /// Winding count used for EMF linkage.
    pub turns_total: u64,
}

impl Default for SolenoidSection {
    fn default() -> Self {
        SolenoidSection {
            center: [0.0; 3],
            axis: [0.0, 0.0, 1.0],
            radius: 1e-3,
            length: None,
            turns_per_meter: 1e4,
            current: 0.1,
            turns_total: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChargeSection {
    pub q: f64,
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub relativistic_override: bool,
}

impl Default for ChargeSection {
    fn default() -> Self {
        ChargeSection {
            q: -ELEMENTARY_CHARGE,
            position: [2e-3, 0.0, 0.0],
            velocity: [0.0, 1e5, 0.0],
            relativistic_override: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct ShieldSection {
    pub critical_temperature: f64,
    pub energy_gap: f64,
    pub penetration_depth: f64,
    pub thickness: f64,
    pub radius: f64,
    pub gap_multiplier: f64,
    /// Operating temperature (K).
    pub temperature: f64,
    pub spectrum_samples: usize,
}

impl Default for ShieldSection {
    fn default() -> Self {
        let nb = ShieldSpec::niobium();
        ShieldSection {
            critical_temperature: nb.critical_temperature(),
            energy_gap: nb.energy_gap_ev(),
            penetration_depth: nb.penetration_depth(),
            thickness: nb.thickness(),
            radius: nb.radius(),
            gap_multiplier: 1.0,
            temperature: 4.0,
            spectrum_samples: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct SquidSection {
    pub i0: f64,
    pub mutual_inductance_a: f64,
    pub n_quanta: u32,
    pub t_start: f64,
    pub t_end: f64,
    pub ramp_steps: usize,
    pub front_steps: usize,
    pub kp: f64,
    pub ki: f64,
    /// Allow ramps that never cross the shield's T_c.
    pub relaxed: bool,
}

impl Default for SquidSection {
    fn default() -> Self {
        let spec = SquidSpec::default();
        let proto = Protocol::new(10, 10.0, 4.0).expect("valid defaults");
        let (kp, ki) = proto.gains();
        SquidSection {
            i0: spec.i0(),
            mutual_inductance_a: spec.mutual_inductance_a(),
            n_quanta: proto.n_quanta(),
            t_start: proto.t_start(),
            t_end: proto.t_end(),
            ramp_steps: proto.ramp_steps(),
            front_steps: proto.front_steps(),
            kp,
            ki,
            relaxed: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSection {
    pub tol: f64,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        QuadratureSection { tol: 1e-3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// CSV destination; stdout when absent.
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub solenoid: SolenoidSection,
    pub charge: ChargeSection,
    pub shield: ShieldSection,
    pub squid: SquidSection,
    pub quadrature: QuadratureSection,
    pub output: OutputSection,
}

/// A parsed scenario with every physical object constructed and validated.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub raw: RawConfig,
    pub solenoid: SolenoidSpec,
    pub turns_total: u64,
    pub charge: ChargeState,
    pub shield: ShieldSpec,
    pub temperature: f64,
    pub spectrum_samples: usize,
    pub squid: SquidSpec,
    pub protocol: Protocol,
    pub tol: f64,
}

fn named(section: &str, e: abflux::Error) -> ConfigError {
    match e {
        abflux::Error::InvalidParameter { name, constraint } => ConfigError::Constraint {
            key: if name.contains('.') { name.to_string() } else { format!("{section}.{name}") },
            constraint,
        },
        other => ConfigError::Constraint {
            key: section.to_string(),
            constraint: other.to_string(),
        },
    }
}

fn constraint(key: &str, text: &str) -> ConfigError {
    ConfigError::Constraint {
        key: key.to_string(),
        constraint: text.to_string(),
    }
}

pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    ScenarioConfig::from_raw(raw)
}

impl ScenarioConfig {
    pub fn from_raw(raw: RawConfig) -> Result<Self, ConfigError> {
        let sol = &raw.solenoid;
        let length = match sol.length {
            None => SolenoidLength::Infinite,
            Some(l) => SolenoidLength::Finite(l),
        };
        let solenoid = SolenoidSpec::new(
            Vec3::from(sol.center),
            Vec3::from(sol.axis),
            sol.radius,
            length,
            sol.turns_per_meter,
            sol.current,
        )
        .map_err(|e| named("solenoid", e))?;
        if sol.turns_total == 0 {
            return Err(constraint("solenoid.turns_total", "must be at least 1"));
        }

        let ch = &raw.charge;
        let build = if ch.relativistic_override {
            ChargeState::new_relativistic
        } else {
            ChargeState::new
        };
        let charge = build(ch.q, Vec3::from(ch.position), Vec3::from(ch.velocity)).map_err(|e| named("charge", e))?;

        let sh = &raw.shield;
        let shield = ShieldSpec::new(sh.critical_temperature, sh.energy_gap, sh.penetration_depth, sh.thickness, sh.radius)
            .and_then(|s| s.with_gap_multiplier(sh.gap_multiplier))
            .map_err(|e| named("shield", e))?;
        if !(sh.temperature > 0.0 && sh.temperature.is_finite()) {
            return Err(constraint("shield.temperature", "must be positive and finite"));
        }
        if sh.spectrum_samples < 64 || !sh.spectrum_samples.is_power_of_two() {
            return Err(constraint("shield.spectrum_samples", "must be a power of two >= 64"));
        }

        let sq = &raw.squid;
        let squid = SquidSpec::new(sq.i0, sq.mutual_inductance_a).map_err(|e| named("squid", e))?;
        let mut protocol = Protocol::new(sq.n_quanta, sq.t_start, sq.t_end)
            .and_then(|p| p.with_ramp_steps(sq.ramp_steps))
            .and_then(|p| p.with_front_steps(sq.front_steps))
            .and_then(|p| p.with_gains(sq.kp, sq.ki))
            .map_err(|e| named("squid", e))?;
        if sq.relaxed {
            protocol = protocol.relaxed();
        } else {
            let tc = shield.critical_temperature();
            if !(sq.t_start > tc && tc > sq.t_end) {
                return Err(constraint(
                    "squid.t_start/squid.t_end",
                    &format!("need t_start > shield T_c = {tc} K > t_end"),
                ));
            }
        }

        let tol = raw.quadrature.tol;
        if !(tol > 0.0 && tol < 1.0) {
            return Err(constraint("quadrature.tol", "must lie in (0, 1)"));
        }

        Ok(ScenarioConfig {
            solenoid,
            turns_total: sol.turns_total,
            charge,
            shield,
            temperature: sh.temperature,
            spectrum_samples: sh.spectrum_samples,
            squid,
            protocol,
            tol,
            raw,
        })
    }

    /// SHA-256 of the fully resolved config (defaults filled in), so two
    /// files describing the same scenario share a hash.
    pub fn hash(&self) -> String {
        let canonical = toml::to_string(&self.raw).expect("config serializes");
        format!("{:x}", Sha256::digest(canonical.as_bytes()))
    }
}
