//! Scenario configuration files.
//!
//! Scenarios are described in TOML (or JSON with the same structure) with
//! explicit unit suffixes on every dimensioned quantity:
//!
//! ```toml
//! [environment]
//! diffusion = "80 um^2/s"       # also accepts "80e-12 m^2/s"
//!
//! [receiver]
//! kind = "absorbing"            # or "passive"
//! radius = "5 um"
//!
//! [field]
//! density = "1e-4 um^-3"
//! activity = 1.0
//! pulse_amplitude = 1e4
//!
//! [sampling]
//! interval = "0.01 s"
//! t_end = "1 s"                 # or an explicit t_grid = [0.0, ...]
//!
//! [placement]
//! max_radius = "50 um"          # "inf" for analytic-only scenarios
//! ```
//!
//! Bare numbers are taken in the canonical units (um, s, um^2/s, um^-3).
//! Parsed files land in [`ScenarioParams`], a flat canonical-unit record
//! that the CLI can override field by field before building the validated
//! [`Scenario`].

use crate::error::{Error, Result};
use crate::scenario::{
    Environment, ReceiverKind, ReceiverSpec, SamplingScheme, Scenario, TransmitterField,
    ValidatedScenario,
};
use serde::Deserialize;
use std::path::Path;

const DIFFUSION_UNITS: &[(&str, f64)] = &[
    ("um^2/s", 1.0),
    ("m^2/s", 1e12),
    ("mm^2/s", 1e6),
    ("cm^2/s", 1e8),
];
const LENGTH_UNITS: &[(&str, f64)] = &[
    ("um", 1.0),
    ("nm", 1e-3),
    ("mm", 1e3),
    ("cm", 1e4),
    ("m", 1e6),
];
const DENSITY_UNITS: &[(&str, f64)] = &[("um^-3", 1.0), ("mm^-3", 1e-9), ("m^-3", 1e-18)];
const TIME_UNITS: &[(&str, f64)] = &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("min", 60.0)];

/// A config value that is either a bare number (canonical units) or a
/// string with a unit suffix, e.g. `"80 um^2/s"`.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum UnitValue {
    Number(f64),
    Tagged(String),
}

fn parse_quantity(
    value: &UnitValue,
    units: &[(&str, f64)],
    what: &str,
    allow_infinite: bool,
) -> Result<f64> {
    let text = match value {
        UnitValue::Number(x) => return Ok(*x),
        UnitValue::Tagged(s) => s.trim(),
    };
    if allow_infinite && (text.eq_ignore_ascii_case("inf") || text.eq_ignore_ascii_case("infinity"))
    {
        return Ok(f64::INFINITY);
    }
    let (number_part, unit_part) = match text.split_once(char::is_whitespace) {
        Some((n, u)) => (n, u.trim()),
        None => (text, ""),
    };
    let magnitude: f64 = number_part
        .parse()
        .map_err(|_| Error::Config(format!("{what}: cannot parse number in {text:?}")))?;
    if unit_part.is_empty() {
        return Ok(magnitude);
    }
    for (unit, scale) in units {
        if *unit == unit_part {
            return Ok(magnitude * scale);
        }
    }
    let known: Vec<&str> = units.iter().map(|(u, _)| *u).collect();
    Err(Error::Config(format!(
        "{what}: unknown unit {unit_part:?}, expected one of {known:?}"
    )))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    environment: RawEnvironment,
    receiver: RawReceiver,
    field: RawField,
    sampling: RawSampling,
    #[serde(default)]
    placement: Option<RawPlacement>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    diffusion: UnitValue,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReceiver {
    kind: ReceiverKind,
    radius: UnitValue,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    density: UnitValue,
    #[serde(default = "default_activity")]
    activity: f64,
    pulse_amplitude: f64,
    #[serde(default)]
    emission_time: Option<UnitValue>,
}

fn default_activity() -> f64 {
    1.0
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    interval: UnitValue,
    #[serde(default)]
    t_end: Option<UnitValue>,
    #[serde(default)]
    t_grid: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPlacement {
    max_radius: UnitValue,
}

/// Flat scenario record in canonical units (um, s). This is the surface the
/// CLI applies `--override key=value` to before validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioParams {
    pub diffusion: f64,
    pub receiver_kind: ReceiverKind,
    pub radius: f64,
    pub density: f64,
    pub activity: f64,
    pub pulse_amplitude: f64,
    pub emission_time: f64,
    pub interval: f64,
    pub t_end: f64,
    /// Explicit sample grid; when absent a uniform grid covers `t_end`.
    pub t_grid: Option<Vec<f64>>,
    pub max_radius: f64,
}

impl ScenarioParams {
    pub fn to_scenario(&self) -> Scenario {
        let sampling = match &self.t_grid {
            Some(grid) => SamplingScheme {
                t_grid: grid.clone(),
                interval: self.interval,
            },
            None => SamplingScheme::uniform(self.t_end, self.interval),
        };
        Scenario {
            environment: Environment {
                diffusion_coefficient: self.diffusion,
            },
            receiver: ReceiverSpec {
                kind: self.receiver_kind,
                radius: self.radius,
            },
            field: TransmitterField {
                density: self.density,
                activity: self.activity,
                pulse_amplitude: self.pulse_amplitude,
                emission_time: self.emission_time,
            },
            sampling,
            max_placement_radius: self.max_radius,
        }
    }

    /// Builds and validates the scenario in one step.
    pub fn build(&self) -> Result<ValidatedScenario> {
        self.to_scenario().validate()
    }

    /// Applies one `key=value` override. Keys accept both the config path
    /// (`field.density`) and conventional short names (`lambda`); values
    /// are numbers in canonical units or unit-tagged strings.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let tagged = UnitValue::Tagged(value.to_string());
        match key {
            "lambda" | "density" | "field.density" => {
                self.density = parse_quantity(&tagged, DENSITY_UNITS, key, false)?;
            }
            "rho" | "activity" | "field.activity" => {
                self.activity = parse_quantity(&tagged, &[], key, false)?;
            }
            "ntx" | "pulse_amplitude" | "field.pulse_amplitude" => {
                self.pulse_amplitude = parse_quantity(&tagged, &[], key, false)?;
            }
            "d" | "diffusion" | "environment.diffusion" => {
                self.diffusion = parse_quantity(&tagged, DIFFUSION_UNITS, key, false)?;
            }
            "r_r" | "radius" | "receiver.radius" => {
                self.radius = parse_quantity(&tagged, LENGTH_UNITS, key, false)?;
            }
            "kind" | "receiver.kind" => {
                self.receiver_kind = match value {
                    "absorbing" | "fully_absorbing" | "fa" => ReceiverKind::Absorbing,
                    "passive" | "ps" => ReceiverKind::Passive,
                    other => {
                        return Err(Error::Config(format!(
                            "receiver.kind: expected absorbing|passive, got {other:?}"
                        )))
                    }
                };
            }
            "tss" | "interval" | "sampling.interval" => {
                self.interval = parse_quantity(&tagged, TIME_UNITS, key, false)?;
                self.t_grid = None;
            }
            "t_end" | "sampling.t_end" => {
                self.t_end = parse_quantity(&tagged, TIME_UNITS, key, false)?;
                self.t_grid = None;
            }
            "big_r" | "max_radius" | "placement.max_radius" => {
                self.max_radius = parse_quantity(&tagged, LENGTH_UNITS, key, true)?;
            }
            other => {
                return Err(Error::Config(format!("unknown override key {other:?}")));
            }
        }
        Ok(())
    }
}

fn convert(raw: RawConfig) -> Result<ScenarioParams> {
    let diffusion = parse_quantity(
        &raw.environment.diffusion,
        DIFFUSION_UNITS,
        "environment.diffusion",
        false,
    )?;
    let radius = parse_quantity(&raw.receiver.radius, LENGTH_UNITS, "receiver.radius", false)?;
    let density = parse_quantity(&raw.field.density, DENSITY_UNITS, "field.density", false)?;
    let emission_time = match &raw.field.emission_time {
        Some(v) => parse_quantity(v, TIME_UNITS, "field.emission_time", false)?,
        None => 0.0,
    };
    let interval = parse_quantity(
        &raw.sampling.interval,
        TIME_UNITS,
        "sampling.interval",
        false,
    )?;
    let t_end = match (&raw.sampling.t_end, &raw.sampling.t_grid) {
        (Some(v), _) => parse_quantity(v, TIME_UNITS, "sampling.t_end", false)?,
        (None, Some(grid)) => grid.last().copied().unwrap_or(0.0),
        (None, None) => {
            return Err(Error::Config(
                "sampling: either t_end or t_grid is required".into(),
            ))
        }
    };
    let max_radius = match &raw.placement {
        Some(p) => parse_quantity(&p.max_radius, LENGTH_UNITS, "placement.max_radius", true)?,
        None => f64::INFINITY,
    };
    Ok(ScenarioParams {
        diffusion,
        receiver_kind: raw.receiver.kind,
        radius,
        density,
        activity: raw.field.activity,
        pulse_amplitude: raw.field.pulse_amplitude,
        emission_time,
        interval,
        t_end,
        t_grid: raw.sampling.t_grid,
        max_radius,
    })
}

/// Parses a TOML scenario description.
pub fn params_from_toml(text: &str) -> Result<ScenarioParams> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("TOML parse error: {e}")))?;
    convert(raw)
}

/// Parses a JSON scenario description with the same structure as the TOML.
pub fn params_from_json(text: &str) -> Result<ScenarioParams> {
    let raw: RawConfig =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("JSON parse error: {e}")))?;
    convert(raw)
}

/// Loads a scenario file, dispatching on the `.toml` / `.json` extension
/// (unknown extensions are tried as TOML).
pub fn params_from_path(path: &Path) -> Result<ScenarioParams> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => params_from_json(&text),
        _ => params_from_toml(&text),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2_TOML: &str = r#"
        [environment]
        diffusion = "80e-12 m^2/s"

        [receiver]
        kind = "absorbing"
        radius = "5 um"

        [field]
        density = "1e-4 um^-3"
        activity = 1.0
        pulse_amplitude = 1e4

        [sampling]
        interval = "0.01 s"
        t_end = "1 s"

        [placement]
        max_radius = "50 um"
    "#;

    #[test]
    fn parses_toml_with_unit_conversion() {
        let p = params_from_toml(FIG2_TOML).unwrap();
        assert_eq!(p.diffusion, 80.0); // 80e-12 m^2/s is exactly 80 um^2/s
        assert_eq!(p.radius, 5.0);
        assert_eq!(p.density, 1e-4);
        assert_eq!(p.max_radius, 50.0);
        let s = p.build().unwrap();
        assert_eq!(s.sampling.t_grid.len(), 101);
        assert_eq!(s.receiver.kind, ReceiverKind::Absorbing);
    }

    #[test]
    fn parses_equivalent_json() {
        let json = r#"{
            "environment": {"diffusion": "80 um^2/s"},
            "receiver": {"kind": "passive", "radius": 5.0},
            "field": {"density": 1e-4, "pulse_amplitude": 1e4},
            "sampling": {"interval": "10 ms", "t_end": 1.0},
            "placement": {"max_radius": "inf"}
        }"#;
        let p = params_from_json(json).unwrap();
        assert_eq!(p.diffusion, 80.0);
        assert_eq!(p.interval, 0.01);
        assert_eq!(p.activity, 1.0);
        assert!(p.max_radius.is_infinite());
        assert_eq!(p.receiver_kind, ReceiverKind::Passive);
    }

    #[test]
    fn rejects_unknown_units_and_fields() {
        let bad_unit = FIG2_TOML.replace("80e-12 m^2/s", "80 furlong^2/s");
        assert!(params_from_toml(&bad_unit).is_err());
        let bad_field = FIG2_TOML.replace("activity = 1.0", "activty = 1.0");
        assert!(params_from_toml(&bad_field).is_err());
    }

    #[test]
    fn explicit_grid_wins_over_uniform() {
        let toml = FIG2_TOML.replace("t_end = \"1 s\"", "t_grid = [0.0, 0.05, 0.25, 1.0]");
        let p = params_from_toml(&toml).unwrap();
        let s = p.build().unwrap();
        assert_eq!(s.sampling.t_grid, vec![0.0, 0.05, 0.25, 1.0]);
    }

    #[test]
    fn overrides_apply_with_aliases_and_units() {
        let mut p = params_from_toml(FIG2_TOML).unwrap();
        p.set("lambda", "0").unwrap();
        assert_eq!(p.density, 0.0);
        p.set("d", "120e-12 m^2/s").unwrap();
        assert_eq!(p.diffusion, 120.0);
        p.set("kind", "passive").unwrap();
        assert_eq!(p.receiver_kind, ReceiverKind::Passive);
        p.set("big_r", "100 um").unwrap();
        assert_eq!(p.max_radius, 100.0);
        assert!(p.set("nope", "1").is_err());
        assert!(p.set("lambda", "abc").is_err());
    }

    #[test]
    fn validation_failure_propagates() {
        let mut p = params_from_toml(FIG2_TOML).unwrap();
        p.radius = -2.0;
        assert!(p.build().is_err());
    }
}
