//! Scenario file format: sectioned `key = value` text (TOML syntax) with a
//! closed set of keys. Unknown keys are rejected, angles are written in
//! degrees (`*_deg` keys), everything else is SI.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

use crate::dynamics::{Environment, VehicleParams};
use crate::error::{Error, Result};
use crate::guidance::GuidanceConfig;
use crate::montecarlo::DispersionSpec;
use crate::seeker::SeekerConfig;

use super::{
    DeorbitBlock, EntryBlock, EntryPerturbation, InitialCondition, Integration, Scenario,
    TargetPlacement,
};

pub const SCHEMA_VERSION: i64 = 1;

/// A number written either as an integer or a float.
#[derive(Debug, Clone, Copy)]
struct Real(f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct RealVisitor;
        impl Visitor<'_> for RealVisitor {
            type Value = Real;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Real, E> {
                Ok(Real(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Real, E> {
                Ok(Real(v as f64))
            }
        }
        d.deserialize_any(RealVisitor)
    }
}

fn or(value: Option<Real>, default: f64) -> f64 {
    value.map_or(default, |r| r.0)
}

fn deg_or(value: Option<Real>, default_rad: f64) -> f64 {
    value.map_or(default_rad, |r| r.0.to_radians())
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    schema_version: i64,
    vehicle: RawVehicle,
    #[serde(default)]
    guidance: RawGuidance,
    #[serde(default)]
    seeker: RawSeeker,
    entry: Option<RawEntry>,
    deorbit: Option<RawDeorbit>,
    target: RawTarget,
    #[serde(default)]
    environment: RawEnvironment,
    #[serde(default)]
    integration: RawIntegration,
    #[serde(default)]
    dispersion: RawDispersion,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVehicle {
    mass: Real,
    ref_area: Real,
    lift_to_drag: Real,
    cx0: Option<Real>,
    cy_alpha: Option<Real>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGuidance {
    pullup_trigger_altitude: Option<Real>,
    pullup_radius: Option<Real>,
    cruise_band: Option<[Real; 2]>,
    cruise_reference: Option<Real>,
    cruise_gain_p: Option<Real>,
    cruise_gain_d: Option<Real>,
    pn_gain: Option<Real>,
    entry_alpha_deg: Option<Real>,
    lock_loss_hold: Option<Real>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSeeker {
    detection_range: Option<Real>,
    fov_half_angle_deg: Option<Real>,
    los_noise_sigma: Option<Real>,
    lock_hysteresis: Option<Real>,
    seed: Option<u64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    altitude: Real,
    speed: Real,
    flight_path_angle_deg: Real,
    heading_deg: Option<Real>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDeorbit {
    orbit_altitude: Real,
    delta_v: Real,
    interface_altitude: Option<Real>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTarget {
    downrange: Real,
    crossrange: Option<Real>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawEnvironment {
    density_multiplier: Option<Real>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawIntegration {
    dt: Option<Real>,
    t_max: Option<Real>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDispersion {
    entry_speed_sigma: Option<Real>,
    entry_fpa_sigma_deg: Option<Real>,
    entry_position_sigma: Option<Real>,
    density_multiplier_sigma: Option<Real>,
    target_offset_sigma: Option<Real>,
}

/// Parses and fully validates scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let raw: RawScenario = toml::from_str(text).map_err(|e| toml_error(text, &e))?;
    if raw.schema_version != SCHEMA_VERSION {
        return Err(Error::invalid(
            "schema_version",
            format!("unsupported version {}, expected {SCHEMA_VERSION}", raw.schema_version),
        ));
    }

    let initial = match (raw.entry, raw.deorbit) {
        (Some(_), Some(_)) => {
            return Err(Error::invalid(
                "entry/deorbit",
                "both `entry` and `deorbit` blocks are present; exactly one initial condition is allowed",
            ))
        }
        (None, None) => {
            return Err(Error::invalid(
                "entry/deorbit",
                "no initial condition; provide an `entry` or a `deorbit` block",
            ))
        }
        (Some(e), None) => InitialCondition::Entry(EntryBlock {
            altitude: e.altitude.0,
            speed: e.speed.0,
            flight_path_angle: e.flight_path_angle_deg.0.to_radians(),
            heading: deg_or(e.heading_deg, std::f64::consts::FRAC_PI_2),
        }),
        (None, Some(d)) => InitialCondition::Deorbit(DeorbitBlock {
            orbit_altitude: d.orbit_altitude.0,
            delta_v: d.delta_v.0,
            interface_altitude: or(d.interface_altitude, 100_000.0),
        }),
    };

    let vd = VehicleParams::default();
    let vehicle = VehicleParams {
        mass: raw.vehicle.mass.0,
        ref_area: raw.vehicle.ref_area.0,
        k_over: raw.vehicle.lift_to_drag.0,
        cx0: or(raw.vehicle.cx0, vd.cx0),
        cy_alpha: or(raw.vehicle.cy_alpha, vd.cy_alpha),
    };

    let gd = GuidanceConfig::default();
    let g = raw.guidance;
    let guidance = GuidanceConfig {
        pullup_trigger_altitude: or(g.pullup_trigger_altitude, gd.pullup_trigger_altitude),
        pullup_radius: or(g.pullup_radius, gd.pullup_radius),
        cruise_band: g.cruise_band.map_or(gd.cruise_band, |[lo, hi]| (lo.0, hi.0)),
        cruise_reference: or(g.cruise_reference, gd.cruise_reference),
        cruise_gain_p: or(g.cruise_gain_p, gd.cruise_gain_p),
        cruise_gain_d: or(g.cruise_gain_d, gd.cruise_gain_d),
        pn_gain: or(g.pn_gain, gd.pn_gain),
        entry_alpha: deg_or(g.entry_alpha_deg, gd.entry_alpha),
        lock_loss_hold: or(g.lock_loss_hold, gd.lock_loss_hold),
    };

    let sd = SeekerConfig::default();
    let s = raw.seeker;
    let seeker = SeekerConfig {
        detection_range: or(s.detection_range, sd.detection_range),
        fov_half_angle: deg_or(s.fov_half_angle_deg, sd.fov_half_angle),
        los_noise_sigma: or(s.los_noise_sigma, sd.los_noise_sigma),
        lock_hysteresis: or(s.lock_hysteresis, sd.lock_hysteresis),
    };

    let id = Integration::default();
    let dd = DispersionSpec::default();
    let d = raw.dispersion;
    let scenario = Scenario {
        vehicle,
        guidance,
        seeker,
        seeker_seed: s.seed.unwrap_or(0),
        initial,
        target: TargetPlacement {
            downrange: raw.target.downrange.0,
            crossrange: or(raw.target.crossrange, 0.0),
        },
        environment: Environment {
            density_multiplier: or(raw.environment.density_multiplier, 1.0),
        },
        integration: Integration {
            dt: or(raw.integration.dt, id.dt),
            t_max: or(raw.integration.t_max, id.t_max),
        },
        dispersion: DispersionSpec {
            entry_speed_sigma: or(d.entry_speed_sigma, dd.entry_speed_sigma),
            entry_fpa_sigma: deg_or(d.entry_fpa_sigma_deg, dd.entry_fpa_sigma),
            entry_position_sigma: or(d.entry_position_sigma, dd.entry_position_sigma),
            density_multiplier_sigma: or(d.density_multiplier_sigma, dd.density_multiplier_sigma),
            target_offset_sigma: or(d.target_offset_sigma, dd.target_offset_sigma),
        },
        perturbation: EntryPerturbation::default(),
    };
    scenario.validate()?;
    Ok(scenario)
}

fn positive(field: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {value}")))
    }
}

/// Checks for the parts of a scenario that have no validator of their own.
pub(super) fn validate_rest(s: &Scenario) -> Result<()> {
    positive("integration.dt", s.integration.dt)?;
    positive("integration.t_max", s.integration.t_max)?;
    let rho = s.environment.density_multiplier;
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(Error::invalid(
            "environment.density_multiplier",
            format!("must be non-negative, got {rho}"),
        ));
    }
    if !(s.target.downrange.is_finite() && s.target.crossrange.is_finite()) {
        return Err(Error::invalid("target", "placement must be finite"));
    }
    match &s.initial {
        InitialCondition::Entry(e) => {
            positive("entry.altitude", e.altitude)?;
            positive("entry.speed", e.speed)?;
            if !(e.flight_path_angle.abs() < std::f64::consts::FRAC_PI_2) {
                return Err(Error::invalid(
                    "entry.flight_path_angle_deg",
                    "must lie strictly between -90 and 90",
                ));
            }
            if !e.heading.is_finite() {
                return Err(Error::invalid("entry.heading_deg", "must be finite"));
            }
        }
        InitialCondition::Deorbit(d) => {
            if !(150_000.0..=500_000.0).contains(&d.orbit_altitude) {
                return Err(Error::invalid(
                    "deorbit.orbit_altitude",
                    format!("must lie in [150000, 500000] m, got {}", d.orbit_altitude),
                ));
            }
            positive("deorbit.delta_v", d.delta_v)?;
            positive("deorbit.interface_altitude", d.interface_altitude)?;
            if !(d.interface_altitude < d.orbit_altitude) {
                return Err(Error::invalid(
                    "deorbit.interface_altitude",
                    "must be below the orbit altitude",
                ));
            }
        }
    }
    Ok(())
}

/// Maps a TOML/serde error to a parse error with line and dotted key.
fn toml_error(text: &str, err: &toml::de::Error) -> Error {
    let message = err.message().trim().to_string();
    let line = err.span().map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1);
    let key = message
        .split('`')
        .nth(1)
        .filter(|_| message.starts_with("unknown field") || message.starts_with("missing field"))
        .map(str::to_string);
    let section = line.and_then(|l| enclosing_section(text, l));
    let field = match (section, key) {
        (Some(sec), Some(k)) => Some(format!("{sec}.{k}")),
        (None, Some(k)) => Some(k),
        (sec, None) => sec,
    };
    Error::Parse {
        field,
        line,
        message,
    }
}

/// Name of the `[section]` header governing 1-based `line`, if any.
fn enclosing_section(text: &str, line: usize) -> Option<String> {
    text.lines()
        .take(line)
        .filter_map(|l| {
            let l = l.trim();
            l.strip_prefix('[')
                .and_then(|r| r.strip_suffix(']'))
                .map(|s| s.trim().to_string())
        })
        .last()
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1

[vehicle]
mass = 1500
ref_area = 2.0
lift_to_drag = 2.0

[entry]
altitude = 100000.0
speed = 7600.0
flight_path_angle_deg = -5.0

[target]
downrange = 650000.0
"#;

    fn err(text: &str) -> String {
        parse_scenario(text).unwrap_err().to_string()
    }

    #[test]
    fn minimal_file_gets_defaults() {
        let s = parse_scenario(MINIMAL).unwrap();
        assert_eq!(s.vehicle.mass, 1500.0);
        assert_eq!(s.vehicle.cx0, 0.25);
        assert_eq!(s.guidance, GuidanceConfig::default());
        assert_eq!(s.seeker, SeekerConfig::default());
        assert_eq!(s.integration, Integration::default());
        match s.initial {
            InitialCondition::Entry(e) => {
                assert!((e.flight_path_angle - (-5f64).to_radians()).abs() < 1e-15);
                assert_eq!(e.heading, std::f64::consts::FRAC_PI_2);
            }
            _ => panic!("expected entry block"),
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let text = MINIMAL.replace("ref_area = 2.0", "ref_area = 2.0\nwingspan = 3.0");
        let e = err(&text);
        assert!(e.contains("vehicle.wingspan"), "{e}");
        assert!(e.contains("line 7"), "{e}");
    }

    #[test]
    fn unknown_section_is_named() {
        let e = err(&format!("{MINIMAL}\n[weather]\nwind = 3\n"));
        assert!(e.contains("weather"), "{e}");
    }

    #[test]
    fn zero_dt_rejected() {
        let e = err(&format!("{MINIMAL}\n[integration]\ndt = 0\n"));
        assert!(e.contains("integration.dt"), "{e}");
    }

    #[test]
    fn both_initial_blocks_rejected() {
        let text = format!("{MINIMAL}\n[deorbit]\norbit_altitude = 275000\ndelta_v = 150\n");
        let e = err(&text);
        assert!(e.contains("entry") && e.contains("deorbit") && e.contains("exactly one"), "{e}");
    }

    #[test]
    fn missing_initial_block_rejected() {
        let text = MINIMAL.replace("[entry]", "[environment]\n[unused_entry]");
        assert!(parse_scenario(&text).is_err());
        let text = MINIMAL
            .replace("[entry]\n", "")
            .replace("altitude = 100000.0\nspeed = 7600.0\nflight_path_angle_deg = -5.0\n", "");
        assert!(err(&text).contains("initial condition"));
    }

    #[test]
    fn missing_required_field_is_named() {
        let e = err(&MINIMAL.replace("mass = 1500\n", ""));
        assert!(e.contains("mass"), "{e}");
    }

    #[test]
    fn type_mismatch_has_line() {
        let e = err(&MINIMAL.replace("mass = 1500", "mass = \"heavy\""));
        assert!(e.contains("line 5"), "{e}");
    }

    #[test]
    fn schema_version_checked() {
        let e = err(&MINIMAL.replace("schema_version = 1", "schema_version = 2"));
        assert!(e.contains("schema_version"), "{e}");
    }
}
