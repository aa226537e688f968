//! U.S. Standard Atmosphere 1976, geopotential layers 0-86 km, with an
//! isothermal exponential continuation above 86 km.
//!
//! Pressure is integrated layer by layer from the sea-level value and density
//! always comes from the ideal gas law, so the profile is continuous across
//! layer boundaries and `p = rho * R * T` holds to rounding.

use std::sync::LazyLock;

use crate::error::{Error, Result};

/// Specific gas constant of dry air, J/(kg K).
pub const R_AIR: f64 = 287.053;
/// Ratio of specific heats.
pub const GAMMA: f64 = 1.4;
/// Standard gravity used by the geopotential layer equations, m/s^2.
pub const G0: f64 = 9.806_65;
/// Earth radius for the geometric/geopotential conversion, m.
pub const GEOPOTENTIAL_RADIUS: f64 = 6_356_766.0;

pub const SEA_LEVEL_PRESSURE: f64 = 101_325.0;
pub const SEA_LEVEL_TEMPERATURE: f64 = 288.15;

/// Lowest altitude accepted by [`sample`].
pub const MIN_ALTITUDE: f64 = -500.0;
/// Top of the geopotential layer model (geometric).
pub const LAYER_TOP: f64 = 86_000.0;
/// Altitudes above this return the values at this altitude.
pub const CEILING: f64 = 150_000.0;
/// Density/pressure scale height above [`LAYER_TOP`]. Fitted so the 100 km
/// density lands on the tabulated 5.6e-7 kg/m^3.
pub const UPPER_SCALE_HEIGHT: f64 = 5_600.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AtmosphereSample {
    /// K
    pub temperature: f64,
    /// Pa
    pub pressure: f64,
    /// kg/m^3
    pub density: f64,
    /// m/s
    pub speed_of_sound: f64,
}

impl AtmosphereSample {
    fn from_temperature_pressure(temperature: f64, pressure: f64) -> Self {
        AtmosphereSample {
            temperature,
            pressure,
            density: pressure / (R_AIR * temperature),
            speed_of_sound: (GAMMA * R_AIR * temperature).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Layer {
    /// Geopotential base, m'.
    base: f64,
    base_temperature: f64,
    base_pressure: f64,
    /// K per geopotential meter.
    lapse: f64,
}

/// (base geopotential altitude, lapse rate) for the seven USSA1976 layers.
const LAYER_DEFS: [(f64, f64); 7] = [
    (0.0, -0.0065),
    (11_000.0, 0.0),
    (20_000.0, 0.001),
    (32_000.0, 0.0028),
    (47_000.0, 0.0),
    (51_000.0, -0.0028),
    (71_000.0, -0.002),
];

static LAYERS: LazyLock<[Layer; 7]> = LazyLock::new(|| {
    let mut layers = [Layer {
        base: 0.0,
        base_temperature: SEA_LEVEL_TEMPERATURE,
        base_pressure: SEA_LEVEL_PRESSURE,
        lapse: LAYER_DEFS[0].1,
    }; 7];
    for i in 1..layers.len() {
        let prev = layers[i - 1];
        let (base, lapse) = LAYER_DEFS[i];
        let (t, p) = layer_state(&prev, base);
        layers[i] = Layer {
            base,
            base_temperature: t,
            base_pressure: p,
            lapse,
        };
    }
    layers
});

/// Conditions at the top of the layer model, the anchor of the exponential tail.
static TOP: LazyLock<AtmosphereSample> = LazyLock::new(|| layered(geopotential(LAYER_TOP)));

fn layer_state(layer: &Layer, h: f64) -> (f64, f64) {
    let dh = h - layer.base;
    let t = layer.base_temperature + layer.lapse * dh;
    let p = if layer.lapse == 0.0 {
        layer.base_pressure * (-G0 * dh / (R_AIR * layer.base_temperature)).exp()
    } else {
        layer.base_pressure * (t / layer.base_temperature).powf(-G0 / (R_AIR * layer.lapse))
    };
    (t, p)
}

fn layered(h_geopotential: f64) -> AtmosphereSample {
    let layer = LAYERS
        .iter()
        .rev()
        .find(|l| h_geopotential >= l.base)
        .unwrap_or(&LAYERS[0]);
    let (t, p) = layer_state(layer, h_geopotential);
    AtmosphereSample::from_temperature_pressure(t, p)
}

/// Geometric altitude to geopotential altitude.
pub fn geopotential(geometric: f64) -> f64 {
    GEOPOTENTIAL_RADIUS * geometric / (GEOPOTENTIAL_RADIUS + geometric)
}

/// Geopotential altitude to geometric altitude.
pub fn geometric(geopotential: f64) -> f64 {
    GEOPOTENTIAL_RADIUS * geopotential / (GEOPOTENTIAL_RADIUS - geopotential)
}

/// Atmospheric state at a geometric altitude in meters.
pub fn sample(altitude: f64) -> Result<AtmosphereSample> {
    if !(altitude >= MIN_ALTITUDE) {
        return Err(Error::domain("altitude", altitude, "altitude >= -500 m"));
    }
    let h = altitude.min(CEILING);
    if h <= LAYER_TOP {
        return Ok(layered(geopotential(h)));
    }
    let top = *TOP;
    let decay = (-(h - LAYER_TOP) / UPPER_SCALE_HEIGHT).exp();
    Ok(AtmosphereSample::from_temperature_pressure(
        top.temperature,
        top.pressure * decay,
    ))
}

/// `sqrt(gamma * R * T)`.
pub fn speed_of_sound(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain("temperature", temperature, "temperature > 0 K"));
    }
    Ok((GAMMA * R_AIR * temperature).sqrt())
}

pub fn mach(speed: f64, altitude: f64) -> Result<f64> {
    if !(speed >= 0.0) {
        return Err(Error::domain("speed", speed, "speed >= 0"));
    }
    Ok(speed / sample(altitude)?.speed_of_sound)
}
