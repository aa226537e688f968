use crate::error::{Error, Result};
use crate::guidance::{GuidanceCommand, PhaseId};

use super::{gravity, step_rk4, State, StepInterpolant, Vec3, VehicleParams, EARTH_RADIUS, MU_EARTH};

const COAST_DT: f64 = 0.02;
const EVENT_TOLERANCE: f64 = 1e-6;
/// Perigee this close above the interface still counts as reaching it.
const TANGENCY_SLACK: f64 = 1.0;

/// Equatorial circular orbit state at `altitude`, moving in +y at t = 0.
pub fn circular_orbit_state(altitude: f64) -> State {
    let r = EARTH_RADIUS + altitude;
    State::new(0.0, Vec3::new(r, 0.0, 0.0), Vec3::new(0.0, (MU_EARTH / r).sqrt(), 0.0))
}

/// Smallest retrograde pulse from a circular orbit at `orbit_altitude` that
/// puts perigee at `target_altitude`.
pub fn minimum_deorbit_delta_v(orbit_altitude: f64, target_altitude: f64) -> f64 {
    let ra = EARTH_RADIUS + orbit_altitude;
    let rp = EARTH_RADIUS + target_altitude;
    let v_circular = (MU_EARTH / ra).sqrt();
    let v_apogee = (2.0 * MU_EARTH * rp / (ra * (ra + rp))).sqrt();
    v_circular - v_apogee
}

/// Applies a retrograde pulse to a circular orbit and coasts in vacuum until
/// the altitude first reaches `coast_target_altitude`. The returned state's
/// `t` is the coast time since the pulse.
pub fn apply_deorbit_pulse(
    orbit_altitude: f64,
    delta_v: f64,
    coast_target_altitude: f64,
) -> Result<State> {
    if !(150_000.0..=500_000.0).contains(&orbit_altitude) {
        return Err(Error::domain(
            "orbit_altitude",
            orbit_altitude,
            "150 km <= orbit altitude <= 500 km",
        ));
    }
    if !(delta_v > 0.0) {
        return Err(Error::domain("delta_v", delta_v, "delta_v > 0"));
    }
    if !(coast_target_altitude < orbit_altitude) {
        return Err(Error::domain(
            "coast_target_altitude",
            coast_target_altitude,
            "below the orbit altitude",
        ));
    }
    let required = minimum_deorbit_delta_v(orbit_altitude, coast_target_altitude);
    if delta_v < required - 1e-9 {
        return Err(Error::PulseTooSmall {
            delta_v,
            target_altitude: coast_target_altitude,
            required_delta_v: required,
        });
    }

    let mut state = circular_orbit_state(orbit_altitude);
    state.velocity -= state.velocity.normalize() * delta_v;

    let vehicle = VehicleParams::default();
    let coast = GuidanceCommand::new(0.0, 0.0, PhaseId::Entry);
    let target_radius = EARTH_RADIUS + coast_target_altitude;
    let period = 2.0 * std::f64::consts::PI * ((EARTH_RADIUS + orbit_altitude).powi(3) / MU_EARTH).sqrt();
    let max_steps = (period / COAST_DT).ceil() as usize;

    for _ in 0..max_steps {
        let next = step_rk4(&state, &coast, COAST_DT, &vehicle, 0.0);
        let step = StepInterpolant::new(state, next, gravity(&state.position), gravity(&next.position));
        if next.radius() <= target_radius {
            let s = step.bisect(EVENT_TOLERANCE, |p, _| p.norm() - target_radius);
            return Ok(step.state_at(s));
        }
        if state.vertical_speed() < 0.0 && next.vertical_speed() >= 0.0 {
            // Passed perigee without crossing: only the tangent case is valid.
            let s = step.bisect(EVENT_TOLERANCE, |p, v| p.dot(v));
            let perigee = step.state_at(s);
            if perigee.radius() <= target_radius + TANGENCY_SLACK {
                return Ok(perigee);
            }
            break;
        }
        state = next;
    }
    Err(Error::PulseTooSmall {
        delta_v,
        target_altitude: coast_target_altitude,
        required_delta_v: required,
    })
}
