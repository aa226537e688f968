//! Geometric infrared seeker: range and field-of-view gating, lock
//! hysteresis, and a line-of-sight rate measurement with Gaussian noise.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::dynamics::{State, Vec3};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerConfig {
    /// m
    pub detection_range: f64,
    /// Half-angle of the field of view around the velocity vector, rad.
    pub fov_half_angle: f64,
    /// Standard deviation of the LOS-rate noise per perpendicular axis, rad/s.
    pub los_noise_sigma: f64,
    /// Continuous detection (or non-detection) needed to gain (or drop) lock, s.
    pub lock_hysteresis: f64,
}

impl Default for SeekerConfig {
    fn default() -> Self {
        SeekerConfig {
            detection_range: 120_000.0,
            fov_half_angle: 30f64.to_radians(),
            los_noise_sigma: 0.5e-3,
            lock_hysteresis: 0.5,
        }
    }
}

impl SeekerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.detection_range > 0.0) {
            return Err(Error::invalid("seeker.detection_range", "must be positive"));
        }
        if !(self.fov_half_angle > 0.0 && self.fov_half_angle < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid(
                "seeker.fov_half_angle_deg",
                "must lie strictly between 0 and 90 degrees",
            ));
        }
        if !(self.los_noise_sigma >= 0.0) {
            return Err(Error::invalid("seeker.los_noise_sigma", "must be non-negative"));
        }
        if !(self.lock_hysteresis >= 0.0) {
            return Err(Error::invalid("seeker.lock_hysteresis", "must be non-negative"));
        }
        Ok(())
    }
}

/// Seeker output for one step. The caller threads it into the next
/// [`sense`] call, which is how the hysteresis timers carry over.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeekerStatus {
    pub locked: bool,
    /// Raw detection this step (inside range and field of view).
    pub detected: bool,
    pub los_unit: Vec3,
    /// Angular velocity of the line of sight, rad/s, perpendicular to it.
    pub los_rate: Vec3,
    /// m/s; only reported while locked.
    pub closing_speed: Option<f64>,
    pub time_since_lock_event: f64,
    /// Time of this measurement.
    pub t: f64,
    /// Start of the current detected / not-detected streak.
    streak_start: f64,
    lock_event_t: f64,
}

impl SeekerStatus {
    /// Status before the first measurement: searching, nothing detected.
    pub fn searching(t: f64) -> Self {
        SeekerStatus {
            locked: false,
            detected: false,
            los_unit: Vec3::zeros(),
            los_rate: Vec3::zeros(),
            closing_speed: None,
            time_since_lock_event: 0.0,
            t,
            streak_start: t,
            lock_event_t: t,
        }
    }
}

/// Line-of-sight angular velocity `(r x v_rel) / |r|^2` for a fixed target.
pub fn los_rate(position: &Vec3, velocity: &Vec3, target: &Vec3) -> Vec3 {
    let r = target - position;
    let v_rel = -velocity;
    r.cross(&v_rel) / r.norm_squared()
}

pub fn in_field_of_view(state: &State, target: &Vec3, config: &SeekerConfig) -> bool {
    let r = target - state.position;
    let range = r.norm();
    let speed = state.speed();
    if range > config.detection_range || range == 0.0 || speed == 0.0 {
        return false;
    }
    let cos_off = r.dot(&state.velocity) / (range * speed);
    cos_off >= config.fov_half_angle.cos()
}

/// Two unit vectors completing an orthonormal basis with `unit`.
fn perpendicular_basis(unit: &Vec3) -> (Vec3, Vec3) {
    let helper = if unit.z.abs() < 0.9 { Vec3::z() } else { Vec3::x() };
    let e1 = unit.cross(&helper).normalize();
    let e2 = unit.cross(&e1);
    (e1, e2)
}

pub fn sense<R: Rng + ?Sized>(
    state: &State,
    target: &Vec3,
    config: &SeekerConfig,
    previous: &SeekerStatus,
    rng: &mut R,
) -> SeekerStatus {
    let t = state.t;
    let detected = in_field_of_view(state, target, config);
    let streak_start = if detected == previous.detected {
        previous.streak_start
    } else {
        t
    };
    let streak = t - streak_start;
    // Tolerates the rounding in accumulated step times.
    let settled = streak >= config.lock_hysteresis - 1e-9;

    let mut locked = previous.locked;
    let mut lock_event_t = previous.lock_event_t;
    if !locked && detected && settled {
        locked = true;
        lock_event_t = t;
    } else if locked && !detected && settled {
        locked = false;
        lock_event_t = t;
    }

    let r = target - state.position;
    let los_unit = r.normalize();
    let mut rate = Vec3::zeros();
    if detected || locked {
        rate = los_rate(&state.position, &state.velocity, target);
        if config.los_noise_sigma > 0.0 {
            let (e1, e2) = perpendicular_basis(&los_unit);
            let n1: f64 = rng.sample(StandardNormal);
            let n2: f64 = rng.sample(StandardNormal);
            rate += (e1 * n1 + e2 * n2) * config.los_noise_sigma;
        }
        rate -= los_unit * rate.dot(&los_unit);
    }

    SeekerStatus {
        locked,
        detected,
        los_unit,
        los_rate: rate,
        closing_speed: locked.then(|| los_unit.dot(&state.velocity)),
        time_since_lock_event: t - lock_event_t,
        t,
        streak_start,
        lock_event_t,
    }
}
