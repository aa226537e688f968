//! Point-mass equations of motion over a spherical, non-rotating Earth and
//! the fixed-step fourth-order Runge-Kutta integrator that advances them.

mod deorbit;
mod propagate;

pub use deorbit::{apply_deorbit_pulse, circular_orbit_state, minimum_deorbit_delta_v};
pub use propagate::{
    ground_distance, propagate, Environment, Termination, TerminationReason, TerminationSpec, Trajectory,
    TrajectorySample,
};

use nalgebra::{SVector, Vector3, Vector6};

use crate::atmosphere;
use crate::error::{Error, Result};
use crate::guidance::{GuidanceCommand, PhaseId};

pub type Vec3 = Vector3<f64>;

/// Gravitational parameter of the Earth, m^3/s^2.
pub const MU_EARTH: f64 = 3.986_004_418e14;
/// Radius of the reference sphere, m.
pub const EARTH_RADIUS: f64 = 6_371_000.0;
/// Below this radius the state is treated as corrupt.
pub const MIN_LIVE_RADIUS: f64 = 6_200_000.0;
/// Integration step used when a scenario does not set one, s.
pub const DEFAULT_DT: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// Seconds since scenario start.
    pub t: f64,
    /// Planet-centered inertial position, m.
    pub position: Vec3,
    /// Inertial velocity, m/s.
    pub velocity: Vec3,
    pub phase: PhaseId,
    /// Diagnostic angle of attack, rad.
    pub alpha: f64,
}

impl State {
    pub fn new(t: f64, position: Vec3, velocity: Vec3) -> Self {
        State {
            t,
            position,
            velocity,
            phase: PhaseId::Entry,
            alpha: 0.0,
        }
    }

    pub fn radius(&self) -> f64 {
        self.position.norm()
    }

    pub fn altitude(&self) -> f64 {
        self.radius() - EARTH_RADIUS
    }

    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    /// Rate of change of altitude, m/s.
    pub fn vertical_speed(&self) -> f64 {
        self.velocity.dot(&self.position) / self.radius()
    }

    /// Angle of the velocity above the local horizontal, rad.
    pub fn flight_path_angle(&self) -> f64 {
        let v = self.speed();
        if v == 0.0 {
            return 0.0;
        }
        (self.vertical_speed() / v).clamp(-1.0, 1.0).asin()
    }

    /// `|v|^2 / 2 - mu / r`, J/kg.
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.velocity.norm_squared() - MU_EARTH / self.radius()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.position.iter().all(|x| x.is_finite())
            && self.velocity.iter().all(|x| x.is_finite())
    }

    fn packed(&self) -> Vector6<f64> {
        Vector6::new(
            self.position.x,
            self.position.y,
            self.position.z,
            self.velocity.x,
            self.velocity.y,
            self.velocity.z,
        )
    }

    fn with_packed(&self, t: f64, y: &Vector6<f64>) -> State {
        State {
            t,
            position: y.fixed_rows::<3>(0).into_owned(),
            velocity: y.fixed_rows::<3>(3).into_owned(),
            ..*self
        }
    }
}

/// Mass and aerodynamic model of the vehicle.
///
/// The polar is flat: drag coefficient is `cx0` whatever the commanded lift,
/// and lift is limited to `k_over * cx0`, which makes `k_over` the maximum
/// attainable lift-to-drag ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// kg
    pub mass: f64,
    /// m^2
    pub ref_area: f64,
    pub cx0: f64,
    /// Maximum lift-to-drag ratio K = CY/CX.
    pub k_over: f64,
    /// Lift-curve slope per radian; only used to report angle of attack.
    pub cy_alpha: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        VehicleParams {
            mass: 1500.0,
            ref_area: 2.0,
            cx0: 0.25,
            k_over: 2.0,
            cy_alpha: 2.0,
        }
    }
}

impl VehicleParams {
    pub fn cy_max(&self) -> f64 {
        self.k_over * self.cx0
    }

    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64); 5] = [
            ("vehicle.mass", self.mass),
            ("vehicle.ref_area", self.ref_area),
            ("vehicle.cx0", self.cx0),
            ("vehicle.lift_to_drag", self.k_over),
            ("vehicle.cy_alpha", self.cy_alpha),
        ];
        for (name, value) in checks {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {value}")));
            }
        }
        Ok(())
    }

    /// Diagnostic angle of attack for a lift-coefficient command.
    pub fn alpha_for(&self, command: &GuidanceCommand) -> f64 {
        command.magnitude() / self.cy_alpha
    }
}

/// Time derivative of the translational state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derivative {
    pub d_position: Vec3,
    pub d_velocity: Vec3,
}

/// Aerodynamic accelerations, split so the lift/drag geometry can be checked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeroAcceleration {
    pub drag: Vec3,
    pub lift: Vec3,
    /// Dynamic pressure, Pa.
    pub dynamic_pressure: f64,
}

/// Unit vectors perpendicular to velocity: `up` lies in the plane of position
/// and velocity and points away from the planet; `lateral = v_hat x up` is
/// horizontal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiftFrame {
    pub along: Vec3,
    pub up: Vec3,
    pub lateral: Vec3,
}

impl LiftFrame {
    pub fn new(position: &Vec3, velocity: &Vec3) -> Option<LiftFrame> {
        let speed = velocity.norm();
        if !(speed > 0.0) {
            return None;
        }
        let along = velocity / speed;
        let radial = position.normalize();
        let mut up = radial - along * along.dot(&radial);
        if up.norm() < 1e-12 {
            // Vertical flight: any horizontal direction will do.
            let helper = if radial.x.abs() < 0.9 { Vec3::x() } else { Vec3::y() };
            up = helper - along * along.dot(&helper);
        }
        let up = up.normalize();
        let lateral = along.cross(&up);
        Some(LiftFrame { along, up, lateral })
    }
}

pub fn gravity(position: &Vec3) -> Vec3 {
    let r = position.norm();
    -position * (MU_EARTH / (r * r * r))
}

/// Local air density including the scenario's scalar multiplier.
pub fn air_density(altitude: f64, density_multiplier: f64) -> f64 {
    if density_multiplier == 0.0 {
        return 0.0;
    }
    let h = altitude.max(atmosphere::MIN_ALTITUDE);
    atmosphere::sample(h).map(|s| s.density).unwrap_or(0.0) * density_multiplier
}

pub fn aero_acceleration(
    position: &Vec3,
    velocity: &Vec3,
    command: &GuidanceCommand,
    vehicle: &VehicleParams,
    density_multiplier: f64,
) -> AeroAcceleration {
    let rho = air_density(position.norm() - EARTH_RADIUS, density_multiplier);
    let v2 = velocity.norm_squared();
    let q = 0.5 * rho * v2;
    let zero = AeroAcceleration {
        drag: Vec3::zeros(),
        lift: Vec3::zeros(),
        dynamic_pressure: q,
    };
    let Some(frame) = LiftFrame::new(position, velocity) else {
        return zero;
    };
    if q == 0.0 {
        return zero;
    }
    let scale = q * vehicle.ref_area / vehicle.mass;
    AeroAcceleration {
        drag: -frame.along * (scale * vehicle.cx0),
        lift: (frame.up * command.cy_vertical + frame.lateral * command.cy_lateral) * scale,
        dynamic_pressure: q,
    }
}

pub fn derivatives(
    state: &State,
    command: &GuidanceCommand,
    vehicle: &VehicleParams,
    density_multiplier: f64,
) -> Derivative {
    debug_assert!(command.magnitude() <= vehicle.cy_max() * (1.0 + 1e-12));
    accel(&state.position, &state.velocity, command, vehicle, density_multiplier)
}

fn accel(
    position: &Vec3,
    velocity: &Vec3,
    command: &GuidanceCommand,
    vehicle: &VehicleParams,
    density_multiplier: f64,
) -> Derivative {
    let aero = aero_acceleration(position, velocity, command, vehicle, density_multiplier);
    Derivative {
        d_position: *velocity,
        d_velocity: gravity(position) + aero.drag + aero.lift,
    }
}

/// One classic Runge-Kutta step of `dy/dt = f(y)` for a fixed-size vector.
pub fn rk4<const N: usize>(
    y: &SVector<f64, N>,
    h: f64,
    f: impl Fn(&SVector<f64, N>) -> SVector<f64, N>,
) -> SVector<f64, N> {
    let k1 = f(y);
    let k2 = f(&(y + k1 * (h / 2.0)));
    let k3 = f(&(y + k2 * (h / 2.0)));
    let k4 = f(&(y + k3 * h));
    y + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Advances the state by `dt` holding `command` constant over the step.
pub fn step_rk4(
    state: &State,
    command: &GuidanceCommand,
    dt: f64,
    vehicle: &VehicleParams,
    density_multiplier: f64,
) -> State {
    let y = rk4(&state.packed(), dt, |y| {
        let position = y.fixed_rows::<3>(0).into_owned();
        let velocity = y.fixed_rows::<3>(3).into_owned();
        let d = accel(&position, &velocity, command, vehicle, density_multiplier);
        Vector6::new(
            d.d_position.x,
            d.d_position.y,
            d.d_position.z,
            d.d_velocity.x,
            d.d_velocity.y,
            d.d_velocity.z,
        )
    });
    let mut next = state.with_packed(state.t + dt, &y);
    next.phase = command.phase;
    next.alpha = vehicle.alpha_for(command);
    next
}

/// Cubic Hermite interpolation of a quantity and its derivative over a step
/// of length `h`, evaluated at offset `s` in `[0, h]`.
pub(crate) fn hermite(p0: &Vec3, d0: &Vec3, p1: &Vec3, d1: &Vec3, h: f64, s: f64) -> Vec3 {
    let u = s / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    p0 * h00 + d0 * (h10 * h) + p1 * h01 + d1 * (h11 * h)
}

/// Cubic Hermite reconstruction of the path inside one integration step.
/// Position uses the end velocities as slopes, velocity uses the end
/// accelerations.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepInterpolant {
    pub start: State,
    pub end: State,
    start_accel: Vec3,
    end_accel: Vec3,
}

impl StepInterpolant {
    pub fn new(start: State, end: State, start_accel: Vec3, end_accel: Vec3) -> Self {
        StepInterpolant {
            start,
            end,
            start_accel,
            end_accel,
        }
    }

    pub fn duration(&self) -> f64 {
        self.end.t - self.start.t
    }

    pub fn position(&self, s: f64) -> Vec3 {
        hermite(
            &self.start.position,
            &self.start.velocity,
            &self.end.position,
            &self.end.velocity,
            self.duration(),
            s,
        )
    }

    pub fn velocity(&self, s: f64) -> Vec3 {
        hermite(
            &self.start.velocity,
            &self.start_accel,
            &self.end.velocity,
            &self.end_accel,
            self.duration(),
            s,
        )
    }

    pub fn state_at(&self, s: f64) -> State {
        State {
            t: self.start.t + s,
            position: self.position(s),
            velocity: self.velocity(s),
            ..self.end
        }
    }

    /// Offset of the sign change of `f` within the step, located by bisection
    /// to `tolerance` seconds. `f(0)` and `f(h)` must have opposite signs (or
    /// `f(h)` be zero); the returned offset is on the `f(h)` side.
    pub fn bisect(&self, tolerance: f64, f: impl Fn(&Vec3, &Vec3) -> f64) -> f64 {
        let eval = |s: f64| f(&self.position(s), &self.velocity(s));
        let mut lo = 0.0;
        let mut hi = self.duration();
        let f_lo = eval(lo);
        while hi - lo > tolerance {
            let mid = 0.5 * (lo + hi);
            let f_mid = eval(mid);
            if (f_mid > 0.0) == (f_lo > 0.0) && f_mid != 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}
