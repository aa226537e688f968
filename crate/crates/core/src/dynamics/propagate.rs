use std::fmt;

use crate::atmosphere;
use crate::guidance::{Autopilot, GuidanceCommand, PhaseTransition};

use super::{
    air_density, derivatives, step_rk4, State, StepInterpolant, Vec3, VehicleParams, DEFAULT_DT,
    EARTH_RADIUS, MIN_LIVE_RADIUS,
};

/// Event refinement tolerance on time, s.
const EVENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    /// Scales the standard-atmosphere density; 0 gives vacuum.
    pub density_multiplier: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            density_multiplier: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminationSpec {
    /// Integration step, s.
    pub dt: f64,
    /// Stop when the altitude reaches this sphere (the target's altitude).
    pub impact_altitude: Option<f64>,
    pub t_max: f64,
    /// Stop when the speed drops below this, m/s.
    pub min_speed: Option<f64>,
    /// Fixed target; enables miss-distance reporting.
    pub target: Option<Vec3>,
}

impl Default for TerminationSpec {
    fn default() -> Self {
        TerminationSpec {
            dt: DEFAULT_DT,
            impact_altitude: Some(0.0),
            t_max: 3600.0,
            min_speed: None,
            target: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TerminationReason {
    Impact,
    Timeout,
    SpeedFloor,
    NumericalFailure,
}

impl TerminationReason {
    pub fn name(self) -> &'static str {
        match self {
            TerminationReason::Impact => "impact",
            TerminationReason::Timeout => "timeout",
            TerminationReason::SpeedFloor => "speed-floor",
            TerminationReason::NumericalFailure => "numerical-failure",
        }
    }

    pub fn is_failure(self) -> bool {
        self != TerminationReason::Impact
    }
}

impl fmt::Display for TerminationReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Termination {
    pub reason: TerminationReason,
    /// Final state; refined onto the event for impacts, last good state for
    /// numerical failures.
    pub state: State,
    /// Closest approach to the target over the final step, when a target is set.
    pub miss_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub state: State,
    /// Command held over the step that starts here.
    pub command: GuidanceCommand,
    pub altitude: f64,
    pub speed: f64,
    pub mach: f64,
    /// Pa
    pub dynamic_pressure: f64,
}

impl TrajectorySample {
    fn new(state: State, command: GuidanceCommand, density_multiplier: f64) -> Self {
        let altitude = state.altitude();
        let speed = state.speed();
        let a = atmosphere::sample(altitude.max(atmosphere::MIN_ALTITUDE))
            .map(|s| s.speed_of_sound)
            .unwrap_or(f64::NAN);
        TrajectorySample {
            state,
            command,
            altitude,
            speed,
            mach: speed / a,
            dynamic_pressure: 0.5 * air_density(altitude, density_multiplier) * speed * speed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub transitions: Vec<PhaseTransition>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn initial(&self) -> &State {
        &self.samples[0].state
    }

    pub fn final_state(&self) -> &State {
        &self.termination.state
    }

    pub fn flight_time(&self) -> f64 {
        self.final_state().t - self.initial().t
    }

    /// Great-circle distance from the initial to the final sub-vehicle point, m.
    pub fn downrange(&self) -> f64 {
        ground_distance(&self.initial().position, &self.final_state().position)
    }

    /// Time and speed at the transition into `phase`, if it happened.
    pub fn transition_into(&self, phase: crate::guidance::PhaseId) -> Option<&PhaseTransition> {
        self.transitions.iter().find(|t| t.to == phase)
    }
}

/// Great-circle distance between the ground points under `a` and `b`.
pub fn ground_distance(a: &Vec3, b: &Vec3) -> f64 {
    EARTH_RADIUS * a.cross(b).norm().atan2(a.dot(b))
}

/// Integrates from `initial` under the autopilot's commands until one of the
/// stop conditions in `termination` fires.
pub fn propagate(
    initial: State,
    autopilot: &mut Autopilot,
    vehicle: &VehicleParams,
    env: &Environment,
    termination: &TerminationSpec,
) -> Trajectory {
    let rho_scale = env.density_multiplier;
    let dt = termination.dt;
    let impact_radius = termination.impact_altitude.map(|h| EARTH_RADIUS + h);
    let miss_to = |p: &Vec3| termination.target.map(|t| (t - p).norm());

    let mut samples = Vec::new();
    let mut state = initial;

    if impact_radius.is_some_and(|r| state.radius() <= r) {
        samples.push(TrajectorySample::new(state, GuidanceCommand::zero(state.phase), rho_scale));
        autopilot.finish(&state);
        return Trajectory {
            samples,
            transitions: autopilot.transitions().to_vec(),
            termination: Termination {
                reason: TerminationReason::Impact,
                state,
                miss_distance: miss_to(&state.position),
            },
        };
    }

    let finish = |reason, state: State, miss_distance, samples, autopilot: &mut Autopilot| {
        autopilot.finish(&state);
        Trajectory {
            samples,
            transitions: autopilot.transitions().to_vec(),
            termination: Termination {
                reason,
                state,
                miss_distance,
            },
        }
    };

    loop {
        let command = autopilot.step(&state);
        state.phase = command.phase;
        state.alpha = vehicle.alpha_for(&command);
        samples.push(TrajectorySample::new(state, command, rho_scale));

        if state.t >= termination.t_max - 1e-9 {
            let miss = miss_to(&state.position);
            return finish(TerminationReason::Timeout, state, miss, samples, autopilot);
        }

        let next = step_rk4(&state, &command, dt, vehicle, rho_scale);
        if !next.is_finite() || next.radius() < MIN_LIVE_RADIUS {
            let miss = miss_to(&state.position);
            return finish(TerminationReason::NumericalFailure, state, miss, samples, autopilot);
        }

        if let Some(r_impact) = impact_radius.filter(|r| next.radius() <= *r) {
            let step = StepInterpolant::new(
                state,
                next,
                derivatives(&state, &command, vehicle, rho_scale).d_velocity,
                derivatives(&next, &command, vehicle, rho_scale).d_velocity,
            );
            let s_hit = step.bisect(EVENT_TOLERANCE, |p, _| p.norm() - r_impact);
            let hit = step.state_at(s_hit);
            let miss = termination.target.map(|t| closest_approach(&step, s_hit, &t));
            samples.push(TrajectorySample::new(hit, command, rho_scale));
            return finish(TerminationReason::Impact, hit, miss, samples, autopilot);
        }

        if termination.min_speed.is_some_and(|v| next.speed() < v) {
            samples.push(TrajectorySample::new(next, command, rho_scale));
            let miss = miss_to(&next.position);
            return finish(TerminationReason::SpeedFloor, next, miss, samples, autopilot);
        }

        state = next;
    }
}

/// Minimum distance from `target` to the interpolated path over `[0, s_end]`.
fn closest_approach(step: &StepInterpolant, s_end: f64, target: &Vec3) -> f64 {
    let dist = |s: f64| (step.position(s) - target).norm();
    // Distance along a short, nearly straight segment is unimodal.
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (0.0, s_end);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (dist(c), dist(d));
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = dist(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = dist(d);
        }
    }
    dist(0.5 * (a + b)).min(dist(0.0)).min(dist(s_end))
}
