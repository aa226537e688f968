//! Automatic control: a forward-only phase machine (entry, pull-up, cruise,
//! terminal homing) that turns the vehicle state and seeker output into a
//! two-channel lift-coefficient command.

use std::fmt;

use rand_chacha::ChaCha8Rng;

use crate::atmosphere;
use crate::dynamics::{LiftFrame, State, Vec3, VehicleParams, MU_EARTH};
use crate::error::{Error, Result};
use crate::seeker::{self, SeekerConfig, SeekerStatus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PhaseId {
    Entry,
    PullUp,
    Cruise,
    Terminal,
    Done,
}

impl PhaseId {
    /// 1-based phase number used in output files; `Done` is 5.
    pub fn number(self) -> u8 {
        match self {
            PhaseId::Entry => 1,
            PhaseId::PullUp => 2,
            PhaseId::Cruise => 3,
            PhaseId::Terminal => 4,
            PhaseId::Done => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            PhaseId::Entry => "entry",
            PhaseId::PullUp => "pullup",
            PhaseId::Cruise => "cruise",
            PhaseId::Terminal => "terminal",
            PhaseId::Done => "done",
        }
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Lift-coefficient command held over one integration step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceCommand {
    /// Lift in the vertical plane, positive away from the planet.
    pub cy_vertical: f64,
    /// Horizontal lift perpendicular to velocity, along `v_hat x up`.
    pub cy_lateral: f64,
    pub phase: PhaseId,
    /// The requested lift exceeded the vehicle limit and was scaled down.
    pub saturated: bool,
    /// Terminal phase is flying without seeker lock (held or ballistic).
    pub lock_fallback: bool,
}

impl GuidanceCommand {
    pub fn new(cy_vertical: f64, cy_lateral: f64, phase: PhaseId) -> Self {
        GuidanceCommand {
            cy_vertical,
            cy_lateral,
            phase,
            saturated: false,
            lock_fallback: false,
        }
    }

    pub fn zero(phase: PhaseId) -> Self {
        GuidanceCommand::new(0.0, 0.0, phase)
    }

    pub fn magnitude(&self) -> f64 {
        self.cy_vertical.hypot(self.cy_lateral)
    }

    /// Scales the command onto the disc of radius `cy_max`, keeping direction.
    pub fn saturate(mut self, cy_max: f64) -> Self {
        let norm = self.magnitude();
        if !norm.is_finite() {
            return GuidanceCommand {
                saturated: true,
                ..GuidanceCommand::zero(self.phase)
            };
        }
        if norm > cy_max {
            let scale = cy_max / norm;
            self.cy_vertical *= scale;
            self.cy_lateral *= scale;
            while self.magnitude() > cy_max {
                self.cy_vertical = shrink(self.cy_vertical);
                self.cy_lateral = shrink(self.cy_lateral);
            }
            self.saturated = true;
        }
        self
    }
}

fn shrink(x: f64) -> f64 {
    if x > 0.0 {
        x.next_down()
    } else if x < 0.0 {
        x.next_up()
    } else {
        x
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidanceConfig {
    /// Entry -> PullUp below this altitude, m.
    pub pullup_trigger_altitude: f64,
    /// Commanded radius of the pull-up arc, m.
    pub pullup_radius: f64,
    /// Cruise altitude band `(low, high)`, m.
    pub cruise_band: (f64, f64),
    /// Altitude-hold setpoint, m.
    pub cruise_reference: f64,
    /// Altitude error gain, (m/s^2) per m.
    pub cruise_gain_p: f64,
    /// Vertical speed gain, (m/s^2) per (m/s).
    pub cruise_gain_d: f64,
    /// Proportional navigation constant.
    pub pn_gain: f64,
    /// Trim angle of attack flown during entry, rad.
    pub entry_alpha: f64,
    /// How long the last terminal command is held after losing lock, s.
    pub lock_loss_hold: f64,
}

impl Default for GuidanceConfig {
    fn default() -> Self {
        GuidanceConfig {
            pullup_trigger_altitude: 85_000.0,
            pullup_radius: 45_000.0,
            cruise_band: (30_000.0, 33_000.0),
            cruise_reference: 31_500.0,
            // omega_n = 0.1 rad/s, zeta = 0.8
            cruise_gain_p: 0.01,
            cruise_gain_d: 0.16,
            pn_gain: 4.0,
            entry_alpha: 3f64.to_radians(),
            lock_loss_hold: 0.5,
        }
    }
}

impl GuidanceConfig {
    pub fn validate(&self) -> Result<()> {
        let (low, high) = self.cruise_band;
        if !(low > 0.0) {
            return Err(Error::invalid("guidance.cruise_band", "lower bound must be positive"));
        }
        if !(low < high) {
            return Err(Error::invalid("guidance.cruise_band", "lower bound must be below upper bound"));
        }
        if !(high < self.pullup_trigger_altitude) {
            return Err(Error::invalid(
                "guidance.pullup_trigger_altitude",
                "must be above the cruise band",
            ));
        }
        if !(self.cruise_reference >= low && self.cruise_reference <= high) {
            return Err(Error::invalid("guidance.cruise_reference", "must lie inside the cruise band"));
        }
        if !(self.pullup_radius > 0.0) {
            return Err(Error::invalid("guidance.pullup_radius", "must be positive"));
        }
        if !(self.cruise_gain_p >= 0.0) {
            return Err(Error::invalid("guidance.cruise_gain_p", "must be non-negative"));
        }
        if !(self.cruise_gain_d >= 0.0) {
            return Err(Error::invalid("guidance.cruise_gain_d", "must be non-negative"));
        }
        if !(2.0..=6.0).contains(&self.pn_gain) {
            return Err(Error::invalid("guidance.pn_gain", "must lie in [2, 6]"));
        }
        if !(self.entry_alpha.abs() < std::f64::consts::FRAC_PI_2) {
            return Err(Error::invalid("guidance.entry_alpha_deg", "must lie strictly within (-90, 90)"));
        }
        if !(self.lock_loss_hold >= 0.0) {
            return Err(Error::invalid("guidance.lock_loss_hold", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTransition {
    pub from: PhaseId,
    pub to: PhaseId,
    pub t: f64,
    pub altitude: f64,
    pub speed: f64,
    pub flight_path_angle: f64,
}

/// Seeker wiring owned by the autopilot: configuration, fixed target, its own
/// noise stream, and the status threaded between calls.
#[derive(Debug, Clone)]
pub struct SeekerLink {
    pub config: SeekerConfig,
    pub target: Vec3,
    rng: ChaCha8Rng,
    status: Option<SeekerStatus>,
}

impl SeekerLink {
    pub fn new(config: SeekerConfig, target: Vec3, rng: ChaCha8Rng) -> Self {
        SeekerLink {
            config,
            target,
            rng,
            status: None,
        }
    }

    fn sense(&mut self, state: &State) -> SeekerStatus {
        let previous = self.status.unwrap_or_else(|| SeekerStatus::searching(state.t));
        let status = seeker::sense(state, &self.target, &self.config, &previous, &mut self.rng);
        self.status = Some(status);
        status
    }
}

/// Dynamic pressure the autopilot assumes: nominal atmosphere, no dispersion.
pub fn nominal_dynamic_pressure(state: &State) -> f64 {
    let h = state.altitude().max(atmosphere::MIN_ALTITUDE);
    let rho = atmosphere::sample(h).map(|s| s.density).unwrap_or(0.0);
    0.5 * rho * state.velocity.norm_squared()
}

fn local_gravity(state: &State) -> f64 {
    MU_EARTH / state.position.norm_squared()
}

/// Lift coefficient that produces `accel` (m/s^2) normal to the velocity.
/// With no dynamic pressure the result is infinite with the sign of `accel`,
/// which saturation maps to the limit.
fn lift_coefficient(accel: f64, q: f64, vehicle: &VehicleParams) -> f64 {
    let denom = q * vehicle.ref_area;
    if denom > 0.0 {
        accel * vehicle.mass / denom
    } else if accel == 0.0 {
        0.0
    } else {
        accel.signum() * f64::INFINITY
    }
}

fn limited(cy_vertical: f64, cy_lateral: f64, phase: PhaseId, vehicle: &VehicleParams) -> GuidanceCommand {
    let cy_max = vehicle.cy_max();
    let clip = |x: f64| if x.is_infinite() { x.signum() * cy_max * 2.0 } else { x };
    GuidanceCommand::new(clip(cy_vertical), clip(cy_lateral), phase).saturate(cy_max)
}

pub fn command_entry(config: &GuidanceConfig, vehicle: &VehicleParams) -> GuidanceCommand {
    limited(vehicle.cy_alpha * config.entry_alpha, 0.0, PhaseId::Entry, vehicle)
}

/// Lift needed to fly a vertical arc of radius `pullup_radius`:
/// `a_n = V^2 / R - g cos(gamma)`.
pub fn pullup_normal_acceleration(state: &State, config: &GuidanceConfig) -> f64 {
    state.velocity.norm_squared() / config.pullup_radius
        - local_gravity(state) * state.flight_path_angle().cos()
}

pub fn command_pullup(state: &State, config: &GuidanceConfig, vehicle: &VehicleParams) -> GuidanceCommand {
    let a_n = pullup_normal_acceleration(state, config);
    let cy = lift_coefficient(a_n, nominal_dynamic_pressure(state), vehicle);
    limited(cy, 0.0, PhaseId::PullUp, vehicle)
}

/// Lift acceleration balancing gravity less centrifugal relief at the current speed.
pub fn cruise_trim_acceleration(state: &State) -> f64 {
    local_gravity(state) - state.velocity.norm_squared() / state.radius()
}

/// PD altitude-hold correction, m/s^2.
pub fn cruise_correction(state: &State, config: &GuidanceConfig) -> f64 {
    -config.cruise_gain_p * (state.altitude() - config.cruise_reference)
        - config.cruise_gain_d * state.vertical_speed()
}

pub fn command_cruise(state: &State, config: &GuidanceConfig, vehicle: &VehicleParams) -> GuidanceCommand {
    let accel = cruise_trim_acceleration(state) + cruise_correction(state, config);
    let cy = lift_coefficient(accel, nominal_dynamic_pressure(state), vehicle);
    limited(cy, 0.0, PhaseId::Cruise, vehicle)
}

/// Proportional navigation acceleration `N * Vc * (Omega x los)`.
pub fn pn_acceleration(status: &SeekerStatus, config: &GuidanceConfig) -> Vec3 {
    let closing = status.closing_speed.unwrap_or(0.0);
    status.los_rate.cross(&status.los_unit) * (config.pn_gain * closing)
}

/// Gravity component normal to velocity, negated: the lift that cancels it.
pub fn gravity_bias(state: &State) -> Vec3 {
    let g = crate::dynamics::gravity(&state.position);
    let Some(frame) = LiftFrame::new(&state.position, &state.velocity) else {
        return Vec3::zeros();
    };
    -(g - frame.along * g.dot(&frame.along))
}

/// Terminal-phase lift coefficients before saturation.
pub fn terminal_coefficients(
    state: &State,
    status: &SeekerStatus,
    config: &GuidanceConfig,
    vehicle: &VehicleParams,
) -> (f64, f64) {
    let Some(frame) = LiftFrame::new(&state.position, &state.velocity) else {
        return (0.0, 0.0);
    };
    let accel = pn_acceleration(status, config) + gravity_bias(state);
    let q = nominal_dynamic_pressure(state);
    (
        lift_coefficient(accel.dot(&frame.up), q, vehicle),
        lift_coefficient(accel.dot(&frame.lateral), q, vehicle),
    )
}

pub fn command_terminal(
    state: &State,
    status: &SeekerStatus,
    config: &GuidanceConfig,
    vehicle: &VehicleParams,
) -> GuidanceCommand {
    let (cy_v, cy_l) = terminal_coefficients(state, status, config, vehicle);
    limited(cy_v, cy_l, PhaseId::Terminal, vehicle)
}

/// Phase machine plus the per-phase control laws.
#[derive(Debug, Clone)]
pub struct Autopilot {
    pub config: GuidanceConfig,
    pub vehicle: VehicleParams,
    phase: PhaseId,
    transitions: Vec<PhaseTransition>,
    seeker: Option<SeekerLink>,
    last_terminal: Option<GuidanceCommand>,
    lock_lost_at: Option<f64>,
}

impl Autopilot {
    pub fn new(config: GuidanceConfig, vehicle: VehicleParams) -> Self {
        Autopilot {
            config,
            vehicle,
            phase: PhaseId::Entry,
            transitions: Vec::new(),
            seeker: None,
            last_terminal: None,
            lock_lost_at: None,
        }
    }

    pub fn with_seeker(mut self, link: SeekerLink) -> Self {
        self.seeker = Some(link);
        self
    }

    /// Starts the machine in `phase` instead of `Entry`.
    pub fn starting_in(mut self, phase: PhaseId) -> Self {
        self.phase = phase;
        self
    }

    pub fn phase(&self) -> PhaseId {
        self.phase
    }

    pub fn transitions(&self) -> &[PhaseTransition] {
        &self.transitions
    }

    fn record(&mut self, to: PhaseId, state: &State) {
        self.transitions.push(PhaseTransition {
            from: self.phase,
            to,
            t: state.t,
            altitude: state.altitude(),
            speed: state.speed(),
            flight_path_angle: state.flight_path_angle(),
        });
        self.phase = to;
    }

    /// Applies at most one forward transition and returns the current phase.
    pub fn update_phase(&mut self, state: &State, status: &SeekerStatus) -> PhaseId {
        let next = match self.phase {
            PhaseId::Entry if state.altitude() <= self.config.pullup_trigger_altitude => Some(PhaseId::PullUp),
            PhaseId::PullUp
                if state.flight_path_angle() >= 0.0 || state.altitude() <= self.config.cruise_band.1 =>
            {
                Some(PhaseId::Cruise)
            }
            PhaseId::Cruise if status.locked => Some(PhaseId::Terminal),
            _ => None,
        };
        if let Some(to) = next {
            self.record(to, state);
        }
        self.phase
    }

    /// Guidance for one step given an externally produced seeker status.
    pub fn update(&mut self, state: &State, status: &SeekerStatus) -> GuidanceCommand {
        match self.update_phase(state, status) {
            PhaseId::Entry => command_entry(&self.config, &self.vehicle),
            PhaseId::PullUp => command_pullup(state, &self.config, &self.vehicle),
            PhaseId::Cruise => command_cruise(state, &self.config, &self.vehicle),
            PhaseId::Terminal => self.terminal(state, status),
            PhaseId::Done => GuidanceCommand::zero(PhaseId::Done),
        }
    }

    fn terminal(&mut self, state: &State, status: &SeekerStatus) -> GuidanceCommand {
        if status.locked {
            self.lock_lost_at = None;
            let cmd = command_terminal(state, status, &self.config, &self.vehicle);
            self.last_terminal = Some(cmd);
            return cmd;
        }
        let lost_at = *self.lock_lost_at.get_or_insert(state.t);
        let mut cmd = match self.last_terminal {
            Some(last) if state.t - lost_at < self.config.lock_loss_hold => last,
            _ => GuidanceCommand::zero(PhaseId::Terminal),
        };
        cmd.lock_fallback = true;
        cmd
    }

    /// Senses (from cruise onwards, when a seeker is attached) and then
    /// updates. This is the per-step entry point used by propagation.
    pub fn step(&mut self, state: &State) -> GuidanceCommand {
        let status = match (&mut self.seeker, self.phase >= PhaseId::Cruise) {
            (Some(link), true) => link.sense(state),
            _ => SeekerStatus::searching(state.t),
        };
        self.update(state, &status)
    }

    /// Marks the end of flight.
    pub fn finish(&mut self, state: &State) {
        if self.phase != PhaseId::Done {
            self.record(PhaseId::Done, state);
        }
    }
}
