//! Scenario definition, its text format, output files, and the CLI driver.

mod cli;
mod output;
mod parse;

pub use cli::{cli_main, EXIT_OK, EXIT_RUN_FAILED, EXIT_SCENARIO, EXIT_USAGE, OUT_DIR_ENV};
pub use output::{
    format_sig, read_trajectory_csv, write_report, write_run_table, write_summary, write_trajectory,
    RunSummary, TrajectoryRow, RUN_TABLE_HEADER, TRAJECTORY_HEADER,
};
pub use parse::{parse_scenario, SCHEMA_VERSION};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dynamics::{
    apply_deorbit_pulse, propagate, Environment, State, TerminationSpec, Trajectory, Vec3,
    VehicleParams, EARTH_RADIUS,
};
use crate::error::Result;
use crate::guidance::{Autopilot, GuidanceConfig, SeekerLink};
use crate::montecarlo::DispersionSpec;
use crate::seeker::SeekerConfig;

/// Explicit entry-interface state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryBlock {
    /// m
    pub altitude: f64,
    /// m/s
    pub speed: f64,
    /// rad, negative descending
    pub flight_path_angle: f64,
    /// rad, clockwise from north
    pub heading: f64,
}

/// Entry produced by a retrograde pulse from a circular orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeorbitBlock {
    /// m
    pub orbit_altitude: f64,
    /// m/s
    pub delta_v: f64,
    /// Altitude at which the vacuum coast hands over to atmospheric flight, m.
    pub interface_altitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    Entry(EntryBlock),
    Deorbit(DeorbitBlock),
}

/// Target position relative to the entry ground track, m along the surface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TargetPlacement {
    pub downrange: f64,
    pub crossrange: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integration {
    /// s
    pub dt: f64,
    /// Maximum flight time after entry, s.
    pub t_max: f64,
}

impl Default for Integration {
    fn default() -> Self {
        Integration {
            dt: crate::dynamics::DEFAULT_DT,
            t_max: 3600.0,
        }
    }
}

/// Offsets applied to the entry state by a Monte Carlo draw. The default is
/// the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryPerturbation {
    pub speed_factor: f64,
    /// rad
    pub flight_path_offset: f64,
    /// m
    pub downrange_offset: f64,
    /// m
    pub crossrange_offset: f64,
}

impl Default for EntryPerturbation {
    fn default() -> Self {
        EntryPerturbation {
            speed_factor: 1.0,
            flight_path_offset: 0.0,
            downrange_offset: 0.0,
            crossrange_offset: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub vehicle: VehicleParams,
    pub guidance: GuidanceConfig,
    pub seeker: SeekerConfig,
    /// Seed of the seeker noise stream for single runs.
    pub seeker_seed: u64,
    pub initial: InitialCondition,
    pub target: TargetPlacement,
    pub environment: Environment,
    pub integration: Integration,
    pub dispersion: DispersionSpec,
    pub perturbation: EntryPerturbation,
}

/// Orthonormal frame on the sphere: `origin` is the entry sub-vehicle point,
/// `forward` the horizontal direction of flight there, `right = forward x origin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundFrame {
    pub origin: Vec3,
    pub forward: Vec3,
    pub right: Vec3,
}

impl GroundFrame {
    pub fn new(origin: Vec3, forward: Vec3) -> Self {
        let origin = origin.normalize();
        let forward = (forward - origin * forward.dot(&origin)).normalize();
        GroundFrame {
            origin,
            forward,
            right: forward.cross(&origin),
        }
    }

    /// Unit vector of the surface point `downrange` along the track and
    /// `crossrange` to its right.
    pub fn point(&self, downrange: f64, crossrange: f64) -> Vec3 {
        let theta = downrange / EARTH_RADIUS;
        let phi = crossrange / EARTH_RADIUS;
        (self.origin * theta.cos() + self.forward * theta.sin()) * phi.cos() + self.right * phi.sin()
    }

    /// Along-track direction at the point `downrange` along the track.
    pub fn forward_at(&self, downrange: f64) -> Vec3 {
        let theta = downrange / EARTH_RADIUS;
        self.forward * theta.cos() - self.origin * theta.sin()
    }
}

/// Entry interface expressed relative to its ground frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntryGeometry {
    pub frame: GroundFrame,
    pub t: f64,
    pub altitude: f64,
    pub speed: f64,
    pub flight_path_angle: f64,
}

impl EntryGeometry {
    pub fn from_block(entry: &EntryBlock) -> Self {
        let origin = Vec3::x();
        let north = Vec3::z();
        let east = Vec3::y();
        let forward = north * entry.heading.cos() + east * entry.heading.sin();
        EntryGeometry {
            frame: GroundFrame::new(origin, forward),
            t: 0.0,
            altitude: entry.altitude,
            speed: entry.speed,
            flight_path_angle: entry.flight_path_angle,
        }
    }

    pub fn from_state(state: &State) -> Self {
        EntryGeometry {
            frame: GroundFrame::new(state.position, state.velocity),
            t: state.t,
            altitude: state.altitude(),
            speed: state.speed(),
            flight_path_angle: state.flight_path_angle(),
        }
    }

    pub fn state(&self, perturbation: &EntryPerturbation) -> State {
        let up = self
            .frame
            .point(perturbation.downrange_offset, perturbation.crossrange_offset);
        let forward = self.frame.forward_at(perturbation.downrange_offset);
        let forward = (forward - up * forward.dot(&up)).normalize();
        let speed = self.speed * perturbation.speed_factor;
        let gamma = self.flight_path_angle + perturbation.flight_path_offset;
        State::new(
            self.t,
            up * (EARTH_RADIUS + self.altitude),
            (forward * gamma.cos() + up * gamma.sin()) * speed,
        )
    }
}

/// Everything needed to fly a scenario once it has been resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub geometry: EntryGeometry,
    pub entry: State,
    pub target: Vec3,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.vehicle.validate()?;
        self.guidance.validate()?;
        self.seeker.validate()?;
        self.dispersion.validate()?;
        parse::validate_rest(self)
    }

    /// Unperturbed entry-interface geometry (runs the deorbit coast if needed).
    pub fn entry_geometry(&self) -> Result<EntryGeometry> {
        Ok(match &self.initial {
            InitialCondition::Entry(block) => EntryGeometry::from_block(block),
            InitialCondition::Deorbit(block) => EntryGeometry::from_state(&apply_deorbit_pulse(
                block.orbit_altitude,
                block.delta_v,
                block.interface_altitude,
            )?),
        })
    }

    pub fn resolve(&self) -> Result<Resolved> {
        self.resolve_with(self.entry_geometry()?)
    }

    /// Resolves against a precomputed base geometry; the target is fixed in the
    /// base frame and the perturbation moves only the vehicle.
    pub fn resolve_with(&self, geometry: EntryGeometry) -> Result<Resolved> {
        let target = geometry.frame.point(self.target.downrange, self.target.crossrange) * EARTH_RADIUS;
        Ok(Resolved {
            geometry,
            entry: geometry.state(&self.perturbation),
            target,
        })
    }

    pub fn termination_spec(&self, resolved: &Resolved) -> TerminationSpec {
        TerminationSpec {
            dt: self.integration.dt,
            impact_altitude: Some(0.0),
            t_max: resolved.entry.t + self.integration.t_max,
            min_speed: None,
            target: Some(resolved.target),
        }
    }

    pub fn autopilot(&self, resolved: &Resolved, seeker_seed: u64) -> Autopilot {
        let link = SeekerLink::new(self.seeker, resolved.target, ChaCha8Rng::seed_from_u64(seeker_seed));
        Autopilot::new(self.guidance, self.vehicle).with_seeker(link)
    }

    /// Flies the scenario with the given seeker noise seed.
    pub fn fly_resolved(&self, resolved: &Resolved, seeker_seed: u64) -> Trajectory {
        let mut autopilot = self.autopilot(resolved, seeker_seed);
        propagate(
            resolved.entry,
            &mut autopilot,
            &self.vehicle,
            &self.environment,
            &self.termination_spec(resolved),
        )
    }

    pub fn fly(&self) -> Result<Trajectory> {
        Ok(self.fly_resolved(&self.resolve()?, self.seeker_seed))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_frame_places_points_on_track() {
        let frame = GroundFrame::new(Vec3::x(), Vec3::y());
        let p = frame.point(1000.0, 0.0);
        assert!((crate::dynamics::ground_distance(&Vec3::x(), &p) - 1000.0).abs() < 1e-6);
        assert!(p.y > 0.0);
        // Right of an eastbound track at the equator is south.
        assert!(frame.point(0.0, 500.0).z < 0.0);
        assert!((frame.forward_at(0.0) - Vec3::y()).norm() < 1e-15);
    }

    #[test]
    fn entry_geometry_round_trips_state() {
        let block = EntryBlock {
            altitude: 100_000.0,
            speed: 7600.0,
            flight_path_angle: -0.1,
            heading: 1.2,
        };
        let g = EntryGeometry::from_block(&block);
        let s = g.state(&EntryPerturbation::default());
        assert!((s.altitude() - 100_000.0).abs() < 1e-6);
        assert!((s.speed() - 7600.0).abs() < 1e-9);
        assert!((s.flight_path_angle() + 0.1).abs() < 1e-12);
        let g2 = EntryGeometry::from_state(&s);
        let s2 = g2.state(&EntryPerturbation::default());
        assert!((s2.position - s.position).norm() < 1e-6);
        assert!((s2.velocity - s.velocity).norm() < 1e-9);
    }

    #[test]
    fn perturbation_shifts_entry_point() {
        let block = EntryBlock {
            altitude: 100_000.0,
            speed: 7600.0,
            flight_path_angle: -0.1,
            heading: std::f64::consts::FRAC_PI_2,
        };
        let g = EntryGeometry::from_block(&block);
        let p = EntryPerturbation {
            downrange_offset: 2000.0,
            crossrange_offset: -1000.0,
            speed_factor: 1.01,
            flight_path_offset: 0.001,
        };
        let s = g.state(&p);
        assert!((s.speed() - 7676.0).abs() < 1e-9);
        assert!((s.flight_path_angle() + 0.099).abs() < 1e-12);
        assert!((s.altitude() - 100_000.0).abs() < 1e-6);
        let base = g.state(&EntryPerturbation::default());
        let moved = crate::dynamics::ground_distance(&base.position, &s.position);
        assert!((moved - 5f64.sqrt() * 1000.0).abs() < 1.0, "{moved}");
    }
}
