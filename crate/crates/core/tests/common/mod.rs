#![allow(dead_code)]

use std::path::PathBuf;

use glidesim::dynamics::{rk4, step_rk4, State, Vec3, VehicleParams, EARTH_RADIUS, MU_EARTH};
use glidesim::guidance::{GuidanceCommand, PhaseId};
use nalgebra::Vector2;
use glidesim::montecarlo::DispersionSpec;
use glidesim::scenario::{parse_scenario, Scenario};

pub fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

pub fn load(name: &str) -> Scenario {
    let text = std::fs::read_to_string(scenario_path(name)).unwrap();
    parse_scenario(&text).unwrap()
}

pub fn nominal() -> Scenario {
    load("nominal.scenario")
}

/// Nominal scenario with the seeker noise and all dispersions switched off.
pub fn nominal_quiet() -> Scenario {
    let mut s = nominal();
    s.seeker.los_noise_sigma = 0.0;
    s.dispersion = DispersionSpec::none();
    s
}

/// Closed-form two-body motion, used as an independent oracle for the
/// integrator. Elliptic orbits only.
#[derive(Debug, Clone, Copy)]
pub struct Ellipse {
    pub a: f64,
    pub e: f64,
    p_hat: Vec3,
    q_hat: Vec3,
    /// Mean anomaly at t = t0.
    m0: f64,
    t0: f64,
}

impl Ellipse {
    pub fn from_state(t0: f64, r: Vec3, v: Vec3) -> Self {
        let h = r.cross(&v);
        let energy = v.norm_squared() / 2.0 - MU_EARTH / r.norm();
        let a = -MU_EARTH / (2.0 * energy);
        let e_vec = v.cross(&h) / MU_EARTH - r.normalize();
        let e = e_vec.norm();
        let p_hat = e_vec / e;
        let q_hat = h.normalize().cross(&p_hat);
        let nu = r.dot(&q_hat).atan2(r.dot(&p_hat));
        let ecc_anomaly = 2.0 * (((1.0 - e) / (1.0 + e)).sqrt() * (nu / 2.0).tan()).atan();
        Ellipse {
            a,
            e,
            p_hat,
            q_hat,
            m0: ecc_anomaly - e * ecc_anomaly.sin(),
            t0,
        }
    }

    pub fn mean_motion(&self) -> f64 {
        (MU_EARTH / self.a.powi(3)).sqrt()
    }

    pub fn perigee_radius(&self) -> f64 {
        self.a * (1.0 - self.e)
    }

    /// Solves Kepler's equation `M = E - e sin E` by Newton iteration.
    pub fn eccentric_anomaly(&self, mean_anomaly: f64) -> f64 {
        let mut big_e = if self.e < 0.8 { mean_anomaly } else { std::f64::consts::PI };
        for _ in 0..50 {
            let f = big_e - self.e * big_e.sin() - mean_anomaly;
            let step = f / (1.0 - self.e * big_e.cos());
            big_e -= step;
            if step.abs() < 1e-15 {
                break;
            }
        }
        big_e
    }

    pub fn state_at(&self, t: f64) -> (Vec3, Vec3) {
        let m = self.m0 + self.mean_motion() * (t - self.t0);
        let big_e = self.eccentric_anomaly(m);
        let (s, c) = big_e.sin_cos();
        let b = (1.0 - self.e * self.e).sqrt();
        let r = self.a * (1.0 - self.e * c);
        let position = (self.p_hat * (c - self.e) + self.q_hat * (b * s)) * self.a;
        let velocity = (self.p_hat * (-s) + self.q_hat * (b * c)) * ((MU_EARTH * self.a).sqrt() / r);
        (position, velocity)
    }

    /// First time after `t0` at which the radius falls to `radius`, moving
    /// toward perigee from an apogee start.
    pub fn time_to_radius(&self, radius: f64) -> f64 {
        let cos_e = (1.0 - radius / self.a) / self.e;
        // Descending branch: eccentric anomaly in (pi, 2 pi) relative to perigee.
        let big_e = 2.0 * std::f64::consts::PI - cos_e.acos();
        let m = big_e - self.e * big_e.sin();
        let dm = (m - self.m0).rem_euclid(2.0 * std::f64::consts::PI);
        self.t0 + dm / self.mean_motion()
    }
}

fn orders(errors: &[f64]) -> Vec<f64> {
    errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
}

fn lifting_arc(dt: f64) -> State {
    // 4 s of lifting flight at 5 km and 2 km/s, inside one atmosphere layer.
    let vehicle = VehicleParams {
        cx0: 0.06,
        ..VehicleParams::default()
    };
    let command = GuidanceCommand::new(0.1, 0.03, PhaseId::Terminal);
    let r = EARTH_RADIUS + 5_000.0;
    let mut s = State::new(0.0, Vec3::new(r, 0.0, 0.0), Vec3::new(-50.0, 2000.0, 0.0));
    for _ in 0..(4.0 / dt).round() as usize {
        s = step_rk4(&s, &command, dt, &vehicle, 1.0);
    }
    s
}

/// Observed convergence orders between dt = 0.08, 0.04 and 0.02 on lifting
/// atmospheric flight, against a dt = 0.00125 reference.
pub fn rk4_orders_lifting_flight() -> Vec<f64> {
    let reference = lifting_arc(0.00125);
    let errors: Vec<f64> = [0.08, 0.04, 0.02]
        .iter()
        .map(|&dt| {
            let s = lifting_arc(dt);
            (s.position - reference.position).norm() + (s.velocity - reference.velocity).norm()
        })
        .collect();
    orders(&errors)
}

/// Observed convergence orders of `y'' = -4 y` over 8 s against the exact
/// solution.
pub fn rk4_orders_oscillator() -> Vec<f64> {
    let solve = |h: f64| {
        let mut y = Vector2::new(1.0, 0.0);
        for _ in 0..(8.0 / h).round() as usize {
            y = rk4(&y, h, |y| Vector2::new(y[1], -4.0 * y[0]));
        }
        y
    };
    let exact = Vector2::new(16f64.cos(), -2.0 * 16f64.sin());
    let errors: Vec<f64> = [0.08, 0.04, 0.02].iter().map(|&h| (solve(h) - exact).norm()).collect();
    orders(&errors)
}
