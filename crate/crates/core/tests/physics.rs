mod common;

use glidesim::atmosphere;
use glidesim::dynamics::{aero_acceleration, LiftFrame, VehicleParams};
use glidesim::guidance::GuidanceCommand;

/// Largest step-to-step energy increase along the quiet nominal trajectory,
/// relative to |E|.
fn worst_energy_rise() -> f64 {
    let traj = common::nominal_quiet().fly().unwrap();
    traj.samples
        .windows(2)
        .map(|w| {
            let e0 = w[0].state.specific_energy();
            (w[1].state.specific_energy() - e0) / e0.abs()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn energy_never_increases_in_atmosphere() {
    let rise = worst_energy_rise();
    assert!(rise <= 1e-9, "energy rose by {rise:e} of |E| in one step");
}

#[test]
fn lift_is_orthogonal_to_velocity_along_nominal_flight() {
    let s = common::nominal_quiet();
    let traj = s.fly().unwrap();
    let mut checked = 0;
    for row in &traj.samples {
        let st = &row.state;
        let aero = aero_acceleration(&st.position, &st.velocity, &row.command, &s.vehicle, 1.0);
        if aero.lift.norm() == 0.0 {
            continue;
        }
        let cos = aero.lift.dot(&st.velocity) / (aero.lift.norm() * st.velocity.norm());
        assert!(cos.abs() < 1e-12, "t = {}: cos = {cos:e}", st.t);
        checked += 1;
    }
    assert!(checked > 1000);
}

#[test]
fn lift_frame_is_orthonormal_for_arbitrary_geometry() {
    use glidesim::dynamics::Vec3;
    let vehicle = VehicleParams::default();
    let cmd = GuidanceCommand::new(0.3, -0.35, glidesim::guidance::PhaseId::Terminal).saturate(vehicle.cy_max());
    for i in 0..500 {
        let a = i as f64 * 0.731;
        let pos = Vec3::new(a.cos(), a.sin() * 0.3, (a * 1.7).sin()).normalize() * (6_400_000.0 + 97.0 * i as f64);
        let vel = Vec3::new((a * 2.3).sin(), (a * 0.9).cos(), (a * 3.1).cos()) * 3000.0;
        let f = LiftFrame::new(&pos, &vel).unwrap();
        assert!(f.up.dot(&f.along).abs() < 1e-12);
        assert!(f.lateral.dot(&f.along).abs() < 1e-12);
        assert!(f.lateral.dot(&pos.normalize()).abs() < 1e-12, "lateral must be horizontal");
        let lift = aero_acceleration(&pos, &vel, &cmd, &vehicle, 1.0).lift;
        assert!(lift.dot(&vel).abs() / (lift.norm() * vel.norm()) < 1e-12);
    }
}

#[test]
fn atmosphere_on_10_m_grid() {
    let mut previous = atmosphere::sample(0.0).unwrap();
    let mut h = 10.0;
    while h <= atmosphere::CEILING {
        let s = atmosphere::sample(h).unwrap();
        assert!(s.density < previous.density, "density not decreasing at {h} m");
        let ideal = s.density * atmosphere::R_AIR * s.temperature;
        assert!((ideal / s.pressure - 1.0).abs() < 1e-9, "ideal gas at {h} m");
        previous = s;
        h += 10.0;
    }
}
