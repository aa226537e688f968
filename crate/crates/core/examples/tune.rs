//! Grid sweep over the free constants of a scenario, printing the quantities
//! the nominal scenario is tuned against.
//!
//! cargo run --release --example tune -- <scenario> cx0=0.06,0.08 fpa=-15,-17 range=120000
//!
//! Sweepable keys: cx0, fpa (deg), range (m), target (m), pn, ref (m), kp, kd,
//! radius (m), trigger (m), alpha (deg), speed (m/s).

use glidesim::guidance::PhaseId;
use glidesim::scenario::{parse_scenario, InitialCondition, Scenario};

type Setter = fn(&mut Scenario, f64);

const KEYS: &[(&str, Setter)] = &[
    ("cx0", |s, v| s.vehicle.cx0 = v),
    ("fpa", |s, v| {
        if let InitialCondition::Entry(e) = &mut s.initial {
            e.flight_path_angle = v.to_radians();
        }
    }),
    ("speed", |s, v| {
        if let InitialCondition::Entry(e) = &mut s.initial {
            e.speed = v;
        }
    }),
    ("range", |s, v| s.seeker.detection_range = v),
    ("target", |s, v| s.target.downrange = v),
    ("pn", |s, v| s.guidance.pn_gain = v),
    ("ref", |s, v| s.guidance.cruise_reference = v),
    ("kp", |s, v| s.guidance.cruise_gain_p = v),
    ("kd", |s, v| s.guidance.cruise_gain_d = v),
    ("radius", |s, v| s.guidance.pullup_radius = v),
    ("trigger", |s, v| s.guidance.pullup_trigger_altitude = v),
    ("alpha", |s, v| s.guidance.entry_alpha = v.to_radians()),
];

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let path = args.first().expect("usage: tune <scenario> [key=v1,v2 ...]");
    let base = parse_scenario(&std::fs::read_to_string(path).expect("read")).expect("parse");

    let mut axes: Vec<(&str, Setter, Vec<f64>)> = Vec::new();
    for arg in &args[1..] {
        let (key, list) = arg.split_once('=').expect("key=v1,v2");
        let setter = KEYS
            .iter()
            .find(|(k, _)| *k == key)
            .unwrap_or_else(|| panic!("unknown key {key}"))
            .1;
        let values = list.split(',').map(|x| x.parse().expect("number")).collect();
        axes.push((key, setter, values));
    }

    let names: Vec<&str> = axes.iter().map(|a| a.0).collect();
    println!(
        "{} | reason miss downrange time | v_cruise v_terminal v_impact",
        names.join(" ")
    );
    let total: usize = axes.iter().map(|a| a.2.len()).product();
    for mut k in 0..total {
        let mut s = base.clone();
        let mut picked = Vec::new();
        for (_, set, values) in &axes {
            let v = values[k % values.len()];
            k /= values.len();
            set(&mut s, v);
            picked.push(v.to_string());
        }
        let traj = s.fly().expect("scenario");
        let speed = |p| traj.transition_into(p).map_or(f64::NAN, |t| t.speed);
        println!(
            "{} | {} {:.3} {:.0} {:.1} | {:.0} {:.0} {:.0}",
            picked.join(" "),
            traj.termination.reason.name(),
            traj.termination.miss_distance.unwrap_or(f64::NAN),
            traj.downrange(),
            traj.flight_time(),
            speed(PhaseId::Cruise),
            speed(PhaseId::Terminal),
            traj.final_state().speed(),
        );
    }
}
