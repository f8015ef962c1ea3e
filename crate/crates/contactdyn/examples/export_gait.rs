//! Exports the bundled 0.5 km/h reference gait (positions, velocities,
//! accelerations and the support-phase schedule) to a trajectory CSV that
//! `contactdyn invdyn --gait <file>` accepts.
//!
//! Run with `cargo run --release --example export_gait [output.csv]`.

use contactdyn::gait::{GaitParams, GaitPlan};
use contactdyn::io::{write_trajectory_csv, TrajectorySample};
use contactdyn::kinetree::presets;

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "gait_walk_0.5kmh.csv".to_string());
    let tree = presets::surena_lower();
    let plan = GaitPlan::new(&tree, GaitParams::walk_half_kmh(6)).expect("gait plan");
    let (w0, w1) = plan.walk_window();
    let dt = 0.01;
    let n = ((w1 - w0) / dt) as usize + 1;
    let samples: Vec<TrajectorySample> = (0..n)
        .map(|i| {
            let t = w0 + i as f64 * dt;
            let s = plan.sample(t).expect("sample");
            TrajectorySample {
                t: s.t,
                q: s.q,
                qd: s.qd,
                qdd: s.qdd,
                phase: s.phase,
            }
        })
        .collect();
    write_trajectory_csv(std::path::Path::new(&out), &samples).expect("write csv");
    println!("{n} samples at {dt} s -> {out}");
}
