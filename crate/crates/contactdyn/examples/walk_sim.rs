//! Compliant-contact walking: three gait cycles of the bundled 0.5 km/h
//! pattern under joint PD tracking, with penalty contacts at the foot
//! corners. Prints a progress table and writes the full trace.
//!
//! Run with `cargo run --release --example walk_sim`.

use contactdyn::gait::{GaitParams, GaitPlan};
use contactdyn::io::write_sim_trace_csv;
use contactdyn::kinetree::presets;
use contactdyn::sim::{run_walk, WalkScenario};

fn main() {
    let tree = presets::surena_lower();
    let plan = GaitPlan::new(&tree, GaitParams::walk_half_kmh(6)).expect("gait plan");
    let scenario = WalkScenario::new(plan.clone());
    println!(
        "simulating {:.2} s of walking (dt = {:.0e} s, {} steps)...",
        scenario.duration,
        scenario.dt,
        plan.params().n_steps
    );
    let result = run_walk(&scenario).expect("simulation");
    let trace = &result.trace;

    println!("\n{:>6} {:>8} {:>8} {:>8} {:>8} {:>8}", "t(s)", "x(m)", "y(m)", "z(m)", "FzL(N)", "FzR(N)");
    for i in (0..trace.len()).step_by(trace.len() / 20) {
        println!(
            "{:>6.2} {:>8.3} {:>8.3} {:>8.3} {:>8.1} {:>8.1}",
            trace.t[i],
            trace.q[i][0],
            trace.q[i][1],
            trace.q[i][2],
            trace.left[i].force.z,
            trace.right[i].force.z
        );
    }

    let (w0, w1) = plan.walk_window();
    println!("\nfall: {:?}", result.fall);
    println!("rms tracking error: {:.3} deg", result.summary.rms_tracking_error.to_degrees());
    println!("max corner penetration: {:.3} mm", result.summary.max_penetration * 1e3);
    println!("min loaded normal force: {:.3} N", result.summary.min_normal_force);
    println!("zmp variance over the walk window: {:.3e} m^2", trace.zmp_variance(w0, w1));

    let out = std::path::Path::new("walk_trace.csv");
    write_sim_trace_csv(out, trace).expect("write trace");
    println!("trace written to {}", out.display());
}
