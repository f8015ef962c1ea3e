//! Ball-drop comparison of two normal-force laws: steady penetration,
//! settling time and maximum penetration across a mass sweep.
//!
//! Run with `cargo run --example ball_drop`.

use contactdyn::contact_models::{presets, static_penetration};
use contactdyn::sim::{run_ball_drop, BallScenario};

fn main() {
    let models = [
        ("mclean", presets::mclean_table1()),
        ("tan-barrier (fig5)", presets::tanbarrier_fig5()),
        ("tan-barrier (table1)", presets::tanbarrier_table1_raw()),
    ];
    println!(
        "{:<22} {:>6} {:>12} {:>12} {:>12} {:>10}",
        "model", "m(kg)", "steady(mm)", "oracle(mm)", "max(mm)", "settle(s)"
    );
    for (name, model) in &models {
        for mass in [10.0, 20.0, 30.0, 40.0, 50.0] {
            let scenario = BallScenario::new(mass, 0.0, model.clone());
            let (_, summary) = run_ball_drop(&scenario).expect("simulation");
            let oracle = static_penetration(model, mass * 9.81).unwrap();
            println!(
                "{:<22} {:>6.0} {:>12.4} {:>12.4} {:>12.4} {:>10.4}",
                name,
                mass,
                summary.steady_penetration * 1e3,
                oracle * 1e3,
                summary.max_penetration * 1e3,
                summary.settling_time
            );
        }
    }

    println!("\nimpact-speed sweep, m = 10 kg, tan-barrier (fig5):");
    println!("{:>8} {:>12} {:>10} {:>8}", "v(m/s)", "max(mm)", "settle(s)", "halved");
    for speed in [0.0, 0.2, 0.4, 0.6, 0.8] {
        let scenario = BallScenario::new(10.0, speed, presets::tanbarrier_fig5());
        let (_, summary) = run_ball_drop(&scenario).expect("simulation");
        println!(
            "{:>8.1} {:>12.4} {:>10.4} {:>8}",
            speed,
            summary.max_penetration * 1e3,
            summary.settling_time,
            summary.halved_steps
        );
    }
}
