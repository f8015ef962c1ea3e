//! Tour of the normal-force catalog: force at a fixed penetration state and
//! static penetration under a 10 kg load for every law.
//!
//! Run with `cargo run --example contact_catalog`.

use contactdyn::contact_models::{normal_force, static_penetration, ContactPointState, NormalModel};
use nalgebra::Vector2;

fn main() {
    let cp_compress = ContactPointState {
        penetration: 0.5e-3,
        rate: 0.05,
        tangential: Vector2::zeros(),
    };
    let cp_separate = ContactPointState {
        penetration: 0.5e-3,
        rate: -0.5,
        tangential: Vector2::zeros(),
    };
    let load = 10.0 * 9.81;

    println!(
        "{:<12} {:>16} {:>16} {:>18}",
        "model", "F(d=0.5mm,+)", "F(d=0.5mm,-)", "static d @ 98.1 N"
    );
    for model in NormalModel::all_defaults() {
        let f_in = normal_force(&model, &cp_compress).unwrap();
        let f_out = normal_force(&model, &cp_separate).unwrap();
        let d_static = static_penetration(&model, load)
            .map(|d| format!("{:.4} mm", d * 1e3))
            .unwrap_or_else(|_| "n/a".into());
        println!(
            "{:<12} {:>14.1} N {:>14.1} N {:>18}",
            model.name(),
            f_in,
            f_out,
            d_static
        );
    }
    println!("\nnegative rates can zero a law's output: penalty contact never pulls.");
}
