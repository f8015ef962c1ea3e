//! Stick-slip with regularized versus discontinuous friction: a block
//! decelerating to rest chatters forever under the sign-law Coulomb model,
//! while the atan-regularized law settles without a single force reversal.
//!
//! Run with `cargo run --example friction_regularization`.

use contactdyn::contact_models::presets;
use contactdyn::sim::run_sliding_block;

fn main() {
    let dt = 1e-3;
    let v0 = 0.3;
    println!("block: 1 kg at {v0} m/s, dt = {dt} s\n");
    for (name, model) in [
        ("pseudo-coulomb (λ=0.01)", presets::pseudo_coulomb(0.8)),
        ("sign-coulomb", presets::sign_coulomb()),
    ] {
        let trace = run_sliding_block(&model, 1.0, v0, dt, 1.0);
        let stick_t = trace.stick_index.map(|i| trace.t[i]).unwrap_or(f64::NAN);
        println!("{name}:");
        println!("  stick onset:              {stick_t:.3} s");
        println!("  force sign changes after: {}", trace.sign_changes_in_stick);
        println!("  final |v|:                {:.2e} m/s", trace.velocity.last().unwrap().abs());
        // A short window of the force history around the stick onset.
        if let Some(i0) = trace.stick_index {
            let window: Vec<String> = trace.friction[i0..(i0 + 8).min(trace.friction.len())]
                .iter()
                .map(|f| format!("{f:+.2}"))
                .collect();
            println!("  force samples at stick:   [{}] N\n", window.join(", "));
        }
    }
}
