//! Regenerates every bundled file under `data/` from the library's own
//! presets, so the shipped samples can never drift from the code.
//!
//! Run with `cargo run --example regenerate_data`.

use std::path::PathBuf;

use contactdyn::contact_models::{params_to_string, presets};
use contactdyn::gait::{GaitParams, GaitPlan};
use contactdyn::io::{write_trajectory_csv, TrajectorySample};
use contactdyn::kinetree::{model_to_string, presets as tree_presets};

fn main() {
    let data = match std::env::var_os("CONTACTDYN_DATA") {
        Some(dir) => PathBuf::from(dir),
        None => PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"),
    };
    std::fs::create_dir_all(&data).expect("create data dir");

    // Robot model in the model-file format.
    let tree = tree_presets::surena_lower();
    std::fs::write(data.join("surena_lower.model.toml"), model_to_string(&tree)).unwrap();

    // Contact parameter files.
    std::fs::write(
        data.join("contact_tanbarrier_fig5.params.toml"),
        params_to_string(&presets::tanbarrier_fig5(), &presets::pseudo_coulomb(0.8)),
    )
    .unwrap();
    std::fs::write(
        data.join("contact_mclean.params.toml"),
        params_to_string(&presets::mclean_table1(), &presets::pseudo_coulomb(0.8)),
    )
    .unwrap();

    // Walking and standing scenarios.
    std::fs::write(
        data.join("walk.scenario.toml"),
        "format = 1\nname = \"walk-0.5kmh\"\npreset = \"surena-lower\"\n\n[gait]\nbuiltin = \"walk-0.5kmh\"\nsteps = 6\n\n[contact]\nnormal = \"tanbarrier-table1\"\nmu = 0.8\nlambda = 0.01\n\n[controller]\ntype = \"pd\"\n",
    )
    .unwrap();
    std::fs::write(
        data.join("stand.scenario.toml"),
        "format = 1\nname = \"stand\"\npreset = \"surena-lower\"\nduration = 1.0\n\n[gait]\nbuiltin = \"stand\"\n\n[controller]\ntype = \"pd\"\n",
    )
    .unwrap();

    // Drive metadata sample (knee joint, belt + harmonic reduction).
    std::fs::write(
        data.join("knee_drive.meta.toml"),
        "format = 1\njoint = \"knee\"\nn_p = 2.0\nn_h = 180.0\nk_m = 0.0276\n",
    )
    .unwrap();

    // Synthetic identification experiments: five runs of a drive with known
    // constants at different speeds, logged as (t, theta, current).
    let (j, b, f) = (8.14, 87.34, 24.83);
    let meta_gain = 2.0 * 180.0 * 0.0276; // N_p·N_h·k_m
    for (idx, speed) in [0.3f64, 0.4, 0.5, 0.6, 0.7].iter().enumerate() {
        let w = 2.0 * std::f64::consts::PI * speed / 0.5;
        let mut rows = vec!["# units: t s, theta rad, current A".to_string()];
        rows.push("t,theta,current".to_string());
        for i in 0..2000 {
            let t = i as f64 * 1e-3;
            let theta = 0.6 * (w * t).sin() + 0.15 * (2.3 * w * t).sin();
            let vel = 0.6 * w * (w * t).cos() + 0.345 * w * (2.3 * w * t).cos();
            let accel = -0.6 * w * w * (w * t).sin() - 0.79 * w * w * (2.3 * w * t).sin();
            let sgn = if vel == 0.0 { 0.0 } else { vel.signum() };
            let tau = j * accel + b * vel + f * sgn;
            rows.push(format!("{t},{theta},{}", tau / meta_gain));
        }
        std::fs::write(
            data.join(format!("experiment_{}.csv", idx + 1)),
            rows.join("\n") + "\n",
        )
        .unwrap();
    }

    // Short standing trajectory for quick invdyn demos.
    let plan = GaitPlan::new(&tree, GaitParams::walk_half_kmh(0)).unwrap();
    let samples: Vec<TrajectorySample> = (0..50)
        .map(|i| {
            let t = i as f64 * 0.01;
            let s = plan.sample(t).expect("standing pose");
            TrajectorySample {
                t,
                q: s.q,
                qd: s.qd,
                qdd: s.qdd,
                phase: s.phase,
            }
        })
        .collect();
    write_trajectory_csv(&data.join("stand_short.csv"), &samples).unwrap();

    println!("bundled data regenerated under {}", data.display());
}
