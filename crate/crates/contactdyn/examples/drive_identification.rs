//! Drive-system identification: fit (inertia, viscous, Coulomb) constants
//! to the bundled synthetic experiments and score their cross-experiment
//! consistency, printed in the usual AVG/STDV/CM layout.
//!
//! Run with `cargo run --example drive_identification`.

use std::path::Path;

use contactdyn::ident::{
    consistency, derive_kinematics, identify_dataset, DriveMetadata, FilterConfig, DEFAULT_BASIS,
};
use contactdyn::io::read_experiment_csv;

fn main() {
    let data = contactdyn::cli::data_dir();
    let metadata = DriveMetadata {
        joint: "knee".into(),
        n_p: 2.0,
        n_h: 180.0,
        k_m: 0.0276,
    };

    let mut fits = Vec::new();
    println!(
        "{:<16} {:>10} {:>10} {:>10} {:>12}",
        "experiment", "j", "b", "f", "residual rms"
    );
    for idx in 1..=5 {
        let path = data.join(format!("experiment_{idx}.csv"));
        if !Path::new(&path).exists() {
            eprintln!("missing {}; run `cargo run --example regenerate_data` first", path.display());
            std::process::exit(1);
        }
        let raw = read_experiment_csv(&path).expect("experiment csv");
        let dataset =
            derive_kinematics(&raw, metadata.clone(), FilterConfig::default()).expect("kinematics");
        let fit = identify_dataset(&dataset, &DEFAULT_BASIS).expect("least squares");
        println!(
            "{:<16} {:>10.3} {:>10.3} {:>10.3} {:>12.4}",
            format!("experiment_{idx}"),
            fit.params.inertia().unwrap(),
            fit.params.viscous().unwrap(),
            fit.params.coulomb().unwrap(),
            fit.residual_rms
        );
        fits.push(fit.params);
    }

    let report = consistency(&fits).expect("consistency");
    println!("\n{:<16} {:>10} {:>10} {:>10}", "", "j", "b", "f");
    let row = |label: &str, values: &[f64]| {
        println!(
            "{:<16} {:>10.3} {:>10.3} {:>10.3}",
            label, values[0], values[1], values[2]
        );
    };
    row("AVG", &report.avg);
    row("STDV", &report.stdv);
    println!(
        "{:<16} {:>9.2}% {:>9.2}% {:>9.2}%",
        "C.M.",
        report.cm_percent[0].unwrap_or(f64::NAN),
        report.cm_percent[1].unwrap_or(f64::NAN),
        report.cm_percent[2].unwrap_or(f64::NAN)
    );
}
