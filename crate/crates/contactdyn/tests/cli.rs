//! End-to-end tests of the command-line interface: exit codes, emitted
//! files, and bit-identical reruns from manifests.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_contactdyn"))
}

fn data_dir() -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

#[test]
fn ball_drop_writes_traces_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ball");
    let status = bin()
        .args(["ball-drop", "--masses", "10,50", "--models", "mclean,tanbarrier"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    // Four cells, one row each plus comment and header.
    assert_eq!(summary.lines().count(), 6);
    assert!(out.join("ball_mclean_m10_v0.csv").exists());
    assert!(out.join("ball_tanbarrier_m50_v0.csv").exists());
    assert!(out.join("manifest.toml").exists());
    // The Fig-5 quartet of steady depths shows up in the summary.
    for expected in ["0.00083", "0.0041", "0.00080", "0.0016"] {
        assert!(
            summary.contains(expected),
            "summary missing {expected}:\n{summary}"
        );
    }
}

#[test]
fn ball_drop_empty_masses_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin()
        .args(["ball-drop", "--masses", "", "--out"])
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(64));
}

#[test]
fn ball_drop_unknown_model_lists_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["ball-drop", "--models", "bouncy", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(64));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("mclean"), "no catalog listing: {stderr}");
    assert!(stderr.contains("tanbarrier"));
}

#[test]
fn ball_drop_models_all_covers_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("all");
    let status = bin()
        .args(["ball-drop", "--masses", "10", "--models", "all", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
    for name in ["linear", "wojtyra", "mclean", "jackson", "park-kwon", "millard", "tanbarrier"] {
        assert!(summary.contains(name), "missing {name}");
    }
}

#[test]
fn jobs_flag_parallel_sweep_matches_serial() {
    let dir = tempfile::tempdir().unwrap();
    let (out1, out2) = (dir.path().join("serial"), dir.path().join("parallel"));
    for (out, jobs) in [(&out1, "1"), (&out2, "4")] {
        assert!(bin()
            .args(["ball-drop", "--masses", "10,20,30", "--models", "mclean", "--jobs", jobs])
            .arg("--out")
            .arg(out)
            .status()
            .unwrap()
            .success());
    }
    assert_eq!(
        std::fs::read(out1.join("summary.csv")).unwrap(),
        std::fs::read(out2.join("summary.csv")).unwrap()
    );
}

#[test]
fn manifest_rerun_is_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("first");
    let out2 = dir.path().join("second");
    assert!(bin()
        .args(["ball-drop", "--masses", "20", "--velocities", "0.3", "--models", "tanbarrier"])
        .arg("--out")
        .arg(&out1)
        .status()
        .unwrap()
        .success());
    assert!(bin()
        .arg("--config")
        .arg(out1.join("manifest.toml"))
        .arg("--out")
        .arg(&out2)
        .status()
        .unwrap()
        .success());
    let a = std::fs::read(out1.join("ball_tanbarrier_m20_v0.3.csv")).unwrap();
    let b = std::fs::read(out2.join("ball_tanbarrier_m20_v0.3.csv")).unwrap();
    assert_eq!(a, b);
    assert_eq!(
        std::fs::read(out1.join("summary.csv")).unwrap(),
        std::fs::read(out2.join("summary.csv")).unwrap()
    );
}

#[test]
fn set_override_must_reference_existing_key() {
    let dir = tempfile::tempdir().unwrap();
    let output = bin()
        .args(["ball-drop", "--set", "granularity=3", "--out"])
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown key"));
}

#[test]
fn set_override_applies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    assert!(bin()
        .args(["ball-drop", "--masses", "10", "--models", "mclean"])
        .args(["--set", "duration=0.05"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let manifest = std::fs::read_to_string(out.join("manifest.toml")).unwrap();
    assert!(manifest.contains("duration = \"0.05\""));
}

#[test]
fn invdyn_on_bundled_standing_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("invdyn");
    let status = bin()
        .arg("invdyn")
        .arg("--gait")
        .arg(data_dir().join("stand_short.csv"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let csv = std::fs::read_to_string(out.join("invdyn.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with('#'));
    let header = lines.next().unwrap();
    assert!(header.starts_with("t,tau_0"));
    assert!(header.contains("Flf_fz"));
    assert!(header.ends_with("zmp_x,zmp_y"));
    // Static standing: constant gravity-compensation torques across rows.
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    for k in 1..14 {
        let a: f64 = first[k].parse().unwrap();
        let b: f64 = last[k].parse().unwrap();
        assert!((a - b).abs() < 1e-6, "torque {k} drifted: {a} vs {b}");
    }
    let feasibility = std::fs::read_to_string(out.join("feasibility.txt")).unwrap();
    assert!(feasibility.contains("infeasible: 0"));
}

#[test]
fn invdyn_builtin_gait_is_fully_feasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gait");
    let status = bin()
        .args(["invdyn", "--gait", "builtin:walk-0.5kmh"])
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let feasibility = std::fs::read_to_string(out.join("feasibility.txt")).unwrap();
    assert!(feasibility.contains("infeasible: 0"), "{feasibility}");
    // ZMP columns are present and populated.
    let csv = std::fs::read_to_string(out.join("invdyn.csv")).unwrap();
    let header = csv.lines().nth(1).unwrap();
    assert!(header.ends_with("zmp_x,zmp_y"));
    assert!(!csv.contains("nan"));
}

#[test]
fn invdyn_schedule_length_mismatch_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let schedule = dir.path().join("schedule.csv");
    std::fs::write(&schedule, "t,phase,stance\n0.0,dsp,both\n").unwrap();
    let status = bin()
        .arg("invdyn")
        .arg("--gait")
        .arg(data_dir().join("stand_short.csv"))
        .arg("--schedule")
        .arg(&schedule)
        .arg("--out")
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(65));
}

#[test]
fn invdyn_bad_gait_csv_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let gait = dir.path().join("bad.csv");
    std::fs::write(&gait, "t,q_0\n0,0\n").unwrap();
    let output = bin()
        .arg("invdyn")
        .arg("--gait")
        .arg(&gait)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(65));
}

#[test]
fn walk_standing_scenario_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    // First produce a rigid solve for the standing window.
    let rigid_out = dir.path().join("rigid");
    assert!(bin()
        .arg("invdyn")
        .arg("--gait")
        .arg(data_dir().join("stand_short.csv"))
        .arg("--out")
        .arg(&rigid_out)
        .status()
        .unwrap()
        .success());
    // Then the compliant standing run with --compare.
    let walk_out = dir.path().join("walk");
    let status = bin()
        .arg("walk")
        .arg("--scenario")
        .arg(data_dir().join("stand.scenario.toml"))
        .arg("--compare")
        .arg(rigid_out.join("invdyn.csv"))
        .arg("--out")
        .arg(&walk_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(walk_out.join("trace.csv").exists());
    assert!(walk_out.join("compare.csv").exists());
    let summary = std::fs::read_to_string(walk_out.join("summary.txt")).unwrap();
    assert!(summary.contains("fall: none"));
    assert!(summary.contains("[summary]"));
    // The delta file has data rows within the overlapping window.
    let compare = std::fs::read_to_string(walk_out.join("compare.csv")).unwrap();
    assert!(compare.lines().count() > 10);
}

#[test]
fn walk_unstable_dt_is_rejected_with_stability_message() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("fast.scenario.toml");
    std::fs::write(&scenario, "format = 1\ndt = 0.01\n[gait]\nsteps = 0\n").unwrap();
    let output = bin()
        .arg("walk")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path().join("x"))
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&output.stderr).contains("stability limit"));
}

#[test]
fn walk_fall_exits_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("fall.scenario.toml");
    // Ground far below the feet: the robot free-falls and trips the
    // detector.
    std::fs::write(
        &scenario,
        "format = 1\nground_height = -5.0\nduration = 1.0\n[gait]\nsteps = 0\n[controller]\ntype = \"none\"\n",
    )
    .unwrap();
    let status = bin()
        .arg("walk")
        .arg("--scenario")
        .arg(&scenario)
        .arg("--out")
        .arg(dir.path().join("x"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn identify_bundled_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ident");
    let experiments = (1..=5)
        .map(|i| data_dir().join(format!("experiment_{i}.csv")).display().to_string())
        .collect::<Vec<_>>()
        .join(",");
    let output = bin()
        .arg("identify")
        .args(["--experiments", &experiments])
        .arg("--metadata")
        .arg(data_dir().join("knee_drive.meta.toml"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(output.status.success());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("CM"));
    let params = std::fs::read_to_string(out.join("params.csv")).unwrap();
    assert!(params.contains("AVG"));
    assert!(params.contains("STDV"));
    // Five experiments from one generator: every CM below 10 %.
    let stdout = String::from_utf8_lossy(&output.stdout);
    for line in stdout.lines().filter(|l| l.contains("CM")) {
        if let Some(pct) = line.split("CM").nth(1) {
            let number: f64 = pct
                .trim()
                .trim_end_matches('%')
                .trim()
                .parse()
                .unwrap_or(0.0);
            assert!(number < 10.0, "CM too high: {line}");
        }
    }
}

#[test]
fn identify_single_experiment_reports_na() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("single");
    assert!(bin()
        .arg("identify")
        .args([
            "--experiments",
            &data_dir().join("experiment_1.csv").display().to_string()
        ])
        .arg("--metadata")
        .arg(data_dir().join("knee_drive.meta.toml"))
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap()
        .success());
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("n/a"));
}

#[test]
fn missing_subcommand_is_usage_error() {
    let status = bin().status().unwrap();
    assert_eq!(status.code(), Some(64));
}
