//! Command-line front end.
//!
//! Subcommands: `ball-drop`, `invdyn`, `walk`, `identify`, `compare`.
//! Every run writes a `manifest.toml` with its fully resolved settings into
//! the output directory; `contactdyn --config manifest.toml` reruns it
//! bit-identically. `--set key=value` overrides any resolved setting and
//! must name an existing key.
//!
//! Exit codes: 0 success, 2 fall detected, 3 numeric failure, 64 usage
//! error, 65 data error.

mod scenario_file;

pub use scenario_file::{load_scenario_file, ScenarioFileError};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use rayon::prelude::*;

use crate::contact_models::{self, presets, NormalModel};
use crate::gait::{GaitParams, GaitPlan, SupportPhase};
use crate::ident::{
    self, BasisTerm, DriveMetadata, DriveParams, FilterConfig, DEFAULT_BASIS, FULL_BASIS,
};
use crate::io::{
    read_experiment_csv, read_trajectory_csv, write_ball_trace_csv, write_invdyn_csv,
    write_sim_trace_csv, InvdynRecord, Manifest, TrajectorySample,
};
use crate::kinetree::{load_model_file, presets as tree_presets, FootId, GeneralizedState, RigidBodyTree};
use crate::rigid_contact::{
    dsp_inverse_dynamics, feasibility_check, ssp_inverse_dynamics, support_polygon,
    zmp_from_wrenches,
};
use crate::sim::{run_ball_drop, run_walk, BallScenario, SimError, WalkScenario};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FALL: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_DATA: u8 = 65;

/// Root of the bundled data files: `$CONTACTDYN_DATA` when set, otherwise
/// the crate's `data/` directory (useful for development checkouts).
pub fn data_dir() -> PathBuf {
    match std::env::var_os("CONTACTDYN_DATA") {
        Some(dir) => PathBuf::from(dir),
        None => Path::new(env!("CARGO_MANIFEST_DIR")).join("data"),
    }
}

#[derive(Debug, Parser)]
#[command(name = "contactdyn", version, about = "Legged-robot contact dynamics toolkit")]
struct Cli {
    /// Rerun a previous invocation from its manifest.
    #[arg(long, value_name = "MANIFEST")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Override a resolved setting (must name an existing key).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for parameter sweeps.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ball-drop sweeps over masses, impact speeds and normal-force models.
    BallDrop(BallDropArgs),
    /// Rigid-contact inverse dynamics over a reference trajectory.
    Invdyn(InvdynArgs),
    /// Compliant-contact walking simulation.
    Walk(WalkArgs),
    /// Drive-system identification from experiment logs.
    Identify(IdentifyArgs),
    /// Per-sample deltas between a compliant trace and a rigid solve.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
struct BallDropArgs {
    /// Comma-separated masses (kg).
    #[arg(long, default_value = "10,50")]
    masses: String,
    /// Comma-separated impact speeds (m/s, downward).
    #[arg(long, default_value = "0")]
    velocities: String,
    /// Comma-separated model names, or `all`.
    #[arg(long, default_value = "mclean,tanbarrier")]
    models: String,
    #[arg(long, default_value_t = 1e-5)]
    dt: f64,
    #[arg(long, default_value_t = 0.3)]
    duration: f64,
    #[arg(long, default_value_t = 10)]
    decimation: usize,
}

#[derive(Debug, Args)]
struct InvdynArgs {
    /// Trajectory CSV path or `builtin:walk-0.5kmh`.
    #[arg(long, default_value = "builtin:walk-0.5kmh")]
    gait: String,
    /// Optional separate phase-schedule CSV (`t,phase,stance`), overriding
    /// the trajectory's own columns.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Model preset name or a model file path.
    #[arg(long, default_value = "surena-lower")]
    preset: String,
    /// Available friction coefficient for the feasibility report.
    #[arg(long, default_value_t = 0.8)]
    mu: f64,
    /// Sampling period when the gait is builtin (s).
    #[arg(long, default_value_t = 0.01)]
    sample_dt: f64,
    /// Drive parameters file; adds predicted drive torque to the output.
    #[arg(long)]
    drive_params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct WalkArgs {
    /// Scenario file; defaults to the bundled walking scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Number of steps for the builtin scenario (two per gait cycle).
    #[arg(long, default_value_t = 6)]
    steps: usize,
    /// Emit per-sample deltas against a rigid-solve CSV.
    #[arg(long)]
    compare: Option<PathBuf>,
    /// Drive parameters file; adds predicted drive torque to the summary.
    #[arg(long)]
    drive_params: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IdentifyArgs {
    /// Comma-separated experiment CSV paths (`t,theta[,current|tau]`).
    #[arg(long)]
    experiments: String,
    /// Metadata TOML with joint, n_p, n_h, k_m.
    #[arg(long)]
    metadata: PathBuf,
    /// Basis: `default` (accel,vel,sign) or `full` (adds vel^3).
    #[arg(long, default_value = "default")]
    basis: String,
    /// Low-pass cutoff for numeric differentiation (Hz).
    #[arg(long, default_value_t = 20.0)]
    cutoff_hz: f64,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Walking-simulation trace CSV.
    #[arg(long)]
    compliant: PathBuf,
    /// Rigid invdyn output CSV.
    #[arg(long)]
    rigid: PathBuf,
}

/// Entry point used by the binary.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version with its own success exit.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(EXIT_USAGE);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_DATA,
            message: message.into(),
        }
    }

    fn numeric(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_NUMERIC,
            message: message.into(),
        }
    }
}

fn sim_error(e: SimError) -> CliError {
    match e {
        SimError::Config(_) | SimError::UnstableDt { .. } => CliError::usage(e.to_string()),
        _ => CliError::numeric(e.to_string()),
    }
}

type Settings = BTreeMap<String, String>;

fn apply_overrides(settings: &mut Settings, overrides: &[String]) -> Result<(), CliError> {
    for pair in overrides {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("--set needs KEY=VALUE, got `{pair}`")))?;
        if !settings.contains_key(key) {
            let known: Vec<&str> = settings.keys().map(|s| s.as_str()).collect();
            return Err(CliError::usage(format!(
                "--set references unknown key `{key}` (known: {})",
                known.join(", ")
            )));
        }
        settings.insert(key.to_string(), value.to_string());
    }
    Ok(())
}

fn get_f64(s: &Settings, key: &str) -> Result<f64, CliError> {
    s[key]
        .parse()
        .map_err(|_| CliError::usage(format!("setting `{key}` is not a number: {}", s[key])))
}

fn get_usize(s: &Settings, key: &str) -> Result<usize, CliError> {
    s[key]
        .parse()
        .map_err(|_| CliError::usage(format!("setting `{key}` is not an integer: {}", s[key])))
}

fn parse_list(raw: &str) -> Result<Vec<f64>, CliError> {
    let items: Vec<&str> = raw.split(',').filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(CliError::usage("empty list"));
    }
    items
        .iter()
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad number in list: `{s}`")))
        })
        .collect()
}

fn dispatch(cli: Cli) -> Result<u8, CliError> {
    if let Some(jobs) = cli.jobs {
        // Sweeps read this pool; ignore failure if a pool already exists.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global();
    }
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("out"));

    if let Some(manifest_path) = &cli.config {
        if cli.command.is_some() {
            return Err(CliError::usage(
                "give either a subcommand or --config, not both",
            ));
        }
        let manifest = Manifest::load(manifest_path)
            .map_err(|e| CliError::data(e.to_string()))?;
        let mut settings = manifest.settings.clone();
        apply_overrides(&mut settings, &cli.set)?;
        return match manifest.subcommand.as_str() {
            "ball-drop" => run_ball_drop_cmd(&out, settings),
            "invdyn" => run_invdyn_cmd(&out, settings),
            "walk" => run_walk_cmd(&out, settings),
            "identify" => run_identify_cmd(&out, settings),
            "compare" => run_compare_cmd(&out, settings),
            other => Err(CliError::data(format!(
                "manifest names unknown subcommand `{other}`"
            ))),
        };
    }

    let command = cli
        .command
        .ok_or_else(|| CliError::usage("a subcommand (or --config) is required"))?;
    match command {
        Command::BallDrop(args) => {
            let mut settings = Settings::new();
            settings.insert("masses".into(), args.masses);
            settings.insert("velocities".into(), args.velocities);
            settings.insert("models".into(), args.models);
            settings.insert("dt".into(), args.dt.to_string());
            settings.insert("duration".into(), args.duration.to_string());
            settings.insert("decimation".into(), args.decimation.to_string());
            apply_overrides(&mut settings, &cli.set)?;
            run_ball_drop_cmd(&out, settings)
        }
        Command::Invdyn(args) => {
            let mut settings = Settings::new();
            settings.insert("gait".into(), args.gait);
            settings.insert(
                "schedule".into(),
                args.schedule
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
            settings.insert("preset".into(), args.preset);
            settings.insert("mu".into(), args.mu.to_string());
            settings.insert("sample_dt".into(), args.sample_dt.to_string());
            settings.insert(
                "drive_params".into(),
                args.drive_params
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
            apply_overrides(&mut settings, &cli.set)?;
            run_invdyn_cmd(&out, settings)
        }
        Command::Walk(args) => {
            let mut settings = Settings::new();
            settings.insert(
                "scenario".into(),
                args.scenario
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
            settings.insert("steps".into(), args.steps.to_string());
            settings.insert(
                "compare".into(),
                args.compare
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
            settings.insert(
                "drive_params".into(),
                args.drive_params
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            );
            apply_overrides(&mut settings, &cli.set)?;
            run_walk_cmd(&out, settings)
        }
        Command::Identify(args) => {
            let mut settings = Settings::new();
            settings.insert("experiments".into(), args.experiments);
            settings.insert("metadata".into(), args.metadata.display().to_string());
            settings.insert("basis".into(), args.basis);
            settings.insert("cutoff_hz".into(), args.cutoff_hz.to_string());
            apply_overrides(&mut settings, &cli.set)?;
            run_identify_cmd(&out, settings)
        }
        Command::Compare(args) => {
            let mut settings = Settings::new();
            settings.insert("compliant".into(), args.compliant.display().to_string());
            settings.insert("rigid".into(), args.rigid.display().to_string());
            apply_overrides(&mut settings, &cli.set)?;
            run_compare_cmd(&out, settings)
        }
    }
}

fn ensure_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)
        .map_err(|e| CliError::data(format!("cannot create output directory: {e}")))
}

fn save_manifest(out: &Path, subcommand: &str, settings: &Settings) -> Result<(), CliError> {
    let mut manifest = Manifest::new(subcommand);
    manifest.settings = settings.clone();
    manifest
        .save(&out.join("manifest.toml"))
        .map_err(|e| CliError::data(e.to_string()))
}

fn catalog_names() -> Vec<&'static str> {
    vec![
        "linear", "wojtyra", "mclean", "jackson", "park-kwon", "millard", "tanbarrier",
        "tanbarrier-table1",
    ]
}

fn model_by_cli_name(name: &str) -> Option<NormalModel> {
    match name {
        "linear" => Some(NormalModel::Linear {
            k_z: 1.17e5,
            c_z: 1.0e4,
        }),
        "wojtyra" => Some(NormalModel::WojtyraDamping {
            k_z: 1.17e5,
            c_max: 1.0e4,
            h: 1e-3,
        }),
        "jackson" => Some(NormalModel::Jackson {
            k_z: 1.17e5,
            c_z: 1.0,
        }),
        "park-kwon" => Some(NormalModel::ParkKwon {
            alpha: 1.0,
            stiffness: contact_models::StiffnessProfile::Constant(1.17e5),
        }),
        "millard" => Some(NormalModel::Millard {
            k_z: 1.17e5,
            restitution: 0.7,
            impact_speed: 0.5,
        }),
        other => presets::normal_by_name(other),
    }
}

fn run_ball_drop_cmd(out: &Path, settings: Settings) -> Result<u8, CliError> {
    let masses = parse_list(&settings["masses"])
        .map_err(|e| CliError::usage(format!("--masses: {}", e.message)))?;
    let velocities = parse_list(&settings["velocities"])
        .map_err(|e| CliError::usage(format!("--velocities: {}", e.message)))?;
    let model_names: Vec<String> = if settings["models"].trim() == "all" {
        catalog_names().iter().map(|s| s.to_string()).collect()
    } else {
        settings["models"]
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.trim().to_string())
            .collect()
    };
    if model_names.is_empty() {
        return Err(CliError::usage("--models is empty"));
    }
    let mut models = Vec::new();
    for name in &model_names {
        let model = model_by_cli_name(name).ok_or_else(|| {
            CliError::usage(format!(
                "unknown model `{name}`; catalog: {}",
                catalog_names().join(", ")
            ))
        })?;
        models.push((name.clone(), model));
    }
    let dt = get_f64(&settings, "dt")?;
    let duration = get_f64(&settings, "duration")?;
    let decimation = get_usize(&settings, "decimation")?;
    ensure_out(out)?;
    save_manifest(out, "ball-drop", &settings)?;

    // One cell per (mass, velocity, model); cells run in parallel, each
    // writing its own trace file.
    let mut cells = Vec::new();
    for (name, model) in &models {
        for &m in &masses {
            for &v in &velocities {
                cells.push((name.clone(), model.clone(), m, v));
            }
        }
    }
    let results: Vec<Result<String, CliError>> = cells
        .par_iter()
        .map(|(name, model, mass, vel)| {
            let mut scenario = BallScenario::new(*mass, *vel, model.clone());
            scenario.dt = dt;
            scenario.duration = duration;
            scenario.decimation = decimation;
            let (trace, summary) = run_ball_drop(&scenario).map_err(sim_error)?;
            let file = format!("ball_{name}_m{mass}_v{vel}.csv");
            write_ball_trace_csv(&out.join(&file), &trace)
                .map_err(|e| CliError::data(e.to_string()))?;
            let oracle = contact_models::static_penetration(model, mass * 9.81)
                .map(|d| format!("{d}"))
                .unwrap_or_default();
            Ok(format!(
                "{name},{mass},{vel},{},{},{},{},{oracle}",
                summary.steady_penetration,
                summary.max_penetration,
                summary.settling_time,
                summary.halved_steps,
            ))
        })
        .collect();

    let mut summary_lines = vec![
        "# units: mass kg, velocity m/s, penetration m, settling s".to_string(),
        "model,mass,velocity,steady_penetration,max_penetration,settling_time,halved_steps,static_oracle"
            .to_string(),
    ];
    for r in results {
        summary_lines.push(r?);
    }
    std::fs::write(out.join("summary.csv"), summary_lines.join("\n") + "\n")
        .map_err(|e| CliError::data(e.to_string()))?;
    println!(
        "ball-drop: {} cells -> {}",
        cells.len(),
        out.join("summary.csv").display()
    );
    Ok(EXIT_OK)
}

fn load_tree(preset: &str) -> Result<RigidBodyTree, CliError> {
    match preset {
        "surena-lower" => Ok(tree_presets::surena_lower()),
        "planar5" => Ok(tree_presets::planar5()),
        path => load_model_file(Path::new(path)).map_err(|e| CliError::data(e.to_string())),
    }
}

/// Load the reference trajectory: a builtin plan sampled at `sample_dt`, or
/// a trajectory CSV.
fn load_trajectory(
    gait: &str,
    tree: &RigidBodyTree,
    sample_dt: f64,
) -> Result<Vec<TrajectorySample>, CliError> {
    if let Some(name) = gait.strip_prefix("builtin:") {
        let params = match name {
            "walk-0.5kmh" => GaitParams::walk_half_kmh(6),
            "stand" => GaitParams::walk_half_kmh(0),
            other => {
                return Err(CliError::usage(format!(
                    "unknown builtin gait `{other}` (have: walk-0.5kmh, stand)"
                )))
            }
        };
        let plan =
            GaitPlan::new(tree, params).map_err(|e| CliError::usage(e.to_string()))?;
        let (w0, w1) = plan.walk_window();
        let n = ((w1 - w0) / sample_dt).floor() as usize + 1;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let t = w0 + i as f64 * sample_dt;
            let s = plan.sample(t).map_err(|e| CliError::numeric(e.to_string()))?;
            samples.push(TrajectorySample {
                t: s.t,
                q: s.q,
                qd: s.qd,
                qdd: s.qdd,
                phase: s.phase,
            });
        }
        Ok(samples)
    } else {
        read_trajectory_csv(Path::new(gait), Some(tree.n_coords()))
            .map_err(|e| CliError::data(e.to_string()))
    }
}

/// Optional separate schedule file: `t,phase,stance` rows replacing the
/// trajectory's own phase columns.
fn apply_schedule(
    samples: &mut [TrajectorySample],
    schedule: &Path,
) -> Result<(), CliError> {
    let pstr = schedule.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(schedule)
        .map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
    let mut rows: Vec<(f64, SupportPhase)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
        let t: f64 = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|_| CliError::data(format!("{pstr}: bad time value")))?;
        let phase = SupportPhase::parse(record.get(1).unwrap_or(""), record.get(2).unwrap_or(""))
            .ok_or_else(|| CliError::data(format!("{pstr}: bad phase/stance row")))?;
        rows.push((t, phase));
    }
    if rows.len() != samples.len() {
        return Err(CliError::data(format!(
            "schedule length {} does not match trajectory length {}",
            rows.len(),
            samples.len()
        )));
    }
    for (s, (t, phase)) in samples.iter_mut().zip(rows) {
        if (s.t - t).abs() > 1e-9 {
            return Err(CliError::data(format!(
                "schedule time {t} does not match trajectory time {}",
                s.t
            )));
        }
        s.phase = phase;
    }
    Ok(())
}

fn load_drive_params(path: &str) -> Result<Option<DriveParams>, CliError> {
    if path.is_empty() {
        return Ok(None);
    }
    #[derive(serde::Deserialize)]
    struct DriveFile {
        format: u32,
        j: f64,
        b: f64,
        f: f64,
        #[serde(default)]
        c: Option<f64>,
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("{path}: {e}")))?;
    let file: DriveFile =
        toml::from_str(&text).map_err(|e| CliError::data(format!("{path}: {e}")))?;
    if file.format != 1 {
        return Err(CliError::data(format!(
            "{path}: unsupported drive-params format {}",
            file.format
        )));
    }
    Ok(Some(match file.c {
        Some(c) => DriveParams::new(FULL_BASIS.to_vec(), vec![file.j, file.b, c, file.f]),
        None => DriveParams::new(DEFAULT_BASIS.to_vec(), vec![file.j, file.b, file.f]),
    }))
}

fn run_invdyn_cmd(out: &Path, settings: Settings) -> Result<u8, CliError> {
    let tree = load_tree(&settings["preset"])?;
    let sample_dt = get_f64(&settings, "sample_dt")?;
    let mut samples = load_trajectory(&settings["gait"], &tree, sample_dt)?;
    if !settings["schedule"].is_empty() {
        apply_schedule(&mut samples, Path::new(&settings["schedule"]))?;
    }
    let mu = get_f64(&settings, "mu")?;
    let drive = load_drive_params(&settings["drive_params"])?;
    ensure_out(out)?;
    save_manifest(out, "invdyn", &settings)?;

    let mut records = Vec::with_capacity(samples.len());
    let mut infeasible = 0usize;
    for s in &samples {
        let state = GeneralizedState::new(s.q.clone(), s.qd.clone(), s.qdd.clone(), s.t)
            .map_err(|e| CliError::data(e.to_string()))?;
        let (mut tau, left, right, feet): (DVector<f64>, _, _, &[FootId]) = match s.phase {
            SupportPhase::Dsp => {
                let sol = dsp_inverse_dynamics(&tree, &state)
                    .map_err(|e| CliError::numeric(e.to_string()))?;
                (sol.tau, sol.left, sol.right, &[FootId::Left, FootId::Right])
            }
            SupportPhase::SspLeft => {
                let sol = ssp_inverse_dynamics(&tree, &state, FootId::Left)
                    .map_err(|e| CliError::numeric(e.to_string()))?;
                let right = crate::rigid_contact::ContactWrench::zero_at(sol.wrench.point);
                (sol.tau, sol.wrench, right, &[FootId::Left])
            }
            SupportPhase::SspRight => {
                let sol = ssp_inverse_dynamics(&tree, &state, FootId::Right)
                    .map_err(|e| CliError::numeric(e.to_string()))?;
                let left = crate::rigid_contact::ContactWrench::zero_at(sol.wrench.point);
                (sol.tau, left, sol.wrench, &[FootId::Right])
            }
        };
        if let Some(params) = &drive {
            for k in 0..tau.len() {
                tau[k] += ident::predict_drive_torque(params, s.qdd[6 + k], s.qd[6 + k]);
            }
        }
        let active: Vec<crate::rigid_contact::ContactWrench> = match s.phase {
            SupportPhase::Dsp => vec![left, right],
            SupportPhase::SspLeft => vec![left],
            SupportPhase::SspRight => vec![right],
        };
        let polygon = support_polygon(&tree, &s.q, feet)
            .map_err(|e| CliError::numeric(e.to_string()))?;
        let report = feasibility_check(&active, &polygon, mu);
        if !report.all_ok() {
            infeasible += 1;
            eprintln!(
                "warning: t={:.3}: infeasible solution (unilateral={}, friction={}, zmp_inside={})",
                s.t, report.unilateral, report.friction, report.zmp_inside
            );
        }
        let zmp = zmp_from_wrenches(&active, polygon.height()).ok();
        records.push(InvdynRecord {
            t: s.t,
            tau,
            left,
            right,
            zmp,
        });
    }
    write_invdyn_csv(&out.join("invdyn.csv"), &records)
        .map_err(|e| CliError::data(e.to_string()))?;
    let feasible = samples.len() - infeasible;
    std::fs::write(
        out.join("feasibility.txt"),
        format!(
            "samples: {}\nfeasible: {feasible}\ninfeasible: {infeasible}\n",
            samples.len()
        ),
    )
    .map_err(|e| CliError::data(e.to_string()))?;
    println!(
        "invdyn: {} samples ({} feasible) -> {}",
        samples.len(),
        feasible,
        out.join("invdyn.csv").display()
    );
    Ok(EXIT_OK)
}

fn run_walk_cmd(out: &Path, settings: Settings) -> Result<u8, CliError> {
    let scenario = if settings["scenario"].is_empty() {
        let steps = get_usize(&settings, "steps")?;
        let tree = tree_presets::surena_lower();
        let plan = GaitPlan::new(&tree, GaitParams::walk_half_kmh(steps))
            .map_err(|e| CliError::usage(e.to_string()))?;
        WalkScenario::new(plan)
    } else {
        load_scenario_file(Path::new(&settings["scenario"]))
            .map_err(|e| CliError::data(e.to_string()))?
    };
    scenario.validate().map_err(sim_error)?;
    ensure_out(out)?;
    save_manifest(out, "walk", &settings)?;

    let result = run_walk(&scenario).map_err(sim_error)?;
    write_sim_trace_csv(&out.join("trace.csv"), &result.trace)
        .map_err(|e| CliError::data(e.to_string()))?;

    let (w0, w1) = scenario.plan.walk_window();
    let zmp_var = result.trace.zmp_variance(w0, w1);
    let drive = load_drive_params(&settings["drive_params"])?;
    let drive_note = match &drive {
        Some(params) => {
            // Post-processing stage: add the identified drive torque to the
            // logged multibody torques.
            let augmented = augment_with_drive(&result.trace, params);
            write_augmented_torques(&out.join("torque_with_drive.csv"), &result.trace, &augmented)?;
            "torque_with_drive.csv written\n".to_string()
        }
        None => String::new(),
    };
    let summary_human = format!(
        "walking simulation over {:.2} s\n\
         fall: {}\n\
         min normal force while loaded: {:.4} N\n\
         max corner penetration: {:.4} mm\n\
         rms joint tracking error: {:.3} deg\n\
         zmp variance over walk window: {:.6e} m^2\n\
         {drive_note}",
        result.trace.t.last().copied().unwrap_or(0.0),
        result
            .fall
            .map(|t| format!("at {t:.3} s"))
            .unwrap_or_else(|| "none".into()),
        result.summary.min_normal_force,
        result.summary.max_penetration * 1e3,
        result.summary.rms_tracking_error.to_degrees(),
        zmp_var,
    );
    let summary_machine = format!(
        "fall = {}\nmin_normal_force = {}\nmax_penetration = {}\nrms_tracking_error = {}\nzmp_variance = {}\nhalved_steps = {}\n",
        result.fall.map(|t| t.to_string()).unwrap_or_else(|| "none".into()),
        result.summary.min_normal_force,
        result.summary.max_penetration,
        result.summary.rms_tracking_error,
        zmp_var,
        result.summary.halved_steps,
    );
    std::fs::write(
        out.join("summary.txt"),
        format!("{summary_human}\n[summary]\n{summary_machine}"),
    )
    .map_err(|e| CliError::data(e.to_string()))?;

    if !settings["compare"].is_empty() {
        compare_traces(
            Path::new(&settings["compare"]),
            &result.trace,
            &out.join("compare.csv"),
        )?;
    }
    println!(
        "walk: {} samples -> {}",
        result.trace.len(),
        out.join("trace.csv").display()
    );
    if result.fall.is_some() {
        eprintln!("warning: fall detected; trace truncated");
        return Ok(EXIT_FALL);
    }
    Ok(EXIT_OK)
}

fn augment_with_drive(trace: &crate::sim::SimTrace, params: &DriveParams) -> Vec<DVector<f64>> {
    // q̈ of the actuated joints via finite differences of the logged qd.
    let dt_out = trace.dt * trace.decimation as f64;
    (0..trace.len())
        .map(|i| {
            let n = trace.tau[i].len();
            DVector::from_fn(n, |k, _| {
                let qd = trace.qd[i][6 + k];
                let qdd = if i + 1 < trace.len() && i > 0 {
                    (trace.qd[i + 1][6 + k] - trace.qd[i - 1][6 + k]) / (2.0 * dt_out)
                } else {
                    0.0
                };
                trace.tau[i][k] + ident::predict_drive_torque(params, qdd, qd)
            })
        })
        .collect()
}

fn write_augmented_torques(
    path: &Path,
    trace: &crate::sim::SimTrace,
    augmented: &[DVector<f64>],
) -> Result<(), CliError> {
    use std::io::Write as _;
    let mut out = std::fs::File::create(path).map_err(|e| CliError::data(e.to_string()))?;
    writeln!(out, "# units: t s, tau N·m (multibody + drive)")
        .map_err(|e| CliError::data(e.to_string()))?;
    let n = augmented.first().map(|v| v.len()).unwrap_or(0);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|k| format!("tau_{k}")))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    for i in 0..trace.len() {
        let mut row = vec![format!("{}", trace.t[i])];
        for v in augmented[i].iter() {
            row.push(format!("{v}"));
        }
        writeln!(out, "{}", row.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

/// Interpolate the rigid solve onto the trace timestamps and emit deltas.
fn compare_traces(
    rigid_csv: &Path,
    trace: &crate::sim::SimTrace,
    out_path: &Path,
) -> Result<(), CliError> {
    use std::io::Write as _;
    let pstr = rigid_csv.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(rigid_csv)
        .map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(format!("{pstr}: {e}")))?
        .clone();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
        rows.push(
            record
                .iter()
                .map(|v| v.parse().unwrap_or(f64::NAN))
                .collect(),
        );
    }
    if rows.is_empty() {
        return Err(CliError::data(format!("{pstr}: no data rows")));
    }
    let col = |name: &str| headers.iter().position(|h| h == name);
    let t_col = col("t").ok_or_else(|| CliError::data(format!("{pstr}: missing column t")))?;
    let n_tau = headers.iter().filter(|h| h.starts_with("tau_")).count();
    let zx = col("zmp_x").ok_or_else(|| CliError::data(format!("{pstr}: missing zmp_x")))?;
    let zy = col("zmp_y").ok_or_else(|| CliError::data(format!("{pstr}: missing zmp_y")))?;
    let fl = col("Flf_fz").ok_or_else(|| CliError::data(format!("{pstr}: missing Flf_fz")))?;
    let fr = col("Frf_fz").ok_or_else(|| CliError::data(format!("{pstr}: missing Frf_fz")))?;

    // Linear interpolation over the rigid rows at time t.
    let interp = |t: f64, c: usize| -> f64 {
        let first = rows.first().unwrap();
        let last = rows.last().unwrap();
        if t <= first[t_col] {
            return first[c];
        }
        if t >= last[t_col] {
            return last[c];
        }
        let mut lo = 0;
        let mut hi = rows.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if rows[mid][t_col] <= t {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (t0, t1) = (rows[lo][t_col], rows[hi][t_col]);
        let u = (t - t0) / (t1 - t0);
        rows[lo][c] * (1.0 - u) + rows[hi][c] * u
    };

    let mut out = std::fs::File::create(out_path).map_err(|e| CliError::data(e.to_string()))?;
    writeln!(out, "# per-sample deltas: compliant simulation minus rigid solve")
        .map_err(|e| CliError::data(e.to_string()))?;
    let n = trace.tau.first().map(|t| t.len()).unwrap_or(0).min(n_tau);
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|k| format!("dtau_{k}")))
        .chain(["dFlf_fz", "dFrf_fz", "dzmp_x", "dzmp_y"].iter().map(|s| s.to_string()))
        .collect();
    writeln!(out, "{}", header.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    let (r0, r1) = (rows.first().unwrap()[t_col], rows.last().unwrap()[t_col]);
    for i in 0..trace.len() {
        let t = trace.t[i];
        if t < r0 || t > r1 {
            continue;
        }
        let mut row = vec![format!("{t}")];
        for k in 0..n {
            let rigid_tau = interp(t, col(&format!("tau_{k}")).unwrap());
            row.push(format!("{}", trace.tau[i][k] - rigid_tau));
        }
        row.push(format!("{}", trace.left[i].force.z - interp(t, fl)));
        row.push(format!("{}", trace.right[i].force.z - interp(t, fr)));
        match trace.zmp[i] {
            Some(p) => {
                row.push(format!("{}", p.x - interp(t, zx)));
                row.push(format!("{}", p.y - interp(t, zy)));
            }
            None => {
                row.push("nan".into());
                row.push("nan".into());
            }
        }
        writeln!(out, "{}", row.join(",")).map_err(|e| CliError::data(e.to_string()))?;
    }
    Ok(())
}

fn run_identify_cmd(out: &Path, settings: Settings) -> Result<u8, CliError> {
    let paths: Vec<&str> = settings["experiments"]
        .split(',')
        .filter(|s| !s.is_empty())
        .collect();
    if paths.is_empty() {
        return Err(CliError::usage("--experiments is empty"));
    }
    #[derive(serde::Deserialize)]
    struct MetaFile {
        format: u32,
        #[serde(flatten)]
        metadata: DriveMetadata,
    }
    let meta_text = std::fs::read_to_string(&settings["metadata"])
        .map_err(|e| CliError::data(format!("{}: {e}", settings["metadata"])))?;
    let meta: MetaFile = toml::from_str(&meta_text)
        .map_err(|e| CliError::data(format!("{}: {e}", settings["metadata"])))?;
    if meta.format != 1 {
        return Err(CliError::data(format!(
            "unsupported metadata format {}",
            meta.format
        )));
    }
    let basis: Vec<BasisTerm> = match settings["basis"].as_str() {
        "default" => DEFAULT_BASIS.to_vec(),
        "full" => FULL_BASIS.to_vec(),
        other => {
            return Err(CliError::usage(format!(
                "unknown basis `{other}` (default|full)"
            )))
        }
    };
    let cutoff_hz = get_f64(&settings, "cutoff_hz")?;
    ensure_out(out)?;
    save_manifest(out, "identify", &settings)?;

    let mut fits = Vec::new();
    for path in &paths {
        let raw = read_experiment_csv(Path::new(path))
            .map_err(|e| CliError::data(e.to_string()))?;
        let dataset = ident::derive_kinematics(&raw, meta.metadata.clone(), FilterConfig { cutoff_hz })
            .map_err(|e| CliError::data(format!("{path}: {e}")))?;
        let fit = ident::identify_dataset(&dataset, &basis)
            .map_err(|e| CliError::data(format!("{path}: {e}")))?;
        fits.push((path.to_string(), fit));
    }

    let mut table = String::from("# drive-system identification\n");
    table.push_str("experiment");
    for term in &basis {
        table.push(',');
        table.push_str(term.name());
    }
    table.push_str(",residual_rms\n");
    for (path, fit) in &fits {
        table.push_str(path);
        for v in &fit.params.values {
            table.push_str(&format!(",{v}"));
        }
        table.push_str(&format!(",{}\n", fit.residual_rms));
    }

    let mut text_report = String::new();
    if fits.len() >= 2 {
        let sets: Vec<DriveParams> = fits.iter().map(|(_, f)| f.params.clone()).collect();
        let report = ident::consistency(&sets).map_err(|e| CliError::data(e.to_string()))?;
        table.push_str("AVG");
        for v in &report.avg {
            table.push_str(&format!(",{v}"));
        }
        table.push_str(",\nSTDV");
        for v in &report.stdv {
            table.push_str(&format!(",{v}"));
        }
        table.push_str(",\nCM%");
        for v in &report.cm_percent {
            match v {
                Some(x) => table.push_str(&format!(",{x}")),
                None => table.push_str(",n/a"),
            }
        }
        table.push_str(",\n");
        text_report.push_str("consistency across experiments:\n");
        for (k, term) in report.basis.iter().enumerate() {
            text_report.push_str(&format!(
                "  {:>10}: AVG {:10.4}  STDV {:9.4}  CM {}\n",
                term.name(),
                report.avg[k],
                report.stdv[k],
                report.cm_percent[k]
                    .map(|x| format!("{x:.2} %"))
                    .unwrap_or_else(|| "n/a".into()),
            ));
        }
    } else {
        text_report.push_str("consistency: n/a (single experiment)\n");
    }
    std::fs::write(out.join("params.csv"), table).map_err(|e| CliError::data(e.to_string()))?;
    std::fs::write(out.join("report.txt"), &text_report)
        .map_err(|e| CliError::data(e.to_string()))?;
    print!("{text_report}");
    println!("identify: {} experiments -> {}", fits.len(), out.join("params.csv").display());
    Ok(EXIT_OK)
}

fn run_compare_cmd(out: &Path, settings: Settings) -> Result<u8, CliError> {
    // Standalone variant of `walk --compare`: reads both CSVs.
    let compliant = Path::new(&settings["compliant"]);
    let rigid = Path::new(&settings["rigid"]);
    ensure_out(out)?;
    save_manifest(out, "compare", &settings)?;
    let trace = read_trace_for_compare(compliant)?;
    compare_traces(rigid, &trace, &out.join("compare.csv"))?;
    println!("compare -> {}", out.join("compare.csv").display());
    Ok(EXIT_OK)
}

/// Minimal trace reconstruction from a trace CSV (only the fields the
/// comparison needs).
fn read_trace_for_compare(path: &Path) -> Result<crate::sim::SimTrace, CliError> {
    let pstr = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::data(format!("{pstr}: {e}")))?
        .clone();
    let col = |name: &str| -> Result<usize, CliError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::data(format!("{pstr}: missing column {name}")))
    };
    let n_q = headers
        .iter()
        .filter(|h| h.starts_with("q_") && h[2..].chars().all(|c| c.is_ascii_digit()))
        .count();
    let n_tau = headers.iter().filter(|h| h.starts_with("tau_")).count();
    let t_col = col("t")?;
    let zx = col("zmp_x")?;
    let zy = col("zmp_y")?;
    let flf = col("Flf_fz")?;
    let frf = col("Frf_fz")?;
    let mut trace = crate::sim::SimTrace::empty_for_compare(n_q);
    for record in reader.records() {
        let record = record.map_err(|e| CliError::data(format!("{pstr}: {e}")))?;
        let get = |c: usize| -> f64 { record.get(c).and_then(|v| v.parse().ok()).unwrap_or(f64::NAN) };
        trace.t.push(get(t_col));
        trace.q.push(DVector::zeros(n_q));
        trace.qd.push(DVector::zeros(n_q));
        trace
            .tau
            .push(DVector::from_fn(n_tau, |k, _| get(col(&format!("tau_{k}")).unwrap())));
        let mut left = crate::rigid_contact::ContactWrench::zero_at(nalgebra::Vector3::zeros());
        left.force.z = get(flf);
        let mut right = crate::rigid_contact::ContactWrench::zero_at(nalgebra::Vector3::zeros());
        right.force.z = get(frf);
        trace.left.push(left);
        trace.right.push(right);
        let (x, y) = (get(zx), get(zy));
        trace.zmp.push(if x.is_nan() || y.is_nan() {
            None
        } else {
            Some(nalgebra::Point2::new(x, y))
        });
        trace.pen_left.push(Vec::new());
        trace.pen_right.push(Vec::new());
        trace.contact_left.push(false);
        trace.contact_right.push(false);
    }
    if trace.t.is_empty() {
        return Err(CliError::data(format!("{pstr}: no data rows")));
    }
    Ok(trace)
}
