//! Drive-system identification by linear least squares.
//!
//! A joint's drive torque is modeled as a linear combination of basis terms
//! of the joint motion — effective inertia times acceleration, viscous
//! (and optionally cubic) velocity terms, and Coulomb friction:
//!
//! ```text
//! τ_drive = j·θ̈ + b·θ̇ + c·θ̇³ + f·sign(θ̇)
//! ```
//!
//! Stacking sampled rows gives a regression `τ = Φ·p` solved by the left
//! pseudo-inverse. Repeating the fit across experiments and comparing the
//! per-parameter spread (the consistency measure `CM = STDV/AVG`) scores
//! whether one parameter set is valid across operating conditions.

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IdentError {
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("sample times must be strictly increasing (violation at index {0})")]
    NonMonotonicTime(usize),
    #[error("under-determined fit: {m} samples for {n} basis terms (need m > n)")]
    UnderDetermined { m: usize, n: usize },
    #[error("regressor is rank deficient (rank {rank} of {cols}): columns {names:?} are collinear on this data")]
    RankDeficient {
        rank: usize,
        cols: usize,
        names: Vec<&'static str>,
    },
    #[error("basis mismatch between parameter sets: {0:?} vs {1:?}")]
    BasisMismatch(Vec<BasisTerm>, Vec<BasisTerm>),
    #[error("consistency needs at least two parameter sets, got {0}")]
    TooFewSets(usize),
    #[error("empty basis")]
    EmptyBasis,
}

/// Regression basis terms, in canonical column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum BasisTerm {
    /// Acceleration (effective inertia `j`).
    Accel,
    /// Velocity (viscous coefficient `b`).
    Vel,
    /// Velocity cubed (coefficient `c`).
    VelCubed,
    /// sign(velocity) with `sign(0) = 0` (Coulomb coefficient `f`).
    SignVel,
}

impl BasisTerm {
    pub fn name(self) -> &'static str {
        match self {
            BasisTerm::Accel => "accel",
            BasisTerm::Vel => "vel",
            BasisTerm::VelCubed => "vel^3",
            BasisTerm::SignVel => "sign(vel)",
        }
    }

    fn eval(self, vel: f64, accel: f64) -> f64 {
        match self {
            BasisTerm::Accel => accel,
            BasisTerm::Vel => vel,
            BasisTerm::VelCubed => vel * vel * vel,
            BasisTerm::SignVel => {
                if vel == 0.0 {
                    0.0
                } else {
                    vel.signum()
                }
            }
        }
    }
}

/// Default basis: inertia, viscous and Coulomb terms.
pub const DEFAULT_BASIS: [BasisTerm; 3] = [BasisTerm::Accel, BasisTerm::Vel, BasisTerm::SignVel];

/// Full basis including the cubic velocity term.
pub const FULL_BASIS: [BasisTerm; 4] = [
    BasisTerm::Accel,
    BasisTerm::Vel,
    BasisTerm::VelCubed,
    BasisTerm::SignVel,
];

/// One time sample of an identification experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub angle: f64,
    pub vel: f64,
    pub accel: f64,
    pub torque: f64,
}

/// Drive-train constants used to convert motor current to output torque:
/// `τ = N_p · N_h · k_m · i`.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DriveMetadata {
    pub joint: String,
    /// Pulley reduction ratio.
    pub n_p: f64,
    /// Harmonic-drive reduction ratio.
    pub n_h: f64,
    /// Motor torque constant (N·m/A).
    pub k_m: f64,
}

impl DriveMetadata {
    pub fn torque_from_current(&self, current: f64) -> f64 {
        self.n_p * self.n_h * self.k_m * current
    }
}

/// Sampled (θ, θ̇, θ̈, τ) records for one experiment.
#[derive(Debug, Clone)]
pub struct RegressionDataset {
    pub samples: Vec<Sample>,
    pub metadata: DriveMetadata,
}

/// Raw encoder log row: either measured torque or motor current (converted
/// through the metadata).
#[derive(Debug, Clone, Copy)]
pub enum RawMeasurement {
    Torque(f64),
    Current(f64),
}

#[derive(Debug, Clone, Copy)]
pub struct RawSample {
    pub t: f64,
    pub angle: f64,
    pub measurement: RawMeasurement,
}

/// Configuration of the differentiation filter.
#[derive(Debug, Clone, Copy)]
pub struct FilterConfig {
    /// Low-pass cutoff (Hz) of the zero-phase two-pass smoother.
    pub cutoff_hz: f64,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig { cutoff_hz: 20.0 }
    }
}

/// Zero-phase low-pass: first-order IIR run forward then backward.
fn filtfilt(x: &[f64], dts: &[f64], cutoff_hz: f64) -> Vec<f64> {
    let rc = 1.0 / (2.0 * std::f64::consts::PI * cutoff_hz);
    let mut y = x.to_vec();
    let mut prev = y[0];
    for i in 1..y.len() {
        let alpha = dts[i - 1] / (rc + dts[i - 1]);
        prev += alpha * (y[i] - prev);
        y[i] = prev;
    }
    let mut prev = y[y.len() - 1];
    for i in (0..y.len() - 1).rev() {
        let alpha = dts[i] / (rc + dts[i]);
        prev += alpha * (y[i] - prev);
        y[i] = prev;
    }
    y
}

/// Derive velocities and accelerations from an encoder log by central
/// differences after zero-phase low-pass filtering; convert current to
/// torque when needed.
pub fn derive_kinematics(
    raw: &[RawSample],
    metadata: DriveMetadata,
    filter: FilterConfig,
) -> Result<RegressionDataset, IdentError> {
    if raw.len() < 5 {
        return Err(IdentError::TooFewSamples {
            min: 5,
            got: raw.len(),
        });
    }
    for i in 1..raw.len() {
        if raw[i].t <= raw[i - 1].t {
            return Err(IdentError::NonMonotonicTime(i));
        }
    }
    let n = raw.len();
    let angles: Vec<f64> = raw.iter().map(|s| s.angle).collect();
    let dts: Vec<f64> = (1..n).map(|i| raw[i].t - raw[i - 1].t).collect();
    let smoothed = filtfilt(&angles, &dts, filter.cutoff_hz);

    let diff = |x: &[f64], i: usize| -> f64 {
        if i == 0 {
            (x[1] - x[0]) / dts[0]
        } else if i == n - 1 {
            (x[n - 1] - x[n - 2]) / dts[n - 2]
        } else {
            (x[i + 1] - x[i - 1]) / (raw[i + 1].t - raw[i - 1].t)
        }
    };
    let vels: Vec<f64> = (0..n).map(|i| diff(&smoothed, i)).collect();
    let accels: Vec<f64> = (0..n).map(|i| diff(&vels, i)).collect();

    // Drop the filter's boundary-settling windows (≈ 10 time constants on
    // each side); their second differences carry large transients that
    // would dominate the least-squares fit. Always keep at least 5 samples.
    let rc = 1.0 / (2.0 * std::f64::consts::PI * filter.cutoff_hz);
    let median_dt = {
        let mut sorted = dts.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted[sorted.len() / 2]
    };
    let mut trim = (10.0 * rc / median_dt).ceil() as usize;
    trim = trim.min(n.saturating_sub(5) / 2);

    let samples = raw
        .iter()
        .enumerate()
        .skip(trim)
        .take(n - 2 * trim)
        .map(|(i, s)| Sample {
            t: s.t,
            angle: s.angle,
            vel: vels[i],
            accel: accels[i],
            torque: match s.measurement {
                RawMeasurement::Torque(tau) => tau,
                RawMeasurement::Current(amp) => metadata.torque_from_current(amp),
            },
        })
        .collect();
    Ok(RegressionDataset { samples, metadata })
}

/// Build the m×n regressor matrix over the dataset with the given basis.
pub fn build_regressor(
    dataset: &RegressionDataset,
    basis: &[BasisTerm],
) -> Result<DMatrix<f64>, IdentError> {
    if basis.is_empty() {
        return Err(IdentError::EmptyBasis);
    }
    let m = dataset.samples.len();
    if m <= basis.len() {
        return Err(IdentError::UnderDetermined { m, n: basis.len() });
    }
    Ok(DMatrix::from_fn(m, basis.len(), |r, c| {
        let s = &dataset.samples[r];
        basis[c].eval(s.vel, s.accel)
    }))
}

/// Identified drive parameters over a declared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveParams {
    pub basis: Vec<BasisTerm>,
    pub values: Vec<f64>,
}

impl DriveParams {
    pub fn new(basis: Vec<BasisTerm>, values: Vec<f64>) -> Self {
        assert_eq!(basis.len(), values.len());
        DriveParams { basis, values }
    }

    pub fn coefficient(&self, term: BasisTerm) -> Option<f64> {
        self.basis
            .iter()
            .position(|&b| b == term)
            .map(|i| self.values[i])
    }

    /// Effective inertia `j`, if fitted.
    pub fn inertia(&self) -> Option<f64> {
        self.coefficient(BasisTerm::Accel)
    }

    /// Viscous coefficient `b`, if fitted.
    pub fn viscous(&self) -> Option<f64> {
        self.coefficient(BasisTerm::Vel)
    }

    /// Coulomb coefficient `f`, if fitted.
    pub fn coulomb(&self) -> Option<f64> {
        self.coefficient(BasisTerm::SignVel)
    }
}

/// Predict the drive torque at one motion sample.
pub fn predict_drive_torque(params: &DriveParams, accel: f64, vel: f64) -> f64 {
    params
        .basis
        .iter()
        .zip(&params.values)
        .map(|(term, p)| p * term.eval(vel, accel))
        .sum()
}

/// Least-squares fit result.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub params: DriveParams,
    /// RMS of the torque residual.
    pub residual_rms: f64,
}

/// Relative singular-value cutoff for rank detection.
const RANK_TOL: f64 = 1e-10;

/// Solve the regression with the Moore–Penrose left pseudo-inverse.
pub fn identify(
    regressor: &DMatrix<f64>,
    basis: &[BasisTerm],
    torque: &DVector<f64>,
) -> Result<FitResult, IdentError> {
    let m = regressor.nrows();
    let n = regressor.ncols();
    if m <= n {
        return Err(IdentError::UnderDetermined { m, n });
    }
    let svd = regressor.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > RANK_TOL * smax)
        .count();
    if rank < n {
        // Name the columns that participate in the null space.
        let v_t = svd.v_t.as_ref().expect("svd with v_t");
        let mut names = Vec::new();
        for (i, &s) in svd.singular_values.iter().enumerate() {
            if s <= RANK_TOL * smax {
                for c in 0..n {
                    if v_t[(i, c)].abs() > 1e-6 && !names.contains(&basis[c].name()) {
                        names.push(basis[c].name());
                    }
                }
            }
        }
        return Err(IdentError::RankDeficient {
            rank,
            cols: n,
            names,
        });
    }
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let mut sigma_inv = DVector::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        sigma_inv[i] = 1.0 / s;
    }
    let p = v_t.transpose() * DMatrix::from_diagonal(&sigma_inv) * (u.transpose() * torque);
    let residual = regressor * &p - torque;
    let residual_rms = (residual.norm_squared() / m as f64).sqrt();
    Ok(FitResult {
        params: DriveParams::new(basis.to_vec(), p.iter().copied().collect()),
        residual_rms,
    })
}

/// Fit a dataset with a basis in one call.
pub fn identify_dataset(
    dataset: &RegressionDataset,
    basis: &[BasisTerm],
) -> Result<FitResult, IdentError> {
    let phi = build_regressor(dataset, basis)?;
    let tau = DVector::from_iterator(
        dataset.samples.len(),
        dataset.samples.iter().map(|s| s.torque),
    );
    identify(&phi, basis, &tau)
}

/// Per-parameter consistency statistics across experiments.
#[derive(Debug, Clone)]
pub struct ConsistencyReport {
    pub basis: Vec<BasisTerm>,
    /// Arithmetic mean of each parameter.
    pub avg: Vec<f64>,
    /// Population standard deviation (divisor n); this convention
    /// reproduces the reference statistics of the knee-joint experiments.
    pub stdv: Vec<f64>,
    /// Consistency measure STDV/AVG in percent; `None` when AVG = 0.
    pub cm_percent: Vec<Option<f64>>,
}

/// Cross-experiment consistency: AVG, population STDV and CM per parameter.
pub fn consistency(sets: &[DriveParams]) -> Result<ConsistencyReport, IdentError> {
    if sets.len() < 2 {
        return Err(IdentError::TooFewSets(sets.len()));
    }
    let basis = sets[0].basis.clone();
    for s in &sets[1..] {
        if s.basis != basis {
            return Err(IdentError::BasisMismatch(basis, s.basis.clone()));
        }
    }
    let n = sets.len() as f64;
    let dim = basis.len();
    let mut avg = vec![0.0; dim];
    let mut stdv = vec![0.0; dim];
    for k in 0..dim {
        avg[k] = sets.iter().map(|s| s.values[k]).sum::<f64>() / n;
        stdv[k] = (sets
            .iter()
            .map(|s| (s.values[k] - avg[k]).powi(2))
            .sum::<f64>()
            / n)
            .sqrt();
    }
    let cm_percent = avg
        .iter()
        .zip(&stdv)
        .map(|(&a, &s)| if a != 0.0 { Some(100.0 * s / a) } else { None })
        .collect();
    Ok(ConsistencyReport {
        basis,
        avg,
        stdv,
        cm_percent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn meta() -> DriveMetadata {
        DriveMetadata {
            joint: "knee".into(),
            n_p: 2.0,
            n_h: 100.0,
            k_m: 0.05,
        }
    }

    /// Synthetic dataset from known parameters, exact kinematics.
    fn synthetic(j: f64, b: f64, f: f64, n: usize) -> RegressionDataset {
        let samples = (0..n)
            .map(|i| {
                let t = i as f64 * 1e-3;
                let w = 2.0 * std::f64::consts::PI * 1.3;
                let angle = 0.8 * (w * t).sin() + 0.2 * (3.0 * w * t).cos();
                let vel = 0.8 * w * (w * t).cos() - 0.6 * w * (3.0 * w * t).sin();
                let accel = -0.8 * w * w * (w * t).sin() - 1.8 * w * w * (3.0 * w * t).cos();
                let sign = if vel == 0.0 { 0.0 } else { vel.signum() };
                Sample {
                    t,
                    angle,
                    vel,
                    accel,
                    torque: j * accel + b * vel + f * sign,
                }
            })
            .collect();
        RegressionDataset {
            samples,
            metadata: meta(),
        }
    }

    #[test]
    fn sine_trajectory_acceleration_to_one_percent() {
        // θ = sin(2πt) at 1 kHz: the filtered central difference must agree
        // with the analytic second derivative to 1 % over the interior.
        let w = 2.0 * std::f64::consts::PI;
        let raw: Vec<RawSample> = (0..1001)
            .map(|i| {
                let t = i as f64 * 1e-3;
                RawSample {
                    t,
                    angle: (w * t).sin(),
                    measurement: RawMeasurement::Torque(0.0),
                }
            })
            .collect();
        let ds = derive_kinematics(&raw, meta(), FilterConfig::default()).unwrap();
        // Boundary-settling windows are dropped by the pipeline itself.
        for s in &ds.samples {
            let expected = -w * w * (w * s.t).sin();
            assert!(
                (s.accel - expected).abs() <= 0.01 * w * w,
                "t={}: accel {} vs {}",
                s.t,
                s.accel,
                expected
            );
        }
    }

    #[test]
    fn constant_angle_zero_derivatives() {
        let raw: Vec<RawSample> = (0..100)
            .map(|i| RawSample {
                t: i as f64 * 1e-2,
                angle: 0.42,
                measurement: RawMeasurement::Torque(0.0),
            })
            .collect();
        let ds = derive_kinematics(&raw, meta(), FilterConfig::default()).unwrap();
        for s in &ds.samples {
            assert_abs_diff_eq!(s.vel, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.accel, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn current_to_torque_product() {
        // 1 A through N_p·N_h·k_m = 2·100·0.05 = 10 N·m.
        assert_relative_eq!(meta().torque_from_current(1.0), 10.0);
    }

    #[test]
    fn non_monotone_time_is_rejected() {
        let mut raw: Vec<RawSample> = (0..10)
            .map(|i| RawSample {
                t: i as f64,
                angle: 0.0,
                measurement: RawMeasurement::Torque(0.0),
            })
            .collect();
        raw[5].t = raw[4].t;
        assert!(matches!(
            derive_kinematics(&raw, meta(), FilterConfig::default()),
            Err(IdentError::NonMonotonicTime(5))
        ));
    }

    #[test]
    fn regressor_row_evaluation() {
        let mk = |vel: f64, accel: f64| Sample {
            t: 0.0,
            angle: 0.0,
            vel,
            accel,
            torque: 0.0,
        };
        let mut samples = vec![mk(-1.0, 2.0), mk(0.0, 0.0)];
        samples.extend([mk(0.5, 1.0), mk(0.7, -1.0), mk(-0.7, 0.3)]);
        for (i, s) in samples.iter_mut().enumerate() {
            s.t = i as f64;
        }
        let ds = RegressionDataset {
            samples,
            metadata: meta(),
        };
        let phi = build_regressor(&ds, &FULL_BASIS).unwrap();
        // First row: (θ̈, θ̇, θ̇³, sign θ̇) = (2, -1, -1, -1).
        assert_eq!(phi[(0, 0)], 2.0);
        assert_eq!(phi[(0, 1)], -1.0);
        assert_eq!(phi[(0, 2)], -1.0);
        assert_eq!(phi[(0, 3)], -1.0);
        // Zero-velocity row: velocity columns all zero (sign(0) = 0).
        assert_eq!(phi[(1, 1)], 0.0);
        assert_eq!(phi[(1, 2)], 0.0);
        assert_eq!(phi[(1, 3)], 0.0);
    }

    #[test]
    fn under_determined_is_an_error() {
        let ds = synthetic(8.0, 87.0, 25.0, 3);
        assert!(matches!(
            build_regressor(&ds, &DEFAULT_BASIS),
            Err(IdentError::UnderDetermined { m: 3, n: 3 })
        ));
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let (j, b, f) = (8.0, 87.0, 25.0);
        let ds = synthetic(j, b, f, 500);
        let fit = identify_dataset(&ds, &DEFAULT_BASIS).unwrap();
        assert_abs_diff_eq!(fit.params.inertia().unwrap(), j, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.params.viscous().unwrap(), b, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.params.coulomb().unwrap(), f, epsilon = 1e-9);
        assert!(fit.residual_rms < 1e-9);
    }

    #[test]
    fn zero_torque_gives_zero_params() {
        let mut ds = synthetic(1.0, 1.0, 1.0, 200);
        for s in &mut ds.samples {
            s.torque = 0.0;
        }
        let fit = identify_dataset(&ds, &DEFAULT_BASIS).unwrap();
        for v in &fit.params.values {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn constant_velocity_makes_columns_collinear() {
        // θ̇ constant: the vel and sign(vel) columns are proportional.
        let samples: Vec<Sample> = (0..50)
            .map(|i| Sample {
                t: i as f64,
                angle: 0.0,
                vel: 2.0,
                accel: 0.0,
                torque: 1.0,
            })
            .collect();
        let ds = RegressionDataset {
            samples,
            metadata: meta(),
        };
        let basis = [BasisTerm::Vel, BasisTerm::SignVel];
        let phi = build_regressor(&ds, &basis).unwrap();
        let tau = DVector::from_element(50, 1.0);
        let err = identify(&phi, &basis, &tau).unwrap_err();
        match err {
            IdentError::RankDeficient { names, .. } => {
                assert!(names.contains(&"vel") && names.contains(&"sign(vel)"));
            }
            other => panic!("expected rank deficiency, got {other:?}"),
        }
    }

    #[test]
    fn normal_equations_residual_is_zero() {
        let ds = synthetic(3.0, 40.0, 12.0, 300);
        let phi = build_regressor(&ds, &DEFAULT_BASIS).unwrap();
        let tau = DVector::from_iterator(ds.samples.len(), ds.samples.iter().map(|s| s.torque));
        // Perturb the torque so the fit is not exact.
        let tau_noisy =
            &tau + DVector::from_fn(tau.len(), |i, _| 0.1 * ((i * 37 % 11) as f64 - 5.0));
        let fit = identify(&phi, &DEFAULT_BASIS, &tau_noisy).unwrap();
        let p = DVector::from_vec(fit.params.values.clone());
        let normal_residual = phi.transpose() * (&phi * &p - &tau_noisy);
        assert!(normal_residual.abs().max() < 1e-8, "{normal_residual:?}");
    }

    #[test]
    fn knee_experiment_rows_consistency() {
        let mk = |j: f64, b: f64, f: f64| DriveParams::new(DEFAULT_BASIS.to_vec(), vec![j, b, f]);
        let sets = [
            mk(10.51, 116.48, 24.34),
            mk(9.84, 105.00, 25.25),
            mk(1.37, 88.11, 26.34),
            mk(13.017, 58.32, 24.20),
            mk(5.96, 68.77, 24.04),
        ];
        let report = consistency(&sets).unwrap();
        // Viscous row.
        assert_abs_diff_eq!(report.avg[1], 87.34, epsilon = 0.01);
        assert_abs_diff_eq!(report.stdv[1], 21.67, epsilon = 0.01);
        assert_abs_diff_eq!(report.cm_percent[1].unwrap(), 24.8, epsilon = 0.1);
        // Coulomb row.
        assert_abs_diff_eq!(report.avg[2], 24.83, epsilon = 0.01);
        assert_abs_diff_eq!(report.stdv[2], 0.86, epsilon = 0.01);
        assert_abs_diff_eq!(report.cm_percent[2].unwrap(), 3.47, epsilon = 0.1);
        // Inertia row: the population statistics of these five values are
        // ≈ 4.07 / 50 %, not the commonly quoted 2.07 / 25.43 %.
        assert_abs_diff_eq!(report.avg[0], 8.14, epsilon = 0.01);
        assert_abs_diff_eq!(report.stdv[0], 4.07, epsilon = 0.01);
    }

    #[test]
    fn identical_sets_have_zero_spread() {
        let p = DriveParams::new(DEFAULT_BASIS.to_vec(), vec![8.0, 87.0, 25.0]);
        let report = consistency(&[p.clone(), p.clone(), p]).unwrap();
        for k in 0..3 {
            assert_eq!(report.stdv[k], 0.0);
            assert_eq!(report.cm_percent[k], Some(0.0));
        }
    }

    #[test]
    fn cm_is_scale_invariant() {
        let mk = |scale: f64| {
            [
                DriveParams::new(vec![BasisTerm::Vel], vec![scale * 10.0]),
                DriveParams::new(vec![BasisTerm::Vel], vec![scale * 12.0]),
                DriveParams::new(vec![BasisTerm::Vel], vec![scale * 9.0]),
            ]
        };
        let r1 = consistency(&mk(1.0)).unwrap();
        let r7 = consistency(&mk(7.0)).unwrap();
        assert_relative_eq!(
            r1.cm_percent[0].unwrap(),
            r7.cm_percent[0].unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn predict_torque_examples() {
        let p = DriveParams::new(DEFAULT_BASIS.to_vec(), vec![8.14, 87.34, 24.83]);
        assert_eq!(predict_drive_torque(&p, 0.0, 0.0), 0.0);
        assert_relative_eq!(predict_drive_torque(&p, 0.0, 1.0), 112.17, epsilon = 1e-9);
        assert_relative_eq!(predict_drive_torque(&p, 0.0, -1.0), -112.17, epsilon = 1e-9);
    }

    #[test]
    fn round_trip_regenerated_torque() {
        let ds = synthetic(4.2, 55.0, 18.0, 400);
        let fit = identify_dataset(&ds, &DEFAULT_BASIS).unwrap();
        // Predicting over the same kinematics and re-fitting returns the
        // identical parameters.
        let mut ds2 = ds.clone();
        for s in &mut ds2.samples {
            s.torque = predict_drive_torque(&fit.params, s.accel, s.vel);
        }
        let fit2 = identify_dataset(&ds2, &DEFAULT_BASIS).unwrap();
        for (a, b) in fit.params.values.iter().zip(&fit2.params.values) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn noisy_recovery_within_three_standard_errors() {
        // 5 % Gaussian noise, 100 seeded trials: parameters recovered within
        // three standard errors in at least 95 of them.
        let (j, b, f) = (8.0, 87.0, 25.0);
        let base = synthetic(j, b, f, 400);
        let phi = build_regressor(&base, &DEFAULT_BASIS).unwrap();
        let tau_clean =
            DVector::from_iterator(base.samples.len(), base.samples.iter().map(|s| s.torque));
        let tau_scale = tau_clean.amax();

        // Box–Muller on a splitmix64 stream keeps the test self-contained.
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut next_u64 = move || {
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        };
        let mut gauss = move || {
            let u1 = (next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
            let u2 = (next_u64() as f64 + 1.0) / (u64::MAX as f64 + 2.0);
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        };

        let sigma = 0.05 * tau_scale;
        // Standard errors from (ΦᵀΦ)⁻¹ σ².
        let gram_inv = (phi.transpose() * &phi)
            .try_inverse()
            .expect("full-rank regressor");
        let se: Vec<f64> = (0..3).map(|k| sigma * gram_inv[(k, k)].sqrt()).collect();

        let truth = [j, b, f];
        let mut ok = 0;
        for _ in 0..100 {
            let noisy = DVector::from_fn(tau_clean.len(), |i, _| tau_clean[i] + sigma * gauss());
            let fit = identify(&phi, &DEFAULT_BASIS, &noisy).unwrap();
            let within = (0..3).all(|k| (fit.params.values[k] - truth[k]).abs() <= 3.0 * se[k]);
            if within {
                ok += 1;
            }
        }
        assert!(ok >= 95, "only {ok}/100 trials within 3 SE");
    }
}
