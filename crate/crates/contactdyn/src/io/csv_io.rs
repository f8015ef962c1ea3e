//! CSV readers and writers.
//!
//! Trajectory files carry the full generalized state plus the support-phase
//! schedule: `t, q_0..q_{N-1}, qd_0.., qdd_0.., phase, stance` where
//! `N = 6 + n_actuated`, `phase ∈ {ssp, dsp}` and
//! `stance ∈ {left, right, both}`.

use std::io::Write as _;
use std::path::Path;

use nalgebra::DVector;
use thiserror::Error;

use crate::gait::SupportPhase;
use crate::ident::{RawMeasurement, RawSample};
use crate::rigid_contact::ContactWrench;
use crate::sim::{BallDropTrace, SimTrace};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: String,
        source: Box<csv::Error>,
    },
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path} row {row}: bad value in column `{column}`: {value:?}")]
    BadValue {
        path: String,
        row: usize,
        column: String,
        value: String,
    },
    #[error("{path} row {row}: unknown phase/stance pair {phase:?}/{stance:?}")]
    BadPhase {
        path: String,
        row: usize,
        phase: String,
        stance: String,
    },
    #[error("{path}: expected {expected} coordinates, found {found}")]
    Dimension {
        path: String,
        expected: usize,
        found: usize,
    },
    #[error("{path}: file has no data rows")]
    Empty { path: String },
}

/// One row of a reference-trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub phase: SupportPhase,
}

fn io_err(path: &Path, source: std::io::Error) -> CsvError {
    CsvError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write a trajectory with its phase schedule.
pub fn write_trajectory_csv(path: &Path, samples: &[TrajectorySample]) -> Result<(), CsvError> {
    let mut out = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(
        out,
        "# units: t s, q m/rad, qd m/s|rad/s, qdd m/s^2|rad/s^2"
    )
    .map_err(|e| io_err(path, e))?;
    let n = samples.first().map(|s| s.q.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    for prefix in ["q", "qd", "qdd"] {
        for k in 0..n {
            header.push(format!("{prefix}_{k}"));
        }
    }
    header.push("phase".into());
    header.push("stance".into());
    writeln!(out, "{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for s in samples {
        let mut row = vec![format!("{}", s.t)];
        for v in [&s.q, &s.qd, &s.qdd] {
            for x in v.iter() {
                row.push(format!("{x}"));
            }
        }
        row.push(s.phase.phase_label().to_string());
        row.push(s.phase.stance_label().to_string());
        writeln!(out, "{}", row.join(",")).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Read a trajectory file; `expected_coords` validates the dimension when
/// known (pass `None` to accept any consistent width).
pub fn read_trajectory_csv(
    path: &Path,
    expected_coords: Option<usize>,
) -> Result<Vec<TrajectorySample>, CsvError> {
    let pstr = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?
        .clone();
    let col = |name: &str| -> Result<usize, CsvError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CsvError::MissingColumn {
                path: pstr.clone(),
                column: name.to_string(),
            })
    };
    // Infer N from the q_* columns.
    let n = headers
        .iter()
        .filter(|h| h.starts_with("q_") && h[2..].chars().all(|c| c.is_ascii_digit()))
        .count();
    if n == 0 {
        return Err(CsvError::MissingColumn {
            path: pstr,
            column: "q_0".into(),
        });
    }
    if let Some(expected) = expected_coords {
        if n != expected {
            return Err(CsvError::Dimension {
                path: pstr,
                expected,
                found: n,
            });
        }
    }
    let t_col = col("t")?;
    let phase_col = col("phase")?;
    let stance_col = col("stance")?;
    let mut q_cols = Vec::with_capacity(n);
    let mut qd_cols = Vec::with_capacity(n);
    let mut qdd_cols = Vec::with_capacity(n);
    for k in 0..n {
        q_cols.push(col(&format!("q_{k}"))?);
        qd_cols.push(col(&format!("qd_{k}"))?);
        qdd_cols.push(col(&format!("qdd_{k}"))?);
    }

    let mut samples = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?;
        let parse = |c: usize, name: &str| -> Result<f64, CsvError> {
            let raw = record.get(c).unwrap_or("");
            raw.parse().map_err(|_| CsvError::BadValue {
                path: pstr.clone(),
                row: row_idx + 1,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let t = parse(t_col, "t")?;
        let read_vec = |cols: &[usize], prefix: &str| -> Result<DVector<f64>, CsvError> {
            let mut v = DVector::zeros(n);
            for (k, &c) in cols.iter().enumerate() {
                v[k] = parse(c, &format!("{prefix}_{k}"))?;
            }
            Ok(v)
        };
        let q = read_vec(&q_cols, "q")?;
        let qd = read_vec(&qd_cols, "qd")?;
        let qdd = read_vec(&qdd_cols, "qdd")?;
        let phase_raw = record.get(phase_col).unwrap_or("").to_string();
        let stance_raw = record.get(stance_col).unwrap_or("").to_string();
        let phase =
            SupportPhase::parse(&phase_raw, &stance_raw).ok_or_else(|| CsvError::BadPhase {
                path: pstr.clone(),
                row: row_idx + 1,
                phase: phase_raw,
                stance: stance_raw,
            })?;
        samples.push(TrajectorySample {
            t,
            q,
            qd,
            qdd,
            phase,
        });
    }
    if samples.is_empty() {
        return Err(CsvError::Empty { path: pstr });
    }
    Ok(samples)
}

/// One output row of the rigid-contact inverse-dynamics pipeline.
#[derive(Debug, Clone)]
pub struct InvdynRecord {
    pub t: f64,
    pub tau: DVector<f64>,
    pub left: ContactWrench,
    pub right: ContactWrench,
    pub zmp: Option<nalgebra::Point2<f64>>,
}

fn wrench_cols(prefix: &str) -> Vec<String> {
    ["fx", "fy", "fz", "mx", "my", "mz"]
        .iter()
        .map(|c| format!("{prefix}_{c}"))
        .collect()
}

fn push_wrench(row: &mut Vec<String>, w: &ContactWrench) {
    for v in [
        w.force.x, w.force.y, w.force.z, w.moment.x, w.moment.y, w.moment.z,
    ] {
        row.push(format!("{v}"));
    }
}

/// Write the `t,tau_*,Flf_*,Frf_*,zmp_x,zmp_y` table.
pub fn write_invdyn_csv(path: &Path, records: &[InvdynRecord]) -> Result<(), CsvError> {
    let mut out = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(out, "# units: t s, tau N·m, F N, M N·m, zmp m").map_err(|e| io_err(path, e))?;
    let n = records.first().map(|r| r.tau.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    for k in 0..n {
        header.push(format!("tau_{k}"));
    }
    header.extend(wrench_cols("Flf"));
    header.extend(wrench_cols("Frf"));
    header.push("zmp_x".into());
    header.push("zmp_y".into());
    writeln!(out, "{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for r in records {
        let mut row = vec![format!("{}", r.t)];
        for v in r.tau.iter() {
            row.push(format!("{v}"));
        }
        push_wrench(&mut row, &r.left);
        push_wrench(&mut row, &r.right);
        match r.zmp {
            Some(p) => {
                row.push(format!("{}", p.x));
                row.push(format!("{}", p.y));
            }
            None => {
                row.push("nan".into());
                row.push("nan".into());
            }
        }
        writeln!(out, "{}", row.join(",")).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Write a walking-simulation trace.
pub fn write_sim_trace_csv(path: &Path, trace: &SimTrace) -> Result<(), CsvError> {
    let mut out = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(
        out,
        "# units: t s, q m|rad, qd m/s|rad/s, tau N·m, F N, M N·m, zmp m, pen m"
    )
    .map_err(|e| io_err(path, e))?;
    let n = trace.q.first().map(|q| q.len()).unwrap_or(0);
    let n_act = trace.tau.first().map(|t| t.len()).unwrap_or(0);
    let n_pen = trace.pen_left.first().map(|p| p.len()).unwrap_or(0);
    let mut header = vec!["t".to_string()];
    for prefix in ["q", "qd"] {
        for k in 0..n {
            header.push(format!("{prefix}_{k}"));
        }
    }
    for k in 0..n_act {
        header.push(format!("tau_{k}"));
    }
    header.extend(wrench_cols("Flf"));
    header.extend(wrench_cols("Frf"));
    header.push("zmp_x".into());
    header.push("zmp_y".into());
    for side in ["lf", "rf"] {
        for k in 0..n_pen {
            header.push(format!("pen_{side}_{k}"));
        }
    }
    header.push("contact_lf".into());
    header.push("contact_rf".into());
    writeln!(out, "{}", header.join(",")).map_err(|e| io_err(path, e))?;
    for i in 0..trace.len() {
        let mut row = vec![format!("{}", trace.t[i])];
        for v in trace.q[i].iter().chain(trace.qd[i].iter()) {
            row.push(format!("{v}"));
        }
        for v in trace.tau[i].iter() {
            row.push(format!("{v}"));
        }
        push_wrench(&mut row, &trace.left[i]);
        push_wrench(&mut row, &trace.right[i]);
        match trace.zmp[i] {
            Some(p) => {
                row.push(format!("{}", p.x));
                row.push(format!("{}", p.y));
            }
            None => {
                row.push("nan".into());
                row.push("nan".into());
            }
        }
        for v in trace.pen_left[i].iter().chain(trace.pen_right[i].iter()) {
            row.push(format!("{v}"));
        }
        row.push(format!("{}", trace.contact_left[i] as u8));
        row.push(format!("{}", trace.contact_right[i] as u8));
        writeln!(out, "{}", row.join(",")).map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Write a ball-drop trace.
pub fn write_ball_trace_csv(path: &Path, trace: &BallDropTrace) -> Result<(), CsvError> {
    let mut out = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    writeln!(out, "# units: t s, height m, velocity m/s, normal_force N")
        .map_err(|e| io_err(path, e))?;
    writeln!(out, "t,height,velocity,normal_force").map_err(|e| io_err(path, e))?;
    for i in 0..trace.t.len() {
        writeln!(
            out,
            "{},{},{},{}",
            trace.t[i], trace.height[i], trace.velocity[i], trace.normal_force[i]
        )
        .map_err(|e| io_err(path, e))?;
    }
    Ok(())
}

/// Read an identification experiment: `t,theta[,current|tau]`.
pub fn read_experiment_csv(path: &Path) -> Result<Vec<RawSample>, CsvError> {
    let pstr = path.display().to_string();
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?
        .clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let t_col = find("t").ok_or_else(|| CsvError::MissingColumn {
        path: pstr.clone(),
        column: "t".into(),
    })?;
    let theta_col = find("theta").ok_or_else(|| CsvError::MissingColumn {
        path: pstr.clone(),
        column: "theta".into(),
    })?;
    let current_col = find("current");
    let tau_col = find("tau");
    if current_col.is_none() && tau_col.is_none() {
        return Err(CsvError::MissingColumn {
            path: pstr,
            column: "current|tau".into(),
        });
    }
    let mut samples = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CsvError::Csv {
            path: pstr.clone(),
            source: Box::new(e),
        })?;
        let parse = |c: usize, name: &str| -> Result<f64, CsvError> {
            let raw = record.get(c).unwrap_or("");
            raw.parse().map_err(|_| CsvError::BadValue {
                path: pstr.clone(),
                row: row_idx + 1,
                column: name.to_string(),
                value: raw.to_string(),
            })
        };
        let measurement = match (tau_col, current_col) {
            (Some(c), _) => RawMeasurement::Torque(parse(c, "tau")?),
            (None, Some(c)) => RawMeasurement::Current(parse(c, "current")?),
            (None, None) => unreachable!(),
        };
        samples.push(RawSample {
            t: parse(t_col, "t")?,
            angle: parse(theta_col, "theta")?,
            measurement,
        });
    }
    if samples.is_empty() {
        return Err(CsvError::Empty { path: pstr });
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn trajectory_round_trip_is_lossless() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("traj.csv");
        let samples: Vec<TrajectorySample> = (0..10)
            .map(|i| TrajectorySample {
                t: i as f64 * 0.01 + 1e-13,
                q: DVector::from_fn(8, |k, _| (i * 8 + k) as f64 * 0.137 - 0.3),
                qd: DVector::from_fn(8, |k, _| ((i + k) as f64).sin()),
                qdd: DVector::from_fn(8, |k, _| ((i * k) as f64).cos() * 1e-7),
                phase: if i % 3 == 0 {
                    SupportPhase::Dsp
                } else if i % 3 == 1 {
                    SupportPhase::SspLeft
                } else {
                    SupportPhase::SspRight
                },
            })
            .collect();
        write_trajectory_csv(&path, &samples).unwrap();
        let back = read_trajectory_csv(&path, Some(8)).unwrap();
        assert_eq!(samples.len(), back.len());
        for (a, b) in samples.iter().zip(&back) {
            assert_eq!(a.t.to_bits(), b.t.to_bits());
            assert_eq!(a.phase, b.phase);
            for k in 0..8 {
                assert_eq!(a.q[k].to_bits(), b.q[k].to_bits());
                assert_eq!(a.qd[k].to_bits(), b.qd[k].to_bits());
                assert_eq!(a.qdd[k].to_bits(), b.qdd[k].to_bits());
            }
        }
    }

    #[test]
    fn missing_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "t,q_0,qd_0,phase,stance\n0,1,2,dsp,both\n").unwrap();
        let err = read_trajectory_csv(&path, None).unwrap_err();
        assert!(matches!(err, CsvError::MissingColumn { column, .. } if column == "qdd_0"));
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dim.csv");
        let samples = vec![TrajectorySample {
            t: 0.0,
            q: DVector::zeros(7),
            qd: DVector::zeros(7),
            qdd: DVector::zeros(7),
            phase: SupportPhase::Dsp,
        }];
        write_trajectory_csv(&path, &samples).unwrap();
        let err = read_trajectory_csv(&path, Some(19)).unwrap_err();
        assert!(matches!(
            err,
            CsvError::Dimension {
                expected: 19,
                found: 7,
                ..
            }
        ));
    }

    #[test]
    fn experiment_reader_accepts_current_or_tau() {
        let dir = tempfile::tempdir().unwrap();
        let p1 = dir.path().join("cur.csv");
        std::fs::write(&p1, "t,theta,current\n0,0.1,2.0\n0.01,0.2,2.1\n").unwrap();
        let s = read_experiment_csv(&p1).unwrap();
        assert!(matches!(s[0].measurement, RawMeasurement::Current(c) if c == 2.0));
        let p2 = dir.path().join("tau.csv");
        std::fs::write(&p2, "# units: SI\nt,theta,tau\n0,0.1,5.5\n").unwrap();
        let s = read_experiment_csv(&p2).unwrap();
        assert!(matches!(s[0].measurement, RawMeasurement::Torque(v) if v == 5.5));
    }
}
