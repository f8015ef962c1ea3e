//! File formats: CSV traces/trajectories and run manifests.
//!
//! Every emitted CSV starts with a `#`-prefixed comment line declaring SI
//! units, then a header row. Floats are written in Rust's shortest
//! round-trip form, so reading an emitted file back is lossless.

mod csv_io;
mod manifest;

pub use csv_io::{
    read_experiment_csv, read_trajectory_csv, write_ball_trace_csv, write_invdyn_csv,
    write_sim_trace_csv, write_trajectory_csv, CsvError, InvdynRecord, TrajectorySample,
};
pub use manifest::{Manifest, ManifestError};
