//! Contact dynamics for legged robots.
//!
//! This crate models a floating-base biped two complementary ways and lets
//! you cross-check them:
//!
//! * **Rigid contact** — the stance feet are holonomic constraints; joint
//!   torques and interaction wrenches come from constrained inverse dynamics
//!   (a unique square solve in single support, the minimum-norm
//!   pseudo-inverse solution in double support). See [`rigid_contact`].
//! * **Compliant contact** — a catalog of unilateral penalty force laws in
//!   the normal direction plus regularized friction models, driving a
//!   forward simulation with a fixed-step semi-implicit Euler integrator.
//!   See [`contact_models`] and [`sim`].
//!
//! On top of that, [`ident`] fits a joint drive-system model
//! (inertia, viscous and Coulomb friction) from logged trajectories by
//! linear least squares and scores cross-experiment consistency.
//!
//! The `examples/` directory exercises every major capability; the
//! `contactdyn` binary exposes the same pipelines as subcommands
//! (`ball-drop`, `invdyn`, `walk`, `identify`, `compare`).

pub mod contact_models;
pub mod gait;
pub mod ident;
pub mod io;
pub mod kinetree;
pub mod rigid_contact;
pub mod sim;
pub mod spatial;

pub mod cli;

pub use kinetree::{FootId, GeneralizedState, RigidBodyTree};
