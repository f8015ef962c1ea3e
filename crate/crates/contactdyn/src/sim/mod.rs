//! Forward-dynamics simulation with compliant penalty contacts.
//!
//! The integrator is fixed-step semi-implicit Euler (velocity update first,
//! then position), the standard robust choice for stiff penalty contact.
//! Contact penetrations are recomputed from the foot corner kinematics at
//! every step. For the tangent-barrier normal law a step that would push a
//! contact point past the barrier depth is rejected and retried at half the
//! step size (recursively, bounded), which keeps the barrier inviolable
//! without changing the output sample grid.

mod ball;
mod block;
mod walk;

pub use ball::{run_ball_drop, BallDropSummary, BallDropTrace, BallScenario};
pub use block::{run_sliding_block, SlidingBlockTrace};
pub use walk::{variance_2d, 
    run_walk, ControllerConfig, PdGains, SimTrace, WalkResult, WalkScenario, WalkSummary,
};

use nalgebra::DVector;
use thiserror::Error;

use crate::contact_models::{ContactError, NormalModel, StiffnessProfile};
use crate::kinetree::{KinematicsPass, LinkId, ModelError, RigidBodyTree};
use crate::rigid_contact::ContactWrench;
use crate::spatial::SpatialForce;

/// Stability factor: the step must resolve the stiffest expected contact
/// oscillation with ω·dt below this margin.
pub const STABILITY_MARGIN: f64 = 0.2;

/// Barrier guard: a step is rejected when a penetration reaches this
/// fraction of the barrier depth.
pub const BARRIER_GUARD_FRACTION: f64 = 1.0 - 1e-6;

/// Maximum number of recursive step halvings before giving up.
pub const MAX_STEP_HALVINGS: u32 = 10;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("time step {dt:.3e} s exceeds the stability limit {dt_max:.3e} s for this contact stiffness (ω·dt ≤ {STABILITY_MARGIN})")]
    UnstableDt { dt: f64, dt_max: f64 },
    #[error("state became non-finite at t = {0:.6} s")]
    NonFinite(f64),
    #[error("step size collapsed below dt/2^{MAX_STEP_HALVINGS} at t = {0:.6} s")]
    StepCollapse(f64),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("scenario: {0}")]
    Config(String),
}

/// Largest stable step for a normal model acting on `n_points` contact
/// points sharing `total_mass`. The reference stiffness is the local slope
/// of the law deep into its working range (90 % of the barrier depth for the
/// tangent-barrier law, the linear stiffness otherwise).
pub fn max_stable_dt(model: &NormalModel, total_mass: f64, n_points: usize) -> f64 {
    let k_ref = match model {
        NormalModel::TanBarrier { k_z, l_0, .. } => {
            let x = std::f64::consts::FRAC_PI_2 * 0.9;
            k_z * std::f64::consts::FRAC_PI_2 / l_0 / x.cos().powi(2)
        }
        NormalModel::Linear { k_z, .. }
        | NormalModel::WojtyraDamping { k_z, .. }
        | NormalModel::McLean { k_z, .. }
        | NormalModel::Jackson { k_z, .. }
        | NormalModel::Millard { k_z, .. } => *k_z,
        NormalModel::ParkKwon { stiffness, .. } => match stiffness {
            StiffnessProfile::Constant(k) => *k,
            StiffnessProfile::Custom(f) => f(1e-3),
        },
    };
    let m_ref = total_mass / n_points.max(1) as f64;
    STABILITY_MARGIN / (k_ref / m_ref).sqrt()
}

/// Generalized forces equivalent to a world-frame wrench acting on `link`.
pub fn generalized_force_of_wrench(
    tree: &RigidBodyTree,
    pass: &KinematicsPass,
    link: LinkId,
    wrench: &ContactWrench,
) -> DVector<f64> {
    let n = tree.n_coords();
    let mut q_gen = DVector::zeros(n);
    let f = SpatialForce::at_point(&wrench.point, &wrench.force, &wrench.moment);
    let mut cur = (0..n).rev().find(|&k| pass.coord_link[k] == link);
    while let Some(k) = cur {
        q_gen[k] = pass.subspace[k].dot(&f);
        cur = pass.coord_parent[k];
    }
    q_gen
}

/// Forward dynamics under actuated torques and external contact wrenches:
/// `q̈ = M⁻¹ (B τ + Σ Jᵀ F − V − G)`.
pub fn forward_dynamics(
    tree: &RigidBodyTree,
    q: &DVector<f64>,
    qd: &DVector<f64>,
    tau_actuated: &DVector<f64>,
    contacts: &[(LinkId, ContactWrench)],
) -> Result<DVector<f64>, SimError> {
    let n = tree.n_actuated();
    let mut q_gen = DVector::zeros(tree.n_coords());
    for k in 0..n {
        q_gen[6 + k] = tau_actuated[k];
    }
    if !contacts.is_empty() {
        let pass = KinematicsPass::positions(tree, q)?;
        for (link, wrench) in contacts {
            q_gen += generalized_force_of_wrench(tree, &pass, *link, wrench);
        }
    }
    Ok(tree.accel_from_forces(q, qd, &q_gen)?)
}
