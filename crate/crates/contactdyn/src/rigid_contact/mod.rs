//! Rigid-contact constrained inverse dynamics.
//!
//! With a stance foot treated as a holonomic constraint (its pose held
//! constant), the interaction is replaced by an unknown 6-component wrench at
//! the foot reference point. In single support the combined torque/wrench
//! system is square and has a unique solution; in double support it is
//! under-determined and the shipped solution is the Moore–Penrose one, which
//! minimizes the joint torques and interaction wrenches in the quadratic
//! norm. Feasibility of a solution (unilateral normal forces, friction cone,
//! ZMP inside the support polygon) is scored by [`feasibility_check`].

mod polygon;

pub use polygon::SupportPolygon;

use nalgebra::{DMatrix, DVector, Point2, Vector3};
use thiserror::Error;

use crate::kinetree::{
    FootId, GeneralizedState, KinematicsPass, ModelError, RigidBodyTree,
};
use crate::kinetree::selection_matrix;

/// Minimum total normal load for the ZMP to be defined (N).
pub const ZMP_MIN_NORMAL: f64 = 1.0;

/// Condition-number limit for the square single-support solve.
pub const SSP_MAX_CONDITION: f64 = 1e8;

/// Relative singular-value truncation for pseudo-inverses.
pub const PINV_RELATIVE_TOL: f64 = 1e-10;

/// Interaction force and moment acting at a contact reference point,
/// expressed in the world frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContactWrench {
    pub force: Vector3<f64>,
    pub moment: Vector3<f64>,
    /// World point at which the wrench is expressed.
    pub point: Vector3<f64>,
}

impl ContactWrench {
    pub fn zero_at(point: Vector3<f64>) -> Self {
        ContactWrench {
            force: Vector3::zeros(),
            moment: Vector3::zeros(),
            point,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.force.iter().all(|v| v.is_finite())
            && self.moment.iter().all(|v| v.is_finite())
            && self.point.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("single-support system is ill-conditioned (condition number {0:.3e})")]
    IllConditioned(f64),
    #[error("double-support system is rank deficient: rank {rank} of {rows} rows")]
    RankDeficient { rank: usize, rows: usize },
    #[error("total normal load {0:.3} N is below {ZMP_MIN_NORMAL} N; ZMP undefined (airborne)")]
    UndefinedZmp(f64),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Unique single-support solution: joint torques and the stance-foot wrench.
#[derive(Debug, Clone)]
pub struct SspSolution {
    pub tau: DVector<f64>,
    pub wrench: ContactWrench,
    /// ‖B τ + Jᵀ F − (M q̈ + V + G)‖∞ of the returned solution.
    pub residual: f64,
    pub condition_number: f64,
}

/// Minimum-norm double-support solution.
#[derive(Debug, Clone)]
pub struct DspSolution {
    pub tau: DVector<f64>,
    pub left: ContactWrench,
    pub right: ContactWrench,
    /// ‖C x − D‖∞ of the returned solution.
    pub residual: f64,
    /// ‖(I − C⁺C) x‖∞ — zero iff x lies in the row space of C, which
    /// certifies minimality of ‖x‖₂ among all solutions.
    pub min_norm_certificate: f64,
}

/// Truncated-SVD pseudo-inverse with tolerance relative to the largest
/// singular value. Also reports the numerical rank.
fn pseudo_inverse(a: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("svd with u");
    let v_t = svd.v_t.as_ref().expect("svd with v_t");
    let smax = svd.singular_values.max();
    let tol = PINV_RELATIVE_TOL * smax;
    let mut rank = 0;
    let mut sigma_inv = DVector::zeros(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            sigma_inv[i] = 1.0 / s;
            rank += 1;
        }
    }
    let pinv = v_t.transpose() * DMatrix::from_diagonal(&sigma_inv) * u.transpose();
    (pinv, rank)
}

fn condition_number(a: &DMatrix<f64>) -> f64 {
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 {
        f64::INFINITY
    } else {
        smax / smin
    }
}

/// Foot reference-point Jacobian and world reference position.
fn foot_jacobian(
    tree: &RigidBodyTree,
    pass: &KinematicsPass,
    foot: FootId,
) -> Result<(DMatrix<f64>, Vector3<f64>), SolveError> {
    let geom = tree.foot(foot).map_err(SolveError::Model)?;
    let jac = crate::kinetree::point_jacobian_from_pass(tree, pass, geom.link, &geom.reference);
    let point = crate::kinetree::world_point(pass, geom.link, &geom.reference);
    Ok((jac, point))
}

/// Single-support constrained inverse dynamics (unique solution).
///
/// Solves `[B Jᵀ]·[τ; F] = M q̈ + V + G` for the stance foot's wrench and the
/// joint torques. Errors out when the square system's condition number
/// exceeds [`SSP_MAX_CONDITION`].
pub fn ssp_inverse_dynamics(
    tree: &RigidBodyTree,
    state: &GeneralizedState,
    stance: FootId,
) -> Result<SspSolution, SolveError> {
    state.check_pitch().map_err(SolveError::Model)?;
    let n = tree.n_actuated();
    let nc = tree.n_coords();
    let pass = KinematicsPass::positions(tree, &state.q).map_err(SolveError::Model)?;
    let (jac, point) = foot_jacobian(tree, &pass, stance)?;
    let d = tree
        .inverse_dynamics_free(&state.q, &state.qd, &state.qdd)
        .map_err(SolveError::Model)?;

    let mut a = DMatrix::zeros(nc, nc);
    a.view_mut((0, 0), (nc, n)).copy_from(&selection_matrix(n));
    a.view_mut((0, n), (nc, 6)).copy_from(&jac.transpose());

    let cond = condition_number(&a);
    if !cond.is_finite() || cond >= SSP_MAX_CONDITION {
        return Err(SolveError::IllConditioned(cond));
    }
    let lu = a.clone().lu();
    let x = lu.solve(&d).ok_or(SolveError::IllConditioned(cond))?;
    let residual = (&a * &x - &d).abs().max();

    let tau = x.rows(0, n).clone_owned();
    let wrench = ContactWrench {
        force: Vector3::new(x[n], x[n + 1], x[n + 2]),
        moment: Vector3::new(x[n + 3], x[n + 4], x[n + 5]),
        point,
    };
    Ok(SspSolution {
        tau,
        wrench,
        residual,
        condition_number: cond,
    })
}

/// Double-support constrained inverse dynamics, minimum-norm solution
/// (`x = C⁺ D` with `C = [B J_lfᵀ J_rfᵀ]`).
pub fn dsp_inverse_dynamics(
    tree: &RigidBodyTree,
    state: &GeneralizedState,
) -> Result<DspSolution, SolveError> {
    dsp_inverse_dynamics_with_offset(tree, state, None)
}

/// The full double-support solution family `x = C⁺D + (I − C⁺C)k` for an
/// arbitrary vector `k`. `k = None` gives the shipped minimum-norm solution.
pub fn dsp_inverse_dynamics_with_offset(
    tree: &RigidBodyTree,
    state: &GeneralizedState,
    k: Option<&DVector<f64>>,
) -> Result<DspSolution, SolveError> {
    state.check_pitch().map_err(SolveError::Model)?;
    let n = tree.n_actuated();
    let nc = tree.n_coords();
    let pass = KinematicsPass::positions(tree, &state.q).map_err(SolveError::Model)?;
    let (j_lf, p_lf) = foot_jacobian(tree, &pass, FootId::Left)?;
    let (j_rf, p_rf) = foot_jacobian(tree, &pass, FootId::Right)?;
    let d = tree
        .inverse_dynamics_free(&state.q, &state.qd, &state.qdd)
        .map_err(SolveError::Model)?;

    let cols = n + 12;
    let mut c = DMatrix::zeros(nc, cols);
    c.view_mut((0, 0), (nc, n)).copy_from(&selection_matrix(n));
    c.view_mut((0, n), (nc, 6)).copy_from(&j_lf.transpose());
    c.view_mut((0, n + 6), (nc, 6)).copy_from(&j_rf.transpose());

    let (c_pinv, rank) = pseudo_inverse(&c);
    if rank < nc {
        return Err(SolveError::RankDeficient { rank, rows: nc });
    }
    let mut x = &c_pinv * &d;
    if let Some(k) = k {
        x += k - &c_pinv * (&c * k);
    }
    let residual = (&c * &x - &d).abs().max();
    let certificate = (&x - &c_pinv * (&c * &x)).abs().max();

    let wrench_at = |x: &DVector<f64>, off: usize, point: Vector3<f64>| ContactWrench {
        force: Vector3::new(x[off], x[off + 1], x[off + 2]),
        moment: Vector3::new(x[off + 3], x[off + 4], x[off + 5]),
        point,
    };
    Ok(DspSolution {
        tau: x.rows(0, n).clone_owned(),
        left: wrench_at(&x, n, p_lf),
        right: wrench_at(&x, n + 6, p_rf),
        residual,
        min_norm_certificate: certificate,
    })
}

/// Ground point at height `sole_height` where the horizontal moment of the
/// total contact wrench vanishes.
pub fn zmp_from_wrenches(
    wrenches: &[ContactWrench],
    sole_height: f64,
) -> Result<Point2<f64>, SolveError> {
    let mut force = Vector3::zeros();
    let mut moment_o = Vector3::zeros();
    for w in wrenches {
        force += w.force;
        moment_o += w.moment + w.point.cross(&w.force);
    }
    if force.z <= ZMP_MIN_NORMAL {
        return Err(SolveError::UndefinedZmp(force.z));
    }
    let x = (sole_height * force.x - moment_o.y) / force.z;
    let y = (moment_o.x + sole_height * force.y) / force.z;
    Ok(Point2::new(x, y))
}

/// Report-style feasibility assessment of a set of contact wrenches.
#[derive(Debug, Clone)]
pub struct FeasibilityReport {
    /// Every wrench has a non-negative normal force.
    pub unilateral: bool,
    /// Every wrench satisfies ‖F_t‖ ≤ μ·F_z.
    pub friction: bool,
    /// The ZMP lies strictly inside the support polygon.
    pub zmp_inside: bool,
    /// min over wrenches of F_z.
    pub min_normal: f64,
    /// Per-wrench friction margin μ·F_z − ‖F_t‖.
    pub friction_margins: Vec<f64>,
    /// Signed distance of the ZMP to the polygon boundary (positive inside);
    /// `None` when the ZMP is undefined (airborne).
    pub zmp_margin: Option<f64>,
    pub zmp: Option<Point2<f64>>,
}

impl FeasibilityReport {
    pub fn all_ok(&self) -> bool {
        self.unilateral && self.friction && self.zmp_inside
    }
}

/// Check unilaterality, the friction cone and ZMP containment for a set of
/// contact wrenches against an available friction coefficient.
pub fn feasibility_check(
    wrenches: &[ContactWrench],
    polygon: &SupportPolygon,
    mu_available: f64,
) -> FeasibilityReport {
    let unilateral = wrenches.iter().all(|w| w.force.z >= 0.0);
    let min_normal = wrenches
        .iter()
        .map(|w| w.force.z)
        .fold(f64::INFINITY, f64::min);
    let friction_margins: Vec<f64> = wrenches
        .iter()
        .map(|w| mu_available * w.force.z - w.force.xy().norm())
        .collect();
    let friction = friction_margins.iter().all(|&m| m >= 0.0);
    let (zmp, zmp_margin, zmp_inside) = match zmp_from_wrenches(wrenches, polygon.height()) {
        Ok(p) => {
            let margin = polygon.signed_margin(&p);
            (Some(p), Some(margin), margin > 0.0)
        }
        Err(_) => (None, None, false),
    };
    FeasibilityReport {
        unilateral,
        friction,
        zmp_inside,
        min_normal,
        friction_margins,
        zmp_margin,
        zmp,
    }
}

/// Support polygon of the given stance feet at configuration `q`: the convex
/// hull of the world-projected foot corners.
pub fn support_polygon(
    tree: &RigidBodyTree,
    q: &DVector<f64>,
    feet: &[FootId],
) -> Result<SupportPolygon, SolveError> {
    let pass = KinematicsPass::positions(tree, q).map_err(SolveError::Model)?;
    let mut pts = Vec::new();
    let mut height = 0.0;
    for &f in feet {
        let geom = tree.foot(f).map_err(SolveError::Model)?;
        for c in &geom.corners {
            let w = crate::kinetree::world_point(&pass, geom.link, c);
            pts.push(Point2::new(w.x, w.y));
            height += w.z;
        }
    }
    let height = height / pts.len() as f64;
    SupportPolygon::from_points(&pts, height).map_err(|_| SolveError::RankDeficient {
        rank: 0,
        rows: pts.len(),
    })
}

/// Residual of the global Newton–Euler balance: total contact force minus
/// `m_total (a_com − g)`. Near zero for any dynamically consistent solution.
pub fn momentum_balance_residual(
    tree: &RigidBodyTree,
    state: &GeneralizedState,
    wrenches: &[ContactWrench],
) -> Result<Vector3<f64>, SolveError> {
    let a_com = tree
        .com_acceleration(&state.q, &state.qd, &state.qdd)
        .map_err(SolveError::Model)?;
    let total: Vector3<f64> = wrenches.iter().map(|w| w.force).sum();
    Ok(total - tree.total_mass() * (a_com - tree.gravity()))
}
