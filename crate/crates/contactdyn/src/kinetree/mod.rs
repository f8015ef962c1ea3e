//! Floating-base articulated rigid-body model.
//!
//! A [`RigidBodyTree`] is a tree of links connected by joints, rooted at a
//! 6-DOF floating base (the pelvis for the biped presets). Generalized
//! coordinates are laid out as
//!
//! ```text
//! q = [x, y, z, yaw, pitch, roll, joint_0, ..., joint_{n-1}]
//! ```
//!
//! with the base orientation as ZYX Euler angles: the rotation is
//! `Rz(yaw) · Ry(pitch) · Rx(roll)`. Velocities and accelerations are plain
//! time-derivatives of these coordinates (Euler-angle rates, not body rates).
//! The parametrization is singular at `|pitch| = π/2`; states inside a guard
//! band around the singularity are rejected.
//!
//! All quantities produced by this module (poses, Jacobians, the joint-space
//! inertia matrix, bias forces) are expressed in the world frame.

mod algo;
mod model_file;
pub mod presets;

pub use algo::{point_jacobian_from_pass, selection_matrix, world_point, KinematicsPass};
pub use model_file::{load_model_file, model_to_string, parse_model, save_model_file, ModelFileError};
pub use presets::{planar5, surena_lower, SurenaDims, SURENA_JOINT_NAMES};

use nalgebra::{DVector, Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};
use thiserror::Error;

/// Guard band half-width around the Euler pitch singularity.
pub const PITCH_GUARD: f64 = 1e-3;

/// Index of a link within its tree.
pub type LinkId = usize;

/// Identifies one of the two feet of a biped tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FootId {
    Left,
    Right,
}

impl FootId {
    pub fn other(self) -> FootId {
        match self {
            FootId::Left => FootId::Right,
            FootId::Right => FootId::Left,
        }
    }
}

impl std::fmt::Display for FootId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FootId::Left => write!(f, "left"),
            FootId::Right => write!(f, "right"),
        }
    }
}

/// Mass properties of one link. The inertia tensor is taken about the COM,
/// expressed in the link frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub name: String,
    pub mass: f64,
    pub com_offset: Vector3<f64>,
    pub inertia: Matrix3<f64>,
}

/// Joint kind: the single floating base or a revolute joint about `axis`
/// (unit vector in the joint frame).
#[derive(Debug, Clone, PartialEq)]
pub enum JointKind {
    FloatingBase,
    Revolute { axis: Vector3<f64> },
}

/// A joint connecting `parent` to `child`. `origin` is the pose of the joint
/// frame in the parent frame; the child frame coincides with the joint frame
/// at zero displacement. The floating base has `parent == None` (world).
#[derive(Debug, Clone, PartialEq)]
pub struct Joint {
    pub name: String,
    pub parent: Option<LinkId>,
    pub child: LinkId,
    pub kind: JointKind,
    pub origin: Isometry3<f64>,
}

/// Sole geometry of one foot: contact corner points and the reference point
/// (the ankle projected onto the sole plane), all in the foot link frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FootGeometry {
    pub link: LinkId,
    /// Height of the sole plane in the foot link frame (z coordinate).
    pub sole_z: f64,
    /// Contact corner points on the sole plane, link frame.
    pub corners: Vec<Vector3<f64>>,
    /// Foot reference point on the sole plane, link frame.
    pub reference: Vector3<f64>,
}

/// Kinematic tree of links and joints with a 6-DOF floating base.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidBodyTree {
    links: Vec<Link>,
    joints: Vec<Joint>,
    gravity: Vector3<f64>,
    /// Joint index whose child is each link; links are stored topologically
    /// (parents before children) which `validate` enforces.
    parent_joint: Vec<usize>,
    feet: Option<[FootGeometry; 2]>,
    name: String,
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("link `{0}`: mass must be positive, got {1}")]
    NonPositiveMass(String, f64),
    #[error("link `{0}`: inertia matrix is not symmetric positive definite")]
    NonSpdInertia(String),
    #[error("link `{0}` has {1} parent joints; the joint graph must be a tree")]
    NotATree(String, usize),
    #[error("expected exactly one floating-base joint at the root, found {0}")]
    FloatingBaseCount(usize),
    #[error("the floating-base joint must attach the root link to the world")]
    FloatingBaseNotRoot,
    #[error("joint `{0}`: revolute axis must be a unit vector")]
    NonUnitAxis(String),
    #[error("joint `{0}` references unknown link index {1}")]
    UnknownLink(String, usize),
    #[error("state dimension {found} does not match model dimension {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown link `{0}`")]
    UnknownLinkName(String),
    #[error("base pitch {0} rad is inside the Euler singularity guard band")]
    PitchSingularity(f64),
    #[error("model has no foot geometry defined")]
    NoFeet,
}

impl RigidBodyTree {
    /// Build and validate a tree from raw parts. Links must be listed with
    /// parents before children; the first joint must be the floating base.
    pub fn new(
        name: impl Into<String>,
        links: Vec<Link>,
        joints: Vec<Joint>,
        gravity: Vector3<f64>,
        feet: Option<[FootGeometry; 2]>,
    ) -> Result<Self, ModelError> {
        let mut parent_count = vec![0usize; links.len()];
        let mut parent_joint = vec![usize::MAX; links.len()];
        let mut floating = 0usize;

        for (ji, j) in joints.iter().enumerate() {
            if j.child >= links.len() {
                return Err(ModelError::UnknownLink(j.name.clone(), j.child));
            }
            if let Some(p) = j.parent {
                if p >= links.len() {
                    return Err(ModelError::UnknownLink(j.name.clone(), p));
                }
                // Topological storage: a child must appear after its parent.
                if p >= j.child {
                    return Err(ModelError::NotATree(links[j.child].name.clone(), 2));
                }
            }
            parent_count[j.child] += 1;
            parent_joint[j.child] = ji;
            match &j.kind {
                JointKind::FloatingBase => {
                    floating += 1;
                    if j.parent.is_some() || j.child != 0 {
                        return Err(ModelError::FloatingBaseNotRoot);
                    }
                }
                JointKind::Revolute { axis } => {
                    if (axis.norm() - 1.0).abs() > 1e-9 {
                        return Err(ModelError::NonUnitAxis(j.name.clone()));
                    }
                    if j.parent.is_none() {
                        return Err(ModelError::FloatingBaseNotRoot);
                    }
                }
            }
        }
        if floating != 1 {
            return Err(ModelError::FloatingBaseCount(floating));
        }
        for (li, link) in links.iter().enumerate() {
            if parent_count[li] != 1 {
                return Err(ModelError::NotATree(link.name.clone(), parent_count[li]));
            }
            if link.mass <= 0.0 {
                return Err(ModelError::NonPositiveMass(link.name.clone(), link.mass));
            }
            if !is_spd(&link.inertia) {
                return Err(ModelError::NonSpdInertia(link.name.clone()));
            }
        }
        Ok(RigidBodyTree {
            links,
            joints,
            gravity,
            parent_joint,
            feet,
            name: name.into(),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn joints(&self) -> &[Joint] {
        &self.joints
    }

    pub fn gravity(&self) -> Vector3<f64> {
        self.gravity
    }

    /// Number of actuated (revolute) joints.
    pub fn n_actuated(&self) -> usize {
        self.joints
            .iter()
            .filter(|j| matches!(j.kind, JointKind::Revolute { .. }))
            .count()
    }

    /// Total generalized-coordinate dimension, `6 + n_actuated`.
    pub fn n_coords(&self) -> usize {
        6 + self.n_actuated()
    }

    pub fn total_mass(&self) -> f64 {
        self.links.iter().map(|l| l.mass).sum()
    }

    pub fn link_id(&self, name: &str) -> Result<LinkId, ModelError> {
        self.links
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelError::UnknownLinkName(name.to_string()))
    }

    pub fn parent_joint_of(&self, link: LinkId) -> &Joint {
        &self.joints[self.parent_joint[link]]
    }

    pub fn foot(&self, id: FootId) -> Result<&FootGeometry, ModelError> {
        let feet = self.feet.as_ref().ok_or(ModelError::NoFeet)?;
        Ok(match id {
            FootId::Left => &feet[0],
            FootId::Right => &feet[1],
        })
    }

    pub fn has_feet(&self) -> bool {
        self.feet.is_some()
    }

    /// Index into `q` of the generalized coordinate driving actuated joint
    /// `k` (k counts revolute joints in storage order).
    pub fn actuated_coord(&self, k: usize) -> usize {
        6 + k
    }

    /// Names of the actuated joints in coordinate order.
    pub fn actuated_joint_names(&self) -> Vec<&str> {
        self.joints
            .iter()
            .filter(|j| matches!(j.kind, JointKind::Revolute { .. }))
            .map(|j| j.name.as_str())
            .collect()
    }

    pub fn check_dims(&self, v: &DVector<f64>) -> Result<(), ModelError> {
        if v.len() != self.n_coords() {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_coords(),
                found: v.len(),
            });
        }
        Ok(())
    }
}

/// Pose of the floating base described by the first six coordinates.
pub fn base_pose(q: &DVector<f64>) -> Isometry3<f64> {
    let rot = UnitQuaternion::from_euler_angles(q[5], q[4], q[3]);
    Isometry3::from_parts(Translation3::new(q[0], q[1], q[2]), rot)
}

/// Full state of the multibody: positions, velocities, accelerations, time.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedState {
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub t: f64,
}

impl GeneralizedState {
    pub fn new(
        q: DVector<f64>,
        qd: DVector<f64>,
        qdd: DVector<f64>,
        t: f64,
    ) -> Result<Self, ModelError> {
        let n = q.len();
        for v in [&qd, &qdd] {
            if v.len() != n {
                return Err(ModelError::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
        }
        let state = GeneralizedState { q, qd, qdd, t };
        state.check_pitch()?;
        Ok(state)
    }

    /// Zero state of the given coordinate dimension.
    pub fn zeros(n_coords: usize) -> Self {
        GeneralizedState {
            q: DVector::zeros(n_coords),
            qd: DVector::zeros(n_coords),
            qdd: DVector::zeros(n_coords),
            t: 0.0,
        }
    }

    pub fn check_pitch(&self) -> Result<(), ModelError> {
        let pitch = self.q[4];
        if pitch.abs() >= std::f64::consts::FRAC_PI_2 - PITCH_GUARD {
            return Err(ModelError::PitchSingularity(pitch));
        }
        Ok(())
    }
}

fn is_spd(m: &Matrix3<f64>) -> bool {
    let sym = (m - m.transpose()).norm() <= 1e-9 * m.norm().max(1.0);
    sym && m.clone_owned().cholesky().is_some()
}
