//! Kinematics and dynamics algorithms on a [`RigidBodyTree`].
//!
//! The floating base is handled as a chain of six elementary displacements
//! (three world-frame translations, then rotations about z, y', x'' — the ZYX
//! Euler sequence), so every generalized coordinate drives a one-DOF motion
//! subspace column and the standard world-frame recursions apply uniformly.

use nalgebra::{DMatrix, DVector, Isometry3, Vector3};

use super::{GeneralizedState, JointKind, LinkId, ModelError, RigidBodyTree};
use crate::spatial::{SpatialForce, SpatialInertia, SpatialMotion};

/// Positions, motion-subspace columns and (optionally) velocities and
/// accelerations of every link, computed in one sweep from the state.
pub struct KinematicsPass {
    /// World pose of every link frame.
    pub link_pose: Vec<Isometry3<f64>>,
    /// Per-coordinate motion subspace column, world Plücker coordinates.
    pub subspace: Vec<SpatialMotion>,
    /// Link each generalized coordinate belongs to.
    pub coord_link: Vec<LinkId>,
    /// Previous coordinate on the path to the root (itself for coord 0).
    pub coord_parent: Vec<Option<usize>>,
    /// Spatial velocity per link (world frame); zero when qd not supplied.
    pub vel: Vec<SpatialMotion>,
    /// Spatial acceleration per link; only filled by the dynamics entry
    /// points (includes the gravity offset there).
    acc: Vec<SpatialMotion>,
}

struct JointDof {
    subspace: SpatialMotion,
}

/// Expand one joint into its per-coordinate motion subspace columns, given
/// the world pose of the joint frame before joint motion. Also returns the
/// world pose of the child link frame.
fn expand_joint(
    kind: &JointKind,
    joint_base: &Isometry3<f64>,
    q: &[f64],
    dofs: &mut Vec<JointDof>,
) -> Isometry3<f64> {
    match kind {
        JointKind::Revolute { axis } => {
            let s = joint_base.rotation * axis;
            let w = joint_base.translation.vector;
            dofs.push(JointDof {
                subspace: SpatialMotion::new(s, w.cross(&s)),
            });
            joint_base * Isometry3::rotation(axis * q[0])
        }
        JointKind::FloatingBase => {
            // Translations along the joint-frame axes.
            for k in 0..3 {
                let d = joint_base.rotation * Vector3::ith(k, 1.0);
                dofs.push(JointDof {
                    subspace: SpatialMotion::new(Vector3::zeros(), d),
                });
            }
            let mut pose = joint_base * Isometry3::translation(q[0], q[1], q[2]);
            let w = pose.translation.vector;
            // ZYX Euler rotations about the successively rotated axes, all
            // passing through the displaced base origin.
            let axes = [Vector3::z(), Vector3::y(), Vector3::x()];
            for (k, axis) in axes.iter().enumerate() {
                let s = pose.rotation * axis;
                dofs.push(JointDof {
                    subspace: SpatialMotion::new(s, w.cross(&s)),
                });
                pose *= Isometry3::rotation(axis * q[3 + k]);
            }
            pose
        }
    }
}

impl KinematicsPass {
    /// Position-level pass: poses and motion subspace columns.
    pub fn positions(tree: &RigidBodyTree, q: &DVector<f64>) -> Result<Self, ModelError> {
        Self::build(tree, q, None)
    }

    /// Position + velocity pass.
    pub fn with_velocity(
        tree: &RigidBodyTree,
        q: &DVector<f64>,
        qd: &DVector<f64>,
    ) -> Result<Self, ModelError> {
        tree.check_dims(qd)?;
        Self::build(tree, q, Some(qd))
    }

    fn build(
        tree: &RigidBodyTree,
        q: &DVector<f64>,
        qd: Option<&DVector<f64>>,
    ) -> Result<Self, ModelError> {
        tree.check_dims(q)?;
        let n_links = tree.links().len();
        let n = tree.n_coords();
        let mut pass = KinematicsPass {
            link_pose: vec![Isometry3::identity(); n_links],
            subspace: Vec::with_capacity(n),
            coord_link: Vec::with_capacity(n),
            coord_parent: Vec::with_capacity(n),
            vel: vec![SpatialMotion::ZERO; n_links],
            acc: vec![SpatialMotion::ZERO; n_links],
        };
        // Last coordinate index seen on the path to each link.
        let mut link_last_coord: Vec<Option<usize>> = vec![None; n_links];
        let mut coord = 0usize;
        let mut dofs = Vec::with_capacity(6);

        for joint in tree.joints() {
            let (parent_pose, parent_vel, parent_coord) = match joint.parent {
                Some(p) => (pass.link_pose[p], pass.vel[p], link_last_coord[p]),
                None => (Isometry3::identity(), SpatialMotion::ZERO, None),
            };
            let joint_base = parent_pose * joint.origin;
            let ndof = match joint.kind {
                JointKind::FloatingBase => 6,
                JointKind::Revolute { .. } => 1,
            };
            dofs.clear();
            let child_pose = expand_joint(&joint.kind, &joint_base, &q.as_slice()[coord..coord + ndof], &mut dofs);

            let mut v = parent_vel;
            let mut prev = parent_coord;
            for (k, dof) in dofs.iter().enumerate() {
                let idx = coord + k;
                if let Some(qd) = qd {
                    v = v + dof.subspace.scale(qd[idx]);
                }
                pass.subspace.push(dof.subspace);
                pass.coord_link.push(joint.child);
                pass.coord_parent.push(prev);
                prev = Some(idx);
            }
            pass.link_pose[joint.child] = child_pose;
            pass.vel[joint.child] = v;
            link_last_coord[joint.child] = prev;
            coord += ndof;
        }
        debug_assert_eq!(coord, n);
        Ok(pass)
    }

    /// Spatial inertia of link `l` about the world origin at this pose.
    fn link_inertia(&self, tree: &RigidBodyTree, l: LinkId) -> SpatialInertia {
        let link = &tree.links()[l];
        let pose = &self.link_pose[l];
        let com_world = pose * nalgebra::Point3::from(link.com_offset);
        let r = pose.rotation.to_rotation_matrix();
        let i_world = r.matrix() * link.inertia * r.matrix().transpose();
        SpatialInertia::from_com(link.mass, &com_world.coords, &i_world)
    }

    /// Propagate spatial accelerations given qd and qdd; `a0` seeds the world
    /// acceleration (used for the gravity offset trick).
    fn propagate_acc(
        &mut self,
        tree: &RigidBodyTree,
        qd: &DVector<f64>,
        qdd: &DVector<f64>,
        a0: SpatialMotion,
    ) {
        let mut coord = 0usize;
        for joint in tree.joints() {
            let (mut v, mut a) = match joint.parent {
                Some(p) => (self.vel[p], self.acc[p]),
                None => (SpatialMotion::ZERO, a0),
            };
            let ndof = match joint.kind {
                JointKind::FloatingBase => 6,
                JointKind::Revolute { .. } => 1,
            };
            for k in coord..coord + ndof {
                let s = self.subspace[k];
                let vj = s.scale(qd[k]);
                v = v + vj;
                a = a + s.scale(qdd[k]) + v.cross_motion(&vj);
            }
            self.acc[joint.child] = a;
            coord += ndof;
        }
    }

    /// World-frame spatial acceleration of a link (gravity offset removed),
    /// valid after a dynamics entry point ran on this pass.
    pub fn link_acceleration(&self, l: LinkId, gravity: &Vector3<f64>) -> SpatialMotion {
        self.acc[l] + SpatialMotion::new(Vector3::zeros(), *gravity)
    }

    /// Conventional acceleration of the body point of link `l` currently at
    /// world position `p` (gravity offset removed).
    pub fn point_acceleration(
        &self,
        l: LinkId,
        p: &Vector3<f64>,
        gravity: &Vector3<f64>,
    ) -> Vector3<f64> {
        let a = self.link_acceleration(l, gravity);
        let v = self.vel[l];
        a.lin + a.ang.cross(p) + v.ang.cross(&(v.lin + v.ang.cross(p)))
    }
}

impl RigidBodyTree {
    /// World pose of every link frame at configuration `q`.
    pub fn forward_kinematics(&self, q: &DVector<f64>) -> Result<Vec<Isometry3<f64>>, ModelError> {
        Ok(KinematicsPass::positions(self, q)?.link_pose)
    }

    /// Geometric Jacobian of a point attached to `link` (point in link frame):
    /// a 6×(6+n) matrix with rows ordered (linear; angular) such that
    /// `J · q̇ = (v_point; ω_link)` in world coordinates.
    pub fn point_jacobian(
        &self,
        q: &DVector<f64>,
        link: LinkId,
        point: &Vector3<f64>,
    ) -> Result<DMatrix<f64>, ModelError> {
        if link >= self.links().len() {
            return Err(ModelError::UnknownLink("point_jacobian".into(), link));
        }
        let pass = KinematicsPass::positions(self, q)?;
        Ok(point_jacobian_from_pass(self, &pass, link, point))
    }

    /// Joint-space inertia matrix M(q), symmetric positive definite.
    pub fn mass_matrix(&self, q: &DVector<f64>) -> Result<DMatrix<f64>, ModelError> {
        let pass = KinematicsPass::positions(self, q)?;
        let n = self.n_coords();
        // Composite inertia of each link's subtree, accumulated leaf-to-root.
        let mut composite: Vec<SpatialInertia> = (0..self.links().len())
            .map(|l| pass.link_inertia(self, l))
            .collect();
        for joint in self.joints().iter().rev() {
            if let Some(p) = joint.parent {
                let child = composite[joint.child];
                composite[p] = composite[p] + child;
            }
        }
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let f = composite[pass.coord_link[j]].apply(&pass.subspace[j]);
            m[(j, j)] = pass.subspace[j].dot(&f);
            let mut anc = pass.coord_parent[j];
            while let Some(i) = anc {
                let mij = pass.subspace[i].dot(&f);
                m[(i, j)] = mij;
                m[(j, i)] = mij;
                anc = pass.coord_parent[i];
            }
        }
        Ok(m)
    }

    /// Generalized force vector `M q̈ + V + G` for the supplied motion
    /// (recursive Newton–Euler). External forces are not included.
    pub fn inverse_dynamics_free(
        &self,
        q: &DVector<f64>,
        qd: &DVector<f64>,
        qdd: &DVector<f64>,
    ) -> Result<DVector<f64>, ModelError> {
        self.check_dims(qd)?;
        self.check_dims(qdd)?;
        let mut pass = KinematicsPass::with_velocity(self, q, qd)?;
        // Gravity enters as an opposite base acceleration.
        let a0 = SpatialMotion::new(Vector3::zeros(), -self.gravity());
        pass.propagate_acc(self, qd, qdd, a0);

        let mut net: Vec<SpatialForce> = (0..self.links().len())
            .map(|l| {
                let inertia = pass.link_inertia(self, l);
                inertia.apply(&pass.acc[l]) + pass.vel[l].cross_force(&inertia.apply(&pass.vel[l]))
            })
            .collect();
        for joint in self.joints().iter().rev() {
            if let Some(p) = joint.parent {
                let f = net[joint.child];
                net[p] = net[p] + f;
            }
        }
        let mut tau = DVector::zeros(self.n_coords());
        for k in 0..self.n_coords() {
            tau[k] = pass.subspace[k].dot(&net[pass.coord_link[k]]);
        }
        Ok(tau)
    }

    /// Velocity-product and gravity terms `V(q, q̇) + G(q)`.
    pub fn bias_forces(&self, q: &DVector<f64>, qd: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
        let zero = DVector::zeros(self.n_coords());
        self.inverse_dynamics_free(q, qd, &zero)
    }

    /// Gravity terms alone, `G(q)`.
    pub fn gravity_forces(&self, q: &DVector<f64>) -> Result<DVector<f64>, ModelError> {
        let zero = DVector::zeros(self.n_coords());
        self.inverse_dynamics_free(q, &zero, &zero)
    }

    /// World position of the whole-body center of mass.
    pub fn com(&self, q: &DVector<f64>) -> Result<Vector3<f64>, ModelError> {
        let pass = KinematicsPass::positions(self, q)?;
        Ok(com_from_pass(self, &pass))
    }

    /// Acceleration of the whole-body center of mass for the given motion.
    pub fn com_acceleration(
        &self,
        q: &DVector<f64>,
        qd: &DVector<f64>,
        qdd: &DVector<f64>,
    ) -> Result<Vector3<f64>, ModelError> {
        self.check_dims(qdd)?;
        let mut pass = KinematicsPass::with_velocity(self, q, qd)?;
        pass.propagate_acc(self, qd, qdd, SpatialMotion::ZERO);
        let g = Vector3::zeros();
        let mut acc = Vector3::zeros();
        for (l, link) in self.links().iter().enumerate() {
            let c = (pass.link_pose[l] * nalgebra::Point3::from(link.com_offset)).coords;
            acc += link.mass * pass.point_acceleration(l, &c, &g);
        }
        Ok(acc / self.total_mass())
    }

    /// Kinetic energy `½ q̇ᵀ M q̇` evaluated directly from link velocities.
    pub fn kinetic_energy(&self, q: &DVector<f64>, qd: &DVector<f64>) -> Result<f64, ModelError> {
        let pass = KinematicsPass::with_velocity(self, q, qd)?;
        let mut ke = 0.0;
        for l in 0..self.links().len() {
            let inertia = pass.link_inertia(self, l);
            ke += 0.5 * pass.vel[l].dot(&inertia.apply(&pass.vel[l]));
        }
        Ok(ke)
    }

    /// Forward dynamics: q̈ from applied generalized forces
    /// (`q̈ = M⁻¹ (Q − V − G)`), solved with a Cholesky factorization.
    pub fn accel_from_forces(
        &self,
        state_q: &DVector<f64>,
        state_qd: &DVector<f64>,
        generalized_force: &DVector<f64>,
    ) -> Result<DVector<f64>, ModelError> {
        let m = self.mass_matrix(state_q)?;
        let bias = self.bias_forces(state_q, state_qd)?;
        let rhs = generalized_force - bias;
        let chol = m
            .cholesky()
            .ok_or_else(|| ModelError::NonSpdInertia("mass matrix".into()))?;
        Ok(chol.solve(&rhs))
    }

    /// Convenience: validate and evaluate at a state.
    pub fn inverse_dynamics_at(&self, s: &GeneralizedState) -> Result<DVector<f64>, ModelError> {
        s.check_pitch()?;
        self.inverse_dynamics_free(&s.q, &s.qd, &s.qdd)
    }
}

pub fn com_from_pass(tree: &RigidBodyTree, pass: &KinematicsPass) -> Vector3<f64> {
    let mut weighted = Vector3::zeros();
    let mut total = 0.0;
    for (l, link) in tree.links().iter().enumerate() {
        let c = pass.link_pose[l] * nalgebra::Point3::from(link.com_offset);
        weighted += link.mass * c.coords;
        total += link.mass;
    }
    weighted / total
}

pub fn point_jacobian_from_pass(
    tree: &RigidBodyTree,
    pass: &KinematicsPass,
    link: LinkId,
    point: &Vector3<f64>,
) -> DMatrix<f64> {
    let n = tree.n_coords();
    let p = (pass.link_pose[link] * nalgebra::Point3::from(*point)).coords;
    let mut j = DMatrix::zeros(6, n);
    // The last coordinate owned by `link`; climbing `coord_parent` from
    // there visits exactly the coordinates on the path to the root.
    let mut cur = (0..n).rev().find(|&k| pass.coord_link[k] == link);
    while let Some(k) = cur {
        let s = pass.subspace[k];
        let lin = s.lin + s.ang.cross(&p);
        for r in 0..3 {
            j[(r, k)] = lin[r];
            j[(r + 3, k)] = s.ang[r];
        }
        cur = pass.coord_parent[k];
    }
    j
}

/// Selection matrix `B = [0; I]` mapping actuated joint torques to
/// generalized forces.
pub fn selection_matrix(n_actuated: usize) -> DMatrix<f64> {
    let mut b = DMatrix::zeros(6 + n_actuated, n_actuated);
    for k in 0..n_actuated {
        b[(6 + k, k)] = 1.0;
    }
    b
}

/// World position of the body point `point` of `link` given a pass.
pub fn world_point(pass: &KinematicsPass, link: LinkId, point: &Vector3<f64>) -> Vector3<f64> {
    (pass.link_pose[link] * nalgebra::Point3::from(*point)).coords
}
