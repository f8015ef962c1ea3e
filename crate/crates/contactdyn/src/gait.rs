//! Reference walking trajectories for the biped presets.
//!
//! Trajectory generation is an *input* to both contact pipelines, not part
//! of them; this module exists so the crate ships a self-contained,
//! reproducible reference gait (the bundled 0.5 km/h pattern) instead of a
//! large opaque CSV. The plan is fully analytic:
//!
//! * sagittal COM: constant cruise velocity with C² quintic ramps in and out;
//! * lateral COM: a two-harmonic wave shaped so the implied
//!   `zmp = y − (z₀/g)·ÿ` approximates a square wave resting on the stance
//!   foot centers, with a C² blend-in/out while both feet are planted;
//! * feet: fixed lateral lanes, quintic swing profiles in x and a C² bump in
//!   z (zero velocity and acceleration at touchdown);
//! * joints: closed-form six-DOF leg inverse kinematics (hip yaw held at
//!   zero, feet kept flat), with the pelvis position iterated so the
//!   whole-body COM tracks the plan.
//!
//! Velocities and accelerations are obtained by central differences of the
//! analytic pose trajectory, which is C² by construction.

use nalgebra::{DVector, Point2, Vector3};
use thiserror::Error;

use crate::kinetree::{FootId, RigidBodyTree, SurenaDims, SURENA_JOINT_NAMES};

#[derive(Debug, Error)]
pub enum GaitError {
    #[error("gait generator requires the surena-lower joint layout (mismatch at joint {0})")]
    JointLayout(usize),
    #[error("{foot} leg target out of reach: need {need:.3} m of {have:.3} m")]
    Unreachable { foot: FootId, need: f64, have: f64 },
}

/// Support phase labels used by the rigid-contact schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SupportPhase {
    Dsp,
    SspLeft,
    SspRight,
}

impl SupportPhase {
    pub fn stance_label(self) -> &'static str {
        match self {
            SupportPhase::Dsp => "both",
            SupportPhase::SspLeft => "left",
            SupportPhase::SspRight => "right",
        }
    }

    pub fn phase_label(self) -> &'static str {
        match self {
            SupportPhase::Dsp => "dsp",
            _ => "ssp",
        }
    }

    pub fn parse(phase: &str, stance: &str) -> Option<SupportPhase> {
        match (phase, stance) {
            ("dsp", _) => Some(SupportPhase::Dsp),
            ("ssp", "left") => Some(SupportPhase::SspLeft),
            ("ssp", "right") => Some(SupportPhase::SspRight),
            _ => None,
        }
    }
}

/// Parameters of the periodic walk.
#[derive(Debug, Clone)]
pub struct GaitParams {
    /// Distance between successive footprints of opposite feet (m).
    pub step_length: f64,
    /// Duration of one step (s); cruise speed = step_length / step_time.
    pub step_time: f64,
    /// Fraction of each step spent in double support.
    pub dsp_fraction: f64,
    /// Swing apex height (m).
    pub swing_height: f64,
    /// Constant pelvis height during the walk (m).
    pub pelvis_height: f64,
    /// Lateral ZMP plateau (m); the stance-foot center lane.
    pub zmp_amplitude: f64,
    /// Number of steps (two per gait cycle).
    pub n_steps: usize,
    /// Initial quiet standing before the lateral blend (s).
    pub stand_time: f64,
    /// Lateral wave blend duration (s).
    pub blend_time: f64,
    /// Cruise-speed ramp duration (s), shorter than the lateral blend so
    /// the COM travel while both feet are planted stays small.
    pub ramp_time: f64,
    /// How far the COM leads the first stance foot at that step's SSP
    /// midpoint (m); anchors the sagittal plan to the initial footprints.
    pub stance_lead: f64,
    /// Quiet standing appended at the end (s).
    pub settle_time: f64,
}

impl GaitParams {
    /// The bundled 0.5 km/h pattern: 0.10 m steps at 0.72 s per step;
    /// `n_steps` steps of walking (6 steps = three gait cycles).
    pub fn walk_half_kmh(n_steps: usize) -> Self {
        GaitParams {
            step_length: 0.10,
            step_time: 0.72,
            dsp_fraction: 0.30,
            swing_height: 0.03,
            pelvis_height: 0.87,
            zmp_amplitude: 0.09,
            n_steps,
            stand_time: 0.6,
            blend_time: 1.44,
            ramp_time: 0.5,
            stance_lead: 0.05,
            settle_time: 0.7,
        }
    }

    pub fn cruise_speed(&self) -> f64 {
        self.step_length / self.step_time
    }

    pub fn cycle_time(&self) -> f64 {
        2.0 * self.step_time
    }

    pub fn dsp_time(&self) -> f64 {
        self.dsp_fraction * self.step_time
    }
}

/// One sampled point of the reference trajectory.
#[derive(Debug, Clone)]
pub struct GaitSample {
    pub t: f64,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub qdd: DVector<f64>,
    pub phase: SupportPhase,
}

/// Analytic reference gait bound to a tree with the surena-lower layout.
#[derive(Debug, Clone)]
pub struct GaitPlan {
    params: GaitParams,
    tree: RigidBodyTree,
    dims: SurenaDims,
    /// Start of the walking window (first DSP weight shift), absolute time.
    t_walk: f64,
    /// End of the walking window (final crossing), absolute time.
    t_walk_end: f64,
}

/// Quintic smoothstep: C² with zero first and second derivative at 0 and 1.
fn smoothstep5(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

/// Integral of `smoothstep5` from 0 to `u` (clamped).
fn smoothstep5_integral(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 0.5 + (u - 1.0);
    }
    let u4 = u * u * u * u;
    u4 * (2.5 - 3.0 * u + u * u)
}

/// C² bump with zero value/velocity/acceleration at both ends, peak 1 at ½.
fn bump6(u: f64) -> f64 {
    let u = u.clamp(0.0, 1.0);
    64.0 * u.powi(3) * (1.0 - u).powi(3)
}

impl GaitPlan {
    pub fn new(tree: &RigidBodyTree, params: GaitParams) -> Result<Self, GaitError> {
        let names = tree.actuated_joint_names();
        for (k, expect) in SURENA_JOINT_NAMES.iter().enumerate() {
            if names.get(k).copied() != Some(*expect) {
                return Err(GaitError::JointLayout(k));
            }
        }
        let t_walk = params.stand_time + params.blend_time;
        let walking = params.n_steps as f64 * params.step_time + params.dsp_time() / 2.0;
        Ok(GaitPlan {
            t_walk,
            t_walk_end: t_walk + walking,
            params: params.clone(),
            tree: tree.clone(),
            dims: SurenaDims::standard(),
        })
    }

    pub fn params(&self) -> &GaitParams {
        &self.params
    }

    pub fn tree(&self) -> &RigidBodyTree {
        &self.tree
    }

    /// Total plan duration including stand, blends and final settle.
    pub fn duration(&self) -> f64 {
        self.t_walk_end + self.params.blend_time + self.params.settle_time
    }

    /// The stepping window `(first weight shift, final crossing)`.
    pub fn walk_window(&self) -> (f64, f64) {
        (self.t_walk, self.t_walk_end)
    }

    /// Anchor of the sagittal cruise line: `x_com(τ) = v·τ + anchor` during
    /// cruise, chosen so the COM leads the first stance foot (at x = 0) by
    /// `stance_lead` at that step's SSP midpoint.
    fn sagittal_anchor(&self) -> f64 {
        let p = &self.params;
        let t_mid0 = p.dsp_time() + (p.step_time - p.dsp_time()) / 2.0;
        p.stance_lead - p.cruise_speed() * t_mid0
    }

    /// Sagittal COM position at absolute time `t`: quintic speed ramp to the
    /// cruise velocity, constant cruise, quintic ramp-down.
    pub fn com_x(&self, t: f64) -> f64 {
        let p = &self.params;
        let v = p.cruise_speed();
        let tr = p.ramp_time;
        let c = self.sagittal_anchor();
        let tau = t - self.t_walk;
        let t_end = self.t_walk_end - self.t_walk;
        if tau <= 0.0 {
            // Before and during the ramp-up window [-tr, 0].
            let u = (tau + tr) / tr;
            return c + v * tr * (smoothstep5_integral(u) - 0.5);
        }
        if tau <= t_end {
            return c + v * tau;
        }
        // Decelerate: velocity v·(1 - smoothstep5(u)).
        let u = ((tau - t_end) / tr).min(1.0);
        c + v * t_end + v * tr * (u - smoothstep5_integral(u))
    }

    /// Lateral COM position at absolute time `t`.
    pub fn com_y(&self, t: f64) -> f64 {
        let p = &self.params;
        let g = 9.81;
        let z0 = p.pelvis_height;
        let omega = std::f64::consts::PI / p.step_time;
        // Two-harmonic square-wave ZMP inverted through the pendulum gain.
        let amp1 = 4.0 * p.zmp_amplitude / std::f64::consts::PI;
        let amp3 = amp1 / 3.0;
        let gain = |k: f64| 1.0 + z0 * (k * omega).powi(2) / g;
        let a1 = amp1 / gain(1.0);
        let a3 = amp3 / gain(3.0);

        if t >= self.t_walk_end {
            // Momentum capture: the wave crosses zero here carrying its full
            // lateral velocity; decay it along the pendulum's stable mode
            // (critically damped in the LIPM sense), which keeps the implied
            // ZMP bounded and fading.
            let omega0 = (g / z0).sqrt();
            let sign = if p.n_steps % 2 == 0 { 1.0 } else { -1.0 };
            let ydot0 = sign * omega * (a1 + 3.0 * a3);
            let dt = t - self.t_walk_end;
            return ydot0 * dt * (-omega0 * dt).exp();
        }

        // Wave zero at the center of each DSP window; the first DSP starts
        // at t_walk, so its center sits half a DSP later.
        let theta = omega * (t - self.t_walk - p.dsp_time() / 2.0);
        let wave = a1 * theta.sin() + a3 * (3.0 * theta).sin();
        let tb = p.blend_time;
        let w_in = smoothstep5((t - (self.t_walk - tb)) / tb);
        wave * w_in
    }

    /// World sole targets of both feet at absolute time `t`:
    /// `(left, right)`, fixed lateral lanes.
    pub fn foot_targets(&self, t: f64) -> (Vector3<f64>, Vector3<f64>) {
        let p = &self.params;
        let lane = self.dims.hip_spacing / 2.0;
        let mut left = Vector3::new(0.0, lane, 0.0);
        let mut right = Vector3::new(0.0, -lane, 0.0);
        let tau = t - self.t_walk;
        for k in 0..p.n_steps {
            let step_start = k as f64 * p.step_time;
            let swing_start = step_start + p.dsp_time();
            let swing_end = (k + 1) as f64 * p.step_time;
            let from = self.swing_origin(k);
            let to = self.swing_target(k);
            let (x, z) = if tau < swing_start {
                (from, 0.0)
            } else if tau < swing_end {
                let u = (tau - swing_start) / (swing_end - swing_start);
                (
                    from + (to - from) * smoothstep5(u),
                    p.swing_height * bump6(u),
                )
            } else {
                (to, 0.0)
            };
            // Even steps swing the right foot (left stance).
            if tau >= step_start {
                if k % 2 == 0 {
                    right.x = x;
                    right.z = z;
                } else {
                    left.x = x;
                    left.z = z;
                }
            }
        }
        (left, right)
    }

    /// Where the swing foot of step `k` starts (its previous footprint).
    fn swing_origin(&self, k: usize) -> f64 {
        if k < 2 {
            0.0
        } else {
            self.swing_target(k - 2)
        }
    }

    /// Where the swing foot of step `k` lands: under the COM at the next
    /// step's SSP midpoint (uniform footprint spacing during cruise).
    fn swing_target(&self, k: usize) -> f64 {
        let p = &self.params;
        let v = p.cruise_speed();
        let c = self.sagittal_anchor();
        let t_mid =
            |j: f64| j * p.step_time + p.dsp_time() + (p.step_time - p.dsp_time()) / 2.0;
        if k + 1 < p.n_steps {
            c + v * t_mid((k + 1) as f64)
        } else {
            // Final landing goes directly under the COM stopping point.
            let t_end = p.n_steps as f64 * p.step_time + p.dsp_time() / 2.0;
            c + v * t_end + 0.5 * v * p.ramp_time
        }
    }

    /// Support phase at absolute time `t`.
    pub fn phase_at(&self, t: f64) -> SupportPhase {
        let p = &self.params;
        let tau = t - self.t_walk;
        if tau < 0.0 || tau >= p.n_steps as f64 * p.step_time {
            return SupportPhase::Dsp;
        }
        let k = (tau / p.step_time).floor() as usize;
        let in_step = tau - k as f64 * p.step_time;
        if in_step < p.dsp_time() {
            SupportPhase::Dsp
        } else if k % 2 == 0 {
            SupportPhase::SspLeft
        } else {
            SupportPhase::SspRight
        }
    }

    /// Analytic pose at absolute time `t` (positions only).
    pub fn pose_at(&self, t: f64) -> Result<DVector<f64>, GaitError> {
        let p = &self.params;
        let com_target = Point2::new(self.com_x(t), self.com_y(t));
        let (left, right) = self.foot_targets(t);

        let mut q = DVector::zeros(self.tree.n_coords());
        // Iterate the pelvis x-y so the whole-body COM lands on the plan.
        let mut pelvis = Vector3::new(com_target.x, com_target.y, p.pelvis_height);
        for _ in 0..4 {
            self.solve_legs(&mut q, &pelvis, &left, &right)?;
            let com = self.tree.com(&q).expect("pose in range");
            pelvis.x += com_target.x - com.x;
            pelvis.y += com_target.y - com.y;
        }
        self.solve_legs(&mut q, &pelvis, &left, &right)?;
        Ok(q)
    }

    /// Closed-form leg IK for both legs into `q` (pelvis level, feet flat,
    /// hip yaw zero).
    fn solve_legs(
        &self,
        q: &mut DVector<f64>,
        pelvis: &Vector3<f64>,
        left_sole: &Vector3<f64>,
        right_sole: &Vector3<f64>,
    ) -> Result<(), GaitError> {
        q[0] = pelvis.x;
        q[1] = pelvis.y;
        q[2] = pelvis.z;
        for (foot, sole) in [(FootId::Left, left_sole), (FootId::Right, right_sole)] {
            let side = match foot {
                FootId::Left => 1.0,
                FootId::Right => -1.0,
            };
            let hip = pelvis
                + Vector3::new(0.0, side * self.dims.hip_spacing / 2.0, -self.dims.hip_drop);
            let ankle = sole + Vector3::new(0.0, 0.0, self.dims.ankle_height);
            let r = ankle - hip;
            let angles =
                leg_ik(&r, self.dims.thigh_length, self.dims.shank_length).ok_or_else(|| {
                    GaitError::Unreachable {
                        foot,
                        need: r.norm(),
                        have: self.dims.thigh_length + self.dims.shank_length,
                    }
                })?;
            let base = match foot {
                FootId::Left => 1,  // joints after torso_yaw
                FootId::Right => 7, // after the left leg block
            };
            for (j, val) in angles.iter().enumerate() {
                q[6 + base + j] = *val;
            }
        }
        Ok(())
    }

    /// Full sample with central-difference velocities and accelerations.
    pub fn sample(&self, t: f64) -> Result<GaitSample, GaitError> {
        let h = 1e-4;
        let q = self.pose_at(t)?;
        let qp = self.pose_at(t + h)?;
        let qm = self.pose_at(t - h)?;
        let qd = (&qp - &qm) / (2.0 * h);
        let qdd = (&qp - &(&q * 2.0) + &qm) / (h * h);
        Ok(GaitSample {
            t,
            q,
            qd,
            qdd,
            phase: self.phase_at(t),
        })
    }

    /// Actuated-joint reference (positions and velocities) for a tracking
    /// controller.
    pub fn actuated_reference(
        &self,
        t: f64,
    ) -> Result<(DVector<f64>, DVector<f64>), GaitError> {
        let h = 1e-4;
        let q = self.pose_at(t)?;
        let qp = self.pose_at(t + h)?;
        let qm = self.pose_at(t - h)?;
        let n = self.tree.n_actuated();
        let mut q_act = DVector::zeros(n);
        let mut qd_act = DVector::zeros(n);
        for k in 0..n {
            q_act[k] = q[6 + k];
            qd_act[k] = (qp[6 + k] - qm[6 + k]) / (2.0 * h);
        }
        Ok((q_act, qd_act))
    }

    /// Initial simulation state: the plan pose at t = 0, lowered by
    /// `settle` so the foot corners pre-penetrate near the static depth.
    pub fn initial_state(
        &self,
        settle: f64,
    ) -> Result<crate::kinetree::GeneralizedState, GaitError> {
        let mut q = self.pose_at(0.0)?;
        q[2] -= settle;
        let n = self.tree.n_coords();
        Ok(crate::kinetree::GeneralizedState {
            q,
            qd: DVector::zeros(n),
            qdd: DVector::zeros(n),
            t: 0.0,
        })
    }

    /// Support polygon of the scheduled stance at time `t` for pose `q`.
    pub fn support_polygon_at(
        &self,
        t: f64,
        q: &DVector<f64>,
    ) -> Result<crate::rigid_contact::SupportPolygon, crate::rigid_contact::SolveError> {
        let feet: &[FootId] = match self.phase_at(t) {
            SupportPhase::Dsp => &[FootId::Left, FootId::Right],
            SupportPhase::SspLeft => &[FootId::Left],
            SupportPhase::SspRight => &[FootId::Right],
        };
        crate::rigid_contact::support_polygon(&self.tree, q, feet)
    }
}

/// Closed-form 6-DOF leg IK (hip yaw = 0, level pelvis, flat foot).
/// `r` is the hip→ankle vector in the pelvis frame; returns
/// `[hip_yaw, hip_roll, hip_pitch, knee, ankle_pitch, ankle_roll]`.
fn leg_ik(r: &Vector3<f64>, l_thigh: f64, l_shank: f64) -> Option<[f64; 6]> {
    let reach = (l_thigh + l_shank) * (1.0 - 1e-9);
    let dist = r.norm();
    if dist >= reach || dist < (l_thigh - l_shank).abs() + 1e-9 {
        return None;
    }
    let hip_roll = f64::atan2(r.y, -r.z);
    // Forward lean of the hip→ankle line in the rolled plane.
    let alpha = f64::atan2(r.x, r.y.hypot(r.z));
    let cos_knee =
        (l_thigh * l_thigh + l_shank * l_shank - dist * dist) / (2.0 * l_thigh * l_shank);
    let knee = std::f64::consts::PI - cos_knee.clamp(-1.0, 1.0).acos();
    // Angle between the thigh and the hip→ankle line.
    let cos_gamma =
        (l_thigh * l_thigh + dist * dist - l_shank * l_shank) / (2.0 * l_thigh * dist);
    let gamma = cos_gamma.clamp(-1.0, 1.0).acos();
    let hip_pitch = -(alpha + gamma);
    let ankle_pitch = -(hip_pitch + knee);
    let ankle_roll = -hip_roll;
    Some([0.0, hip_roll, hip_pitch, knee, ankle_pitch, ankle_roll])
}
