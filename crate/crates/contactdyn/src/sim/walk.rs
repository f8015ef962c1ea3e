//! Joint-tracked biped walking on compliant ground.
//!
//! The robot follows a reference joint trajectory with per-joint PD torques
//! while both feet interact with the ground through penalty contacts at the
//! sole corners. No phase schedule is consumed anywhere: support phases
//! emerge from the contact forces themselves.

use nalgebra::{DVector, Point2};

use crate::contact_models::{foot_contact_wrench, FrictionModel, NormalModel};
use crate::gait::GaitPlan;
use crate::kinetree::{FootId, KinematicsPass, RigidBodyTree};
use crate::rigid_contact::{zmp_from_wrenches, ContactWrench};
use crate::spatial::SpatialMotion;

use super::{
    generalized_force_of_wrench, max_stable_dt, SimError, BARRIER_GUARD_FRACTION,
    MAX_STEP_HALVINGS,
};

/// Per-joint proportional/derivative gains (actuated joints only; the
/// floating base receives no torque).
#[derive(Debug, Clone)]
pub struct PdGains {
    pub kp: DVector<f64>,
    pub kd: DVector<f64>,
}

impl PdGains {
    pub fn uniform(n: usize, kp: f64, kd: f64) -> Self {
        PdGains {
            kp: DVector::from_element(n, kp),
            kd: DVector::from_element(n, kd),
        }
    }

    /// Default gains for the surena-lower joint layout. The ankle pitch must
    /// out-stiffen the inverted-pendulum gravity gradient (m·g·h ≈ 750
    /// N·m/rad) with margin, or tracking droop walks the ZMP out of the
    /// foot.
    pub fn surena_default() -> Self {
        let kp_leg = [2000.0, 6000.0, 6000.0, 6000.0, 4000.0, 5000.0];
        // The ankle derivative gains damp the whole-body rock mode on the
        // stance foot (ζ ≈ 0.5); they bound the stable step size through
        // the light free foot.
        let kd_leg = [70.0, 400.0, 300.0, 200.0, 400.0, 500.0];
        let mut kp = vec![2000.0];
        let mut kd = vec![80.0];
        for _ in 0..2 {
            kp.extend_from_slice(&kp_leg);
            kd.extend_from_slice(&kd_leg);
        }
        PdGains {
            kp: DVector::from_vec(kp),
            kd: DVector::from_vec(kd),
        }
    }
}

/// PD tracking torques: `τ_j = k_p (q_ref,j − q_j) + k_d (q̇_ref,j − q̇_j)`
/// over the actuated joints.
pub fn pd_tracking_torques(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    q_ref: &DVector<f64>,
    qd_ref: &DVector<f64>,
    gains: &PdGains,
) -> DVector<f64> {
    let n = q_ref.len();
    DVector::from_fn(n, |k, _| {
        gains.kp[k] * (q_ref[k] - q[6 + k]) + gains.kd[k] * (qd_ref[k] - qd[6 + k])
    })
}

/// Controller selection.
#[derive(Debug, Clone)]
pub enum ControllerConfig {
    /// No actuation; the robot is passive.
    None,
    /// Joint PD tracking of the reference gait.
    Pd { gains: PdGains },
}

/// A walking (or standing) scenario: gait reference + contact models +
/// integrator settings.
#[derive(Debug, Clone)]
pub struct WalkScenario {
    pub plan: GaitPlan,
    pub normal: NormalModel,
    pub friction: FrictionModel,
    pub ground_height: f64,
    pub dt: f64,
    pub duration: f64,
    pub decimation: usize,
    pub controller: ControllerConfig,
    /// Fall detection: trace truncates when the pelvis drops below this
    /// fraction of its initial height.
    pub fall_fraction: f64,
}

impl WalkScenario {
    /// Default walking scenario on the plan's tree: tangent-barrier normal
    /// contact, pseudo-Coulomb friction, dt = 1e-4 s.
    pub fn new(plan: GaitPlan) -> Self {
        let duration = plan.duration();
        WalkScenario {
            plan,
            normal: crate::contact_models::presets::tanbarrier_table1_raw(),
            friction: crate::contact_models::presets::pseudo_coulomb(0.8),
            ground_height: 0.0,
            dt: 1e-5,
            duration,
            decimation: 10,
            controller: ControllerConfig::Pd {
                gains: PdGains::surena_default(),
            },
            fall_fraction: 0.6,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.dt <= 0.0 || self.duration <= 0.0 || self.decimation == 0 {
            return Err(SimError::Config(
                "dt, duration and decimation must be positive".into(),
            ));
        }
        let n_points = 8; // two feet, four corners each
        let dt_max = max_stable_dt(&self.normal, self.plan.tree().total_mass(), n_points);
        if self.dt > dt_max {
            return Err(SimError::UnstableDt {
                dt: self.dt,
                dt_max,
            });
        }
        Ok(())
    }
}

/// Uniformly sampled simulation output.
#[derive(Debug, Clone)]
pub struct SimTrace {
    pub t: Vec<f64>,
    pub q: Vec<DVector<f64>>,
    pub qd: Vec<DVector<f64>>,
    /// Applied actuated torques.
    pub tau: Vec<DVector<f64>>,
    pub left: Vec<ContactWrench>,
    pub right: Vec<ContactWrench>,
    /// ZMP from the simulated wrenches; `None` while unloaded.
    pub zmp: Vec<Option<Point2<f64>>>,
    /// Per-corner penetration depths.
    pub pen_left: Vec<Vec<f64>>,
    pub pen_right: Vec<Vec<f64>>,
    /// Whether any corner of the foot touches the ground.
    pub contact_left: Vec<bool>,
    pub contact_right: Vec<bool>,
    pub dt: f64,
    pub decimation: usize,
}

impl SimTrace {
    fn with_capacity(n: usize, dt: f64, decimation: usize) -> Self {
        SimTrace {
            t: Vec::with_capacity(n),
            q: Vec::with_capacity(n),
            qd: Vec::with_capacity(n),
            tau: Vec::with_capacity(n),
            left: Vec::with_capacity(n),
            right: Vec::with_capacity(n),
            zmp: Vec::with_capacity(n),
            pen_left: Vec::with_capacity(n),
            pen_right: Vec::with_capacity(n),
            contact_left: Vec::with_capacity(n),
            contact_right: Vec::with_capacity(n),
            dt,
            decimation,
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    /// Empty trace shell used when reconstructing from a CSV for
    /// comparisons (kinematic fields stay zeroed).
    pub fn empty_for_compare(_n_coords: usize) -> Self {
        Self::with_capacity(0, 0.0, 1)
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sample variance of the ZMP over `[t0, t1]` (x and y variances
    /// summed; undefined samples skipped).
    pub fn zmp_variance(&self, t0: f64, t1: f64) -> f64 {
        let pts: Vec<&Point2<f64>> = self
            .t
            .iter()
            .zip(self.zmp.iter())
            .filter(|(t, _)| **t >= t0 && **t <= t1)
            .filter_map(|(_, z)| z.as_ref())
            .collect();
        variance_2d(&pts)
    }
}

/// Summed x/y sample variance of a 2-D point set.
pub fn variance_2d(pts: &[&Point2<f64>]) -> f64 {
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.x).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.y).sum::<f64>() / n;
    pts.iter()
        .map(|p| (p.x - mean_x).powi(2) + (p.y - mean_y).powi(2))
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone, Copy)]
pub struct WalkSummary {
    /// Smallest per-foot total normal force seen while that foot had
    /// contact (≥ 0 by unilaterality).
    pub min_normal_force: f64,
    /// Largest corner penetration over the run.
    pub max_penetration: f64,
    /// RMS actuated-joint tracking error over the run (rad).
    pub rms_tracking_error: f64,
    /// Number of barrier-guard step halvings.
    pub halved_steps: u64,
}

#[derive(Debug, Clone)]
pub struct WalkResult {
    pub trace: SimTrace,
    /// Time of fall detection; `None` when the run completed upright.
    pub fall: Option<f64>,
    pub summary: WalkSummary,
}

struct FootState {
    id: FootId,
    wrench: ContactWrench,
    penetrations: Vec<f64>,
}

fn foot_contacts(
    tree: &RigidBodyTree,
    pass: &KinematicsPass,
    ground: f64,
    normal: &NormalModel,
    friction: &FrictionModel,
) -> Result<Vec<FootState>, SimError> {
    let mut out = Vec::with_capacity(2);
    for id in [FootId::Left, FootId::Right] {
        let geom = tree.foot(id)?;
        let pose = pass.link_pose[geom.link];
        let vel = pass.vel[geom.link];
        let twist = SpatialMotion::new(vel.ang, vel.velocity_at(&pose.translation.vector));
        let wrench = foot_contact_wrench(
            &pose,
            &twist,
            &geom.corners,
            &geom.reference,
            ground,
            normal,
            friction,
        )?;
        debug_assert!(wrench.force.z >= 0.0, "unilaterality violated");
        let penetrations = geom
            .corners
            .iter()
            .map(|c| {
                let p = pose * nalgebra::Point3::from(*c);
                (ground - p.z).max(0.0)
            })
            .collect();
        out.push(FootState {
            id,
            wrench,
            penetrations,
        });
    }
    Ok(out)
}

fn max_penetration_at(
    tree: &RigidBodyTree,
    q: &DVector<f64>,
    ground: f64,
) -> Result<f64, SimError> {
    let pass = KinematicsPass::positions(tree, q)?;
    let mut max_pen: f64 = 0.0;
    for id in [FootId::Left, FootId::Right] {
        let geom = tree.foot(id)?;
        for c in &geom.corners {
            let p = pass.link_pose[geom.link] * nalgebra::Point3::from(*c);
            max_pen = max_pen.max(ground - p.z);
        }
    }
    Ok(max_pen)
}

type EvalFn<'a> = dyn Fn(
        &DVector<f64>,
        &DVector<f64>,
        f64,
    ) -> Result<(DVector<f64>, DVector<f64>, Vec<FootState>), SimError>
    + 'a;

/// Advance one semi-implicit Euler interval of length `h`, bisecting on
/// barrier overshoot.
#[allow(clippy::too_many_arguments)]
fn advance(
    q: &DVector<f64>,
    qd: &DVector<f64>,
    t: f64,
    h: f64,
    depth: u32,
    eval: &EvalFn,
    tree: &RigidBodyTree,
    ground: f64,
    barrier: Option<f64>,
    halved: &mut u64,
) -> Result<(DVector<f64>, DVector<f64>), SimError> {
    let (qdd, _, _) = eval(q, qd, t)?;
    let qd_new = qd + &qdd * h;
    let q_new = q + &qd_new * h;
    if let Some(lim) = barrier {
        if max_penetration_at(tree, &q_new, ground)? >= lim {
            if depth >= MAX_STEP_HALVINGS {
                return Err(SimError::StepCollapse(t));
            }
            *halved += 1;
            let (q1, qd1) = advance(q, qd, t, h / 2.0, depth + 1, eval, tree, ground, barrier, halved)?;
            return advance(
                &q1,
                &qd1,
                t + h / 2.0,
                h / 2.0,
                depth + 1,
                eval,
                tree,
                ground,
                barrier,
                halved,
            );
        }
    }
    Ok((q_new, qd_new))
}

/// Run the scenario. Phases are never scheduled: contact states emerge from
/// the foot kinematics.
pub fn run_walk(scenario: &WalkScenario) -> Result<WalkResult, SimError> {
    scenario.validate()?;
    let tree = scenario.plan.tree().clone();
    let n = tree.n_coords();
    let n_act = tree.n_actuated();
    let plan = &scenario.plan;

    // Pre-penetrate to the static depth so the contacts are loaded at t=0.
    let per_point_load = tree.total_mass() * 9.81 / 8.0;
    let settle = crate::contact_models::static_penetration(&scenario.normal, per_point_load)
        .unwrap_or(1e-3);
    let init = plan
        .initial_state(settle)
        .map_err(|e| SimError::Config(e.to_string()))?;

    // Reference table at 1 kHz, linearly interpolated during the run.
    let table_dt = 1e-3;
    let n_table = (scenario.duration / table_dt).ceil() as usize + 2;
    let mut ref_q = Vec::with_capacity(n_table);
    let mut ref_qd = Vec::with_capacity(n_table);
    for i in 0..n_table {
        let (q_act, qd_act) = plan
            .actuated_reference(i as f64 * table_dt)
            .map_err(|e| SimError::Config(e.to_string()))?;
        ref_q.push(q_act);
        ref_qd.push(qd_act);
    }
    let reference = move |t: f64| -> (DVector<f64>, DVector<f64>) {
        let x = (t / table_dt).max(0.0);
        let i = (x as usize).min(n_table - 2);
        let u = (x - i as f64).clamp(0.0, 1.0);
        (
            &ref_q[i] * (1.0 - u) + &ref_q[i + 1] * u,
            &ref_qd[i] * (1.0 - u) + &ref_qd[i + 1] * u,
        )
    };

    let barrier = match scenario.normal {
        NormalModel::TanBarrier { l_0, .. } => Some(l_0 * BARRIER_GUARD_FRACTION),
        _ => None,
    };

    let n_steps = (scenario.duration / scenario.dt).round() as usize;
    let mut trace = SimTrace::with_capacity(
        n_steps / scenario.decimation + 2,
        scenario.dt,
        scenario.decimation,
    );
    let mut q = init.q.clone();
    let mut qd = init.qd.clone();
    let mut t = 0.0;
    let nominal_height = q[2] + settle;
    let mut fall = None;
    let mut halved = 0u64;
    let mut min_normal = f64::INFINITY;
    let mut max_pen: f64 = 0.0;
    let mut tracking_sq_sum = 0.0;
    let mut tracking_samples = 0usize;

    let eval = |q: &DVector<f64>,
                qd: &DVector<f64>,
                t: f64|
     -> Result<(DVector<f64>, DVector<f64>, Vec<FootState>), SimError> {
        let pass = KinematicsPass::with_velocity(&tree, q, qd)?;
        let feet = foot_contacts(
            &tree,
            &pass,
            scenario.ground_height,
            &scenario.normal,
            &scenario.friction,
        )?;
        let tau = match &scenario.controller {
            ControllerConfig::None => DVector::zeros(n_act),
            ControllerConfig::Pd { gains } => {
                let (q_ref, qd_ref) = reference(t);
                pd_tracking_torques(q, qd, &q_ref, &qd_ref, gains)
            }
        };
        let mut q_gen = DVector::zeros(n);
        for k in 0..n_act {
            q_gen[6 + k] = tau[k];
        }
        for f in &feet {
            let link = tree.foot(f.id)?.link;
            q_gen += generalized_force_of_wrench(&tree, &pass, link, &f.wrench);
        }
        let qdd = tree.accel_from_forces(q, qd, &q_gen)?;
        Ok((qdd, tau, feet))
    };

    let record = |trace: &mut SimTrace,
                  t: f64,
                  q: &DVector<f64>,
                  qd: &DVector<f64>,
                  tau: &DVector<f64>,
                  feet: &[FootState],
                  ground: f64| {
        trace.t.push(t);
        trace.q.push(q.clone());
        trace.qd.push(qd.clone());
        trace.tau.push(tau.clone());
        trace.left.push(feet[0].wrench);
        trace.right.push(feet[1].wrench);
        trace
            .zmp
            .push(zmp_from_wrenches(&[feet[0].wrench, feet[1].wrench], ground).ok());
        trace.pen_left.push(feet[0].penetrations.clone());
        trace.pen_right.push(feet[1].penetrations.clone());
        trace
            .contact_left
            .push(feet[0].penetrations.iter().any(|&d| d > 0.0));
        trace
            .contact_right
            .push(feet[1].penetrations.iter().any(|&d| d > 0.0));
    };

    let (_, tau0, feet0) = eval(&q, &qd, 0.0)?;
    record(&mut trace, 0.0, &q, &qd, &tau0, &feet0, scenario.ground_height);

    for step in 0..n_steps {
        let (q_new, qd_new) = advance(
            &q,
            &qd,
            t,
            scenario.dt,
            0,
            &eval,
            &tree,
            scenario.ground_height,
            barrier,
            &mut halved,
        )?;
        q = q_new;
        qd = qd_new;
        t = (step + 1) as f64 * scenario.dt;
        if !q.iter().all(|v| v.is_finite()) || !qd.iter().all(|v| v.is_finite()) {
            return Err(SimError::NonFinite(t));
        }

        let (q_ref, _) = reference(t);
        for k in 0..n_act {
            tracking_sq_sum += (q_ref[k] - q[6 + k]).powi(2);
        }
        tracking_samples += n_act;

        if (step + 1) % scenario.decimation == 0 {
            let (_, tau_s, feet_s) = eval(&q, &qd, t)?;
            for f in &feet_s {
                if f.penetrations.iter().any(|&d| d > 0.0) {
                    min_normal = min_normal.min(f.wrench.force.z);
                }
                max_pen = max_pen.max(f.penetrations.iter().copied().fold(0.0, f64::max));
            }
            record(&mut trace, t, &q, &qd, &tau_s, &feet_s, scenario.ground_height);
        }

        if q[2] < scenario.fall_fraction * nominal_height {
            fall = Some(t);
            break;
        }
    }

    let summary = WalkSummary {
        min_normal_force: if min_normal.is_finite() { min_normal } else { 0.0 },
        max_penetration: max_pen,
        rms_tracking_error: (tracking_sq_sum / tracking_samples.max(1) as f64).sqrt(),
        halved_steps: halved,
    };
    Ok(WalkResult {
        trace,
        fall,
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;
    use crate::gait::{GaitParams, GaitPlan};
    use crate::kinetree::presets;

    fn standing_scenario(duration: f64) -> WalkScenario {
        let tree = presets::surena_lower();
        let mut params = GaitParams::walk_half_kmh(0);
        params.stand_time = duration + 2.0;
        let plan = GaitPlan::new(&tree, params).unwrap();
        let mut scenario = WalkScenario::new(plan);
        scenario.duration = duration;
        scenario
    }

    #[test]
    fn standing_supports_weight() {
        let scenario = standing_scenario(0.6);
        let result = run_walk(&scenario).unwrap();
        assert!(result.fall.is_none());
        let last = result.trace.len() - 1;
        let total_fz = result.trace.left[last].force.z + result.trace.right[last].force.z;
        let weight = scenario.plan.tree().total_mass() * 9.81;
        assert!(
            (total_fz - weight).abs() < 0.005 * weight,
            "total normal {total_fz:.2} vs weight {weight:.2}"
        );
        // Sample spacing equals decimation x dt throughout.
        let spacing = scenario.dt * scenario.decimation as f64;
        for i in 1..result.trace.len() {
            let gap = result.trace.t[i] - result.trace.t[i - 1];
            assert!((gap - spacing).abs() < 1e-12, "spacing {gap} vs {spacing}");
        }
        // Standing ZMP sits near the planned COM (statics).
        let zmp = result.trace.zmp[last].expect("loaded contact");
        let t_last = result.trace.t[last];
        let plan_x = scenario.plan.com_x(t_last);
        assert!(
            (zmp.x - plan_x).abs() < 0.02 && zmp.y.abs() < 0.02,
            "zmp {zmp} vs planned com x {plan_x:.4}"
        );
    }

    #[test]
    fn flight_phase_has_zero_wrench() {
        let tree = presets::surena_lower();
        let mut params = GaitParams::walk_half_kmh(0);
        params.stand_time = 10.0;
        let plan = GaitPlan::new(&tree, params).unwrap();
        let mut scenario = WalkScenario::new(plan);
        scenario.duration = 0.05;
        scenario.ground_height = -0.5;
        scenario.controller = ControllerConfig::None;
        let result = run_walk(&scenario).unwrap();
        for i in 0..result.trace.len() {
            assert_eq!(result.trace.left[i].force, Vector3::zeros());
            assert_eq!(result.trace.right[i].force, Vector3::zeros());
            assert!(!result.trace.contact_left[i]);
            assert!(result.trace.zmp[i].is_none());
        }
    }

    #[test]
    fn falling_is_detected_without_ground() {
        let tree = presets::surena_lower();
        let mut params = GaitParams::walk_half_kmh(0);
        params.stand_time = 10.0;
        let plan = GaitPlan::new(&tree, params).unwrap();
        let mut scenario = WalkScenario::new(plan);
        scenario.duration = 0.6;
        scenario.ground_height = -5.0;
        scenario.controller = ControllerConfig::None;
        let result = run_walk(&scenario).unwrap();
        let fall_t = result.fall.expect("free fall must trip the detector");
        // Dropping 40 % of 0.87 m takes √(2h/g) ≈ 0.27 s.
        assert!(fall_t > 0.2 && fall_t < 0.35, "fall at {fall_t}");
    }

    #[test]
    fn pd_zero_error_zero_torque() {
        let gains = PdGains::uniform(2, 100.0, 10.0);
        let q = DVector::from_vec(vec![0.0; 8]);
        let qd = DVector::from_vec(vec![0.0; 8]);
        let tau = pd_tracking_torques(&q, &qd, &DVector::zeros(2), &DVector::zeros(2), &gains);
        assert_eq!(tau, DVector::zeros(2));
    }

    #[test]
    fn pd_unit_error_gives_kp() {
        let gains = PdGains::uniform(1, 100.0, 0.0);
        let q = DVector::from_vec(vec![0.0; 7]);
        let qd = DVector::from_vec(vec![0.0; 7]);
        let q_ref = DVector::from_vec(vec![1.0]);
        let tau = pd_tracking_torques(&q, &qd, &q_ref, &DVector::zeros(1), &gains);
        assert_eq!(tau[0], 100.0);
    }

    #[test]
    fn deterministic_traces() {
        let scenario = standing_scenario(0.05);
        let a = run_walk(&scenario).unwrap();
        let b = run_walk(&scenario).unwrap();
        assert_eq!(a.trace.len(), b.trace.len());
        for i in 0..a.trace.len() {
            for k in 0..a.trace.q[i].len() {
                assert_eq!(a.trace.q[i][k].to_bits(), b.trace.q[i][k].to_bits());
            }
        }
    }
}
