//! Single-point ball drop onto a compliant ground: the standard scenario for
//! comparing normal-force laws (steady penetration, settling time, maximum
//! penetration under impact).

use crate::contact_models::{normal_force, ContactPointState, NormalModel};
use nalgebra::Vector2;

use super::{SimError, BARRIER_GUARD_FRACTION, MAX_STEP_HALVINGS};

/// Ball-drop configuration. The ball starts with its contact point touching
/// the ground (`d = 0`) moving downward at `impact_speed`.
#[derive(Debug, Clone)]
pub struct BallScenario {
    pub mass: f64,
    /// Downward speed at first contact (m/s), ≥ 0.
    pub impact_speed: f64,
    pub model: NormalModel,
    pub dt: f64,
    pub duration: f64,
    /// Keep every `decimation`-th sample in the trace.
    pub decimation: usize,
    pub gravity: f64,
}

impl BallScenario {
    pub fn new(mass: f64, impact_speed: f64, model: NormalModel) -> Self {
        BallScenario {
            mass,
            impact_speed,
            model,
            dt: 1e-5,
            duration: 0.3,
            decimation: 10,
            gravity: 9.81,
        }
    }
}

/// Decimated time series of the ball state.
#[derive(Debug, Clone)]
pub struct BallDropTrace {
    pub t: Vec<f64>,
    /// Height of the contact point above the ground (negative inside).
    pub height: Vec<f64>,
    pub velocity: Vec<f64>,
    pub normal_force: Vec<f64>,
    pub dt: f64,
    pub decimation: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct BallDropSummary {
    /// Largest penetration over the run (m).
    pub max_penetration: f64,
    /// Final penetration (m), taken as the steady value.
    pub steady_penetration: f64,
    /// First time after which the penetration stays within ±5 % of the
    /// steady value (s).
    pub settling_time: f64,
    /// Number of rejected-and-halved steps (barrier guard).
    pub halved_steps: u64,
}

const SETTLING_BAND: f64 = 0.05;

/// Simulate the drop and summarize it. Penetration statistics are computed
/// at full step resolution regardless of trace decimation.
pub fn run_ball_drop(scenario: &BallScenario) -> Result<(BallDropTrace, BallDropSummary), SimError> {
    if scenario.mass <= 0.0 {
        return Err(SimError::Config("ball mass must be positive".into()));
    }
    if scenario.impact_speed < 0.0 {
        return Err(SimError::Config("impact speed must be ≥ 0 (downward)".into()));
    }
    if scenario.dt <= 0.0 {
        return Err(SimError::Config("dt must be positive".into()));
    }
    let dt_max = super::max_stable_dt(&scenario.model, scenario.mass, 1);
    if scenario.dt > dt_max {
        return Err(SimError::UnstableDt {
            dt: scenario.dt,
            dt_max,
        });
    }

    let n_steps = (scenario.duration / scenario.dt).round() as usize;
    let mut z = 0.0f64;
    let mut v = -scenario.impact_speed;
    let mut t = 0.0;
    let mut halved = 0u64;

    let mut trace = BallDropTrace {
        t: Vec::with_capacity(n_steps / scenario.decimation + 2),
        height: Vec::new(),
        velocity: Vec::new(),
        normal_force: Vec::new(),
        dt: scenario.dt,
        decimation: scenario.decimation,
    };
    let mut penetrations = Vec::with_capacity(n_steps + 1);

    let eval_force = |z: f64, v: f64| -> Result<f64, SimError> {
        let d = (-z).max(0.0);
        if d == 0.0 {
            return Ok(0.0);
        }
        let cp = ContactPointState {
            penetration: d,
            rate: -v,
            tangential: Vector2::zeros(),
        };
        Ok(normal_force(&scenario.model, &cp)?)
    };

    let barrier = match scenario.model {
        NormalModel::TanBarrier { l_0, .. } => Some(l_0 * BARRIER_GUARD_FRACTION),
        _ => None,
    };

    let record = |trace: &mut BallDropTrace, t: f64, z: f64, v: f64, f: f64| {
        trace.t.push(t);
        trace.height.push(z);
        trace.velocity.push(v);
        trace.normal_force.push(f);
    };

    record(&mut trace, t, z, v, eval_force(z, v)?);
    penetrations.push(0.0f64);

    for step in 0..n_steps {
        let (z_new, v_new) = sub_advance(
            z,
            v,
            scenario.dt,
            0,
            scenario,
            &eval_force,
            barrier,
            &mut halved,
            t,
        )?;
        z = z_new;
        v = v_new;
        t = (step + 1) as f64 * scenario.dt;
        if !z.is_finite() || !v.is_finite() {
            return Err(SimError::NonFinite(t));
        }
        penetrations.push((-z).max(0.0));
        if (step + 1) % scenario.decimation == 0 {
            record(&mut trace, t, z, v, eval_force(z, v)?);
        }
    }

    let steady = *penetrations.last().expect("at least one sample");
    let max_penetration = penetrations.iter().copied().fold(0.0, f64::max);
    // Last sample outside the ±5 % band; settled from the next sample on.
    let mut settled_from = 0usize;
    for (i, &d) in penetrations.iter().enumerate() {
        if (d - steady).abs() > SETTLING_BAND * steady.abs().max(1e-12) {
            settled_from = i + 1;
        }
    }
    let settling_time = settled_from as f64 * scenario.dt;

    Ok((
        trace,
        BallDropSummary {
            max_penetration,
            steady_penetration: steady,
            settling_time,
            halved_steps: halved,
        },
    ))
}

#[allow(clippy::too_many_arguments)]
fn sub_advance(
    z0: f64,
    v0: f64,
    h: f64,
    depth: u32,
    scenario: &BallScenario,
    eval_force: &dyn Fn(f64, f64) -> Result<f64, SimError>,
    barrier: Option<f64>,
    halved: &mut u64,
    t: f64,
) -> Result<(f64, f64), SimError> {
    let f = eval_force(z0, v0)?;
    let a = f / scenario.mass - scenario.gravity;
    let v_new = v0 + a * h;
    let z_new = z0 + v_new * h;
    if barrier.is_some_and(|lim| -z_new >= lim) {
        if depth >= MAX_STEP_HALVINGS {
            return Err(SimError::StepCollapse(t));
        }
        *halved += 1;
        let (z1, v1) = sub_advance(z0, v0, h / 2.0, depth + 1, scenario, eval_force, barrier, halved, t)?;
        sub_advance(z1, v1, h / 2.0, depth + 1, scenario, eval_force, barrier, halved, t)
    } else {
        Ok((z_new, v_new))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_models::{elastic_energy, presets, static_penetration};
    use approx::assert_relative_eq;

    #[test]
    fn touchdown_force_is_zero_for_zero_speed_contact() {
        for model in [presets::mclean_table1(), presets::tanbarrier_fig5()] {
            let scenario = BallScenario::new(10.0, 0.0, model);
            let (trace, _) = run_ball_drop(&scenario).unwrap();
            assert_eq!(trace.normal_force[0], 0.0);
        }
    }

    #[test]
    fn mclean_steady_penetration_matches_static_oracle() {
        let model = presets::mclean_table1();
        for mass in [10.0, 50.0] {
            let scenario = BallScenario::new(mass, 0.0, model.clone());
            let (_, summary) = run_ball_drop(&scenario).unwrap();
            let oracle = static_penetration(&model, mass * 9.81).unwrap();
            assert_relative_eq!(summary.steady_penetration, oracle, max_relative = 0.02);
        }
    }

    #[test]
    fn tanbarrier_steady_penetrations() {
        let model = presets::tanbarrier_fig5();
        let expected = [(10.0, 0.800e-3), (50.0, 1.658e-3)];
        for (mass, d_ref) in expected {
            let scenario = BallScenario::new(mass, 0.0, model.clone());
            let (_, summary) = run_ball_drop(&scenario).unwrap();
            assert_relative_eq!(summary.steady_penetration, d_ref, max_relative = 0.02);
        }
    }

    #[test]
    fn tanbarrier_settles_quickly_for_all_masses() {
        let model = presets::tanbarrier_fig5();
        for mass in [10.0, 20.0, 30.0, 40.0, 50.0] {
            let scenario = BallScenario::new(mass, 0.0, model.clone());
            let (_, summary) = run_ball_drop(&scenario).unwrap();
            assert!(
                summary.settling_time < 0.06,
                "mass {mass}: settling {:.4}s",
                summary.settling_time
            );
        }
    }

    #[test]
    fn mclean_settles_much_slower_at_50_kg() {
        let (_, tan) = run_ball_drop(&BallScenario::new(50.0, 0.0, presets::tanbarrier_fig5())).unwrap();
        let (_, mcl) = run_ball_drop(&BallScenario::new(50.0, 0.0, presets::mclean_table1())).unwrap();
        assert!(
            mcl.settling_time >= 2.0 * tan.settling_time,
            "mclean {:.4}s vs tanbarrier {:.4}s",
            mcl.settling_time,
            tan.settling_time
        );
    }

    #[test]
    fn barrier_holds_across_mass_velocity_grid() {
        // Full grid with the tabulated coefficients; the soft steady-state
        // set additionally over its representable velocity-sweep row (10 kg).
        // At 50 kg × 0.8 m/s the soft set would need a compression within
        // ~1e-41·l_0 of the barrier, which f64 cannot even represent.
        let model = presets::tanbarrier_table1_raw();
        for mass in [10.0, 20.0, 30.0, 40.0, 50.0] {
            for speed in [0.0, 0.2, 0.4, 0.6, 0.8] {
                let scenario = BallScenario::new(mass, speed, model.clone());
                let (_, summary) = run_ball_drop(&scenario).unwrap();
                assert!(
                    summary.max_penetration < 0.002,
                    "table1 m={mass} v={speed}: max pen {:.6} mm",
                    summary.max_penetration * 1e3
                );
            }
        }
        let soft = presets::tanbarrier_fig5();
        for speed in [0.0, 0.2, 0.4, 0.6, 0.8] {
            let scenario = BallScenario::new(10.0, speed, soft.clone());
            let (_, summary) = run_ball_drop(&scenario).unwrap();
            assert!(
                summary.max_penetration < 0.002,
                "fig5 m=10 v={speed}: max pen {:.6} mm",
                summary.max_penetration * 1e3
            );
        }
    }

    #[test]
    fn energy_never_increases_during_contact() {
        // KE + PE + stored elastic energy must be non-increasing up to the
        // integrator error bound.
        let model = presets::tanbarrier_fig5();
        let mut scenario = BallScenario::new(10.0, 0.5, model.clone());
        scenario.decimation = 1;
        let (trace, _) = run_ball_drop(&scenario).unwrap();
        let m = scenario.mass;
        let g = scenario.gravity;
        // Potential reference low enough that E stays positive.
        let z_ref = -0.005;
        let energy = |i: usize| {
            let z = trace.height[i];
            let v = trace.velocity[i];
            let d = (-z).max(0.0);
            0.5 * m * v * v + m * g * (z - z_ref) + elastic_energy(&model, d)
        };
        let e0 = energy(0);
        let tol = 1e-3 * e0;
        let mut prev = e0;
        for i in 1..trace.t.len() {
            let e = energy(i);
            assert!(
                e <= prev + tol,
                "energy rose from {prev:.6} to {e:.6} at t={}",
                trace.t[i]
            );
            prev = e;
        }
    }

    #[test]
    fn rejects_unstable_dt() {
        let mut scenario = BallScenario::new(10.0, 0.0, presets::tanbarrier_fig5());
        scenario.dt = 0.01;
        assert!(matches!(
            run_ball_drop(&scenario),
            Err(SimError::UnstableDt { .. })
        ));
    }

    #[test]
    fn determinism_bit_identical() {
        let scenario = BallScenario::new(30.0, 0.4, presets::tanbarrier_fig5());
        let (a, _) = run_ball_drop(&scenario).unwrap();
        let (b, _) = run_ball_drop(&scenario).unwrap();
        assert_eq!(a.height.len(), b.height.len());
        for i in 0..a.height.len() {
            assert_eq!(a.height[i].to_bits(), b.height[i].to_bits());
            assert_eq!(a.velocity[i].to_bits(), b.velocity[i].to_bits());
        }
    }
}
