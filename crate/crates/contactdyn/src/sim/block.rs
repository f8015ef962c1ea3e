//! Sliding block on a frictional surface: the minimal scenario separating
//! regularized from discontinuous friction laws. A discontinuous sign-law
//! chatters around zero velocity at any fixed step size; the smooth
//! atan-regularized law decays to rest without force sign flips.

use crate::contact_models::{friction_force, FrictionModel};
use nalgebra::Vector2;

#[derive(Debug, Clone)]
pub struct SlidingBlockTrace {
    pub t: Vec<f64>,
    pub velocity: Vec<f64>,
    pub friction: Vec<f64>,
    /// Index where the block first enters the stick regime.
    pub stick_index: Option<usize>,
    /// Friction-force sign changes from the stick onset to the end.
    pub sign_changes_in_stick: usize,
}

/// Simulate a block of mass `m` sliding at `v0` (m/s) under the friction
/// law and normal load `m·g`, with explicit fixed steps.
pub fn run_sliding_block(
    model: &FrictionModel,
    mass: f64,
    v0: f64,
    dt: f64,
    duration: f64,
) -> SlidingBlockTrace {
    let g = 9.81;
    let f_n = mass * g;
    let n = (duration / dt).round() as usize;
    let mut v = v0;
    let mut trace = SlidingBlockTrace {
        t: Vec::with_capacity(n + 1),
        velocity: Vec::with_capacity(n + 1),
        friction: Vec::with_capacity(n + 1),
        stick_index: None,
        sign_changes_in_stick: 0,
    };
    // Velocities below one step's worth of friction deceleration cannot be
    // resolved by the integrator: that is the stick regime.
    let v_stick = 0.8 * g * dt * 2.0;
    for i in 0..=n {
        let f = friction_force(model, f_n, &Vector2::new(v, 0.0)).x;
        trace.t.push(i as f64 * dt);
        trace.velocity.push(v);
        trace.friction.push(f);
        if trace.stick_index.is_none() && v.abs() < v_stick {
            trace.stick_index = Some(i);
        }
        v += f / mass * dt;
    }
    if let Some(start) = trace.stick_index {
        let mut changes = 0;
        let mut last_sign = 0i8;
        for &f in &trace.friction[start..] {
            let sign = if f > 0.0 {
                1
            } else if f < 0.0 {
                -1
            } else {
                0
            };
            if sign != 0 {
                if last_sign != 0 && sign != last_sign {
                    changes += 1;
                }
                last_sign = sign;
            }
        }
        trace.sign_changes_in_stick = changes;
    }
    trace
}
