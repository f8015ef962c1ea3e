//! Rigid-contact constrained inverse dynamics over the bundled gait:
//! unique single-support solves, minimum-norm double-support solves, and
//! the per-sample certificates (residual, row-space membership, global
//! Newton–Euler balance, ZMP containment).
//!
//! Run with `cargo run --release --example rigid_invdyn`.

use contactdyn::gait::{GaitParams, GaitPlan, SupportPhase};
use contactdyn::kinetree::{presets, GeneralizedState};
use contactdyn::rigid_contact::{
    dsp_inverse_dynamics, momentum_balance_residual, ssp_inverse_dynamics, zmp_from_wrenches,
};
use contactdyn::FootId;

fn main() {
    let tree = presets::surena_lower();
    let plan = GaitPlan::new(&tree, GaitParams::walk_half_kmh(6)).expect("gait plan");
    let (w0, w1) = plan.walk_window();
    let dt = 0.01;
    let n = ((w1 - w0) / dt) as usize + 1;

    let mut max_residual = 0.0f64;
    let mut max_certificate = 0.0f64;
    let mut max_balance = 0.0f64;
    let mut min_margin = f64::INFINITY;
    let mut peak_tau = 0.0f64;

    for i in 0..n {
        let t = w0 + i as f64 * dt;
        let s = plan.sample(t).expect("sample");
        let state = GeneralizedState::new(s.q.clone(), s.qd.clone(), s.qdd.clone(), t).unwrap();
        let (tau, wrenches) = match s.phase {
            SupportPhase::Dsp => {
                let sol = dsp_inverse_dynamics(&tree, &state).expect("dsp solve");
                max_certificate = max_certificate.max(sol.min_norm_certificate);
                max_residual = max_residual.max(sol.residual);
                (sol.tau, vec![sol.left, sol.right])
            }
            SupportPhase::SspLeft | SupportPhase::SspRight => {
                let stance = if s.phase == SupportPhase::SspLeft {
                    FootId::Left
                } else {
                    FootId::Right
                };
                let sol = ssp_inverse_dynamics(&tree, &state, stance).expect("ssp solve");
                max_residual = max_residual.max(sol.residual);
                (sol.tau, vec![sol.wrench])
            }
        };
        peak_tau = peak_tau.max(tau.amax());
        let balance = momentum_balance_residual(&tree, &state, &wrenches).unwrap();
        max_balance = max_balance.max(balance.norm());
        let zmp = zmp_from_wrenches(&wrenches, 0.0).expect("loaded stance");
        let polygon = plan.support_polygon_at(t, &s.q).unwrap();
        min_margin = min_margin.min(polygon.signed_margin(&zmp));
    }

    println!("{n} samples over the walking window [{w0:.2}, {w1:.2}] s");
    println!("max solve residual:        {max_residual:.3e}");
    println!("max min-norm certificate:  {max_certificate:.3e}");
    println!("max Newton-Euler balance:  {max_balance:.3e} N");
    println!("min ZMP polygon margin:    {min_margin:.4} m");
    println!("peak joint torque:         {peak_tau:.1} N·m");
}
