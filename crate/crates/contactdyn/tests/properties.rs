//! Property tests for the contact-law invariants and the inertia-matrix
//! shape guarantees.

use contactdyn::contact_models::{
    friction_force, normal_force, ContactPointState, FrictionModel, NormalModel,
};
use contactdyn::kinetree::presets;
use nalgebra::{DVector, Vector2};
use proptest::prelude::*;

fn models_for(d: f64) -> Vec<NormalModel> {
    // Keep the barrier model inside its domain.
    NormalModel::all_defaults()
        .into_iter()
        .filter(|m| match m {
            NormalModel::TanBarrier { l_0, .. } => d < *l_0,
            _ => true,
        })
        .collect()
}

proptest! {
    /// Penalty contact never pulls, whatever the penetration rate.
    #[test]
    fn normal_force_is_unilateral(
        d in 0.0..1.9e-3f64,
        rate in -5.0..5.0f64,
    ) {
        let cp = ContactPointState {
            penetration: d,
            rate,
            tangential: Vector2::zeros(),
        };
        for model in models_for(d) {
            let f = normal_force(&model, &cp).unwrap();
            prop_assert!(f >= 0.0, "{} pulled with {f}", model.name());
        }
    }

    /// The smooth friction law is odd in the tangential velocity, grows
    /// monotonically with speed, and never exceeds the Coulomb bound.
    #[test]
    fn pseudo_coulomb_shape(
        vx in -2.0..2.0f64,
        vy in -2.0..2.0f64,
        f_n in 0.0..500.0f64,
        scale in 1.01..4.0f64,
    ) {
        let model = FrictionModel::PseudoCoulomb { mu: 0.8, lambda: 0.01 };
        let v = Vector2::new(vx, vy);
        let f = friction_force(&model, f_n, &v);
        let f_neg = friction_force(&model, f_n, &(-v));
        prop_assert!((f + f_neg).norm() < 1e-12, "not odd");
        prop_assert!(f.norm() <= 0.8 * f_n + 1e-12, "exceeds Coulomb bound");
        let f_fast = friction_force(&model, f_n, &(v * scale));
        prop_assert!(f_fast.norm() + 1e-12 >= f.norm(), "not monotone in speed");
    }

    /// All three friction laws scale linearly with the normal load.
    #[test]
    fn friction_proportional_to_normal_load(
        vx in -1.0..1.0f64,
        vy in -1.0..1.0f64,
        f_n in 0.1..400.0f64,
        factor in 0.1..10.0f64,
    ) {
        let v = Vector2::new(vx, vy);
        for model in [
            FrictionModel::PseudoCoulomb { mu: 0.8, lambda: 0.01 },
            FrictionModel::SignCoulomb { mu_low: 0.8, mu_high: 0.2, threshold: 0.05 },
            FrictionModel::Juhasz { mu_dyn: 0.7, mu_stat: 0.9, v_st: 0.1 },
        ] {
            let f1 = friction_force(&model, f_n, &v);
            let f2 = friction_force(&model, factor * f_n, &v);
            prop_assert!(
                (f2 - f1 * factor).norm() <= 1e-9 * f2.norm().max(1.0),
                "{} not linear in F_N",
                model.name()
            );
        }
    }

    /// The smooth law is continuous through zero velocity.
    #[test]
    fn pseudo_coulomb_vanishes_at_rest(speed in 1e-12..1e-6f64) {
        let model = FrictionModel::PseudoCoulomb { mu: 0.8, lambda: 0.01 };
        let f = friction_force(&model, 100.0, &Vector2::new(speed, 0.0));
        prop_assert!(f.norm() < 1e-2);
    }
}

/// Point Jacobians of every link agree with central differences of the
/// forward kinematics at 1e-6, over 100 random states.
#[test]
fn all_link_jacobians_match_finite_differences() {
    let tree = presets::surena_lower();
    let n = tree.n_coords();
    let n_links = tree.links().len();
    let mut rng = 0xFEED_u64;
    let mut rnd = move || {
        rng ^= rng << 13;
        rng ^= rng >> 7;
        rng ^= rng << 17;
        (rng as f64 / u64::MAX as f64) * 2.0 - 1.0
    };
    let point = nalgebra::Vector3::new(0.03, -0.02, -0.05);
    for _ in 0..100 {
        let mut q = DVector::zeros(n);
        let mut qd = DVector::zeros(n);
        for k in 0..n {
            q[k] = 0.7 * rnd();
            qd[k] = rnd();
        }
        q[4] *= 0.9;
        let h = 1e-7;
        let fk_p = tree.forward_kinematics(&(&q + &qd * h)).unwrap();
        let fk_m = tree.forward_kinematics(&(&q - &qd * h)).unwrap();
        for link in 0..n_links {
            let jac = tree.point_jacobian(&q, link, &point).unwrap();
            let jqd = &jac * &qd;
            let pp = fk_p[link] * nalgebra::Point3::from(point);
            let pm = fk_m[link] * nalgebra::Point3::from(point);
            let v_fd = (pp - pm) / (2.0 * h);
            for r in 0..3 {
                assert!(
                    (jqd[r] - v_fd[r]).abs() < 1e-6,
                    "link {link} row {r}: {} vs {}",
                    jqd[r],
                    v_fd[r]
                );
            }
        }
    }
}

/// The joint-space inertia matrix stays symmetric positive definite over
/// 1000 random configurations of each preset.
#[test]
fn mass_matrix_spd_1000_samples_per_preset() {
    for tree in [presets::surena_lower(), presets::planar5()] {
        let n = tree.n_coords();
        let mut rng = 0xC0FFEE_u64;
        let mut rnd = move || {
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng as f64 / u64::MAX as f64) * 2.0 - 1.0
        };
        for _ in 0..1000 {
            let mut q = DVector::zeros(n);
            for k in 0..n {
                q[k] = 1.3 * rnd();
            }
            q[4] = q[4].clamp(-1.45, 1.45);
            let m = tree.mass_matrix(&q).unwrap();
            let asym = (&m - &m.transpose()).abs().max();
            assert!(asym < 1e-10, "{}: asymmetry {asym}", tree.name());
            assert!(
                m.clone().cholesky().is_some(),
                "{}: not positive definite",
                tree.name()
            );
        }
    }
}
