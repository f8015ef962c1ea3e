//! Built-in robot models.
//!
//! `surena-lower` is a 12-DOF lower body (two 6-DOF legs) plus a one-DOF
//! torso carrying the lumped upper body, 88 kg total. Masses and the main
//! geometric attributes follow the published data sheet of the source robot;
//! COM offsets and inertia tensors are filled in with uniform-density
//! box/cylinder approximations, and the three-axis hip cluster carries two
//! small structural links so that every link keeps a positive mass and a
//! positive-definite inertia.
//!
//! `planar5` is a five-link planar biped (torso, two thighs, two shanks with
//! point feet) useful for tests and small studies.

use nalgebra::{Isometry3, Matrix3, Vector3};

use super::{FootGeometry, Joint, JointKind, Link, RigidBodyTree};

/// Geometric constants of the `surena-lower` preset (meters, kilograms).
#[derive(Debug, Clone, Copy)]
pub struct SurenaDims {
    pub foot_length: f64,
    pub foot_width: f64,
    pub ankle_height: f64,
    pub shank_length: f64,
    pub thigh_length: f64,
    pub hip_spacing: f64,
    pub hip_drop: f64,
    pub mass_foot: f64,
    pub mass_ankle: f64,
    pub mass_shank: f64,
    pub mass_thigh: f64,
    pub mass_pelvis: f64,
    pub mass_upper: f64,
}

impl SurenaDims {
    pub const fn standard() -> Self {
        SurenaDims {
            foot_length: 0.265,
            foot_width: 0.160,
            ankle_height: 0.098,
            shank_length: 0.360,
            thigh_length: 0.360,
            hip_spacing: 0.230,
            hip_drop: 0.115,
            mass_foot: 3.859,
            mass_ankle: 2.236,
            mass_shank: 4.561,
            mass_thigh: 6.327,
            mass_pelvis: 17.800,
            mass_upper: 36.234,
        }
    }

    /// Pelvis height above the ground with straight legs and flat feet.
    pub fn nominal_pelvis_height(&self) -> f64 {
        self.ankle_height + self.shank_length + self.thigh_length + self.hip_drop
    }

    /// Mass of each small structural link in the three-axis hip cluster;
    /// taken out of the thigh budget so the totals still match.
    pub const HIP_CLUSTER_LINK_MASS: f64 = 0.3;

    pub fn thigh_link_mass(&self) -> f64 {
        self.mass_thigh - 2.0 * Self::HIP_CLUSTER_LINK_MASS
    }
}

fn box_inertia(m: f64, x: f64, y: f64, z: f64) -> Matrix3<f64> {
    Matrix3::from_diagonal(&Vector3::new(
        m / 12.0 * (y * y + z * z),
        m / 12.0 * (x * x + z * z),
        m / 12.0 * (x * x + y * y),
    ))
}

fn rod_inertia_z(m: f64, radius: f64, length: f64) -> Matrix3<f64> {
    let ixx = m * (3.0 * radius * radius + length * length) / 12.0;
    Matrix3::from_diagonal(&Vector3::new(ixx, ixx, 0.5 * m * radius * radius))
}

/// Names of the 13 actuated joints of `surena-lower`, in coordinate order.
pub const SURENA_JOINT_NAMES: [&str; 13] = [
    "torso_yaw",
    "l_hip_yaw",
    "l_hip_roll",
    "l_hip_pitch",
    "l_knee",
    "l_ankle_pitch",
    "l_ankle_roll",
    "r_hip_yaw",
    "r_hip_roll",
    "r_hip_pitch",
    "r_knee",
    "r_ankle_pitch",
    "r_ankle_roll",
];

/// 12-DOF lower body plus lumped upper body on a torso yaw joint.
pub fn surena_lower() -> RigidBodyTree {
    let d = SurenaDims::standard();
    let mut links = Vec::new();
    let mut joints = Vec::new();

    links.push(Link {
        name: "pelvis".into(),
        mass: d.mass_pelvis,
        com_offset: Vector3::zeros(),
        inertia: box_inertia(d.mass_pelvis, 0.15, 0.23, 0.20),
    });
    joints.push(Joint {
        name: "base".into(),
        parent: None,
        child: 0,
        kind: JointKind::FloatingBase,
        origin: Isometry3::identity(),
    });

    links.push(Link {
        name: "upper_body".into(),
        mass: d.mass_upper,
        com_offset: Vector3::new(0.0, 0.0, 0.45),
        inertia: box_inertia(d.mass_upper, 0.30, 0.45, 0.80),
    });
    joints.push(Joint {
        name: "torso_yaw".into(),
        parent: Some(0),
        child: 1,
        kind: JointKind::Revolute { axis: Vector3::z() },
        origin: Isometry3::identity(),
    });

    let mut leg = |side: &str, sign: f64, first_link: usize| {
        let hip = Vector3::new(0.0, sign * d.hip_spacing / 2.0, -d.hip_drop);
        let small = Matrix3::from_diagonal(&Vector3::new(5e-4, 5e-4, 5e-4));
        links.push(Link {
            name: format!("{side}_hip_a"),
            mass: SurenaDims::HIP_CLUSTER_LINK_MASS,
            com_offset: Vector3::zeros(),
            inertia: small,
        });
        joints.push(Joint {
            name: format!("{side}_hip_yaw"),
            parent: Some(0),
            child: first_link,
            kind: JointKind::Revolute { axis: Vector3::z() },
            origin: Isometry3::translation(hip.x, hip.y, hip.z),
        });
        links.push(Link {
            name: format!("{side}_hip_b"),
            mass: SurenaDims::HIP_CLUSTER_LINK_MASS,
            com_offset: Vector3::zeros(),
            inertia: small,
        });
        joints.push(Joint {
            name: format!("{side}_hip_roll"),
            parent: Some(first_link),
            child: first_link + 1,
            kind: JointKind::Revolute { axis: Vector3::x() },
            origin: Isometry3::identity(),
        });
        links.push(Link {
            name: format!("{side}_thigh"),
            mass: d.thigh_link_mass(),
            com_offset: Vector3::new(0.0, 0.0, -d.thigh_length / 2.0),
            inertia: rod_inertia_z(d.thigh_link_mass(), 0.06, d.thigh_length),
        });
        joints.push(Joint {
            name: format!("{side}_hip_pitch"),
            parent: Some(first_link + 1),
            child: first_link + 2,
            kind: JointKind::Revolute { axis: Vector3::y() },
            origin: Isometry3::identity(),
        });
        links.push(Link {
            name: format!("{side}_shank"),
            mass: d.mass_shank,
            com_offset: Vector3::new(0.0, 0.0, -d.shank_length / 2.0),
            inertia: rod_inertia_z(d.mass_shank, 0.055, d.shank_length),
        });
        joints.push(Joint {
            name: format!("{side}_knee"),
            parent: Some(first_link + 2),
            child: first_link + 3,
            kind: JointKind::Revolute { axis: Vector3::y() },
            origin: Isometry3::translation(0.0, 0.0, -d.thigh_length),
        });
        links.push(Link {
            name: format!("{side}_ankle"),
            mass: d.mass_ankle,
            com_offset: Vector3::zeros(),
            inertia: Matrix3::from_diagonal(&Vector3::new(4e-3, 4e-3, 3e-3)),
        });
        joints.push(Joint {
            name: format!("{side}_ankle_pitch"),
            parent: Some(first_link + 3),
            child: first_link + 4,
            kind: JointKind::Revolute { axis: Vector3::y() },
            origin: Isometry3::translation(0.0, 0.0, -d.shank_length),
        });
        links.push(Link {
            name: format!("{side}_foot"),
            mass: d.mass_foot,
            com_offset: Vector3::new(0.0, 0.0, -d.ankle_height / 2.0),
            inertia: box_inertia(d.mass_foot, d.foot_length, d.foot_width, d.ankle_height),
        });
        joints.push(Joint {
            name: format!("{side}_ankle_roll"),
            parent: Some(first_link + 4),
            child: first_link + 5,
            kind: JointKind::Revolute { axis: Vector3::x() },
            origin: Isometry3::identity(),
        });
    };

    leg("l", 1.0, 2);
    leg("r", -1.0, 8);

    let foot_geometry = |link: usize| FootGeometry {
        link,
        sole_z: -d.ankle_height,
        corners: vec![
            Vector3::new(d.foot_length / 2.0, d.foot_width / 2.0, -d.ankle_height),
            Vector3::new(d.foot_length / 2.0, -d.foot_width / 2.0, -d.ankle_height),
            Vector3::new(-d.foot_length / 2.0, -d.foot_width / 2.0, -d.ankle_height),
            Vector3::new(-d.foot_length / 2.0, d.foot_width / 2.0, -d.ankle_height),
        ],
        reference: Vector3::new(0.0, 0.0, -d.ankle_height),
    };

    RigidBodyTree::new(
        "surena-lower",
        links,
        joints,
        Vector3::new(0.0, 0.0, -9.81),
        Some([foot_geometry(7), foot_geometry(13)]),
    )
    .expect("built-in preset must validate")
}

/// Five-link planar biped: torso with two thigh+shank legs, point feet.
/// All joints pitch about +y, so motion started in the x–z plane stays there.
pub fn planar5() -> RigidBodyTree {
    let thigh_len = 0.45;
    let shank_len = 0.45;
    let mut links = vec![Link {
        name: "torso".into(),
        mass: 20.0,
        com_offset: Vector3::new(0.0, 0.0, 0.20),
        inertia: box_inertia(20.0, 0.20, 0.30, 0.60),
    }];
    let mut joints = vec![Joint {
        name: "base".into(),
        parent: None,
        child: 0,
        kind: JointKind::FloatingBase,
        origin: Isometry3::identity(),
    }];
    for (side, sign) in [("l", 1.0), ("r", -1.0)] {
        let thigh_id = links.len();
        links.push(Link {
            name: format!("{side}_thigh"),
            mass: 5.0,
            com_offset: Vector3::new(0.0, 0.0, -thigh_len / 2.0),
            inertia: rod_inertia_z(5.0, 0.05, thigh_len),
        });
        joints.push(Joint {
            name: format!("{side}_hip"),
            parent: Some(0),
            child: thigh_id,
            kind: JointKind::Revolute { axis: Vector3::y() },
            origin: Isometry3::translation(0.0, sign * 0.05, 0.0),
        });
        links.push(Link {
            name: format!("{side}_shank"),
            mass: 3.0,
            com_offset: Vector3::new(0.0, 0.0, -shank_len / 2.0),
            inertia: rod_inertia_z(3.0, 0.04, shank_len),
        });
        joints.push(Joint {
            name: format!("{side}_knee"),
            parent: Some(thigh_id),
            child: thigh_id + 1,
            kind: JointKind::Revolute { axis: Vector3::y() },
            origin: Isometry3::translation(0.0, 0.0, -thigh_len),
        });
    }
    let point_foot = |link: usize| FootGeometry {
        link,
        sole_z: -shank_len,
        corners: vec![
            Vector3::new(0.02, 0.01, -shank_len),
            Vector3::new(0.02, -0.01, -shank_len),
            Vector3::new(-0.02, -0.01, -shank_len),
            Vector3::new(-0.02, 0.01, -shank_len),
        ],
        reference: Vector3::new(0.0, 0.0, -shank_len),
    };
    RigidBodyTree::new(
        "planar5",
        links,
        joints,
        Vector3::new(0.0, 0.0, -9.81),
        Some([point_foot(2), point_foot(4)]),
    )
    .expect("built-in preset must validate")
}
