//! Spatial (6-D) vector algebra in world coordinates.
//!
//! Motion and force vectors use Plücker coordinates about the world origin:
//! a motion vector pairs the body's angular velocity with the velocity of the
//! body-fixed point instantaneously coincident with the origin, and a force
//! vector pairs the moment about the origin with the net linear force.
//! Keeping everything in one fixed frame means no coordinate transforms are
//! needed inside the dynamics recursions.

use nalgebra::{Matrix3, Vector3};

/// Spatial motion vector (angular; linear-at-origin).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialMotion {
    pub ang: Vector3<f64>,
    pub lin: Vector3<f64>,
}

/// Spatial force vector (moment-about-origin; linear force).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialForce {
    pub ang: Vector3<f64>,
    pub lin: Vector3<f64>,
}

impl SpatialMotion {
    pub const ZERO: SpatialMotion = SpatialMotion {
        ang: Vector3::new(0.0, 0.0, 0.0),
        lin: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(ang: Vector3<f64>, lin: Vector3<f64>) -> Self {
        Self { ang, lin }
    }

    /// Motion-cross-motion product: `self × other`.
    pub fn cross_motion(&self, other: &SpatialMotion) -> SpatialMotion {
        SpatialMotion {
            ang: self.ang.cross(&other.ang),
            lin: self.ang.cross(&other.lin) + self.lin.cross(&other.ang),
        }
    }

    /// Motion-cross-force product: `self ×* force`.
    pub fn cross_force(&self, f: &SpatialForce) -> SpatialForce {
        SpatialForce {
            ang: self.ang.cross(&f.ang) + self.lin.cross(&f.lin),
            lin: self.ang.cross(&f.lin),
        }
    }

    /// Power pairing with a force vector.
    pub fn dot(&self, f: &SpatialForce) -> f64 {
        self.ang.dot(&f.ang) + self.lin.dot(&f.lin)
    }

    /// Conventional velocity of the body point currently at world position `p`.
    pub fn velocity_at(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.lin + self.ang.cross(p)
    }

    pub fn scale(&self, s: f64) -> SpatialMotion {
        SpatialMotion {
            ang: self.ang * s,
            lin: self.lin * s,
        }
    }
}

impl std::ops::Add for SpatialMotion {
    type Output = SpatialMotion;
    fn add(self, rhs: SpatialMotion) -> SpatialMotion {
        SpatialMotion {
            ang: self.ang + rhs.ang,
            lin: self.lin + rhs.lin,
        }
    }
}

impl std::ops::Sub for SpatialMotion {
    type Output = SpatialMotion;
    fn sub(self, rhs: SpatialMotion) -> SpatialMotion {
        SpatialMotion {
            ang: self.ang - rhs.ang,
            lin: self.lin - rhs.lin,
        }
    }
}

impl SpatialForce {
    pub const ZERO: SpatialForce = SpatialForce {
        ang: Vector3::new(0.0, 0.0, 0.0),
        lin: Vector3::new(0.0, 0.0, 0.0),
    };

    pub fn new(ang: Vector3<f64>, lin: Vector3<f64>) -> Self {
        Self { ang, lin }
    }

    /// Spatial force equivalent to a pure force `f` applied at world point `p`
    /// together with a couple `moment`.
    pub fn at_point(p: &Vector3<f64>, f: &Vector3<f64>, moment: &Vector3<f64>) -> Self {
        SpatialForce {
            ang: moment + p.cross(f),
            lin: *f,
        }
    }
}

impl std::ops::Add for SpatialForce {
    type Output = SpatialForce;
    fn add(self, rhs: SpatialForce) -> SpatialForce {
        SpatialForce {
            ang: self.ang + rhs.ang,
            lin: self.lin + rhs.lin,
        }
    }
}

impl std::ops::Sub for SpatialForce {
    type Output = SpatialForce;
    fn sub(self, rhs: SpatialForce) -> SpatialForce {
        SpatialForce {
            ang: self.ang - rhs.ang,
            lin: self.lin - rhs.lin,
        }
    }
}

/// Rigid-body inertia expressed about the world origin.
///
/// Stored as total mass, first mass moment `h = m·c` (c the world COM
/// position) and the 3×3 rotational inertia about the origin. The
/// representation is additive, which is what the composite-rigid-body
/// recursion needs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialInertia {
    pub mass: f64,
    pub h: Vector3<f64>,
    pub i_origin: Matrix3<f64>,
}

impl SpatialInertia {
    pub const ZERO: SpatialInertia = SpatialInertia {
        mass: 0.0,
        h: Vector3::new(0.0, 0.0, 0.0),
        i_origin: Matrix3::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    };

    /// Build from mass, world COM position and rotational inertia about the
    /// COM expressed in world axes.
    pub fn from_com(mass: f64, com: &Vector3<f64>, i_com_world: &Matrix3<f64>) -> Self {
        let cx = skew(com);
        SpatialInertia {
            mass,
            h: mass * com,
            i_origin: i_com_world + mass * cx * cx.transpose(),
        }
    }

    /// Apply the inertia to a motion vector (momentum, or force for an
    /// acceleration argument).
    pub fn apply(&self, m: &SpatialMotion) -> SpatialForce {
        SpatialForce {
            ang: self.i_origin * m.ang + self.h.cross(&m.lin),
            lin: self.mass * m.lin - self.h.cross(&m.ang),
        }
    }
}

impl std::ops::Add for SpatialInertia {
    type Output = SpatialInertia;
    fn add(self, rhs: SpatialInertia) -> SpatialInertia {
        SpatialInertia {
            mass: self.mass + rhs.mass,
            h: self.h + rhs.h,
            i_origin: self.i_origin + rhs.i_origin,
        }
    }
}

/// Skew-symmetric cross-product matrix of `v`.
pub fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}
