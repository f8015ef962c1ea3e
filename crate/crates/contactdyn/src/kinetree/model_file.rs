//! Model description files.
//!
//! A model file is TOML with a versioned `format = 1` header, defining
//! links (mass, COM offset, inertia), joints (parent, child, type, axis,
//! origin) and gravity, plus optional foot sole geometry:
//!
//! ```toml
//! format = 1
//! name = "my-biped"
//! gravity = [0.0, 0.0, -9.81]
//!
//! [[links]]
//! name = "pelvis"
//! mass = 17.8
//! com = [0.0, 0.0, 0.0]
//! inertia_diag = [0.14, 0.09, 0.11]   # or inertia = [[..],[..],[..]]
//!
//! [[joints]]
//! name = "base"
//! parent = "world"
//! child = "pelvis"
//! type = "floating"
//! origin_xyz = [0.0, 0.0, 0.0]
//! origin_rpy = [0.0, 0.0, 0.0]
//!
//! [feet.left]
//! link = "l_foot"
//! sole_z = -0.098
//! corners = [[0.1325, 0.08], [0.1325, -0.08], [-0.1325, -0.08], [-0.1325, 0.08]]
//! reference = [0.0, 0.0]
//! ```
//!
//! `origin_rpy` is roll-pitch-yaw applied as `Rz(yaw)·Ry(pitch)·Rx(roll)`,
//! matching the floating-base coordinate convention.

use std::path::Path;

use nalgebra::{Isometry3, Matrix3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FootGeometry, FootId, Joint, JointKind, Link, ModelError, RigidBodyTree};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("io error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {source}")]
    Parse {
        path: String,
        source: Box<toml::de::Error>,
    },
    #[error("unsupported model file format {0} (expected {MODEL_FORMAT_VERSION})")]
    Format(u32),
    #[error("link `{0}` must specify exactly one of `inertia` or `inertia_diag`")]
    InertiaSpec(String),
    #[error("joint `{joint}` references unknown link `{link}`")]
    UnknownLink { joint: String, link: String },
    #[error("unknown joint type `{0}` (expected `floating` or `revolute`)")]
    JointType(String),
    #[error("revolute joint `{0}` is missing `axis`")]
    MissingAxis(String),
    #[error("foot `{0}` references unknown link `{1}`")]
    FootLink(String, String),
    #[error("feet section must define both `left` and `right`")]
    FeetIncomplete,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: u32,
    name: String,
    gravity: [f64; 3],
    links: Vec<LinkEntry>,
    joints: Vec<JointEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    feet: Option<FeetEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LinkEntry {
    name: String,
    mass: f64,
    com: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inertia: Option<[[f64; 3]; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    inertia_diag: Option<[f64; 3]>,
}

#[derive(Debug, Serialize, Deserialize)]
struct JointEntry {
    name: String,
    parent: String,
    child: String,
    #[serde(rename = "type")]
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<[f64; 3]>,
    #[serde(default = "zero3")]
    origin_xyz: [f64; 3],
    #[serde(default = "zero3")]
    origin_rpy: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct FeetEntry {
    left: FootEntry,
    right: FootEntry,
}

#[derive(Debug, Serialize, Deserialize)]
struct FootEntry {
    link: String,
    sole_z: f64,
    corners: Vec<[f64; 2]>,
    reference: [f64; 2],
}

fn zero3() -> [f64; 3] {
    [0.0; 3]
}

/// Load and validate a model file.
pub fn load_model_file(path: &Path) -> Result<RigidBodyTree, ModelFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_model(&text, &path.display().to_string())
}

pub fn parse_model(text: &str, origin: &str) -> Result<RigidBodyTree, ModelFileError> {
    let file: ModelFile = toml::from_str(text).map_err(|source| ModelFileError::Parse {
        path: origin.to_string(),
        source: Box::new(source),
    })?;
    if file.format != MODEL_FORMAT_VERSION {
        return Err(ModelFileError::Format(file.format));
    }
    let mut links = Vec::with_capacity(file.links.len());
    for entry in &file.links {
        let inertia = match (&entry.inertia, &entry.inertia_diag) {
            (Some(full), None) => Matrix3::from_fn(|r, c| full[r][c]),
            (None, Some(diag)) => Matrix3::from_diagonal(&Vector3::new(diag[0], diag[1], diag[2])),
            _ => return Err(ModelFileError::InertiaSpec(entry.name.clone())),
        };
        links.push(Link {
            name: entry.name.clone(),
            mass: entry.mass,
            com_offset: Vector3::from(entry.com),
            inertia,
        });
    }
    let link_id = |name: &str, joint: &str| -> Result<usize, ModelFileError> {
        links
            .iter()
            .position(|l| l.name == name)
            .ok_or_else(|| ModelFileError::UnknownLink {
                joint: joint.to_string(),
                link: name.to_string(),
            })
    };
    let mut joints = Vec::with_capacity(file.joints.len());
    for entry in &file.joints {
        let parent = if entry.parent == "world" {
            None
        } else {
            Some(link_id(&entry.parent, &entry.name)?)
        };
        let child = link_id(&entry.child, &entry.name)?;
        let kind = match entry.kind.as_str() {
            "floating" => JointKind::FloatingBase,
            "revolute" => {
                let axis = entry
                    .axis
                    .ok_or_else(|| ModelFileError::MissingAxis(entry.name.clone()))?;
                JointKind::Revolute {
                    axis: Vector3::from(axis),
                }
            }
            other => return Err(ModelFileError::JointType(other.to_string())),
        };
        let [r, p, y] = entry.origin_rpy;
        let origin = Isometry3::from_parts(
            Translation3::new(entry.origin_xyz[0], entry.origin_xyz[1], entry.origin_xyz[2]),
            UnitQuaternion::from_euler_angles(r, p, y),
        );
        joints.push(Joint {
            name: entry.name.clone(),
            parent,
            child,
            kind,
            origin,
        });
    }
    let feet = match &file.feet {
        Some(feet) => {
            let build = |f: &FootEntry, id: FootId| -> Result<FootGeometry, ModelFileError> {
                let link = links.iter().position(|l| l.name == f.link).ok_or_else(|| {
                    ModelFileError::FootLink(id.to_string(), f.link.clone())
                })?;
                Ok(FootGeometry {
                    link,
                    sole_z: f.sole_z,
                    corners: f
                        .corners
                        .iter()
                        .map(|c| Vector3::new(c[0], c[1], f.sole_z))
                        .collect(),
                    reference: Vector3::new(f.reference[0], f.reference[1], f.sole_z),
                })
            };
            Some([
                build(&feet.left, FootId::Left)?,
                build(&feet.right, FootId::Right)?,
            ])
        }
        None => None,
    };
    Ok(RigidBodyTree::new(
        file.name,
        links,
        joints,
        Vector3::from(file.gravity),
        feet,
    )?)
}

/// Serialize a tree back to the model file format.
pub fn save_model_file(tree: &RigidBodyTree, path: &Path) -> Result<(), ModelFileError> {
    let text = model_to_string(tree);
    std::fs::write(path, text).map_err(|source| ModelFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn model_to_string(tree: &RigidBodyTree) -> String {
    let links = tree
        .links()
        .iter()
        .map(|l| LinkEntry {
            name: l.name.clone(),
            mass: l.mass,
            com: l.com_offset.into(),
            inertia: Some([
                [l.inertia[(0, 0)], l.inertia[(0, 1)], l.inertia[(0, 2)]],
                [l.inertia[(1, 0)], l.inertia[(1, 1)], l.inertia[(1, 2)]],
                [l.inertia[(2, 0)], l.inertia[(2, 1)], l.inertia[(2, 2)]],
            ]),
            inertia_diag: None,
        })
        .collect();
    let joints = tree
        .joints()
        .iter()
        .map(|j| {
            let (kind, axis) = match &j.kind {
                JointKind::FloatingBase => ("floating".to_string(), None),
                JointKind::Revolute { axis } => ("revolute".to_string(), Some([axis.x, axis.y, axis.z])),
            };
            let (roll, pitch, yaw) = j.origin.rotation.euler_angles();
            JointEntry {
                name: j.name.clone(),
                parent: match j.parent {
                    Some(p) => tree.links()[p].name.clone(),
                    None => "world".to_string(),
                },
                child: tree.links()[j.child].name.clone(),
                kind,
                axis,
                origin_xyz: j.origin.translation.vector.into(),
                origin_rpy: [roll, pitch, yaw],
            }
        })
        .collect();
    let feet = if tree.has_feet() {
        let entry = |id: FootId| {
            let f = tree.foot(id).expect("has_feet checked");
            FootEntry {
                link: tree.links()[f.link].name.clone(),
                sole_z: f.sole_z,
                corners: f.corners.iter().map(|c| [c.x, c.y]).collect(),
                reference: [f.reference.x, f.reference.y],
            }
        };
        Some(FeetEntry {
            left: entry(FootId::Left),
            right: entry(FootId::Right),
        })
    } else {
        None
    };
    let file = ModelFile {
        format: MODEL_FORMAT_VERSION,
        name: tree.name().to_string(),
        gravity: tree.gravity().into(),
        links,
        joints,
        feet,
    };
    toml::to_string(&file).expect("model serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DVector;

    #[test]
    fn round_trip_preserves_dynamics() {
        let tree = super::super::presets::surena_lower();
        let text = model_to_string(&tree);
        let back = parse_model(&text, "inline").unwrap();
        assert_eq!(back.n_coords(), tree.n_coords());
        assert_relative_eq!(back.total_mass(), tree.total_mass(), epsilon = 1e-12);
        let mut q = DVector::zeros(tree.n_coords());
        for k in 0..q.len() {
            q[k] = 0.05 * (k as f64) - 0.2;
        }
        let m1 = tree.mass_matrix(&q).unwrap();
        let m2 = back.mass_matrix(&q).unwrap();
        assert_relative_eq!((&m1 - &m2).abs().max(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn format_version_is_checked() {
        let err = parse_model("format = 7\nname = \"x\"\ngravity=[0,0,-9.81]\nlinks=[]\njoints=[]\n", "inline")
            .unwrap_err();
        assert!(matches!(err, ModelFileError::Format(7)));
    }
}
