//! Contact model parameter files.
//!
//! TOML with a `format = 1` header mapping a model name to its coefficients:
//!
//! ```toml
//! format = 1
//!
//! [normal]
//! model = "tan-barrier"
//! k_z = 135.0
//! b_z = 3.2e6
//! l_0 = 0.002
//!
//! [friction]
//! model = "pseudo-coulomb"
//! mu = 0.8
//! lambda = 0.01
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{FrictionModel, NormalModel, StiffnessProfile};

pub const PARAMS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ParamsFileError {
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
    #[error("unsupported params file format {0} (expected {PARAMS_FORMAT_VERSION})")]
    Format(u32),
    #[error("unknown {section} model `{name}`")]
    UnknownModel { section: &'static str, name: String },
    #[error("{section} model `{model}` is missing coefficient `{key}`")]
    MissingCoefficient {
        section: &'static str,
        model: String,
        key: &'static str,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct ParamsFile {
    format: u32,
    normal: Section,
    friction: Section,
}

#[derive(Debug, Serialize, Deserialize)]
struct Section {
    model: String,
    #[serde(flatten)]
    coefficients: BTreeMap<String, f64>,
}

fn coeff(
    s: &Section,
    section: &'static str,
    key: &'static str,
) -> Result<f64, ParamsFileError> {
    s.coefficients
        .get(key)
        .copied()
        .ok_or(ParamsFileError::MissingCoefficient {
            section,
            model: s.model.clone(),
            key,
        })
}

pub fn parse_params(text: &str, origin: &str) -> Result<(NormalModel, FrictionModel), ParamsFileError> {
    let file: ParamsFile = toml::from_str(text).map_err(|source| ParamsFileError::Parse {
        path: origin.to_string(),
        source: Box::new(source),
    })?;
    if file.format != PARAMS_FORMAT_VERSION {
        return Err(ParamsFileError::Format(file.format));
    }
    let n = &file.normal;
    let normal = match n.model.as_str() {
        "linear" => NormalModel::Linear {
            k_z: coeff(n, "normal", "k_z")?,
            c_z: coeff(n, "normal", "c_z")?,
        },
        "wojtyra" => NormalModel::WojtyraDamping {
            k_z: coeff(n, "normal", "k_z")?,
            c_max: coeff(n, "normal", "c_max")?,
            h: coeff(n, "normal", "h")?,
        },
        "mclean" => NormalModel::McLean {
            k_z: coeff(n, "normal", "k_z")?,
            b_z: coeff(n, "normal", "b_z")?,
        },
        "jackson" => NormalModel::Jackson {
            k_z: coeff(n, "normal", "k_z")?,
            c_z: coeff(n, "normal", "c_z")?,
        },
        "park-kwon" => NormalModel::ParkKwon {
            alpha: coeff(n, "normal", "alpha")?,
            stiffness: StiffnessProfile::Constant(coeff(n, "normal", "k_z")?),
        },
        "millard" => NormalModel::Millard {
            k_z: coeff(n, "normal", "k_z")?,
            restitution: coeff(n, "normal", "restitution")?,
            impact_speed: coeff(n, "normal", "impact_speed")?,
        },
        "tan-barrier" => NormalModel::TanBarrier {
            k_z: coeff(n, "normal", "k_z")?,
            b_z: coeff(n, "normal", "b_z")?,
            l_0: coeff(n, "normal", "l_0")?,
        },
        other => {
            return Err(ParamsFileError::UnknownModel {
                section: "normal",
                name: other.to_string(),
            })
        }
    };
    let f = &file.friction;
    let friction = match f.model.as_str() {
        "sign-coulomb" => FrictionModel::SignCoulomb {
            mu_low: coeff(f, "friction", "mu_low")?,
            mu_high: coeff(f, "friction", "mu_high")?,
            threshold: coeff(f, "friction", "threshold")?,
        },
        "pseudo-coulomb" => FrictionModel::PseudoCoulomb {
            mu: coeff(f, "friction", "mu")?,
            lambda: coeff(f, "friction", "lambda")?,
        },
        "juhasz" => FrictionModel::Juhasz {
            mu_dyn: coeff(f, "friction", "mu_dyn")?,
            mu_stat: coeff(f, "friction", "mu_stat")?,
            v_st: coeff(f, "friction", "v_st")?,
        },
        other => {
            return Err(ParamsFileError::UnknownModel {
                section: "friction",
                name: other.to_string(),
            })
        }
    };
    Ok((normal, friction))
}

pub fn load_params_file(path: &Path) -> Result<(NormalModel, FrictionModel), ParamsFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| ParamsFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_params(&text, &path.display().to_string())
}

pub fn params_to_string(normal: &NormalModel, friction: &FrictionModel) -> String {
    let mut nmap = BTreeMap::new();
    match normal {
        NormalModel::Linear { k_z, c_z } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("c_z".into(), *c_z);
        }
        NormalModel::WojtyraDamping { k_z, c_max, h } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("c_max".into(), *c_max);
            nmap.insert("h".into(), *h);
        }
        NormalModel::McLean { k_z, b_z } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("b_z".into(), *b_z);
        }
        NormalModel::Jackson { k_z, c_z } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("c_z".into(), *c_z);
        }
        NormalModel::ParkKwon { alpha, stiffness } => {
            nmap.insert("alpha".into(), *alpha);
            if let StiffnessProfile::Constant(k) = stiffness {
                nmap.insert("k_z".into(), *k);
            }
        }
        NormalModel::Millard {
            k_z,
            restitution,
            impact_speed,
        } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("restitution".into(), *restitution);
            nmap.insert("impact_speed".into(), *impact_speed);
        }
        NormalModel::TanBarrier { k_z, b_z, l_0 } => {
            nmap.insert("k_z".into(), *k_z);
            nmap.insert("b_z".into(), *b_z);
            nmap.insert("l_0".into(), *l_0);
        }
    }
    let mut fmap = BTreeMap::new();
    match friction {
        FrictionModel::SignCoulomb {
            mu_low,
            mu_high,
            threshold,
        } => {
            fmap.insert("mu_low".into(), *mu_low);
            fmap.insert("mu_high".into(), *mu_high);
            fmap.insert("threshold".into(), *threshold);
        }
        FrictionModel::PseudoCoulomb { mu, lambda } => {
            fmap.insert("mu".into(), *mu);
            fmap.insert("lambda".into(), *lambda);
        }
        FrictionModel::Juhasz {
            mu_dyn,
            mu_stat,
            v_st,
        } => {
            fmap.insert("mu_dyn".into(), *mu_dyn);
            fmap.insert("mu_stat".into(), *mu_stat);
            fmap.insert("v_st".into(), *v_st);
        }
    }
    let file = ParamsFile {
        format: PARAMS_FORMAT_VERSION,
        normal: Section {
            model: normal.name().to_string(),
            coefficients: nmap,
        },
        friction: Section {
            model: friction.name().to_string(),
            coefficients: fmap,
        },
    };
    toml::to_string(&file).expect("params serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_models::presets;

    #[test]
    fn round_trip() {
        let n = presets::tanbarrier_fig5();
        let f = presets::pseudo_coulomb(0.8);
        let text = params_to_string(&n, &f);
        let (n2, f2) = parse_params(&text, "inline").unwrap();
        assert_eq!(params_to_string(&n2, &f2), text);
    }

    #[test]
    fn missing_coefficient_is_reported() {
        let text = "format = 1\n[normal]\nmodel = \"mclean\"\nk_z = 1.0\n[friction]\nmodel = \"pseudo-coulomb\"\nmu = 0.8\nlambda = 0.01\n";
        let err = parse_params(text, "inline").unwrap_err();
        assert!(matches!(
            err,
            ParamsFileError::MissingCoefficient { key: "b_z", .. }
        ));
    }
}
