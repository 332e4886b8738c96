//! Run configuration files. The JSON schema is documented in `configs/README.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::numerics::OdeSpec;
use crate::rat1::{LumpState, LumpStateDoc};
use crate::ratn::PotentialMode;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("config is for '{found}', expected '{expected}'")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("invalid parameter: {0}")]
    Invalid(String),
}

/// Optional integrator overrides.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
}

impl Tolerances {
    /// Values present in `other` win.
    pub fn merged(self, other: Tolerances) -> Tolerances {
        Tolerances {
            abs_tol: other.abs_tol.or(self.abs_tol),
            rel_tol: other.rel_tol.or(self.rel_tol),
            max_step: other.max_step.or(self.max_step),
            max_steps: other.max_steps.or(self.max_steps),
        }
    }

    pub fn ode_spec(&self) -> Result<OdeSpec, ConfigError> {
        let mut spec = OdeSpec::default();
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol), ("max_step", self.max_step)] {
            if let Some(v) = v {
                if !(v > 0.0) {
                    return Err(ConfigError::Invalid(format!("{name} = {v} must be positive")));
                }
            }
        }
        if let Some(v) = self.abs_tol {
            spec.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            spec.rel_tol = v;
        }
        if let Some(v) = self.max_step {
            spec.max_step = v;
        }
        if let Some(v) = self.max_steps {
            if v == 0 {
                return Err(ConfigError::Invalid("max_steps must be positive".into()));
            }
            spec.max_steps = v;
        }
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Hyp2Flow {
    #[default]
    Extrinsic,
    Intrinsic,
    Geodesic,
}

impl std::str::FromStr for Hyp2Flow {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "extrinsic" => Ok(Hyp2Flow::Extrinsic),
            "intrinsic" => Ok(Hyp2Flow::Intrinsic),
            "geodesic" => Ok(Hyp2Flow::Geodesic),
            other => Err(format!("unknown flow '{other}' (expected extrinsic, intrinsic or geodesic)")),
        }
    }
}

fn default_samples() -> usize {
    1001
}

fn default_charge() -> f64 {
    1.0
}

fn default_chi0() -> f64 {
    1.0
}

fn default_n() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Hyp2Config {
    #[serde(default)]
    pub flow: Hyp2Flow,
    pub s0: f64,
    #[serde(default)]
    pub psi0: f64,
    #[serde(default)]
    pub sdot0: f64,
    #[serde(default)]
    pub psidot0: f64,
    #[serde(default = "default_charge")]
    pub charge: f64,
    pub tmax: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Append Poincaré-disk positions of the two vortices.
    #[serde(default)]
    pub disk: bool,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rat1Config {
    pub init: LumpStateDoc,
    pub tmax: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RatnConfig {
    #[serde(default = "default_n")]
    pub n: u32,
    #[serde(default)]
    pub mode: PotentialMode,
    #[serde(rename = "P", default)]
    pub momentum: f64,
    #[serde(default = "default_chi0")]
    pub chi0: f64,
    /// Initial χ̇; when absent the launch is inward with radial kinetic energy ½.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_dot0: Option<f64>,
    pub tmax: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RunConfig {
    Hyp2(Hyp2Config),
    Rat1(Rat1Config),
    Ratn(RatnConfig),
}

fn check_positive(name: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} = {v} must be positive")))
    }
}

fn check_finite(name: &str, v: f64) -> Result<(), ConfigError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("{name} = {v} must be finite")))
    }
}

fn check_samples(n: usize) -> Result<(), ConfigError> {
    if n >= 2 {
        Ok(())
    } else {
        Err(ConfigError::Invalid(format!("samples = {n} must be at least 2")))
    }
}

impl Hyp2Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_positive("s0", self.s0)?;
        check_positive("tmax", self.tmax)?;
        for (name, v) in [("psi0", self.psi0), ("sdot0", self.sdot0), ("psidot0", self.psidot0), ("charge", self.charge)] {
            check_finite(name, v)?;
        }
        check_samples(self.samples)?;
        self.tolerances.ode_spec().map(|_| ())
    }
}

impl Rat1Config {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check_positive("tmax", self.tmax)?;
        check_samples(self.samples)?;
        let st = LumpState::from(&self.init);
        if st.to_vec().iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid("initial state has non-finite entries".into()));
        }
        if st.orthogonality_defect() > 1e-8 {
            return Err(ConfigError::Invalid(format!(
                "O is not orthogonal (defect {:e})",
                st.orthogonality_defect()
            )));
        }
        self.tolerances.ode_spec().map(|_| ())
    }
}

impl RatnConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(2..=crate::ratn::MAX_DEGREE).contains(&self.n) {
            return Err(ConfigError::Invalid(format!("n = {} outside [2, {}]", self.n, crate::ratn::MAX_DEGREE)));
        }
        check_positive("chi0", self.chi0)?;
        check_positive("tmax", self.tmax)?;
        check_finite("P", self.momentum)?;
        if let Some(v) = self.chi_dot0 {
            check_finite("chi_dot0", v)?;
        }
        check_samples(self.samples)?;
        self.tolerances.ode_spec().map(|_| ())
    }
}

impl RunConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            RunConfig::Hyp2(_) => "hyp2",
            RunConfig::Rat1(_) => "rat1",
            RunConfig::Ratn(_) => "ratn",
        }
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: origin.to_string(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        match self {
            RunConfig::Hyp2(c) => c.validate(),
            RunConfig::Rat1(c) => c.validate(),
            RunConfig::Ratn(c) => c.validate(),
        }
    }

    pub fn into_hyp2(self) -> Result<Hyp2Config, ConfigError> {
        match self {
            RunConfig::Hyp2(c) => Ok(c),
            other => Err(ConfigError::WrongKind {
                expected: "hyp2",
                found: other.kind(),
            }),
        }
    }

    pub fn into_rat1(self) -> Result<Rat1Config, ConfigError> {
        match self {
            RunConfig::Rat1(c) => Ok(c),
            other => Err(ConfigError::WrongKind {
                expected: "rat1",
                found: other.kind(),
            }),
        }
    }

    pub fn into_ratn(self) -> Result<RatnConfig, ConfigError> {
        match self {
            RunConfig::Ratn(c) => Ok(c),
            other => Err(ConfigError::WrongKind {
                expected: "ratn",
                found: other.kind(),
            }),
        }
    }
}

/// Trajectory configs shipped in `configs/`, by file name.
pub const SHIPPED_CONFIGS: [(&str, &str); 5] = [
    ("hyp2_figure2_like.json", include_str!("../../../configs/hyp2_figure2_like.json")),
    ("hyp2_intrinsic_orbit.json", include_str!("../../../configs/hyp2_intrinsic_orbit.json")),
    ("hyp2_geodesic.json", include_str!("../../../configs/hyp2_geodesic.json")),
    ("rat1_spinning_lump.json", include_str!("../../../configs/rat1_spinning_lump.json")),
    ("ratn_extrinsic_p0.json", include_str!("../../../configs/ratn_extrinsic_p0.json")),
];

pub fn shipped_configs() -> Result<Vec<(&'static str, RunConfig)>, ConfigError> {
    SHIPPED_CONFIGS
        .iter()
        .map(|(name, text)| {
            let c = RunConfig::from_json(text, name)?;
            c.validate()?;
            Ok((*name, c))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_configs_parse() {
        let all = shipped_configs().unwrap();
        assert_eq!(all.len(), SHIPPED_CONFIGS.len());
    }

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_json(r#"{"kind":"hyp2","s0":1.0,"tmax":5}"#, "inline").unwrap();
        let h = c.into_hyp2().unwrap();
        assert_eq!(h.flow, Hyp2Flow::Extrinsic);
        assert_eq!(h.charge, 1.0);
        assert_eq!(h.samples, 1001);
    }

    #[test]
    fn rejects_unknown_fields_and_bad_values() {
        assert!(RunConfig::from_json(r#"{"kind":"hyp2","s0":1.0,"tmax":5,"bogus":1}"#, "x").is_err());
        let c = RunConfig::from_json(r#"{"kind":"hyp2","s0":-1.0,"tmax":5}"#, "x").unwrap();
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(_))));
        let c = RunConfig::from_json(r#"{"kind":"ratn","n":1,"tmax":5}"#, "x").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn wrong_kind() {
        let c = RunConfig::from_json(r#"{"kind":"ratn","tmax":5}"#, "x").unwrap();
        assert!(matches!(c.into_hyp2(), Err(ConfigError::WrongKind { .. })));
    }

    #[test]
    fn tolerance_merge_prefers_override() {
        let base = Tolerances {
            abs_tol: Some(1e-9),
            rel_tol: Some(1e-9),
            ..Default::default()
        };
        let over = Tolerances {
            rel_tol: Some(1e-11),
            ..Default::default()
        };
        let m = base.merged(over);
        assert_eq!(m.abs_tol, Some(1e-9));
        assert_eq!(m.rel_tol, Some(1e-11));
        assert!(Tolerances { rel_tol: Some(-1.0), ..Default::default() }.ode_spec().is_err());
    }
}
