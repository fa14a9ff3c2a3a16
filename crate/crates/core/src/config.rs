//! Run configuration read from TOML. Every section is optional and falls
//! back to the built-in defaults; unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiments::{lifespan, BlowupConfig, DyadicConfig, FdCheckConfig, GeometryConfig, GlueConfig};
use crate::profiles::{validate_params, ProfileKind, ProfileParams, Violation};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LifespanConfig {
    pub eps_list: Vec<f64>,
}

impl Default for LifespanConfig {
    fn default() -> Self {
        LifespanConfig { eps_list: lifespan::default_eps_list() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingConfig {
    pub omega: f64,
    pub gamma: f64,
    pub lam_list: Vec<f64>,
    /// Log exponent of the norm; the profile `beta` when absent.
    pub beta: Option<f64>,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        ScalingConfig {
            omega: -1.0,
            gamma: 1.0,
            lam_list: (2..=5).map(|n| (n as f64).powi(-4)).collect(),
            beta: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SelftestConfig {
    /// Gaussian grid nodes per direction.
    pub nodes: usize,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig { nodes: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    pub profile_kind: ProfileKind,
    pub profile_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x2: f64,
    /// Field export time as a fraction of `t_ε`.
    pub field_t_fraction: f64,
    pub field_points: usize,
    pub ellipse_v: f64,
    pub ellipse_points: usize,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            profile_kind: ProfileKind::ChiEps,
            profile_points: 10_000,
            x_min: 0.0,
            x_max: 0.25,
            x2: 0.0,
            field_t_fraction: 0.5,
            field_points: 2001,
            ellipse_v: -0.005,
            ellipse_points: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub output: OutputConfig,
    pub params: ProfileParams,
    pub dyadic: DyadicConfig,
    pub blowup: BlowupConfig,
    pub lifespan: LifespanConfig,
    pub scaling: ScalingConfig,
    pub glue: GlueConfig,
    pub geometry: GeometryConfig,
    pub fdcheck: FdCheckConfig,
    pub selftest: SelftestConfig,
    pub export: ExportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 7,
            output: OutputConfig::default(),
            params: ProfileParams::default(),
            dyadic: DyadicConfig::default(),
            blowup: BlowupConfig::default(),
            lifespan: LifespanConfig::default(),
            scaling: ScalingConfig::default(),
            glue: GlueConfig::default(),
            geometry: GeometryConfig::default(),
            fdcheck: FdCheckConfig::default(),
            selftest: SelftestConfig::default(),
            export: ExportConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses TOML text; syntax and schema errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Parameter constraint violations followed by section-level problems.
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = validate_params(&self.params)
            .into_iter()
            .map(|Violation { constraint, margin }| format!("params: {constraint} (fails by {margin})"))
            .collect();
        let mut section = |name: &str, r: Result<()>| {
            if let Err(e) = r {
                out.push(format!("{name}: {e}"));
            }
        };
        section("dyadic", self.dyadic.validate());
        section("blowup", self.blowup.validate());
        let s = &self.scaling;
        section(
            "scaling",
            if (s.omega + s.gamma).abs() > 1e-12 {
                Err(Error::pre("omega + gamma must vanish"))
            } else if s.lam_list.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) {
                Err(Error::pre("lam_list entries must lie in (0, 1]"))
            } else {
                Ok(())
            },
        );
        let e = &self.export;
        section(
            "export",
            if e.profile_points < 2 || e.field_points < 2 || e.ellipse_points < 3 {
                Err(Error::pre("export point counts are too small"))
            } else if !(e.x_min < e.x_max) {
                Err(Error::pre("export needs x_min < x_max"))
            } else {
                Ok(())
            },
        );
        if self.selftest.nodes < 16 {
            out.push("selftest: nodes must be at least 16".into());
        }
        out
    }
}
