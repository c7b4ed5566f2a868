//! JSON configuration documents, one per subcommand.

use std::path::Path;

use hilbertine::surface::GroupPresentation;
use hilbertine::{DomainSpec, ProjTransform};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const VERSION: u32 = 1;

/// Common checks after parsing.
pub trait Validate {
    fn version(&self) -> u32;

    fn check(&self) -> CliResult<()> {
        Ok(())
    }
}

pub fn load<T: DeserializeOwned + Validate>(path: &Path) -> CliResult<T> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg: T = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if cfg.version() != VERSION {
        return Err(CliError::Config(format!(
            "unsupported config version {} (expected {VERSION})",
            cfg.version()
        )));
    }
    cfg.check()?;
    Ok(cfg)
}

pub fn positive(name: &str, v: Option<f64>) -> CliResult<()> {
    match v {
        Some(x) if !(x.is_finite() && x > 0.0) => Err(CliError::Config(format!("{name} must be positive, got {x}"))),
        _ => Ok(()),
    }
}

fn decreasing(levels: &Option<Vec<f64>>) -> CliResult<()> {
    match levels {
        Some(l) if l.is_empty() || l.iter().any(|&e| !(e > 0.0)) || l.windows(2).any(|w| w[1] >= w[0]) => {
            Err(CliError::Config("levels must be positive and strictly decreasing".into()))
        }
        _ => Ok(()),
    }
}

macro_rules! versioned {
    ($($t:ty),*) => {
        $(impl Validate for $t {
            fn version(&self) -> u32 {
                self.version
            }
        })*
    };
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceConfig {
    pub version: u32,
    pub domain: DomainSpec,
    pub points: [[f64; 3]; 2],
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    pub version: u32,
    pub matrix: ProjTransform,
    #[serde(default)]
    pub tol: Option<f64>,
}

/// Region of a volume computation, in homogeneous coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum RegionSpec {
    Triangle { vertices: [[f64; 3]; 3] },
    Polygon { vertices: Vec<[f64; 3]> },
    /// Exactly one vertex on the boundary.
    Pic { vertices: [[f64; 3]; 3] },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VolumeConfig {
    pub version: u32,
    pub domain: DomainSpec,
    pub region: RegionSpec,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TileConfig {
    pub version: u32,
    pub domain: DomainSpec,
    pub group: GroupPresentation,
    pub base: [f64; 3],
    pub word_length: usize,
    /// Interior samples used to check that translates do not overlap.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    2000
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualConfig {
    pub version: u32,
    pub domain: DomainSpec,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSetConfig {
    pub version: u32,
    pub domain: DomainSpec,
    pub group: GroupPresentation,
    pub word_length: usize,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IdealTriangleScan {
    pub version: u32,
    /// Position parameters of the third vertex `[x:0:1]`.
    pub xs: Vec<f64>,
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CuspProfile {
    pub version: u32,
    pub domain: DomainSpec,
    /// Parabolic element; its fixed point is the apex of the pic.
    pub generator: ProjTransform,
    /// The two interior vertices of the pic.
    pub vertices: [[f64; 3]; 2],
    #[serde(default)]
    pub levels: Option<Vec<f64>>,
    #[serde(default)]
    pub rel_tol: Option<f64>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletTiling {
    pub version: u32,
    pub domain: DomainSpec,
    pub generator: ProjTransform,
    pub base: [f64; 3],
    /// Uses γ^{±1..±powers}.
    #[serde(default = "default_powers")]
    pub powers: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_powers() -> usize {
    10
}

#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum RunConfig {
    IdealTriangleScan(IdealTriangleScan),
    CuspProfile(CuspProfile),
    DirichletTiling(DirichletTiling),
}

versioned!(
    DistanceConfig,
    DualConfig,
    IdealTriangleScan,
    CuspProfile,
    DirichletTiling
);

impl Validate for ClassifyConfig {
    fn version(&self) -> u32 {
        self.version
    }
    fn check(&self) -> CliResult<()> {
        positive("tol", self.tol)
    }
}

impl Validate for VolumeConfig {
    fn version(&self) -> u32 {
        self.version
    }
    fn check(&self) -> CliResult<()> {
        positive("rel_tol", self.rel_tol)?;
        decreasing(&self.levels)
    }
}

impl Validate for TileConfig {
    fn version(&self) -> u32 {
        self.version
    }
    fn check(&self) -> CliResult<()> {
        if self.group.generators.is_empty() {
            return Err(CliError::Config("group has no generators".into()));
        }
        Ok(())
    }
}

impl Validate for LimitSetConfig {
    fn version(&self) -> u32 {
        self.version
    }
    fn check(&self) -> CliResult<()> {
        positive("tol", self.tol)
    }
}

impl Validate for RunConfig {
    fn version(&self) -> u32 {
        match self {
            RunConfig::IdealTriangleScan(c) => c.version,
            RunConfig::CuspProfile(c) => c.version,
            RunConfig::DirichletTiling(c) => c.version,
        }
    }
    fn check(&self) -> CliResult<()> {
        match self {
            RunConfig::IdealTriangleScan(c) => {
                if c.xs.is_empty() || c.xs.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
                    return Err(CliError::Config("xs must be a non-empty list of positive numbers".into()));
                }
                positive("rel_tol", c.rel_tol)?;
                decreasing(&c.levels)
            }
            RunConfig::CuspProfile(c) => {
                positive("rel_tol", c.rel_tol)?;
                decreasing(&c.levels)
            }
            RunConfig::DirichletTiling(c) => {
                if c.powers == 0 {
                    return Err(CliError::Config("powers must be at least 1".into()));
                }
                Ok(())
            }
        }
    }
}
