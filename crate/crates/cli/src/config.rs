//! Run configuration read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};

use cylgrating::fields::GridSpec;
use cylgrating::grating::{GratingConfig, IncidentWave};
use cylgrating::lattice::LatticeSumOptions;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::failure::Failure;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grating: GratingSection,
    pub incidence: IncidenceSection,
    #[serde(default)]
    pub truncation: TruncationSection,
    #[serde(default)]
    pub schlomilch: SchlomilchSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fieldmap: Option<FieldmapSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converge: Option<ConvergeSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GratingSection {
    pub radius: f64,
    pub spacing: f64,
    pub eps_r: f64,
    pub mu_r: f64,
    pub k0: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidenceSection {
    #[serde(default = "one")]
    pub e0v: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

fn one() -> f64 {
    1.0
}

/// `N` as a number or the string `"auto"`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Order {
    #[default]
    Auto,
    Fixed(usize),
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Order::Auto => f.write_str("auto"),
            Order::Fixed(n) => write!(f, "{n}"),
        }
    }
}

impl std::str::FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Order::Auto);
        }
        s.parse::<usize>()
            .map(Order::Fixed)
            .map_err(|_| format!("expected a positive integer or \"auto\", got {s:?}"))
    }
}

impl Serialize for Order {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Order::Auto => s.serialize_str("auto"),
            Order::Fixed(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Order {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(n) if n >= 1 => Ok(Order::Fixed(n as usize)),
            Raw::Int(n) => Err(serde::de::Error::custom(format!("N must be at least 1, got {n}"))),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationSection {
    #[serde(default)]
    pub n: Order,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchlomilchSection {
    pub tol: f64,
    pub max_terms: usize,
    pub guard_band: f64,
    pub depth: usize,
}

impl Default for SchlomilchSection {
    fn default() -> Self {
        let d = LatticeSumOptions::default();
        Self {
            tol: d.tol,
            max_terms: d.max_terms,
            guard_band: d.guard_band,
            depth: d.shanks_depth,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    Direct,
    Schur,
    Oracle,
    All,
}

impl fmt::Display for RouteChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RouteChoice::Direct => "direct",
            RouteChoice::Schur => "schur",
            RouteChoice::Oracle => "oracle",
            RouteChoice::All => "all",
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub route: RouteChoice,
    pub dump_matrix: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            route: RouteChoice::Direct,
            dump_matrix: false,
        }
    }
}

/// Rectangle `[x0, x1] x [y0, y1]` at height `z`, sampled `nx` by `ny`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldmapSection {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    #[serde(default)]
    pub z: f64,
    pub nx: usize,
    pub ny: usize,
}

impl FieldmapSection {
    pub fn grid(&self) -> GridSpec {
        GridSpec {
            x0: self.x0,
            x1: self.x1,
            y0: self.y0,
            y1: self.y1,
            nx: self.nx,
            ny: self.ny,
            z: self.z,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergeSection {
    pub n_list: Vec<usize>,
}

/// Validated physical inputs, angles in radians.
#[derive(Debug, Clone, Copy)]
pub struct Physics {
    pub grating: GratingConfig,
    pub incidence: IncidentWave,
    pub lattice: LatticeSumOptions,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
        toml::from_str(&text).map_err(|e| Failure::Config(format!("{}: {}", path.display(), e.message())))
    }

    /// Checks every invariant and converts angles; nothing is computed before this.
    pub fn physics(&self) -> Result<Physics, Failure> {
        let g = &self.grating;
        let grating = GratingConfig {
            radius: g.radius,
            spacing: g.spacing,
            eps_r: g.eps_r,
            mu_r: g.mu_r,
            k0: g.k0,
        };
        let incidence = IncidentWave {
            e0v: self.incidence.e0v,
            theta_i: self.incidence.theta_deg.to_radians(),
            phi_i: self.incidence.phi_deg.to_radians(),
        };
        log::info!(
            "incidence angles theta = {} deg -> {} rad, phi = {} deg -> {} rad",
            self.incidence.theta_deg,
            incidence.theta_i,
            self.incidence.phi_deg,
            incidence.phi_i
        );
        grating.validate().map_err(Failure::config_field("grating"))?;
        incidence.validate().map_err(Failure::config_field("incidence"))?;

        let s = &self.schlomilch;
        if !(s.tol > 0.0 && s.tol < 1.0) {
            return Err(Failure::Config(format!("schlomilch.tol must lie in (0, 1), got {}", s.tol)));
        }
        if s.max_terms < 16 {
            return Err(Failure::Config(format!("schlomilch.max_terms must be at least 16, got {}", s.max_terms)));
        }
        if !(s.guard_band >= 0.0 && s.guard_band < 0.5) {
            return Err(Failure::Config(format!(
                "schlomilch.guard_band must lie in [0, 0.5), got {}",
                s.guard_band
            )));
        }
        if s.depth > 8 {
            return Err(Failure::Config(format!("schlomilch.depth must be at most 8, got {}", s.depth)));
        }
        if let Order::Fixed(0) = self.truncation.n {
            return Err(Failure::Config("truncation.n must be at least 1".into()));
        }
        if let Some(c) = &self.converge {
            if c.n_list.is_empty() || c.n_list.contains(&0) {
                return Err(Failure::Config("converge.n_list must hold positive orders".into()));
            }
        }
        Ok(Physics {
            grating,
            incidence,
            lattice: LatticeSumOptions {
                tol: s.tol,
                max_terms: s.max_terms,
                guard_band: s.guard_band,
                shanks_depth: s.depth,
            },
        })
    }

    /// Resolved config as TOML, for output headers.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).unwrap_or_default()
    }
}
