//! Run configuration, read from TOML.
//!
//! Times are in microseconds, everything else in SI units. Any field left
//! out takes the scenario default, so `scenario = { kalthoff = {} }` alone is
//! a complete file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cem::{Dominance, TrackingMode};
use crate::error::{Error, Result};
use crate::esfem::{Formulation, Material};
use crate::mesh::{Diagonal, ElementKind};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchmarkConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub scenario: Scenario,
    #[serde(default)]
    pub material: Option<Material>,
    #[serde(default)]
    pub mesh: MeshSpec,
    #[serde(default)]
    pub tracking: TrackingConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Kalthoff(Kalthoff),
    Neumann(Neumann),
    Dirichlet(Dirichlet),
    Cylinder(Cylinder),
}

/// Upper half of the edge-impact plate; `y = 0` is the symmetry line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Kalthoff {
    pub width: f64,
    pub height: f64,
    pub notch_y: f64,
    pub notch_length: f64,
    /// Impact speed (m/s), applied on `x = 0` below the notch.
    pub v0: f64,
    pub t0_us: f64,
}

impl Default for Kalthoff {
    fn default() -> Self {
        Self {
            width: 0.1,
            height: 0.1,
            notch_y: 0.025,
            notch_length: 0.05,
            v0: 16.5,
            t0_us: 1.0,
        }
    }
}

/// Pre-notched strip pulled apart by tractions on its long edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Neumann {
    pub width: f64,
    pub height: f64,
    pub notch_length: f64,
    /// Traction magnitude (Pa), held constant from `t = 0`.
    pub traction: f64,
}

impl Default for Neumann {
    fn default() -> Self {
        Self {
            width: 0.1,
            height: 0.04,
            notch_length: 0.05,
            traction: 1e6,
        }
    }
}

/// Square block with a slot cut down from the top; the right slot face is
/// driven in `+x`, the left one is held in `x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Dirichlet {
    pub width: f64,
    pub height: f64,
    pub notch_depth: f64,
    pub v0: f64,
    pub t0_us: f64,
}

impl Default for Dirichlet {
    fn default() -> Self {
        Self {
            width: 0.2,
            height: 0.2,
            notch_depth: 0.06,
            v0: 3.993,
            t0_us: 100.0,
        }
    }
}

/// Thick ring under a sudden bore pressure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cylinder {
    pub r_in: f64,
    pub r_out: f64,
    pub p0: f64,
    pub t0_us: f64,
    pub tau_us: f64,
}

impl Default for Cylinder {
    fn default() -> Self {
        Self {
            r_in: 0.08,
            r_out: 0.15,
            p0: 400e6,
            t0_us: 1.0,
            tau_us: 100.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSpec {
    /// Read the mesh from this file instead of generating it.
    pub file: Option<PathBuf>,
    pub kind: Option<ElementKind>,
    pub diagonal: Diagonal,
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub n_radial: Option<usize>,
    pub n_hoop: Option<usize>,
    /// Interior node perturbation as a fraction of the local edge length.
    pub jitter: Option<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackingConfig {
    pub mode: TrackingMode,
    pub gamma: f64,
    pub dominance: Dominance,
    pub max_splits_per_step: Option<usize>,
    /// Let cracks start from loaded or constrained edges.
    pub crack_loaded_edges: Option<bool>,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        Self {
            mode: TrackingMode::Mct,
            gamma: 1.0,
            dominance: Dominance::Literal,
            max_splits_per_step: None,
            crack_loaded_edges: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeConfig {
    pub t_end_us: Option<f64>,
    pub dt_safety: f64,
    /// Linear bulk viscosity coefficient; off when absent.
    pub bulk_viscosity: Option<f64>,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_end_us: None,
            dt_safety: 0.5,
            bulk_viscosity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Time-series cadence (μs).
    pub every_us: f64,
    /// VTK snapshot cadence (μs); only the final state when absent.
    pub snapshot_every_us: Option<f64>,
    /// Smallest fragment counted as major, as a fraction of total area.
    pub major_fraction: f64,
    pub dir: Option<PathBuf>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            every_us: 1.0,
            snapshot_every_us: None,
            major_fraction: 0.005,
            dir: None,
        }
    }
}

impl BenchmarkConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            name: None,
            scenario,
            material: None,
            mesh: MeshSpec::default(),
            tracking: TrackingConfig::default(),
            time: TimeConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. A relative mesh path is taken relative to the
    /// config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        if let Some(f) = cfg.mesh.file.as_mut() {
            if f.is_relative() {
                *f = path.parent().unwrap_or(Path::new(".")).join(&*f);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.material().validate()?;
        if !(self.t_end_us() >= 0.0) {
            return Err(Error::Config(format!("t_end_us = {} must be >= 0", self.t_end_us())));
        }
        if !(self.time.dt_safety > 0.0 && self.time.dt_safety <= 1.0) {
            return Err(Error::Config(format!("dt_safety = {} outside (0, 1]", self.time.dt_safety)));
        }
        if !(self.output.every_us > 0.0) {
            return Err(Error::Config("output.every_us must be positive".into()));
        }
        if self.output.snapshot_every_us.is_some_and(|s| !(s > 0.0)) {
            return Err(Error::Config("output.snapshot_every_us must be positive".into()));
        }
        if !(self.tracking.gamma >= 0.0) {
            return Err(Error::Config(format!("gamma = {} must be >= 0", self.tracking.gamma)));
        }
        if let Some(f) = &self.mesh.file {
            if !f.exists() {
                return Err(Error::Config(format!("mesh file {} does not exist", f.display())));
            }
        }
        Ok(())
    }

    pub fn material(&self) -> Material {
        self.material.unwrap_or_else(|| match self.scenario {
            Scenario::Kalthoff(_) => Material {
                e: 190e9,
                nu: 0.3,
                rho: 8000.0,
                gc: 2.213e4,
                formulation: Formulation::PlaneStrain,
            },
            Scenario::Neumann(_) => Material {
                e: 32e9,
                nu: 0.2,
                rho: 2450.0,
                gc: 3.0,
                formulation: Formulation::PlaneStrain,
            },
            Scenario::Dirichlet(_) => Material {
                e: 36.5e9,
                nu: 0.2,
                rho: 2400.0,
                gc: 160.0,
                formulation: Formulation::PlaneStrain,
            },
            Scenario::Cylinder(_) => Material {
                e: 210e9,
                nu: 0.3,
                rho: 7850.0,
                gc: 2000.0,
                formulation: Formulation::PlaneStrain,
            },
        })
    }

    pub fn t_end_us(&self) -> f64 {
        self.time.t_end_us.unwrap_or(match self.scenario {
            Scenario::Kalthoff(_) => 90.0,
            Scenario::Neumann(_) => 80.0,
            Scenario::Dirichlet(_) => 300.0,
            Scenario::Cylinder(_) => 60.0,
        })
    }

    pub fn label(&self) -> String {
        self.name.clone().unwrap_or_else(|| {
            match self.scenario {
                Scenario::Kalthoff(_) => "kalthoff",
                Scenario::Neumann(_) => "neumann",
                Scenario::Dirichlet(_) => "dirichlet",
                Scenario::Cylinder(_) => "cylinder",
            }
            .to_string()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_takes_defaults() {
        let cfg = BenchmarkConfig::from_toml("[scenario.kalthoff]\n").unwrap();
        assert_eq!(cfg.scenario, Scenario::Kalthoff(Kalthoff::default()));
        assert_eq!(cfg.material().e, 190e9);
        assert_eq!(cfg.t_end_us(), 90.0);
        assert_eq!(cfg.tracking.gamma, 1.0);
    }

    #[test]
    fn overrides_and_round_trip() {
        let text = r#"
name = "ct-slow"
[scenario.dirichlet]
v0 = 1.375
[tracking]
mode = "sct"
gamma = 1.5
[time]
t_end_us = 10
"#;
        let cfg = BenchmarkConfig::from_toml(text).unwrap();
        let Scenario::Dirichlet(d) = &cfg.scenario else { panic!() };
        assert_eq!((d.v0, d.t0_us), (1.375, 100.0));
        assert_eq!(cfg.tracking.mode, TrackingMode::Sct);
        let back = BenchmarkConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn bad_values_are_config_errors() {
        for text in [
            "[scenario.neumann]\nbogus = 1\n",
            "[scenario.neumann]\n[time]\nt_end_us = -1\n",
            "[scenario.neumann]\n[time]\ndt_safety = 1.5\n",
            "[scenario.neumann]\n[material]\nE = 1e9\nnu = 0.6\nrho = 1\nGc = 1\n",
            "[scenario.neumann]\n[mesh]\nfile = \"/no/such/file.msh\"\n",
            "scenario = 3\n",
        ] {
            assert!(matches!(BenchmarkConfig::from_toml(text), Err(Error::Config(_))), "{text}");
        }
    }
}
