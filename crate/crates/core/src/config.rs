//! TOML run configuration with full validation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fv::{LimiterSettings, SolverSettings};
use crate::mesh::{BoundarySpec, MaterialRegion, Mesh2D, RegionMap};
use crate::radiometry::PhysConstants;
use crate::transport::SpectrumBins;

/// Uniform box (`nx`, `ny`, `x`, `y`) or explicit edges (`x_edges`, `y_edges`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nx: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ny: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_edges: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y_edges: Option<Vec<f64>>,
}

impl MeshConfig {
    pub fn uniform(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Self {
        Self {
            nx: Some(nx),
            ny: Some(ny),
            x: Some(x),
            y: Some(y),
            ..Self::default()
        }
    }

    pub fn build(&self) -> Result<Mesh2D> {
        match self {
            MeshConfig {
                x_edges: Some(xe),
                y_edges: Some(ye),
                nx: None,
                ny: None,
                x: None,
                y: None,
            } => Mesh2D::new(xe.clone(), ye.clone()),
            MeshConfig {
                nx: Some(nx),
                ny: Some(ny),
                x: Some(x),
                y: Some(y),
                x_edges: None,
                y_edges: None,
            } => {
                if !(x[1] > x[0]) || !(y[1] > y[0]) {
                    return Err(Error::Config(vec!["mesh.x, mesh.y: need lo < hi".into()]));
                }
                Mesh2D::uniform(*nx, *ny, *x, *y)
            }
            _ => Err(Error::Config(vec![
                "mesh: give either nx, ny, x, y or x_edges, y_edges".into(),
            ])),
        }
    }

    /// Multiplies the cell counts by `factor` (rounded, at least 1); single-cell axes stay single.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let mesh = self.build()?.scaled(factor)?;
        let uniform = self.nx.is_some();
        Ok(if uniform {
            Self::uniform(mesh.nx(), mesh.ny(), mesh.x_range(), mesh.y_range())
        } else {
            Self {
                x_edges: Some(mesh.x_edges().to_vec()),
                y_edges: Some(mesh.y_edges().to_vec()),
                ..Self::default()
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    /// Step, ns.
    pub dt: f64,
    /// End time, ns.
    pub t_end: f64,
}

/// Initial state: material temperature and a Planckian radiation field
/// of magnitude `a c radiation_T^4` with frequency shape `b(u, spectrum_T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(
        rename = "radiation_T",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub radiation_t: Option<f64>,
    #[serde(
        rename = "spectrum_T",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub spectrum_t: Option<f64>,
}

impl InitialConfig {
    pub fn radiation_temperature(&self) -> f64 {
        self.radiation_t.unwrap_or(self.t)
    }
    pub fn spectrum_temperature(&self) -> f64 {
        self.spectrum_t.unwrap_or(self.radiation_temperature())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParticleConfig {
    /// Reference weight; derived from the problem scale when omitted.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_ref: Option<f64>,
    /// Target particles per average cell when `w_ref` is derived.
    pub per_cell: f64,
    /// Cap on initial particles per cell.
    pub max_per_cell: usize,
    /// Piecewise-linear positions for re-sampled particles.
    pub tilt: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBins>,
}

impl Default for ParticleConfig {
    fn default() -> Self {
        Self {
            w_ref: None,
            per_cell: 100.0,
            max_per_cell: 1_000_000,
            tilt: false,
            spectrum: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
    /// Snapshot every this many steps; 0 writes only the initial and final states.
    pub snapshot_stride: usize,
    /// Spectrum every this many steps; 0 writes only the final spectrum.
    pub spectrum_stride: usize,
}

fn default_epsilon() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub mesh: MeshConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    /// Regions keyed by index; the one without `rects` fills the rest.
    pub material: BTreeMap<String, MaterialRegion>,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub particles: ParticleConfig,
    #[serde(default)]
    pub limiter: LimiterSettings,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Validated geometry and materials.
#[derive(Debug, Clone)]
pub struct BuiltProblem {
    pub mesh: Mesh2D,
    pub regions: RegionMap,
    pub consts: PhysConstants,
}

impl SimulationConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut cfg: SimulationConfig =
            toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.solver.quadrature.prepare();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    pub fn consts(&self) -> PhysConstants {
        PhysConstants::with_epsilon(self.epsilon)
    }

    /// Regions in index order.
    pub fn regions(&self) -> Result<Vec<MaterialRegion>> {
        let mut keyed = Vec::new();
        let mut bad = Vec::new();
        for (k, r) in &self.material {
            match k.parse::<usize>() {
                Ok(i) => keyed.push((i, r.clone())),
                Err(_) => bad.push(format!("material.{k}: region keys must be integers")),
            }
        }
        if !bad.is_empty() {
            return Err(Error::Config(bad));
        }
        keyed.sort_by_key(|(i, _)| *i);
        Ok(keyed.into_iter().map(|(_, r)| r).collect())
    }

    /// Every violation, each naming its key.
    pub fn validate(&self) -> Result<()> {
        let mut p: Vec<String> = Vec::new();
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.epsilon) {
            p.push("epsilon: must be positive".into());
        }
        if !pos(self.time.dt) {
            p.push("time.dt: must be positive".into());
        }
        if !(self.time.t_end >= 0.0 && self.time.t_end.is_finite()) {
            p.push("time.t_end: must be non-negative".into());
        }
        if !pos(self.initial.t) {
            p.push("initial.T: must be positive".into());
        }
        if let Some(v) = self.initial.radiation_t {
            if !(v >= 0.0 && v.is_finite()) {
                p.push("initial.radiation_T: must be non-negative".into());
            }
        }
        if let Some(v) = self.initial.spectrum_t {
            if !pos(v) {
                p.push("initial.spectrum_T: must be positive".into());
            }
        }
        if let Some(w) = self.particles.w_ref {
            if !pos(w) {
                p.push("particles.w_ref: must be positive".into());
            }
        }
        if !pos(self.particles.per_cell) {
            p.push("particles.per_cell: must be positive".into());
        }
        if self.particles.max_per_cell == 0 {
            p.push("particles.max_per_cell: must be positive".into());
        }
        if let Some(s) = &self.particles.spectrum {
            if let Err(e) = s.validate() {
                p.push(format!("particles.spectrum: {e}"));
            }
        }
        if !(self.limiter.threshold >= 0.0) {
            p.push("limiter.threshold: must be non-negative".into());
        }
        if let Err(e) = self.solver.validate() {
            p.extend(e);
        }
        if let Err(e) = self.boundary.validate() {
            p.extend(e);
        }
        match self.mesh.build() {
            Ok(mesh) => match self.regions() {
                Ok(regions) => {
                    if let Err(Error::Config(e)) = RegionMap::build(&mesh, regions) {
                        p.extend(e);
                    }
                }
                Err(Error::Config(e)) => p.extend(e),
                Err(e) => p.push(e.to_string()),
            },
            Err(Error::Config(e)) => p.extend(e),
            Err(e) => p.push(e.to_string()),
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(p))
        }
    }

    pub fn build(&self) -> Result<BuiltProblem> {
        self.validate()?;
        let mesh = self.mesh.build()?;
        let regions = RegionMap::build(&mesh, self.regions()?)?;
        Ok(BuiltProblem {
            mesh,
            regions,
            consts: self.consts(),
        })
    }

    /// Refines the mesh by `factor` per axis.
    pub fn with_mesh_scale(mut self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::Config(vec!["--scale-mesh: must be positive".into()]));
        }
        self.mesh = self.mesh.scaled(factor)?;
        Ok(self)
    }

    pub fn with_t_end(mut self, t_end: f64) -> Self {
        self.time.t_end = t_end;
        self
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SimulationConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SimulationConfig::from_toml_str(&text)
}
