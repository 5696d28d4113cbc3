//! Benchmark configurations.

use std::collections::BTreeMap;

use crate::config::{
    InitialConfig, MeshConfig, OutputConfig, ParticleConfig, SimulationConfig, TimeConfig,
};
use crate::error::{Error, Result};
use crate::fv::{LimiterSettings, SolverSettings};
use crate::mesh::{BoundaryCondition, BoundarySpec, MaterialRegion, Rect};
use crate::radiometry::OpacityModel;
use crate::transport::SpectrumBins;

pub const PRESET_NAMES: [&str; 6] = [
    "marshak-gray",
    "homogeneous",
    "marshak-mf",
    "marshak-hetero",
    "hohlraum-gray",
    "hohlraum-mf",
];

fn base(
    mesh: MeshConfig,
    dt: f64,
    t_end: f64,
    t0: f64,
    boundary: BoundarySpec,
) -> SimulationConfig {
    SimulationConfig {
        seed: 1,
        epsilon: 1.0,
        mesh,
        time: TimeConfig { dt, t_end },
        initial: InitialConfig {
            t: t0,
            radiation_t: None,
            spectrum_t: None,
        },
        material: BTreeMap::new(),
        boundary,
        particles: ParticleConfig::default(),
        limiter: LimiterSettings::default(),
        solver: SolverSettings::default(),
        output: OutputConfig::default(),
    }
}

fn region(opacity: OpacityModel, cv: f64, rects: Vec<Rect>) -> MaterialRegion {
    MaterialRegion { opacity, cv, rects }
}

/// Slab of `n` cells on `[0, len]` with one cell of height `len / n` and reflective top/bottom.
fn slab(n: usize, len: f64, right: BoundaryCondition) -> (MeshConfig, BoundarySpec) {
    let mesh = MeshConfig::uniform(n, 1, [0.0, len], [0.0, len / n as f64]);
    let b = BoundarySpec {
        left: BoundaryCondition::InflowPlanck { temperature: 1.0 },
        right,
        bottom: BoundaryCondition::Reflective,
        top: BoundaryCondition::Reflective,
    };
    (mesh, b)
}

fn with_regions(mut c: SimulationConfig, regions: Vec<MaterialRegion>) -> SimulationConfig {
    c.material = regions
        .into_iter()
        .enumerate()
        .map(|(k, r)| (k.to_string(), r))
        .collect();
    c
}

pub fn preset(name: &str) -> Result<SimulationConfig> {
    let cfg = match name {
        "marshak-gray" => {
            let (mesh, b) = slab(200, 0.5, BoundaryCondition::Outflow);
            with_regions(
                base(mesh, 1.6e-3, 10.0, 1e-3, b),
                vec![region(
                    OpacityModel::GrayPowerLaw {
                        sigma0: 300.0,
                        exponent: 3.0,
                    },
                    0.3,
                    vec![],
                )],
            )
        }
        "homogeneous" => {
            let mut c = with_regions(
                base(
                    MeshConfig::uniform(1, 1, [0.0, 0.01], [0.0, 1.0]),
                    2.6e-4,
                    1.0,
                    1.0,
                    BoundarySpec::uniform(BoundaryCondition::Periodic),
                ),
                vec![region(
                    OpacityModel::FrequencyStep {
                        sigma_low: 1e-8,
                        sigma_high: 1000.0,
                        u_split: 1.0,
                    },
                    0.3,
                    vec![],
                )],
            );
            c.initial.radiation_t = Some(1.0);
            c.initial.spectrum_t = Some(0.1);
            c.particles.per_cell = 2e5;
            c.particles.spectrum = Some(SpectrumBins {
                u_min: 0.01,
                u_max: 20.0,
                n_bins: 60,
                log: true,
            });
            c
        }
        "marshak-mf" => {
            let (mesh, b) = slab(1000, 5.0, BoundaryCondition::Reflective);
            with_regions(
                base(mesh, 1.3e-4, 1.0, 1e-3, b),
                vec![region(
                    OpacityModel::FrequencyPowerLaw { sigma0: 1000.0 },
                    0.1,
                    vec![],
                )],
            )
        }
        "marshak-hetero" => {
            let (mesh, b) = slab(600, 3.0, BoundaryCondition::Reflective);
            let h = 3.0 / 600.0;
            with_regions(
                base(mesh, 1.3e-4, 1.0, 1e-3, b),
                vec![
                    region(
                        OpacityModel::FrequencyPowerLaw { sigma0: 10.0 },
                        0.1,
                        vec![],
                    ),
                    region(
                        OpacityModel::FrequencyPowerLaw { sigma0: 1000.0 },
                        0.1,
                        vec![Rect::new(2.0, 3.0, 0.0, h)],
                    ),
                ],
            )
        }
        "hohlraum-gray" => {
            let b = BoundarySpec {
                left: BoundaryCondition::InflowPlanck { temperature: 1.0 },
                right: BoundaryCondition::Reflective,
                bottom: BoundaryCondition::InflowPlanck { temperature: 1e-3 },
                top: BoundaryCondition::InflowPlanck { temperature: 1e-3 },
            };
            let walls = vec![
                Rect::new(0.0, 0.05, 0.25, 0.75),
                Rect::new(0.25, 0.75, 0.25, 0.75),
                Rect::new(0.0, 1.0, 0.0, 0.05),
                Rect::new(0.0, 1.0, 0.95, 1.0),
                Rect::new(0.95, 1.0, 0.0, 1.0),
            ];
            with_regions(
                base(
                    MeshConfig::uniform(100, 100, [0.0, 1.0], [0.0, 1.0]),
                    2.7e-4,
                    1.0,
                    1e-3,
                    b,
                ),
                vec![
                    region(OpacityModel::GrayConstant { sigma0: 1e-8 }, 1e-4, vec![]),
                    region(
                        OpacityModel::GrayPowerLaw {
                            sigma0: 100.0,
                            exponent: 3.0,
                        },
                        0.3,
                        walls,
                    ),
                ],
            )
        }
        "hohlraum-mf" => {
            let b = BoundarySpec {
                left: BoundaryCondition::Reflective,
                right: BoundaryCondition::InflowPlanck { temperature: 1e-3 },
                bottom: BoundaryCondition::InflowPlanck { temperature: 0.3 },
                top: BoundaryCondition::InflowPlanck { temperature: 1e-3 },
            };
            let walls = vec![
                Rect::new(0.0, 0.45, 0.1, 0.15),
                Rect::new(0.0, 0.45, 0.55, 0.95),
                Rect::new(0.6, 0.65, 0.1, 1.4),
                Rect::new(0.0, 0.65, 1.35, 1.4),
            ];
            let mut c = with_regions(
                base(
                    MeshConfig::uniform(52, 112, [0.0, 0.65], [0.0, 1.4]),
                    1.7e-4,
                    10.0,
                    1e-3,
                    b,
                ),
                vec![
                    region(OpacityModel::GrayConstant { sigma0: 1e-8 }, 1e-4, vec![]),
                    region(
                        OpacityModel::StimulatedPowerLaw { sigma0: 1000.0 },
                        0.3,
                        walls,
                    ),
                ],
            );
            c.limiter.enabled = true;
            c
        }
        _ => {
            return Err(Error::UnknownPreset {
                name: name.to_string(),
                available: PRESET_NAMES.to_vec(),
            })
        }
    };
    Ok(cfg)
}
