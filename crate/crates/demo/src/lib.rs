//! Browser front end: three small runs of the solver, each returned as JSON for plotting.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use ugkp::config::MeshConfig;
use ugkp::oracles::{
    multigroup_homogeneous_solve, rosseland_diffusion_solve, DiffusionBoundary, DiffusionProblem,
    MultigroupProblem,
};
use ugkp::presets::preset;
use ugkp::radiometry::{
    planck_b, planck_mean, rosseland_mean, OpacityModel, QuadratureRule, SIGMA_FLOOR,
};
use ugkp::Simulation;

/// Browser runs stay below these many cell-steps and particle-steps so the page stays responsive.
const CELL_STEPS: f64 = 2e6;
const PARTICLE_STEPS: f64 = 5e7;

#[derive(Debug, Serialize, PartialEq)]
pub struct Spectrum {
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    pub planck_mean: f64,
    pub rosseland_mean: f64,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Relaxation {
    pub time: Vec<f64>,
    pub t: Vec<f64>,
    pub tr: Vec<f64>,
    pub oracle_time: Vec<f64>,
    pub oracle_t: Vec<f64>,
    pub u: Vec<f64>,
    pub intensity: Vec<f64>,
    pub oracle_intensity: Vec<f64>,
}

#[derive(Debug, Serialize, PartialEq)]
pub struct Profile {
    pub x: Vec<f64>,
    pub t: Vec<f64>,
    pub tr: Vec<f64>,
    pub diffusion_t: Vec<f64>,
}

fn check_work(what: &str, count: f64, steps: f64, limit: f64) -> ugkp::Result<()> {
    if !(steps.is_finite() && count * steps <= limit) {
        return Err(ugkp::Error::Domain(format!(
            "{count} {what}s for {steps:.0} steps exceeds the in-browser limit of {limit:e} {what}-steps"
        )));
    }
    Ok(())
}

/// Planck spectrum `B(u, T)` on `n` points of `(0, u_max]`, with the Planck and Rosseland means of a
/// two-level opacity that switches from `sigma_low` to `sigma_high` at `u_split`.
pub fn spectrum(
    t: f64,
    u_max: f64,
    n: usize,
    sigma_low: f64,
    sigma_high: f64,
    u_split: f64,
) -> ugkp::Result<Spectrum> {
    let model = OpacityModel::FrequencyStep {
        sigma_low,
        sigma_high,
        u_split,
    };
    let rule = QuadratureRule::default();
    let u: Vec<f64> = (1..=n).map(|k| u_max * k as f64 / n as f64).collect();
    let b = u
        .iter()
        .map(|&u| planck_b(u, t))
        .collect::<ugkp::Result<Vec<_>>>()?;
    Ok(Spectrum {
        u,
        b,
        planck_mean: planck_mean(&model, t, &rule)?,
        rosseland_mean: rosseland_mean(&model, t, &rule, SIGMA_FLOOR)?,
    })
}

/// Homogeneous relaxation with `per_cell` particles up to `t_end`, against the multigroup reference.
pub fn relaxation(per_cell: f64, t_end: f64, seed: u64) -> ugkp::Result<Relaxation> {
    let mut cfg = preset("homogeneous")?.with_t_end(t_end);
    cfg.seed = seed;
    cfg.particles.per_cell = per_cell;
    cfg.validate()?;
    check_work("particle", per_cell, t_end / cfg.time.dt, PARTICLE_STEPS)?;
    let region = cfg.regions()?.remove(0);
    let oracle = multigroup_homogeneous_solve(&MultigroupProblem {
        consts: cfg.consts(),
        model: region.opacity,
        cv: region.cv,
        t0: cfg.initial.t,
        radiation_t: cfg.initial.radiation_temperature(),
        spectrum_t: cfg.initial.spectrum_temperature(),
        groups: 2_000,
        dt: cfg.time.dt,
        t_end,
    })?;
    let edges = cfg
        .particles
        .spectrum
        .as_ref()
        .expect("preset bins")
        .edges();
    let mut sim = Simulation::new(cfg)?;
    let mut out = Relaxation {
        time: vec![sim.time],
        t: vec![sim.field.t[0]],
        tr: vec![sim.consts.radiation_temperature(sim.field.rho[0])],
        oracle_time: oracle.times.clone(),
        oracle_t: oracle.temperatures.clone(),
        u: edges.windows(2).map(|e| (e[0] * e[1]).sqrt()).collect(),
        intensity: Vec::new(),
        oracle_intensity: oracle.final_state.binned_intensity(&edges),
    };
    while !sim.is_done() {
        sim.advance()?;
        out.time.push(sim.time);
        out.t.push(sim.field.t[0]);
        out.tr
            .push(sim.consts.radiation_temperature(sim.field.rho[0]));
    }
    out.intensity = sim.spectrum(&edges);
    Ok(out)
}

/// Gray Marshak wave on `nx` cells of `[0, length]` with opacity `sigma0 / T^3`, against Rosseland diffusion.
pub fn marshak(nx: usize, length: f64, sigma0: f64, t_end: f64) -> ugkp::Result<Profile> {
    let mut cfg = preset("marshak-gray")?.with_t_end(t_end);
    cfg.mesh = MeshConfig::uniform(nx, 1, [0.0, length], [0.0, length / nx.max(1) as f64]);
    if let Some(m) = cfg.material.values_mut().next() {
        m.opacity = OpacityModel::GrayPowerLaw {
            sigma0,
            exponent: 3.0,
        };
    }
    cfg.validate()?;
    check_work("cell", nx as f64, t_end / cfg.time.dt, CELL_STEPS)?;
    let built = cfg.build()?;
    let p = DiffusionProblem::new(
        &built.mesh,
        &built.regions,
        built.consts,
        DiffusionBoundary::from_spec(&cfg.boundary),
        cfg.time.dt,
    );
    let diffusion = rosseland_diffusion_solve(&p, &vec![cfg.initial.t; nx], t_end, 0)?;
    let mut sim = Simulation::new(cfg)?;
    while !sim.is_done() {
        sim.advance()?;
    }
    Ok(Profile {
        x: (0..nx).map(|k| sim.mesh.center(k).0).collect(),
        t: sim.field.t.clone(),
        tr: sim
            .field
            .rho
            .iter()
            .map(|&r| sim.consts.radiation_temperature(r))
            .collect(),
        diffusion_t: diffusion.final_field().to_vec(),
    })
}

fn to_js<T: Serialize>(r: ugkp::Result<T>) -> Result<String, JsError> {
    let v = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&v).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = planckSpectrum)]
pub fn planck_spectrum_js(
    t: f64,
    u_max: f64,
    n: usize,
    sigma_low: f64,
    sigma_high: f64,
    u_split: f64,
) -> Result<String, JsError> {
    to_js(spectrum(t, u_max, n, sigma_low, sigma_high, u_split))
}

#[wasm_bindgen(js_name = homogeneousRelaxation)]
pub fn relaxation_js(per_cell: f64, t_end: f64, seed: u32) -> Result<String, JsError> {
    to_js(relaxation(per_cell, t_end, seed.into()))
}

#[wasm_bindgen(js_name = marshakProfile)]
pub fn marshak_js(nx: usize, length: f64, sigma0: f64, t_end: f64) -> Result<String, JsError> {
    to_js(marshak(nx, length, sigma0, t_end))
}
