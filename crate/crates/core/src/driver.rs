//! Time-step orchestration: transport, macroscopic update, re-sampling, boundary sources.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::SimulationConfig;
use crate::error::Result;
use crate::fv::{crossing_taus, picard_update, CoefficientCache, FvContext, SolveReport};
use crate::mesh::{BoundarySpec, MacroField, Mesh2D, RegionMap};
use crate::output::{
    snapshot_name, snapshot_rows, spectrum_name, spectrum_rows, write_json, write_snapshot,
    write_spectrum, write_timeseries, TimeseriesRow,
};
use crate::radiometry::PhysConstants;
use crate::resample::{plan_resample, resample_all};
use crate::transport::{
    sample_boundary_particles, sample_initial_particles, spectrum_tally, track_all,
    InitialSpectrum, Particle, TrackingContext,
};

/// Diagnostics of one completed step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub step: u64,
    pub time: f64,
    pub total_energy: f64,
    /// `E^{n+1} - E^n - (inflow - outflow) / c`.
    pub balance_residual: f64,
    /// Resampling energy that stayed in the macroscopic field.
    pub remainder: f64,
    pub n_particles: usize,
    pub events: u64,
    pub inflow: f64,
    pub outflow: f64,
    pub report: SolveReport,
    pub wall_ms: f64,
}

pub struct Simulation {
    pub config: SimulationConfig,
    pub mesh: Mesh2D,
    pub regions: RegionMap,
    pub consts: PhysConstants,
    pub field: MacroField,
    /// Particles present at the start of the next step.
    pub particles: Vec<Particle>,
    /// Boundary particles tracked during the next step.
    pub inflow: Vec<Particle>,
    /// Census particles per cell at the end of the last step.
    pub n_census: Vec<usize>,
    pub step: u64,
    pub time: f64,
    pub w_ref: f64,
    cache: CoefficientCache,
}

#[cfg(not(target_arch = "wasm32"))]
struct Clock(std::time::Instant);
#[cfg(not(target_arch = "wasm32"))]
impl Clock {
    fn start() -> Self {
        Clock(std::time::Instant::now())
    }
    fn ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}
#[cfg(target_arch = "wasm32")]
struct Clock;
#[cfg(target_arch = "wasm32")]
impl Clock {
    fn start() -> Self {
        Clock
    }
    fn ms(&self) -> f64 {
        0.0
    }
}

/// Reference weight: the larger of the mean initial `rho` and the hottest inflow
/// `acT_b^4`, times the mean cell volume, spread over `per_cell` particles.
pub fn default_w_ref(
    mesh: &Mesh2D,
    rho0: &[f64],
    boundaries: &BoundarySpec,
    consts: &PhysConstants,
    per_cell: f64,
) -> f64 {
    let n = mesh.n_cells() as f64;
    let mean_rho = rho0.iter().sum::<f64>() / n;
    let inflow = boundaries
        .max_inflow_temperature()
        .map_or(0.0, |t| consts.ur(t));
    let scale = mean_rho.max(inflow).max(consts.ur(crate::mesh::T_FLOOR));
    scale * mesh.area() / n / per_cell
}

impl Simulation {
    pub fn new(config: SimulationConfig) -> Result<Self> {
        let built = config.build()?;
        let (mesh, regions, consts) = (built.mesh, built.regions, built.consts);
        let n = mesh.n_cells();
        let t0 = vec![config.initial.t; n];
        let mut field = MacroField::equilibrium(&consts, &t0);
        let rho0 = consts.ur(config.initial.radiation_temperature());
        field.rho = vec![rho0; n];
        let w_ref = match config.particles.w_ref {
            Some(w) => w,
            None => default_w_ref(
                &mesh,
                &field.rho,
                &config.boundary,
                &consts,
                config.particles.per_cell,
            ),
        };
        let init = InitialSpectrum {
            rho: field.rho.clone(),
            spectrum_t: vec![config.initial.spectrum_temperature(); n],
        };
        let particles = sample_initial_particles(
            &mesh,
            &init,
            w_ref,
            config.particles.max_per_cell,
            config.seed,
        )?;
        let dt = config.time.dt;
        let inflow =
            sample_boundary_particles(&mesh, &config.boundary, &consts, dt, w_ref, 0, config.seed);
        let cache = CoefficientCache::new(
            &regions,
            consts,
            dt,
            config.solver.quadrature.clone(),
            config.solver.sigma_floor,
        );
        Ok(Self {
            config,
            mesh,
            regions,
            consts,
            field,
            particles,
            inflow,
            n_census: vec![0; n],
            step: 0,
            time: 0.0,
            w_ref,
            cache,
        })
    }

    /// Steps needed to reach `t_end` with the fixed `dt`.
    pub fn n_steps(&self) -> u64 {
        let r = self.config.time.t_end / self.config.time.dt;
        (r - 1e-9).ceil().max(0.0) as u64
    }

    pub fn is_done(&self) -> bool {
        self.step >= self.n_steps()
    }

    /// `sum V (rho / c + Cv T)`.
    pub fn total_energy(&self) -> f64 {
        (0..self.mesh.n_cells())
            .map(|k| {
                self.mesh.volume(k)
                    * (self.field.rho[k] / self.consts.c
                        + self.regions.region(k).cv * self.field.t[k])
            })
            .sum()
    }

    /// Domain-averaged intensity per unit photon energy over `edges`.
    pub fn spectrum(&self, edges: &[f64]) -> Vec<f64> {
        spectrum_tally(
            self.particles.iter().map(|p| (p.w, p.u)),
            edges,
            self.mesh.area(),
        )
    }

    pub fn timeseries_row(&self, rec: Option<&StepRecord>) -> TimeseriesRow {
        TimeseriesRow {
            step: self.step,
            time_ns: self.time,
            total_energy: self.total_energy(),
            balance_residual: rec.map_or(0.0, |r| r.balance_residual),
            n_particles: self.particles.len(),
            picard_iters: rec.map_or(0, |r| r.report.picard_iterations),
            wall_ms: rec.map_or(0.0, |r| r.wall_ms),
        }
    }

    /// Advances one step; on error the state is left at the start of the step.
    pub fn advance(&mut self) -> Result<StepRecord> {
        let clock = Clock::start();
        let dt = self.config.time.dt;
        let seed = self.config.seed;
        let step = self.step;
        let e_before = self.total_energy();
        let crossing = crossing_taus(
            &self.field.t,
            &self.mesh,
            &self.regions,
            &mut self.cache,
            &self.config.limiter,
            &self.consts,
        );
        let tctx = TrackingContext {
            mesh: &self.mesh,
            regions: &self.regions,
            t_n: &self.field.t,
            boundaries: &self.config.boundary,
            consts: self.consts,
            dt,
            crossing: crossing.as_ref(),
        };
        let resident = self.particles.clone();
        let inflow = self.inflow.clone();
        let (tallies, mut survivors) = track_all(resident, inflow, &tctx, step, seed)?;
        let fctx = FvContext {
            mesh: &self.mesh,
            regions: &self.regions,
            consts: self.consts,
            dt,
            solver: &self.config.solver,
            limiter: &self.config.limiter,
            boundaries: &self.config.boundary,
        };
        let (next, mut report) =
            picard_update(&fctx, &mut self.cache, &self.field, Some(&tallies))?;
        let plan = plan_resample(
            &self.mesh,
            &next.rho,
            &tallies.e_census,
            self.w_ref,
            self.config.particles.tilt,
        );
        let emitted = resample_all(
            &self.mesh,
            &self.regions,
            &plan,
            &next.t,
            &self.consts,
            dt,
            &self.config.solver.quadrature,
            step,
            seed,
        );
        for p in &mut survivors {
            p.t_local = 0.0;
        }
        self.n_census = tallies.census.iter().map(Vec::len).collect();
        survivors.extend(emitted);
        self.particles = survivors;
        self.field = next;
        self.step += 1;
        self.time = self.step as f64 * dt;
        self.inflow = sample_boundary_particles(
            &self.mesh,
            &self.config.boundary,
            &self.consts,
            dt,
            self.w_ref,
            self.step,
            seed,
        );
        let total_energy = self.total_energy();
        let outflow = tallies.e_outflow + report.boundary_loss;
        let balance_residual =
            total_energy - e_before - (tallies.e_inflow - outflow) / self.consts.c;
        report.energy_balance_residual = balance_residual;
        Ok(StepRecord {
            step: self.step,
            time: self.time,
            total_energy,
            balance_residual,
            remainder: plan.dropped_remainder(&self.mesh) / self.consts.c,
            n_particles: self.particles.len(),
            events: tallies.events,
            inflow: tallies.e_inflow / self.consts.c,
            outflow: outflow / self.consts.c,
            report,
            wall_ms: clock.ms(),
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub steps: u64,
    pub final_time_ns: f64,
    pub w_ref: f64,
    pub n_cells: usize,
    pub initial_energy: f64,
    pub final_energy: f64,
    pub max_abs_balance_residual: f64,
    pub max_picard_iterations: usize,
    pub total_events: u64,
    pub final_particles: usize,
    pub wall_ms: f64,
    pub files: Vec<PathBuf>,
    pub failure: Option<String>,
}

fn on_stride(step: u64, stride: usize, last: bool) -> bool {
    last || (stride > 0 && step.is_multiple_of(stride as u64))
}

/// Runs to `t_end`, writing snapshots, spectra, `timeseries.csv` and `summary.json` into `out_dir`.
///
/// A failing step dumps the state it started from as `failure_snapshot.csv` before the error returns.
pub fn run_simulation(config: SimulationConfig, out_dir: &Path) -> Result<RunSummary> {
    let clock = Clock::start();
    let mut sim = Simulation::new(config)?;
    let n_steps = sim.n_steps();
    let bins = sim.config.particles.spectrum.clone();
    let edges = bins.as_ref().map(|b| b.edges());
    let (snap_stride, spec_stride) = (
        sim.config.output.snapshot_stride,
        sim.config.output.spectrum_stride,
    );
    let mut files = Vec::new();
    let write_state = |sim: &Simulation, files: &mut Vec<PathBuf>, last: bool| -> Result<()> {
        if sim.step == 0 || on_stride(sim.step, snap_stride, last) {
            let p = out_dir.join(snapshot_name(sim.step));
            let rows = snapshot_rows(
                &sim.mesh,
                &sim.field,
                &sim.consts,
                &sim.n_census,
                sim.step,
                sim.time,
            );
            write_snapshot(&rows, &p)?;
            files.push(p);
        }
        if let Some(edges) = &edges {
            if on_stride(sim.step, spec_stride, last) {
                let p = out_dir.join(spectrum_name(sim.step));
                write_spectrum(&spectrum_rows(edges, &sim.spectrum(edges)), &p)?;
                files.push(p);
            }
        }
        Ok(())
    };
    write_state(&sim, &mut files, n_steps == 0)?;
    let initial_energy = sim.total_energy();
    let mut rows = vec![sim.timeseries_row(None)];
    let mut summary = RunSummary {
        steps: 0,
        final_time_ns: 0.0,
        w_ref: sim.w_ref,
        n_cells: sim.mesh.n_cells(),
        initial_energy,
        final_energy: initial_energy,
        max_abs_balance_residual: 0.0,
        max_picard_iterations: 0,
        total_events: 0,
        final_particles: sim.particles.len(),
        wall_ms: 0.0,
        files: Vec::new(),
        failure: None,
    };
    let mut failure = None;
    while !sim.is_done() {
        match sim.advance() {
            Ok(rec) => {
                log::debug!(
                    "step {} t={:.6} E={:.9e} resid={:.3e} picard={} particles={}",
                    rec.step,
                    rec.time,
                    rec.total_energy,
                    rec.balance_residual,
                    rec.report.picard_iterations,
                    rec.n_particles
                );
                summary.max_abs_balance_residual = summary
                    .max_abs_balance_residual
                    .max(rec.balance_residual.abs());
                summary.max_picard_iterations = summary
                    .max_picard_iterations
                    .max(rec.report.picard_iterations);
                summary.total_events += rec.events;
                rows.push(sim.timeseries_row(Some(&rec)));
                write_state(&sim, &mut files, sim.is_done())?;
            }
            Err(e) => {
                log::error!("step {} failed: {e}", sim.step + 1);
                let p = out_dir.join("failure_snapshot.csv");
                let dump = snapshot_rows(
                    &sim.mesh,
                    &sim.field,
                    &sim.consts,
                    &sim.n_census,
                    sim.step,
                    sim.time,
                );
                write_snapshot(&dump, &p)?;
                files.push(p);
                failure = Some(e);
                break;
            }
        }
    }
    let ts = out_dir.join("timeseries.csv");
    write_timeseries(&rows, &ts)?;
    files.push(ts);
    summary.steps = sim.step;
    summary.final_time_ns = sim.time;
    summary.final_energy = sim.total_energy();
    summary.final_particles = sim.particles.len();
    summary.wall_ms = clock.ms();
    summary.failure = failure
        .as_ref()
        .map(|e| format!("step {}: {e}", sim.step + 1));
    let sp = out_dir.join("summary.json");
    files.push(sp.clone());
    summary.files = files;
    write_json(&summary, &sp)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(summary),
    }
}
