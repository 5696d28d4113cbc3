//! One pass/fail line per acceptance criterion; exits non-zero if an asserted one fails.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use ugkp::config::SimulationConfig;
use ugkp::fv::{
    assemble_coefficients, assemble_system, picard_update, CoefficientCache, FreeTransport,
    FvContext, LimiterSettings, SolverSettings,
};
use ugkp::mesh::{
    BoundaryCondition, BoundarySpec, MacroField, MaterialRegion, Mesh2D, RegionMap, T_FLOOR,
};
use ugkp::oracles::{
    free_stream_density, free_stream_exact, multigroup_homogeneous_solve,
    rosseland_diffusion_solve, rosseland_diffusion_step, DiffusionBoundary, DiffusionProblem,
    MultigroupProblem,
};
use ugkp::output::{read_snapshot, read_timeseries, snapshot_name, SnapshotRow};
use ugkp::presets::preset;
use ugkp::radiometry::{
    dplanck_dt, effective_kappa, emission_gamma, planck_b, planck_mean, rosseland_mean,
    OpacityModel, PhysConstants, QuadratureRule, SIGMA_FLOOR,
};
use ugkp::transport::Particle;
use ugkp::{run_simulation, Simulation};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Composite Simpson rule on `[a, b]` with `n` (even) panels.
fn simpson(a: f64, b: f64, n: usize, f: impl Fn(f64) -> f64) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * k as f64);
    }
    s * h / 3.0
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn radiometry_identities() -> Outcome {
    let c = PhysConstants::default();
    let rule = QuadratureRule::default();
    let (mut norm, mut deriv, mut gray) = (0.0f64, 0.0f64, 0.0f64);
    for t in [0.01, 0.1, 1.0, 10.0] {
        let b = |u: f64| {
            if u > 0.0 {
                planck_b(u, t).unwrap()
            } else {
                0.0
            }
        };
        let nb = simpson(0.0, 60.0 * t, 60_000, b);
        norm = norm.max((nb - 1.0).abs());
        let db = |u: f64| {
            if u > 0.0 {
                dplanck_dt(&c, u, t).unwrap()
            } else {
                0.0
            }
        };
        let d = 4.0 * std::f64::consts::PI * simpson(0.0, 60.0 * t, 60_000, db);
        deriv = deriv.max(rel(d, 4.0 * c.ac() * t.powi(3)));
        for sigma in [3e-3, 7.0, 4e5] {
            let models = [
                OpacityModel::GrayConstant { sigma0: sigma },
                OpacityModel::GrayPowerLaw {
                    sigma0: sigma * t.powi(3),
                    exponent: 3.0,
                },
                OpacityModel::FrequencyStep {
                    sigma_low: sigma,
                    sigma_high: sigma,
                    u_split: t,
                },
            ];
            for m in models {
                let sp = planck_mean(&m, t, &rule).unwrap();
                let sr = rosseland_mean(&m, t, &rule, SIGMA_FLOOR).unwrap();
                let g = emission_gamma(&m, t, 1e-3, &c, &rule).unwrap().value;
                gray = gray
                    .max(rel(sp, sigma))
                    .max(rel(sr, sigma))
                    .max(rel(g, sigma));
            }
        }
    }
    outcome(
        norm < 1e-8 && deriv < 1e-6 && gray < 1e-12,
        format!("max |int b - 1| = {norm:.2e}, max rel dB/dT error = {deriv:.2e}, max gray reduction error = {gray:.2e}"),
    )
}

fn kappa_asymptotics() -> Outcome {
    let rule = QuadratureRule::default();
    let dt = 1e-3;
    let (mut thick, mut thin_ratio) = (0.0f64, 0.0f64);
    for eps in [1.0, 0.1] {
        let c = PhysConstants::with_epsilon(eps);
        let sigma_at = |x: f64| x * eps * eps / (c.c * dt);
        let s = sigma_at(1e6);
        let k = effective_kappa(
            &OpacityModel::GrayConstant { sigma0: s },
            1.0,
            dt,
            &c,
            &rule,
            SIGMA_FLOOR,
        )
        .unwrap();
        thick = thick.max((k + c.c * dt / (3.0 * s)).abs() * 3.0 * s / (c.c * dt));
        let s = sigma_at(1e-6);
        let k = effective_kappa(
            &OpacityModel::GrayConstant { sigma0: s },
            1.0,
            dt,
            &c,
            &rule,
            SIGMA_FLOOR,
        )
        .unwrap();
        let bound = c.c.powi(3) * s * dt.powi(3) / (6.0 * eps.powi(4));
        thin_ratio = thin_ratio.max(k.abs() / bound);
    }
    outcome(
        thick < 1e-3 && thin_ratio <= 1.01,
        format!("thick relative deviation = {thick:.2e}, thin |kappa| / bound = {thin_ratio:.6}"),
    )
}

fn uniform_regions(mesh: &Mesh2D, opacity: OpacityModel, cv: f64) -> RegionMap {
    RegionMap::build(
        mesh,
        vec![MaterialRegion {
            opacity,
            cv,
            rects: vec![],
        }],
    )
    .unwrap()
}

fn ap_equivalence() -> Outcome {
    let consts = PhysConstants::default();
    let sigma = 1e6;
    let dt = 0.1;
    // c dt / (3 sigma dx^2) ~ 1: diffusion matters within one step
    let n = 16;
    let len = 1.6e-2;
    let mesh = Mesh2D::uniform(n, n, [0.0, len], [0.0, len]).unwrap();
    let regions = uniform_regions(&mesh, OpacityModel::GrayConstant { sigma0: sigma }, 0.1);
    let t_n: Vec<f64> = (0..mesh.n_cells())
        .map(|k| {
            let (x, y) = mesh.center(k);
            let r2 = ((x - 0.5 * len).powi(2) + (y - 0.4 * len).powi(2)) / (0.2 * len).powi(2);
            0.1 + 0.9 * (-r2).exp()
        })
        .collect();
    let solver = SolverSettings {
        picard_tol: 1e-12,
        linear_tol: 1e-14,
        ..SolverSettings::default()
    };
    let limiter = LimiterSettings::default();
    let closed = BoundarySpec::uniform(BoundaryCondition::Reflective);
    let ctx = FvContext {
        mesh: &mesh,
        regions: &regions,
        consts,
        dt,
        solver: &solver,
        limiter: &limiter,
        boundaries: &closed,
    };
    let mut cache =
        CoefficientCache::new(&regions, consts, dt, solver.quadrature.clone(), SIGMA_FLOOR);
    let state = MacroField::equilibrium(&consts, &t_n);
    let (next, _) = picard_update(&ctx, &mut cache, &state, None).unwrap();

    let mut problem = DiffusionProblem::new(
        &mesh,
        &regions,
        consts,
        [DiffusionBoundary::ZeroFlux; 4],
        dt,
    );
    problem.picard_tol = 1e-12;
    let mut ocache = problem.cache();
    let (oracle, _) = rosseland_diffusion_step(&problem, &mut ocache, &t_n).unwrap();
    let step_err = (0..mesh.n_cells())
        .map(|k| rel(next.t[k], oracle[k]))
        .fold(0.0, f64::max);
    let moved = (0..mesh.n_cells())
        .map(|k| rel(oracle[k], t_n[k]))
        .fold(0.0, f64::max);

    // U_nb coefficient of the rho row against c dt / (3 sigma dx h)
    let free = FreeTransport::none(mesh.n_cells());
    let coef = assemble_coefficients(&ctx, &mut cache, &next.t, &t_n, None, &free);
    let sys = assemble_system(&ctx, &coef, &state.rho, &state.ur, &free);
    let dx = len / n as f64;
    let expected = -consts.c * dt / (3.0 * sigma * dx * dx);
    let mut stencil = 0.0f64;
    for k in 0..mesh.n_cells() {
        let (i, j) = mesh.ij(k);
        let m = &sys.matrix;
        let entries = [
            (i > 0).then(|| m.west[k] / sys.q[k - 1]),
            (i + 1 < n).then(|| m.east[k] / sys.q[k + 1]),
            (j > 0).then(|| m.south[k] / sys.q[k - n]),
            (j + 1 < n).then(|| m.north[k] / sys.q[k + n]),
        ];
        for a in entries.into_iter().flatten() {
            stencil = stencil.max(rel(a, expected));
        }
    }
    outcome(
        step_err < 1e-6 && stencil < 1e-4 && moved > 1e-3,
        format!("max cell T deviation = {step_err:.2e} (oracle moved T by up to {moved:.2e}), max stencil deviation = {stencil:.2e}"),
    )
}

fn transparent_config() -> SimulationConfig {
    SimulationConfig::from_toml_str(
        r#"
[mesh]
nx = 20
ny = 20
x = [0.0, 2.0]
y = [0.0, 2.0]
[time]
dt = 1e-3
t_end = 1e-2
[initial]
T = 0.01
[material.0]
cv = 1.0
[material.0.opacity]
kind = "gray-constant"
sigma0 = 1e-12
[boundary.left]
kind = "reflective"
[boundary.right]
kind = "reflective"
[boundary.bottom]
kind = "reflective"
[boundary.top]
kind = "reflective"
"#,
    )
    .unwrap()
}

fn cell_weights(mesh: &Mesh2D, particles: &[Particle]) -> Vec<f64> {
    free_stream_density(particles, mesh)
}

fn free_streaming() -> Outcome {
    let mut sim = Simulation::new(transparent_config()).unwrap();
    let c = sim.consts;
    let omega = [0.8, 0.6, 0.0];
    let (nx, ny) = (250, 400);
    let w = 1e-9;
    let mut pulse = Vec::with_capacity(nx * ny);
    for a in 0..nx {
        for b in 0..ny {
            let x = 0.2 + 0.2 * (a as f64 + 0.5) / nx as f64;
            let y = 0.5 + 0.4 * (b as f64 + 0.5) / ny as f64;
            let (i, j) = sim.mesh.locate_cell(x, y).unwrap();
            pulse.push(Particle {
                w,
                x,
                y,
                omega,
                u: 1.0,
                t_local: 0.0,
                cell: sim.mesh.index(i, j),
            });
        }
    }
    sim.field.rho = cell_weights(&sim.mesh, &pulse);
    sim.particles = pulse.clone();
    let mut tally_err = 0.0f64;
    let scale = sim.field.rho.iter().cloned().fold(0.0, f64::max);
    for _ in 0..10 {
        let before = cell_weights(&sim.mesh, &sim.particles);
        let rho_n = sim.field.rho.clone();
        sim.advance().unwrap();
        let after = cell_weights(&sim.mesh, &sim.particles);
        for k in 0..sim.mesh.n_cells() {
            let d = sim.field.rho[k] - (rho_n[k] + after[k] - before[k]);
            tally_err = tally_err.max(d.abs() / scale);
        }
    }
    let exact = free_stream_exact(&pulse, sim.time, &c);
    let same_count = exact.len() == sim.particles.len();
    let pos_err = exact
        .iter()
        .zip(&sim.particles)
        .map(|(e, p)| (e.x - p.x).abs().max((e.y - p.y).abs()))
        .fold(0.0, f64::max);
    outcome(
        same_count && pos_err < 1e-10 && tally_err < 1e-12,
        format!(
            "{} particles, max position error = {pos_err:.2e} cm, max rho tally deviation = {tally_err:.2e} (relative to peak rho)",
            sim.particles.len()
        ),
    )
}

/// Worst per-step `|residual| / (1e-6 E + w_ref N_cells / c)` of a finished run.
fn balance_ratio(dir: &Path, w_ref: f64, n_cells: usize, c: f64) -> f64 {
    read_timeseries(&dir.join("timeseries.csv"))
        .unwrap()
        .iter()
        .map(|r| r.balance_residual.abs() / (1e-6 * r.total_energy + w_ref * n_cells as f64 / c))
        .fold(0.0, f64::max)
}

struct Desk {
    name: &'static str,
    ratio: f64,
    steps: u64,
    /// One reference particle's density in the smallest cell.
    granularity: f64,
    dir: tempfile::TempDir,
}

fn desk_run(name: &'static str, scale: f64, t_end: f64) -> Desk {
    let cfg = preset(name)
        .unwrap()
        .with_mesh_scale(scale)
        .unwrap()
        .with_t_end(t_end);
    let c = cfg.consts().c;
    let mesh = cfg.build().unwrap().mesh;
    let v_min = (0..mesh.n_cells())
        .map(|k| mesh.volume(k))
        .fold(f64::INFINITY, f64::min);
    let dir = tempfile::tempdir().unwrap();
    let s = run_simulation(cfg, dir.path()).unwrap();
    Desk {
        name,
        ratio: balance_ratio(dir.path(), s.w_ref, s.n_cells, c),
        steps: s.steps,
        granularity: s.w_ref / v_min,
        dir,
    }
}

fn final_snapshot(d: &Desk) -> Vec<SnapshotRow> {
    read_snapshot(&d.dir.path().join(snapshot_name(d.steps))).unwrap()
}

struct Homogeneous {
    outcome: Outcome,
    ratio: f64,
}

/// Prominence of each strict local maximum of `v`.
fn prominences(v: &[f64]) -> Vec<(usize, f64)> {
    let n = v.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left = if i == 0 { f64::NEG_INFINITY } else { v[i - 1] };
        let right = if i + 1 == n {
            f64::NEG_INFINITY
        } else {
            v[i + 1]
        };
        if !(v[i] > left && v[i] > right) {
            continue;
        }
        let side = |range: &mut dyn Iterator<Item = usize>| {
            let mut low = v[i];
            for k in range {
                if v[k] > v[i] {
                    return low;
                }
                low = low.min(v[k]);
            }
            low
        };
        let base = side(&mut (0..i).rev()).max(side(&mut (i + 1..n)));
        out.push((i, v[i] - base));
    }
    out
}

fn homogeneous_relaxation() -> Homogeneous {
    let cfg = preset("homogeneous").unwrap();
    let built = cfg.build().unwrap();
    let region = &built.regions.regions[0];
    let oracle = multigroup_homogeneous_solve(&MultigroupProblem {
        consts: built.consts,
        model: region.opacity,
        cv: region.cv,
        t0: cfg.initial.t,
        radiation_t: cfg.initial.radiation_temperature(),
        spectrum_t: cfg.initial.spectrum_temperature(),
        groups: 10_000,
        dt: cfg.time.dt,
        t_end: cfg.time.t_end,
    })
    .unwrap();
    let edges = cfg.particles.spectrum.as_ref().unwrap().edges();
    let mut sim = Simulation::new(cfg).unwrap();
    let n_cells = sim.mesh.n_cells() as f64;
    let mut ratio = 0.0f64;
    while !sim.is_done() {
        let r = sim.advance().unwrap();
        let bound = 1e-6 * r.total_energy + sim.w_ref * n_cells / sim.consts.c;
        ratio = ratio.max(r.balance_residual.abs() / bound);
    }
    let t_err = rel(sim.field.t[0], oracle.final_state.t);
    let ugkp = sim.spectrum(&edges);
    let reference = oracle.final_state.binned_intensity(&edges);
    let du: Vec<f64> = edges.windows(2).map(|e| e[1] - e[0]).collect();
    let l1 = (0..du.len())
        .map(|k| (ugkp[k] - reference[k]).abs() * du[k])
        .sum::<f64>()
        / (0..du.len())
            .map(|k| reference[k].abs() * du[k])
            .sum::<f64>();
    // per-bin standard error sqrt(sum w^2) in the tally's own normalization
    let mut w1 = vec![0.0; du.len()];
    let mut w2 = vec![0.0; du.len()];
    for p in &sim.particles {
        if p.u >= edges[0] && p.u < edges[du.len()] {
            let k = edges.partition_point(|&e| e <= p.u) - 1;
            w1[k] += p.w;
            w2[k] += p.w * p.w;
        }
    }
    let noise: Vec<f64> = (0..du.len())
        .map(|k| {
            if w1[k] > 0.0 {
                ugkp[k] / w1[k] * w2[k].sqrt()
            } else {
                0.0
            }
        })
        .collect();
    let peaks: Vec<f64> = prominences(&ugkp)
        .into_iter()
        .filter(|&(k, p)| p > 3.0 * noise[k] && noise[k] > 0.0)
        .map(|(k, _)| (edges[k] * edges[k + 1]).sqrt())
        .collect();
    let pass = t_err < 1e-2 && l1 < 0.1 && peaks.len() == 2;
    Homogeneous {
        outcome: outcome(
            pass,
            format!(
                "T = {:.6} vs oracle {:.6} (rel {t_err:.2e}), spectrum L1 = {:.2}%, peaks above 3 sigma at {:?} keV",
                sim.field.t[0],
                oracle.final_state.t,
                100.0 * l1,
                peaks.iter().map(|u| (u * 1e3).round() / 1e3).collect::<Vec<_>>()
            ),
        ),
        ratio,
    }
}

/// First `x` where `T` falls through `level`, interpolated between cell centres.
fn front(x: &[f64], t: &[f64], level: f64) -> f64 {
    for k in 1..t.len() {
        if t[k - 1] >= level && t[k] < level {
            let s = (t[k - 1] - level) / (t[k - 1] - t[k]);
            return x[k - 1] + s * (x[k] - x[k - 1]);
        }
    }
    if t[0] < level {
        x[0]
    } else {
        *x.last().unwrap()
    }
}

fn marshak_config(n: usize, dt: f64) -> SimulationConfig {
    let mut cfg = preset("marshak-gray").unwrap();
    let len = 0.25;
    cfg.mesh = ugkp::config::MeshConfig::uniform(n, 1, [0.0, len], [0.0, len / n as f64]);
    cfg.time.dt = dt;
    cfg.time.t_end = 1.0;
    cfg
}

fn ugkp_front(cfg: SimulationConfig) -> f64 {
    let mut sim = Simulation::new(cfg).unwrap();
    while !sim.is_done() {
        sim.advance().unwrap();
    }
    let x: Vec<f64> = (0..sim.mesh.n_cells())
        .map(|k| sim.mesh.center(k).0)
        .collect();
    front(&x, &sim.field.t, 0.5)
}

fn marshak_front() -> Outcome {
    let cfg = marshak_config(100, 1.6e-3);
    let built = cfg.build().unwrap();
    let p = DiffusionProblem::new(
        &built.mesh,
        &built.regions,
        built.consts,
        DiffusionBoundary::from_spec(&cfg.boundary),
        cfg.time.dt,
    );
    let t0 = vec![cfg.initial.t; built.mesh.n_cells()];
    let run = rosseland_diffusion_solve(&p, &t0, cfg.time.t_end, 0).unwrap();
    let x: Vec<f64> = (0..built.mesh.n_cells())
        .map(|k| built.mesh.center(k).0)
        .collect();
    let oracle = front(&x, run.final_field(), 0.5);
    let dx = built.mesh.dx(0);
    let coarse = ugkp_front(cfg);
    let fine = ugkp_front(marshak_config(100, 0.8e-3));
    let off = (coarse - oracle).abs() / dx;
    let shift = (fine - coarse).abs() / dx;
    outcome(
        off <= 2.0 && shift < 1.0,
        format!(
            "front {coarse:.5} cm vs oracle {oracle:.5} cm ({off:.2} cells), halving dt moves it {shift:.2} cells"
        ),
    )
}

fn box_mean(rows: &[SnapshotRow], x: [f64; 2], y: [f64; 2]) -> f64 {
    let inside: Vec<f64> = rows
        .iter()
        .filter(|r| r.x_cm > x[0] && r.x_cm < x[1] && r.y_cm > y[0] && r.y_cm < y[1])
        .map(|r| r.tr_kev)
        .collect();
    inside.iter().sum::<f64>() / inside.len().max(1) as f64
}

/// `T`, `T_r` and `U_r` must be finite and nonnegative with `T` in bounds; `rho` keeps
/// negative re-sampling remainders by design, so it may dip below zero by less than
/// one reference particle. Returns the verdict, the negative-`rho` count and the minimum `rho`.
fn field_sane(d: &Desk, t_max: f64) -> (bool, usize, f64) {
    let rows = final_snapshot(d);
    let ok = rows.iter().all(|r| {
        [r.t_kev, r.tr_kev, r.ur]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
            && r.rho.is_finite()
            && r.rho > -d.granularity
            && r.t_kev >= T_FLOOR
            && r.t_kev <= t_max
    });
    let negative = rows.iter().filter(|r| r.rho < 0.0).count();
    let min = rows.iter().map(|r| r.rho).fold(f64::INFINITY, f64::min);
    (ok, negative, min)
}

fn hohlraum_smoke(gray: &Desk, mf: &Desk, gray_long: &Desk) -> Outcome {
    // both presets drive at most 1 keV
    let t_max = 1.05;
    let mut sane = true;
    let mut notes = Vec::new();
    for d in [gray, mf, gray_long] {
        let (ok, negative, min) = field_sane(d, t_max);
        sane &= ok;
        notes.push(format!(
            "{} {}: {negative} cells with rho < 0, min rho {min:.1e} vs granularity {:.1e}",
            d.name,
            d.dir
                .path()
                .join(snapshot_name(d.steps))
                .file_name()
                .unwrap()
                .to_string_lossy(),
            d.granularity
        ));
    }
    let rows = final_snapshot(gray_long);
    let behind = box_mean(&rows, [0.8, 0.9], [0.45, 0.55]);
    let sight = box_mean(&rows, [0.8, 0.9], [0.1, 0.2]);
    outcome(
        sane && behind < sight,
        format!(
            "fields in bounds: {sane} ({}); mean Tr behind block {behind:.4} keV vs line of sight {sight:.4} keV at 1 ns",
            notes.join("; ")
        ),
    )
}

fn event_config(sigma: f64) -> SimulationConfig {
    let mut cfg = transparent_config();
    cfg.mesh = ugkp::config::MeshConfig::uniform(50, 50, [0.0, 1.0], [0.0, 1.0]);
    cfg.time.dt = 1e-2;
    cfg.initial.t = 1.0;
    cfg.particles.per_cell = 20.0;
    let region = cfg.material.get_mut("0").unwrap();
    region.opacity = OpacityModel::GrayConstant { sigma0: sigma };
    cfg
}

fn regime_cost() -> Outcome {
    let events = |sigma: f64| {
        let mut sim = Simulation::new(event_config(sigma)).unwrap();
        let n = sim.particles.len();
        (sim.advance().unwrap().events, n)
    };
    let (thick, n_thick) = events(1e3);
    let (thin, n_thin) = events(1e-3);
    let ratio = thin as f64 / thick as f64;
    outcome(
        n_thick == n_thin && ratio >= 10.0,
        format!("{n_thin} particles: {thin} events at sigma = 1e-3, {thick} at sigma = 1e3 (ratio {ratio:.1})"),
    )
}

fn report(number: usize, title: &str, asserted: bool, started: Instant, o: &Outcome) -> bool {
    let verdict = if o.pass { "PASS" } else { "FAIL" };
    let note = if asserted {
        ""
    } else {
        " [logged, not asserted]"
    };
    println!(
        "criterion {number} {title}: {verdict}{note} ({:.1} s) {}",
        started.elapsed().as_secs_f64(),
        o.detail
    );
    o.pass || !asserted
}

fn main() -> ExitCode {
    let mut ok = true;

    let s = Instant::now();
    ok &= report(
        1,
        "radiometry identities",
        true,
        s,
        &radiometry_identities(),
    );
    let s = Instant::now();
    ok &= report(2, "kappa_eff asymptotics", true, s, &kappa_asymptotics());
    let s = Instant::now();
    ok &= report(
        3,
        "asymptotic-preserving one-step equivalence",
        true,
        s,
        &ap_equivalence(),
    );
    let s = Instant::now();
    ok &= report(4, "free-streaming consistency", true, s, &free_streaming());

    let s = Instant::now();
    let homogeneous = homogeneous_relaxation();
    let t6 = s.elapsed();
    let s = Instant::now();
    let desk = [
        desk_run("marshak-gray", 0.5, 0.2),
        desk_run("marshak-mf", 0.5, 0.2),
        desk_run("marshak-hetero", 0.5, 0.2),
        desk_run("hohlraum-gray", 0.5, 0.2),
        desk_run("hohlraum-mf", 0.5, 0.2),
    ];
    let mut ratios: Vec<(&str, f64)> = desk.iter().map(|d| (d.name, d.ratio)).collect();
    ratios.push(("homogeneous", homogeneous.ratio));
    let worst = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    let detail = ratios
        .iter()
        .map(|(n, r)| format!("{n} {r:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    let c5 = outcome(
        worst <= 1.0,
        format!("worst |residual| / bound per preset: {detail}"),
    );
    ok &= report(5, "energy conservation on every preset", true, s, &c5);
    println!(
        "criterion 6 homogeneous relaxation: {} ({:.1} s) {}",
        if homogeneous.outcome.pass {
            "PASS"
        } else {
            "FAIL"
        },
        t6.as_secs_f64(),
        homogeneous.outcome.detail
    );
    ok &= homogeneous.outcome.pass;

    let s = Instant::now();
    ok &= report(7, "gray Marshak front", true, s, &marshak_front());
    let s = Instant::now();
    let gray_long = desk_run("hohlraum-gray", 0.5, 1.0);
    ok &= report(
        8,
        "hohlraum smoke",
        true,
        s,
        &hohlraum_smoke(&desk[3], &desk[4], &gray_long),
    );
    let s = Instant::now();
    report(9, "regime-adaptive cost", false, s, &regime_cost());

    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
