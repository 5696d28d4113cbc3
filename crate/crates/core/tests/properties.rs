use proptest::prelude::*;

use ugkp::config::SimulationConfig;
use ugkp::fv::{banded_solve, bicgstab, FivePoint};
use ugkp::mesh::{BoundaryCondition, BoundarySpec, MaterialRegion, Mesh2D, RegionMap};
use ugkp::oracles::{rosseland_diffusion_step, DiffusionBoundary, DiffusionProblem};
use ugkp::radiometry::{
    effective_kappa, emission_gamma, planck_b, planck_mean, rosseland_mean, sample_planck_u,
    OpacityModel, PhysConstants, QuadratureRule, SIGMA_FLOOR,
};
use ugkp::resample::{particle_count, plan_resample};
use ugkp::rng::{stream, Purpose};
use ugkp::transport::{sample_initial_particles, track_all, InitialSpectrum, TrackingContext};
use ugkp::Simulation;

fn gray_model() -> impl Strategy<Value = OpacityModel> {
    prop_oneof![
        (1e-6f64..1e6).prop_map(|s| OpacityModel::GrayConstant { sigma0: s }),
        (1e-2f64..1e3, 0.0f64..4.0).prop_map(|(s, e)| OpacityModel::GrayPowerLaw {
            sigma0: s,
            exponent: e
        }),
    ]
}

fn edges(n: usize, lo: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..1.0, n).prop_map(move |w| {
        let mut e = vec![lo];
        for d in w {
            e.push(e.last().unwrap() + d);
        }
        e
    })
}

fn config(nx: usize, sigma: f64, cv: f64, t0: f64, tr: f64, dt: f64) -> SimulationConfig {
    SimulationConfig::from_toml_str(&format!(
        r#"
seed = 7
[mesh]
nx = {nx}
ny = 3
x = [0.0, 1.0]
y = [0.0, 0.6]
[time]
dt = {dt:e}
t_end = {dt:e}
[initial]
T = {t0:e}
radiation_T = {tr:e}
[material.0]
cv = {cv:e}
[material.0.opacity]
kind = "gray-constant"
sigma0 = {sigma:e}
[boundary.left]
kind = "inflow-planck"
temperature = 0.5
[boundary.right]
kind = "outflow"
[boundary.bottom]
kind = "reflective"
[boundary.top]
kind = "reflective"
[particles]
per_cell = 30.0
"#
    ))
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn planck_scales_with_temperature(u in 1e-3f64..40.0, t in 1e-3f64..20.0, s in 0.1f64..10.0) {
        let b = planck_b(u, t).unwrap();
        let scaled = planck_b(s * u, s * t).unwrap();
        prop_assert!(b >= 0.0);
        prop_assert!((scaled * s - b).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn gray_models_reduce_exactly(m in gray_model(), t in 1e-2f64..10.0, dt in 1e-5f64..1e-1) {
        let c = PhysConstants::default();
        let rule = QuadratureRule::default();
        let s = m.evaluate(1.0, t);
        let sp = planck_mean(&m, t, &rule).unwrap();
        let sr = rosseland_mean(&m, t, &rule, SIGMA_FLOOR).unwrap();
        let g = emission_gamma(&m, t, dt, &c, &rule).unwrap().value;
        for v in [sp, sr, g] {
            prop_assert!((v / s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn kappa_grows_toward_diffusion_value(log_s in -4.0f64..6.0, dt in 1e-4f64..1e-2) {
        let c = PhysConstants::default();
        let rule = QuadratureRule::default();
        let frac = |s: f64| {
            let k = effective_kappa(&OpacityModel::GrayConstant { sigma0: s }, 1.0, dt, &c, &rule, SIGMA_FLOOR).unwrap();
            -k * 3.0 * s / (c.c * dt)
        };
        let s = 10f64.powf(log_s);
        let (a, b) = (frac(s), frac(2.0 * s));
        prop_assert!(a > 0.0 && a <= 1.0 && b <= 1.0);
        prop_assert!(b >= a);
    }

    #[test]
    fn planck_sampler_is_reproducible(seed in any::<u64>(), id in 0u64..1000, t in 1e-3f64..10.0) {
        let draw = || {
            let mut r = stream(seed, 3, Purpose::Initial, id);
            (0..8).map(|_| sample_planck_u(t, &mut r)).collect::<Vec<_>>()
        };
        let a = draw();
        prop_assert_eq!(&a, &draw());
        prop_assert!(a.iter().all(|&u| u > 0.0 && u.is_finite()));
    }

    #[test]
    fn volumes_tile_and_centres_locate(x in edges(6, -1.0), y in edges(4, 2.0)) {
        let mesh = Mesh2D::new(x.clone(), y.clone()).unwrap();
        let area = (x[6] - x[0]) * (y[4] - y[0]);
        let total: f64 = (0..mesh.n_cells()).map(|k| mesh.volume(k)).sum();
        prop_assert!((total / area - 1.0).abs() < 1e-12);
        for k in 0..mesh.n_cells() {
            prop_assert!(mesh.volume(k) > 0.0);
            let (cx, cy) = mesh.center(k);
            let (i, j) = mesh.locate_cell(cx, cy).unwrap();
            prop_assert_eq!(mesh.index(i, j), k);
        }
    }

    #[test]
    fn particle_count_splits_exactly(e in 0.0f64..1e3, w_ref in 1e-3f64..10.0) {
        let (n, w) = particle_count(e, w_ref);
        if e < w_ref {
            prop_assert_eq!(n, 0);
        } else {
            prop_assert!(n > 0 && w <= w_ref * (1.0 + 1e-15) && w > 0.5 * w_ref);
            prop_assert!((n as f64 * w / e - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn resample_plan_respects_sign_and_remainder(
        rho in prop::collection::vec(-1.0f64..3.0, 12),
        census in prop::collection::vec(0.0f64..2.0, 12),
        w_ref in 1e-3f64..0.5,
    ) {
        let mesh = Mesh2D::uniform(4, 3, [0.0, 1.0], [0.0, 0.75]).unwrap();
        let e_census: Vec<f64> = (0..12).map(|k| census[k] * mesh.volume(k)).collect();
        let plan = plan_resample(&mesh, &rho, &e_census, w_ref, false);
        for (k, c) in plan.cells.iter().enumerate() {
            if c.e_plus <= 0.0 {
                prop_assert_eq!(c.n_r, 0);
            }
            if c.n_r > 0 {
                let emitted = c.n_r as f64 * c.w_each;
                prop_assert!((emitted / (c.e_plus * mesh.volume(k)) - 1.0).abs() < 1e-14);
            }
        }
        prop_assert!(plan.dropped_remainder(&mesh) <= w_ref * 12.0);
    }

    #[test]
    fn tracking_balances_weight(log_s in -3.0f64..3.0, t in 0.05f64..2.0, seed in any::<u64>()) {
        let c = PhysConstants::default();
        let mesh = Mesh2D::uniform(5, 4, [0.0, 1.0], [0.0, 0.8]).unwrap();
        let regions = RegionMap::build(
            &mesh,
            vec![MaterialRegion { opacity: OpacityModel::GrayConstant { sigma0: 10f64.powf(log_s) }, cv: 0.3, rects: vec![] }],
        )
        .unwrap();
        let n = mesh.n_cells();
        let init = InitialSpectrum { rho: vec![c.ur(t); n], spectrum_t: vec![t; n] };
        let particles = sample_initial_particles(&mesh, &init, c.ur(t) * 0.04 / 20.0, 1000, seed).unwrap();
        let bounds = BoundarySpec {
            left: BoundaryCondition::Outflow,
            right: BoundaryCondition::Reflective,
            bottom: BoundaryCondition::Periodic,
            top: BoundaryCondition::Periodic,
        };
        let t_n = vec![t; n];
        let ctx = TrackingContext { mesh: &mesh, regions: &regions, t_n: &t_n, boundaries: &bounds, consts: c, dt: 5e-3, crossing: None };
        let total: f64 = particles.iter().map(|p| p.w).sum();
        let (tallies, survivors) = track_all(particles, Vec::new(), &ctx, 0, seed).unwrap();
        prop_assert!(tallies.balance_defect().abs() <= 1e-12 * total);
        let census: f64 = survivors.iter().map(|p| p.w).sum();
        prop_assert!((census - tallies.total_census()).abs() <= 1e-12 * total);
    }

    #[test]
    fn krylov_matches_banded(
        nx in 2usize..7,
        ny in 2usize..7,
        seed in prop::collection::vec(-1.0f64..1.0, 5 * 36 + 36),
    ) {
        let n = nx * ny;
        let mut a = FivePoint::zeros(nx, ny);
        let mut b = vec![0.0; n];
        for k in 0..n {
            let off = |s: usize| -0.24 * (1.0 + seed[5 * k + s]).abs();
            a.west[k] = off(0);
            a.east[k] = off(1);
            a.south[k] = off(2);
            a.north[k] = off(3);
            a.center[k] = 1.0 + (1.0 + seed[5 * k + 4]).abs();
            b[k] = seed[5 * 36 + k];
        }
        let direct = banded_solve(&a, &b).unwrap();
        let mut x = vec![0.0; n];
        bicgstab(&a, &b, &mut x, 1e-13, 500).unwrap();
        let scale = direct.iter().fold(1e-300, |m: f64, v| m.max(v.abs()));
        for k in 0..n {
            prop_assert!((x[k] - direct[k]).abs() <= 1e-9 * scale);
        }
    }

    #[test]
    fn zero_flux_diffusion_obeys_maximum_principle(t0 in prop::collection::vec(0.05f64..1.0, 16), sigma in 1.0f64..1e4) {
        let c = PhysConstants::default();
        let mesh = Mesh2D::uniform(4, 4, [0.0, 0.1], [0.0, 0.1]).unwrap();
        let regions = RegionMap::build(
            &mesh,
            vec![MaterialRegion { opacity: OpacityModel::GrayConstant { sigma0: sigma }, cv: 0.1, rects: vec![] }],
        )
        .unwrap();
        let p = DiffusionProblem::new(&mesh, &regions, c, [DiffusionBoundary::ZeroFlux; 4], 1e-3);
        let mut cache = p.cache();
        let (t1, _) = rosseland_diffusion_step(&p, &mut cache, &t0).unwrap();
        let lo = t0.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = t0.iter().cloned().fold(0.0, f64::max);
        for t in t1 {
            prop_assert!(t >= lo * (1.0 - 1e-9) && t <= hi * (1.0 + 1e-9));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn one_step_conserves_energy_and_stays_nonnegative(
        nx in 2usize..6,
        log_s in -2.0f64..4.0,
        cv in 0.01f64..1.0,
        t0 in 0.01f64..1.0,
        tr in 0.01f64..1.0,
        dt in 1e-4f64..5e-3,
    ) {
        let mut sim = Simulation::new(config(nx, 10f64.powf(log_s), cv, t0, tr, dt)).unwrap();
        let n = sim.mesh.n_cells() as f64;
        let rec = sim.advance().unwrap();
        let bound = 1e-6 * rec.total_energy + sim.w_ref * n / sim.consts.c;
        prop_assert!(rec.balance_residual.abs() <= bound, "{} > {}", rec.balance_residual, bound);
        prop_assert!(sim.field.ur.iter().all(|&u| u > 0.0));
        prop_assert!(sim.field.t.iter().all(|&t| t.is_finite() && t > 0.0));
    }

    #[test]
    fn config_round_trips_through_toml(
        nx in 1usize..50,
        log_s in -3.0f64..3.0,
        cv in 0.01f64..1.0,
        t0 in 0.01f64..1.0,
        dt in 1e-5f64..1e-2,
    ) {
        let cfg = config(nx, 10f64.powf(log_s), cv, t0, t0, dt);
        let back = SimulationConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}
