use crate::error::{Error, Result};
use crate::fv::{secant_beta, solve, CoefficientCache, FivePoint};
use crate::mesh::{BoundaryCondition, BoundarySpec, Edge, Mesh2D, RegionMap, T_FLOOR};
use crate::radiometry::{PhysConstants, QuadratureRule, SIGMA_FLOOR};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiffusionBoundary {
    /// Fixed boundary temperature, keV.
    Dirichlet(f64),
    ZeroFlux,
    /// Incoming isotropic Planckian at the given temperature (0 for vacuum).
    Marshak(f64),
}

impl DiffusionBoundary {
    /// Inflow maps to Marshak, outflow to a vacuum Marshak condition, the rest to zero flux.
    pub fn from_condition(bc: BoundaryCondition) -> Self {
        match bc {
            BoundaryCondition::InflowPlanck { temperature } => {
                DiffusionBoundary::Marshak(temperature)
            }
            BoundaryCondition::Outflow => DiffusionBoundary::Marshak(0.0),
            BoundaryCondition::Reflective | BoundaryCondition::Periodic => {
                DiffusionBoundary::ZeroFlux
            }
        }
    }

    pub fn from_spec(spec: &BoundarySpec) -> [Self; 4] {
        Edge::ALL.map(|e| Self::from_condition(spec.get(e)))
    }
}

/// Nonlinear diffusion `d/dt (Cv T + a T^4) = div(a c / (3 sigma_R) grad T^4)`.
#[derive(Debug, Clone)]
pub struct DiffusionProblem<'a> {
    pub mesh: &'a Mesh2D,
    pub regions: &'a RegionMap,
    pub consts: PhysConstants,
    /// Left, right, bottom, top.
    pub boundaries: [DiffusionBoundary; 4],
    pub dt: f64,
    pub rule: QuadratureRule,
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub linear_tol: f64,
}

impl<'a> DiffusionProblem<'a> {
    pub fn new(
        mesh: &'a Mesh2D,
        regions: &'a RegionMap,
        consts: PhysConstants,
        boundaries: [DiffusionBoundary; 4],
        dt: f64,
    ) -> Self {
        Self {
            mesh,
            regions,
            consts,
            boundaries,
            dt,
            rule: QuadratureRule::default(),
            picard_tol: 1e-10,
            picard_max_iter: 500,
            linear_tol: 1e-13,
        }
    }

    pub fn cache(&self) -> CoefficientCache {
        CoefficientCache::new(
            self.regions,
            self.consts,
            self.dt,
            self.rule.clone(),
            SIGMA_FLOOR,
        )
    }
}

/// One backward-Euler step with Picard-lagged `sigma_R` and secant `beta`; returns `(T, iterations)`.
pub fn rosseland_diffusion_step(
    p: &DiffusionProblem<'_>,
    cache: &mut CoefficientCache,
    t_n: &[f64],
) -> Result<(Vec<f64>, usize)> {
    let mesh = p.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let n = nx * ny;
    let c = &p.consts;
    let ur_n: Vec<f64> = t_n.iter().map(|&t| c.ur(t)).collect();
    let mut t = t_n.to_vec();
    let mut u = ur_n.clone();
    let region = |k: usize| p.regions.cell_region[k];
    // boundary faces as (edge, cell, width); face temperatures are Picard-lagged
    let mut bfaces: Vec<(usize, usize, f64)> = Vec::new();
    for j in 0..ny {
        bfaces.push((0, mesh.index(0, j), mesh.dx(0)));
        bfaces.push((1, mesh.index(nx - 1, j), mesh.dx(nx - 1)));
    }
    for i in 0..nx {
        bfaces.push((2, mesh.index(i, 0), mesh.dy(0)));
        bfaces.push((3, mesh.index(i, ny - 1), mesh.dy(ny - 1)));
    }
    bfaces.retain(|&(e, _, _)| p.boundaries[e] != DiffusionBoundary::ZeroFlux);
    let boundary_t = |e: usize| match p.boundaries[e] {
        DiffusionBoundary::Dirichlet(tb) | DiffusionBoundary::Marshak(tb) => tb,
        DiffusionBoundary::ZeroFlux => 0.0,
    };
    let mut t_face: Vec<f64> = bfaces
        .iter()
        .map(|&(e, k, _)| (0.5 * (boundary_t(e) + t_n[k])).max(T_FLOOR))
        .collect();
    for it in 1..=p.picard_max_iter {
        let mut req: Vec<(usize, f64)> = (0..n).map(|k| (region(k), t[k])).collect();
        for j in 0..ny {
            for i in 0..nx {
                let k = mesh.index(i, j);
                if i + 1 < nx {
                    let tf = 0.5 * (t[k] + t[k + 1]);
                    req.extend([(region(k), tf), (region(k + 1), tf)]);
                }
                if j + 1 < ny {
                    let tf = 0.5 * (t[k] + t[k + nx]);
                    req.extend([(region(k), tf), (region(k + nx), tf)]);
                }
            }
        }
        req.extend(
            bfaces
                .iter()
                .zip(&t_face)
                .map(|(&(_, k, _), &tf)| (region(k), tf)),
        );
        cache.prepare(req);
        let sigma = |k: usize, tt: f64| cache.get(region(k), tt).sigma_r.max(SIGMA_FLOOR);
        let inv3s = |k: usize, tt: f64| 1.0 / (3.0 * sigma(k, tt));
        let face_d = |a: usize, b: usize| {
            let tf = 0.5 * (t[a] + t[b]);
            0.5 * (inv3s(a, tf) + inv3s(b, tf))
        };
        let mut m = FivePoint::zeros(nx, ny);
        let mut rhs = vec![0.0; n];
        for j in 0..ny {
            for i in 0..nx {
                let k = mesh.index(i, j);
                let cv = p.regions.region(k).cv;
                let cap = (cv / secant_beta(c, t[k], t_n[k]) + 1.0 / c.c) / p.dt;
                m.center[k] = cap;
                rhs[k] = cap * ur_n[k];
                let (dx, dy) = (mesh.dx(i), mesh.dy(j));
                let mut link = |d: f64, width: f64, h: f64, slot: &mut f64| {
                    let a = d / (width * h);
                    *slot -= a;
                    m.center[k] += a;
                };
                if i > 0 {
                    link(
                        face_d(k - 1, k),
                        dx,
                        0.5 * (mesh.dx(i - 1) + dx),
                        &mut m.west[k],
                    );
                }
                if i + 1 < nx {
                    link(
                        face_d(k, k + 1),
                        dx,
                        0.5 * (dx + mesh.dx(i + 1)),
                        &mut m.east[k],
                    );
                }
                if j > 0 {
                    link(
                        face_d(k - nx, k),
                        dy,
                        0.5 * (mesh.dy(j - 1) + dy),
                        &mut m.south[k],
                    );
                }
                if j + 1 < ny {
                    link(
                        face_d(k, k + nx),
                        dy,
                        0.5 * (dy + mesh.dy(j + 1)),
                        &mut m.north[k],
                    );
                }
            }
        }
        // flux into the cell = g (U_b - U_k) per unit face area
        let conductance = |f: usize| {
            let (e, k, width) = bfaces[f];
            let s = sigma(k, t_face[f]);
            match p.boundaries[e] {
                DiffusionBoundary::Dirichlet(_) => 1.0 / (3.0 * s) / (0.5 * width),
                _ => 0.5 / (1.0 + 0.75 * s * width),
            }
        };
        let g: Vec<f64> = (0..bfaces.len()).map(conductance).collect();
        for (f, &(e, k, width)) in bfaces.iter().enumerate() {
            m.center[k] += g[f] / width;
            rhs[k] += g[f] * c.ur(boundary_t(e)) / width;
        }
        solve(&m, &rhs, &mut u, p.linear_tol, 10_000)?;
        let floor = c.ur(T_FLOOR);
        let mut change: f64 = 0.0;
        for k in 0..n {
            u[k] = u[k].max(floor);
            let tn = (u[k] / c.ac()).sqrt().sqrt();
            change = change.max((tn - t[k]).abs() / t[k].max(T_FLOOR));
            t[k] = tn;
        }
        for (f, &(e, k, _)) in bfaces.iter().enumerate() {
            let ub = c.ur(boundary_t(e));
            let uf = match p.boundaries[e] {
                DiffusionBoundary::Dirichlet(_) => ub,
                _ => ub - 2.0 * g[f] * (ub - u[k]),
            };
            let tf = 0.5 * (t_face[f] + (uf.max(floor) / c.ac()).sqrt().sqrt());
            change = change.max((tf - t_face[f]).abs() / t_face[f].max(T_FLOOR));
            t_face[f] = tf.max(T_FLOOR);
        }
        if change < p.picard_tol {
            return Ok((t, it));
        }
        if !change.is_finite() {
            break;
        }
    }
    Err(Error::Picard {
        iterations: p.picard_max_iter,
        change: f64::NAN,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionRun {
    pub times: Vec<f64>,
    /// Temperature fields at the recorded times.
    pub fields: Vec<Vec<f64>>,
}

impl DiffusionRun {
    pub fn final_field(&self) -> &[f64] {
        self.fields.last().map(|v| v.as_slice()).unwrap_or(&[])
    }
}

/// Steps to `t_end`, recording every `stride` steps and the final state.
pub fn rosseland_diffusion_solve(
    p: &DiffusionProblem<'_>,
    t_init: &[f64],
    t_end: f64,
    stride: usize,
) -> Result<DiffusionRun> {
    let mut cache = p.cache();
    let n_steps = (t_end / p.dt - 1e-9).ceil().max(0.0) as usize;
    let mut t = t_init.to_vec();
    let mut run = DiffusionRun {
        times: vec![0.0],
        fields: vec![t.clone()],
    };
    for step in 1..=n_steps {
        t = rosseland_diffusion_step(p, &mut cache, &t)?.0;
        if step % stride.max(1) == 0 || step == n_steps {
            run.times.push(step as f64 * p.dt);
            run.fields.push(t.clone());
        }
    }
    Ok(run)
}
