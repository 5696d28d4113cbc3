use serde::{Deserialize, Serialize};

use super::coefficients::{assemble_face_kappa, AbsorptionForm, CoefficientCache, FaceField};
use super::limiter::LimiterSettings;
use super::linear::{banded_solve, solve, FivePoint, LinearReport, DIRECT_LIMIT};
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Edge, MacroField, Mesh2D, RegionMap};
use crate::radiometry::{PhysConstants, QuadratureRule, SIGMA_FLOOR};
use crate::transport::StepTallies;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub picard_tol: f64,
    pub picard_max_iter: usize,
    pub linear_tol: f64,
    pub linear_max_iter: usize,
    /// Continue with the last iterate instead of failing when Picard does not converge.
    pub accept_unconverged: bool,
    pub t_floor: f64,
    pub sigma_floor: f64,
    pub quadrature: QuadratureRule,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            picard_tol: 1e-8,
            picard_max_iter: 200,
            linear_tol: 1e-10,
            linear_max_iter: 5000,
            accept_unconverged: false,
            t_floor: crate::mesh::T_FLOOR,
            sigma_floor: SIGMA_FLOOR,
            quadrature: QuadratureRule::default(),
        }
    }
}

impl SolverSettings {
    pub(crate) fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut p = Vec::new();
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !pos(self.picard_tol) {
            p.push("solver.picard_tol: must be positive".into());
        }
        if self.picard_max_iter == 0 {
            p.push("solver.picard_max_iter: must be positive".into());
        }
        if !pos(self.linear_tol) {
            p.push("solver.linear_tol: must be positive".into());
        }
        if self.linear_max_iter == 0 {
            p.push("solver.linear_max_iter: must be positive".into());
        }
        if !pos(self.t_floor) {
            p.push("solver.t_floor: must be positive".into());
        }
        if !pos(self.sigma_floor) {
            p.push("solver.sigma_floor: must be positive".into());
        }
        if let Err(e) = self.quadrature.validate() {
            p.push(e);
        }
        if p.is_empty() {
            Ok(())
        } else {
            Err(p)
        }
    }
}

/// Immutable inputs of one macroscopic step.
#[derive(Debug, Clone, Copy)]
pub struct FvContext<'a> {
    pub mesh: &'a Mesh2D,
    pub regions: &'a RegionMap,
    pub consts: PhysConstants,
    pub dt: f64,
    pub solver: &'a SolverSettings,
    pub limiter: &'a LimiterSettings,
    pub boundaries: &'a BoundarySpec,
}

/// Particle contributions to the update, as densities.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeTransport {
    /// `(E_census + E_absorbed - E_init) / V`: net weight carried into each cell.
    pub net: Vec<f64>,
    /// `E_census / V`.
    pub e_free: Vec<f64>,
}

impl FreeTransport {
    pub fn from_tallies(tallies: &StepTallies, mesh: &Mesh2D) -> Self {
        let n = mesh.n_cells();
        let mut net = vec![0.0; n];
        let mut e_free = vec![0.0; n];
        for k in 0..n {
            let v = mesh.volume(k);
            net[k] = (tallies.e_census[k] + tallies.e_absorbed[k] - tallies.e_init[k]) / v;
            e_free[k] = tallies.e_census[k] / v;
        }
        Self { net, e_free }
    }

    pub fn none(n: usize) -> Self {
        Self {
            net: vec![0.0; n],
            e_free: vec![0.0; n],
        }
    }
}

/// Coefficients lagged at one Picard iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroCoefficients {
    pub sigma_p: Vec<f64>,
    pub beta: Vec<f64>,
    pub cv: Vec<f64>,
    pub gamma: Vec<f64>,
    /// `sum w sigma(u, T) / V` over the census.
    pub a: Vec<f64>,
    pub e_free: Vec<f64>,
    /// Signed `kappa_eff` per face before limiting; on inflow and outflow
    /// edges the boundary entry holds the adjacent cell's value, elsewhere 0.
    pub kappa: FaceField,
    pub factor: FaceField,
    pub limited_faces: usize,
}

/// `(U - U^n) / (T - T^n)` for `U = a c T^4`; equals `4 a c T^3` at `T = T^n`.
#[inline]
pub fn secant_beta(consts: &PhysConstants, t: f64, t_n: f64) -> f64 {
    consts.ac() * (t * t + t_n * t_n) * (t + t_n)
}

pub(crate) struct AbsorptionForms(Vec<AbsorptionForm>);

impl AbsorptionForms {
    pub(crate) fn new(ctx: &FvContext<'_>, tallies: Option<&StepTallies>) -> Self {
        let n = ctx.mesh.n_cells();
        Self(
            (0..n)
                .map(|k| match tallies {
                    Some(t) => AbsorptionForm::new(
                        &t.census[k],
                        ctx.regions.opacity(k),
                        ctx.mesh.volume(k),
                    ),
                    None => AbsorptionForm::Separable { base: 0.0 },
                })
                .collect(),
        )
    }
}

/// Recomputes every lagged coefficient at the iterate temperatures `t`.
pub fn assemble_coefficients(
    ctx: &FvContext<'_>,
    cache: &mut CoefficientCache,
    t: &[f64],
    t_n: &[f64],
    tallies: Option<&StepTallies>,
    free: &FreeTransport,
) -> MacroCoefficients {
    let forms = AbsorptionForms::new(ctx, tallies);
    assemble_with_forms(ctx, cache, t, t_n, tallies, free, &forms)
}

fn assemble_with_forms(
    ctx: &FvContext<'_>,
    cache: &mut CoefficientCache,
    t: &[f64],
    t_n: &[f64],
    tallies: Option<&StepTallies>,
    free: &FreeTransport,
    forms: &AbsorptionForms,
) -> MacroCoefficients {
    let n = ctx.mesh.n_cells();
    let regions = ctx.regions;
    cache.prepare((0..n).map(|k| (regions.cell_region[k], t[k])));
    let mut c = MacroCoefficients {
        sigma_p: vec![0.0; n],
        beta: vec![0.0; n],
        cv: vec![0.0; n],
        gamma: vec![0.0; n],
        a: vec![0.0; n],
        e_free: free.e_free.clone(),
        kappa: FaceField::filled(0, 0, 0.0),
        factor: FaceField::filled(0, 0, 1.0),
        limited_faces: 0,
    };
    for k in 0..n {
        let s = cache.get(regions.cell_region[k], t[k]);
        c.sigma_p[k] = s.sigma_p;
        c.gamma[k] = s.gamma;
        c.beta[k] = secant_beta(&ctx.consts, t[k], t_n[k]);
        c.cv[k] = regions.region(k).cv;
        c.a[k] = match tallies {
            Some(tl) => forms.0[k].at(&tl.census[k], t[k], regions.opacity(k), ctx.mesh.volume(k)),
            None => 0.0,
        };
    }
    let mut fc = assemble_face_kappa(t, ctx.mesh, regions, cache, ctx.limiter, &ctx.consts);
    open_edge_kappa(ctx, cache, t, &mut fc.kappa);
    c.kappa = fc.kappa;
    c.factor = fc.factor;
    c.limited_faces = fc.limited;
    c
}

fn is_open(bc: BoundaryCondition) -> bool {
    matches!(
        bc,
        BoundaryCondition::InflowPlanck { .. } | BoundaryCondition::Outflow
    )
}

/// Fills boundary faces of inflow and outflow edges with the cell's own `kappa_eff` at `T`.
fn open_edge_kappa(
    ctx: &FvContext<'_>,
    cache: &mut CoefficientCache,
    t: &[f64],
    kappa: &mut FaceField,
) {
    let mesh = ctx.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let mut faces: Vec<(bool, usize, usize)> = Vec::new();
    for edge in Edge::ALL {
        if !is_open(ctx.boundaries.get(edge)) {
            continue;
        }
        match edge {
            Edge::Left => faces.extend((0..ny).map(|j| (true, (nx + 1) * j, mesh.index(0, j)))),
            Edge::Right => {
                faces.extend((0..ny).map(|j| (true, nx + (nx + 1) * j, mesh.index(nx - 1, j))))
            }
            Edge::Bottom => faces.extend((0..nx).map(|i| (false, i, mesh.index(i, 0)))),
            Edge::Top => faces.extend((0..nx).map(|i| (false, i + nx * ny, mesh.index(i, ny - 1)))),
        }
    }
    if faces.is_empty() {
        return;
    }
    cache.prepare(
        faces
            .iter()
            .map(|&(_, _, k)| (ctx.regions.cell_region[k], t[k])),
    );
    for (vertical, idx, k) in faces {
        let v = cache.get(ctx.regions.cell_region[k], t[k]).kappa;
        if vertical {
            kappa.vertical[idx] = v;
        } else {
            kappa.horizontal[idx] = v;
        }
    }
}

/// Loss rate through an open boundary face per unit `U_k`, in the `rho` equation.
///
/// Diffusion of in-step emission to a vacuum Marshak face at half a cell:
/// `2K / (w (w + 4 eps K / (c dt)))` with `K = -kappa`; vanishes with `kappa`.
#[inline]
pub fn open_boundary_coefficient(kappa: f64, width: f64, consts: &PhysConstants, dt: f64) -> f64 {
    let k = (-kappa).max(0.0);
    if k == 0.0 {
        return 0.0;
    }
    2.0 * k / (width * (width + 4.0 * consts.epsilon * k / (consts.c * dt)))
}

/// Five-point system in `phi = rho - E_free` and the affine map `U = P + Q phi`.
///
/// Opaque cells have `gamma E_free` many orders above `U`; solving for `rho` would
/// recover `U` from the difference of two such terms.
pub struct AssembledSystem {
    pub matrix: FivePoint,
    pub rhs: Vec<f64>,
    /// `rho = phi + shift`.
    pub shift: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Summed open-boundary loss coefficients per cell.
    pub open: Vec<f64>,
}

/// Eliminates `U_r` cell-wise and builds the system for `phi`.
pub fn assemble_system(
    ctx: &FvContext<'_>,
    c: &MacroCoefficients,
    rho_n: &[f64],
    ur_n: &[f64],
    free: &FreeTransport,
) -> AssembledSystem {
    let mesh = ctx.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let n = nx * ny;
    let e2 = ctx.consts.epsilon * ctx.consts.epsilon;
    let dt = ctx.dt;
    let g = ctx.consts.c * dt / e2;
    let mut p = vec![0.0; n];
    let mut q = vec![0.0; n];
    let mut m = FivePoint::zeros(nx, ny);
    let mut rhs = vec![0.0; n];
    let mut open = vec![0.0; n];
    for k in 0..n {
        let d = e2 * c.cv[k] / dt + c.beta[k] * c.sigma_p[k];
        let relax = e2 * c.cv[k] / dt;
        p[k] = (relax * ur_n[k] + c.beta[k] * c.a[k]) / d;
        q[k] = c.beta[k] * c.gamma[k] / d;
        m.center[k] = 1.0 + g * (c.gamma[k] - c.sigma_p[k] * q[k]);
        // g (sigma_p P - A) with the beta sigma_p A terms cancelled by hand
        let exchange = g * relax * (c.sigma_p[k] * ur_n[k] - c.a[k]) / d;
        rhs[k] = rho_n[k] + (free.net[k] - c.e_free[k]) + exchange;
    }
    // L(U)_k = sum over faces a (U_nb - U_k), a = kappa f / (width_k h)
    for j in 0..ny {
        for i in 0..nx {
            let k = mesh.index(i, j);
            let link = |nb: usize,
                        kf: f64,
                        w_k: f64,
                        h: f64,
                        slot: &mut f64,
                        center: &mut f64,
                        rhs_k: &mut f64| {
                if kf == 0.0 {
                    return;
                }
                let a = kf / (w_k * h);
                *slot += a * q[nb];
                *center -= a * q[k];
                *rhs_k -= a * (p[nb] - p[k]);
            };
            let (mut center, mut r) = (m.center[k], rhs[k]);
            if i > 0 {
                let kf = c.kappa.v(i, j) * c.factor.v(i, j);
                let h = 0.5 * (mesh.dx(i - 1) + mesh.dx(i));
                link(
                    k - 1,
                    kf,
                    mesh.dx(i),
                    h,
                    &mut m.west[k],
                    &mut center,
                    &mut r,
                );
            }
            if i + 1 < nx {
                let kf = c.kappa.v(i + 1, j) * c.factor.v(i + 1, j);
                let h = 0.5 * (mesh.dx(i) + mesh.dx(i + 1));
                link(
                    k + 1,
                    kf,
                    mesh.dx(i),
                    h,
                    &mut m.east[k],
                    &mut center,
                    &mut r,
                );
            }
            if j > 0 {
                let kf = c.kappa.h(i, j) * c.factor.h(i, j);
                let h = 0.5 * (mesh.dy(j - 1) + mesh.dy(j));
                link(
                    k - nx,
                    kf,
                    mesh.dy(j),
                    h,
                    &mut m.south[k],
                    &mut center,
                    &mut r,
                );
            }
            if j + 1 < ny {
                let kf = c.kappa.h(i, j + 1) * c.factor.h(i, j + 1);
                let h = 0.5 * (mesh.dy(j) + mesh.dy(j + 1));
                link(
                    k + nx,
                    kf,
                    mesh.dy(j),
                    h,
                    &mut m.north[k],
                    &mut center,
                    &mut r,
                );
            }
            let mut b = 0.0;
            if i == 0 {
                b += open_boundary_coefficient(c.kappa.v(0, j), mesh.dx(i), &ctx.consts, dt);
            }
            if i + 1 == nx {
                b += open_boundary_coefficient(c.kappa.v(nx, j), mesh.dx(i), &ctx.consts, dt);
            }
            if j == 0 {
                b += open_boundary_coefficient(c.kappa.h(i, 0), mesh.dy(j), &ctx.consts, dt);
            }
            if j + 1 == ny {
                b += open_boundary_coefficient(c.kappa.h(i, ny), mesh.dy(j), &ctx.consts, dt);
            }
            center += b * q[k];
            r -= b * p[k];
            open[k] = b;
            m.center[k] = center;
            rhs[k] = r;
        }
    }
    AssembledSystem {
        matrix: m,
        rhs,
        shift: c.e_free.clone(),
        p,
        q,
        open,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearOutcome {
    pub rho: Vec<f64>,
    pub ur: Vec<f64>,
    pub report: LinearReport,
    /// Cells where `U_r` fell below `a c T_floor^4` and was clamped.
    pub clamped: usize,
    /// Weight leaving through open boundary faces by diffusion.
    pub boundary_loss: f64,
}

/// One linear solve with coefficients frozen; `guess` seeds the Krylov iteration.
pub fn linear_step(
    ctx: &FvContext<'_>,
    c: &MacroCoefficients,
    rho_n: &[f64],
    ur_n: &[f64],
    free: &FreeTransport,
    guess: &[f64],
) -> Result<LinearOutcome> {
    let sys = assemble_system(ctx, c, rho_n, ur_n, free);
    let mut phi: Vec<f64> = guess.iter().zip(&sys.shift).map(|(r, e)| r - e).collect();
    let report = solve(
        &sys.matrix,
        &sys.rhs,
        &mut phi,
        ctx.solver.linear_tol,
        ctx.solver.linear_max_iter,
    )?;
    let floor = ctx.consts.ur(ctx.solver.t_floor);
    let report = refine(&sys, &mut phi, floor, ctx, report)?;
    let boundary_loss = (0..phi.len())
        .filter(|&k| sys.open[k] != 0.0)
        .map(|k| ctx.mesh.volume(k) * sys.open[k] * (sys.p[k] + sys.q[k] * phi[k]))
        .sum();
    let mut clamped = 0;
    let ur = phi
        .iter()
        .enumerate()
        .map(|(k, &f)| {
            let u = sys.p[k] + sys.q[k] * f;
            if u < floor || !u.is_finite() {
                clamped += 1;
                floor
            } else {
                u
            }
        })
        .collect();
    let rho = phi.iter().zip(&sys.shift).map(|(f, e)| f + e).collect();
    Ok(LinearOutcome {
        rho,
        ur,
        report,
        clamped,
        boundary_loss,
    })
}

/// Relative accuracy demanded of every cell's `U = P + Q phi`.
const UR_TOL: f64 = 1e-11;
const REFINE_PASSES: usize = 4;

/// Largest `|Q_k dPhi_k| / U_k` implied by the current residual.
fn ur_error(sys: &AssembledSystem, phi: &[f64], floor: f64, r: &mut [f64]) -> f64 {
    sys.matrix.apply(phi, r);
    (0..phi.len())
        .map(|k| {
            r[k] = sys.rhs[k] - r[k];
            let u = (sys.p[k] + sys.q[k] * phi[k]).abs().max(floor);
            (sys.q[k] * r[k] / sys.matrix.center[k]).abs() / u
        })
        .fold(0.0, f64::max)
}

/// A globally small residual can leave `U` wrong in stiff cells; correct until every
/// cell meets `UR_TOL`.
fn refine(
    sys: &AssembledSystem,
    phi: &mut [f64],
    floor: f64,
    ctx: &FvContext<'_>,
    mut report: LinearReport,
) -> Result<LinearReport> {
    let n = phi.len();
    let mut r = vec![0.0; n];
    for _ in 0..REFINE_PASSES {
        if ur_error(sys, phi, floor, &mut r) <= UR_TOL {
            return Ok(report);
        }
        let mut d = vec![0.0; n];
        let pass = solve(
            &sys.matrix,
            &r,
            &mut d,
            ctx.solver.linear_tol,
            ctx.solver.linear_max_iter,
        )?;
        report.iterations += pass.iterations;
        report.direct |= pass.direct;
        phi.iter_mut().zip(&d).for_each(|(x, dx)| *x += dx);
    }
    if ur_error(sys, phi, floor, &mut r) > UR_TOL && n <= DIRECT_LIMIT {
        phi.copy_from_slice(&banded_solve(&sys.matrix, &sys.rhs)?);
        report.direct = true;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct SolveReport {
    pub picard_iterations: usize,
    /// Final `max |dT| / max(T, T_floor)`.
    pub final_residual: f64,
    pub linear_solver_iterations: usize,
    /// Filled by the driver from the global energy balance.
    pub energy_balance_residual: f64,
    pub clamp_events: usize,
    pub direct_solves: usize,
    pub limited_faces: usize,
    pub converged: bool,
    /// Weight that diffused out through open boundaries.
    pub boundary_loss: f64,
}

/// Picard iteration on `T` with all coefficients lagged at the previous iterate.
///
/// The accepted state pairs the last solve's `rho` with the temperature it implies.
pub fn picard_update(
    ctx: &FvContext<'_>,
    cache: &mut CoefficientCache,
    state_n: &MacroField,
    tallies: Option<&StepTallies>,
) -> Result<(MacroField, SolveReport)> {
    let n = ctx.mesh.n_cells();
    let free = match tallies {
        Some(t) => FreeTransport::from_tallies(t, ctx.mesh),
        None => FreeTransport::none(n),
    };
    let forms = AbsorptionForms::new(ctx, tallies);
    let floor = ctx.solver.t_floor;
    let mut t = state_n.t.clone();
    let mut rho = state_n.rho.clone();
    let mut report = SolveReport::default();
    let ac = ctx.consts.ac();
    loop {
        let c = assemble_with_forms(ctx, cache, &t, &state_n.t, tallies, &free, &forms);
        let out = linear_step(ctx, &c, &state_n.rho, &state_n.ur, &free, &rho)?;
        report.picard_iterations += 1;
        report.linear_solver_iterations += out.report.iterations;
        report.clamp_events += out.clamped;
        report.direct_solves += out.report.direct as usize;
        report.limited_faces = c.limited_faces;
        report.boundary_loss = out.boundary_loss;
        let image: Vec<f64> = out
            .ur
            .iter()
            .map(|&u| (u / ac).sqrt().sqrt().max(floor))
            .collect();
        let mut change: f64 = 0.0;
        for k in 0..n {
            change = change.max((image[k] - t[k]).abs() / t[k].max(floor));
        }
        rho = out.rho;
        report.final_residual = change;
        if change < ctx.solver.picard_tol {
            report.converged = true;
            t = image;
            break;
        }
        if !change.is_finite() || report.picard_iterations >= ctx.solver.picard_max_iter {
            if ctx.solver.accept_unconverged && change.is_finite() {
                t = image;
                break;
            }
            return Err(Error::Picard {
                iterations: report.picard_iterations,
                change,
            });
        }
        t = image;
    }
    let mut next = MacroField {
        rho,
        ur: vec![0.0; n],
        t: vec![0.0; n],
    };
    for (k, &tk) in t.iter().enumerate() {
        next.set_temperature(&ctx.consts, k, tk);
    }
    Ok((next, report))
}
