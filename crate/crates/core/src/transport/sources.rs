use rand::Rng;

use super::Particle;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Edge, Mesh2D};
use crate::radiometry::{sample_planck_u, PhysConstants};
use crate::rng::{stream, Purpose};

/// Uniform direction on the unit sphere.
pub fn isotropic_direction<R: Rng + ?Sized>(rng: &mut R) -> [f64; 3] {
    let mu = 2.0 * rng.random::<f64>() - 1.0;
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    [s * phi.cos(), s * phi.sin(), mu]
}

/// Cosine-law direction into the domain through `edge`: `p(mu) = 2 mu` on `mu = |omega . n|`.
pub fn cosine_inward<R: Rng + ?Sized>(edge: Edge, rng: &mut R) -> [f64; 3] {
    let mu = (1.0 - rng.random::<f64>()).sqrt();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    let s = (1.0 - mu * mu).max(0.0).sqrt();
    let (t1, t2) = (s * phi.cos(), s * phi.sin());
    match edge {
        Edge::Left => [mu, t1, t2],
        Edge::Right => [-mu, t1, t2],
        Edge::Bottom => [t1, mu, t2],
        Edge::Top => [t1, -mu, t2],
    }
}

/// Spectrum and magnitude of the initial radiation field.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpectrum {
    /// `rho_0` per cell.
    pub rho: Vec<f64>,
    /// Planck temperature the frequencies are drawn from, per cell.
    pub spectrum_t: Vec<f64>,
}

/// Equal-weight particles per cell, `N = min(cap, ceil(rho V / w_ref))`.
pub fn sample_initial_particles(
    mesh: &Mesh2D,
    init: &InitialSpectrum,
    w_ref: f64,
    max_per_cell: usize,
    seed: u64,
) -> Result<Vec<Particle>> {
    if !(w_ref > 0.0 && w_ref.is_finite()) {
        return Err(Error::Config(vec![
            "particles.w_ref: must be positive".into()
        ]));
    }
    let mut out = Vec::new();
    for cell in 0..mesh.n_cells() {
        let e = init.rho[cell] * mesh.volume(cell);
        if !(e > 0.0) {
            continue;
        }
        let n = ((e / w_ref).ceil() as usize).clamp(1, max_per_cell.max(1));
        let w = e / n as f64;
        let (i, j) = mesh.ij(cell);
        let (x0, y0) = (mesh.x_edges()[i], mesh.y_edges()[j]);
        let (dx, dy) = (mesh.dx(i), mesh.dy(j));
        let mut rng = stream(seed, 0, Purpose::Initial, cell as u64);
        out.reserve(n);
        for _ in 0..n {
            let x = x0 + dx * rng.random::<f64>();
            let y = y0 + dy * rng.random::<f64>();
            let omega = isotropic_direction(&mut rng);
            let u = sample_planck_u(init.spectrum_t[cell], &mut rng);
            out.push(Particle {
                w,
                x,
                y,
                omega,
                u,
                t_local: 0.0,
                cell,
            });
        }
    }
    Ok(out)
}

/// Weight entering through a segment of length `len` over `dt`: `dt L (c/eps) a c T_b^4 / 4`.
pub fn boundary_weight(consts: &PhysConstants, t_b: f64, len: f64, dt: f64) -> f64 {
    dt * len * consts.speed() * consts.ur(t_b) / 4.0
}

/// Inflow particles for one step, emitted at uniform times within the step.
pub fn sample_boundary_particles(
    mesh: &Mesh2D,
    boundaries: &BoundarySpec,
    consts: &PhysConstants,
    dt: f64,
    w_ref: f64,
    step: u64,
    seed: u64,
) -> Vec<Particle> {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let [x_lo, x_hi] = mesh.x_range();
    let [y_lo, y_hi] = mesh.y_range();
    let mut out = Vec::new();
    for (edge_id, edge) in Edge::ALL.into_iter().enumerate() {
        let BoundaryCondition::InflowPlanck { temperature } = boundaries.get(edge) else {
            continue;
        };
        let n_faces = match edge {
            Edge::Left | Edge::Right => ny,
            Edge::Bottom | Edge::Top => nx,
        };
        for f in 0..n_faces {
            let (len, cell) = match edge {
                Edge::Left => (mesh.dy(f), mesh.index(0, f)),
                Edge::Right => (mesh.dy(f), mesh.index(nx - 1, f)),
                Edge::Bottom => (mesh.dx(f), mesh.index(f, 0)),
                Edge::Top => (mesh.dx(f), mesh.index(f, ny - 1)),
            };
            let total = boundary_weight(consts, temperature, len, dt);
            if !(total > 0.0) {
                continue;
            }
            let n = ((total / w_ref).ceil() as usize).max(1);
            let w = total / n as f64;
            let id = (edge_id as u64) << 40 | f as u64;
            let mut rng = stream(seed, step, Purpose::Boundary, id);
            for _ in 0..n {
                let s = rng.random::<f64>();
                let (x, y) = match edge {
                    Edge::Left | Edge::Right => {
                        let y = mesh.y_edges()[f] + s * len;
                        (if edge == Edge::Left { x_lo } else { x_hi }, y)
                    }
                    Edge::Bottom | Edge::Top => {
                        let x = mesh.x_edges()[f] + s * len;
                        (x, if edge == Edge::Bottom { y_lo } else { y_hi })
                    }
                };
                let omega = cosine_inward(edge, &mut rng);
                let u = sample_planck_u(temperature, &mut rng);
                let t_local = dt * rng.random::<f64>();
                out.push(Particle {
                    w,
                    x,
                    y,
                    omega,
                    u,
                    t_local,
                    cell,
                });
            }
        }
    }
    out
}
