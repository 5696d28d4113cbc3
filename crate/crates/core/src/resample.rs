//! Re-emission of absorbed and emitted energy as fresh equal-weight particles.

use rand::Rng;

use crate::mesh::{Mesh2D, RegionMap};
use crate::radiometry::{EmissionSampler, PhysConstants, QuadratureRule};
use crate::rng::{stream, Purpose};
use crate::transport::{isotropic_direction, Particle};

/// `E+ = rho^{n+1} - E_census / V`; negative values pass through.
#[inline]
pub fn compute_emission_energy(rho_new: f64, census_density: f64) -> f64 {
    rho_new - census_density
}

/// `(0, 0)` below `w_ref`, else `(ceil(E/w_ref), E/N)`.
#[inline]
pub fn particle_count(energy: f64, w_ref: f64) -> (usize, f64) {
    if !(energy >= w_ref) {
        return (0, 0.0);
    }
    let n = (energy / w_ref).ceil().max(1.0) as usize;
    (n, energy / n as f64)
}

#[inline]
pub fn minmod(a: f64, b: f64) -> f64 {
    if a > 0.0 && b > 0.0 {
        a.min(b)
    } else if a < 0.0 && b < 0.0 {
        a.max(b)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellPlan {
    pub e_plus: f64,
    pub n_r: usize,
    pub w_each: f64,
    pub slopes: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResamplePlan {
    pub cells: Vec<CellPlan>,
}

impl ResamplePlan {
    /// Positive energy left in ρ because its cell fell below `w_ref`.
    pub fn dropped_remainder(&self, mesh: &Mesh2D) -> f64 {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.n_r == 0)
            .map(|(k, c)| (c.e_plus * mesh.volume(k)).max(0.0))
            .sum()
    }

    pub fn total_particles(&self) -> usize {
        self.cells.iter().map(|c| c.n_r).sum()
    }
}

/// Emission energies, counts and optional minmod slopes for every cell.
pub fn plan_resample(
    mesh: &Mesh2D,
    rho_new: &[f64],
    e_census: &[f64],
    w_ref: f64,
    tilt: bool,
) -> ResamplePlan {
    let n = mesh.n_cells();
    let e_plus: Vec<f64> = (0..n)
        .map(|k| compute_emission_energy(rho_new[k], e_census[k] / mesh.volume(k)))
        .collect();
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let slope = |lo: Option<(f64, f64)>, mid: f64, hi: Option<(f64, f64)>| match (lo, hi) {
        (Some((el, hl)), Some((eh, hh))) => minmod((mid - el) / hl, (eh - mid) / hh),
        _ => 0.0,
    };
    let cells = (0..n)
        .map(|k| {
            let (i, j) = mesh.ij(k);
            let (n_r, w_each) = particle_count(e_plus[k] * mesh.volume(k), w_ref);
            let slopes = tilt.then(|| {
                let xl = (i > 0).then(|| (e_plus[k - 1], 0.5 * (mesh.dx(i - 1) + mesh.dx(i))));
                let xh = (i + 1 < nx).then(|| (e_plus[k + 1], 0.5 * (mesh.dx(i) + mesh.dx(i + 1))));
                let yl = (j > 0).then(|| (e_plus[k - nx], 0.5 * (mesh.dy(j - 1) + mesh.dy(j))));
                let yh =
                    (j + 1 < ny).then(|| (e_plus[k + nx], 0.5 * (mesh.dy(j) + mesh.dy(j + 1))));
                (slope(xl, e_plus[k], xh), slope(yl, e_plus[k], yh))
            });
            CellPlan {
                e_plus: e_plus[k],
                n_r,
                w_each,
                slopes,
            }
        })
        .collect();
    ResamplePlan { cells }
}

/// Particles for one cell; positions follow the clamped linear profile when slopes are present.
pub fn sample_emitted<R: Rng + ?Sized>(
    cell: usize,
    plan: &CellPlan,
    mesh: &Mesh2D,
    sampler: &EmissionSampler,
    rng: &mut R,
) -> Vec<Particle> {
    let (i, j) = mesh.ij(cell);
    let (x0, y0) = (mesh.x_edges()[i], mesh.y_edges()[j]);
    let (dx, dy) = (mesh.dx(i), mesh.dy(j));
    let (xc, yc) = (x0 + 0.5 * dx, y0 + 0.5 * dy);
    let mut out = Vec::with_capacity(plan.n_r);
    for _ in 0..plan.n_r {
        let (x, y) = match plan.slopes {
            Some((s1, s2)) if s1 != 0.0 || s2 != 0.0 => {
                let top = plan.e_plus + 0.5 * (s1.abs() * dx + s2.abs() * dy);
                loop {
                    let x = x0 + dx * rng.random::<f64>();
                    let y = y0 + dy * rng.random::<f64>();
                    let v = (plan.e_plus + s1 * (x - xc) + s2 * (y - yc)).max(0.0);
                    if rng.random::<f64>() * top <= v {
                        break (x, y);
                    }
                }
            }
            _ => (x0 + dx * rng.random::<f64>(), y0 + dy * rng.random::<f64>()),
        };
        let omega = isotropic_direction(rng);
        let u = sampler.sample(rng).u;
        out.push(Particle {
            w: plan.w_each,
            x,
            y,
            omega,
            u,
            t_local: 0.0,
            cell,
        });
    }
    out
}

/// Re-samples every cell at the new temperatures; concatenated in cell order.
#[allow(clippy::too_many_arguments)]
pub fn resample_all(
    mesh: &Mesh2D,
    regions: &RegionMap,
    plan: &ResamplePlan,
    t_new: &[f64],
    consts: &PhysConstants,
    dt: f64,
    rule: &QuadratureRule,
    step: u64,
    seed: u64,
) -> Vec<Particle> {
    let run = |(k, c): (usize, &CellPlan)| {
        if c.n_r == 0 {
            return Vec::new();
        }
        let sampler = EmissionSampler::new(regions.opacity(k), t_new[k], dt, consts, rule);
        let mut rng = stream(seed, step, Purpose::Resample, k as u64);
        sample_emitted(k, c, mesh, &sampler, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Vec<Particle>> = {
        use rayon::prelude::*;
        plan.cells.par_iter().enumerate().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Vec<Particle>> = plan.cells.iter().enumerate().map(run).collect();
    parts.into_iter().flatten().collect()
}
