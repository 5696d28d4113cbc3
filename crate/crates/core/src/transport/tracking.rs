use rand::Rng;

use super::Particle;
use crate::error::{Error, Result};
use crate::mesh::{BoundaryCondition, BoundarySpec, Edge, Mesh2D, RegionMap};
use crate::radiometry::{PhysConstants, SIGMA_FLOOR};
use crate::rng::{stream, Purpose};

/// Cap on any sampled flight distance, cm.
pub const MAX_DISTANCE: f64 = 1e30;

/// Guard against runaway tracking loops.
const MAX_EVENTS: u32 = 50_000_000;

/// `d_COL = (eps/sigma)|ln xi|`, or `(c/eps)|ln xi| tau` when a mean free time is imposed.
pub fn distance_to_collision(sigma: f64, consts: &PhysConstants, xi: f64, tau: Option<f64>) -> f64 {
    let l = -xi.ln();
    let d = match tau {
        Some(tau) => consts.speed() * l * tau,
        None if sigma < SIGMA_FLOOR => MAX_DISTANCE,
        None => consts.epsilon / sigma * l,
    };
    d.min(MAX_DISTANCE)
}

/// Mean free times imposed on particles entering a cell through a flagged face.
/// A value of 0 marks an inactive face.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossingTau {
    nx: usize,
    /// Face between `(i-1, j)` and `(i, j)` at `i + (nx + 1) j`.
    pub vertical: Vec<f64>,
    /// Face between `(i, j-1)` and `(i, j)` at `i + nx j`.
    pub horizontal: Vec<f64>,
}

impl CrossingTau {
    pub fn inactive(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            vertical: vec![0.0; (nx + 1) * ny],
            horizontal: vec![0.0; nx * (ny + 1)],
        }
    }
    #[inline]
    pub fn vertical_index(&self, i: usize, j: usize) -> usize {
        i + (self.nx + 1) * j
    }
    #[inline]
    pub fn horizontal_index(&self, i: usize, j: usize) -> usize {
        i + self.nx * j
    }
    pub fn any_active(&self) -> bool {
        self.vertical
            .iter()
            .chain(&self.horizontal)
            .any(|&t| t > 0.0)
    }
}

/// Read-only state shared by every particle in a step.
#[derive(Debug, Clone, Copy)]
pub struct TrackingContext<'a> {
    pub mesh: &'a Mesh2D,
    pub regions: &'a RegionMap,
    /// Beginning-of-step material temperature per cell.
    pub t_n: &'a [f64],
    pub boundaries: &'a BoundarySpec,
    pub consts: PhysConstants,
    pub dt: f64,
    pub crossing: Option<&'a CrossingTau>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Census(Particle),
    Absorbed { cell: usize, w: f64 },
    Outflow { edge: Edge, w: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tracked {
    pub outcome: Outcome,
    /// Flight segments taken.
    pub events: u32,
}

enum Hit {
    Census,
    Collision,
    Face { x_axis: bool },
}

/// Follows one particle until census, absorption or escape.
pub fn track_particle<R: Rng + ?Sized>(
    mut p: Particle,
    ctx: &TrackingContext<'_>,
    rng: &mut R,
) -> Result<Tracked> {
    let mesh = ctx.mesh;
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let xe = mesh.x_edges();
    let ye = mesh.y_edges();
    let speed = ctx.consts.speed();
    let (mut i, mut j) = mesh.ij(p.cell);
    let mut tau: Option<f64> = None;
    let mut events = 0u32;
    loop {
        events += 1;
        if events > MAX_EVENTS || !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::Tracking(format!(
                "particle stuck or non-finite at ({}, {}) after {events} events",
                p.x, p.y
            )));
        }
        let cell = i + nx * j;
        let sigma = ctx.regions.opacity(cell).evaluate(p.u, ctx.t_n[cell]);
        let tau_here = tau.take().map(|t: f64| {
            let e2 = ctx.consts.epsilon * ctx.consts.epsilon;
            t.max(e2 / (ctx.consts.c * sigma.max(SIGMA_FLOOR)))
        });
        let xi = 1.0 - rng.random::<f64>();
        let d_col = distance_to_collision(sigma, &ctx.consts, xi, tau_here);
        let d_cen = speed * (ctx.dt - p.t_local);
        let (ox, oy) = (p.omega[0], p.omega[1]);
        let dbx = if ox > 0.0 {
            (xe[i + 1] - p.x) / ox
        } else if ox < 0.0 {
            (xe[i] - p.x) / ox
        } else {
            f64::INFINITY
        };
        let dby = if oy > 0.0 {
            (ye[j + 1] - p.y) / oy
        } else if oy < 0.0 {
            (ye[j] - p.y) / oy
        } else {
            f64::INFINITY
        };
        let (d_b, x_axis) = if dbx <= dby {
            (dbx.max(0.0), true)
        } else {
            (dby.max(0.0), false)
        };
        let (d, hit) = if d_cen <= d_col && d_cen <= d_b {
            (d_cen, Hit::Census)
        } else if d_col < d_b {
            (d_col, Hit::Collision)
        } else {
            (d_b, Hit::Face { x_axis })
        };
        match hit {
            Hit::Census => {
                p.x += d * ox;
                p.y += d * oy;
                p.x = p.x.clamp(xe[i], xe[i + 1]);
                p.y = p.y.clamp(ye[j], ye[j + 1]);
                p.t_local = ctx.dt;
                p.cell = cell;
                return Ok(Tracked {
                    outcome: Outcome::Census(p),
                    events,
                });
            }
            Hit::Collision => {
                return Ok(Tracked {
                    outcome: Outcome::Absorbed { cell, w: p.w },
                    events,
                });
            }
            Hit::Face { x_axis: true } => {
                p.t_local += d / speed;
                p.y = (p.y + d * oy).clamp(ye[j], ye[j + 1]);
                if ox > 0.0 {
                    p.x = xe[i + 1];
                    if i + 1 < nx {
                        i += 1;
                        tau = crossing_tau(ctx, true, i, j);
                    } else {
                        match boundary(ctx.boundaries, Edge::Right, &mut p, 0) {
                            Some(o) => return Ok(Tracked { outcome: o, events }),
                            None if ctx.boundaries.right == BoundaryCondition::Periodic => {
                                p.x = xe[0];
                                i = 0;
                            }
                            None => {}
                        }
                    }
                } else {
                    p.x = xe[i];
                    if i > 0 {
                        tau = crossing_tau(ctx, true, i, j);
                        i -= 1;
                    } else {
                        match boundary(ctx.boundaries, Edge::Left, &mut p, 0) {
                            Some(o) => return Ok(Tracked { outcome: o, events }),
                            None if ctx.boundaries.left == BoundaryCondition::Periodic => {
                                p.x = xe[nx];
                                i = nx - 1;
                            }
                            None => {}
                        }
                    }
                }
            }
            Hit::Face { x_axis: false } => {
                p.t_local += d / speed;
                p.x = (p.x + d * ox).clamp(xe[i], xe[i + 1]);
                if oy > 0.0 {
                    p.y = ye[j + 1];
                    if j + 1 < ny {
                        j += 1;
                        tau = crossing_tau(ctx, false, i, j);
                    } else {
                        match boundary(ctx.boundaries, Edge::Top, &mut p, 1) {
                            Some(o) => return Ok(Tracked { outcome: o, events }),
                            None if ctx.boundaries.top == BoundaryCondition::Periodic => {
                                p.y = ye[0];
                                j = 0;
                            }
                            None => {}
                        }
                    }
                } else {
                    p.y = ye[j];
                    if j > 0 {
                        tau = crossing_tau(ctx, false, i, j);
                        j -= 1;
                    } else {
                        match boundary(ctx.boundaries, Edge::Bottom, &mut p, 1) {
                            Some(o) => return Ok(Tracked { outcome: o, events }),
                            None if ctx.boundaries.bottom == BoundaryCondition::Periodic => {
                                p.y = ye[ny];
                                j = ny - 1;
                            }
                            None => {}
                        }
                    }
                }
            }
        }
    }
}

/// Mean free time for the face at `(i, j)` (the index of the cell on its high side).
#[inline]
fn crossing_tau(ctx: &TrackingContext<'_>, vertical: bool, i: usize, j: usize) -> Option<f64> {
    let c = ctx.crossing?;
    let t = if vertical {
        c.vertical[c.vertical_index(i, j)]
    } else {
        c.horizontal[c.horizontal_index(i, j)]
    };
    (t > 0.0).then_some(t)
}

/// Applies a domain-edge condition; returns an outcome when the particle leaves.
#[inline]
fn boundary(b: &BoundarySpec, edge: Edge, p: &mut Particle, axis: usize) -> Option<Outcome> {
    match b.get(edge) {
        BoundaryCondition::Reflective => {
            p.omega[axis] = -p.omega[axis];
            None
        }
        BoundaryCondition::Periodic => None,
        BoundaryCondition::Outflow | BoundaryCondition::InflowPlanck { .. } => {
            Some(Outcome::Outflow { edge, w: p.w })
        }
    }
}

/// Per-step particle bookkeeping.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StepTallies {
    /// Weight present in each cell at the start of the step (boundary-born excluded).
    pub e_init: Vec<f64>,
    /// Surviving `(w, u)` pairs per cell.
    pub census: Vec<Vec<(f64, f64)>>,
    pub e_census: Vec<f64>,
    pub e_absorbed: Vec<f64>,
    /// Weight injected through the domain boundary this step.
    pub e_inflow: f64,
    pub e_outflow: f64,
    pub events: u64,
    pub n_absorbed: u64,
    pub n_outflow: u64,
}

impl StepTallies {
    pub fn empty(n_cells: usize) -> Self {
        Self {
            e_init: vec![0.0; n_cells],
            census: vec![Vec::new(); n_cells],
            e_census: vec![0.0; n_cells],
            e_absorbed: vec![0.0; n_cells],
            ..Self::default()
        }
    }

    /// `sum e_init + e_inflow - (sum e_census + sum e_absorbed + e_outflow)`.
    pub fn balance_defect(&self) -> f64 {
        let s = |v: &[f64]| v.iter().sum::<f64>();
        s(&self.e_init) + self.e_inflow - (s(&self.e_census) + s(&self.e_absorbed) + self.e_outflow)
    }

    pub fn total_census(&self) -> f64 {
        self.e_census.iter().sum()
    }
}

/// Tracks every particle; `inflow` are this step's boundary-born particles.
///
/// Particle `k` of `resident ++ inflow` draws from stream `(seed, step, k)` and
/// results are reduced in particle order, so output is independent of worker count.
pub fn track_all(
    resident: Vec<Particle>,
    inflow: Vec<Particle>,
    ctx: &TrackingContext<'_>,
    step: u64,
    seed: u64,
) -> Result<(StepTallies, Vec<Particle>)> {
    let n_cells = ctx.mesh.n_cells();
    let mut tallies = StepTallies::empty(n_cells);
    for p in &resident {
        tallies.e_init[p.cell] += p.w;
    }
    for p in &inflow {
        tallies.e_inflow += p.w;
    }
    let all: Vec<Particle> = resident.into_iter().chain(inflow).collect();
    let run = |(k, p): (usize, &Particle)| {
        let mut rng = stream(seed, step, Purpose::Tracking, k as u64);
        track_particle(*p, ctx, &mut rng)
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<Tracked>> = {
        use rayon::prelude::*;
        all.par_iter()
            .enumerate()
            .with_min_len(1024)
            .map(run)
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<Tracked>> = all.iter().enumerate().map(run).collect();
    let mut survivors = Vec::with_capacity(results.len());
    for r in results {
        let t = r?;
        tallies.events += t.events as u64;
        match t.outcome {
            Outcome::Census(p) => {
                tallies.e_census[p.cell] += p.w;
                tallies.census[p.cell].push((p.w, p.u));
                survivors.push(p);
            }
            Outcome::Absorbed { cell, w } => {
                tallies.e_absorbed[cell] += w;
                tallies.n_absorbed += 1;
            }
            Outcome::Outflow { w, .. } => {
                tallies.e_outflow += w;
                tallies.n_outflow += 1;
            }
        }
    }
    Ok((tallies, survivors))
}
