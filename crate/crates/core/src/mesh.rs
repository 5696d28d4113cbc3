//! Cartesian mesh, material regions and boundary specifications.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::radiometry::{OpacityModel, PhysConstants};

/// Temperature floor used when inverting `U_r -> T`.
pub const T_FLOOR: f64 = 1e-6;

/// Tensor-product mesh with cell index `k = i + nx * j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh2D {
    x_edges: Vec<f64>,
    y_edges: Vec<f64>,
}

impl Mesh2D {
    pub fn new(x_edges: Vec<f64>, y_edges: Vec<f64>) -> Result<Self> {
        let mut problems = Vec::new();
        for (name, e) in [("mesh.x_edges", &x_edges), ("mesh.y_edges", &y_edges)] {
            if e.len() < 2 {
                problems.push(format!("{name}: need at least two edges"));
            } else if e.windows(2).any(|w| !(w[1] > w[0]) || !w[0].is_finite()) {
                problems.push(format!(
                    "{name}: edges must be finite and strictly increasing"
                ));
            }
        }
        if problems.is_empty() {
            Ok(Self { x_edges, y_edges })
        } else {
            Err(Error::Config(problems))
        }
    }

    pub fn uniform(nx: usize, ny: usize, x: [f64; 2], y: [f64; 2]) -> Result<Self> {
        let edges = |n: usize, lo: f64, hi: f64| -> Vec<f64> {
            let mut v: Vec<f64> = (0..=n)
                .map(|k| lo + (hi - lo) * k as f64 / n as f64)
                .collect();
            if let Some(last) = v.last_mut() {
                *last = hi;
            }
            v
        };
        if nx == 0 || ny == 0 {
            return Err(Error::Config(vec![
                "mesh: nx and ny must be positive".into()
            ]));
        }
        Self::new(edges(nx, x[0], x[1]), edges(ny, y[0], y[1]))
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.x_edges.len() - 1
    }
    #[inline]
    pub fn ny(&self) -> usize {
        self.y_edges.len() - 1
    }
    #[inline]
    pub fn n_cells(&self) -> usize {
        self.nx() * self.ny()
    }
    pub fn x_edges(&self) -> &[f64] {
        &self.x_edges
    }
    pub fn y_edges(&self) -> &[f64] {
        &self.y_edges
    }
    #[inline]
    pub fn dx(&self, i: usize) -> f64 {
        self.x_edges[i + 1] - self.x_edges[i]
    }
    #[inline]
    pub fn dy(&self, j: usize) -> f64 {
        self.y_edges[j + 1] - self.y_edges[j]
    }
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.nx() * j
    }
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.nx(), k / self.nx())
    }
    #[inline]
    pub fn volume(&self, k: usize) -> f64 {
        let (i, j) = self.ij(k);
        self.dx(i) * self.dy(j)
    }
    pub fn center(&self, k: usize) -> (f64, f64) {
        let (i, j) = self.ij(k);
        (
            0.5 * (self.x_edges[i] + self.x_edges[i + 1]),
            0.5 * (self.y_edges[j] + self.y_edges[j + 1]),
        )
    }
    pub fn x_range(&self) -> [f64; 2] {
        [self.x_edges[0], self.x_edges[self.nx()]]
    }
    pub fn y_range(&self) -> [f64; 2] {
        [self.y_edges[0], self.y_edges[self.ny()]]
    }
    pub fn area(&self) -> f64 {
        let [x0, x1] = self.x_range();
        let [y0, y1] = self.y_range();
        (x1 - x0) * (y1 - y0)
    }

    fn locate_axis(edges: &[f64], v: f64) -> Option<usize> {
        let n = edges.len() - 1;
        if v < edges[0] || v > edges[n] || v.is_nan() {
            return None;
        }
        // last edge <= v, half-open cells, closure on the far boundary
        let k = edges.partition_point(|&e| e <= v);
        Some(k.saturating_sub(1).min(n - 1))
    }

    /// Cell `(i, j)` whose half-open box contains the point.
    pub fn locate_cell(&self, x: f64, y: f64) -> Result<(usize, usize)> {
        match (
            Self::locate_axis(&self.x_edges, x),
            Self::locate_axis(&self.y_edges, y),
        ) {
            (Some(i), Some(j)) => Ok((i, j)),
            _ => Err(Error::OutOfDomain { x, y }),
        }
    }

    /// Returns a mesh with every axis holding more than one cell refined by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let scale = |edges: &[f64]| -> Vec<f64> {
            let n = edges.len() - 1;
            if n == 1 {
                return edges.to_vec();
            }
            let m = ((n as f64 * factor).round() as usize).max(1);
            let (lo, hi) = (edges[0], edges[n]);
            (0..=m)
                .map(|k| lo + (hi - lo) * k as f64 / m as f64)
                .collect()
        };
        Self::new(scale(&self.x_edges), scale(&self.y_edges))
    }
}

/// Axis-aligned rectangle `[x0, x1] x [y0, y1]` in cm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect(pub [f64; 4]);

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect([x0, x1, y0, y1])
    }
    pub fn contains(&self, x: f64, y: f64) -> bool {
        let [x0, x1, y0, y1] = self.0;
        x >= x0 && x <= x1 && y >= y0 && y <= y1
    }
}

/// Material with constant heat capacity over a set of rectangles.
/// A region with no rectangles fills every cell no other region claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialRegion {
    pub opacity: OpacityModel,
    /// Volumetric heat capacity, GJ cm^-3 keV^-1.
    pub cv: f64,
    #[serde(default)]
    pub rects: Vec<Rect>,
}

/// Cell-to-region assignment by cell-center membership.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionMap {
    pub regions: Vec<MaterialRegion>,
    pub cell_region: Vec<usize>,
}

impl RegionMap {
    pub fn build(mesh: &Mesh2D, regions: Vec<MaterialRegion>) -> Result<Self> {
        let mut problems = Vec::new();
        let backgrounds: Vec<usize> = regions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.rects.is_empty())
            .map(|(k, _)| k)
            .collect();
        if regions.is_empty() {
            problems.push("material: at least one region is required".to_string());
        }
        if backgrounds.len() > 1 {
            problems.push("material: only one region may omit `rects`".to_string());
        }
        for (k, r) in regions.iter().enumerate() {
            if !(r.cv > 0.0 && r.cv.is_finite()) {
                problems.push(format!("material.{k}.cv: must be positive"));
            }
            if let Err(e) = r.opacity.validate() {
                problems.push(format!("material.{k}.opacity: {e}"));
            }
        }
        let mut cell_region = vec![usize::MAX; mesh.n_cells()];
        if problems.is_empty() {
            for (cell, slot) in cell_region.iter_mut().enumerate() {
                let (x, y) = mesh.center(cell);
                let hits: Vec<usize> = regions
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.rects.iter().any(|q| q.contains(x, y)))
                    .map(|(k, _)| k)
                    .collect();
                match (hits.as_slice(), backgrounds.first()) {
                    ([k], _) => *slot = *k,
                    ([], Some(&b)) => *slot = b,
                    ([], None) => {
                        problems.push(format!("material: cell center ({x}, {y}) has no region"))
                    }
                    (many, _) => problems.push(format!(
                        "material: cell center ({x}, {y}) lies in overlapping regions {many:?}"
                    )),
                }
                if problems.len() > 20 {
                    break;
                }
            }
        }
        if problems.is_empty() {
            Ok(Self {
                regions,
                cell_region,
            })
        } else {
            Err(Error::Config(problems))
        }
    }

    #[inline]
    pub fn region(&self, cell: usize) -> &MaterialRegion {
        &self.regions[self.cell_region[cell]]
    }
    #[inline]
    pub fn opacity(&self, cell: usize) -> &OpacityModel {
        &self.region(cell).opacity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Edge {
    Left,
    Right,
    Bottom,
    Top,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::Left, Edge::Right, Edge::Bottom, Edge::Top];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// Isotropic Planckian inflow at `temperature` keV; outgoing particles leave.
    InflowPlanck {
        temperature: f64,
    },
    Reflective,
    Periodic,
    Outflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub left: BoundaryCondition,
    pub right: BoundaryCondition,
    pub bottom: BoundaryCondition,
    pub top: BoundaryCondition,
}

impl BoundarySpec {
    pub fn uniform(bc: BoundaryCondition) -> Self {
        Self {
            left: bc,
            right: bc,
            bottom: bc,
            top: bc,
        }
    }

    pub fn get(&self, edge: Edge) -> BoundaryCondition {
        match edge {
            Edge::Left => self.left,
            Edge::Right => self.right,
            Edge::Bottom => self.bottom,
            Edge::Top => self.top,
        }
    }

    pub fn validate(&self) -> std::result::Result<(), Vec<String>> {
        let mut problems = Vec::new();
        let periodic = |b: BoundaryCondition| matches!(b, BoundaryCondition::Periodic);
        if periodic(self.left) != periodic(self.right) {
            problems.push("boundary: periodic must be set on both left and right".into());
        }
        if periodic(self.bottom) != periodic(self.top) {
            problems.push("boundary: periodic must be set on both bottom and top".into());
        }
        for e in Edge::ALL {
            if let BoundaryCondition::InflowPlanck { temperature } = self.get(e) {
                if !(temperature > 0.0 && temperature.is_finite()) {
                    problems.push(format!(
                        "boundary.{e:?}: inflow temperature must be positive"
                    ));
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems)
        }
    }

    pub fn max_inflow_temperature(&self) -> Option<f64> {
        Edge::ALL
            .iter()
            .filter_map(|&e| match self.get(e) {
                BoundaryCondition::InflowPlanck { temperature } => Some(temperature),
                _ => None,
            })
            .reduce(f64::max)
    }
}

/// Per-cell macroscopic state.
#[derive(Debug, Clone, PartialEq)]
pub struct MacroField {
    /// Angle- and frequency-integrated intensity.
    pub rho: Vec<f64>,
    /// `a c T^4`.
    pub ur: Vec<f64>,
    /// Material temperature, keV.
    pub t: Vec<f64>,
}

impl MacroField {
    pub fn equilibrium(consts: &PhysConstants, t: &[f64]) -> Self {
        let ur: Vec<f64> = t.iter().map(|&t| consts.ur(t)).collect();
        Self {
            rho: ur.clone(),
            ur,
            t: t.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sets `T` (floored) and `U_r = a c T^4` for one cell.
    pub fn set_temperature(&mut self, consts: &PhysConstants, cell: usize, t: f64) {
        let t = t.max(T_FLOOR);
        self.t[cell] = t;
        self.ur[cell] = consts.ur(t);
    }

    pub fn radiation_temperature(&self, consts: &PhysConstants, cell: usize) -> f64 {
        consts.radiation_temperature(self.rho[cell])
    }
}

/// `T_r = (rho / a c)^{1/4}`.
pub fn radiation_temperature(consts: &PhysConstants, rho: f64) -> f64 {
    consts.radiation_temperature(rho)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit2() -> Mesh2D {
        Mesh2D::uniform(2, 2, [0.0, 1.0], [0.0, 1.0]).unwrap()
    }

    #[test]
    fn locate_examples() {
        let m = unit2();
        assert_eq!(m.locate_cell(0.25, 0.75).unwrap(), (0, 1));
        assert_eq!(m.locate_cell(0.5, 0.2).unwrap().0, 1);
        assert_eq!(m.locate_cell(1.0, 1.0).unwrap(), (1, 1));
        assert!(m.locate_cell(1.0001, 0.5).is_err());
        assert!(m.locate_cell(-0.1, 0.5).is_err());
    }

    #[test]
    fn volumes_tile_the_domain() {
        let m = Mesh2D::new(vec![0.0, 0.1, 0.35, 1.0], vec![0.0, 0.5, 2.0]).unwrap();
        let total: f64 = (0..m.n_cells()).map(|k| m.volume(k)).sum();
        assert!((total / m.area() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Mesh2D::new(vec![0.0, 0.0, 1.0], vec![0.0, 1.0]).is_err());
        assert!(Mesh2D::new(vec![0.0], vec![0.0, 1.0]).is_err());
    }

    #[test]
    fn radiation_temperature_examples() {
        let c = PhysConstants::default();
        assert!((radiation_temperature(&c, c.ac()) - 1.0).abs() < 1e-15);
        assert_eq!(radiation_temperature(&c, 0.0), 0.0);
        assert!((radiation_temperature(&c, 16.0 * c.ac()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn region_map_with_background() {
        let m = Mesh2D::uniform(4, 1, [0.0, 4.0], [0.0, 1.0]).unwrap();
        let wall = MaterialRegion {
            opacity: OpacityModel::GrayConstant { sigma0: 10.0 },
            cv: 0.3,
            rects: vec![Rect::new(2.0, 4.0, 0.0, 1.0)],
        };
        let vac = MaterialRegion {
            opacity: OpacityModel::GrayConstant { sigma0: 1e-8 },
            cv: 1e-4,
            rects: vec![],
        };
        let map = RegionMap::build(&m, vec![vac, wall]).unwrap();
        assert_eq!(map.cell_region, vec![0, 0, 1, 1]);
    }

    #[test]
    fn overlapping_regions_rejected() {
        let m = Mesh2D::uniform(2, 1, [0.0, 2.0], [0.0, 1.0]).unwrap();
        let r = |x0, x1| MaterialRegion {
            opacity: OpacityModel::GrayConstant { sigma0: 1.0 },
            cv: 1.0,
            rects: vec![Rect::new(x0, x1, 0.0, 1.0)],
        };
        assert!(RegionMap::build(&m, vec![r(0.0, 2.0), r(1.0, 2.0)]).is_err());
        assert!(RegionMap::build(&m, vec![r(0.0, 1.0)]).is_err());
    }

    #[test]
    fn periodic_must_pair() {
        let mut b = BoundarySpec::uniform(BoundaryCondition::Reflective);
        b.left = BoundaryCondition::Periodic;
        assert!(b.validate().is_err());
        b.right = BoundaryCondition::Periodic;
        assert!(b.validate().is_ok());
    }
}
