//! Spectral coefficient cache, absorption tallies and face diffusion coefficients.

use std::collections::{BTreeSet, HashMap};

use super::limiter::{interface_limiter, LimiterSettings};
use crate::mesh::{Mesh2D, RegionMap};
use crate::radiometry::{OpacityModel, PhysConstants, QuadratureRule, SpectralCoefficients};

/// Spacing of cached temperature nodes in `ln T`.
pub const CACHE_LOG_STEP: f64 = 1.0000499983334e-4; // ln(1 + 1e-4)

/// Per-region coefficients at log-spaced temperature nodes, linearly interpolated between nodes.
#[derive(Debug, Clone)]
pub struct CoefficientCache {
    consts: PhysConstants,
    dt: f64,
    rule: QuadratureRule,
    sigma_floor: f64,
    models: Vec<OpacityModel>,
    tables: Vec<HashMap<i64, SpectralCoefficients>>,
}

impl CoefficientCache {
    pub fn new(
        regions: &RegionMap,
        consts: PhysConstants,
        dt: f64,
        rule: QuadratureRule,
        sigma_floor: f64,
    ) -> Self {
        let models: Vec<OpacityModel> = regions.regions.iter().map(|r| r.opacity).collect();
        Self {
            consts,
            dt,
            rule,
            sigma_floor,
            tables: vec![HashMap::new(); models.len()],
            models,
        }
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn node_temperature(k: i64) -> f64 {
        (k as f64 * CACHE_LOG_STEP).exp()
    }

    fn eval(&self, region: usize, t: f64) -> SpectralCoefficients {
        SpectralCoefficients::evaluate(
            &self.models[region],
            t,
            self.dt,
            &self.consts,
            &self.rule,
            self.sigma_floor,
        )
    }

    /// Fills every node needed to answer [`Self::get`] for the requested `(region, T)` pairs.
    pub fn prepare(&mut self, requests: impl IntoIterator<Item = (usize, f64)>) {
        let mut missing = BTreeSet::new();
        for (region, t) in requests {
            if self.models[region].is_gray() {
                continue;
            }
            let k = (t.ln() / CACHE_LOG_STEP).floor() as i64;
            for node in [k, k + 1] {
                if !self.tables[region].contains_key(&node) {
                    missing.insert((region, node));
                }
            }
        }
        if missing.is_empty() {
            return;
        }
        let keys: Vec<(usize, i64)> = missing.into_iter().collect();
        let this = &*self;
        let compute =
            |&(region, node): &(usize, i64)| this.eval(region, Self::node_temperature(node));
        #[cfg(feature = "parallel")]
        let values: Vec<SpectralCoefficients> = {
            use rayon::prelude::*;
            keys.par_iter().map(compute).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let values: Vec<SpectralCoefficients> = keys.iter().map(compute).collect();
        for ((region, node), v) in keys.into_iter().zip(values) {
            self.tables[region].insert(node, v);
        }
    }

    /// Coefficients at `t`; frequency-dependent regions must have been [`Self::prepare`]d.
    pub fn get(&self, region: usize, t: f64) -> SpectralCoefficients {
        if self.models[region].is_gray() {
            return self.eval(region, t);
        }
        let s = t.ln() / CACHE_LOG_STEP;
        let k = s.floor();
        let table = &self.tables[region];
        match (table.get(&(k as i64)), table.get(&(k as i64 + 1))) {
            (Some(lo), Some(hi)) => lo.lerp(hi, s - k),
            _ => self.eval(region, t),
        }
    }

    /// Prepares and returns a single value.
    pub fn lookup(&mut self, region: usize, t: f64) -> SpectralCoefficients {
        self.prepare([(region, t)]);
        self.get(region, t)
    }
}

/// `A = sum w sigma(u, T) / V` over a census list.
pub fn absorption_tally(census: &[(f64, f64)], t: f64, model: &OpacityModel, volume: f64) -> f64 {
    census
        .iter()
        .map(|&(w, u)| w * model.evaluate(u, t))
        .sum::<f64>()
        / volume
}

/// `A(T)` for one cell, reduced to a scalar times a temperature factor when the model allows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum AbsorptionForm {
    Separable { base: f64 },
    Full,
}

/// Temperature factor `g` with `sigma(u, T) = sigma(u, 1) g(T)`, when it exists.
fn separable_factor(model: &OpacityModel, t: f64) -> Option<f64> {
    match *model {
        OpacityModel::GrayConstant { .. } | OpacityModel::FrequencyStep { .. } => Some(1.0),
        OpacityModel::GrayPowerLaw { exponent, .. } => Some(t.powf(-exponent)),
        OpacityModel::FrequencyPowerLaw { .. } => Some(1.0 / t.sqrt()),
        OpacityModel::StimulatedPowerLaw { .. } => None,
    }
}

impl AbsorptionForm {
    pub(crate) fn new(census: &[(f64, f64)], model: &OpacityModel, volume: f64) -> Self {
        if separable_factor(model, 1.0).is_some() {
            AbsorptionForm::Separable {
                base: absorption_tally(census, 1.0, model, volume),
            }
        } else {
            AbsorptionForm::Full
        }
    }

    pub(crate) fn at(
        &self,
        census: &[(f64, f64)],
        t: f64,
        model: &OpacityModel,
        volume: f64,
    ) -> f64 {
        match *self {
            AbsorptionForm::Separable { base } => base * separable_factor(model, t).unwrap_or(1.0),
            AbsorptionForm::Full => absorption_tally(census, t, model, volume),
        }
    }
}

/// Values on cell faces; indexing matches [`crate::transport::CrossingTau`].
#[derive(Debug, Clone, PartialEq)]
pub struct FaceField {
    pub nx: usize,
    pub ny: usize,
    /// Face between `(i-1, j)` and `(i, j)` at `i + (nx + 1) j`.
    pub vertical: Vec<f64>,
    /// Face between `(i, j-1)` and `(i, j)` at `i + nx j`.
    pub horizontal: Vec<f64>,
}

impl FaceField {
    pub fn filled(nx: usize, ny: usize, v: f64) -> Self {
        Self {
            nx,
            ny,
            vertical: vec![v; (nx + 1) * ny],
            horizontal: vec![v; nx * (ny + 1)],
        }
    }
    #[inline]
    pub fn v(&self, i: usize, j: usize) -> f64 {
        self.vertical[i + (self.nx + 1) * j]
    }
    #[inline]
    pub fn h(&self, i: usize, j: usize) -> f64 {
        self.horizontal[i + self.nx * j]
    }
}

/// Interior faces as `(vertical, index, cell_lo, cell_hi, width_lo, width_hi)`.
pub(crate) fn interior_faces(mesh: &Mesh2D) -> Vec<(bool, usize, usize, usize, f64, f64)> {
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let mut out = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 1..nx {
            let (l, r) = (mesh.index(i - 1, j), mesh.index(i, j));
            out.push((true, i + (nx + 1) * j, l, r, mesh.dx(i - 1), mesh.dx(i)));
        }
    }
    for j in 1..ny {
        for i in 0..nx {
            let (l, r) = (mesh.index(i, j - 1), mesh.index(i, j));
            out.push((false, i + nx * j, l, r, mesh.dy(j - 1), mesh.dy(j)));
        }
    }
    out
}

/// Face `kappa_eff` (unlimited) and limiter factors at the temperatures `t`.
pub struct FaceCoefficients {
    pub kappa: FaceField,
    pub factor: FaceField,
    /// Faces where the limiter was active.
    pub limited: usize,
}

/// Averages `kappa_eff` over the two sides at the mean face temperature; domain-boundary faces are 0.
pub fn assemble_face_kappa(
    t: &[f64],
    mesh: &Mesh2D,
    regions: &RegionMap,
    cache: &mut CoefficientCache,
    limiter: &LimiterSettings,
    consts: &PhysConstants,
) -> FaceCoefficients {
    let faces = interior_faces(mesh);
    cache.prepare(faces.iter().flat_map(|&(_, _, l, r, _, _)| {
        let tf = 0.5 * (t[l] + t[r]);
        [(regions.cell_region[l], tf), (regions.cell_region[r], tf)]
    }));
    let (nx, ny) = (mesh.nx(), mesh.ny());
    let mut kappa = FaceField::filled(nx, ny, 0.0);
    let mut factor = FaceField::filled(nx, ny, 1.0);
    let mut limited = 0;
    let dt = cache.dt();
    for (vertical, idx, l, r, wl, wr) in faces {
        let tf = 0.5 * (t[l] + t[r]);
        let (rl, rr) = (regions.cell_region[l], regions.cell_region[r]);
        let cl = cache.get(rl, tf);
        let cr = if rr == rl { cl } else { cache.get(rr, tf) };
        let k = 0.5 * (cl.kappa + cr.kappa);
        let f = if limiter.active(rl, rr, t[l], t[r]) {
            limited += 1;
            let sigma = cl.sigma_r.max(cr.sigma_r);
            interface_limiter(t[l], t[r], wl, wr, sigma, dt, consts).f
        } else {
            1.0
        };
        let (kv, fv) = if vertical {
            (&mut kappa.vertical, &mut factor.vertical)
        } else {
            (&mut kappa.horizontal, &mut factor.horizontal)
        };
        kv[idx] = k;
        fv[idx] = f;
    }
    FaceCoefficients {
        kappa,
        factor,
        limited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::MaterialRegion;
    use crate::radiometry::gray_kappa;

    #[test]
    fn absorption_examples() {
        let m = OpacityModel::FrequencyStep {
            sigma_low: 1e-8,
            sigma_high: 1000.0,
            u_split: 1.0,
        };
        let census = [(1.0, 0.5), (2.0, 2.0)];
        assert!((absorption_tally(&census, 1.0, &m, 1.0) - 2000.00000001).abs() < 1e-9);
        assert_eq!(absorption_tally(&[], 1.0, &m, 1.0), 0.0);
        let g = OpacityModel::GrayPowerLaw {
            sigma0: 300.0,
            exponent: 3.0,
        };
        let a = absorption_tally(&census, 0.5, &g, 2.0);
        assert!((a - 2400.0 * 3.0 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn separable_forms_match_direct_sum() {
        let census: Vec<(f64, f64)> = (1..50).map(|k| (0.1 * k as f64, 0.07 * k as f64)).collect();
        for m in [
            OpacityModel::GrayPowerLaw {
                sigma0: 3.0,
                exponent: 2.5,
            },
            OpacityModel::FrequencyPowerLaw { sigma0: 10.0 },
            OpacityModel::StimulatedPowerLaw { sigma0: 10.0 },
            OpacityModel::FrequencyStep {
                sigma_low: 1.0,
                sigma_high: 5.0,
                u_split: 1.0,
            },
        ] {
            let f = AbsorptionForm::new(&census, &m, 0.3);
            for t in [0.05, 0.7, 3.0] {
                let a = f.at(&census, t, &m, 0.3);
                let b = absorption_tally(&census, t, &m, 0.3);
                assert!((a / b - 1.0).abs() < 1e-12, "{m:?} {t}");
            }
        }
    }

    fn two_region(s1: f64, s2: f64) -> (Mesh2D, RegionMap) {
        let mesh = Mesh2D::uniform(2, 1, [0.0, 2.0], [0.0, 1.0]).unwrap();
        let r = |s, rects| MaterialRegion {
            opacity: OpacityModel::GrayConstant { sigma0: s },
            cv: 1.0,
            rects,
        };
        let map = RegionMap::build(
            &mesh,
            vec![
                r(s1, vec![]),
                r(s2, vec![crate::mesh::Rect::new(1.0, 2.0, 0.0, 1.0)]),
            ],
        )
        .unwrap();
        (mesh, map)
    }

    #[test]
    fn face_kappa_average_and_boundaries() {
        let c = PhysConstants::default();
        let dt = 1e-3;
        let (mesh, map) = two_region(5.0, 10.0);
        let mut cache = CoefficientCache::new(&map, c, dt, QuadratureRule::default(), 1e-12);
        let lim = LimiterSettings::default();
        let fc = assemble_face_kappa(&[1.0, 1.0], &mesh, &map, &mut cache, &lim, &c);
        let expect = 0.5 * (gray_kappa(&c, 5.0, dt) + gray_kappa(&c, 10.0, dt));
        assert!((fc.kappa.v(1, 0) - expect).abs() < 1e-15 * expect.abs());
        assert_eq!(fc.kappa.v(0, 0), 0.0);
        assert_eq!(fc.kappa.v(2, 0), 0.0);
        assert_eq!(fc.kappa.h(0, 0), 0.0);
        assert_eq!(fc.factor.v(1, 0), 1.0);
    }

    #[test]
    fn cache_interpolates_close_to_direct() {
        let c = PhysConstants::default();
        let mesh = Mesh2D::uniform(1, 1, [0.0, 1.0], [0.0, 1.0]).unwrap();
        let m = OpacityModel::StimulatedPowerLaw { sigma0: 1000.0 };
        let map = RegionMap::build(
            &mesh,
            vec![MaterialRegion {
                opacity: m,
                cv: 1.0,
                rects: vec![],
            }],
        )
        .unwrap();
        let rule = QuadratureRule::default();
        let mut cache = CoefficientCache::new(&map, c, 1e-4, rule.clone(), 1e-12);
        for t in [0.013, 0.21, 0.8] {
            let a = cache.lookup(0, t);
            let b = SpectralCoefficients::evaluate(&m, t, 1e-4, &c, &rule, 1e-12);
            assert!((a.sigma_p / b.sigma_p - 1.0).abs() < 1e-7);
            assert!((a.gamma / b.gamma - 1.0).abs() < 1e-7);
            assert!((a.kappa / b.kappa - 1.0).abs() < 1e-7);
        }
    }
}
