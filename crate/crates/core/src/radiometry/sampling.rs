use rand::Rng;

use super::planck::b_density;
use super::{OpacityModel, PhysConstants, QuadratureRule};

/// `zeta(4) = pi^4 / 90`.
const ZETA4: f64 =
    std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI
        / 90.0;
/// Expected rejection acceptance below which the sampler switches to table inversion.
const MIN_ACCEPTANCE: f64 = 1e-6;

#[inline]
fn open_uniform<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 1]
    1.0 - rng.random::<f64>()
}

/// Draws a photon energy from `b(u, T)`.
///
/// Uses the expansion `x^3/(e^x - 1) = sum_l x^3 e^{-l x}`: pick `l` with
/// probability `l^-4 / zeta(4)`, then `x ~ Gamma(4, l)`.
pub fn sample_planck_u<R: Rng + ?Sized>(t: f64, rng: &mut R) -> f64 {
    let target = rng.random::<f64>() * ZETA4;
    let mut l = 1u32;
    let mut acc = 1.0;
    while acc < target && l < 10_000 {
        l += 1;
        let lf = l as f64;
        acc += 1.0 / (lf * lf * lf * lf);
    }
    let prod = open_uniform(rng) * open_uniform(rng) * open_uniform(rng) * open_uniform(rng);
    let x = -prod.ln() / l as f64;
    // x == 0 only if every uniform hit exactly 1
    t * x.max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmissionSample {
    pub u: f64,
    /// True when drawn from the tabulated fallback rather than by rejection.
    pub tabulated: bool,
}

/// Sampler for the emission spectrum `(1 - e^{-c sigma dt/eps^2}) b(u, T)`, normalized.
#[derive(Debug, Clone)]
pub struct EmissionSampler {
    model: OpacityModel,
    t: f64,
    depth_per_sigma: f64,
    acceptance: f64,
    table: Option<Vec<(f64, f64, f64)>>,
}

impl EmissionSampler {
    pub fn new(
        model: &OpacityModel,
        t: f64,
        dt: f64,
        consts: &PhysConstants,
        rule: &QuadratureRule,
    ) -> Self {
        let depth_per_sigma = consts.time_depth(1.0, dt);
        if model.is_gray() {
            return Self {
                model: *model,
                t,
                depth_per_sigma,
                acceptance: 1.0,
                table: None,
            };
        }
        let q = rule.at_temperature(t, model.breakpoints());
        let weights: Vec<f64> = q
            .nodes
            .iter()
            .map(|n| {
                let p = -(-depth_per_sigma * model.evaluate(n.u, t)).exp_m1();
                n.w * p * b_density(n.u, t)
            })
            .collect();
        let norm: f64 = q.nodes.iter().map(|n| n.w * b_density(n.u, t)).sum();
        let total: f64 = weights.iter().sum();
        let acceptance = total / norm;
        let table = (acceptance < MIN_ACCEPTANCE && total > 0.0).then(|| {
            let mut cum = 0.0;
            let nodes = &q.nodes;
            nodes
                .iter()
                .enumerate()
                .map(|(k, n)| {
                    cum += weights[k] / total;
                    let lo = if k == 0 {
                        q.u_min
                    } else {
                        0.5 * (nodes[k - 1].u + n.u)
                    };
                    let hi = if k + 1 == nodes.len() {
                        q.u_max
                    } else {
                        0.5 * (n.u + nodes[k + 1].u)
                    };
                    (cum, lo, hi)
                })
                .collect()
        });
        Self {
            model: *model,
            t,
            depth_per_sigma,
            acceptance,
            table,
        }
    }

    /// Expected acceptance of the rejection step, `1 - int e^{-c sigma dt/eps^2} b du`.
    pub fn acceptance(&self) -> f64 {
        self.acceptance
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> EmissionSample {
        if let Some(table) = &self.table {
            let r = rng.random::<f64>();
            let k = table.partition_point(|e| e.0 < r).min(table.len() - 1);
            let (_, lo, hi) = table[k];
            return EmissionSample {
                u: lo + rng.random::<f64>() * (hi - lo),
                tabulated: true,
            };
        }
        if self.model.is_gray() {
            return EmissionSample {
                u: sample_planck_u(self.t, rng),
                tabulated: false,
            };
        }
        loop {
            let u = sample_planck_u(self.t, rng);
            let p = -(-self.depth_per_sigma * self.model.evaluate(u, self.t)).exp_m1();
            if rng.random::<f64>() < p {
                return EmissionSample {
                    u,
                    tabulated: false,
                };
            }
        }
    }
}

/// One-shot emission-spectrum draw; build an [`EmissionSampler`] when drawing many.
pub fn sample_emission_u<R: Rng + ?Sized>(
    model: &OpacityModel,
    t: f64,
    dt: f64,
    consts: &PhysConstants,
    rule: &QuadratureRule,
    rng: &mut R,
) -> EmissionSample {
    EmissionSampler::new(model, t, dt, consts, rule).sample(rng)
}
