//! Flux limiter for material interfaces with large temperature jumps.

use serde::{Deserialize, Serialize};

use super::coefficients::{interior_faces, CoefficientCache};
use crate::mesh::{Mesh2D, RegionMap};
use crate::radiometry::{PhysConstants, SIGMA_FLOOR};
use crate::transport::CrossingTau;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimiterSettings {
    pub enabled: bool,
    /// Minimum `|T_l - T_r| / (T_l + T_r)` for activation.
    pub threshold: f64,
}

impl Default for LimiterSettings {
    fn default() -> Self {
        Self {
            enabled: false,
            threshold: 0.1,
        }
    }
}

impl LimiterSettings {
    /// Active only between distinct regions with a large relative jump.
    pub fn active(&self, region_l: usize, region_r: usize, t_l: f64, t_r: f64) -> bool {
        self.enabled && region_l != region_r && (t_l - t_r).abs() / (t_l + t_r) > self.threshold
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimiterValue {
    /// Mean free time imposed on crossing particles, ns.
    pub tau: f64,
    /// Multiplier on the face diffusion coefficient, in `(0, 1]`.
    pub f: f64,
    /// Set when the jump term was negative and `tau` fell back to `eps^2 / (c sigma)`.
    pub clamped: bool,
}

/// `tau = eps^2/(c sigma) + 10 dt (T_l - T_r)/(T_l + T_r) * 2/(dx_l + dx_r)`,
/// `f = (1 - e^{-dt/tau}) / (1 - e^{-c sigma dt/eps^2})`.
pub fn interface_limiter(
    t_l: f64,
    t_r: f64,
    dx_l: f64,
    dx_r: f64,
    sigma: f64,
    dt: f64,
    consts: &PhysConstants,
) -> LimiterValue {
    let sigma = sigma.max(SIGMA_FLOOR);
    let e2 = consts.epsilon * consts.epsilon;
    let tau0 = e2 / (consts.c * sigma);
    let jump = 10.0 * dt * (t_l - t_r) / (t_l + t_r) * 2.0 / (dx_l + dx_r);
    let clamped = !(jump > 0.0);
    let tau = if clamped { tau0 } else { tau0 + jump };
    let den = -(-consts.time_depth(sigma, dt)).exp_m1();
    let f = if clamped || den <= 0.0 {
        1.0
    } else {
        (-(-dt / tau).exp_m1() / den).min(1.0)
    };
    LimiterValue { tau, f, clamped }
}

/// Mean free times for particles crossing limited faces, evaluated at `t_n`.
pub fn crossing_taus(
    t_n: &[f64],
    mesh: &Mesh2D,
    regions: &RegionMap,
    cache: &mut CoefficientCache,
    limiter: &LimiterSettings,
    consts: &PhysConstants,
) -> Option<CrossingTau> {
    if !limiter.enabled {
        return None;
    }
    let faces: Vec<_> = interior_faces(mesh)
        .into_iter()
        .filter(|&(_, _, l, r, _, _)| {
            limiter.active(
                regions.cell_region[l],
                regions.cell_region[r],
                t_n[l],
                t_n[r],
            )
        })
        .collect();
    if faces.is_empty() {
        return None;
    }
    cache.prepare(faces.iter().flat_map(|&(_, _, l, r, _, _)| {
        let tf = 0.5 * (t_n[l] + t_n[r]);
        [(regions.cell_region[l], tf), (regions.cell_region[r], tf)]
    }));
    let dt = cache.dt();
    let mut out = CrossingTau::inactive(mesh.nx(), mesh.ny());
    for (vertical, idx, l, r, wl, wr) in faces {
        let tf = 0.5 * (t_n[l] + t_n[r]);
        let sl = cache.get(regions.cell_region[l], tf).sigma_r;
        let sr = cache.get(regions.cell_region[r], tf).sigma_r;
        let v = interface_limiter(t_n[l], t_n[r], wl, wr, sl.max(sr), dt, consts);
        if vertical {
            out.vertical[idx] = v.tau;
        } else {
            out.horizontal[idx] = v.tau;
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_temperatures_give_unit_factor() {
        let c = PhysConstants::default();
        let v = interface_limiter(0.4, 0.4, 0.01, 0.01, 1000.0, 1.3e-4, &c);
        assert!((v.tau - 1.0 / (29.98 * 1000.0)).abs() < 1e-18);
        assert_eq!(v.f, 1.0);
    }

    #[test]
    fn published_jump_example() {
        let c = PhysConstants::default();
        let v = interface_limiter(1.0, 1e-3, 0.005, 0.005, 1000.0, 1.3e-4, &c);
        let expect = 1.0 / (29.98 * 1000.0) + 10.0 * 1.3e-4 * (0.999 / 1.001) * (2.0 / 0.01);
        assert!((v.tau / expect - 1.0).abs() < 1e-14);
        assert!(v.f > 0.0 && v.f < 1.0);
        let back = interface_limiter(1e-3, 1.0, 0.005, 0.005, 1000.0, 1.3e-4, &c);
        assert!(back.clamped && back.f == 1.0);
    }

    #[test]
    fn inactive_within_one_region() {
        let s = LimiterSettings {
            enabled: true,
            threshold: 0.1,
        };
        assert!(!s.active(0, 0, 1.0, 1e-3));
        assert!(s.active(0, 1, 1.0, 1e-3));
        assert!(!s.active(0, 1, 1.0, 0.9));
    }
}
