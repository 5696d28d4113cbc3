use super::planck::{b_density, rosseland_density};
use super::{OpacityModel, PhysConstants, QuadratureRule, SIGMA_FLOOR};
use crate::error::{Error, Result};

/// Denominator of the emission coefficient below which the step counts as transparent.
const TRANSPARENT_DENOMINATOR: f64 = 1e-14;

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "temperature must be positive, got {t}"
        )))
    }
}

fn check_dt(dt: f64) -> Result<()> {
    if dt > 0.0 && dt.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time step must be positive, got {dt}"
        )))
    }
}

/// `(2 - x - e^{-x}(2 + x)) / x^2`.
fn kappa_shape(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{n>=3} (-1)^n (n-2)/n! x^{n-2}
        let mut term = 1.0 / 6.0; // 1/3!
        let mut acc = 0.0;
        let mut xp = x;
        for n in 3..24 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (nf - 2.0) * term * xp;
            term /= nf + 1.0;
            xp *= x;
        }
        acc
    } else {
        (2.0 - x - (-x).exp() * (2.0 + x)) / (x * x)
    }
}

/// `-1 + e^{-x}(1 + x)`.
fn kernel_shape(x: f64) -> f64 {
    if x < 0.5 {
        // sum_{n>=2} (-1)^n (1-n)/n! x^n
        let mut term = 0.5;
        let mut acc = 0.0;
        let mut xp = x * x;
        for n in 2..24 {
            let nf = n as f64;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * (1.0 - nf) * term * xp;
            term /= nf + 1.0;
            xp *= x;
        }
        acc
    } else {
        -1.0 + (-x).exp() * (1.0 + x)
    }
}

/// Effective diffusion coefficient of a single opacity value (signed, `<= 0`).
///
/// `(2 eps^2 - c sigma dt - e^{-c sigma dt/eps^2}(2 eps^2 + c sigma dt)) / (3 sigma^2)`.
pub fn gray_kappa(consts: &PhysConstants, sigma: f64, dt: f64) -> f64 {
    if sigma <= 0.0 {
        return 0.0;
    }
    let eps2 = consts.epsilon * consts.epsilon;
    let x = consts.time_depth(sigma, dt);
    let cdt = consts.c * dt;
    cdt * cdt / (3.0 * eps2) * kappa_shape(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// Time-kernel coefficients `C1, C2, C3` of the second-order integral solution.
pub fn time_kernel_coefficients(
    consts: &PhysConstants,
    t: f64,
    sigma: f64,
) -> Result<KernelCoefficients> {
    if !(t >= 0.0 && sigma > 0.0) {
        return Err(Error::Domain(format!(
            "time kernel needs t >= 0 and sigma > 0 (got t = {t}, sigma = {sigma})"
        )));
    }
    let eps = consts.epsilon;
    let x = consts.time_depth(sigma, t);
    let h = kernel_shape(x);
    let c2 = eps * eps * h / (consts.c * sigma);
    Ok(KernelCoefficients {
        c1: -(-x).exp_m1(),
        c2,
        c3: eps * h / sigma,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub value: f64,
    /// Set when every frequency is transparent over the step and `sigma_p` was returned.
    pub transparent_fallback: bool,
}

/// All spectral averages the macroscopic solver needs at one temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralCoefficients {
    pub sigma_p: f64,
    pub sigma_r: f64,
    pub gamma: f64,
    pub kappa: f64,
    pub transparent_fallback: bool,
}

impl SpectralCoefficients {
    pub(crate) fn lerp(&self, other: &Self, s: f64) -> Self {
        let l = |a: f64, b: f64| a + s * (b - a);
        Self {
            sigma_p: l(self.sigma_p, other.sigma_p),
            sigma_r: l(self.sigma_r, other.sigma_r),
            gamma: l(self.gamma, other.gamma),
            kappa: l(self.kappa, other.kappa),
            transparent_fallback: self.transparent_fallback || other.transparent_fallback,
        }
    }

    /// Evaluates every average in one pass over the quadrature.
    pub fn evaluate(
        model: &OpacityModel,
        t: f64,
        dt: f64,
        consts: &PhysConstants,
        rule: &QuadratureRule,
        sigma_floor: f64,
    ) -> Self {
        if let Some(sigma) = model.gray_value(t) {
            let transparent = -(-consts.time_depth(sigma, dt)).exp_m1() < TRANSPARENT_DENOMINATOR;
            return Self {
                sigma_p: sigma,
                sigma_r: sigma.max(sigma_floor),
                gamma: sigma,
                kappa: gray_kappa(consts, sigma.max(sigma_floor), dt),
                transparent_fallback: transparent,
            };
        }
        let (mut sb, mut s_sb) = (0.0, 0.0);
        let (mut sr, mut sr_inv, mut sr_k) = (0.0, 0.0, 0.0);
        let (mut sab, mut s_sab) = (0.0, 0.0);
        rule.for_each_node(t, model.breakpoints(), |u, w| {
            let sigma = model.evaluate(u, t);
            let b = w * b_density(u, t);
            let r = w * rosseland_density(u, t);
            let absorbed = -(-consts.time_depth(sigma, dt)).exp_m1();
            let sf = sigma.max(sigma_floor);
            sb += b;
            s_sb += sigma * b;
            sr += r;
            sr_inv += r / sf;
            sr_k += r * gray_kappa(consts, sf, dt);
            sab += absorbed * b;
            s_sab += sigma * absorbed * b;
        });
        let sigma_p = s_sb / sb;
        let (gamma, fallback) = if sab / sb < TRANSPARENT_DENOMINATOR {
            (sigma_p, true)
        } else {
            (s_sab / sab, false)
        };
        Self {
            sigma_p,
            sigma_r: sr / sr_inv,
            gamma,
            kappa: sr_k / sr,
            transparent_fallback: fallback,
        }
    }
}

/// Planck mean `sigma_p = int sigma b du`.
pub fn planck_mean(model: &OpacityModel, t: f64, rule: &QuadratureRule) -> Result<f64> {
    check_t(t)?;
    if let Some(s) = model.gray_value(t) {
        return Ok(s);
    }
    let (mut sb, mut s_sb) = (0.0, 0.0);
    rule.for_each_node(t, model.breakpoints(), |u, w| {
        let b = w * b_density(u, t);
        sb += b;
        s_sb += model.evaluate(u, t) * b;
    });
    Ok(s_sb / sb)
}

/// Rosseland mean `int dB/dT / int (1/sigma) dB/dT`, with `sigma` floored at `sigma_floor`.
pub fn rosseland_mean(
    model: &OpacityModel,
    t: f64,
    rule: &QuadratureRule,
    sigma_floor: f64,
) -> Result<f64> {
    check_t(t)?;
    if let Some(s) = model.gray_value(t) {
        return Ok(s.max(sigma_floor));
    }
    let (mut sr, mut sr_inv) = (0.0, 0.0);
    rule.for_each_node(t, model.breakpoints(), |u, w| {
        let r = w * rosseland_density(u, t);
        sr += r;
        sr_inv += r / model.evaluate(u, t).max(sigma_floor);
    });
    Ok(sr / sr_inv)
}

/// Emission coefficient `gamma` of the source closure.
pub fn emission_gamma(
    model: &OpacityModel,
    t: f64,
    dt: f64,
    consts: &PhysConstants,
    rule: &QuadratureRule,
) -> Result<GammaValue> {
    check_t(t)?;
    check_dt(dt)?;
    let c = SpectralCoefficients::evaluate(model, t, dt, consts, rule, SIGMA_FLOOR);
    Ok(GammaValue {
        value: c.gamma,
        transparent_fallback: c.transparent_fallback,
    })
}

/// Signed effective diffusion coefficient `kappa_eff` (cm^2, `<= 0`).
pub fn effective_kappa(
    model: &OpacityModel,
    t: f64,
    dt: f64,
    consts: &PhysConstants,
    rule: &QuadratureRule,
    sigma_floor: f64,
) -> Result<f64> {
    check_t(t)?;
    check_dt(dt)?;
    Ok(SpectralCoefficients::evaluate(model, t, dt, consts, rule, sigma_floor).kappa)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_kappa(c: &PhysConstants, sigma: f64, dt: f64) -> f64 {
        let e2 = c.epsilon * c.epsilon;
        let s = c.c * sigma * dt;
        (2.0 * e2 - s - (-s / e2).exp() * (2.0 * e2 + s)) / (3.0 * sigma * sigma)
    }

    #[test]
    fn series_and_closed_form_agree_near_switch() {
        for &x in &[0.3f64, 0.49, 0.5, 0.51, 0.8] {
            let direct = (2.0 - x - (-x).exp() * (2.0 + x)) / (x * x);
            assert!((kappa_shape(x) / direct - 1.0).abs() < 1e-12, "x = {x}");
            let direct = -1.0 + (-x).exp() * (1.0 + x);
            assert!((kernel_shape(x) / direct - 1.0).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn gray_kappa_matches_closed_form() {
        let c = PhysConstants::default();
        for &(s, dt) in &[(10.0, 1e-3), (300.0, 1.6e-3), (1.0, 1.0)] {
            let k = gray_kappa(&c, s, dt);
            assert!((k / closed_form_kappa(&c, s, dt) - 1.0).abs() < 1e-12);
            assert!(k < 0.0);
        }
    }

    #[test]
    fn kernel_coefficients() {
        let c = PhysConstants::default();
        let k = time_kernel_coefficients(&c, 0.0, 3.0).unwrap();
        assert_eq!((k.c1, k.c2, k.c3), (0.0, 0.0, 0.0));
        let k = time_kernel_coefficients(&c, 1.0, 1.0).unwrap();
        let expect = (-1.0 + (-29.98f64).exp() * (1.0 + 29.98)) / 29.98;
        assert!((k.c2 / expect - 1.0).abs() < 1e-14);
        assert!((k.c3 - c.c / c.epsilon * k.c2).abs() < 1e-15);
        assert!(k.c1 <= 1.0 && k.c1 > 1.0 - 1e-12);
        let k = time_kernel_coefficients(&c, 1e3, 1e3).unwrap();
        assert_eq!(k.c1, 1.0);
        assert!(time_kernel_coefficients(&c, 1.0, 0.0).is_err());
    }

    #[test]
    fn gamma_bounded_by_opacity_range() {
        let rule = QuadratureRule::default();
        let c = PhysConstants::default();
        let m = OpacityModel::FrequencyStep {
            sigma_low: 1e-8,
            sigma_high: 1000.0,
            u_split: 1.0,
        };
        let g = emission_gamma(&m, 1.0, 2.6e-4, &c, &rule).unwrap();
        assert!(g.value > 1e-8 && g.value <= 1000.0);
        assert!(!g.transparent_fallback);
    }

    #[test]
    fn transparent_gamma_falls_back_to_planck_mean() {
        let rule = QuadratureRule::default();
        let c = PhysConstants::default();
        let m = OpacityModel::FrequencyStep {
            sigma_low: 0.0,
            sigma_high: 0.0,
            u_split: 1.0,
        };
        let g = emission_gamma(&m, 1.0, 1e-3, &c, &rule).unwrap();
        assert!(g.transparent_fallback);
        assert_eq!(g.value, 0.0);
    }
}
