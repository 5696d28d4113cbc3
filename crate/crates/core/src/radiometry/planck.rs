use std::f64::consts::PI;

use super::PhysConstants;
use crate::error::{Error, Result};

/// `15 / pi^4`, the normalization of `x^3 / (e^x - 1)`.
pub(crate) const PLANCK_NORM: f64 = 15.0 / (PI * PI * PI * PI);
/// Beyond this `u/T` the spectrum is treated as exactly zero.
const X_CUTOFF: f64 = 700.0;

fn check(u: f64, t: f64) -> Result<()> {
    if u > 0.0 && t > 0.0 && u.is_finite() && t.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Planck functions need u > 0 and T > 0 (got u = {u}, T = {t})"
        )))
    }
}

/// Normalized Planck density `b(u, T)` without argument checks.
#[inline]
pub(crate) fn b_density(u: f64, t: f64) -> f64 {
    let x = u / t;
    if x > X_CUTOFF {
        return 0.0;
    }
    PLANCK_NORM / t * x * x * x / x.exp_m1()
}

/// Normalized `dB/dT` weight, `pi (dB/dT) / (a c T^3)`; integrates to one over `u`.
#[inline]
pub(crate) fn rosseland_density(u: f64, t: f64) -> f64 {
    let x = u / t;
    if x > X_CUTOFF {
        return 0.0;
    }
    let em = (-x).exp_m1();
    let x2 = x * x;
    0.25 * PLANCK_NORM / t * x2 * x2 * (-x).exp() / (em * em)
}

/// Normalized Planck spectrum `b(u, T) = 15 u^3 / (pi^4 T^4 (e^{u/T} - 1))`, keV^-1.
pub fn planck_b(u: f64, t: f64) -> Result<f64> {
    check(u, t)?;
    Ok(b_density(u, t))
}

/// Planck intensity `B(u, T) = (a c T^4 / 4 pi) b(u, T)`.
pub fn planck_big_b(consts: &PhysConstants, u: f64, t: f64) -> Result<f64> {
    check(u, t)?;
    Ok(consts.ur(t) / (4.0 * PI) * b_density(u, t))
}

/// `dB/dT (u, T)`.
pub fn dplanck_dt(consts: &PhysConstants, u: f64, t: f64) -> Result<f64> {
    check(u, t)?;
    Ok(consts.ac() * t * t * t / PI * rosseland_density(u, t))
}

/// Rosseland weighting `b + (T/4) db/dT`, normalized to unit integral.
pub fn rosseland_weight(u: f64, t: f64) -> Result<f64> {
    check(u, t)?;
    Ok(rosseland_density(u, t))
}
