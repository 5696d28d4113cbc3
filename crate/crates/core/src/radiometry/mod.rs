//! Physical constants, opacity models and Planck-spectrum machinery.
//!
//! Frequencies are carried as photon energies `u = h nu` in keV and
//! temperatures in keV, so `kT = T` numerically and Planck's and Boltzmann's
//! constants never appear on their own.

mod means;
mod opacity;
mod planck;
mod quadrature;
mod sampling;

pub use means::{
    effective_kappa, emission_gamma, gray_kappa, planck_mean, rosseland_mean,
    time_kernel_coefficients, GammaValue, KernelCoefficients, SpectralCoefficients,
};
pub use opacity::OpacityModel;
pub(crate) use planck::{b_density, rosseland_density};
pub use planck::{dplanck_dt, planck_b, planck_big_b, rosseland_weight};
pub use quadrature::{FrequencyQuadrature, QuadNode, QuadratureRule};
pub use sampling::{sample_emission_u, sample_planck_u, EmissionSample, EmissionSampler};

use serde::{Deserialize, Serialize};

/// Speed of light, cm/ns.
pub const LIGHT_SPEED: f64 = 29.98;
/// Radiation constant, GJ cm^-3 keV^-4.
pub const RADIATION_CONSTANT: f64 = 0.01372;
/// Opacity floor applied wherever `1/sigma` appears.
pub const SIGMA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysConstants {
    pub c: f64,
    pub a: f64,
    pub epsilon: f64,
}

impl Default for PhysConstants {
    fn default() -> Self {
        Self {
            c: LIGHT_SPEED,
            a: RADIATION_CONSTANT,
            epsilon: 1.0,
        }
    }
}

impl PhysConstants {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    /// `a c`, the proportionality between `U_r` and `T^4`.
    #[inline]
    pub fn ac(&self) -> f64 {
        self.a * self.c
    }

    /// Particle speed `c / eps`.
    #[inline]
    pub fn speed(&self) -> f64 {
        self.c / self.epsilon
    }

    /// Optical depth in time, `c sigma dt / eps^2`.
    #[inline]
    pub fn time_depth(&self, sigma: f64, dt: f64) -> f64 {
        self.c * sigma * dt / (self.epsilon * self.epsilon)
    }

    /// `U_r = a c T^4`.
    #[inline]
    pub fn ur(&self, t: f64) -> f64 {
        let t2 = t * t;
        self.ac() * t2 * t2
    }

    /// Radiation temperature `(rho / a c)^{1/4}`.
    #[inline]
    pub fn radiation_temperature(&self, rho: f64) -> f64 {
        (rho.max(0.0) / self.ac()).powf(0.25)
    }
}
