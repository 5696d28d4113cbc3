use serde::{Deserialize, Serialize};

/// Absorption/emission coefficient `sigma(u, T)` in cm^-1, with `u` and `T` in keV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OpacityModel {
    /// `sigma = sigma0`.
    GrayConstant { sigma0: f64 },
    /// `sigma = sigma0 / T^exponent`.
    GrayPowerLaw { sigma0: f64, exponent: f64 },
    /// `sigma_low` for `u < u_split`, `sigma_high` otherwise.
    FrequencyStep {
        sigma_low: f64,
        sigma_high: f64,
        u_split: f64,
    },
    /// `sigma = sigma0 / (u^3 sqrt(T))`.
    FrequencyPowerLaw { sigma0: f64 },
    /// `sigma = sigma0 (1 - exp(-u/T)) / u^3`.
    StimulatedPowerLaw { sigma0: f64 },
}

impl OpacityModel {
    #[inline]
    pub fn evaluate(&self, u: f64, t: f64) -> f64 {
        match *self {
            OpacityModel::GrayConstant { sigma0 } => sigma0,
            OpacityModel::GrayPowerLaw { sigma0, exponent } => sigma0 / t.powf(exponent),
            OpacityModel::FrequencyStep {
                sigma_low,
                sigma_high,
                u_split,
            } => {
                if u < u_split {
                    sigma_low
                } else {
                    sigma_high
                }
            }
            OpacityModel::FrequencyPowerLaw { sigma0 } => sigma0 / (u * u * u * t.sqrt()),
            OpacityModel::StimulatedPowerLaw { sigma0 } => {
                -sigma0 * (-u / t).exp_m1() / (u * u * u)
            }
        }
    }

    /// Frequency-independent models.
    pub fn is_gray(&self) -> bool {
        matches!(
            self,
            OpacityModel::GrayConstant { .. } | OpacityModel::GrayPowerLaw { .. }
        )
    }

    /// Value of a gray model at temperature `t`; `None` for frequency-dependent models.
    pub fn gray_value(&self, t: f64) -> Option<f64> {
        self.is_gray().then(|| self.evaluate(1.0, t))
    }

    /// Photon energies where `sigma` is discontinuous.
    pub fn breakpoints(&self) -> Option<f64> {
        match *self {
            OpacityModel::FrequencyStep { u_split, .. } => Some(u_split),
            _ => None,
        }
    }

    /// Same model with the opacity multiplied pointwise by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            OpacityModel::GrayConstant { sigma0 } => OpacityModel::GrayConstant {
                sigma0: sigma0 * factor,
            },
            OpacityModel::GrayPowerLaw { sigma0, exponent } => OpacityModel::GrayPowerLaw {
                sigma0: sigma0 * factor,
                exponent,
            },
            OpacityModel::FrequencyStep {
                sigma_low,
                sigma_high,
                u_split,
            } => OpacityModel::FrequencyStep {
                sigma_low: sigma_low * factor,
                sigma_high: sigma_high * factor,
                u_split,
            },
            OpacityModel::FrequencyPowerLaw { sigma0 } => OpacityModel::FrequencyPowerLaw {
                sigma0: sigma0 * factor,
            },
            OpacityModel::StimulatedPowerLaw { sigma0 } => OpacityModel::StimulatedPowerLaw {
                sigma0: sigma0 * factor,
            },
        }
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let ok = match *self {
            OpacityModel::GrayConstant { sigma0 } => sigma0 >= 0.0 && sigma0.is_finite(),
            OpacityModel::GrayPowerLaw { sigma0, exponent } => {
                sigma0 >= 0.0 && sigma0.is_finite() && exponent.is_finite()
            }
            OpacityModel::FrequencyStep {
                sigma_low,
                sigma_high,
                u_split,
            } => sigma_low >= 0.0 && sigma_high >= 0.0 && u_split > 0.0,
            OpacityModel::FrequencyPowerLaw { sigma0 }
            | OpacityModel::StimulatedPowerLaw { sigma0 } => sigma0 >= 0.0 && sigma0.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("opacity parameters out of range: {self:?}"))
        }
    }
}
