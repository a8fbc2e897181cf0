//! Closed-form thermodynamic and error-model laws.

use serde::{Deserialize, Serialize};

use crate::constants::BOLTZMANN;
use crate::error::{Error, Result};
use crate::units;

/// Value reported by [`QecPolicy::qec_frequency`] once the logical failure
/// probability saturates. Finite so the stepper never propagates inf/NaN.
pub const FREQUENCY_CEILING: f64 = 1e12;

/// Debye heat capacity `A·T³` (J/K).
pub fn heat_capacity(debye_a: f64, temp: f64) -> Result<f64> {
    if !(temp >= 0.0) {
        return Err(Error::invalid("temperature", format!("must be >= 0, got {temp}")));
    }
    Ok(debye_a * temp * temp * temp)
}

/// Physical error probability as a function of substrate temperature:
/// `p0 + qp_amplitude·exp(−Δ/k_BT) + B·Tⁿ`, clamped to [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ErrorModel {
    #[serde(deserialize_with = "units::number")]
    pub p0: f64,
    /// TLS scaling constant B (K⁻ⁿ).
    #[serde(deserialize_with = "units::number")]
    pub tls_b: f64,
    #[serde(deserialize_with = "units::number")]
    pub tls_n: f64,
    /// Quasiparticle prefactor; 0 disables the term.
    #[serde(deserialize_with = "units::number")]
    pub qp_amplitude: f64,
    /// Superconducting gap Δ (J).
    #[serde(deserialize_with = "units::energy")]
    pub qp_gap: f64,
}

impl Default for ErrorModel {
    /// `n = 1` with the threshold crossed at 100 mK, so `B = 0.1 K⁻¹`.
    fn default() -> Self {
        Self {
            p0: 0.0,
            tls_b: 0.1,
            tls_n: 1.0,
            qp_amplitude: 0.0,
            qp_gap: 0.0,
        }
    }
}

impl ErrorModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.p0 >= 0.0) {
            return Err(Error::invalid("error_model.p0", "must be >= 0"));
        }
        if !(self.tls_b >= 0.0) {
            return Err(Error::invalid("error_model.tls_b", "must be >= 0"));
        }
        if !(self.tls_n > 0.0) {
            return Err(Error::invalid("error_model.tls_n", "must be > 0"));
        }
        if !(self.qp_amplitude >= 0.0 && self.qp_gap >= 0.0) {
            return Err(Error::invalid(
                "error_model.qp_amplitude",
                "quasiparticle amplitude and gap must be >= 0",
            ));
        }
        Ok(())
    }

    pub fn p_err(&self, temp: f64) -> f64 {
        let temp = temp.max(0.0);
        let qp = if self.qp_amplitude > 0.0 && temp > 0.0 {
            self.qp_amplitude * (-self.qp_gap / (BOLTZMANN * temp)).exp()
        } else {
            0.0
        };
        let tls = if self.tls_n == 1.0 {
            self.tls_b * temp
        } else {
            self.tls_b * temp.powf(self.tls_n)
        };
        (self.p0 + qp + tls).clamp(0.0, 1.0)
    }
}

/// Surface-code failure law and the QEC frequency built on it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QecPolicy {
    #[serde(deserialize_with = "units::number")]
    pub p_th: f64,
    pub code_distance: u32,
    /// Progressivity exponent c_f of the odds-power law.
    #[serde(deserialize_with = "units::number")]
    pub c_f: f64,
}

impl Default for QecPolicy {
    fn default() -> Self {
        Self {
            p_th: 0.01,
            code_distance: 27,
            c_f: 0.25,
        }
    }
}

impl QecPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_th > 0.0 && self.p_th < 1.0) {
            return Err(Error::invalid("qec.p_th", format!("must lie in (0, 1), got {}", self.p_th)));
        }
        if self.code_distance < 3 {
            return Err(Error::invalid(
                "qec.code_distance",
                format!("must be >= 3, got {}", self.code_distance),
            ));
        }
        if !(self.c_f > 0.0 && self.c_f.is_finite()) {
            return Err(Error::invalid("qec.c_f", "must be finite and > 0"));
        }
        Ok(())
    }

    /// `p_f = min((p_err/p_th)^(d_c/2), 1)`.
    pub fn logical_failure(&self, p_err: f64) -> f64 {
        let ratio = p_err.max(0.0) / self.p_th;
        if ratio >= 1.0 {
            return 1.0;
        }
        ratio.powf(self.code_distance as f64 / 2.0)
    }

    /// Expected QEC events per time step, `(p_f/(1−p_f))^c_f`, saturating at
    /// [`FREQUENCY_CEILING`].
    pub fn qec_frequency(&self, p_f: f64) -> f64 {
        let p_f = p_f.clamp(0.0, 1.0);
        if p_f >= 1.0 {
            return FREQUENCY_CEILING;
        }
        let odds = p_f / (1.0 - p_f);
        let f = if self.c_f == 0.25 {
            odds.sqrt().sqrt()
        } else {
            odds.powf(self.c_f)
        };
        f.min(FREQUENCY_CEILING)
    }

    /// `f(p_f(p_err(T)))`.
    pub fn frequency_at(&self, model: &ErrorModel, temp: f64) -> f64 {
        self.qec_frequency(self.logical_failure(model.p_err(temp)))
    }
}
