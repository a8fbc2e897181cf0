//! Hardware parameters and the dimensionful coefficients of the temperature map.
//!
//! The lattice update is written in terms of four derived constants:
//!
//! * `A = (12π⁴/5)·N·k_B/Θ_D³`, the Debye heat-capacity constant (J/K⁴);
//! * `δ = Λ·c̄·Δt/(3a²)`, the dimensionless diffusion coefficient;
//! * `γ = 84ṅ₃·Δt/(A·n_c)`, the cooling coefficient (K²);
//! * `α = n_a·k_B·ln2/(2·d·A)`, the heating coefficient (K³).
//!
//! With the qubits at the end of the lattice the factor 2 in `α` is dropped.

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, DEBYE_PREFACTOR};
use crate::error::{Error, Result};
use crate::units;

/// Upper edge of the CFL "warn" band for `δ`.
pub const CFL_WARN_LIMIT: f64 = 0.505;
/// Stability bound of the explicit 1D scheme, `δ ≤ 1/2`.
pub const CFL_DELTA_BOUND: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicalParams {
    /// Phonon mean free path Λ (m).
    #[serde(deserialize_with = "units::length")]
    pub lambda_mfp: f64,
    /// Average sound speed c̄ (m/s).
    #[serde(deserialize_with = "units::number")]
    pub sound_speed: f64,
    /// Lattice spacing a (m).
    #[serde(deserialize_with = "units::length")]
    pub lattice_spacing: f64,
    /// Simulation time step Δt (s).
    #[serde(deserialize_with = "units::time")]
    pub time_step: f64,
    /// Debye temperature Θ_D (K).
    #[serde(deserialize_with = "units::temperature")]
    pub debye_temp: f64,
    /// Number of substrate atoms N.
    #[serde(deserialize_with = "units::number")]
    pub atom_count: f64,
    /// Dilution-fridge cooling coefficient 84·ṅ₃ (W/K²).
    #[serde(deserialize_with = "units::number")]
    pub cooling_power_coeff: f64,
    /// Fridge base temperature T₀ (K).
    #[serde(deserialize_with = "units::temperature")]
    pub base_temp: f64,
    /// Number of ancilla qubits reset per QEC round, n_a.
    #[serde(deserialize_with = "units::number")]
    pub n_ancilla: f64,
    /// Number of cooled boundary sites n_c.
    pub n_cooled_sites: u32,
    /// Refrigerator sites adjacent to the cooled site, n_r.
    pub n_fridge_neighbors: u32,
    /// Lattice dimension d; only 1 is supported.
    pub dimension: u32,
    /// Lattice length L in sites.
    pub num_sites: usize,
    /// Include the ln 2 factor of Landauer erasure in α.
    pub heating_ln2: bool,
    /// Qubits sit at the lattice end (drops the factor 2 in α).
    pub end_placement: bool,
}

impl Default for PhysicalParams {
    /// Superconducting transmons on silicon running 2048-bit RSA factoring.
    fn default() -> Self {
        Self {
            lambda_mfp: 0.5e-3,
            sound_speed: 5718.0,
            lattice_spacing: 1e-6,
            time_step: 0.526e-12,
            debye_temp: 636.0,
            atom_count: 2.5e27,
            cooling_power_coeff: 0.04,
            base_temp: 0.01,
            n_ancilla: 2e7,
            n_cooled_sites: 1,
            n_fridge_neighbors: 1,
            dimension: 1,
            num_sites: 50,
            heating_ln2: true,
            end_placement: true,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("lambda_mfp", self.lambda_mfp),
            ("sound_speed", self.sound_speed),
            ("lattice_spacing", self.lattice_spacing),
            ("time_step", self.time_step),
            ("debye_temp", self.debye_temp),
            ("atom_count", self.atom_count),
            ("base_temp", self.base_temp),
        ];
        for (name, v) in strictly_positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(
                    format!("physical.{name}"),
                    format!("must be finite and > 0, got {v}"),
                ));
            }
        }
        for (name, v) in [
            ("n_ancilla", self.n_ancilla),
            ("cooling_power_coeff", self.cooling_power_coeff),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(
                    format!("physical.{name}"),
                    format!("must be finite and >= 0, got {v}"),
                ));
            }
        }
        if self.n_cooled_sites == 0 {
            return Err(Error::invalid("physical.n_cooled_sites", "must be >= 1"));
        }
        if self.n_fridge_neighbors == 0 {
            return Err(Error::invalid("physical.n_fridge_neighbors", "must be >= 1"));
        }
        if self.dimension != 1 {
            return Err(Error::invalid(
                "physical.dimension",
                format!("only d = 1 lattices are implemented, got d = {}", self.dimension),
            ));
        }
        if self.num_sites < 2 {
            return Err(Error::invalid(
                "physical.num_sites",
                format!("lattice needs at least 2 sites, got {}", self.num_sites),
            ));
        }
        if self.base_temp >= self.debye_temp {
            return Err(Error::invalid(
                "physical.base_temp",
                format!(
                    "base temperature {} K must lie below the Debye temperature {} K",
                    self.base_temp, self.debye_temp
                ),
            ));
        }
        Ok(())
    }

    /// Thermal diffusivity 𝒥 = Λ·c̄/3 (m²/s).
    pub fn diffusivity(&self) -> f64 {
        self.lambda_mfp * self.sound_speed / 3.0
    }
}

/// Debye heat-capacity constant `A` (J/K⁴).
pub fn derive_debye_a(params: &PhysicalParams) -> Result<f64> {
    if !(params.atom_count > 0.0) {
        return Err(Error::invalid("physical.atom_count", "must be > 0"));
    }
    if !(params.debye_temp > 0.0) {
        return Err(Error::invalid("physical.debye_temp", "must be > 0"));
    }
    Ok(DEBYE_PREFACTOR * params.atom_count * BOLTZMANN / params.debye_temp.powi(3))
}

pub fn derive_delta(params: &PhysicalParams) -> f64 {
    params.diffusivity() * params.time_step / (params.lattice_spacing * params.lattice_spacing)
}

pub fn derive_gamma(params: &PhysicalParams, debye_a: f64) -> Result<f64> {
    if params.n_cooled_sites == 0 {
        return Err(Error::invalid("physical.n_cooled_sites", "must be >= 1"));
    }
    Ok(params.cooling_power_coeff * params.time_step / (debye_a * params.n_cooled_sites as f64))
}

pub fn derive_alpha(params: &PhysicalParams, debye_a: f64) -> f64 {
    let ln2 = if params.heating_ln2 { std::f64::consts::LN_2 } else { 1.0 };
    let placement = if params.end_placement { 1.0 } else { 2.0 };
    params.n_ancilla * BOLTZMANN * ln2 / (placement * params.dimension as f64 * debye_a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// Heating coefficient α (K³).
    pub alpha: f64,
    /// Cooling coefficient γ (K²).
    pub gamma: f64,
    /// Diffusion coefficient δ.
    pub delta: f64,
    /// Debye constant A (J/K⁴).
    pub debye_a: f64,
    /// Thermal diffusivity 𝒥 (m²/s).
    pub diffusivity: f64,
}

impl Coefficients {
    pub fn derive(params: &PhysicalParams) -> Result<Self> {
        params.validate()?;
        let debye_a = derive_debye_a(params)?;
        Ok(Self {
            alpha: derive_alpha(params, debye_a),
            gamma: derive_gamma(params, debye_a)?,
            delta: derive_delta(params),
            debye_a,
            diffusivity: params.diffusivity(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CflVerdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CflReport {
    /// Largest stable time step a²/(2𝒥) (s).
    pub time_step_bound: f64,
    pub delta: f64,
    pub delta_bound: f64,
    pub verdict: CflVerdict,
}

pub fn cfl_verdict(delta: f64) -> CflVerdict {
    if delta < CFL_DELTA_BOUND {
        CflVerdict::Pass
    } else if delta <= CFL_WARN_LIMIT {
        CflVerdict::Warn
    } else {
        CflVerdict::Fail
    }
}

pub fn check_cfl(params: &PhysicalParams) -> CflReport {
    let delta = derive_delta(params);
    CflReport {
        time_step_bound: params.lattice_spacing * params.lattice_spacing
            / (2.0 * params.diffusivity()),
        delta,
        delta_bound: CFL_DELTA_BOUND,
        verdict: cfl_verdict(delta),
    }
}
