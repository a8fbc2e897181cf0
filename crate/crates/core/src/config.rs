//! Simulation config: a strict TOML schema whose defaults are the flagship
//! operating point (2×10⁷ transmons on silicon, distance-27 surface code,
//! dilution fridge at 10 mK).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::coefficients::{self, check_cfl, CflReport, CflVerdict, Coefficients, PhysicalParams};
use crate::error::{Error, Result};
use crate::lattice::{Dynamics, LatticeState, RunBudget};
use crate::phase::{DetectionSettings, QuasiSettings};
use crate::thermo::{ErrorModel, QecPolicy};
use crate::units;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub physical: PhysicalParams,
    pub error_model: ErrorModel,
    pub qec: QecPolicy,
    pub coefficients: CoefficientOverrides,
    pub numerics: Numerics,
    pub outputs: Outputs,
}

/// Direct values for α, γ, δ, bypassing the hardware derivation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoefficientOverrides {
    #[serde(skip_serializing_if = "Option::is_none", deserialize_with = "units::opt_number")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", deserialize_with = "units::opt_number")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", deserialize_with = "units::opt_number")]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    #[default]
    Quasilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Numerics {
    pub mode: Mode,
    /// Exact-step budget.
    pub max_steps: u64,
    /// Simulated-time budget (s).
    #[serde(deserialize_with = "units::time")]
    pub max_time: f64,
    pub sampling_stride: u64,
    pub plateau_window: usize,
    #[serde(deserialize_with = "units::number")]
    pub plateau_rel_tol: f64,
    #[serde(deserialize_with = "units::number")]
    pub balance_tol: f64,
    pub debounce_steps: u64,
    pub quasi: QuasiSettings,
}

impl Default for Numerics {
    fn default() -> Self {
        let detection = DetectionSettings::default();
        Self {
            mode: Mode::Quasilinear,
            max_steps: 2_000_000_000,
            max_time: 1000.0,
            sampling_stride: detection.sampling_stride,
            plateau_window: detection.plateau_window,
            plateau_rel_tol: detection.plateau_rel_tol,
            balance_tol: detection.balance_tol,
            debounce_steps: detection.debounce_steps,
            quasi: QuasiSettings::default(),
        }
    }
}

impl Numerics {
    pub fn detection(&self) -> DetectionSettings {
        DetectionSettings {
            sampling_stride: self.sampling_stride,
            plateau_window: self.plateau_window,
            plateau_rel_tol: self.plateau_rel_tol,
            balance_tol: self.balance_tol,
            debounce_steps: self.debounce_steps,
        }
    }

    pub fn budget(&self) -> RunBudget {
        RunBudget {
            max_steps: self.max_steps,
            max_time: self.max_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub dir: String,
    pub trajectory_csv: bool,
}

impl Default for Outputs {
    fn default() -> Self {
        Self {
            dir: "out".into(),
            trajectory_csv: true,
        }
    }
}

/// Parses config text, applies `key.path=value` overrides and validates.
///
/// An empty document yields the flagship defaults.
pub fn parse_config(text: &str, overrides: &[String]) -> Result<SimConfig> {
    let config: SimConfig = if overrides.is_empty() {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        serde_path_to_error::deserialize(de).map_err(path_error)?
    } else {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| Error::Config {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(path_error)?
    };
    config.validate()?;
    Ok(config)
}

fn path_error<E: std::fmt::Display>(e: serde_path_to_error::Error<E>) -> Error {
    Error::Config {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    }
}

/// Applies one `a.b.c=value` override; `value` is read as a TOML literal when
/// possible and as a bare string otherwise (so `--set physical.base_temp=20mK`
/// works without quoting).
pub fn apply_override(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (key, raw) = assignment.split_once('=').ok_or_else(|| Error::Config {
        path: assignment.into(),
        message: "override must look like `section.key=value`".into(),
    })?;
    let key = key.trim();
    let raw = raw.trim();
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config {
            path: key.into(),
            message: "empty path segment".into(),
        });
    }
    let (last, parents) = parts.split_last().expect("split yields at least one part");
    let mut cursor = table;
    for (depth, part) in parents.iter().enumerate() {
        let entry = cursor
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cursor = entry.as_table_mut().ok_or_else(|| Error::Config {
            path: parts[..=depth].join("."),
            message: "not a table".into(),
        })?;
    }
    cursor.insert(last.to_string(), value);
    Ok(())
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.physical.validate()?;
        self.error_model.validate()?;
        self.qec.validate()?;
        for (name, v) in [
            ("coefficients.alpha", self.coefficients.alpha),
            ("coefficients.gamma", self.coefficients.gamma),
            ("coefficients.delta", self.coefficients.delta),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(Error::invalid(name, format!("must be finite and >= 0, got {v}")));
                }
            }
        }
        self.numerics.detection().validate()?;
        self.numerics.budget().validate()?;
        self.numerics.quasi.validate()?;
        let report = self.derive_report()?;
        if report.cfl.verdict == CflVerdict::Fail {
            return Err(Error::invalid(
                "coefficients.delta",
                format!(
                    "δ = {} exceeds the explicit-scheme stability limit {}",
                    report.coefficients.delta,
                    coefficients::CFL_WARN_LIMIT
                ),
            ));
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes to TOML")
    }

    /// Coefficients after applying the `[coefficients]` overrides.
    pub fn coefficients(&self) -> Result<Coefficients> {
        let mut c = Coefficients::derive(&self.physical)?;
        if let Some(a) = self.coefficients.alpha {
            c.alpha = a;
        }
        if let Some(g) = self.coefficients.gamma {
            c.gamma = g;
        }
        if let Some(d) = self.coefficients.delta {
            c.delta = d;
        }
        Ok(c)
    }

    pub fn derive_report(&self) -> Result<DeriveReport> {
        let derived = Coefficients::derive(&self.physical)?;
        let coefficients = self.coefficients()?;
        let with_ln2 = PhysicalParams {
            heating_ln2: true,
            ..self.physical.clone()
        };
        let without_ln2 = PhysicalParams {
            heating_ln2: false,
            ..self.physical.clone()
        };
        let mut cfl = check_cfl(&self.physical);
        if self.coefficients.delta.is_some() {
            cfl.delta = coefficients.delta;
            cfl.verdict = coefficients::cfl_verdict(coefficients.delta);
        }
        let stepping_delta = coefficients.delta.min(coefficients::CFL_DELTA_BOUND);
        Ok(DeriveReport {
            debye_a: derived.debye_a,
            diffusivity: derived.diffusivity,
            derived,
            coefficients,
            alpha_ln2_on: coefficients::derive_alpha(&with_ln2, derived.debye_a),
            alpha_ln2_off: coefficients::derive_alpha(&without_ln2, derived.debye_a),
            cfl,
            stepping_delta,
        })
    }

    /// Stepper inputs. Warn-band δ is stepped at the stability bound 1/2.
    pub fn dynamics(&self) -> Result<(Dynamics, Vec<String>)> {
        let report = self.derive_report()?;
        let mut warnings = Vec::new();
        if report.cfl.verdict == CflVerdict::Fail {
            return Err(Error::invalid(
                "coefficients.delta",
                format!("δ = {} is outside the stable range", report.coefficients.delta),
            ));
        }
        let mut coeffs = report.coefficients;
        if report.stepping_delta < coeffs.delta {
            warnings.push(format!(
                "δ = {} lies in the CFL warn band; stepping with δ = {}",
                coeffs.delta, report.stepping_delta
            ));
            coeffs.delta = report.stepping_delta;
        }
        let dynamics = Dynamics::new(
            &coeffs,
            self.physical.base_temp,
            self.physical.n_fridge_neighbors,
            self.physical.time_step,
            self.error_model.clone(),
            self.qec.clone(),
        );
        Ok((dynamics, warnings))
    }

    pub fn initial_state(&self) -> Result<LatticeState> {
        LatticeState::new(self.physical.num_sites, self.physical.base_temp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeriveReport {
    pub debye_a: f64,
    pub diffusivity: f64,
    /// Values derived from the hardware parameters alone.
    pub derived: Coefficients,
    /// Values used by the simulation (after `[coefficients]` overrides).
    pub coefficients: Coefficients,
    pub alpha_ln2_on: f64,
    pub alpha_ln2_off: f64,
    pub cfl: CflReport,
    /// δ actually used by the stepper.
    pub stepping_delta: f64,
}

impl DeriveReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let c = &self.coefficients;
        let _ = writeln!(s, "Debye constant      A   = {:.4e} J/K^4", self.debye_a);
        let _ = writeln!(s, "thermal diffusivity J   = {:.4} m^2/s", self.diffusivity);
        let _ = writeln!(s, "diffusion coeff     δ   = {:.6}", c.delta);
        let _ = writeln!(s, "cooling coeff       γ   = {:.4e} K^2", c.gamma);
        let _ = writeln!(s, "heating coeff       α   = {:.4e} K^3 (in use)", c.alpha);
        let _ = writeln!(s, "  α with ln2            = {:.4e} K^3", self.alpha_ln2_on);
        let _ = writeln!(s, "  α without ln2         = {:.4e} K^3", self.alpha_ln2_off);
        let _ = writeln!(
            s,
            "  note: the Landauer heat per erased bit carries ln2; the commonly quoted\n        8.79e-15 K^3 matches the expression without it (heating_ln2 = false)"
        );
        let _ = writeln!(s, "CFL time-step bound     = {:.4e} s", self.cfl.time_step_bound);
        let _ = writeln!(
            s,
            "CFL verdict             = {:?} (δ = {:.6}, bound {})",
            self.cfl.verdict, self.cfl.delta, self.cfl.delta_bound
        );
        if self.stepping_delta < c.delta {
            let _ = writeln!(s, "stepping δ              = {} (clamped to the stability bound)", self.stepping_delta);
        }
        s
    }

    pub fn to_key_values(&self) -> String {
        let c = &self.coefficients;
        let verdict = match self.cfl.verdict {
            CflVerdict::Pass => "pass",
            CflVerdict::Warn => "warn",
            CflVerdict::Fail => "fail",
        };
        [
            format!("debye_A={:e}", self.debye_a),
            format!("diffusivity={:e}", self.diffusivity),
            format!("delta={:e}", c.delta),
            format!("gamma={:e}", c.gamma),
            format!("alpha={:e}", c.alpha),
            format!("alpha_ln2_on={:e}", self.alpha_ln2_on),
            format!("alpha_ln2_off={:e}", self.alpha_ln2_off),
            format!("cfl_time_step_bound={:e}", self.cfl.time_step_bound),
            format!("cfl_delta_bound={:e}", self.cfl.delta_bound),
            format!("cfl_verdict={verdict}"),
            format!("stepping_delta={:e}", self.stepping_delta),
        ]
        .join("\n")
            + "\n"
    }
}
