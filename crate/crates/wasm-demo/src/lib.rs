//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export takes plain numbers or TOML text and returns a JSON string so
//! the page needs no glue beyond `JSON.parse`. The `*_json` functions hold the
//! logic and are what the native tests call.

use qec_thermal::config::{parse_config, Mode, SimConfig};
use qec_thermal::sim::{simulate, with_coefficients};
use qec_thermal::sweep::{count_transitions, scan_transition, Axis, Spacing};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// Hard cap on exact steps per call so the page stays responsive.
pub const MAX_DEMO_STEPS: u64 = 20_000_000;

fn toy(alpha: f64, gamma: f64, delta: f64, max_steps: u64) -> Result<SimConfig, String> {
    let mut base = SimConfig::default();
    base.numerics.mode = Mode::Exact;
    base.numerics.max_steps = max_steps.clamp(1, MAX_DEMO_STEPS);
    base.numerics.max_time = 1.0;
    base.numerics.sampling_stride = 100;
    base.numerics.plateau_window = 5000;
    base.numerics.plateau_rel_tol = 1e-3;
    base.numerics.balance_tol = 2e-3;
    let cfg = with_coefficients(&base, alpha, gamma, delta);
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

pub fn derive_json(overrides_toml: &str) -> Result<String, String> {
    let cfg = parse_config(overrides_toml, &[]).map_err(|e| e.to_string())?;
    let report = cfg.derive_report().map_err(|e| e.to_string())?;
    serde_json::to_string(&report).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct TrajectoryView {
    phase: &'static str,
    tau: Option<f64>,
    steady_temp: Option<f64>,
    /// `[time_s, T_qubit_K, T_fridge_K, T_mean_K]` rows, thinned to at most
    /// `max_points`.
    samples: Vec<[f64; 4]>,
}

pub fn simulate_json(alpha: f64, gamma: f64, delta: f64, max_steps: u64, max_points: usize) -> Result<String, String> {
    let cfg = toy(alpha, gamma, delta, max_steps)?;
    let sim = simulate(&cfg).map_err(|e| e.to_string())?;
    let all = &sim.trajectory.samples;
    let every = all.len().div_ceil(max_points.max(2)).max(1);
    let mut samples: Vec<[f64; 4]> = all
        .iter()
        .step_by(every)
        .map(|s| [s.time, s.t_qubit, s.t_fridge, s.t_mean])
        .collect();
    if let Some(last) = all.last() {
        if samples.last().map(|r| r[0]) != Some(last.time) {
            samples.push([last.time, last.t_qubit, last.t_fridge, last.t_mean]);
        }
    }
    let phase = &sim.outcome.phase;
    let view = TrajectoryView {
        phase: phase.label(),
        tau: phase.tau(),
        steady_temp: match phase {
            qec_thermal::phase::Phase::Bounded { steady_temp } => Some(*steady_temp),
            _ => None,
        },
        samples,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct ScanView {
    points: Vec<qec_thermal::sweep::TransitionPoint>,
    transitions: usize,
    reentrant: bool,
}

pub fn scan_json(alpha: f64, delta: f64, gamma_min: f64, gamma_max: f64, count: usize, max_steps: u64) -> Result<String, String> {
    let axis = Axis {
        min: gamma_min,
        max: gamma_max,
        count,
        spacing: Spacing::Log,
    };
    axis.validate("gamma").map_err(|e| e.to_string())?;
    let base = toy(alpha, gamma_min, delta, max_steps)?;
    let points = scan_transition(&base, alpha, delta, &axis.values(), 1).map_err(|e| e.to_string())?;
    let (transitions, reentrant) = count_transitions(&points);
    serde_json::to_string(&ScanView {
        points,
        transitions,
        reentrant,
    })
    .map_err(|e| e.to_string())
}

/// Coefficient report for a config written as TOML (empty for defaults).
#[wasm_bindgen]
pub fn derive(overrides_toml: &str) -> Result<String, JsValue> {
    derive_json(overrides_toml).map_err(|e| JsValue::from_str(&e))
}

/// Exact trajectory of the toy lattice (50 sites, 10 mK) at the given α, γ, δ.
#[wasm_bindgen]
pub fn trajectory(alpha: f64, gamma: f64, delta: f64, max_steps: f64, max_points: u32) -> Result<String, JsValue> {
    simulate_json(alpha, gamma, delta, max_steps as u64, max_points as usize).map_err(|e| JsValue::from_str(&e))
}

/// Log-spaced γ scan reporting 1/τ per point.
#[wasm_bindgen]
pub fn gamma_scan(alpha: f64, delta: f64, gamma_min: f64, gamma_max: f64, count: u32, max_steps: f64) -> Result<String, JsValue> {
    scan_json(alpha, delta, gamma_min, gamma_max, count as usize, max_steps as u64).map_err(|e| JsValue::from_str(&e))
}
