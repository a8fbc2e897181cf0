//! Config-level entry points: run one operating point in the configured mode.

use serde::{Deserialize, Serialize};

use crate::config::{Mode, SimConfig};
use crate::error::Result;
use crate::lattice::TrajectoryRecord;
use crate::phase::{classify_exact, quasilinear_run, PhaseOutcome, Segment, SegmentKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simulation {
    pub mode: Mode,
    pub outcome: PhaseOutcome,
    #[serde(skip)]
    pub trajectory: TrajectoryRecord,
    pub segments: Vec<Segment>,
}

/// Runs the configured operating point and keeps the sampled trajectory.
pub fn simulate(config: &SimConfig) -> Result<Simulation> {
    let (dynamics, warnings) = config.dynamics()?;
    let mut state = config.initial_state()?;
    let budget = config.numerics.budget();
    let detection = config.numerics.detection();
    let mut sim = match config.numerics.mode {
        Mode::Exact => {
            let (outcome, trajectory) = classify_exact(&mut state, &dynamics, budget, &detection)?;
            let t_end = trajectory.samples.last().map_or(0.0, |s| s.time);
            Simulation {
                mode: Mode::Exact,
                outcome,
                trajectory,
                segments: vec![Segment {
                    kind: SegmentKind::Exact,
                    t_start: 0.0,
                    t_end,
                }],
            }
        }
        Mode::Quasilinear => {
            let out = quasilinear_run(&mut state, &dynamics, budget, &detection, &config.numerics.quasi)?;
            Simulation {
                mode: Mode::Quasilinear,
                outcome: out.outcome,
                trajectory: out.trajectory,
                segments: out.segments,
            }
        }
    };
    let mut all = warnings;
    all.append(&mut sim.outcome.diagnostics.warnings);
    sim.outcome.diagnostics.warnings = all;
    Ok(sim)
}

/// Phase of the configured operating point.
pub fn classify(config: &SimConfig) -> Result<PhaseOutcome> {
    simulate(config).map(|s| s.outcome)
}

/// Copy of `base` with α, γ, δ pinned.
pub fn with_coefficients(base: &SimConfig, alpha: f64, gamma: f64, delta: f64) -> SimConfig {
    let mut cfg = base.clone();
    cfg.coefficients.alpha = Some(alpha);
    cfg.coefficients.gamma = Some(gamma);
    cfg.coefficients.delta = Some(delta);
    cfg
}
