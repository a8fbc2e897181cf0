//! Bounded/unbounded classification, quasi-linear acceleration, and the
//! critical-point search.
//!
//! A run is **Bounded** once the qubit-site temperature has stopped moving
//! (relative change between the two halves of a trailing window below
//! `plateau_rel_tol`), the fridge removes what the QEC deposits over that same
//! window (`removed ≥ (1 − balance_tol)·deposited`), and the error rate sits
//! below threshold. It is **Unbounded** once the QEC rate saturates at one event
//! per step for the debounce window or `p_err` reaches `p_th`; the start of that
//! condition is the failure time τ. Anything else when the budget runs out is
//! **Indeterminate**.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{
    self, Dynamics, HaltReason, LatticeState, RunBudget, RunawayCause, RunawayDetector, Sample,
    TrajectoryRecord,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectionSettings {
    pub sampling_stride: u64,
    /// Trailing window, in samples, examined by the plateau test.
    pub plateau_window: usize,
    pub plateau_rel_tol: f64,
    pub balance_tol: f64,
    /// Consecutive saturated steps before runaway is declared.
    pub debounce_steps: u64,
}

impl Default for DetectionSettings {
    fn default() -> Self {
        Self {
            sampling_stride: 1000,
            plateau_window: 10_000,
            plateau_rel_tol: 1e-6,
            balance_tol: 1e-3,
            debounce_steps: 100,
        }
    }
}

impl DetectionSettings {
    pub fn validate(&self) -> Result<()> {
        if self.sampling_stride == 0 {
            return Err(Error::invalid("numerics.sampling_stride", "must be >= 1"));
        }
        if self.plateau_window < 2 {
            return Err(Error::invalid("numerics.plateau_window", "must be >= 2 samples"));
        }
        if !(self.plateau_rel_tol > 0.0) || !(self.balance_tol > 0.0 && self.balance_tol < 1.0) {
            return Err(Error::invalid(
                "numerics.plateau_rel_tol",
                "plateau tolerance must be > 0 and balance tolerance in (0, 1)",
            ));
        }
        if self.debounce_steps == 0 {
            return Err(Error::invalid("numerics.debounce_steps", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuasiSettings {
    /// QEC events per slope-estimation group.
    pub events_per_group: u32,
    /// Groups tried per burst before falling back to plain stepping.
    pub max_groups: u32,
    /// Relative agreement required between consecutive group slopes.
    pub slope_tol: f64,
    /// Step cap for one group when events are rare.
    pub max_group_steps: u64,
    #[serde(deserialize_with = "crate::units::time")]
    pub initial_interval: f64,
    #[serde(deserialize_with = "crate::units::time")]
    pub min_interval: f64,
    #[serde(deserialize_with = "crate::units::time")]
    pub max_interval: f64,
    /// Largest relative qubit-temperature rise allowed per extrapolation.
    pub max_rel_rise: f64,
}

impl Default for QuasiSettings {
    fn default() -> Self {
        Self {
            events_per_group: 100,
            max_groups: 24,
            slope_tol: 0.05,
            max_group_steps: 5_000_000,
            initial_interval: 1e-6,
            min_interval: 1e-9,
            max_interval: 1.0,
            max_rel_rise: 0.002,
        }
    }
}

impl QuasiSettings {
    pub fn validate(&self) -> Result<()> {
        if self.events_per_group < 3 || self.max_groups < 2 || self.max_group_steps == 0 {
            return Err(Error::invalid(
                "numerics.quasi",
                "need events_per_group >= 3, max_groups >= 2, max_group_steps >= 1",
            ));
        }
        if !(self.slope_tol > 0.0 && self.max_rel_rise > 0.0) {
            return Err(Error::invalid("numerics.quasi", "tolerances must be > 0"));
        }
        if !(self.min_interval > 0.0
            && self.min_interval <= self.initial_interval
            && self.initial_interval <= self.max_interval)
        {
            return Err(Error::invalid(
                "numerics.quasi",
                "need 0 < min_interval <= initial_interval <= max_interval",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "phase", rename_all = "snake_case")]
pub enum Phase {
    Bounded { steady_temp: f64 },
    Unbounded { tau: f64 },
    Indeterminate { steps: u64, time: f64 },
}

impl Phase {
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Bounded { .. } => "bounded",
            Phase::Unbounded { .. } => "unbounded",
            Phase::Indeterminate { .. } => "indeterminate",
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            Phase::Unbounded { tau } => Some(*tau),
            _ => None,
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Phase::Bounded { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Qubit-site drift over the last examined window (K/s).
    pub plateau_slope: f64,
    pub final_p_err: f64,
    pub final_qubit_temp: f64,
    pub halt_reason: HaltReason,
    pub runaway_cause: Option<RunawayCause>,
    /// Removed / deposited heat over the last examined window.
    pub balance_ratio: Option<f64>,
    pub exact_steps: u64,
    pub qec_events: u64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseOutcome {
    #[serde(flatten)]
    pub phase: Phase,
    pub diagnostics: Diagnostics,
}

/// Window-mean qubit temperature if the trailing `window` samples are flat to
/// within `rel_tol` and stay below threshold.
pub fn detect_plateau(samples: &[Sample], window: usize, rel_tol: f64, p_th: f64) -> Option<f64> {
    let (first, second) = plateau_halves(samples, window)?;
    let mean = 0.5 * (first + second);
    let tail = &samples[samples.len() - window..];
    let flat = (second - first).abs() <= rel_tol * mean;
    let below = tail.iter().all(|s| s.p_err < p_th);
    (flat && below).then_some(mean)
}

fn plateau_halves(samples: &[Sample], window: usize) -> Option<(f64, f64)> {
    if window < 2 || samples.len() < window {
        return None;
    }
    let tail = &samples[samples.len() - window..];
    let half = window / 2;
    let mean = |s: &[Sample]| s.iter().map(|x| x.t_qubit).sum::<f64>() / s.len() as f64;
    Some((mean(&tail[..half]), mean(&tail[half..])))
}

fn window_slope(samples: &[Sample], window: usize) -> f64 {
    let Some((first, second)) = plateau_halves(samples, window) else {
        return 0.0;
    };
    let tail = &samples[samples.len() - window..];
    let span = tail[tail.len() - 1].time - tail[0].time;
    if span > 0.0 {
        (second - first) / (0.5 * span)
    } else {
        0.0
    }
}

/// First time at which `f ≥ 1` holds for `debounce` consecutive samples, or
/// `p_err ≥ p_th` is reached, whichever comes first.
pub fn detect_tau(samples: &[Sample], debounce: usize, p_th: f64) -> Option<f64> {
    let debounce = debounce.max(1);
    let mut streak_start = None;
    let mut streak = 0;
    for s in samples {
        if s.f_rate >= 1.0 {
            if streak == 0 {
                streak_start = Some(s.time);
            }
            streak += 1;
            if streak >= debounce {
                return streak_start;
            }
        } else {
            streak = 0;
        }
        if s.p_err >= p_th {
            return Some(if streak > 0 { streak_start.unwrap_or(s.time) } else { s.time });
        }
    }
    None
}

/// Removed/deposited ratio between two snapshots; 1 when nothing was deposited.
fn balance_ratio(start: (f64, f64), state: &LatticeState) -> f64 {
    let deposited = state.heat_in - start.0;
    let removed = state.heat_out - start.1;
    if deposited > 0.0 {
        removed / deposited
    } else {
        1.0
    }
}

/// Exact-stepping classification.
pub fn classify_exact(
    state: &mut LatticeState,
    dynamics: &Dynamics,
    budget: RunBudget,
    settings: &DetectionSettings,
) -> Result<(PhaseOutcome, TrajectoryRecord)> {
    settings.validate()?;
    let start_steps = state.step_count;
    let mut since_check = 0usize;
    let mut snapshot = (state.heat_in, state.heat_out);
    let mut steady = None;
    let mut last_ratio = None;
    let mut last_slope = 0.0;
    let p_th = dynamics.policy.p_th;

    let out = lattice::run_with(
        state,
        dynamics,
        budget,
        settings.sampling_stride,
        settings.debounce_steps,
        |st, traj| {
            since_check += 1;
            if since_check < settings.plateau_window {
                return ControlFlow::Continue(());
            }
            since_check = 0;
            let ratio = balance_ratio(snapshot, st);
            snapshot = (st.heat_in, st.heat_out);
            last_ratio = Some(ratio);
            last_slope = window_slope(&traj.samples, settings.plateau_window);
            let plateau = detect_plateau(
                &traj.samples,
                settings.plateau_window,
                settings.plateau_rel_tol,
                p_th,
            );
            match plateau {
                Some(t) if ratio >= 1.0 - settings.balance_tol => {
                    steady = Some(t);
                    ControlFlow::Break(())
                }
                _ => ControlFlow::Continue(()),
            }
        },
    )?;

    let phase = match (out.halt, out.runaway, steady) {
        (_, Some(r), _) => Phase::Unbounded { tau: r.time },
        (HaltReason::Stopped, None, Some(t)) => Phase::Bounded { steady_temp: t },
        _ => Phase::Indeterminate {
            steps: state.step_count - start_steps,
            time: state.time,
        },
    };
    let halt = if phase.is_bounded() { HaltReason::Plateau } else { out.halt };
    let tq = state.qubit_temp();
    let outcome = PhaseOutcome {
        phase,
        diagnostics: Diagnostics {
            plateau_slope: last_slope,
            final_p_err: dynamics.p_err(tq),
            final_qubit_temp: tq,
            halt_reason: halt,
            runaway_cause: out.runaway.map(|r| r.cause),
            balance_ratio: last_ratio,
            exact_steps: state.step_count - start_steps,
            qec_events: state.qec_events_fired,
            warnings: Vec::new(),
        },
    };
    Ok((outcome, out.trajectory))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    Exact,
    Extrapolated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub t_start: f64,
    pub t_end: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiOutput {
    pub outcome: PhaseOutcome,
    pub trajectory: TrajectoryRecord,
    pub segments: Vec<Segment>,
}

/// One slope-estimation group: exact steps spanning a fixed number of QEC
/// events, with the qubit temperature strobed just before each deposit so the
/// deposit sawtooth does not alias into the slope.
#[derive(Debug, Clone, Copy)]
struct Group {
    slope: f64,
    duration: f64,
    mean_temp: f64,
    balance: f64,
}

enum GroupEnd {
    Done(Group),
    Runaway(lattice::Runaway),
    Budget,
}

struct QuasiRunner<'a> {
    dynamics: &'a Dynamics,
    budget: RunBudget,
    detection: &'a DetectionSettings,
    quasi: &'a QuasiSettings,
    detector: RunawayDetector,
    trajectory: TrajectoryRecord,
    exact_steps: u64,
    strobes: Vec<(f64, f64)>,
}

impl QuasiRunner<'_> {
    fn budget_left(&self, state: &LatticeState) -> bool {
        self.exact_steps < self.budget.max_steps && state.time < self.budget.max_time
    }

    fn run_group(&mut self, state: &mut LatticeState) -> Result<GroupEnd> {
        let stride = self.detection.sampling_stride;
        let t_start = state.time;
        let temp_start = state.qubit_temp();
        let snapshot = (state.heat_in, state.heat_out);
        let events_start = state.qec_events_fired;
        let wanted = self.quasi.events_per_group as u64;
        self.strobes.clear();
        let mut steps = 0u64;
        while state.qec_events_fired - events_start < wanted && steps < self.quasi.max_group_steps {
            if !self.budget_left(state) {
                return Ok(GroupEnd::Budget);
            }
            let (pre_time, pre_step) = (state.time, state.step_count);
            let fired_before = state.qec_events_fired;
            let report = state.step(self.dynamics)?;
            steps += 1;
            self.exact_steps += 1;
            if state.qec_events_fired > fired_before {
                self.strobes.push((pre_time, report.qubit_temp));
            }
            if let Some(r) = self.detector.observe(&report, pre_time, pre_step, state, self.dynamics) {
                self.trajectory.push(Sample::capture(state, self.dynamics));
                return Ok(GroupEnd::Runaway(r));
            }
            if state.step_count.is_multiple_of(stride) {
                self.trajectory.push(Sample::capture(state, self.dynamics));
            }
        }
        let duration = state.time - t_start;
        let (slope, mean_temp) = if self.strobes.len() >= 3 {
            least_squares(&self.strobes)
        } else {
            let temp_end = state.qubit_temp();
            let slope = if duration > 0.0 { (temp_end - temp_start) / duration } else { 0.0 };
            (slope, 0.5 * (temp_start + temp_end))
        };
        Ok(GroupEnd::Done(Group {
            slope,
            duration,
            mean_temp,
            balance: balance_ratio(snapshot, state),
        }))
    }
}

/// Slope and mean ordinate of an ordinary least-squares line through `pts`.
fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &(x, y) in pts {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my)
}

/// Alternates exact bursts with uniform linear extrapolation of the field.
///
/// Each burst steps exactly until two consecutive group slopes agree within
/// `slope_tol`; the field is then shifted by `slope × interval`, where the
/// interval adapts to how much the slope moved since the last extrapolation
/// and is capped so the qubit temperature rises by at most `max_rel_rise`.
pub fn quasilinear_run(
    state: &mut LatticeState,
    dynamics: &Dynamics,
    budget: RunBudget,
    detection: &DetectionSettings,
    quasi: &QuasiSettings,
) -> Result<QuasiOutput> {
    budget.validate()?;
    detection.validate()?;
    quasi.validate()?;
    let mut runner = QuasiRunner {
        dynamics,
        budget,
        detection,
        quasi,
        detector: RunawayDetector::new(detection.debounce_steps),
        trajectory: TrajectoryRecord::new(detection.sampling_stride),
        exact_steps: 0,
        strobes: Vec::new(),
    };
    runner.trajectory.push(Sample::capture(state, dynamics));
    let mut segments = Vec::new();
    let mut warnings = Vec::new();
    let mut interval = quasi.initial_interval;
    let mut prev_slope: Option<f64> = None;
    let mut last_group: Option<Group> = None;
    let p_th = dynamics.policy.p_th;

    let (phase, halt, cause) = 'outer: loop {
        let seg_start = state.time;
        let mut stable = None;
        let mut prev_group: Option<Group> = None;
        for _ in 0..quasi.max_groups {
            let group = match runner.run_group(state)? {
                GroupEnd::Done(g) => g,
                GroupEnd::Runaway(r) => {
                    segments.push(exact_segment(seg_start, state.time));
                    break 'outer (Phase::Unbounded { tau: r.time }, HaltReason::Runaway, Some(r.cause));
                }
                GroupEnd::Budget => {
                    segments.push(exact_segment(seg_start, state.time));
                    break 'outer (indeterminate(&runner, state), HaltReason::Budget, None);
                }
            };
            last_group = Some(group);
            let flat = (group.slope * group.duration).abs() <= detection.plateau_rel_tol * group.mean_temp;
            if flat
                && group.balance >= 1.0 - detection.balance_tol
                && dynamics.p_err(group.mean_temp) < p_th
            {
                segments.push(exact_segment(seg_start, state.time));
                break 'outer (
                    Phase::Bounded { steady_temp: group.mean_temp },
                    HaltReason::Plateau,
                    None,
                );
            }
            if let Some(prev) = prev_group {
                let scale = group.slope.abs().max(prev.slope.abs());
                if (group.slope - prev.slope).abs() <= quasi.slope_tol * scale {
                    stable = Some(group.slope);
                    break;
                }
            }
            prev_group = Some(group);
        }
        segments.push(exact_segment(seg_start, state.time));
        runner.trajectory.push(Sample::capture(state, dynamics));

        let Some(slope) = stable else {
            warnings.push(format!(
                "slope did not stabilize within {} groups at t = {:e} s; continued exact stepping",
                quasi.max_groups, state.time
            ));
            continue;
        };
        if let Some(prev) = prev_slope {
            let change = (slope - prev).abs();
            if slope.signum() != prev.signum() || change > 0.5 * prev.abs() {
                interval = (interval * 0.5).max(quasi.min_interval);
            } else if change < 0.1 * prev.abs() {
                interval = (interval * 2.0).min(quasi.max_interval);
            }
        }
        prev_slope = Some(slope);

        let remaining = budget.max_time - state.time;
        if remaining <= 0.0 {
            break (indeterminate(&runner, state), HaltReason::Budget, None);
        }
        let mut elapsed = interval.min(remaining);
        if slope != 0.0 {
            elapsed = elapsed.min(quasi.max_rel_rise * state.qubit_temp() / slope.abs());
        }
        let floor = dynamics.base_temp - state.temps.iter().copied().fold(f64::INFINITY, f64::min);
        let shift = (slope * elapsed).max(floor.min(0.0));
        let t0 = state.time;
        state.shift_uniform(shift, elapsed);
        segments.push(Segment {
            kind: SegmentKind::Extrapolated,
            t_start: t0,
            t_end: state.time,
        });
        let mut sample = Sample::capture(state, dynamics);
        sample.extrapolated = true;
        runner.trajectory.push(sample);
        runner.detector.reset();
        if state.time >= budget.max_time {
            break (indeterminate(&runner, state), HaltReason::Budget, None);
        }
    };

    let tq = state.qubit_temp();
    let outcome = PhaseOutcome {
        phase,
        diagnostics: Diagnostics {
            plateau_slope: last_group.map_or(0.0, |g| g.slope),
            final_p_err: dynamics.p_err(tq),
            final_qubit_temp: tq,
            halt_reason: halt,
            runaway_cause: cause,
            balance_ratio: last_group.map(|g| g.balance),
            exact_steps: runner.exact_steps,
            qec_events: state.qec_events_fired,
            warnings,
        },
    };
    Ok(QuasiOutput {
        outcome,
        trajectory: runner.trajectory,
        segments,
    })
}

fn exact_segment(t_start: f64, t_end: f64) -> Segment {
    Segment {
        kind: SegmentKind::Exact,
        t_start,
        t_end,
    }
}

fn indeterminate(runner: &QuasiRunner<'_>, state: &LatticeState) -> Phase {
    Phase::Indeterminate {
        steps: runner.exact_steps,
        time: state.time,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub gamma: f64,
    pub phase: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalGamma {
    pub gamma_c: f64,
    /// Width of the final bracket.
    pub uncertainty: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    pub probes: Vec<Probe>,
    pub audit: Vec<String>,
}

/// Bisects the cooling coefficient between an unbounded `lo` and a bounded `hi`.
///
/// Indeterminate probes are treated as bounded (the bracket's upper end moves
/// down) and noted in the audit trail.
pub fn find_gamma_c<F>(mut classify: F, lo: f64, hi: f64, iters: u32) -> Result<CriticalGamma>
where
    F: FnMut(f64) -> Result<PhaseOutcome>,
{
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::InvalidBracket(format!(
            "need 0 <= lo < hi, got [{lo:e}, {hi:e}]"
        )));
    }
    let mut probes = Vec::new();
    let mut audit = Vec::new();
    let (mut lo, mut hi) = (lo, hi);
    let converged = |lo: f64, hi: f64| {
        let mid = 0.5 * (lo + hi);
        mid <= lo || mid >= hi
    };
    if !converged(lo, hi) {
        let low = classify(lo)?;
        probes.push(Probe { gamma: lo, phase: low.phase.label().into() });
        if !matches!(low.phase, Phase::Unbounded { .. }) {
            return Err(Error::InvalidBracket(format!(
                "lower end γ = {lo:e} K² classified {}, expected unbounded; lower the bracket",
                low.phase.label()
            )));
        }
        let high = classify(hi)?;
        probes.push(Probe { gamma: hi, phase: high.phase.label().into() });
        if !high.phase.is_bounded() {
            return Err(Error::InvalidBracket(format!(
                "upper end γ = {hi:e} K² classified {}, expected bounded; raise the bracket",
                high.phase.label()
            )));
        }
    }
    let mut iterations = 0;
    while iterations < iters && !converged(lo, hi) {
        let mid = 0.5 * (lo + hi);
        let outcome = classify(mid)?;
        probes.push(Probe { gamma: mid, phase: outcome.phase.label().into() });
        match outcome.phase {
            Phase::Unbounded { .. } => lo = mid,
            Phase::Bounded { .. } => hi = mid,
            Phase::Indeterminate { .. } => {
                audit.push(format!("γ = {mid:e} K² indeterminate; treated as bounded"));
                hi = mid;
            }
        }
        iterations += 1;
    }
    Ok(CriticalGamma {
        gamma_c: 0.5 * (lo + hi),
        uncertainty: hi - lo,
        bracket: (lo, hi),
        iterations,
        probes,
        audit,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalFit {
    pub gamma_c: f64,
    pub zeta: f64,
    pub fit_stderr: f64,
    /// ln-prefactor of 1/τ = C·(γ_c − γ)^ζ.
    pub intercept: f64,
    /// (γ, 1/τ) pairs that entered the fit.
    pub points: Vec<(f64, f64)>,
}

pub const MIN_FIT_POINTS: usize = 5;

/// Least-squares slope of ln(1/τ) against ln(γ_c − γ).
///
/// Points with `γ ≥ γ_c − exclusion` or `1/τ ≤ 0` are dropped.
pub fn fit_zeta(points: &[(f64, f64)], gamma_c: f64, exclusion: f64) -> Result<CriticalFit> {
    let used: Vec<(f64, f64)> = points
        .iter()
        .copied()
        .filter(|&(g, inv_tau)| g < gamma_c - exclusion.max(0.0) && inv_tau > 0.0 && inv_tau.is_finite())
        .collect();
    if used.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientPoints {
            needed: MIN_FIT_POINTS,
            got: used.len(),
        });
    }
    let xy: Vec<(f64, f64)> = used.iter().map(|&(g, r)| ((gamma_c - g).ln(), r.ln())).collect();
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::invalid("points", "all γ values coincide"));
    }
    let zeta = sxy / sxx;
    let intercept = my - zeta * mx;
    let rss: f64 = xy.iter().map(|p| (p.1 - intercept - zeta * p.0).powi(2)).sum();
    let fit_stderr = (rss / (n - 2.0) / sxx).sqrt();
    Ok(CriticalFit {
        gamma_c,
        zeta,
        fit_stderr,
        intercept,
        points: used,
    })
}
