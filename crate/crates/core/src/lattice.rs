//! Explicit temperature map on a 1D lattice.
//!
//! Site 0 hosts the qubits and receives the QEC heat deposits; site `L−1` is
//! in contact with the refrigerator. Both ends are closed (one neighbour each),
//! so the fridge coupling is the only heat sink.

use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::coefficients::Coefficients;
use crate::error::{Error, Result};
use crate::thermo::{ErrorModel, QecPolicy};

/// Everything the stepper needs besides the temperature field.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub alpha: f64,
    pub gamma: f64,
    pub delta: f64,
    pub base_temp: f64,
    pub fridge_neighbors: f64,
    pub time_step: f64,
    pub error_model: ErrorModel,
    pub policy: QecPolicy,
}

impl Dynamics {
    pub fn new(
        coeffs: &Coefficients,
        base_temp: f64,
        fridge_neighbors: u32,
        time_step: f64,
        error_model: ErrorModel,
        policy: QecPolicy,
    ) -> Self {
        Self {
            alpha: coeffs.alpha,
            gamma: coeffs.gamma,
            delta: coeffs.delta,
            base_temp,
            fridge_neighbors: fridge_neighbors as f64,
            time_step,
            error_model,
            policy,
        }
    }

    /// QEC events per step demanded at temperature `temp` (uncapped).
    pub fn qec_rate(&self, temp: f64) -> f64 {
        self.policy.frequency_at(&self.error_model, temp)
    }

    pub fn p_err(&self, temp: f64) -> f64 {
        self.error_model.p_err(temp)
    }

    pub fn above_threshold(&self, temp: f64) -> bool {
        self.p_err(temp) >= self.policy.p_th
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeState {
    pub temps: Vec<f64>,
    pub time: f64,
    pub step_count: u64,
    /// Fractional QEC events pending.
    pub qec_accumulator: f64,
    pub qec_events_fired: u64,
    /// Cumulative temperature added by actual deposits (K).
    pub heat_in: f64,
    /// Cumulative temperature removed at the fridge site (K).
    pub heat_out: f64,
    #[serde(skip)]
    scratch: Vec<f64>,
}

/// What happened during a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    /// Uncapped QEC rate evaluated at the pre-step qubit temperature.
    pub rate: f64,
    /// Qubit temperature the deposit (if any) was computed from.
    pub qubit_temp: f64,
    pub deposited: f64,
}

impl LatticeState {
    pub fn new(num_sites: usize, base_temp: f64) -> Result<Self> {
        if num_sites < 2 {
            return Err(Error::invalid(
                "physical.num_sites",
                format!("lattice needs at least 2 sites, got {num_sites}"),
            ));
        }
        if !(base_temp > 0.0 && base_temp.is_finite()) {
            return Err(Error::invalid("physical.base_temp", "must be finite and > 0"));
        }
        Ok(Self::from_temps(vec![base_temp; num_sites]))
    }

    pub fn from_temps(temps: Vec<f64>) -> Self {
        let n = temps.len();
        Self {
            temps,
            time: 0.0,
            step_count: 0,
            qec_accumulator: 0.0,
            qec_events_fired: 0,
            heat_in: 0.0,
            heat_out: 0.0,
            scratch: Vec::with_capacity(n),
        }
    }

    pub fn qubit_temp(&self) -> f64 {
        self.temps[0]
    }

    pub fn fridge_temp(&self) -> f64 {
        self.temps[self.temps.len() - 1]
    }

    pub fn mean_temp(&self) -> f64 {
        self.temps.iter().sum::<f64>() / self.temps.len() as f64
    }

    /// Advances the field by one time step.
    ///
    /// Heating, diffusion and cooling all read the pre-step field. At most one
    /// QEC event fires per step; the rate fed to the accumulator is capped at 1.
    pub fn step(&mut self, dynamics: &Dynamics) -> Result<StepReport> {
        let n = self.temps.len();
        let t_qubit = self.temps[0];
        let t_fridge = self.temps[n - 1];

        let rate = dynamics.qec_rate(t_qubit);
        let capped = rate.min(1.0);
        let per_event = dynamics.alpha / (t_qubit * t_qubit);
        self.qec_accumulator += capped;
        let deposited = if self.qec_accumulator >= 1.0 {
            self.qec_accumulator -= 1.0;
            self.qec_events_fired += 1;
            per_event
        } else {
            0.0
        };

        let d = dynamics.delta;
        let base_sq = dynamics.base_temp * dynamics.base_temp;
        let cooling = dynamics.gamma / (t_fridge * t_fridge * t_fridge)
            * dynamics.fridge_neighbors
            * (base_sq - t_fridge * t_fridge);

        let t = &self.temps;
        self.scratch.resize(n, 0.0);
        let next = &mut self.scratch[..n];
        next[0] = t[0] + d * (t[1] - t[0]) + deposited;
        let (left, mid, right) = (&t[..n - 2], &t[1..n - 1], &t[2..]);
        for (out, ((l, m), r)) in next[1..n - 1].iter_mut().zip(left.iter().zip(mid).zip(right)) {
            *out = m + d * (l + r - 2.0 * m);
        }
        next[n - 1] = t[n - 1] + d * (t[n - 2] - t[n - 1]) + cooling;

        self.step_count += 1;
        // for δ ≤ 1/2 every update is a convex combination of finite positive
        // values plus the two source terms, so only the end sites need checking
        let ends_ok = |v: f64| v.is_finite() && v > 0.0;
        let suspect = !ends_ok(next[0])
            || !ends_ok(next[n - 1])
            || (d > 0.5 && next.iter().any(|v| !ends_ok(*v)));
        if suspect {
            let site = next
                .iter()
                .position(|v| !(v.is_finite() && *v > 0.0))
                .unwrap_or(n - 1);
            return Err(Error::NumericalInstability {
                site,
                step: self.step_count,
                value: next[site],
            });
        }
        std::mem::swap(&mut self.temps, &mut self.scratch);
        self.time += dynamics.time_step;
        self.heat_in += deposited;
        self.heat_out -= cooling;

        Ok(StepReport {
            rate,
            qubit_temp: t_qubit,
            deposited,
        })
    }

    /// Adds `shift` kelvin to every site and advances the clock by `elapsed`
    /// seconds without stepping.
    pub fn shift_uniform(&mut self, shift: f64, elapsed: f64) {
        for t in &mut self.temps {
            *t += shift;
        }
        self.time += elapsed;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub time: f64,
    pub t_qubit: f64,
    pub t_fridge: f64,
    pub t_mean: f64,
    pub p_err: f64,
    pub f_rate: f64,
    /// True when the sample follows a linear extrapolation rather than stepping.
    #[serde(default)]
    pub extrapolated: bool,
}

impl Sample {
    pub fn capture(state: &LatticeState, dynamics: &Dynamics) -> Self {
        let tq = state.qubit_temp();
        Self {
            time: state.time,
            t_qubit: tq,
            t_fridge: state.fridge_temp(),
            t_mean: state.mean_temp(),
            p_err: dynamics.p_err(tq),
            f_rate: dynamics.qec_rate(tq),
            extrapolated: false,
        }
    }
}

pub const TRAJECTORY_CSV_HEADER: &str = "time_s,T_qubit_K,T_fridge_K,T_mean_K,p_err,f_rate";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub samples: Vec<Sample>,
    pub sampling_stride: u64,
}

impl TrajectoryRecord {
    pub fn new(sampling_stride: u64) -> Self {
        Self {
            samples: Vec::new(),
            sampling_stride: sampling_stride.max(1),
        }
    }

    /// Appends a sample unless it would not advance the clock.
    pub fn push(&mut self, sample: Sample) {
        if self.samples.last().is_some_and(|s| s.time >= sample.time) {
            return;
        }
        self.samples.push(sample);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.samples.len() + 1));
        out.push_str(TRAJECTORY_CSV_HEADER);
        out.push('\n');
        for s in &self.samples {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e},{:e}\n",
                s.time, s.t_qubit, s.t_fridge, s.t_mean, s.p_err, s.f_rate
            ));
        }
        out
    }

    /// Qubit temperature at `time`, linearly interpolated between samples.
    pub fn qubit_temp_at(&self, time: f64) -> Option<f64> {
        let idx = self.samples.partition_point(|s| s.time < time);
        let hi = self.samples.get(idx)?;
        if hi.time == time || idx == 0 {
            return (hi.time == time).then_some(hi.t_qubit);
        }
        let lo = &self.samples[idx - 1];
        let w = (time - lo.time) / (hi.time - lo.time);
        Some(lo.t_qubit + w * (hi.t_qubit - lo.t_qubit))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunBudget {
    pub max_steps: u64,
    /// Simulated seconds.
    pub max_time: f64,
}

impl RunBudget {
    pub fn steps(max_steps: u64) -> Self {
        Self {
            max_steps,
            max_time: f64::INFINITY,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 || !(self.max_time > 0.0) {
            return Err(Error::invalid("numerics.budget", "step and time budgets must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunawayCause {
    /// f stayed at or above one event per step for the debounce window.
    FrequencySaturated,
    /// The qubit-site error probability reached p_th.
    ThresholdCrossed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Runaway {
    pub cause: RunawayCause,
    /// Time the runaway condition began (the failure time τ).
    pub time: f64,
    pub step: u64,
}

/// Tracks the saturated-frequency streak and threshold crossings.
#[derive(Debug, Clone, PartialEq)]
pub struct RunawayDetector {
    pub debounce_steps: u64,
    streak: u64,
    streak_start: (f64, u64),
}

impl RunawayDetector {
    pub fn new(debounce_steps: u64) -> Self {
        Self {
            debounce_steps: debounce_steps.max(1),
            streak: 0,
            streak_start: (0.0, 0),
        }
    }

    /// Feed one completed step; `pre_time`/`pre_step` are the clock before it.
    pub fn observe(
        &mut self,
        report: &StepReport,
        pre_time: f64,
        pre_step: u64,
        state: &LatticeState,
        dynamics: &Dynamics,
    ) -> Option<Runaway> {
        if report.rate >= 1.0 {
            if self.streak == 0 {
                self.streak_start = (pre_time, pre_step);
            }
            self.streak += 1;
        } else {
            self.streak = 0;
        }
        if self.streak >= self.debounce_steps {
            return Some(Runaway {
                cause: RunawayCause::FrequencySaturated,
                time: self.streak_start.0,
                step: self.streak_start.1,
            });
        }
        if dynamics.above_threshold(state.qubit_temp()) {
            let (time, step) = if self.streak > 0 {
                self.streak_start
            } else {
                (state.time, state.step_count)
            };
            return Some(Runaway {
                cause: RunawayCause::ThresholdCrossed,
                time,
                step,
            });
        }
        None
    }

    pub fn reset(&mut self) {
        self.streak = 0;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HaltReason {
    Budget,
    Runaway,
    Plateau,
    Stopped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub trajectory: TrajectoryRecord,
    pub halt: HaltReason,
    pub runaway: Option<Runaway>,
}

impl RunOutput {
    pub fn runaway_flag(&self) -> bool {
        self.runaway.is_some()
    }
}

/// Steps until the budget is spent or runaway is detected.
pub fn run(
    state: &mut LatticeState,
    dynamics: &Dynamics,
    budget: RunBudget,
    sampling_stride: u64,
    debounce_steps: u64,
) -> Result<RunOutput> {
    run_with(state, dynamics, budget, sampling_stride, debounce_steps, |_, _| {
        ControlFlow::Continue(())
    })
}

/// Like [`run`], calling `on_sample` after every recorded sample. Returning
/// `Break` stops the run with [`HaltReason::Stopped`].
pub fn run_with<F>(
    state: &mut LatticeState,
    dynamics: &Dynamics,
    budget: RunBudget,
    sampling_stride: u64,
    debounce_steps: u64,
    mut on_sample: F,
) -> Result<RunOutput>
where
    F: FnMut(&LatticeState, &TrajectoryRecord) -> ControlFlow<()>,
{
    budget.validate()?;
    let stride = sampling_stride.max(1);
    let mut trajectory = TrajectoryRecord::new(stride);
    trajectory.push(Sample::capture(state, dynamics));
    let mut detector = RunawayDetector::new(debounce_steps);
    let mut taken = 0u64;
    while taken < budget.max_steps && state.time < budget.max_time {
        let (pre_time, pre_step) = (state.time, state.step_count);
        let report = state.step(dynamics)?;
        taken += 1;
        if let Some(runaway) = detector.observe(&report, pre_time, pre_step, state, dynamics) {
            trajectory.push(Sample::capture(state, dynamics));
            return Ok(RunOutput {
                trajectory,
                halt: HaltReason::Runaway,
                runaway: Some(runaway),
            });
        }
        if taken.is_multiple_of(stride) {
            trajectory.push(Sample::capture(state, dynamics));
            if on_sample(state, &trajectory).is_break() {
                return Ok(RunOutput {
                    trajectory,
                    halt: HaltReason::Stopped,
                    runaway: None,
                });
            }
        }
    }
    trajectory.push(Sample::capture(state, dynamics));
    Ok(RunOutput {
        trajectory,
        halt: HaltReason::Budget,
        runaway: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dynamics(alpha: f64, gamma: f64, delta: f64) -> Dynamics {
        Dynamics {
            alpha,
            gamma,
            delta,
            base_temp: 0.01,
            fridge_neighbors: 1.0,
            time_step: 0.526e-12,
            error_model: ErrorModel::default(),
            policy: QecPolicy::default(),
        }
    }

    #[test]
    fn init_state() {
        let s = LatticeState::new(50, 0.01).unwrap();
        assert_eq!(s.temps, vec![0.01; 50]);
        assert_eq!(s.time, 0.0);
        assert_eq!(s.qec_accumulator, 0.0);
        assert!(LatticeState::new(2, 0.01).is_ok());
        assert!(LatticeState::new(1, 0.01).is_err());
        assert!(LatticeState::new(5, 0.0).is_err());
    }

    #[test]
    fn uniform_field_without_sources_is_fixed() {
        let mut s = LatticeState::new(10, 0.01).unwrap();
        let d = dynamics(0.0, 0.0, 0.4);
        for _ in 0..100 {
            s.step(&d).unwrap();
        }
        assert!(s.temps.iter().all(|&t| t == 0.01));
    }

    #[test]
    fn three_site_laplacian() {
        let mut s = LatticeState::from_temps(vec![0.02, 0.01, 0.01]);
        let d = dynamics(0.0, 0.0, 0.25);
        s.step(&d).unwrap();
        let expected = [0.0175, 0.0125, 0.01];
        for (got, want) in s.temps.iter().zip(expected) {
            assert!((got - want).abs() < 1e-15, "{got} vs {want}");
        }
    }

    #[test]
    fn cooling_vanishes_at_base() {
        let mut s = LatticeState::new(4, 0.01).unwrap();
        let d = dynamics(0.0, 1e-7, 0.3);
        s.step(&d).unwrap();
        assert_eq!(s.fridge_temp(), 0.01);
        assert_eq!(s.heat_out, 0.0);
    }

    #[test]
    fn cooling_pulls_fridge_site_down() {
        let mut s = LatticeState::from_temps(vec![0.02, 0.02]);
        let d = dynamics(0.0, 1e-8, 0.0);
        s.step(&d).unwrap();
        let expected = 0.02 + 1e-8 / 0.02f64.powi(3) * (1e-4 - 4e-4);
        assert!((s.fridge_temp() - expected).abs() < 1e-16);
        assert_eq!(s.qubit_temp(), 0.02);
    }

    #[test]
    fn accumulator_fires_single_events() {
        // f = 1 exactly when p_f = 1/2
        let mut d = dynamics(1e-9, 0.0, 0.0);
        d.policy.c_f = 1.0;
        let temp = 0.1 * 0.5f64.powf(2.0 / 27.0);
        let mut s = LatticeState::from_temps(vec![temp, temp]);
        let r = s.step(&d).unwrap();
        assert!((r.rate - 1.0).abs() < 1e-9);
        assert!(s.qec_events_fired <= 1);
    }

    #[test]
    fn accumulator_rate_matches_frequency() {
        let d = dynamics(0.0, 0.0, 0.5);
        let mut s = LatticeState::new(5, 0.05).unwrap();
        let f = d.qec_rate(0.05);
        let n = 200_000;
        for _ in 0..n {
            s.step(&d).unwrap();
        }
        let expected = f * n as f64;
        assert!((s.qec_events_fired as f64 - expected).abs() <= 1.0, "{} vs {expected}", s.qec_events_fired);
    }

    #[test]
    fn heating_lands_on_qubit_site() {
        // huge rate: odds saturate so an event fires on the first step
        let mut d = dynamics(1e-9, 0.0, 0.0);
        d.policy.c_f = 1.0;
        let mut s = LatticeState::from_temps(vec![0.099, 0.01]);
        s.step(&d).unwrap();
        assert_eq!(s.qec_events_fired, 1);
        assert!((s.temps[0] - (0.099 + 1e-9 / (0.099 * 0.099))).abs() < 1e-15);
        assert_eq!(s.temps[1], 0.01);
    }

    #[test]
    fn instability_is_reported() {
        let mut s = LatticeState::from_temps(vec![0.02, 0.01, 0.01]);
        // strongly overdriven cooling drives the fridge site negative
        let d = dynamics(0.0, 1.0, 0.1);
        s.temps[2] = 0.02;
        let err = s.step(&d).unwrap_err();
        match err {
            Error::NumericalInstability { site, step, .. } => {
                assert_eq!(site, 2);
                assert_eq!(step, 1);
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn no_heat_source_stays_at_base() {
        let mut s = LatticeState::new(20, 0.01).unwrap();
        let d = dynamics(0.0, 6.7e-13, 0.5);
        let out = run(&mut s, &d, RunBudget::steps(50_000), 1000, 100).unwrap();
        assert_eq!(out.halt, HaltReason::Budget);
        assert!(!out.runaway_flag());
        assert!(out.trajectory.samples.iter().all(|x| x.t_qubit == 0.01 && x.t_fridge == 0.01));
    }

    #[test]
    fn no_cooling_toy_runs_away() {
        let mut s = LatticeState::new(50, 0.01).unwrap();
        let d = dynamics(1e-6, 0.0, 0.5);
        let out = run(&mut s, &d, RunBudget::steps(50_000_000), 1000, 100).unwrap();
        assert_eq!(out.halt, HaltReason::Runaway);
        let r = out.runaway.unwrap();
        assert_eq!(r.cause, RunawayCause::FrequencySaturated);
        assert!(r.time > 0.0);
    }

    #[test]
    fn trajectory_csv_and_interpolation() {
        let mut t = TrajectoryRecord::new(10);
        for (i, temp) in [(0.0, 1.0), (1.0, 3.0)] {
            t.push(Sample {
                time: i,
                t_qubit: temp,
                t_fridge: 0.0,
                t_mean: 0.0,
                p_err: 0.0,
                f_rate: 0.0,
                extrapolated: false,
            });
        }
        assert_eq!(t.qubit_temp_at(0.5), Some(2.0));
        assert_eq!(t.qubit_temp_at(1.0), Some(3.0));
        assert_eq!(t.qubit_temp_at(2.0), None);
        let csv = t.to_csv();
        assert!(csv.starts_with("time_s,T_qubit_K,T_fridge_K,T_mean_K,p_err,f_rate\n"));
        assert_eq!(csv.lines().count(), 3);
    }
}
