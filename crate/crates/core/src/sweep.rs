//! Phase-diagram sweeps over (α, γ) at fixed δ, and γ scans for the
//! transition rate 1/τ.

use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::ops::ControlFlow;
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::phase::{Phase, PhaseOutcome};
use crate::sim;
use crate::units;

pub const GRID_CSV_HEADER: &str = "alpha,gamma,delta,phase,tau_s,steady_T_K";
const JOURNAL_TAG: &str = "qec-thermal-sweep";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    #[serde(deserialize_with = "units::number")]
    pub min: f64,
    #[serde(deserialize_with = "units::number")]
    pub max: f64,
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
}

impl Axis {
    pub fn single(value: f64) -> Self {
        Self {
            min: value,
            max: value,
            count: 1,
            spacing: Spacing::Linear,
        }
    }

    pub fn validate(&self, name: &str) -> Result<()> {
        if self.count == 0 {
            return Err(Error::invalid(name, "count must be >= 1"));
        }
        if !(self.min.is_finite() && self.max.is_finite() && self.min >= 0.0) {
            return Err(Error::invalid(name, "bounds must be finite and >= 0"));
        }
        // A single-point axis may pin min = max.
        if self.count > 1 && !(self.min < self.max) {
            return Err(Error::invalid(name, "need min < max"));
        }
        if self.count == 1 && self.min > self.max {
            return Err(Error::invalid(name, "need min <= max"));
        }
        if self.spacing == Spacing::Log && !(self.min > 0.0) {
            return Err(Error::invalid(name, "log spacing needs min > 0"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    return self.max;
                }
                let w = i as f64 / last;
                match self.spacing {
                    Spacing::Linear => self.min + w * (self.max - self.min),
                    Spacing::Log => (self.min.ln() + w * (self.max.ln() - self.min.ln())).exp(),
                }
            })
            .map(|v| v.clamp(self.min, self.max))
            .collect()
    }
}

/// Per-cell budget; unset fields fall back to the base config.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointBudget {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", deserialize_with = "units::opt_time")]
    pub max_time: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub alpha_axis: Axis,
    pub gamma_axis: Axis,
    #[serde(deserialize_with = "units::number")]
    pub delta: f64,
    #[serde(default)]
    pub per_point_budget: PointBudget,
    #[serde(default)]
    pub base: SimConfig,
}

impl SweepSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::Config {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        let spec: SweepSpec = serde_path_to_error::deserialize(de).map_err(|e| Error::Config {
            path: e.path().to_string(),
            message: e.inner().to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.alpha_axis.validate("alpha_axis")?;
        self.gamma_axis.validate("gamma_axis")?;
        self.base.validate()?;
        self.cell_config(0.0, 0.0).validate()
    }

    pub fn cell_count(&self) -> usize {
        self.alpha_axis.count * self.gamma_axis.count
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&json).iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    pub fn cell_config(&self, alpha: f64, gamma: f64) -> SimConfig {
        let mut cfg = sim::with_coefficients(&self.base, alpha, gamma, self.delta);
        if let Some(n) = self.per_point_budget.max_steps {
            cfg.numerics.max_steps = n;
        }
        if let Some(t) = self.per_point_budget.max_time {
            cfg.numerics.max_time = t;
        }
        cfg
    }

    /// Classifies one cell; `index` is α-major (`i_alpha * n_gamma + i_gamma`).
    pub fn run_cell(&self, index: usize) -> Cell {
        let alphas = self.alpha_axis.values();
        let gammas = self.gamma_axis.values();
        let alpha = alphas[index / gammas.len()];
        let gamma = gammas[index % gammas.len()];
        match sim::classify(&self.cell_config(alpha, gamma)) {
            Ok(outcome) => Cell {
                index,
                alpha,
                gamma,
                outcome: Some(outcome),
                error: None,
            },
            Err(e) => Cell {
                index,
                alpha,
                gamma,
                outcome: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub index: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub outcome: Option<PhaseOutcome>,
    /// Set when the point failed numerically; the sweep carries on.
    pub error: Option<String>,
}

impl Cell {
    pub fn phase_label(&self) -> &'static str {
        self.outcome.as_ref().map_or("error", |o| o.phase.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMetadata {
    pub spec_hash: String,
    pub software_version: String,
    pub started_unix_s: u64,
    pub finished_unix_s: u64,
    pub cells_reused: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub alpha_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub delta: f64,
    /// Base temperature, kept for the display normalization.
    pub base_temp: f64,
    /// α-major, one per (α, γ) pair.
    pub cells: Vec<Cell>,
    #[serde(skip)]
    pub metadata: Option<GridMetadata>,
}

impl PhaseGrid {
    pub fn cell(&self, i_alpha: usize, i_gamma: usize) -> &Cell {
        &self.cells[i_alpha * self.gamma_values.len() + i_gamma]
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(GRID_CSV_HEADER);
        s.push('\n');
        for c in &self.cells {
            let (tau, steady) = match c.outcome.as_ref().map(|o| o.phase) {
                Some(Phase::Unbounded { tau }) => (format!("{tau:e}"), String::new()),
                Some(Phase::Bounded { steady_temp }) => (String::new(), format!("{steady_temp:e}")),
                _ => (String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{:e},{:e},{:e},{},{},{}",
                c.alpha,
                c.gamma,
                self.delta,
                c.phase_label(),
                tau,
                steady
            );
        }
        s
    }

    /// Gnuplot `nonuniform matrix` text. Axes are α/T₀³ (rows) and γ/T₀²
    /// (columns); entries are 1 bounded, -1 unbounded, 0 indeterminate, NaN
    /// for failed cells.
    pub fn to_gnuplot_matrix(&self) -> String {
        let t0 = self.base_temp;
        let mut s = String::new();
        let _ = writeln!(s, "# phase matrix at delta = {:e}", self.delta);
        let _ = writeln!(s, "# rows: alpha/T0^3, columns: gamma/T0^2, T0 = {t0:e} K");
        let _ = writeln!(s, "# 1 bounded, -1 unbounded, 0 indeterminate, nan error");
        let _ = writeln!(s, "# plot 'grid.mat' nonuniform matrix with image (log axes recommended)");
        let _ = write!(s, "{}", self.gamma_values.len());
        for g in &self.gamma_values {
            let _ = write!(s, " {:e}", g / (t0 * t0));
        }
        s.push('\n');
        for (ia, a) in self.alpha_values.iter().enumerate() {
            let _ = write!(s, "{:e}", a / (t0 * t0 * t0));
            for ig in 0..self.gamma_values.len() {
                let code = match self.cell(ia, ig).outcome.as_ref().map(|o| o.phase) {
                    Some(Phase::Bounded { .. }) => "1",
                    Some(Phase::Unbounded { .. }) => "-1",
                    Some(Phase::Indeterminate { .. }) => "0",
                    None => "nan",
                };
                let _ = write!(s, " {code}");
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone, Default)]
pub struct SweepOptions<'a> {
    pub workers: usize,
    /// Append-only NDJSON journal, one line per finished cell.
    pub journal: Option<&'a Path>,
    /// Reuse cells already in the journal.
    pub resume: bool,
    /// Stop claiming new cells after this many have been computed.
    pub max_new_cells: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct JournalHeader {
    journal: String,
    spec_hash: String,
}

fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs())
}

fn read_journal(path: &Path, spec_hash: &str, total: usize) -> Result<Vec<Option<Cell>>> {
    let mut cells = vec![None; total];
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(cells),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut lines = BufReader::new(file).lines();
    let Some(first) = lines.next() else {
        return Ok(cells);
    };
    let first = first.map_err(|e| Error::io(path, e))?;
    let header: JournalHeader = serde_json::from_str(&first).map_err(|e| Error::Config {
        path: path.display().to_string(),
        message: format!("not a sweep journal: {e}"),
    })?;
    if header.journal != JOURNAL_TAG || header.spec_hash != spec_hash {
        return Err(Error::Config {
            path: path.display().to_string(),
            message: "journal belongs to a different sweep spec".into(),
        });
    }
    for line in lines {
        let line = line.map_err(|e| Error::io(path, e))?;
        // A torn final line from an interrupted write is skipped.
        if let Ok(cell) = serde_json::from_str::<Cell>(&line) {
            if cell.index < total {
                let i = cell.index;
                cells[i] = Some(cell);
            }
        }
    }
    Ok(cells)
}

/// Runs `job(i)` for each `i` in `indices` on `workers` threads, handing
/// results to `sink` on the calling thread. The sink can stop new claims.
/// A single worker runs inline without spawning.
pub fn parallel_map<R, J, S>(indices: &[usize], workers: usize, job: J, mut sink: S)
where
    R: Send,
    J: Fn(usize) -> R + Sync,
    S: FnMut(usize, R) -> ControlFlow<()>,
{
    if workers <= 1 {
        for &i in indices {
            if sink(i, job(i)).is_break() {
                break;
            }
        }
        return;
    }
    let next = AtomicUsize::new(0);
    let stop = AtomicBool::new(false);
    let (tx, rx) = mpsc::channel();
    std::thread::scope(|scope| {
        for _ in 0..workers.min(indices.len().max(1)) {
            let tx = tx.clone();
            let (next, stop, job) = (&next, &stop, &job);
            scope.spawn(move || loop {
                if stop.load(Ordering::Relaxed) {
                    break;
                }
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&i) = indices.get(k) else { break };
                if tx.send((i, job(i))).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for (i, r) in rx {
            if sink(i, r).is_break() {
                stop.store(true, Ordering::Relaxed);
            }
        }
    });
}

pub fn run_sweep(spec: &SweepSpec, options: &SweepOptions) -> Result<PhaseGrid> {
    spec.validate()?;
    let started = unix_now();
    let hash = spec.hash();
    let total = spec.cell_count();
    let mut cells = match (options.resume, options.journal) {
        (true, Some(path)) => read_journal(path, &hash, total)?,
        _ => vec![None; total],
    };
    let reused = cells.iter().filter(|c| c.is_some()).count();
    let mut journal = match options.journal {
        Some(path) => {
            let fresh = !options.resume || reused == 0;
            let mut file = OpenOptions::new()
                .create(true)
                .write(true)
                .append(!fresh)
                .truncate(fresh)
                .open(path)
                .map_err(|e| Error::io(path, e))?;
            if fresh {
                let header = JournalHeader {
                    journal: JOURNAL_TAG.into(),
                    spec_hash: hash.clone(),
                };
                writeln!(file, "{}", serde_json::to_string(&header)?).map_err(|e| Error::io(path, e))?;
            }
            Some((path, file))
        }
        None => None,
    };

    let pending: Vec<usize> = (0..total).filter(|&i| cells[i].is_none()).collect();
    let mut computed = 0usize;
    let mut write_error = None;
    parallel_map(
        &pending,
        options.workers,
        |i| spec.run_cell(i),
        |i, cell| {
            if let Some((path, file)) = journal.as_mut() {
                let line = serde_json::to_string(&cell).expect("cell serializes");
                if let Err(e) = writeln!(file, "{line}").and_then(|_| file.flush()) {
                    write_error.get_or_insert(Error::io(path, e));
                    return ControlFlow::Break(());
                }
            }
            cells[i] = Some(cell);
            computed += 1;
            match options.max_new_cells {
                Some(limit) if computed >= limit => ControlFlow::Break(()),
                _ => ControlFlow::Continue(()),
            }
        },
    );
    if let Some(e) = write_error {
        return Err(e);
    }
    let done = cells.iter().filter(|c| c.is_some()).count();
    if done < total {
        return Err(Error::Interrupted { done, total });
    }
    Ok(PhaseGrid {
        alpha_values: spec.alpha_axis.values(),
        gamma_values: spec.gamma_axis.values(),
        delta: spec.delta,
        base_temp: spec.base.physical.base_temp,
        cells: cells.into_iter().map(|c| c.expect("all cells present")).collect(),
        metadata: Some(GridMetadata {
            spec_hash: hash,
            software_version: env!("CARGO_PKG_VERSION").into(),
            started_unix_s: started,
            finished_unix_s: unix_now(),
            cells_reused: reused,
        }),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub gamma: f64,
    pub phase: String,
    /// 1/τ in 1/s; 0 when bounded, absent when indeterminate.
    pub inv_tau: Option<f64>,
    pub indeterminate: bool,
}

/// Scans γ (ascending) and reports 1/τ, with `classify` supplying the phase.
pub fn scan_transition_with<F>(gammas: &[f64], workers: usize, classify: F) -> Result<Vec<TransitionPoint>>
where
    F: Fn(f64) -> Result<PhaseOutcome> + Sync,
{
    if gammas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::invalid("gamma_values", "must be strictly ascending"));
    }
    let indices: Vec<usize> = (0..gammas.len()).collect();
    let mut results: Vec<Option<Result<PhaseOutcome>>> = (0..gammas.len()).map(|_| None).collect();
    parallel_map(&indices, workers, |i| classify(gammas[i]), |i, r| {
        results[i] = Some(r);
        ControlFlow::Continue(())
    });
    gammas
        .iter()
        .zip(results)
        .map(|(&gamma, r)| {
            let outcome = r.expect("every point classified")?;
            let inv_tau = match outcome.phase {
                Phase::Bounded { .. } => Some(0.0),
                Phase::Unbounded { tau } => Some(1.0 / tau),
                Phase::Indeterminate { .. } => None,
            };
            Ok(TransitionPoint {
                gamma,
                phase: outcome.phase.label().into(),
                inv_tau,
                indeterminate: inv_tau.is_none(),
            })
        })
        .collect()
}

/// γ scan of `base` at fixed α and δ.
pub fn scan_transition(
    base: &SimConfig,
    alpha: f64,
    delta: f64,
    gammas: &[f64],
    workers: usize,
) -> Result<Vec<TransitionPoint>> {
    scan_transition_with(gammas, workers, |g| {
        sim::classify(&sim::with_coefficients(base, alpha, g, delta))
    })
}

/// Number of Unbounded→Bounded switches along an ascending scan, ignoring
/// indeterminate points, plus whether any Bounded→Unbounded switch occurs.
pub fn count_transitions(points: &[TransitionPoint]) -> (usize, bool) {
    let phases: Vec<bool> = points
        .iter()
        .filter(|p| !p.indeterminate)
        .map(|p| p.phase == "bounded")
        .collect();
    let up = phases.windows(2).filter(|w| !w[0] && w[1]).count();
    let reentrant = phases.windows(2).any(|w| w[0] && !w[1]);
    (up, reentrant)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::Diagnostics;
    use crate::lattice::HaltReason;

    fn stub(phase: Phase) -> PhaseOutcome {
        PhaseOutcome {
            phase,
            diagnostics: Diagnostics {
                plateau_slope: 0.0,
                final_p_err: 0.0,
                final_qubit_temp: 0.0,
                halt_reason: HaltReason::Budget,
                runaway_cause: None,
                balance_ratio: None,
                exact_steps: 0,
                qec_events: 0,
                warnings: vec![],
            },
        }
    }

    #[test]
    fn axis_values() {
        let log = Axis {
            min: 1e-8,
            max: 1e-5,
            count: 4,
            spacing: Spacing::Log,
        };
        let v = log.values();
        assert_eq!(v[0], 1e-8);
        assert_eq!(v[3], 1e-5);
        assert!((v[1] / 1e-7 - 1.0).abs() < 1e-12);
        assert_eq!(Axis::single(0.0).values(), vec![0.0]);
        assert!(Axis { spacing: Spacing::Log, ..Axis::single(0.0) }.validate("a").is_err());
        assert!(Axis { count: 3, ..Axis::single(1.0) }.validate("a").is_err());
    }

    #[test]
    fn stub_scan_passes_tau_through() {
        let gammas = [0.1, 0.2, 0.3, 0.4];
        let pts = scan_transition_with(&gammas, 2, |g| {
            Ok(stub(if g < 0.25 {
                Phase::Unbounded { tau: 1.0 / (0.25 - g) }
            } else if g < 0.35 {
                Phase::Indeterminate { steps: 1, time: 1.0 }
            } else {
                Phase::Bounded { steady_temp: 0.01 }
            }))
        })
        .unwrap();
        assert_eq!(pts[0].inv_tau, Some(0.25 - 0.1));
        assert_eq!(pts[1].inv_tau, Some(0.25 - 0.2));
        assert!(pts[2].indeterminate && pts[2].inv_tau.is_none());
        assert_eq!(pts[3].inv_tau, Some(0.0));
        assert_eq!(count_transitions(&pts), (1, false));
        assert!(scan_transition_with(&[0.2, 0.1], 1, |_| unreachable!()).is_err());
    }

    #[test]
    fn parallel_map_visits_every_index_once() {
        let idx: Vec<usize> = (0..100).collect();
        let mut seen = vec![0; 100];
        parallel_map(&idx, 4, |i| i * 2, |i, r| {
            assert_eq!(r, i * 2);
            seen[i] += 1;
            ControlFlow::Continue(())
        });
        assert!(seen.iter().all(|&n| n == 1));
    }
}
