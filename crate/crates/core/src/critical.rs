//! Critical cooling rate and exponent: bisect for γ_c, scan 1/τ below it,
//! fit 1/τ ∝ (γ_c − γ)^ζ.

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;
use crate::error::{Error, Result};
use crate::lattice::HaltReason;
use crate::phase::{fit_zeta, find_gamma_c, CriticalFit, CriticalGamma, Diagnostics, Phase, PhaseOutcome};
use crate::sim;
use crate::sweep::{scan_transition_with, TransitionPoint};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalSettings {
    pub bracket: (f64, f64),
    pub iters: u32,
    /// Scan points sit at γ_c·(1 − ε) with ε log-spaced over this range.
    pub eps_range: (f64, f64),
    pub points: usize,
    /// Points within this many final bracket widths of γ_c are left out of
    /// the fit.
    pub exclusion_widths: f64,
    pub workers: usize,
}

impl Default for CriticalSettings {
    fn default() -> Self {
        Self {
            bracket: (1e-8, 1e-5),
            iters: 30,
            eps_range: (1e-3, 0.3),
            points: 12,
            exclusion_widths: 2.0,
            workers: 1,
        }
    }
}

impl CriticalSettings {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.eps_range;
        if !(lo > 0.0 && lo < hi && hi < 1.0) {
            return Err(Error::invalid("eps_range", "need 0 < eps_min < eps_max < 1"));
        }
        if self.points < 2 {
            return Err(Error::invalid("points", "need at least 2 scan points"));
        }
        if !(self.exclusion_widths >= 0.0) {
            return Err(Error::invalid("exclusion_widths", "must be >= 0"));
        }
        Ok(())
    }

    /// Scan γ values, ascending.
    pub fn scan_gammas(&self, gamma_c: f64) -> Vec<f64> {
        let (lo, hi) = (self.eps_range.0.ln(), self.eps_range.1.ln());
        let n = self.points;
        (0..n)
            .rev()
            .map(|i| {
                let eps = (lo + (hi - lo) * i as f64 / (n - 1) as f64).exp();
                gamma_c * (1.0 - eps)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalReport {
    pub search: CriticalGamma,
    pub scan: Vec<TransitionPoint>,
    pub fit: CriticalFit,
}

/// Full pipeline against an arbitrary classifier of γ.
pub fn run_critical_with<F>(settings: &CriticalSettings, classify: F) -> Result<CriticalReport>
where
    F: Fn(f64) -> Result<PhaseOutcome> + Sync,
{
    settings.validate()?;
    let search = find_gamma_c(&classify, settings.bracket.0, settings.bracket.1, settings.iters)?;
    let gammas = settings.scan_gammas(search.gamma_c);
    let scan = scan_transition_with(&gammas, settings.workers, &classify)?;
    let points: Vec<(f64, f64)> = scan
        .iter()
        .filter_map(|p| p.inv_tau.map(|r| (p.gamma, r)))
        .collect();
    let fit = fit_zeta(&points, search.gamma_c, settings.exclusion_widths * search.uncertainty)?;
    Ok(CriticalReport { search, scan, fit })
}

/// Pipeline on `base` at fixed α and δ.
pub fn run_critical(base: &SimConfig, alpha: f64, delta: f64, settings: &CriticalSettings) -> Result<CriticalReport> {
    run_critical_with(settings, |g| sim::classify(&sim::with_coefficients(base, alpha, g, delta)))
}

/// Classifier with a planted law τ = (γ_c − γ)^(−ζ) below γ_c and bounded
/// above it, for checking the pipeline end to end.
pub fn synthetic_classifier(gamma_c: f64, zeta: f64) -> impl Fn(f64) -> Result<PhaseOutcome> + Sync {
    move |gamma| {
        let phase = if gamma < gamma_c {
            Phase::Unbounded {
                tau: (gamma_c - gamma).powf(-zeta),
            }
        } else {
            Phase::Bounded { steady_temp: 0.0 }
        };
        Ok(PhaseOutcome {
            phase,
            diagnostics: Diagnostics {
                plateau_slope: 0.0,
                final_p_err: 0.0,
                final_qubit_temp: 0.0,
                halt_reason: HaltReason::Stopped,
                runaway_cause: None,
                balance_ratio: None,
                exact_steps: 0,
                qec_events: 0,
                warnings: vec!["synthetic classifier".into()],
            },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_exponent_recovered() {
        let settings = CriticalSettings {
            bracket: (0.0, 1.0),
            iters: 80,
            ..Default::default()
        };
        for zeta in [0.5, 1.0, 0.37] {
            let r = run_critical_with(&settings, synthetic_classifier(0.3, zeta)).unwrap();
            assert!((r.search.gamma_c - 0.3).abs() < 1e-15);
            assert!((r.fit.zeta - zeta).abs() < 1e-6, "{} vs {zeta}", r.fit.zeta);
            assert_eq!(r.fit.points.len(), settings.points);
        }
    }

    #[test]
    fn scan_gammas_ascending_below_gamma_c() {
        let g = CriticalSettings::default().scan_gammas(2.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[0] - 2.0 * 0.7).abs() < 1e-12);
        assert!((g[g.len() - 1] - 2.0 * (1.0 - 1e-3)).abs() < 1e-12);
    }

    #[test]
    fn bad_bracket_is_instructive() {
        let s = CriticalSettings {
            bracket: (0.5, 1.0),
            ..Default::default()
        };
        let err = run_critical_with(&s, synthetic_classifier(0.3, 0.5)).unwrap_err().to_string();
        assert!(err.contains("lower the bracket"), "{err}");
    }
}
