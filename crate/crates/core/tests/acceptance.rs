//! Acceptance criteria 1–8; prints one PASS/FAIL line per criterion.

use std::time::Instant;

use qec_thermal::config::{parse_config, Mode, SimConfig};
use qec_thermal::critical::{run_critical, run_critical_with, synthetic_classifier, CriticalSettings};
use qec_thermal::phase::Phase;
use qec_thermal::sim::simulate;
use qec_thermal::sweep::{count_transitions, run_sweep, scan_transition, Axis, Spacing, SweepOptions, SweepSpec};
use qec_thermal::thermo::{ErrorModel, QecPolicy};
use qec_thermal::{Coefficients, Dynamics, LatticeState};

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn within(name: &str, value: f64, target: f64, rel: f64) -> Check {
    let err = (value / target - 1.0).abs();
    let line = format!("{name} = {value:.4e} (target {target:.3e} ± {:.0}%)", rel * 100.0);
    if err <= rel {
        Ok(line)
    } else {
        Err(line)
    }
}

fn all(checks: Vec<Check>) -> Check {
    let mut ok = true;
    let mut parts = Vec::new();
    for c in checks {
        match c {
            Ok(s) => parts.push(s),
            Err(s) => {
                ok = false;
                parts.push(format!("FAILED {s}"));
            }
        }
    }
    let joined = parts.join("; ");
    if ok {
        Ok(joined)
    } else {
        Err(joined)
    }
}

fn toy() -> SimConfig {
    parse_config(include_str!("../configs/toy.toml"), &[]).unwrap()
}

fn coefficients() -> Check {
    let r = SimConfig::default().derive_report().map_err(|e| e.to_string())?;
    all(vec![
        within("A", r.debye_a, 3.14e-2, 0.02),
        within("δ", r.coefficients.delta, 0.50, 0.01),
        within("γ", r.coefficients.gamma, 6.7e-13, 0.03),
        within("J", r.diffusivity, 0.95, 0.02),
        within("CFL Δt", r.cfl.time_step_bound, 0.525e-12, 0.02),
        within("α(ln2 off)", r.alpha_ln2_off, 8.79e-15, 0.02),
        within("α(ln2 on)", r.alpha_ln2_on, 6.10e-15, 0.01),
    ])
}

fn threshold() -> Check {
    let model = ErrorModel::default();
    let p_th = QecPolicy::default().p_th;
    let p = model.p_err(0.1);
    let line = format!("p_err(0.1 K) = {p:e}, p_th = {p_th}");
    // within 2 ulp: 0.1² is not exactly representable
    if (p - p_th).abs() <= 2.0 * f64::EPSILON * p_th && p >= p_th {
        Ok(line)
    } else {
        Err(line)
    }
}

fn no_cooling() -> Check {
    let cfg = parse_config("", &["physical.cooling_power_coeff=0".into()]).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let sim = simulate(&cfg).map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    match sim.outcome.phase {
        Phase::Unbounded { tau } if (0.1..=100.0).contains(&tau) && wall < 600.0 => {
            let extrapolations = sim
                .segments
                .iter()
                .filter(|s| s.kind == qec_thermal::phase::SegmentKind::Extrapolated)
                .count();
            Ok(format!("unbounded, τ = {tau:.3} s, {extrapolations} extrapolations, {wall:.1} s wall"))
        }
        other => Err(format!("{other:?} after {wall:.1} s")),
    }
}

fn cooled() -> Check {
    let start = Instant::now();
    let sim = simulate(&SimConfig::default()).map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    match sim.outcome.phase {
        Phase::Bounded { steady_temp } if steady_temp < 0.1 && wall < 600.0 => {
            Ok(format!("bounded, steady T_q = {steady_temp:.6e} K, {wall:.1} s wall"))
        }
        other => Err(format!("{other:?} after {wall:.1} s")),
    }
}

fn fidelity() -> Check {
    let steps = 20_000_000;
    let mut cfg = parse_config("", &["physical.cooling_power_coeff=0".into()]).map_err(|e| e.to_string())?;
    cfg.numerics.mode = Mode::Exact;
    cfg.numerics.max_steps = steps;
    let exact = simulate(&cfg).map_err(|e| e.to_string())?;
    let t_end = exact.trajectory.samples.last().unwrap().time;
    cfg.numerics.mode = Mode::Quasilinear;
    cfg.numerics.max_time = t_end;
    let quasi = simulate(&cfg).map_err(|e| e.to_string())?;
    let extrapolations = quasi
        .segments
        .iter()
        .filter(|s| s.kind == qec_thermal::phase::SegmentKind::Extrapolated)
        .count();
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for s in &exact.trajectory.samples {
        if let Some(q) = quasi.trajectory.qubit_temp_at(s.time) {
            worst = worst.max((q - s.t_qubit).abs() / s.t_qubit);
            compared += 1;
        }
    }
    let rise = exact.trajectory.samples.last().unwrap().t_qubit / cfg.physical.base_temp - 1.0;
    let line = format!(
        "{steps} exact steps, {compared} overlap samples, {extrapolations} extrapolations, worst rel diff {worst:.2e} (T_q rise {rise:.1e})"
    );
    if worst < 0.01 && compared > 1000 && extrapolations > 0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn critical_exponent() -> Check {
    let start = Instant::now();
    let settings = CriticalSettings::default();
    let r = run_critical(&toy(), 1e-6, 0.5, &settings).map_err(|e| e.to_string())?;
    let wall = start.elapsed().as_secs_f64();
    let line = format!(
        "γ_c = {:.5e} K², ζ = {:.4} ± {:.4} from {} points, {wall:.1} s wall",
        r.search.gamma_c,
        r.fit.zeta,
        r.fit.fit_stderr,
        r.fit.points.len()
    );
    if (0.35..=0.65).contains(&r.fit.zeta) && wall < 1800.0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn dynamics(alpha: f64, gamma: f64, delta: f64) -> Dynamics {
    let c = Coefficients {
        alpha,
        gamma,
        delta,
        debye_a: 3e-2,
        diffusivity: 1.0,
    };
    Dynamics::new(&c, 0.01, 1, 5.26e-13, ErrorModel::default(), QecPolicy::default())
}

fn property_suites() -> Check {
    let mut checks = Vec::new();

    let temps: Vec<f64> = (0..50).map(|i| 0.01 + 0.004 * ((i * 13 % 17) as f64)).collect();
    let (hi, lo) = (
        temps.iter().cloned().fold(f64::MIN, f64::max),
        temps.iter().cloned().fold(f64::MAX, f64::min),
    );
    let mut state = LatticeState::from_temps(temps);
    let before: f64 = state.temps.iter().sum();
    let d = dynamics(0.0, 0.0, 0.5);
    let mut max_ok = true;
    for _ in 0..1_000_000 {
        state.step(&d).unwrap();
        max_ok &= state.temps[0] <= hi && state.temps[0] >= lo;
    }
    max_ok &= state.temps.iter().all(|&t| t <= hi && t >= lo);
    let drift = (state.temps.iter().sum::<f64>() / before - 1.0).abs();
    checks.push(if drift < 1e-9 {
        Ok(format!("conservation {drift:.1e}"))
    } else {
        Err(format!("conservation {drift:.1e}"))
    });
    checks.push(if max_ok { Ok("max principle".into()) } else { Err("max principle".into()) });

    let delta = 0.5;
    let gamma = (1.0 - delta) * 0.01 * 0.01 / 2.0;
    let mut state = LatticeState::new(50, 0.01).unwrap();
    let d = dynamics(1e-6, gamma, delta);
    let mut floor_ok = true;
    for _ in 0..200_000 {
        state.step(&d).unwrap();
        floor_ok &= state.temps.iter().all(|&t| t >= 0.01);
    }
    checks.push(if floor_ok { Ok("T >= T0 floor".into()) } else { Err("T >= T0 floor".into()) });

    let model = ErrorModel::default();
    let policy = QecPolicy::default();
    let mono = (1..2000)
        .map(|i| 1e-3 * i as f64 / 4.0)
        .collect::<Vec<_>>()
        .windows(2)
        .all(|w| policy.frequency_at(&model, w[0]) <= policy.frequency_at(&model, w[1]));
    checks.push(if mono { Ok("f∘p_f∘p_err monotone".into()) } else { Err("monotonicity".into()) });

    let s = CriticalSettings {
        bracket: (0.0, 1.0),
        iters: 80,
        ..Default::default()
    };
    let synth = run_critical_with(&s, synthetic_classifier(0.3, 0.5)).map_err(|e| e.to_string())?;
    let err = (synth.fit.zeta - 0.5).abs();
    checks.push(if err < 1e-6 {
        Ok(format!("synthetic ζ error {err:.1e}"))
    } else {
        Err(format!("synthetic ζ error {err:.1e}"))
    });

    let mut cfg = toy();
    cfg.coefficients.gamma = Some(1.5e-7);
    let a = simulate(&cfg).map_err(|e| e.to_string())?;
    let b = simulate(&cfg).map_err(|e| e.to_string())?;
    checks.push(if a == b && a.trajectory.to_csv() == b.trajectory.to_csv() {
        Ok("bit-identical reruns".into())
    } else {
        Err("rerun differs".into())
    });

    let mut spec = SweepSpec::parse(include_str!("../configs/toy_gamma_scan.toml")).map_err(|e| e.to_string())?;
    spec.alpha_axis = Axis {
        min: 3e-7,
        max: 3e-6,
        count: 2,
        spacing: Spacing::Log,
    };
    spec.gamma_axis.count = 5;
    let one = run_sweep(&spec, &SweepOptions { workers: 1, ..Default::default() }).map_err(|e| e.to_string())?;
    let many = run_sweep(&spec, &SweepOptions { workers: 4, ..Default::default() }).map_err(|e| e.to_string())?;
    checks.push(if one.cells == many.cells && one.to_csv() == many.to_csv() {
        Ok("worker invariance".into())
    } else {
        Err("worker count changed the grid".into())
    });
    all(checks)
}

fn phase_structure() -> Check {
    let axis = Axis {
        min: 1e-8,
        max: 1e-5,
        count: 20,
        spacing: Spacing::Log,
    };
    let base = toy();
    let points = scan_transition(&base, 1e-6, 0.5, &axis.values(), 1).map_err(|e| e.to_string())?;
    let (transitions, reentrant) = count_transitions(&points);
    let indeterminate = points.iter().filter(|p| p.indeterminate).count();
    let first_bounded = points.iter().find(|p| p.phase == "bounded").map(|p| p.gamma);
    let line = format!(
        "{transitions} Unbounded→Bounded transition(s), re-entrant: {reentrant}, {indeterminate} indeterminate, first bounded γ = {first_bounded:?}"
    );
    if transitions == 1 && !reentrant && indeterminate == 0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 coefficient reproduction", coefficients),
        ("2 threshold consistency", threshold),
        ("3 no-cooling breakdown", no_cooling),
        ("4 cooled stability", cooled),
        ("5 quasi-linear fidelity", fidelity),
        ("6 critical exponent", critical_exponent),
        ("7 property suites", property_suites),
        ("8 phase-diagram structure", phase_structure),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS criterion {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
