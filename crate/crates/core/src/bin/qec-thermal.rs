//! Command-line front end. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0  | success; for `simulate`, a bounded outcome |
//! | 1  | config or validation error |
//! | 2  | usage error (bad flags) |
//! | 3  | numerical instability |
//! | 4  | I/O error |
//! | 5  | sweep interrupted before every cell finished |
//! | 10 | `simulate`: unbounded outcome |
//! | 11 | `simulate`: indeterminate outcome |

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qec_thermal::config::{apply_override, parse_config, Mode, SimConfig};
use qec_thermal::critical::{run_critical, run_critical_with, synthetic_classifier, CriticalSettings};
use qec_thermal::phase::Phase;
use qec_thermal::sim::simulate;
use qec_thermal::sweep::{run_sweep, SweepOptions, SweepSpec};
use qec_thermal::{Error, Result};

#[derive(Parser)]
#[command(name = "qec-thermal", version, about = "Thermal feedback between QEC heating and cooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML config (a sweep spec for `sweep`); omitted means defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set physical.base_temp=20mK`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (defaults to `outputs.dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps and scans.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Zero wall-clock timestamps in metadata so every output is
    /// byte-reproducible. The simulation itself never reads entropy.
    #[arg(long)]
    seedless_deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the derived simulation coefficients and the CFL verdict.
    Derive {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Run one operating point; writes trajectory.csv and outcome.json.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Simulated-time budget, e.g. `30s` or `500ms`.
        #[arg(long)]
        duration: Option<String>,
    },
    /// Classify an (alpha, gamma) grid from a sweep spec.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Continue from the journal in the output directory.
        #[arg(long)]
        resume: bool,
        /// Stop after this many newly computed cells (exit code 5).
        #[arg(long, value_name = "N")]
        stop_after: Option<usize>,
    },
    /// Locate the critical cooling rate and fit the exponent zeta.
    Critical {
        #[command(flatten)]
        common: Common,
        /// Bisection bracket `LO,HI` in K^2.
        #[arg(long, value_name = "LO,HI", default_value = "1e-8,1e-5")]
        bracket: String,
        #[arg(long, default_value_t = 30)]
        iters: u32,
        /// Scan points below the critical rate.
        #[arg(long, default_value_t = 12)]
        points: usize,
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 0.3)]
        eps_max: f64,
        /// Replace the simulation with the planted law tau = (gc - g)^-Z.
        #[arg(long, value_name = "Z")]
        synthetic_zeta: Option<f64>,
        /// Planted critical rate for --synthetic-zeta (default: bracket midpoint).
        #[arg(long, value_name = "GC")]
        synthetic_gamma_c: Option<f64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Kv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Quasilinear,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NumericalInstability { .. } => 3,
        Error::Io { .. } => 4,
        Error::Interrupted { .. } => 5,
        _ => 1,
    }
}

fn read_text(path: Option<&Path>) -> Result<String> {
    match path {
        Some(p) => std::fs::read_to_string(p).map_err(|e| Error::io(p, e)),
        None => Ok(String::new()),
    }
}

fn load_config(common: &Common) -> Result<SimConfig> {
    parse_config(&read_text(common.config.as_deref())?, &common.set)
}

fn out_dir(common: &Common, config: &SimConfig) -> Result<PathBuf> {
    let dir = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.outputs.dir));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn derive(common: &Common, format: Format) -> Result<u8> {
    let config = load_config(common)?;
    let report = config.derive_report()?;
    let text = match format {
        Format::Text => report.to_text(),
        Format::Kv => report.to_key_values(),
        Format::Json => json(&report)?,
    };
    print!("{text}");
    if let Some(dir) = &common.out {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write(&dir.join("derive.json"), &json(&report)?)?;
    }
    Ok(0)
}

fn simulate_cmd(common: &Common, mode: Option<ModeArg>, duration: Option<&str>) -> Result<u8> {
    let mut set = common.set.clone();
    if let Some(m) = mode {
        let name = match m {
            ModeArg::Exact => "exact",
            ModeArg::Quasilinear => "quasilinear",
        };
        set.push(format!("numerics.mode=\"{name}\""));
    }
    if let Some(d) = duration {
        set.push(format!("numerics.max_time=\"{d}\""));
    }
    let config = parse_config(&read_text(common.config.as_deref())?, &set)?;
    let dir = out_dir(common, &config)?;
    let sim = simulate(&config)?;
    if config.outputs.trajectory_csv {
        write(&dir.join("trajectory.csv"), &sim.trajectory.to_csv())?;
    }
    write(&dir.join("outcome.json"), &json(&sim)?)?;
    for w in &sim.outcome.diagnostics.warnings {
        eprintln!("warning: {w}");
    }
    let mode = match sim.mode {
        Mode::Exact => "exact",
        Mode::Quasilinear => "quasilinear",
    };
    Ok(match sim.outcome.phase {
        Phase::Bounded { steady_temp } => {
            println!("bounded: steady qubit temperature {steady_temp:.6e} K ({mode})");
            0
        }
        Phase::Unbounded { tau } => {
            println!("unbounded: tau = {tau:.6e} s ({mode})");
            10
        }
        Phase::Indeterminate { steps, time } => {
            println!("indeterminate after {steps} steps / {time:.6e} s ({mode})");
            11
        }
    })
}

fn sweep_cmd(common: &Common, resume: bool, stop_after: Option<usize>) -> Result<u8> {
    let text = read_text(common.config.as_deref())?;
    let spec = if common.set.is_empty() {
        SweepSpec::parse(&text)?
    } else {
        let mut table: toml::Table = toml::from_str(&text).map_err(|e| Error::Config {
            path: "<document>".into(),
            message: e.to_string(),
        })?;
        for ov in &common.set {
            apply_override(&mut table, ov)?;
        }
        SweepSpec::parse(&toml::to_string(&table).expect("table serializes"))?
    };
    let dir = out_dir(common, &spec.base)?;
    let journal = dir.join("sweep.ndjson");
    let mut grid = run_sweep(
        &spec,
        &SweepOptions {
            workers: common.workers,
            journal: Some(&journal),
            resume,
            max_new_cells: stop_after,
        },
    )?;
    if common.seedless_deterministic {
        if let Some(m) = grid.metadata.as_mut() {
            m.started_unix_s = 0;
            m.finished_unix_s = 0;
        }
    }
    write(&dir.join("grid.csv"), &grid.to_csv())?;
    write(&dir.join("grid.mat"), &grid.to_gnuplot_matrix())?;
    write(&dir.join("grid.json"), &json(&grid)?)?;
    write(&dir.join("grid_meta.json"), &json(&grid.metadata)?)?;
    let count = |label: &str| grid.cells.iter().filter(|c| c.phase_label() == label).count();
    println!(
        "{} cells: {} bounded, {} unbounded, {} indeterminate, {} failed",
        grid.cells.len(),
        count("bounded"),
        count("unbounded"),
        count("indeterminate"),
        count("error")
    );
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn critical_cmd(
    common: &Common,
    bracket: &str,
    iters: u32,
    points: usize,
    eps: (f64, f64),
    synthetic_zeta: Option<f64>,
    synthetic_gamma_c: Option<f64>,
) -> Result<u8> {
    let config = load_config(common)?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidBracket(format!("`{bracket}` is not `LO,HI`; widen or fix the bracket")))
    };
    let (lo, hi) = bracket
        .split_once(',')
        .ok_or_else(|| Error::InvalidBracket(format!("`{bracket}` is not `LO,HI`")))?;
    let settings = CriticalSettings {
        bracket: (parse(lo)?, parse(hi)?),
        iters,
        eps_range: eps,
        points,
        workers: common.workers,
        ..Default::default()
    };
    let dir = out_dir(common, &config)?;
    let report = match synthetic_zeta {
        Some(z) => {
            let gc = synthetic_gamma_c.unwrap_or(0.5 * (settings.bracket.0 + settings.bracket.1));
            run_critical_with(&settings, synthetic_classifier(gc, z))?
        }
        None => {
            let c = config.coefficients()?;
            run_critical(&config, c.alpha, c.delta, &settings)?
        }
    };
    write(&dir.join("critical.json"), &json(&report)?)?;
    for note in &report.search.audit {
        eprintln!("audit: {note}");
    }
    println!(
        "gamma_c = {:.6e} K^2 (± {:.1e}), zeta = {:.4} ± {:.4} from {} points",
        report.search.gamma_c,
        report.search.uncertainty,
        report.fit.zeta,
        report.fit.fit_stderr,
        report.fit.points.len()
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Derive { common, format } => derive(common, *format),
        Command::Simulate { common, mode, duration } => simulate_cmd(common, *mode, duration.as_deref()),
        Command::Sweep {
            common,
            resume,
            stop_after,
        } => sweep_cmd(common, *resume, *stop_after),
        Command::Critical {
            common,
            bracket,
            iters,
            points,
            eps_min,
            eps_max,
            synthetic_zeta,
            synthetic_gamma_c,
        } => critical_cmd(
            common,
            bracket,
            *iters,
            *points,
            (*eps_min, *eps_max),
            *synthetic_zeta,
            *synthetic_gamma_c,
        ),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
