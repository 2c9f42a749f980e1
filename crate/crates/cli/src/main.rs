mod output;
mod repro;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use qhop_core::classical::{capacity_experiment, CapacityConfig, PatternSet};
use qhop_core::fixedpoint::{find_fixed_points, write_fixed_points_jsonl};
use qhop_core::lindblad::{evolve, write_snapshots, DensityMatrix, EvolveSettings, OperatorSet};
use qhop_core::meanfield::{classify_trajectory, integrate, ClassifySettings, IntegrationSettings};
use qhop_core::phasemap::{emit_phase_csv, emit_phase_image, sweep, Phase, SweepConfig};
use qhop_core::{Exponent, ModelParams, OverlapState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use output::{config_err, ConfigError, OutDir};

#[derive(Parser)]
#[command(name = "qhopfield", version, about = "Open quantum discrete modern Hopfield network experiments")]
struct Cli {
    /// Log at debug level (RUST_LOG overrides).
    #[arg(long, short, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the mean-field overlap equations and classify the run.
    Simulate(SimulateArgs),
    /// Solve the single-pattern self-consistency equation and report stability.
    FixedPoints(FixedPointArgs),
    /// Sweep the (T, Ω) plane from a JSON config.
    PhaseDiagram(PhaseDiagramArgs),
    /// Evolve a small system under the exact master equation.
    Lindblad(LindbladArgs),
    /// Estimate classical storage capacity by Monte-Carlo retrieval.
    Capacity(CapacityArgs),
    /// Regenerate a canonical figure dataset.
    Repro(repro::ReproArgs),
}

#[derive(Args, Serialize)]
struct SimulateArgs {
    #[arg(long)]
    x: u32,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long)]
    temp: f64,
    #[arg(long)]
    omega: f64,
    /// Initial overlaps as `mz,my` pairs, one pair per pattern (a single
    /// pair sets pattern 1 and zeroes the rest).
    #[arg(long, default_value = "3,-3", allow_hyphen_values = true)]
    init: String,
    #[arg(long, default_value_t = 1e-2)]
    dt: f64,
    #[arg(long, default_value_t = 500.0)]
    t_max: f64,
    /// Record every n-th step.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    /// Also render the (M_Z, M_Y) phase-plane orbit.
    #[arg(long)]
    image: bool,
    /// Accepted for uniformity; the integration is deterministic.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "qhop-out/simulate")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct FixedPointArgs {
    #[arg(long)]
    x: u32,
    #[arg(long)]
    temp: f64,
    #[arg(long)]
    omega: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "qhop-out/fixed-points")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct PhaseDiagramArgs {
    /// JSON sweep configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides `threads` from the config.
    #[arg(long)]
    threads: Option<usize>,
    /// Pixels per grid cell in the PNG.
    #[arg(long, default_value_t = 4)]
    scale: u32,
    #[arg(long, default_value = "qhop-out/phase-diagram")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum InitialState {
    /// Computational-basis state of the first pattern.
    Pattern,
    /// Maximally mixed state.
    Mixed,
    /// All spins along +X.
    Xplus,
}

#[derive(Args, Serialize)]
struct LindbladArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    x: u32,
    #[arg(long, default_value_t = 1)]
    p: usize,
    #[arg(long)]
    temp: f64,
    #[arg(long)]
    omega: f64,
    /// Seed for the random patterns.
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 5.0)]
    t_max: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    #[arg(long, default_value_t = 10)]
    record_stride: usize,
    #[arg(long, value_enum, default_value_t = InitialState::Pattern)]
    init: InitialState,
    /// Dump every recorded density matrix to `snapshots.bin`.
    #[arg(long)]
    snapshots: bool,
    /// Check the smallest eigenvalue at every n-th record (0 disables).
    #[arg(long, default_value_t = 0)]
    positivity_every: usize,
    #[arg(long, default_value = "qhop-out/lindblad")]
    out: PathBuf,
}

#[derive(Args, Serialize)]
struct CapacityArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    x: u32,
    /// Loads to probe: `a,b,c` or `start:stop:step` (inclusive).
    #[arg(long)]
    p_schedule: String,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0.01)]
    error_threshold: f64,
    #[arg(long, default_value_t = 0.9)]
    success_threshold: f64,
    #[arg(long)]
    probes_per_trial: Option<usize>,
    #[arg(long, default_value_t = 50)]
    max_sweeps: usize,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "qhop-out/capacity")]
    out: PathBuf,
}

fn warn_unused_seed(seed: Option<u64>) {
    if let Some(s) = seed {
        warn!("--seed {s} ignored: this command is deterministic");
    }
}

pub(crate) fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| config_err(format!("not a number: {v:?}"))))
        .collect()
}

fn parse_init(s: &str, p: usize) -> Result<OverlapState> {
    let v = parse_list(s)?;
    let (mut z, mut y) = (vec![0.0; p], vec![0.0; p]);
    if v.len() == 2 {
        z[0] = v[0];
        y[0] = v[1];
    } else if v.len() == 2 * p {
        for mu in 0..p {
            z[mu] = v[2 * mu];
            y[mu] = v[2 * mu + 1];
        }
    } else {
        return Err(config_err(format!("--init needs 2 or {} values for p = {p}, got {}", 2 * p, v.len())));
    }
    if v.iter().any(|a| !a.is_finite()) {
        return Err(config_err("--init values must be finite"));
    }
    OverlapState::new(z, y).map_err(|e| ConfigError::from(e).into())
}

fn parse_schedule(s: &str) -> Result<Vec<usize>> {
    let bad = || config_err(format!("bad --p-schedule {s:?}: use a,b,c or start:stop:step"));
    if s.contains(':') {
        let parts: Vec<usize> = s.split(':').map(|v| v.trim().parse().map_err(|_| bad())).collect::<Result<_>>()?;
        let [start, stop, step] = parts[..] else { return Err(bad()) };
        if step == 0 || start > stop {
            return Err(bad());
        }
        Ok((start..=stop).step_by(step).collect())
    } else {
        s.split(',').map(|v| v.trim().parse().map_err(|_| bad())).collect()
    }
}

fn check_integration(dt: f64, t_max: f64, stride: usize) -> Result<IntegrationSettings> {
    if !(dt.is_finite() && dt > 0.0 && t_max.is_finite() && t_max > dt) || stride == 0 {
        return Err(config_err(format!("need dt > 0, t_max > dt and stride >= 1 (got dt={dt}, t_max={t_max}, stride={stride})")));
    }
    Ok(IntegrationSettings { dt, t_max, stride })
}

fn cmd_simulate(a: &SimulateArgs) -> Result<()> {
    let started = Instant::now();
    warn_unused_seed(a.seed);
    let params = ModelParams::from_temperature(a.x, a.p, a.temp, a.omega).map_err(ConfigError::from)?;
    let s0 = parse_init(&a.init, a.p)?;
    let settings = check_integration(a.dt, a.t_max, a.stride)?;
    let out = OutDir::create(&a.out)?;

    info!("integrating x={} p={} T={} Ω={} to t={}", a.x, a.p, a.temp, a.omega, a.t_max);
    let traj = integrate(&s0, &params, &settings)?;
    out.write("trajectory.csv", |w| traj.write_csv(w))?;
    let verdict = match classify_trajectory(&traj, &ClassifySettings::default()) {
        Ok(v) => Some(v),
        Err(e) => {
            warn!("no verdict: {e}");
            None
        }
    };
    if a.image {
        let fps = if a.p == 1 { find_fixed_points(&params)? } else { Vec::new() };
        qhop_core::phasemap::emit_trajectory_image(std::slice::from_ref(&traj), &fps, &out.path("trajectory.png"), 512)?;
    }
    out.run_json("simulate", a, started)?;
    output::summary(json!({
        "command": "simulate",
        "verdict": verdict.as_ref().map(|v| v.kind.as_str()),
        "terminal_point": verdict.as_ref().and_then(|v| v.terminal_point.clone()),
        "amplitude": verdict.as_ref().and_then(|v| v.amplitude),
        "period": verdict.as_ref().and_then(|v| v.period),
        "final_state": traj.last(),
        "samples": traj.len(),
        "out": out.root(),
    }));
    Ok(())
}

fn cmd_fixed_points(a: &FixedPointArgs) -> Result<()> {
    let started = Instant::now();
    warn_unused_seed(a.seed);
    let params = ModelParams::from_temperature(a.x, 1, a.temp, a.omega).map_err(ConfigError::from)?;
    let out = OutDir::create(&a.out)?;
    let roots = find_fixed_points(&params)?;
    out.write("fixed_points.jsonl", |w| write_fixed_points_jsonl(&roots, w))?;
    out.run_json("fixed-points", a, started)?;
    output::summary(json!({
        "command": "fixed-points",
        "n_fixed_points": roots.len(),
        "m_z": roots.iter().map(|r| r.m_z).collect::<Vec<_>>(),
        "class": roots.iter().map(|r| r.class.as_str()).collect::<Vec<_>>(),
        "out": out.root(),
    }));
    Ok(())
}

pub(crate) fn read_sweep_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let cfg: SweepConfig =
        serde_json::from_str(&text).map_err(|e| config_err(format!("invalid sweep config {}: {e}", path.display())))?;
    Ok(cfg)
}

pub(crate) fn run_sweep(cfg: &SweepConfig, out: &OutDir, scale: u32) -> Result<serde_json::Value> {
    cfg.validate().map_err(ConfigError::from)?;
    info!("sweeping {}×{} cells at x={}", cfg.n_t, cfg.n_omega, cfg.x);
    let map = sweep(cfg)?;
    emit_phase_csv(&map, &out.path("phase.csv"))?;
    emit_phase_image(&map, &out.path("phase.png"), scale)?;
    out.write("boundary.csv", |w| map.boundary.write_csv(w))?;
    let counts: serde_json::Map<String, serde_json::Value> =
        Phase::ALL.iter().map(|&ph| (ph.as_str().to_string(), json!(map.count(ph)))).collect();
    Ok(json!({ "cells": map.cells.len(), "phases": counts }))
}

fn cmd_phase_diagram(a: &PhaseDiagramArgs) -> Result<()> {
    let started = Instant::now();
    let mut cfg = read_sweep_config(&a.config)?;
    if let Some(t) = a.threads {
        cfg.threads = t;
    }
    cfg.validate().map_err(ConfigError::from)?;
    if cfg.seed != 0 {
        warn!("seed {} recorded but unused: the sweep is deterministic", cfg.seed);
    }
    let out = OutDir::create(&a.out)?;
    let stats = run_sweep(&cfg, &out, a.scale)?;
    out.run_json("phase-diagram", &json!({ "sweep": cfg, "scale": a.scale }), started)?;
    output::summary(json!({ "command": "phase-diagram", "result": stats, "out": out.root() }));
    Ok(())
}

fn cmd_lindblad(a: &LindbladArgs) -> Result<()> {
    let started = Instant::now();
    let x = Exponent::new(a.x).map_err(ConfigError::from)?;
    if !(a.temp.is_finite() && a.temp > 0.0) {
        return Err(config_err(format!("--temp must be positive, got {}", a.temp)));
    }
    if a.p == 0 {
        return Err(config_err("--p must be at least 1"));
    }
    check_integration(a.dt, a.t_max, a.record_stride)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let patterns = PatternSet::random(a.p, a.n, &mut rng).map_err(ConfigError::from)?;
    let ops = OperatorSet::new(&patterns, x, 1.0 / a.temp, a.omega).map_err(ConfigError::from)?;
    let rho0 = match a.init {
        InitialState::Pattern => DensityMatrix::basis_state(&patterns.config(0)),
        InitialState::Mixed => DensityMatrix::maximally_mixed(a.n),
        InitialState::Xplus => DensityMatrix::x_plus(a.n),
    }
    .map_err(ConfigError::from)?;
    let out = OutDir::create(&a.out)?;

    let settings = EvolveSettings {
        dt: a.dt,
        t_max: a.t_max,
        record_stride: a.record_stride,
        snapshots: a.snapshots,
        positivity_every: a.positivity_every,
        ..Default::default()
    };
    info!("evolving N={} (dim {}) to t={}", a.n, rho0.dim(), a.t_max);
    let evo = evolve(&rho0, &ops, &patterns, &settings)?;
    out.write("overlaps.csv", |w| evo.write_overlaps_csv(w))?;
    if a.snapshots {
        out.write("snapshots.bin", |w| write_snapshots(&evo.snapshots, w))?;
    }
    let rows: Vec<Vec<i8>> = (0..a.p).map(|mu| patterns.pattern(mu).to_vec()).collect();
    out.write("patterns.json", |w| Ok(serde_json::to_writer(w, &rows)?))?;
    out.run_json("lindblad", a, started)?;
    let last = evo.records.last().map(|r| &r.overlaps);
    output::summary(json!({
        "command": "lindblad",
        "records": evo.records.len(),
        "final_overlaps": last,
        "max_trace_error": evo.max_trace_error,
        "max_hermiticity_error": evo.max_hermiticity_error,
        "min_eigenvalue": evo.min_eigenvalue,
        "out": out.root(),
    }));
    Ok(())
}

fn cmd_capacity(a: &CapacityArgs) -> Result<()> {
    let started = Instant::now();
    let x = Exponent::new(a.x).map_err(ConfigError::from)?;
    let cfg = CapacityConfig {
        trials: a.trials,
        noise_fraction: a.noise,
        error_threshold: a.error_threshold,
        success_threshold: a.success_threshold,
        probes_per_trial: a.probes_per_trial,
        max_sweeps: a.max_sweeps,
        threads: a.threads,
        ..CapacityConfig::new(a.n, x, parse_schedule(&a.p_schedule)?, a.seed)
    };
    cfg.validate().map_err(ConfigError::from)?;
    let out = OutDir::create(&a.out)?;
    info!("capacity experiment N={} x={} over {} loads", a.n, a.x, cfg.p_schedule.len());
    let report = capacity_experiment(&cfg)?;
    out.write("capacity.csv", |w| report.write_csv(w))?;
    out.write("capacity.json", |w| Ok(serde_json::to_writer_pretty(w, &report)?))?;
    out.run_json("capacity", &cfg, started)?;
    output::summary(json!({
        "command": "capacity",
        "estimated_capacity": report.estimated_capacity,
        "capacity_over_n": report.estimated_capacity as f64 / a.n as f64,
        "seed": a.seed,
        "out": out.root(),
    }));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::FixedPoints(a) => cmd_fixed_points(a),
        Command::PhaseDiagram(a) => cmd_phase_diagram(a),
        Command::Lindblad(a) => cmd_lindblad(a),
        Command::Capacity(a) => cmd_capacity(a),
        Command::Repro(a) => repro::run(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<ConfigError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedules() {
        assert_eq!(parse_schedule("2:10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_schedule("1, 3,7").unwrap(), vec![1, 3, 7]);
        assert!(parse_schedule("1:5:0").is_err());
        assert!(parse_schedule("1:5").is_err());
    }

    #[test]
    fn init_pairs() {
        let s = parse_init("3,-3", 3).unwrap();
        assert_eq!(s.m_z, vec![3.0, 0.0, 0.0]);
        assert_eq!(s.m_y, vec![-3.0, 0.0, 0.0]);
        let s = parse_init("1,2,3,4", 2).unwrap();
        assert_eq!((s.m_z, s.m_y), (vec![1.0, 3.0], vec![2.0, 4.0]));
        let e = parse_init("1,2,3", 2).unwrap_err();
        assert!(e.downcast_ref::<ConfigError>().is_some());
        assert!(parse_init("nan,0", 1).is_err());
    }
}
