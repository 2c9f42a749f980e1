use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{retrieve_with, PatternSet, SiteOrder, UpdateRule};
use crate::{Error, Exponent, Result};

/// Settings for a Monte-Carlo storage-capacity estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityConfig {
    pub n_spins: usize,
    pub x: Exponent,
    /// Fraction of bits flipped in each probe (rounded to whole spins).
    pub noise_fraction: f64,
    /// Maximum tolerated final Hamming distance, as a fraction of N.
    pub error_threshold: f64,
    /// A load passes when at least this fraction of probes succeed.
    pub success_threshold: f64,
    pub trials: usize,
    /// Number of stored patterns probed per trial; `None` probes all of them.
    pub probes_per_trial: Option<usize>,
    pub max_sweeps: usize,
    pub p_schedule: Vec<usize>,
    pub seed: u64,
    /// Worker threads (0 = rayon default); results do not depend on it.
    #[serde(default)]
    pub threads: usize,
}

impl CapacityConfig {
    pub fn new(n_spins: usize, x: Exponent, p_schedule: Vec<usize>, seed: u64) -> Self {
        Self {
            n_spins,
            x,
            noise_fraction: 0.05,
            error_threshold: 0.01,
            success_threshold: 0.9,
            trials: 10,
            probes_per_trial: None,
            max_sweeps: 50,
            p_schedule,
            seed,
            threads: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_spins < 10 {
            return Err(Error::InvalidParameter(format!("capacity experiments need N >= 10, got {}", self.n_spins)));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.p_schedule.is_empty() || self.p_schedule.contains(&0) {
            return Err(Error::InvalidParameter("p schedule must be non-empty with p >= 1".into()));
        }
        if self.p_schedule.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("p schedule must be strictly increasing".into()));
        }
        for (name, v) in [
            ("noise_fraction", self.noise_fraction),
            ("error_threshold", self.error_threshold),
            ("success_threshold", self.success_threshold),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.max_sweeps == 0 {
            return Err(Error::InvalidParameter("max_sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadPoint {
    pub p: usize,
    pub success_rate: f64,
    /// Mean final Hamming distance as a fraction of N.
    pub mean_final_distance: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityReport {
    pub network_size: usize,
    pub x: Exponent,
    pub trials: usize,
    pub noise_fraction: f64,
    pub error_threshold: f64,
    pub success_threshold: f64,
    /// Largest scheduled p whose success rate reaches the threshold (0 if none).
    pub estimated_capacity: usize,
    pub load_curve: Vec<LoadPoint>,
}

impl CapacityReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "p,success_rate,mean_final_distance")?;
        for pt in &self.load_curve {
            writeln!(w, "{},{},{}", pt.p, pt.success_rate, pt.mean_final_distance)?;
        }
        Ok(())
    }
}

struct TrialOutcome {
    successes: usize,
    probes: usize,
    distance_sum: usize,
}

fn run_trial(cfg: &CapacityConfig, p: usize, rng: &mut ChaCha8Rng) -> Result<TrialOutcome> {
    let n = cfg.n_spins;
    let patterns = PatternSet::random(p, n, rng)?;
    let flips = (cfg.noise_fraction * n as f64).round() as usize;
    let tolerated = (cfg.error_threshold * n as f64).floor() as usize;
    let probes = cfg.probes_per_trial.map_or(p, |k| k.min(p));
    let mut out = TrialOutcome { successes: 0, probes, distance_sum: 0 };
    for mu in 0..probes {
        let target = patterns.config(mu);
        let probe = target.with_flips(flips, rng);
        let r = retrieve_with(&patterns, &probe, cfg.x, cfg.max_sweeps, SiteOrder::Sequential, UpdateRule::default(), rng)?;
        let d = r.state.hamming(&target);
        out.distance_sum += d;
        if d <= tolerated {
            out.successes += 1;
        }
    }
    Ok(out)
}

/// Estimates storage capacity by probing freshly stored random patterns at
/// each load in the schedule.
///
/// Every (load, trial) pair draws from its own ChaCha stream keyed by the
/// seed, so the report does not depend on the rayon thread count.
pub fn capacity_experiment(cfg: &CapacityConfig) -> Result<CapacityReport> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    pool.install(|| run_schedule(cfg))
}

fn run_schedule(cfg: &CapacityConfig) -> Result<CapacityReport> {
    let mut load_curve = Vec::with_capacity(cfg.p_schedule.len());
    for (k, &p) in cfg.p_schedule.iter().enumerate() {
        let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(((k as u64) << 32) | t as u64);
                run_trial(cfg, p, &mut rng)
            })
            .collect::<Result<_>>()?;
        let probes: usize = outcomes.iter().map(|o| o.probes).sum();
        let successes: usize = outcomes.iter().map(|o| o.successes).sum();
        let dist: usize = outcomes.iter().map(|o| o.distance_sum).sum();
        load_curve.push(LoadPoint {
            p,
            success_rate: successes as f64 / probes as f64,
            mean_final_distance: dist as f64 / (probes * cfg.n_spins) as f64,
        });
    }
    let estimated_capacity = load_curve
        .iter()
        .filter(|pt| pt.success_rate >= cfg.success_threshold)
        .map(|pt| pt.p)
        .max()
        .unwrap_or(0);
    Ok(CapacityReport {
        network_size: cfg.n_spins,
        x: cfg.x,
        trials: cfg.trials,
        noise_fraction: cfg.noise_fraction,
        error_threshold: cfg.error_threshold,
        success_threshold: cfg.success_threshold,
        estimated_capacity,
        load_curve,
    })
}
