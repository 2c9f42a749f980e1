//! Phase diagrams over the (T, Ω) plane.
//!
//! Each grid cell combines the analytic fixed-point picture (root count,
//! linear stability) with the verdicts of two mean-field trajectories, one
//! started far from the origin and one close to it.

mod render;

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fixedpoint::{find_fixed_points, BoundaryCurve, StabilityClass};
use crate::meanfield::{classify_trajectory, integrate, ClassifySettings, IntegrationSettings, VerdictKind};
use crate::{Error, Exponent, ModelParams, OverlapState, Result};

pub use render::{emit_phase_image, emit_trajectory_image, phase_color};

/// Inclusive, evenly spaced grid over temperature and transverse field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    t_min: f64,
    t_max: f64,
    n_t: usize,
    omega_min: f64,
    omega_max: f64,
    n_omega: usize,
}

impl GridSpec {
    pub fn new(t_min: f64, t_max: f64, n_t: usize, omega_min: f64, omega_max: f64, n_omega: usize) -> Result<Self> {
        if n_t < 2 || n_omega < 2 {
            return Err(Error::InvalidParameter(format!("grid needs at least 2 points per axis, got {n_t}×{n_omega}")));
        }
        if !(t_min > 0.0 && t_max > t_min && t_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("need 0 < t_min < t_max, got [{t_min}, {t_max}]")));
        }
        if !(omega_min >= 0.0 && omega_max > omega_min && omega_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 <= omega_min < omega_max, got [{omega_min}, {omega_max}]"
            )));
        }
        Ok(Self { t_min, t_max, n_t, omega_min, omega_max, n_omega })
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn n_omega(&self) -> usize {
        self.n_omega
    }

    pub fn len(&self) -> usize {
        self.n_t * self.n_omega
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn t(&self, i: usize) -> f64 {
        self.t_min + i as f64 * (self.t_max - self.t_min) / (self.n_t - 1) as f64
    }

    pub fn omega(&self, j: usize) -> f64 {
        self.omega_min + j as f64 * (self.omega_max - self.omega_min) / (self.n_omega - 1) as f64
    }

    pub fn t_values(&self) -> Vec<f64> {
        (0..self.n_t).map(|i| self.t(i)).collect()
    }

    pub fn omega_values(&self) -> Vec<f64> {
        (0..self.n_omega).map(|j| self.omega(j)).collect()
    }

    pub fn t_range(&self) -> (f64, f64) {
        (self.t_min, self.t_max)
    }

    pub fn omega_range(&self) -> (f64, f64) {
        (self.omega_min, self.omega_max)
    }
}

/// Sweep configuration, serialized as the phase-diagram JSON config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub x: u32,
    #[serde(default = "one")]
    pub p: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_omega: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_horizon")]
    pub t_horizon: f64,
    /// Far probe first, near probe second.
    #[serde(default = "default_probes")]
    pub probes: Vec<[f64; 2]>,
    #[serde(default = "default_lc_eps")]
    pub lc_eps: f64,
    #[serde(default = "default_conv_eps")]
    pub conv_eps: f64,
    /// Worker threads (0 = rayon default).
    #[serde(default)]
    pub threads: usize,
    /// Recorded for provenance; the sweep itself is deterministic.
    #[serde(default)]
    pub seed: u64,
}

fn one() -> usize {
    1
}
fn default_dt() -> f64 {
    1e-2
}
fn default_horizon() -> f64 {
    500.0
}
fn default_probes() -> Vec<[f64; 2]> {
    vec![[3.0, -3.0], [0.05, -0.05]]
}
fn default_lc_eps() -> f64 {
    1e-3
}
fn default_conv_eps() -> f64 {
    1e-6
}

/// Samples kept per trajectory step when sweeping.
const SWEEP_STRIDE: usize = 5;

impl SweepConfig {
    /// The default probe set and integration settings over the given grid.
    pub fn new(x: u32, t: (f64, f64, usize), omega: (f64, f64, usize)) -> Self {
        Self {
            x,
            p: 1,
            t_min: t.0,
            t_max: t.1,
            n_t: t.2,
            omega_min: omega.0,
            omega_max: omega.1,
            n_omega: omega.2,
            dt: default_dt(),
            t_horizon: default_horizon(),
            probes: default_probes(),
            lc_eps: default_lc_eps(),
            conv_eps: default_conv_eps(),
            threads: 0,
            seed: 0,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.t_min, self.t_max, self.n_t, self.omega_min, self.omega_max, self.n_omega)
    }

    pub fn exponent(&self) -> Result<Exponent> {
        Exponent::new(self.x)
    }

    pub fn validate(&self) -> Result<()> {
        self.exponent()?;
        self.grid()?;
        if self.p != 1 {
            return Err(Error::InvalidParameter(format!("phase sweeps are defined for p = 1, got p = {}", self.p)));
        }
        if self.probes.is_empty() || self.probes.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("need at least one finite probe".into()));
        }
        if !(self.dt > 0.0 && self.t_horizon > self.dt) {
            return Err(Error::InvalidParameter("need dt > 0 and t_horizon > dt".into()));
        }
        if !(self.lc_eps > 0.0 && self.conv_eps > 0.0) {
            return Err(Error::InvalidParameter("lc_eps and conv_eps must be positive".into()));
        }
        Ok(())
    }

    fn integration(&self) -> IntegrationSettings {
        IntegrationSettings { dt: self.dt, t_max: self.t_horizon, stride: SWEEP_STRIDE }
    }

    fn classify(&self) -> ClassifySettings {
        ClassifySettings { lc_eps: self.lc_eps, conv_eps: self.conv_eps, ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "PM")]
    Pm,
    #[serde(rename = "FM")]
    Fm,
    #[serde(rename = "LC")]
    Lc,
    #[serde(rename = "PM+LC")]
    PmLc,
    #[serde(rename = "FM+LC")]
    FmLc,
    Undecided,
}

impl Phase {
    pub const ALL: [Phase; 6] = [Phase::Pm, Phase::Fm, Phase::Lc, Phase::PmLc, Phase::FmLc, Phase::Undecided];

    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Pm => "PM",
            Phase::Fm => "FM",
            Phase::Lc => "LC",
            Phase::PmLc => "PM+LC",
            Phase::FmLc => "FM+LC",
            Phase::Undecided => "Undecided",
        }
    }
}

impl std::fmt::Display for Phase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    #[serde(rename = "T")]
    pub t: f64,
    pub omega: f64,
    pub n_fixed_points: usize,
    pub origin_stable: bool,
    /// Linear class of the largest positive root, if any.
    pub largest_root_class: Option<StabilityClass>,
    pub far_verdict: VerdictKind,
    pub near_verdict: VerdictKind,
    /// Verdicts for probes beyond the first two.
    pub extra_verdicts: Vec<VerdictKind>,
    pub phase: Phase,
}

impl PhaseCell {
    pub fn verdicts(&self) -> impl Iterator<Item = VerdictKind> + '_ {
        [self.far_verdict, self.near_verdict].into_iter().chain(self.extra_verdicts.iter().copied())
    }
}

/// Combines analytic and simulated evidence into a phase label.
///
/// A cycle is present if any probe ends on one; a ferromagnet if some
/// positive root is linearly stable. Without a cycle, an undecided probe
/// leaves the whole cell undecided, as does an unstable origin with
/// nothing else attracting.
pub fn phase_rule(x: Exponent, origin_stable: bool, fm_stable: bool, verdicts: &[VerdictKind]) -> Phase {
    let lc = verdicts.contains(&VerdictKind::LimitCycle);
    if lc {
        return match (fm_stable, origin_stable) {
            (true, _) => Phase::FmLc,
            (false, false) if x.get() == 2 => Phase::Lc,
            (false, _) => Phase::PmLc,
        };
    }
    if verdicts.contains(&VerdictKind::Undecided) {
        return Phase::Undecided;
    }
    match (fm_stable, origin_stable) {
        (true, _) => Phase::Fm,
        (false, true) => Phase::Pm,
        (false, false) => Phase::Undecided,
    }
}

fn probe_verdict(params: &ModelParams, probe: [f64; 2], config: &SweepConfig) -> VerdictKind {
    let s0 = OverlapState::single(probe[0], probe[1], 1);
    // Divergence or a too-short run are reported as undecided, not errors.
    integrate(&s0, params, &config.integration())
        .and_then(|tr| classify_trajectory(&tr, &config.classify()))
        .map_or(VerdictKind::Undecided, |v| v.kind)
}

/// Analytic and simulated classification of one grid point.
pub fn classify_cell(t: f64, omega: f64, config: &SweepConfig) -> Result<PhaseCell> {
    let params = ModelParams::from_temperature(config.x, 1, t, omega)?;
    let roots = find_fixed_points(&params)?;
    let origin_stable = roots.iter().find(|r| r.m_z == 0.0).is_some_and(|r| r.class.is_stable());
    let positive: Vec<_> = roots.iter().filter(|r| r.m_z > 0.0).collect();
    let largest_root_class = positive.last().map(|r| r.class);
    let fm_stable = positive.iter().any(|r| r.class.is_stable());

    let verdicts: Vec<VerdictKind> = config.probes.iter().map(|&pr| probe_verdict(&params, pr, config)).collect();
    let phase = phase_rule(params.x, origin_stable, fm_stable, &verdicts);
    Ok(PhaseCell {
        t,
        omega,
        n_fixed_points: roots.len(),
        origin_stable,
        largest_root_class,
        far_verdict: verdicts[0],
        near_verdict: verdicts.get(1).copied().unwrap_or(verdicts[0]),
        extra_verdicts: verdicts.iter().skip(2).copied().collect(),
        phase,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseMap {
    pub grid: GridSpec,
    pub config: SweepConfig,
    /// Row-major, temperature outer and Ω inner.
    pub cells: Vec<PhaseCell>,
    pub boundary: BoundaryCurve,
}

impl PhaseMap {
    pub fn cell(&self, i_t: usize, j_omega: usize) -> &PhaseCell {
        &self.cells[i_t * self.grid.n_omega() + j_omega]
    }

    pub fn count(&self, phase: Phase) -> usize {
        self.cells.iter().filter(|c| c.phase == phase).count()
    }
}

/// Classifies every grid cell in parallel on a pool of `config.threads`
/// workers; results are gathered by cell index.
pub fn sweep(config: &SweepConfig) -> Result<PhaseMap> {
    config.validate()?;
    let grid = config.grid()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let x = config.exponent()?;
    let (cells, boundary) = pool.install(|| {
        let cells = (0..grid.len())
            .into_par_iter()
            .map(|k| classify_cell(grid.t(k / grid.n_omega()), grid.omega(k % grid.n_omega()), config))
            .collect::<Result<Vec<_>>>();
        (cells, BoundaryCurve::sample(x, &grid.omega_values()))
    });
    Ok(PhaseMap { grid, config: config.clone(), cells: cells?, boundary })
}

/// One row per cell: `T,omega,n_fixed_points,origin_stable,phase,far_verdict,near_verdict`.
pub fn write_phase_csv<W: Write>(map: &PhaseMap, mut w: W) -> Result<()> {
    writeln!(w, "T,omega,n_fixed_points,origin_stable,phase,far_verdict,near_verdict")?;
    for c in &map.cells {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            c.t, c.omega, c.n_fixed_points, c.origin_stable, c.phase, c.far_verdict, c.near_verdict
        )?;
    }
    Ok(())
}

pub fn emit_phase_csv(map: &PhaseMap, path: &std::path::Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_phase_csv(map, &mut w)?;
    w.flush()?;
    Ok(())
}
