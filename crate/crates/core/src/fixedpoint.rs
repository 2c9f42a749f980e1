//! Single-pattern fixed points, their linear stability, and the curves in
//! the (T, Ω) plane where the number of fixed points changes.
//!
//! With `p = 1` the fixed points satisfy `β_c M_Z = tanh(β M_Z^{x-1})` with
//! `β_c = 1 + 8Ω²` and `M_Y = -4Ω M_Z`. Linearizing around a root replaces
//! the drive by `β' δM_Z`, giving the stability matrix
//! `[[β' - 1, 2Ω], [-2Ω, -1/2]]`.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Exponent, ModelParams, Result};

pub fn beta_c(omega: f64) -> f64 {
    1.0 + 8.0 * omega * omega
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilityClass {
    Saddle,
    UnstableNode,
    UnstableSpiral,
    StableSpiral,
    StableNode,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableSpiral)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::Saddle => "Saddle",
            StabilityClass::UnstableNode => "UnstableNode",
            StabilityClass::UnstableSpiral => "UnstableSpiral",
            StabilityClass::StableSpiral => "StableSpiral",
            StabilityClass::StableNode => "StableNode",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointReport {
    pub m_z: f64,
    pub m_y: f64,
    pub eigenvalues: [Complex64; 2],
    pub class: StabilityClass,
    pub beta_prime: f64,
}

/// `β (x-1) M^{x-2} / cosh²(β M^{x-1})`, the slope of the drive at `M`.
pub fn beta_prime(m_z: f64, params: &ModelParams) -> f64 {
    let e = params.x.field_power();
    let c = (params.beta * m_z.powi(e)).cosh();
    params.beta * e as f64 * m_z.powi(e - 1) / (c * c)
}

/// Eigenvalues of `[[β' - 1, 2Ω], [-2Ω, -1/2]]`, larger real part first.
pub fn stability_eigenvalues(beta_prime: f64, omega: f64) -> [Complex64; 2] {
    let a = beta_prime - 1.0;
    let trace = a - 0.5;
    let det = -0.5 * a + 4.0 * omega * omega;
    let disc = Complex64::new(trace * trace - 4.0 * det, 0.0).sqrt();
    let half = Complex64::new(0.5 * trace, 0.0);
    [half + 0.5 * disc, half - 0.5 * disc]
}

pub fn classify_eigenvalues(eig: &[Complex64; 2]) -> StabilityClass {
    let [l1, l2] = *eig;
    if l1.im != 0.0 || l2.im != 0.0 {
        if l1.re > 0.0 {
            StabilityClass::UnstableSpiral
        } else {
            StabilityClass::StableSpiral
        }
    } else {
        let (hi, lo) = (l1.re.max(l2.re), l1.re.min(l2.re));
        if hi > 0.0 && lo < 0.0 {
            StabilityClass::Saddle
        } else if hi > 0.0 {
            StabilityClass::UnstableNode
        } else {
            StabilityClass::StableNode
        }
    }
}

fn report(m_z: f64, params: &ModelParams) -> FixedPointReport {
    let bp = beta_prime(m_z, params);
    let eigenvalues = stability_eigenvalues(bp, params.omega);
    FixedPointReport {
        m_z,
        m_y: -4.0 * params.omega * m_z,
        eigenvalues,
        class: classify_eigenvalues(&eigenvalues),
        beta_prime: bp,
    }
}

/// Resolution of the sign-change scan used by [`find_fixed_points_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    /// Cells across the full interval `[-1/β_c, 1/β_c]`.
    pub cells: usize,
    pub tol: f64,
}

impl Default for RootScan {
    fn default() -> Self {
        Self { cells: 10_000, tol: 1e-12 }
    }
}

/// `tanh(β M^{x-1}) - β_c M`.
pub fn self_consistency_residual(m: f64, params: &ModelParams) -> f64 {
    (params.beta * m.powi(params.x.field_power())).tanh() - beta_c(params.omega) * m
}

fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All fixed points of the single-pattern dynamics, sorted by `M_Z`.
pub fn find_fixed_points(params: &ModelParams) -> Result<Vec<FixedPointReport>> {
    find_fixed_points_with(params, &RootScan::default())
}

pub fn find_fixed_points_with(params: &ModelParams, scan: &RootScan) -> Result<Vec<FixedPointReport>> {
    if params.p != 1 {
        return Err(Error::InvalidParameter(format!(
            "fixed-point enumeration is implemented for p = 1, got p = {}",
            params.p
        )));
    }
    if scan.cells < 2 {
        return Err(Error::InvalidParameter("root scan needs at least two cells".into()));
    }
    let g = |m: f64| self_consistency_residual(m, params);
    let bound = 1.0 / beta_c(params.omega);
    // Even x makes g odd, so the positive half is scanned and mirrored.
    let half_cells = (scan.cells / 2).max(1);
    let h = bound / half_cells as f64;
    let mut positive = Vec::new();
    let mut prev = g(h);
    if prev == 0.0 {
        positive.push(h);
    }
    for k in 2..=half_cells {
        let m = k as f64 * h;
        let cur = g(m);
        if cur == 0.0 {
            positive.push(m);
        } else if prev != 0.0 && (cur < 0.0) != (prev < 0.0) {
            positive.push(bisect(g, m - h, m, scan.tol));
        }
        prev = cur;
    }
    let mut roots: Vec<f64> = positive.iter().rev().map(|m| -m).collect();
    roots.push(0.0);
    roots.extend(positive);
    Ok(roots.into_iter().map(|m| report(m, params)).collect())
}

/// The five stability regimes of the origin at `x = 2`, numbered as in the
/// standard open quantum Hopfield analysis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OriginCondition {
    /// β > β_c: saddle.
    Saddle = 1,
    /// Unstable node.
    UnstableNode = 2,
    /// Unstable spiral; the limit-cycle regime.
    UnstableSpiral = 3,
    StableSpiral = 4,
    StableNode = 5,
}

impl OriginCondition {
    pub fn number(self) -> u8 {
        self as u8
    }

    pub fn stability_class(self) -> StabilityClass {
        match self {
            OriginCondition::Saddle => StabilityClass::Saddle,
            OriginCondition::UnstableNode => StabilityClass::UnstableNode,
            OriginCondition::UnstableSpiral => StabilityClass::UnstableSpiral,
            OriginCondition::StableSpiral => StabilityClass::StableSpiral,
            OriginCondition::StableNode => StabilityClass::StableNode,
        }
    }
}

/// Condition label for the origin at `x = 2`. Ties on a boundary go to the
/// lower-numbered condition.
pub fn classify_origin_x2(beta: f64, omega: f64) -> OriginCondition {
    if beta >= beta_c(omega) {
        OriginCondition::Saddle
    } else if beta >= 1.5 {
        if beta >= 4.0 * omega + 0.5 {
            OriginCondition::UnstableNode
        } else {
            OriginCondition::UnstableSpiral
        }
    } else if (beta - 0.5).abs() <= 4.0 * omega {
        OriginCondition::StableSpiral
    } else {
        OriginCondition::StableNode
    }
}

/// `T = 1/(1 + 8Ω²)`, where the origin stops being the only fixed point at `x = 2`.
pub fn boundary_x2(omega: f64) -> f64 {
    1.0 / beta_c(omega)
}

/// Which tangency of `β_c M` and `tanh(β M^{x-1})`: `Plus` touches at a
/// local maximum of the residual (the larger of the two `M` solutions for
/// `x = 4`), `Minus` at a local minimum, `Single` when the tangency sits at
/// the origin (`x = 2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
    Single,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Plus => "plus",
            Branch::Minus => "minus",
            Branch::Single => "single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tangency {
    pub beta: f64,
    pub m_z: f64,
    pub branch: Branch,
}

impl Tangency {
    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangencySettings {
    pub cells: usize,
    pub beta_tol: f64,
    pub beta_max: f64,
}

impl Default for TangencySettings {
    fn default() -> Self {
        Self { cells: 10_000, beta_tol: 1e-8, beta_max: 1e8 }
    }
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> (f64, f64) {
    let r = 0.5 * (5.0_f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if b - a < 1e-15 * b.abs().max(1e-300) {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let m = 0.5 * (a + b);
    (m, f(m))
}

/// Maximum of the residual on `(0, 1/β_c]`: dense scan, then golden-section
/// refinement around the best cell.
fn residual_max(params: &ModelParams, cells: usize) -> (f64, f64) {
    let bound = 1.0 / beta_c(params.omega);
    let h = bound / cells as f64;
    let g = |m: f64| self_consistency_residual(m, params);
    let (mut best_k, mut best) = (1, g(h));
    for k in 2..=cells {
        let v = g(k as f64 * h);
        if v > best {
            best = v;
            best_k = k;
        }
    }
    let lo = (best_k - 1) as f64 * h;
    let hi = ((best_k + 1) as f64 * h).min(bound);
    let (m, v) = golden_max(g, lo.max(f64::MIN_POSITIVE), hi);
    if v > best {
        (m, v)
    } else {
        (best_k as f64 * h, best)
    }
}

/// Smallest β (largest T) at which `tanh(β M^{x-1}) = β_c M` gains a
/// positive root, found by bisection on β over a dense scan in M. Returns
/// `None` if no tangency exists below `beta_max`.
pub fn tangency(omega: f64, x: Exponent, settings: &TangencySettings) -> Option<Tangency> {
    let bc = beta_c(omega);
    let params = |beta: f64| ModelParams { x, p: 1, beta, omega };
    let has_root = |beta: f64| residual_max(&params(beta), settings.cells).1 >= 0.0;
    // For β <= β_c, tanh(βM^{x-1}) < βM^{x-1} <= β_c M on (0, 1/β_c].
    let mut lo = bc;
    let mut hi = 2.0 * bc;
    while !has_root(hi) {
        lo = hi;
        hi *= 2.0;
        if hi > settings.beta_max {
            return None;
        }
    }
    while hi - lo > settings.beta_tol {
        let mid = 0.5 * (lo + hi);
        if has_root(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let (m, _) = residual_max(&params(hi), settings.cells);
    let branch = if x.get() == 2 {
        Branch::Single
    } else {
        let p = params(hi);
        let d = 1e-6 * m;
        let curv = self_consistency_residual(m + d, &p) - 2.0 * self_consistency_residual(m, &p)
            + self_consistency_residual(m - d, &p);
        if curv < 0.0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    };
    Some(Tangency { beta: hi, m_z: m, branch })
}

/// Tangency boundary for `x = 4`.
pub fn boundary_x4(omega: f64) -> Option<Tangency> {
    tangency(omega, Exponent::new(4).unwrap(), &TangencySettings::default())
}

/// Closed-form `x = 4` tangency: solves
/// `√y = tanh(β y^{3/2} / β_c³)` with `y = (1 ± √(1 - 4β_c³/3β)) / 2` for
/// the smallest β on the requested branch.
pub fn boundary_x4_closed_form(omega: f64, branch: Branch) -> Option<f64> {
    let bc = beta_c(omega);
    let bc3 = bc * bc * bc;
    let sign = match branch {
        Branch::Plus => 1.0,
        Branch::Minus => -1.0,
        Branch::Single => return None,
    };
    let h = |beta: f64| {
        let y = 0.5 * (1.0 + sign * (1.0 - 4.0 * bc3 / (3.0 * beta)).max(0.0).sqrt());
        y.sqrt() - (beta / bc3 * y.powf(1.5)).tanh()
    };
    let b0 = 4.0 * bc3 / 3.0;
    let mut prev_beta = b0 * (1.0 + 1e-12);
    let mut prev = h(prev_beta);
    let mut beta = prev_beta;
    for _ in 0..4000 {
        beta *= 1.002;
        let cur = h(beta);
        if (cur < 0.0) != (prev < 0.0) {
            return Some(bisect(h, prev_beta, beta, 1e-12 * beta));
        }
        prev_beta = beta;
        prev = cur;
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySample {
    pub omega: f64,
    pub t_boundary: f64,
    pub branch: Branch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryCurve {
    pub x: Exponent,
    pub samples: Vec<BoundarySample>,
}

impl BoundaryCurve {
    /// Samples the fixed-point-count boundary at the given Ω values. `x = 2`
    /// uses the closed form; larger x use the numeric tangency solver. Ω
    /// values without a tangency are skipped.
    pub fn sample(x: Exponent, omegas: &[f64]) -> Self {
        use rayon::prelude::*;
        let mut omegas = omegas.to_vec();
        omegas.sort_by(f64::total_cmp);
        let samples = omegas
            .par_iter()
            .filter_map(|&omega| {
                if x.get() == 2 {
                    Some(BoundarySample { omega, t_boundary: boundary_x2(omega), branch: Branch::Single })
                } else {
                    tangency(omega, x, &TangencySettings::default()).map(|t| BoundarySample {
                        omega,
                        t_boundary: t.temperature(),
                        branch: t.branch,
                    })
                }
            })
            .collect();
        Self { x, samples }
    }

    /// Linear interpolation of T at `omega`, if inside the sampled range.
    pub fn t_at(&self, omega: f64) -> Option<f64> {
        let s = &self.samples;
        if s.is_empty() || omega < s[0].omega || omega > s[s.len() - 1].omega {
            return None;
        }
        let k = s.partition_point(|p| p.omega < omega);
        if k == 0 || s[k].omega == omega {
            return Some(s[k].t_boundary);
        }
        let (a, b) = (s[k - 1], s[k]);
        let f = (omega - a.omega) / (b.omega - a.omega);
        Some(a.t_boundary + f * (b.t_boundary - a.t_boundary))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "omega,T_boundary,branch")?;
        for s in &self.samples {
            writeln!(w, "{},{},{}", s.omega, s.t_boundary, s.branch.as_str())?;
        }
        Ok(())
    }
}

/// Writes one JSON object per fixed point.
pub fn write_fixed_points_jsonl<W: Write>(reports: &[FixedPointReport], mut w: W) -> Result<()> {
    for r in reports {
        let line = serde_json::json!({
            "m_z": r.m_z,
            "m_y": r.m_y,
            "eigenvalues": [[r.eigenvalues[0].re, r.eigenvalues[0].im], [r.eigenvalues[1].re, r.eigenvalues[1].im]],
            "class": r.class.as_str(),
            "beta_prime": r.beta_prime,
        });
        writeln!(w, "{line}")?;
    }
    Ok(())
}
