//! Mean-field overlap dynamics.
//!
//! The state is the pair of overlap vectors `(M_Z^μ, M_Y^μ)`, evolving as
//!
//! ```text
//! dM_Z^μ/dt = -M_Z^μ + 2Ω M_Y^μ + ⟨⟨ξ^μ tanh(β Σ_ν ξ^ν (M_Z^ν)^{x-1})⟩⟩
//! dM_Y^μ/dt = -2Ω M_Z^μ - M_Y^μ / 2
//! ```
//!
//! where `⟨⟨·⟩⟩` averages over unbiased pattern signs. Time is measured in
//! units of the dissipator rate.

mod basin;
mod classify;

pub use basin::{basin_radius, BasinRadius, BasinSettings};
pub use classify::{classify_trajectory, ClassifySettings, TrajectoryVerdict, VerdictKind, WindowDiagnostics};

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::rk4::{step_count, Rk4};
use crate::{Error, Exponent, Result};

/// Largest p for which the pattern average is enumerated exactly.
pub const DEFAULT_P_MAX: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub x: Exponent,
    pub p: usize,
    pub beta: f64,
    pub omega: f64,
}

impl ModelParams {
    pub fn new(x: u32, p: usize, beta: f64, omega: f64) -> Result<Self> {
        let x = Exponent::new(x)?;
        if p == 0 {
            return Err(Error::InvalidParameter("p must be at least 1".into()));
        }
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidParameter(format!("beta must be positive and finite, got {beta}")));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter(format!("omega must be non-negative, got {omega}")));
        }
        Ok(Self { x, p, beta, omega })
    }

    pub fn from_temperature(x: u32, p: usize, temperature: f64, omega: f64) -> Result<Self> {
        if !(temperature.is_finite() && temperature > 0.0) {
            return Err(Error::InvalidParameter(format!("temperature must be positive, got {temperature}")));
        }
        Self::new(x, p, 1.0 / temperature, omega)
    }

    pub fn temperature(&self) -> f64 {
        1.0 / self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapState {
    pub m_z: Vec<f64>,
    pub m_y: Vec<f64>,
}

impl OverlapState {
    pub fn new(m_z: Vec<f64>, m_y: Vec<f64>) -> Result<Self> {
        if m_z.len() != m_y.len() {
            return Err(Error::DimensionMismatch { expected: m_z.len(), got: m_y.len() });
        }
        if m_z.is_empty() {
            return Err(Error::InvalidParameter("overlap state needs at least one pattern".into()));
        }
        Ok(Self { m_z, m_y })
    }

    pub fn zeros(p: usize) -> Self {
        Self { m_z: vec![0.0; p], m_y: vec![0.0; p] }
    }

    /// Single-pattern state `(m_z, m_y)`; with `p > 1` the remaining
    /// overlaps start at zero.
    pub fn single(m_z: f64, m_y: f64, p: usize) -> Self {
        let mut s = Self::zeros(p);
        s.m_z[0] = m_z;
        s.m_y[0] = m_y;
        s
    }

    pub fn p(&self) -> usize {
        self.m_z.len()
    }

    pub fn negated(&self) -> Self {
        Self {
            m_z: self.m_z.iter().map(|v| -v).collect(),
            m_y: self.m_y.iter().map(|v| -v).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.m_z.iter().chain(&self.m_y).map(|v| v * v).sum::<f64>().sqrt()
    }

    fn to_flat(&self) -> Vec<f64> {
        self.m_z.iter().chain(&self.m_y).copied().collect()
    }

    fn from_flat(flat: &[f64]) -> Self {
        let p = flat.len() / 2;
        Self { m_z: flat[..p].to_vec(), m_y: flat[p..].to_vec() }
    }
}

fn check_p(p: usize) -> Result<()> {
    if p > DEFAULT_P_MAX {
        return Err(Error::TooManyPatterns { p, max: DEFAULT_P_MAX });
    }
    Ok(())
}

/// Pattern-averaged drive `2^{-p} Σ_{ξ∈{±1}^p} ξ^μ tanh(β Σ_ν ξ^ν (M_Z^ν)^{x-1})`.
pub fn drive_term(m_z: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
    if m_z.len() != params.p {
        return Err(Error::DimensionMismatch { expected: params.p, got: m_z.len() });
    }
    check_p(params.p)?;
    let mut out = vec![0.0; params.p];
    drive_into(m_z, params, &mut vec![0.0; params.p], &mut out);
    Ok(out)
}

// `fields` is scratch of length p.
fn drive_into(m_z: &[f64], params: &ModelParams, fields: &mut [f64], out: &mut [f64]) {
    let e = params.x.field_power();
    let p = m_z.len();
    if p == 1 {
        out[0] = (params.beta * m_z[0].powi(e)).tanh();
        return;
    }
    for (f, m) in fields.iter_mut().zip(m_z) {
        *f = m.powi(e);
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    // Each sign vector and its global negation contribute equally (tanh is
    // odd), so only vectors with ξ^1 = +1 are enumerated.
    let half = 1usize << (p - 1);
    for mask in 0..half {
        let sign = |nu: usize| if nu == 0 || mask >> (nu - 1) & 1 == 0 { 1.0 } else { -1.0 };
        let arg: f64 = (0..p).map(|nu| sign(nu) * fields[nu]).sum();
        let t = (params.beta * arg).tanh();
        for (mu, o) in out.iter_mut().enumerate() {
            *o += sign(mu) * t;
        }
    }
    let inv = 1.0 / half as f64;
    out.iter_mut().for_each(|v| *v *= inv);
}

fn rhs_flat(y: &[f64], params: &ModelParams, fields: &mut [f64], dy: &mut [f64]) {
    let p = y.len() / 2;
    let (m_z, m_y) = y.split_at(p);
    let (dz, dm_y) = dy.split_at_mut(p);
    drive_into(m_z, params, fields, dz);
    let w = 2.0 * params.omega;
    for mu in 0..p {
        dz[mu] += -m_z[mu] + w * m_y[mu];
        dm_y[mu] = -w * m_z[mu] - 0.5 * m_y[mu];
    }
}

/// Time derivative of the overlap state.
pub fn rhs(state: &OverlapState, params: &ModelParams) -> Result<OverlapState> {
    if state.p() != params.p {
        return Err(Error::DimensionMismatch { expected: params.p, got: state.p() });
    }
    check_p(params.p)?;
    let y = state.to_flat();
    let mut dy = vec![0.0; y.len()];
    rhs_flat(&y, params, &mut vec![0.0; params.p], &mut dy);
    Ok(OverlapState::from_flat(&dy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrationSettings {
    pub dt: f64,
    pub t_max: f64,
    /// Record every `stride`-th step (the initial state is always recorded).
    pub stride: usize,
}

impl Default for IntegrationSettings {
    fn default() -> Self {
        Self { dt: 1e-2, t_max: 500.0, stride: 1 }
    }
}

impl IntegrationSettings {
    fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > self.dt) {
            return Err(Error::InvalidParameter(format!("t_max ({}) must exceed dt ({})", self.t_max, self.dt)));
        }
        if self.stride == 0 {
            return Err(Error::InvalidParameter("record stride must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<OverlapState>,
    pub params: ModelParams,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> &OverlapState {
        self.states.last().expect("trajectory always holds the initial state")
    }

    /// CSV with header `t,m_z_1..m_z_p,m_y_1..m_y_p`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let p = self.params.p;
        let mut header = vec!["t".to_string()];
        header.extend((1..=p).map(|mu| format!("m_z_{mu}")));
        header.extend((1..=p).map(|mu| format!("m_y_{mu}")));
        writeln!(w, "{}", header.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            write!(w, "{t}")?;
            for v in s.m_z.iter().chain(&s.m_y) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Fixed-step RK4 integration of the overlap equations.
pub fn integrate(state0: &OverlapState, params: &ModelParams, settings: &IntegrationSettings) -> Result<Trajectory> {
    settings.validate()?;
    if state0.p() != params.p {
        return Err(Error::DimensionMismatch { expected: params.p, got: state0.p() });
    }
    check_p(params.p)?;
    let steps = step_count(settings.dt, settings.t_max);
    let mut y = state0.to_flat();
    let mut rk = Rk4::new(y.len());
    let mut fields = vec![0.0; params.p];
    let cap = steps / settings.stride + 2;
    let mut times = Vec::with_capacity(cap);
    let mut states = Vec::with_capacity(cap);
    times.push(0.0);
    states.push(state0.clone());
    for k in 1..=steps {
        rk.step(&mut y, settings.dt, |y, dy| rhs_flat(y, params, &mut fields, dy));
        if k % settings.stride == 0 || k == steps {
            let t = k as f64 * settings.dt;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { t });
            }
            times.push(t);
            states.push(OverlapState::from_flat(&y));
        }
    }
    Ok(Trajectory { times, states, params: *params })
}
