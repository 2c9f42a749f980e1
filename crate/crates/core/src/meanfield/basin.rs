use serde::{Deserialize, Serialize};

use super::{classify_trajectory, integrate, ClassifySettings, IntegrationSettings, ModelParams, OverlapState};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinSettings {
    /// Unit direction `(m_z, m_y)` along which initial conditions are placed.
    pub direction: [f64; 2],
    pub tol: f64,
    pub r_max: f64,
    /// Equal steps of the outward scan that brackets the first escape.
    pub scan_steps: usize,
    pub integration: IntegrationSettings,
    pub classify: ClassifySettings,
}

impl Default for BasinSettings {
    fn default() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Self {
            direction: [s, -s],
            tol: 1e-4,
            r_max: 3.0,
            scan_steps: 60,
            integration: IntegrationSettings { dt: 1e-2, t_max: 200.0, stride: 5 },
            classify: ClassifySettings::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasinRadius {
    pub radius: f64,
    /// Set when every start up to `r_max` still reaches the origin.
    pub saturated: bool,
}

fn reaches_origin(params: &ModelParams, settings: &BasinSettings, r: f64) -> Result<bool> {
    let [dz, dy] = settings.direction;
    let s0 = OverlapState::single(r * dz, r * dy, 1);
    let tr = integrate(&s0, params, &settings.integration)?;
    let v = classify_trajectory(&tr, &settings.classify)?;
    Ok(v.converged_to_origin(settings.classify.origin_eps))
}

/// Smallest distance along `direction` at which trajectories stop
/// converging to the origin.
///
/// Far starts can swing back into the origin's basin, so the first escape
/// is bracketed by an outward scan before bisecting.
pub fn basin_radius(params: &ModelParams, settings: &BasinSettings) -> Result<BasinRadius> {
    if params.p != 1 {
        return Err(Error::InvalidParameter(format!("basin radius is defined for p = 1, got p = {}", params.p)));
    }
    let norm = settings.direction[0].hypot(settings.direction[1]);
    if !((norm - 1.0).abs() < 1e-9) {
        return Err(Error::InvalidParameter("basin direction must be a unit vector".into()));
    }
    if !(settings.tol > 0.0 && settings.r_max > settings.tol) || settings.scan_steps == 0 {
        return Err(Error::InvalidParameter("need 0 < tol < r_max and scan_steps >= 1".into()));
    }
    let step = settings.r_max / settings.scan_steps as f64;
    let mut lo = 0.0;
    let mut hi = None;
    for k in 1..=settings.scan_steps {
        let r = k as f64 * step;
        if reaches_origin(params, settings, r)? {
            lo = r;
        } else {
            hi = Some(r);
            break;
        }
    }
    let Some(mut hi) = hi else {
        return Ok(BasinRadius { radius: settings.r_max, saturated: true });
    };
    while hi - lo > settings.tol {
        let mid = 0.5 * (lo + hi);
        if reaches_origin(params, settings, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(BasinRadius { radius: 0.5 * (lo + hi), saturated: false })
}
