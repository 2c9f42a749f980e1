use serde::{Deserialize, Serialize};

use super::{OverlapState, Trajectory};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifySettings {
    /// Leading fraction of the run discarded as transient.
    pub transient_fraction: f64,
    /// Number of equal windows the remainder is split into.
    pub windows: usize,
    /// Terminal-window state diameter below which the run has converged.
    pub conv_eps: f64,
    /// Peak-to-peak amplitude of `M_Z^1` above which a cycle is considered.
    pub lc_eps: f64,
    /// Relative tolerance for window-to-window amplitude and mean agreement.
    pub agreement: f64,
    /// A converged point closer than this to the origin counts as the origin.
    pub origin_eps: f64,
}

impl Default for ClassifySettings {
    fn default() -> Self {
        Self {
            transient_fraction: 0.5,
            windows: 4,
            conv_eps: 1e-6,
            lc_eps: 1e-3,
            agreement: 0.05,
            origin_eps: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictKind {
    ConvergedToPoint,
    LimitCycle,
    Undecided,
}

impl VerdictKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VerdictKind::ConvergedToPoint => "ConvergedToPoint",
            VerdictKind::LimitCycle => "LimitCycle",
            VerdictKind::Undecided => "Undecided",
        }
    }
}

impl std::fmt::Display for VerdictKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-window statistics behind a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDiagnostics {
    /// Peak-to-peak amplitude of `M_Z^1` in each analysis window.
    pub amplitudes: Vec<f64>,
    /// Bounding-box diagonal of the full state in each window.
    pub diameters: Vec<f64>,
    /// Mean of `M_Z^1` over whole periods in the last two windows, when a
    /// period could be measured.
    pub period_means: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub kind: VerdictKind,
    pub terminal_point: Option<OverlapState>,
    pub amplitude: Option<f64>,
    pub period: Option<f64>,
    pub diagnostics: WindowDiagnostics,
}

impl TrajectoryVerdict {
    pub fn converged_to_origin(&self, origin_eps: f64) -> bool {
        self.kind == VerdictKind::ConvergedToPoint
            && self.terminal_point.as_ref().is_some_and(|s| s.norm() < origin_eps)
    }
}

const MIN_WINDOW_SAMPLES: usize = 8;

fn mz(states: &[OverlapState]) -> impl Iterator<Item = f64> + '_ {
    states.iter().map(|s| s.m_z[0])
}

fn peak_to_peak(values: impl Iterator<Item = f64>) -> f64 {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    hi - lo
}

fn diameter(states: &[OverlapState]) -> f64 {
    let p = states[0].p();
    let mut acc = 0.0;
    for mu in 0..p {
        let rz = peak_to_peak(states.iter().map(|s| s.m_z[mu]));
        let ry = peak_to_peak(states.iter().map(|s| s.m_y[mu]));
        acc += rz * rz + ry * ry;
    }
    acc.sqrt()
}

/// Upward crossings of the window mean, linearly interpolated in time.
fn upward_crossings(times: &[f64], values: &[f64]) -> Vec<f64> {
    let level = values.iter().sum::<f64>() / values.len() as f64;
    let mut out = Vec::new();
    for k in 1..values.len() {
        let (a, b) = (values[k - 1] - level, values[k] - level);
        if a < 0.0 && b >= 0.0 {
            let frac = a / (a - b);
            out.push(times[k - 1] + frac * (times[k] - times[k - 1]));
        }
    }
    out
}

/// Mean of `M_Z^1` over the whole periods inside a window, plus the period.
fn period_mean(times: &[f64], values: &[f64]) -> Option<(f64, f64)> {
    let crossings = upward_crossings(times, values);
    if crossings.len() < 2 {
        return None;
    }
    let (t0, t1) = (crossings[0], *crossings.last().unwrap());
    let period = (t1 - t0) / (crossings.len() - 1) as f64;
    // Trapezoidal mean over [t0, t1] using recorded samples.
    let mut area = 0.0;
    let mut span = 0.0;
    for k in 1..times.len() {
        let (ta, tb) = (times[k - 1].max(t0), times[k].min(t1));
        if tb <= ta {
            continue;
        }
        let lerp = |t: f64| {
            let f = (t - times[k - 1]) / (times[k] - times[k - 1]);
            values[k - 1] + f * (values[k] - values[k - 1])
        };
        area += 0.5 * (lerp(ta) + lerp(tb)) * (tb - ta);
        span += tb - ta;
    }
    (span > 0.0).then(|| (area / span, period))
}

/// Labels a trajectory as converged, limit cycle, or undecided.
///
/// After the transient cut the remainder is split into equal windows.
/// The run has converged if the last window's state diameter is below
/// `conv_eps`. It is a limit cycle if the last window's `M_Z^1` amplitude
/// exceeds `lc_eps`, agrees with the previous window's to within
/// `agreement`, and the per-period means of the two windows agree to within
/// `agreement` times the amplitude.
pub fn classify_trajectory(traj: &Trajectory, settings: &ClassifySettings) -> Result<TrajectoryVerdict> {
    if settings.windows < 2 {
        return Err(Error::InvalidParameter("classification needs at least two windows".into()));
    }
    if !(0.0..1.0).contains(&settings.transient_fraction) {
        return Err(Error::InvalidParameter("transient_fraction must lie in [0, 1)".into()));
    }
    let n = traj.len();
    let start = (n as f64 * settings.transient_fraction).floor() as usize;
    let remainder = n - start;
    let w = remainder / settings.windows;
    if w < MIN_WINDOW_SAMPLES {
        return Err(Error::TrajectoryTooShort(format!(
            "{n} samples leave {w} per analysis window (need {MIN_WINDOW_SAMPLES})"
        )));
    }
    // Windows are aligned to the end of the run.
    let first = n - w * settings.windows;
    let window = |k: usize| first + k * w..first + (k + 1) * w;

    let mut diagnostics = WindowDiagnostics { amplitudes: Vec::new(), diameters: Vec::new(), period_means: None };
    for k in 0..settings.windows {
        let states = &traj.states[window(k)];
        diagnostics.amplitudes.push(peak_to_peak(mz(states)));
        diagnostics.diameters.push(diameter(states));
    }

    let last = settings.windows - 1;
    if diagnostics.diameters[last] < settings.conv_eps {
        return Ok(TrajectoryVerdict {
            kind: VerdictKind::ConvergedToPoint,
            terminal_point: Some(traj.last().clone()),
            amplitude: None,
            period: None,
            diagnostics,
        });
    }

    let amp = diagnostics.amplitudes[last];
    let prev_amp = diagnostics.amplitudes[last - 1];
    let mut period = None;
    if amp > settings.lc_eps && (amp - prev_amp).abs() <= settings.agreement * amp {
        let stats = |k: usize| {
            let r = window(k);
            let values: Vec<f64> = mz(&traj.states[r.clone()]).collect();
            period_mean(&traj.times[r], &values)
        };
        if let (Some((mean_prev, _)), Some((mean_last, per))) = (stats(last - 1), stats(last)) {
            diagnostics.period_means = Some((mean_prev, mean_last));
            period = Some(per);
            if (mean_last - mean_prev).abs() <= settings.agreement * amp {
                return Ok(TrajectoryVerdict {
                    kind: VerdictKind::LimitCycle,
                    terminal_point: None,
                    amplitude: Some(amp),
                    period,
                    diagnostics,
                });
            }
        }
    }
    Ok(TrajectoryVerdict { kind: VerdictKind::Undecided, terminal_point: None, amplitude: Some(amp), period, diagnostics })
}
