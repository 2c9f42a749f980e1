use std::path::PathBuf;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, ValueEnum};
use log::info;
use serde::Serialize;
use serde_json::json;

use qhop_core::fixedpoint::find_fixed_points;
use qhop_core::meanfield::{
    basin_radius, classify_trajectory, integrate, BasinSettings, ClassifySettings, IntegrationSettings,
};
use qhop_core::phasemap::{emit_trajectory_image, SweepConfig};
use qhop_core::{ModelParams, OverlapState};

use crate::output::{summary, ConfigError, OutDir};
use crate::run_sweep;

#[derive(Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    /// x = 2 phase diagram.
    Fig1,
    /// x = 4 phase diagram.
    Fig2,
    /// x = 4 phase diagram, low-temperature zoom.
    Fig3,
    /// Phase-plane orbits for each phase.
    Fig4,
    /// Basin of the origin growing with x.
    Fig5,
}

#[derive(Args, Serialize)]
pub struct ReproArgs {
    #[arg(value_enum)]
    figure: Figure,
    /// Coarser grids and shorter horizons, for smoke tests.
    #[arg(long)]
    quick: bool,
    #[arg(long, default_value_t = 0)]
    threads: usize,
    #[arg(long, default_value = "qhop-out/repro")]
    out: PathBuf,
}

fn phase_preset(fig: Figure, quick: bool) -> SweepConfig {
    let n = if quick { 10 } else { 50 };
    let mut c = match fig {
        Figure::Fig1 => SweepConfig::new(2, (0.05, 1.5, n), (0.0, 1.5, n)),
        Figure::Fig2 => SweepConfig::new(4, (0.05, 1.5, n), (0.0, 1.5, n)),
        _ => SweepConfig::new(4, (0.02, 0.3, n), (0.0, 1.5, n)),
    };
    if quick {
        c.t_horizon = 100.0;
    }
    c
}

/// (label, x, T, Ω) for each orbit panel.
const PANELS: [(&str, u32, f64, f64); 4] = [
    ("x4_fm", 4, 0.2, 0.05),
    ("x4_pm", 4, 1.0, 1.0),
    ("x4_pm_lc", 4, 0.05, 1.0),
    ("x2_lc", 2, 0.5, 0.6),
];

fn fan_starts() -> Vec<OverlapState> {
    let mut starts: Vec<OverlapState> = (0..8)
        .map(|k| {
            let a = std::f64::consts::FRAC_PI_4 * k as f64 + 0.1;
            OverlapState::single(3.0 * a.cos(), 3.0 * a.sin(), 1)
        })
        .collect();
    starts.push(OverlapState::single(0.05, -0.05, 1));
    starts.push(OverlapState::single(-0.05, 0.05, 1));
    starts
}

fn orbit_panels(out: &OutDir, quick: bool) -> Result<serde_json::Value> {
    let settings = IntegrationSettings { dt: 1e-2, t_max: if quick { 50.0 } else { 300.0 }, stride: 5 };
    let mut panels = Vec::new();
    for (label, x, t, omega) in PANELS {
        let params = ModelParams::from_temperature(x, 1, t, omega).map_err(ConfigError::from)?;
        let trajs = fan_starts().iter().map(|s| integrate(s, &params, &settings)).collect::<qhop_core::Result<Vec<_>>>()?;
        let fps = find_fixed_points(&params)?;
        emit_trajectory_image(&trajs, &fps, &out.path(&format!("{label}.png")), 512)?;
        out.write(&format!("{label}.csv"), |w| {
            use std::io::Write;
            writeln!(w, "start,t,m_z,m_y")?;
            for (k, tr) in trajs.iter().enumerate() {
                for (time, s) in tr.times.iter().zip(&tr.states) {
                    writeln!(w, "{k},{time},{},{}", s.m_z[0], s.m_y[0])?;
                }
            }
            Ok(())
        })?;
        let verdicts: Vec<Option<&str>> = trajs
            .iter()
            .map(|tr| classify_trajectory(tr, &ClassifySettings::default()).ok().map(|v| v.kind.as_str()))
            .collect();
        panels.push(json!({ "panel": label, "x": x, "T": t, "omega": omega, "verdicts": verdicts }));
    }
    Ok(json!(panels))
}

fn basin_growth(out: &OutDir, quick: bool) -> Result<serde_json::Value> {
    let (beta, omega) = (8.0, 0.1);
    let mut settings = BasinSettings::default();
    if quick {
        settings.scan_steps = 15;
        settings.tol = 1e-2;
    }
    let mut rows = Vec::new();
    for x in [4u32, 6, 8] {
        let params = ModelParams::new(x, 1, beta, omega).map_err(ConfigError::from)?;
        info!("basin radius at x={x}");
        let r = basin_radius(&params, &settings)?;
        let [dz, dy] = settings.direction;
        let starts: Vec<OverlapState> =
            (1..=12).map(|k| 0.25 * k as f64).map(|s| OverlapState::single(s * dz, s * dy, 1)).collect();
        let trajs = starts.iter().map(|s| integrate(s, &params, &settings.integration)).collect::<qhop_core::Result<Vec<_>>>()?;
        emit_trajectory_image(&trajs, &find_fixed_points(&params)?, &out.path(&format!("x{x}.png")), 512)?;
        rows.push((x, r));
    }
    out.write("basin.csv", |w| {
        use std::io::Write;
        writeln!(w, "x,beta,omega,radius,saturated")?;
        for (x, r) in &rows {
            writeln!(w, "{x},{beta},{omega},{},{}", r.radius, r.saturated)?;
        }
        Ok(())
    })?;
    Ok(json!(rows.iter().map(|(x, r)| json!({ "x": x, "radius": r.radius, "saturated": r.saturated })).collect::<Vec<_>>()))
}

pub fn run(a: &ReproArgs) -> Result<()> {
    let started = Instant::now();
    let name = match a.figure {
        Figure::Fig1 => "fig1",
        Figure::Fig2 => "fig2",
        Figure::Fig3 => "fig3",
        Figure::Fig4 => "fig4",
        Figure::Fig5 => "fig5",
    };
    let out = OutDir::create(&a.out.join(name))?;
    let (result, config) = match a.figure {
        Figure::Fig1 | Figure::Fig2 | Figure::Fig3 => {
            let mut cfg = phase_preset(a.figure, a.quick);
            cfg.threads = a.threads;
            (run_sweep(&cfg, &out, if a.quick { 12 } else { 6 })?, json!(cfg))
        }
        Figure::Fig4 => (orbit_panels(&out, a.quick)?, json!({ "panels": PANELS, "quick": a.quick })),
        Figure::Fig5 => (basin_growth(&out, a.quick)?, json!({ "beta": 8.0, "omega": 0.1, "x": [4, 6, 8], "quick": a.quick })),
    };
    out.run_json(&format!("repro {name}"), &config, started)?;
    summary(json!({ "command": "repro", "figure": name, "result": result, "out": out.root() }));
    Ok(())
}
