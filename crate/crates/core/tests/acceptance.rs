//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so each criterion reports its own
//! verdict, timing and the numbers it was judged on.

mod common;

use std::time::{Duration, Instant};

use nalgebra::Matrix2;
use qhop_core::classical::{capacity_experiment, CapacityConfig, PatternSet};
use qhop_core::fixedpoint::{
    beta_c, classify_origin_x2, find_fixed_points, stability_eigenvalues, tangency, TangencySettings,
};
use qhop_core::lindblad::{evolve, DensityMatrix, EvolveSettings, OperatorSet};
use qhop_core::meanfield::{
    basin_radius, classify_trajectory, integrate, BasinSettings, ClassifySettings, IntegrationSettings, VerdictKind,
};
use qhop_core::phasemap::{sweep, write_phase_csv, Phase, SweepConfig};
use qhop_core::{Exponent, ModelParams, OverlapState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn x(v: u32) -> Exponent {
    Exponent::new(v).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_x2_tangency() -> Outcome {
    let mut worst = 0.0_f64;
    for omega in [0.0, 0.25, 0.5, 1.0] {
        let t = tangency(omega, x(2), &TangencySettings::default()).ok_or(format!("no tangency at Ω={omega}"))?;
        worst = worst.max((t.beta - beta_c(omega)).abs());
    }
    ensure(worst < 1e-6, || format!("max |β* - β_c| = {worst:e}"))?;
    Ok(format!("max |β* - β_c| = {worst:.2e}"))
}

fn c2_x4_origin() -> Outcome {
    let n = 10_000;
    let max_re = (0..n)
        .map(|k| {
            let omega = 10.0 * k as f64 / (n - 1) as f64;
            stability_eigenvalues(0.0, omega)[0].re
        })
        .fold(f64::NEG_INFINITY, f64::max);
    ensure(max_re < 0.0, || format!("max Re λ = {max_re}"))?;

    let settings = IntegrationSettings { dt: 1e-2, t_max: 200.0, stride: 5 };
    let classify = ClassifySettings::default();
    let mut failures = Vec::new();
    for i in 0..20 {
        let t = 0.05 + i as f64 * (1.5 - 0.05) / 19.0;
        for j in 0..20 {
            let omega = j as f64 * 1.5 / 19.0;
            let p = ModelParams::from_temperature(4, 1, t, omega).unwrap();
            let tr = integrate(&OverlapState::single(1e-3, -1e-3, 1), &p, &settings).unwrap();
            let v = classify_trajectory(&tr, &classify).unwrap();
            if !v.converged_to_origin(classify.origin_eps) {
                failures.push((t, omega));
            }
        }
    }
    ensure(failures.is_empty(), || format!("{} cells did not reach the origin: {failures:?}", failures.len()))?;
    Ok(format!("max Re λ(β'=0) = {max_re:.3} on 10^4 Ω; 400/400 near starts reach the origin"))
}

fn c3_five_roots() -> Outcome {
    let p = ModelParams::new(4, 1, 3.0, 0.0).unwrap();
    let roots: Vec<f64> = find_fixed_points(&p).unwrap().iter().map(|r| r.m_z).collect();
    let oracle = [-0.9945492510256935, -0.6253979704174505, 0.0, 0.6253979704174505, 0.9945492510256935];
    ensure(roots.len() == 5, || format!("{} roots: {roots:?}", roots.len()))?;
    let err = roots.iter().zip(oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure(err < 1e-2, || format!("roots {roots:?} off oracle by {err}"))?;
    Ok(format!("roots {:?}, max deviation {err:.1e}", roots.iter().map(|r| format!("{r:.4}")).collect::<Vec<_>>()))
}

/// Condition number from eigenvalue signs, using a general 2×2 eigen-solver.
fn condition_from_signs(beta: f64, omega: f64) -> Option<u8> {
    let m = Matrix2::new(beta - 1.0, 2.0 * omega, -2.0 * omega, -0.5);
    let ev = m.complex_eigenvalues();
    let (a, b) = (ev[0], ev[1]);
    let tol = 1e-9;
    if a.im.abs() > tol {
        if a.re.abs() < tol {
            return None;
        }
        return Some(if a.re > 0.0 { 3 } else { 4 });
    }
    let (lo, hi) = (a.re.min(b.re), a.re.max(b.re));
    if lo.abs() < tol || hi.abs() < tol || (hi - lo).abs() < tol {
        return None;
    }
    Some(match (lo > 0.0, hi > 0.0) {
        (false, true) => 1,
        (true, true) => 2,
        (false, false) => 5,
        (true, false) => unreachable!(),
    })
}

fn c4_five_conditions() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20241014);
    let (mut checked, mut skipped, mut mismatches) = (0, 0, 0);
    let mut counts = [0usize; 5];
    for _ in 0..100_000 {
        let beta = rng.gen_range(0.0..8.0);
        let omega = rng.gen_range(0.0..1.5);
        let near = |a: f64, b: f64| (a - b).abs() < 1e-6;
        if near(beta, beta_c(omega)) || near(beta, 1.5) || near((beta - 0.5).abs(), 4.0 * omega) {
            skipped += 1;
            continue;
        }
        let Some(want) = condition_from_signs(beta, omega) else {
            skipped += 1;
            continue;
        };
        checked += 1;
        let got = classify_origin_x2(beta, omega).number();
        counts[got as usize - 1] += 1;
        if got != want {
            mismatches += 1;
        }
    }
    ensure(mismatches == 0, || format!("{mismatches} mismatches out of {checked}"))?;
    ensure(counts.iter().all(|&c| c > 0), || format!("condition coverage {counts:?}"))?;
    Ok(format!("{checked} points agree ({skipped} boundary points skipped), per-condition counts {counts:?}"))
}

fn verdict(xv: u32, t: f64, omega: f64, probe: [f64; 2]) -> qhop_core::meanfield::TrajectoryVerdict {
    let p = ModelParams::from_temperature(xv, 1, t, omega).unwrap();
    let tr = integrate(&OverlapState::single(probe[0], probe[1], 1), &p, &IntegrationSettings::default()).unwrap();
    classify_trajectory(&tr, &ClassifySettings::default()).unwrap()
}

fn c5_sweep_config() -> SweepConfig {
    SweepConfig::new(4, (0.03, 0.3, 4), (0.25, 1.5, 6))
}

fn c5_limit_cycles() -> Outcome {
    let far = verdict(2, 0.5, 0.6, [3.0, -3.0]);
    let near = verdict(2, 0.5, 0.6, [0.05, -0.05]);
    ensure(far.kind == VerdictKind::LimitCycle && near.kind == VerdictKind::LimitCycle, || {
        format!("x=2 verdicts: far {}, near {}", far.kind, near.kind)
    })?;

    let map = sweep(&c5_sweep_config()).unwrap();
    let cell = map
        .cells
        .iter()
        .find(|c| c.phase == Phase::PmLc)
        .ok_or_else(|| "coarse x=4 sweep found no PM+LC cell".to_string())?;
    let far4 = verdict(4, cell.t, cell.omega, [3.0, -3.0]);
    let near4 = verdict(4, cell.t, cell.omega, [0.05, -0.05]);
    ensure(far4.kind == VerdictKind::LimitCycle, || format!("x=4 far probe {}", far4.kind))?;
    ensure(near4.converged_to_origin(1e-4), || format!("x=4 near probe {}", near4.kind))?;
    Ok(format!(
        "x=2 (T=0.5, Ω=0.6): far and near LimitCycle (amplitude {:.3}); x=4 PM+LC at (T={:.3}, Ω={:.3}): far LimitCycle, near -> origin; {} PM+LC cells in coarse sweep",
        far.amplitude.unwrap(),
        cell.t,
        cell.omega,
        map.count(Phase::PmLc)
    ))
}

fn c6_cptp() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut report = Vec::new();
    for n in [2, 4, 6] {
        let xv = [2, 4][rng.gen_range(0..2)];
        let pp = rng.gen_range(1..=2);
        let beta = rng.gen_range(0.2..4.0);
        let omega = rng.gen_range(0.0..1.5);
        let p = PatternSet::random(pp, n, &mut rng).unwrap();
        let ops = OperatorSet::new(&p, x(xv), beta, omega).unwrap();
        let rho0 = DensityMatrix::random_mixed(n, &mut rng).unwrap();
        let s = EvolveSettings { dt: 1e-3, t_max: 5.0, record_stride: 50, positivity_every: 1, ..Default::default() };
        let evo = evolve(&rho0, &ops, &p, &s).map_err(|e| format!("N={n}: {e}"))?;
        let lam = evo.min_eigenvalue.unwrap();
        ensure(evo.max_trace_error < 1e-8 && evo.max_hermiticity_error < 1e-10 && lam >= -1e-8, || {
            format!("N={n}: trace {:e}, herm {:e}, λmin {lam:e}", evo.max_trace_error, evo.max_hermiticity_error)
        })?;
        report.push(format!(
            "N={n}: tr {:.0e} herm {:.0e} λmin {:.1e}",
            evo.max_trace_error, evo.max_hermiticity_error, lam
        ));
    }
    Ok(report.join("; "))
}

fn c7_classical_limit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for n in 1..=6 {
        let xv = if n % 2 == 0 { 4 } else { 2 };
        let p = PatternSet::random(1 + n % 2, n, &mut rng).unwrap();
        let beta = rng.gen_range(0.3..3.0);
        let ops = OperatorSet::new(&p, x(xv), beta, 0.0).unwrap();
        let rho0 = DensityMatrix::random_mixed(n, &mut rng).unwrap();
        let s = EvolveSettings { dt: 1e-3, t_max: 2.0, record_stride: 250, ..Default::default() };
        let evo = evolve(&rho0, &ops, &p, &s).unwrap();
        let w = common::rate_matrix(&p, xv, beta);
        let p0 = nalgebra::DVector::from_vec(rho0.populations());
        let pt = (w * 2.0).exp() * p0;
        let sup = evo
            .final_state
            .populations()
            .iter()
            .zip(pt.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        worst = worst.max(sup);
    }
    ensure(worst < 1e-6, || format!("sup-norm gap {worst:e}"))?;
    Ok(format!("N = 1..6, sup |P_lindblad - P_markov| at t=2 is {worst:.1e}"))
}

fn c8_meanfield_trend() -> Outcome {
    let (beta, omega) = (2.0, 0.1);
    let mf = integrate(
        &OverlapState::single(1.0, 0.0, 1),
        &ModelParams::new(4, 1, beta, omega).unwrap(),
        &IntegrationSettings { dt: 1e-3, t_max: 5.0, stride: 10 },
    )
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut gaps = Vec::new();
    for n in [4, 6, 8] {
        let p = PatternSet::random(1, n, &mut rng).unwrap();
        let ops = OperatorSet::new(&p, x(4), beta, omega).unwrap();
        let rho0 = DensityMatrix::basis_state(&p.config(0)).unwrap();
        let s = EvolveSettings { dt: 1e-3, t_max: 5.0, record_stride: 10, ..Default::default() };
        let evo = evolve(&rho0, &ops, &p, &s).unwrap();
        ensure(evo.records.len() == mf.len(), || "time grids differ".into())?;
        let gap = evo
            .records
            .iter()
            .zip(&mf.states)
            .map(|(r, s)| (r.overlaps.m_z[0] - s.m_z[0]).abs())
            .fold(0.0, f64::max);
        gaps.push(gap);
    }
    let text = format!("sup gaps N=4,6,8: {:.4}, {:.4}, {:.4}", gaps[0], gaps[1], gaps[2]);
    ensure(gaps[0] > gaps[1] && gaps[1] > gaps[2], || text.clone())?;
    Ok(text)
}

fn geometric(start: f64, ratio: f64, stop: f64) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::new();
    let mut v = start;
    while v <= stop {
        let p = v.round() as usize;
        if out.last() != Some(&p) {
            out.push(p);
        }
        v *= ratio;
    }
    out
}

fn c9_capacity() -> Outcome {
    let cfg = CapacityConfig::new(500, x(2), (40..=90).step_by(5).collect(), 9);
    let r2 = capacity_experiment(&cfg).unwrap();
    let alpha = r2.estimated_capacity as f64 / 500.0;
    ensure((0.10..=0.18).contains(&alpha), || format!("x=2 capacity/N = {alpha}"))?;

    let mut small = CapacityConfig::new(30, x(4), geometric(10.0, 1.1, 700.0), 9);
    small.probes_per_trial = Some(20);
    let mut large = CapacityConfig::new(60, x(4), geometric(100.0, 1.1, 3500.0), 9);
    large.probes_per_trial = Some(20);
    let c30 = capacity_experiment(&small).unwrap().estimated_capacity;
    let c60 = capacity_experiment(&large).unwrap().estimated_capacity;
    let ratio = c60 as f64 / c30.max(1) as f64;
    ensure(ratio > 4.0, || format!("x=4 capacity(60)/capacity(30) = {c60}/{c30} = {ratio:.2}"))?;
    Ok(format!(
        "x=2 N=500 capacity {} (capacity/N = {alpha:.3}); x=4 capacity(60)/capacity(30) = {c60}/{c30} = {ratio:.2}",
        r2.estimated_capacity
    ))
}

fn c10_basin_growth() -> Outcome {
    let (beta, omega) = (8.0, 0.1);
    let mut radii = Vec::new();
    for xv in [4, 6, 8] {
        let p = ModelParams::new(xv, 1, beta, omega).unwrap();
        let fm = find_fixed_points(&p).unwrap().iter().any(|r| r.m_z > 0.0 && r.class.is_stable());
        ensure(fm, || format!("x={xv} has no stable positive root at β={beta}, Ω={omega}"))?;
        let r = basin_radius(&p, &BasinSettings::default()).unwrap();
        ensure(!r.saturated, || format!("x={xv} basin saturated"))?;
        radii.push(r.radius);
    }
    let text = format!("β={beta}, Ω={omega}: radii x=4,6,8 = {:.4}, {:.4}, {:.4}", radii[0], radii[1], radii[2]);
    ensure(radii[0] < radii[1] && radii[1] < radii[2], || text.clone())?;
    Ok(text)
}

fn c11_determinism() -> Outcome {
    let render = |threads: usize| {
        let mut c = c5_sweep_config();
        c.threads = threads;
        let mut buf = Vec::new();
        write_phase_csv(&sweep(&c).unwrap(), &mut buf).unwrap();
        buf
    };
    let (a, b) = (render(1), render(8));
    ensure(a == b, || "CSV bytes differ between 1 and 8 threads".into())?;
    Ok(format!("{} identical CSV bytes with 1 and 8 threads", a.len()))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome, Duration); 11] = [
        (1, "x=2 tangency equals beta_c", c1_x2_tangency, Duration::from_secs(1)),
        (2, "x=4 origin always stable", c2_x4_origin, Duration::from_secs(60)),
        (3, "x=4 five-root regime", c3_five_roots, Duration::from_secs(1)),
        (4, "x=2 five-condition partition", c4_five_conditions, Duration::from_secs(10)),
        (5, "limit-cycle reproduction", c5_limit_cycles, Duration::from_secs(60)),
        (6, "Lindblad CPTP suite", c6_cptp, Duration::from_secs(120)),
        (7, "classical-limit oracle", c7_classical_limit, Duration::from_secs(60)),
        (8, "mean-field trend in N", c8_meanfield_trend, Duration::from_secs(600)),
        (9, "classical storage capacity", c9_capacity, Duration::from_secs(900)),
        (10, "basin radius grows with x", c10_basin_growth, Duration::from_secs(300)),
        (11, "thread-count determinism", c11_determinism, Duration::from_secs(120)),
    ];
    let only: Option<u32> = std::env::var("QHOP_CRITERION").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    for (id, name, run, limit) in criteria {
        if only.is_some_and(|o| o != id) {
            continue;
        }
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if elapsed <= limit => (true, d),
            Ok(d) => (false, format!("{d}; exceeded time limit {limit:?}")),
            Err(e) => (false, e),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "[{}] criterion {id:>2}: {name} ({:.2} s) - {detail}",
            if ok { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
