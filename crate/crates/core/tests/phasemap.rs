use std::path::PathBuf;

use qhop_core::fixedpoint::{boundary_x2, boundary_x4};
use qhop_core::meanfield::VerdictKind;
use qhop_core::phasemap::{emit_phase_csv, emit_phase_image, sweep, write_phase_csv, Phase, PhaseMap, SweepConfig};

fn csv(map: &PhaseMap) -> String {
    let mut buf = Vec::new();
    write_phase_csv(map, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn canonical_x4() -> SweepConfig {
    SweepConfig::new(4, (0.05, 1.5, 20), (0.0, 1.5, 20))
}

/// Set `QHOP_BLESS=1` to regenerate the frozen file.
#[test]
fn golden_x4_20x20() {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/phase_x4_20x20.csv");
    let got = csv(&sweep(&canonical_x4()).unwrap());
    if std::env::var_os("QHOP_BLESS").is_some() {
        std::fs::write(&path, &got).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file missing; run with QHOP_BLESS=1");
    assert!(got == want, "phase CSV differs from golden file");
}

#[test]
fn x4_origin_always_stable_and_never_bare_lc() {
    // Root analysis only depends on the grid; short horizon keeps it cheap.
    let mut c = SweepConfig::new(4, (0.05, 1.5, 50), (0.0, 1.5, 50));
    c.t_horizon = 20.0;
    let map = sweep(&c).unwrap();
    assert_eq!(map.cells.len(), 2500);
    assert!(map.cells.iter().all(|c| c.origin_stable));
    assert_eq!(map.count(Phase::Lc), 0);
}

#[test]
fn x2_layout() {
    let mut c = SweepConfig::new(2, (0.05, 1.5, 25), (0.0, 1.5, 25));
    c.t_horizon = 300.0;
    let map = sweep(&c).unwrap();
    let (nt, no) = (map.grid.n_t(), map.grid.n_omega());
    // Small Ω, low T: ferromagnet. High T: paramagnet.
    assert_eq!(map.cell(0, 0).phase, Phase::Fm);
    assert_eq!(map.cell(nt - 1, 0).phase, Phase::Pm);
    assert_eq!(map.cell(nt - 1, no - 1).phase, Phase::Pm);
    assert!(map.count(Phase::Lc) > 10, "LC lobe missing");
    for cell in &map.cells {
        match cell.n_fixed_points {
            1 => {}
            3 => assert!(cell.t <= boundary_x2(cell.omega) + 1.45 / 24.0),
            n => panic!("unexpected root count {n}"),
        }
        if cell.phase == Phase::Lc {
            assert!(!cell.origin_stable);
        }
    }
}

#[test]
fn x4_five_roots_below_boundary() {
    let mut c = SweepConfig::new(4, (0.05, 0.8, 16), (0.0, 0.6, 13));
    c.t_horizon = 20.0;
    let map = sweep(&c).unwrap();
    let dt = 0.75 / 15.0;
    for cell in &map.cells {
        assert!(matches!(cell.n_fixed_points, 1 | 5), "{cell:?}");
        let t_star = boundary_x4(cell.omega).map(|t| t.temperature());
        if cell.n_fixed_points == 5 {
            assert!(cell.t <= t_star.unwrap() + dt, "{cell:?}");
        } else if let Some(ts) = t_star {
            assert!(cell.t >= ts - dt, "{cell:?}");
        }
    }
}

#[test]
fn refinement_only_moves_boundaries() {
    let mut coarse = SweepConfig::new(2, (0.1, 1.4, 7), (0.0, 1.2, 7));
    coarse.t_horizon = 300.0;
    let mut fine = coarse.clone();
    fine.n_t = 13;
    fine.n_omega = 13;
    let a = sweep(&coarse).unwrap();
    let b = sweep(&fine).unwrap();
    for i in 0..13 {
        for j in 0..13 {
            let f = b.cell(i, j).phase;
            if f == Phase::Undecided {
                continue;
            }
            // Coarse neighbours enclosing this fine point.
            let is = [i / 2, (i + 1) / 2];
            let js = [j / 2, (j + 1) / 2];
            let near: Vec<Phase> = is.iter().flat_map(|&ci| js.iter().map(move |&cj| (ci, cj))).map(|(ci, cj)| a.cell(ci, cj).phase).collect();
            // Interior: every enclosing coarse cell agrees.
            if near.iter().all(|&c| c == near[0]) {
                assert_eq!(f, near[0], "fine ({i},{j})");
            }
            if i % 2 == 0 && j % 2 == 0 {
                assert_eq!(f, a.cell(i / 2, j / 2).phase);
            }
        }
    }
}

#[test]
fn sweep_is_thread_count_independent() {
    let mut c = SweepConfig::new(2, (0.2, 1.2, 6), (0.2, 1.2, 6));
    c.t_horizon = 200.0;
    c.threads = 1;
    let one = csv(&sweep(&c).unwrap());
    c.threads = 4;
    let four = csv(&sweep(&c).unwrap());
    assert_eq!(one, four);
}

#[test]
fn limit_cycle_cell_verdicts() {
    let mut c = SweepConfig::new(2, (0.5, 0.6, 2), (0.6, 0.7, 2));
    c.t_horizon = 500.0;
    let map = sweep(&c).unwrap();
    let cell = map.cell(0, 0);
    assert_eq!(cell.far_verdict, VerdictKind::LimitCycle);
    assert_eq!(cell.near_verdict, VerdictKind::LimitCycle);
}

#[test]
fn emitters_write_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = SweepConfig::new(4, (0.05, 1.5, 4), (0.0, 1.5, 5));
    c.t_horizon = 50.0;
    let map = sweep(&c).unwrap();
    let csv_path = dir.path().join("phase.csv");
    emit_phase_csv(&map, &csv_path).unwrap();
    assert_eq!(std::fs::read_to_string(&csv_path).unwrap().lines().count(), 21);
    let png = dir.path().join("phase.png");
    emit_phase_image(&map, &png, 3).unwrap();
    let bytes = std::fs::read(&png).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
    assert!(emit_phase_csv(&map, &dir.path().join("missing/dir/x.csv")).is_err());
}
