use std::path::Path;

use image::{Rgb, RgbImage};

use super::{Phase, PhaseMap};
use crate::fixedpoint::FixedPointReport;
use crate::{Result, Trajectory};

const LEGEND_WIDTH: u32 = 12;
const BLACK: Rgb<u8> = Rgb([0, 0, 0]);
const WHITE: Rgb<u8> = Rgb([255, 255, 255]);

pub fn phase_color(phase: Phase) -> Rgb<u8> {
    match phase {
        Phase::Pm => Rgb([66, 133, 244]),
        Phase::Fm => Rgb([52, 168, 83]),
        Phase::Lc => Rgb([234, 67, 53]),
        Phase::PmLc => Rgb([140, 90, 200]),
        Phase::FmLc => Rgb([251, 188, 5]),
        Phase::Undecided => Rgb([160, 160, 160]),
    }
}

/// Raster with one `scale × scale` block per cell (Ω to the right, T
/// upward), the boundary curve in black and a legend strip on the right.
pub fn emit_phase_image(map: &PhaseMap, path: &Path, scale: u32) -> Result<()> {
    let scale = scale.max(1);
    let (nt, no) = (map.grid.n_t() as u32, map.grid.n_omega() as u32);
    let (w, h) = (no * scale, nt * scale);
    let legend_h = (Phase::ALL.len() as u32).max(1);
    let mut img = RgbImage::from_pixel(w + LEGEND_WIDTH, h.max(legend_h), WHITE);

    for i in 0..nt {
        for j in 0..no {
            let c = phase_color(map.cell(i as usize, j as usize).phase);
            let y0 = h - (i + 1) * scale;
            for dy in 0..scale {
                for dx in 0..scale {
                    img.put_pixel(j * scale + dx, y0 + dy, c);
                }
            }
        }
    }

    let (t_lo, t_hi) = map.grid.t_range();
    for px in 0..w {
        let omega = map.grid.omega(0) + (px as f64 + 0.5) / w as f64 * (map.grid.omega(no as usize - 1) - map.grid.omega(0));
        if let Some(t) = map.boundary.t_at(omega) {
            if (t_lo..=t_hi).contains(&t) {
                let row = ((t - t_lo) / (t_hi - t_lo) * (h - 1) as f64).round() as u32;
                img.put_pixel(px, h - 1 - row, BLACK);
            }
        }
    }

    let band = (h.max(legend_h) / Phase::ALL.len() as u32).max(1);
    for (k, &phase) in Phase::ALL.iter().enumerate() {
        for y in k as u32 * band..((k as u32 + 1) * band).min(img.height()) {
            for x in w + 2..w + LEGEND_WIDTH {
                img.put_pixel(x, y, phase_color(phase));
            }
        }
    }
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}

fn draw_line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let (dx, dy) = ((x1 - x0).abs(), -(y1 - y0).abs());
    let (sx, sy) = (if x0 < x1 { 1 } else { -1 }, if y0 < y1 { 1 } else { -1 });
    let (mut x, mut y, mut err) = (x0, y0, dx + dy);
    loop {
        if (0..img.width() as i64).contains(&x) && (0..img.height() as i64).contains(&y) {
            img.put_pixel(x as u32, y as u32, c);
        }
        if x == x1 && y == y1 {
            break;
        }
        let e2 = 2 * err;
        if e2 >= dy {
            err += dy;
            x += sx;
        }
        if e2 <= dx {
            err += dx;
            y += sy;
        }
    }
}

/// Phase-plane plot of `(M_Z^1, M_Y^1)` orbits with fixed points marked:
/// stable ones as filled red squares, the rest as small black squares.
pub fn emit_trajectory_image(trajectories: &[Trajectory], fixed_points: &[FixedPointReport], path: &Path, size: u32) -> Result<()> {
    let size = size.max(32);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    let mut extend = |z: f64, y: f64| {
        lo = [lo[0].min(z), lo[1].min(y)];
        hi = [hi[0].max(z), hi[1].max(y)];
    };
    for tr in trajectories {
        tr.states.iter().for_each(|s| extend(s.m_z[0], s.m_y[0]));
    }
    fixed_points.iter().for_each(|f| extend(f.m_z, f.m_y));
    if !lo[0].is_finite() {
        lo = [-1.0, -1.0];
        hi = [1.0, 1.0];
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-9) * 1.1;
    let centre = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
    let to_px = |z: f64, y: f64| -> (i64, i64) {
        let u = ((z - centre[0]) / span + 0.5) * (size - 1) as f64;
        let v = (0.5 - (y - centre[1]) / span) * (size - 1) as f64;
        (u.round() as i64, v.round() as i64)
    };

    let mut img = RgbImage::from_pixel(size, size, WHITE);
    let axis = Rgb([210, 210, 210]);
    let origin = to_px(0.0, 0.0);
    draw_line(&mut img, (0, origin.1), (size as i64 - 1, origin.1), axis);
    draw_line(&mut img, (origin.0, 0), (origin.0, size as i64 - 1), axis);

    let palette = [Rgb([30, 80, 200]), Rgb([20, 140, 60]), Rgb([200, 120, 0]), Rgb([120, 40, 160])];
    for (k, tr) in trajectories.iter().enumerate() {
        let c = palette[k % palette.len()];
        for pair in tr.states.windows(2) {
            draw_line(&mut img, to_px(pair[0].m_z[0], pair[0].m_y[0]), to_px(pair[1].m_z[0], pair[1].m_y[0]), c);
        }
    }
    for f in fixed_points {
        let (u, v) = to_px(f.m_z, f.m_y);
        let (r, c) = if f.class.is_stable() { (3, Rgb([220, 0, 0])) } else { (1, BLACK) };
        for du in -r..=r {
            for dv in -r..=r {
                let (x, y) = (u + du, v + dv);
                if (0..size as i64).contains(&x) && (0..size as i64).contains(&y) {
                    img.put_pixel(x as u32, y as u32, c);
                }
            }
        }
    }
    img.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
