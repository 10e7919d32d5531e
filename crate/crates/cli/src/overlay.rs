//! Artifact curves as CSV polylines, and their rasterization over an image.

use std::path::Path;

use dynaray::io::{image_display_rows, rescale_u16, write_csv, write_pgm16_pixels};
use dynaray::microlocal::ArtifactCurve;
use dynaray::{GridSpec, ImageGrid, Vec2};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const CURVE_HEADER: [&str; 8] = ["curve", "phi_end", "s", "seed_x", "seed_y", "seed_angle", "x", "y"];

/// Sidecar stored next to a curves CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvesMeta {
    pub grid: GridSpec,
    pub model: String,
    pub n_curves: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyline {
    pub phi_end: f64,
    pub points: Vec<Vec2>,
}

pub fn curves_meta_path(csv: &Path) -> std::path::PathBuf {
    csv.with_extension("json")
}

pub fn write_curves(path: &Path, curves: &[ArtifactCurve], meta: &CurvesMeta) -> CliResult<()> {
    let rows = curves.iter().enumerate().flat_map(|(k, c)| {
        c.points.iter().map(move |p| {
            [
                k.to_string(),
                c.phi_end.to_string(),
                c.s.to_string(),
                c.seed.x.x.to_string(),
                c.seed.x.y.to_string(),
                c.seed.xi_angle.angle().to_string(),
                p.x.to_string(),
                p.y.to_string(),
            ]
        })
    });
    write_csv(path, &CURVE_HEADER, rows)?;
    dynaray::io::write_json(&curves_meta_path(path), meta)?;
    Ok(())
}

pub fn read_curves(path: &Path) -> CliResult<Vec<Polyline>> {
    let err = |e: csv::Error| CliError::Io(format!("cannot read curves {}: {e}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(err)?;
    let header: Vec<String> = reader.headers().map_err(err)?.iter().map(str::to_string).collect();
    if header != CURVE_HEADER {
        return Err(CliError::Io(format!("{}: unexpected header {header:?}", path.display())));
    }
    let mut out: Vec<Polyline> = Vec::new();
    let mut last_id: Option<usize> = None;
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(err)?;
        let num = |i: usize| -> CliResult<f64> {
            rec[i]
                .parse()
                .map_err(|_| CliError::Io(format!("{} row {}: bad number `{}`", path.display(), line + 2, &rec[i])))
        };
        let id: usize = rec[0]
            .parse()
            .map_err(|_| CliError::Io(format!("{} row {}: bad curve id", path.display(), line + 2)))?;
        let p = Vec2::new(num(6)?, num(7)?);
        if last_id != Some(id) {
            out.push(Polyline {
                phi_end: num(1)?,
                points: Vec::new(),
            });
            last_id = Some(id);
        }
        out.last_mut().expect("pushed above").points.push(p);
    }
    Ok(out)
}

/// Pixel `(col, row)` in display order (row 0 at the top) containing `p`.
fn pixel_of(grid: &GridSpec, p: Vec2) -> (i64, i64) {
    let col = ((p.x + grid.extent) / grid.dx()).floor() as i64;
    let iy = ((p.y + grid.extent) / grid.dy()).floor() as i64;
    let col = col.clamp(0, grid.nx as i64 - 1);
    let iy = iy.clamp(0, grid.ny as i64 - 1);
    (col, grid.ny as i64 - 1 - iy)
}

fn bresenham(a: (i64, i64), b: (i64, i64), mut plot: impl FnMut(i64, i64)) {
    let (mut x, mut y) = a;
    let dx = (b.0 - x).abs();
    let dy = -(b.1 - y).abs();
    let sx = if x < b.0 { 1 } else { -1 };
    let sy = if y < b.1 { 1 } else { -1 };
    let mut err = dx + dy;
    loop {
        plot(x, y);
        if (x, y) == b {
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

/// Rescaled image with every polyline drawn at full intensity.
pub fn render(image: &ImageGrid, curves: &[Polyline]) -> CliResult<Vec<u16>> {
    let grid = image.spec();
    let slack = 1e-9 * grid.extent;
    for (k, c) in curves.iter().enumerate() {
        if let Some(p) = c
            .points
            .iter()
            .find(|p| p.x.abs() > grid.extent + slack || p.y.abs() > grid.extent + slack || !p.is_finite())
        {
            return Err(dynaray::Error::GeometryMismatch(format!(
                "curve {k} has point ({}, {}) outside the image support [-{e}, {e}]²",
                p.x,
                p.y,
                e = grid.extent
            ))
            .into());
        }
    }
    let mut pixels = rescale_u16(&image_display_rows(image));
    let nx = grid.nx as i64;
    for c in curves {
        let px: Vec<(i64, i64)> = c.points.iter().map(|&p| pixel_of(&grid, p)).collect();
        if px.len() == 1 {
            pixels[(px[0].1 * nx + px[0].0) as usize] = u16::MAX;
        }
        for w in px.windows(2) {
            bresenham(w[0], w[1], |x, y| pixels[(y * nx + x) as usize] = u16::MAX);
        }
    }
    Ok(pixels)
}

pub fn write_overlay(path: &Path, image: &ImageGrid, curves: &[Polyline]) -> CliResult<()> {
    let pixels = render(image, curves)?;
    write_pgm16_pixels(path, image.nx(), image.ny(), &pixels)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bresenham_covers_both_ends_without_gaps() {
        let mut pts = Vec::new();
        bresenham((0, 0), (7, 3), |x, y| pts.push((x, y)));
        assert_eq!(pts.first(), Some(&(0, 0)));
        assert_eq!(pts.last(), Some(&(7, 3)));
        assert_eq!(pts.len(), 8);
        for w in pts.windows(2) {
            assert!((w[1].0 - w[0].0).abs() <= 1 && (w[1].1 - w[0].1).abs() <= 1);
        }
    }

    #[test]
    fn pixel_lookup_flips_rows() {
        let g = GridSpec::square(4, 1.0).unwrap();
        assert_eq!(pixel_of(&g, Vec2::new(-0.9, 0.9)), (0, 0));
        assert_eq!(pixel_of(&g, Vec2::new(0.9, -0.9)), (3, 3));
        assert_eq!(pixel_of(&g, Vec2::new(1.0, 1.0)), (3, 0));
    }

    #[test]
    fn points_outside_the_support_are_a_mismatch() {
        let img = ImageGrid::zeros(GridSpec::square(8, 1.0).unwrap()).unwrap();
        let c = Polyline {
            phi_end: 0.0,
            points: vec![Vec2::new(0.0, 0.0), Vec2::new(1.5, 0.0)],
        };
        assert!(render(&img, &[c]).is_err());
    }
}
