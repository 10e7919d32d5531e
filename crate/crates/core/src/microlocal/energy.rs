use serde::Serialize;

use crate::error::Result;
use crate::geometry::Vec2;
use crate::grid::ImageGrid;
use crate::motion::MotionModel;
use crate::phantom::SingularitySample;

use super::visibility::visibility;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedClass {
    Visible,
    Invisible,
    /// Too close to a visible/invisible transition to be classified.
    Boundary,
}

/// Square window, aligned with `(ξ, ξ^⊥)`, over which the directional
/// derivative is averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyWindow {
    /// Half-width in pixels.
    pub half_width_px: f64,
    /// Samples per side.
    pub n_side: usize,
}

impl Default for EnergyWindow {
    fn default() -> Self {
        EnergyWindow {
            half_width_px: 2.0,
            n_side: 9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeedEnergy {
    pub index: usize,
    pub class: SeedClass,
    /// Mean `|∂_ξ recon|` over the window divided by `|strength|`.
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeEnergySummary {
    pub seeds: Vec<SeedEnergy>,
    pub n_visible: usize,
    pub n_invisible: usize,
    pub n_boundary: usize,
    pub visible_mean: f64,
    pub invisible_mean: f64,
    /// `invisible_mean / visible_mean`; NaN when a class is empty.
    pub ratio: f64,
    pub min_visible: f64,
    pub median_visible: f64,
}

/// Mean absolute directional derivative of `recon` along `ξ` in a window
/// around `x`, by central differences of one pixel on bilinear samples.
pub fn directional_energy(recon: &ImageGrid, x: Vec2, xi: Vec2, window: &EnergyWindow) -> f64 {
    let px = recon.spec().pixel_size();
    let tangent = xi.perp();
    let n = window.n_side.max(1);
    let span = window.half_width_px * px;
    let coord = |k: usize| {
        if n == 1 {
            0.0
        } else {
            -span + 2.0 * span * k as f64 / (n - 1) as f64
        }
    };
    let mut acc = 0.0;
    for a in 0..n {
        for b in 0..n {
            let p = x + xi * coord(a) + tangent * coord(b);
            let d = recon.bilinear_sample(p + xi * px) - recon.bilinear_sample(p - xi * px);
            acc += (d / (2.0 * px)).abs();
        }
    }
    acc / (n * n) as f64
}

/// Edge energy per seed, aggregated by class.
pub fn edge_energy(
    recon: &ImageGrid,
    wavefront: &[SingularitySample],
    window: &EnergyWindow,
    classifier: impl Fn(&SingularitySample) -> SeedClass + Sync + Send,
) -> EdgeEnergySummary {
    let seeds: Vec<SeedEnergy> = crate::par::map_range(wavefront.len(), |i| {
        let w = &wavefront[i];
        let raw = directional_energy(recon, w.x, w.xi(), window);
        let scale = w.strength.abs();
        SeedEnergy {
            index: i,
            class: classifier(w),
            energy: if scale > 0.0 { raw / scale } else { raw },
        }
    });

    let mut vis: Vec<f64> = Vec::new();
    let mut inv: Vec<f64> = Vec::new();
    let mut n_boundary = 0;
    for s in &seeds {
        match s.class {
            SeedClass::Visible => vis.push(s.energy),
            SeedClass::Invisible => inv.push(s.energy),
            SeedClass::Boundary => n_boundary += 1,
        }
    }
    let mean = |v: &[f64]| {
        if v.is_empty() {
            f64::NAN
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let visible_mean = mean(&vis);
    let invisible_mean = mean(&inv);
    let min_visible = vis.iter().cloned().fold(f64::NAN, f64::min);
    vis.sort_by(f64::total_cmp);
    let median_visible = if vis.is_empty() {
        f64::NAN
    } else if vis.len() % 2 == 1 {
        vis[vis.len() / 2]
    } else {
        0.5 * (vis[vis.len() / 2 - 1] + vis[vis.len() / 2])
    };

    EdgeEnergySummary {
        n_visible: vis.len(),
        n_invisible: inv.len(),
        n_boundary,
        visible_mean,
        invisible_mean,
        ratio: invisible_mean / visible_mean,
        min_visible,
        median_visible,
        seeds,
    }
}

/// Classifies a seed by the visibility report at its position: directions
/// within `margin` radians of a visible/invisible transition are `Boundary`.
pub fn visibility_classifier<'a>(
    model: &'a dyn MotionModel,
    acquisition: &'a [(f64, f64)],
    n_phi_scan: usize,
    margin: f64,
) -> impl Fn(&SingularitySample) -> SeedClass + Sync + Send + 'a {
    move |w: &SingularitySample| -> SeedClass {
        classify(model, acquisition, n_phi_scan, margin, w).unwrap_or(SeedClass::Boundary)
    }
}

fn classify(
    model: &dyn MotionModel,
    acquisition: &[(f64, f64)],
    n_phi_scan: usize,
    margin: f64,
    w: &SingularitySample,
) -> Result<SeedClass> {
    let report = visibility(model, w.x, acquisition, n_phi_scan)?;
    let a = w.xi_angle.angle();
    if report.distance_to_edge(a) < margin {
        return Ok(SeedClass::Boundary);
    }
    Ok(if report.is_visible(a) {
        SeedClass::Visible
    } else {
        SeedClass::Invisible
    })
}
