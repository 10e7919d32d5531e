use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use dynaray::io::{
    read_image_rawf64, read_sinogram_rawf64, write_csv, write_image_pgm, write_image_rawf64, write_json,
    write_sinogram_pgm, write_sinogram_rawf64,
};
use dynaray::microlocal::{
    artifact_curves, check_bolker, check_uniqueness_condition, edge_energy, visibility, visibility_classifier,
    ArtifactOptions, BolkerTolerances, EnergyWindow,
};
use dynaray::motion::{check_hypothesis, HypothesisReport, HypothesisSampling, MotionModel};
use dynaray::operators::{forward_project, reconstruct, PipelineSpec, ReconstructionInput};
use dynaray::{ImageGrid, Sinogram, Vec2};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::overlay::{read_curves, write_curves, write_overlay, CurvesMeta};

/// Flags shared by every pipeline command.
pub struct Context {
    pub config: RunConfig,
    pub force: bool,
    pub threads: usize,
}

impl Context {
    fn out(&self, name: &str) -> PathBuf {
        self.config.output_dir.join(name)
    }

    fn ensure_output_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.config.output_dir).map_err(|e| {
            CliError::Io(format!("cannot create {}: {e}", self.config.output_dir.display()))
        })
    }

    fn pipeline(&self, sinogram: dynaray::SinogramSpec) -> PipelineSpec {
        PipelineSpec {
            sinogram,
            grid: self.config.grid,
            filter: self.config.filter,
            cutoff: self.config.cutoff,
            weight: self.config.weight(),
        }
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    threads: usize,
    parallel: bool,
    config: &'a RunConfig,
    outputs: Vec<String>,
}

fn write_manifest(ctx: &Context, command: &str, outputs: &[PathBuf]) -> CliResult<()> {
    let m = Manifest {
        command,
        version: dynaray::VERSION,
        threads: ctx.threads,
        parallel: dynaray::par::is_parallel(),
        config: &ctx.config,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    write_json(&ctx.out("manifest.json"), &m)?;
    Ok(())
}

fn log(msg: impl AsRef<str>) {
    eprintln!("dynaray: {}", msg.as_ref());
}

/// Verifies the motion-model hypotheses on the configured domain.
fn hypotheses(ctx: &Context, model: &dyn MotionModel) -> CliResult<HypothesisReport> {
    let sampling = HypothesisSampling::uniform(model, ctx.config.grid.extent, 64, 33);
    let report = check_hypothesis(model, &sampling);
    for v in &report.violations {
        log(format!("hypothesis: {v}"));
    }
    if !report.passed {
        let msg = format!("motion model `{}` violates its hypotheses", model.name());
        if ctx.force {
            log(format!("{msg}; continuing (--force)"));
        } else {
            return Err(CliError::Check(msg));
        }
    }
    Ok(report)
}

pub fn simulate(ctx: &Context) -> CliResult<Sinogram> {
    let model = ctx.config.motion.build();
    ctx.ensure_output_dir()?;
    let report = hypotheses(ctx, model.as_ref())?;
    let f = ctx.config.phantom.rasterize(ctx.config.grid)?;
    log(format!(
        "simulating {}x{} sinogram under `{}`",
        ctx.config.sinogram.n_phi,
        ctx.config.sinogram.n_s,
        model.name()
    ));
    let g = forward_project(&f, model.as_ref(), ctx.config.sinogram, &ctx.config.weight())?;
    let outputs = [ctx.out("sinogram.rawf64"), ctx.out("sinogram.pgm"), ctx.out("hypothesis.json")];
    write_sinogram_rawf64(&outputs[0], &g)?;
    write_sinogram_pgm(&outputs[1], &g)?;
    write_json(&outputs[2], &report)?;
    write_manifest(ctx, "simulate", &outputs)?;
    Ok(g)
}

pub fn reconstruct_cmd(ctx: &Context, sinogram: Option<&Path>) -> CliResult<ImageGrid> {
    let path = sinogram.map(Path::to_path_buf).unwrap_or_else(|| ctx.out("sinogram.rawf64"));
    let g = read_sinogram_rawf64(&path)?;
    if g.spec() != ctx.config.sinogram {
        log(format!(
            "using the sampling stored with {} ({}x{} over [{}, {}])",
            path.display(),
            g.n_phi(),
            g.n_s(),
            g.spec().phi_range[0],
            g.spec().phi_range[1]
        ));
    }
    reconstruct_from(ctx, &g)
}

fn reconstruct_from(ctx: &Context, g: &Sinogram) -> CliResult<ImageGrid> {
    let model = ctx.config.motion.build();
    ctx.ensure_output_dir()?;
    hypotheses(ctx, model.as_ref())?;
    log(format!("reconstructing {}x{} image", ctx.config.grid.nx, ctx.config.grid.ny));
    let recon = reconstruct(ReconstructionInput::Sinogram(g), model.as_ref(), &ctx.pipeline(g.spec()))?;
    let outputs = [ctx.out("recon.rawf64"), ctx.out("recon.pgm")];
    write_image_rawf64(&outputs[0], &recon)?;
    write_image_pgm(&outputs[1], &recon)?;
    write_manifest(ctx, "reconstruct", &outputs)?;
    Ok(recon)
}

fn square_points(n: usize, half: f64) -> Vec<Vec2> {
    if n == 1 {
        return vec![Vec2::ZERO];
    }
    let step = 2.0 * half / (n - 1) as f64;
    (0..n * n)
        .map(|k| Vec2::new(-half + (k % n) as f64 * step, -half + (k / n) as f64 * step))
        .collect()
}

fn fmt(v: f64) -> String {
    v.to_string()
}

/// Bolker, visibility, artifact, uniqueness and edge-energy reports.
/// `recon` is read from disk or recomputed when not given.
pub fn analyze(ctx: &Context, recon: Option<ImageGrid>, recon_path: Option<&Path>) -> CliResult<()> {
    let cfg = &ctx.config;
    let a = &cfg.analysis;
    let model = cfg.motion.build();
    let model = model.as_ref();
    ctx.ensure_output_dir()?;
    hypotheses(ctx, model)?;
    let grid = cfg.grid;
    let [phi_lo, phi_hi] = cfg.sinogram.phi_range;
    let mut outputs = Vec::new();
    let mut bolker_failed = None;

    if a.bolker {
        let xs = square_points(a.bolker_nx, grid.extent);
        let phis: Vec<f64> = (0..a.bolker_nphi)
            .map(|k| phi_lo + (k as f64 + 0.5) * (phi_hi - phi_lo) / a.bolker_nphi as f64)
            .collect();
        let report = check_bolker(model, &xs, &phis, &BolkerTolerances::for_grid(&grid, cfg.sinogram.s_max));
        log(format!("bolker: {}", report.summary));
        let rows = report.ic_grid.iter().enumerate().map(|(k, ic)| {
            let (i, j) = (k / xs.len(), k % xs.len());
            [fmt(phis[i]), fmt(xs[j].x), fmt(xs[j].y), fmt(*ic)]
        });
        let csv = ctx.out("bolker.csv");
        write_csv(&csv, &["phi", "x", "y", "ic"], rows)?;
        write_json(&ctx.out("bolker.json"), &report)?;
        outputs.extend([csv, ctx.out("bolker.json")]);
        if !report.passed {
            bolker_failed = Some(report.summary.clone());
        }
    }

    if a.visibility {
        let mut rows = Vec::new();
        for x in square_points(a.visibility_points, 0.8 * grid.extent) {
            let r = visibility(model, x, &[(phi_lo, phi_hi)], a.n_phi_scan)?;
            for (kind, list) in [("visible", &r.visible), ("invisible", &r.invisible)] {
                for iv in list {
                    rows.push([fmt(x.x), fmt(x.y), kind.to_string(), fmt(iv[0]), fmt(iv[1])]);
                }
            }
        }
        let csv = ctx.out("visibility.csv");
        write_csv(&csv, &["x", "y", "kind", "angle_lo", "angle_hi"], rows)?;
        outputs.push(csv);
    }

    if a.artifacts {
        let seeds = cfg.phantom.boundary_wavefront(a.artifact_seeds_per_ellipse.max(4))?;
        let mut opts = ArtifactOptions::for_grid(&grid);
        opts.phi_ends = vec![phi_lo, phi_hi];
        // a full turn of smoothly periodic motion has no truncation ends
        let periodic_turn = model.is_periodic() && cfg.sinogram.is_full_turn();
        let curves = if periodic_turn {
            Vec::new()
        } else {
            artifact_curves(model, &seeds, &grid, &opts)?
        };
        log(format!("artifacts: {} curves", curves.len()));
        let csv = ctx.out("artifact_curves.csv");
        let meta = CurvesMeta {
            grid,
            model: model.name().to_string(),
            n_curves: curves.len(),
        };
        write_curves(&csv, &curves, &meta)?;
        outputs.extend([csv, ctx.out("artifact_curves.json")]);
    }

    if a.uniqueness {
        let xs = square_points(a.uniqueness_nx, 0.8 * grid.extent);
        let dirs: Vec<f64> = (0..a.uniqueness_directions)
            .map(|k| k as f64 * TAU / a.uniqueness_directions as f64)
            .collect();
        let report = check_uniqueness_condition(model, &xs, &dirs);
        log(format!(
            "uniqueness: {}/{} covectors satisfy the condition",
            report.n_unique, report.n_samples
        ));
        write_json(&ctx.out("uniqueness.json"), &report)?;
        outputs.push(ctx.out("uniqueness.json"));
    }

    if a.edge_energy {
        let recon = match (recon, recon_path) {
            (Some(r), _) => r,
            (None, Some(p)) => read_image_rawf64(p)?,
            (None, None) => {
                let f = cfg.phantom.rasterize(grid)?;
                log("edge energy: reconstructing from the phantom");
                reconstruct(ReconstructionInput::Image(&f), model, &ctx.pipeline(cfg.sinogram))?
            }
        };
        if recon.spec() != grid {
            return Err(dynaray::Error::GeometryMismatch(format!(
                "reconstruction grid {:?} differs from the configured grid {:?}",
                recon.spec(),
                grid
            ))
            .into());
        }
        let wf = cfg.phantom.boundary_wavefront(a.wavefront_per_ellipse.max(4))?;
        let acq = [(phi_lo, phi_hi)];
        let summary = edge_energy(
            &recon,
            &wf,
            &EnergyWindow::default(),
            visibility_classifier(model, &acq, a.n_phi_scan, a.boundary_margin_deg.to_radians()),
        );
        log(format!(
            "edge energy: {} visible, {} invisible, ratio {:.3}",
            summary.n_visible, summary.n_invisible, summary.ratio
        ));
        write_json(&ctx.out("edge_energy.json"), &summary)?;
        outputs.push(ctx.out("edge_energy.json"));
    }

    write_manifest(ctx, "analyze", &outputs)?;
    if let Some(summary) = bolker_failed {
        let msg = format!("Bolker check failed: {summary}");
        if ctx.force {
            log(format!("{msg}; continuing (--force)"));
        } else {
            return Err(CliError::Check(msg));
        }
    }
    Ok(())
}

pub fn overlay(recon: &Path, curves: &Path, out: &Path, phi_end: Option<f64>) -> CliResult<()> {
    let image = read_image_rawf64(recon)?;
    let meta_path = crate::overlay::curves_meta_path(curves);
    if meta_path.exists() {
        let text = std::fs::read_to_string(&meta_path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", meta_path.display())))?;
        let meta: CurvesMeta = serde_json::from_str(&text)
            .map_err(|e| CliError::Io(format!("{}: {e}", meta_path.display())))?;
        if meta.grid != image.spec() {
            return Err(dynaray::Error::GeometryMismatch(format!(
                "curves were traced on {:?}, the image is {:?}",
                meta.grid,
                image.spec()
            ))
            .into());
        }
    }
    let mut lines = read_curves(curves)?;
    if let Some(end) = phi_end {
        lines.retain(|c| (c.phi_end - end).abs() < 1e-9);
    }
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    }
    write_overlay(out, &image, &lines)?;
    log(format!("overlay: {} curves drawn into {}", lines.len(), out.display()));
    Ok(())
}

/// simulate → reconstruct → analyze → one overlay per data-interval end.
pub fn report(ctx: &Context) -> CliResult<()> {
    let g = simulate(ctx)?;
    let recon = reconstruct_from(ctx, &g)?;
    analyze(ctx, Some(recon), None)?;
    let mut outputs = vec![ctx.out("sinogram.rawf64"), ctx.out("recon.rawf64")];
    if ctx.config.analysis.artifacts {
        let [lo, hi] = ctx.config.sinogram.phi_range;
        for (name, end) in [("overlay_start.pgm", lo), ("overlay_end.pgm", hi)] {
            overlay(&ctx.out("recon.rawf64"), &ctx.out("artifact_curves.csv"), &ctx.out(name), Some(end))?;
            outputs.push(ctx.out(name));
        }
        overlay(&ctx.out("recon.rawf64"), &ctx.out("artifact_curves.csv"), &ctx.out("overlay.pgm"), None)?;
        outputs.push(ctx.out("overlay.pgm"));
    }
    write_manifest(ctx, "report", &outputs)
}
