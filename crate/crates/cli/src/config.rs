//! Run configuration: defaults, JSON file, `--set` overrides, validation.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use dynaray::motion::{check_angle, counter_rotation, identity, third_rotation, MotionModel, NonAffine, Rotation};
use dynaray::operators::{CutoffSpec, FilterSpec, WeightMode};
use dynaray::{default_phantom, EllipsePhantom, GridSpec, SinogramSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionConfig {
    Identity {},
    CounterRotation {},
    ThirdRotation {},
    /// Rigid rotation `Γ_φ x = R(rate·φ) x`.
    Rotation { rate: f64 },
    Nonaffine {
        #[serde(default = "nonaffine_rotation_rate")]
        rotation_rate: f64,
        #[serde(default = "nonaffine_p")]
        p: f64,
        #[serde(default = "nonaffine_scaling_rates")]
        scaling_rates: [f64; 2],
    },
}

fn nonaffine_rotation_rate() -> f64 {
    NonAffine::default().rotation_rate
}

fn nonaffine_p() -> f64 {
    NonAffine::default().p
}

fn nonaffine_scaling_rates() -> [f64; 2] {
    NonAffine::default().scaling_rates
}

impl MotionConfig {
    pub fn build(&self) -> Box<dyn MotionModel> {
        match *self {
            MotionConfig::Identity {} => Box::new(identity()),
            MotionConfig::CounterRotation {} => Box::new(counter_rotation()),
            MotionConfig::ThirdRotation {} => Box::new(third_rotation()),
            MotionConfig::Rotation { rate } => Box::new(Rotation::new("rotation", rate)),
            MotionConfig::Nonaffine {
                rotation_rate,
                p,
                scaling_rates,
            } => Box::new(NonAffine {
                rotation_rate,
                p,
                scaling_rates,
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightConfig {
    Intensity,
    MassPreserving,
}

impl WeightConfig {
    pub fn mode(self) -> WeightMode {
        match self {
            WeightConfig::Intensity => WeightMode::Intensity,
            WeightConfig::MassPreserving => WeightMode::MassPreserving,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub bolker: bool,
    pub visibility: bool,
    pub artifacts: bool,
    pub uniqueness: bool,
    pub edge_energy: bool,
    /// Points per side of the Bolker sampling grid.
    pub bolker_nx: usize,
    pub bolker_nphi: usize,
    /// Points per side of the grid at which visibility is reported.
    pub visibility_points: usize,
    pub n_phi_scan: usize,
    pub uniqueness_nx: usize,
    pub uniqueness_directions: usize,
    /// Boundary samples per ellipse for the edge-energy seeds.
    pub wavefront_per_ellipse: usize,
    /// Boundary samples per ellipse searched for artifact seeds.
    pub artifact_seeds_per_ellipse: usize,
    /// Seeds this close (degrees) to a visibility edge are not classified.
    pub boundary_margin_deg: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            bolker: true,
            visibility: true,
            artifacts: true,
            uniqueness: true,
            edge_energy: true,
            bolker_nx: 32,
            bolker_nphi: 128,
            visibility_points: 5,
            n_phi_scan: 1024,
            uniqueness_nx: 5,
            uniqueness_directions: 36,
            wavefront_per_ellipse: 256,
            artifact_seeds_per_ellipse: 4096,
            boundary_margin_deg: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub phantom: EllipsePhantom,
    pub motion: MotionConfig,
    pub sinogram: SinogramSpec,
    pub grid: GridSpec,
    pub filter: FilterSpec,
    pub cutoff: CutoffSpec,
    pub weight_mode: WeightConfig,
    pub analysis: AnalysisConfig,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            phantom: default_phantom(),
            motion: MotionConfig::ThirdRotation {},
            sinogram: SinogramSpec {
                n_phi: 300,
                n_s: 450,
                phi_range: [0.0, TAU],
                s_max: std::f64::consts::SQRT_2,
            },
            grid: GridSpec {
                nx: 256,
                ny: 256,
                extent: 1.0,
            },
            filter: FilterSpec::ramp(),
            cutoff: CutoffSpec::sharp(),
            weight_mode: WeightConfig::Intensity,
            analysis: AnalysisConfig::default(),
            output_dir: PathBuf::from("dynaray_out"),
        }
    }
}

impl RunConfig {
    /// Defaults, then the file (objects merged key by key), then the
    /// `key.path=value` overrides in order.
    pub fn resolve(file: Option<&Path>, sets: &[String]) -> CliResult<RunConfig> {
        let mut value = serde_json::to_value(RunConfig::default()).expect("default config serializes");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
            let user: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if !user.is_object() {
                return Err(CliError::Config(format!("{}: top level must be an object", path.display())));
            }
            merge(&mut value, user);
        }
        for set in sets {
            apply_set(&mut value, set)?;
        }
        let cfg: RunConfig = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> CliResult<()> {
        let cfg = |e: dynaray::Error| CliError::Config(e.to_string());
        self.grid.validate().map_err(cfg)?;
        self.sinogram.validate().map_err(cfg)?;
        self.filter.validate().map_err(cfg)?;
        self.phantom.validate(self.grid.extent).map_err(cfg)?;
        let model = self.motion.build();
        self.cutoff.validate(model.as_ref()).map_err(cfg)?;
        for phi in self.sinogram.phi_range {
            check_angle(model.as_ref(), phi).map_err(cfg)?;
        }
        if let MotionConfig::Nonaffine { p, scaling_rates, .. } = &self.motion {
            if !(p.is_finite() && scaling_rates.iter().all(|a| a.is_finite())) {
                return Err(CliError::Config("nonaffine parameters must be finite".into()));
            }
        }
        let a = &self.analysis;
        if a.n_phi_scan < 16 {
            return Err(CliError::Config(format!("analysis.n_phi_scan must be at least 16, got {}", a.n_phi_scan)));
        }
        for (name, v) in [
            ("bolker_nx", a.bolker_nx),
            ("bolker_nphi", a.bolker_nphi),
            ("visibility_points", a.visibility_points),
            ("uniqueness_nx", a.uniqueness_nx),
            ("uniqueness_directions", a.uniqueness_directions),
            ("wavefront_per_ellipse", a.wavefront_per_ellipse),
            ("artifact_seeds_per_ellipse", a.artifact_seeds_per_ellipse),
        ] {
            if v == 0 {
                return Err(CliError::Config(format!("analysis.{name} must be positive")));
            }
        }
        if !(a.boundary_margin_deg >= 0.0 && a.boundary_margin_deg < 90.0) {
            return Err(CliError::Config("analysis.boundary_margin_deg must be in [0, 90)".into()));
        }
        Ok(())
    }

    pub fn weight(&self) -> WeightMode {
        self.weight_mode.mode()
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            // switching the motion model discards the old model's parameters
            let retag = b.get("model").is_some() && o.get("model").is_some_and(|m| Some(m) != b.get("model"));
            if retag {
                b.clear();
            }
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `a.b.c=value`; the value is parsed as JSON and falls back to a string.
fn apply_set(root: &mut Value, set: &str) -> CliResult<()> {
    let (key, raw) = set
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects key=value, got `{set}`")))?;
    let key = key.trim();
    if key.is_empty() {
        return Err(CliError::Config(format!("empty key in --set `{set}`")));
    }
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("nonempty key");
    let mut node = root;
    for p in path {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| CliError::Config(format!("`{key}`: `{p}` is not inside an object")))?;
        node = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    match node {
        Value::Object(obj) => {
            let mut patch = serde_json::Map::new();
            patch.insert(last.to_string(), value);
            let mut current = Value::Object(std::mem::take(obj));
            merge(&mut current, Value::Object(patch));
            *node = current;
            Ok(())
        }
        Value::Array(arr) => {
            let idx: usize = last
                .parse()
                .map_err(|_| CliError::Config(format!("`{key}`: `{last}` is not an array index")))?;
            let slot = arr
                .get_mut(idx)
                .ok_or_else(|| CliError::Config(format!("`{key}`: index {idx} out of range")))?;
            *slot = value;
            Ok(())
        }
        _ => Err(CliError::Config(format!("`{key}`: parent is not an object"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sets(s: &[&str]) -> Vec<String> {
        s.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn defaults_are_valid() {
        let c = RunConfig::resolve(None, &[]).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!((c.sinogram.n_phi, c.sinogram.n_s), (300, 450));
    }

    #[test]
    fn overrides_reach_nested_fields() {
        let c = RunConfig::resolve(
            None,
            &sets(&["sinogram.n_phi=120", "motion.model=nonaffine", "motion.p=200", "cutoff.kind=smooth"]),
        )
        .unwrap();
        assert_eq!(c.sinogram.n_phi, 120);
        match c.motion {
            MotionConfig::Nonaffine { p, rotation_rate, .. } => {
                assert_eq!(p, 200.0);
                assert!((rotation_rate + 2.0 / 3.0).abs() < 1e-15);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn switching_models_drops_stale_parameters() {
        let c = RunConfig::resolve(None, &sets(&["motion={\"model\":\"rotation\",\"rate\":0.5}", "motion.model=identity"]))
            .unwrap();
        assert_eq!(c.motion, MotionConfig::Identity {});
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for bad in ["sinogram.nphi=3", "bogus=1", "analysis.extra=true", "motion.rate=2"] {
            let e = RunConfig::resolve(None, &sets(&[bad])).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for bad in ["grid.nx=1", "sinogram.phi_range=[0,7]", "filter.cutoff_fraction=0", "cutoff.psi_margin=1", "analysis.n_phi_scan=4", "phantom=[{\"center\":[0.9,0],\"semi_axes\":[0.5,0.5],\"intensity\":1}]"] {
            let e = RunConfig::resolve(None, &sets(&[bad])).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{bad}");
        }
    }

    #[test]
    fn malformed_set_is_rejected() {
        assert!(RunConfig::resolve(None, &sets(&["no_equals"])).is_err());
        assert!(RunConfig::resolve(None, &sets(&["=3"])).is_err());
    }
}
