//! Predictions from the motion model alone: the Bolker condition, the
//! image of object singularities in the data, visible and invisible
//! directions, and the curves along which limited data add artifacts.

mod artifacts;
mod bolker;
mod energy;
mod mapping;
mod visibility;

pub use artifacts::{artifact_curves, sagitta, tube_mask, ArtifactCurve, ArtifactOptions};
pub use bolker::{
    check_bolker, immersion_determinant, BolkerReport, BolkerTolerances, InjectivityViolation,
};
pub use energy::{
    directional_energy, edge_energy, visibility_classifier, EdgeEnergySummary, EnergyWindow,
    SeedClass, SeedEnergy,
};
pub use mapping::{
    check_uniqueness_condition, map_to_data, map_to_data_diagnostics, DataMapping,
    DataSingularity, PhiSearch, SignMode, UniquenessReport, UniquenessViolation,
    DEFAULT_SCAN_CELLS, ROOT_TOL,
};
pub use visibility::{complement, merge_arcs, visibility, VisibilityReport};
