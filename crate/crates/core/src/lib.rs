//! Simulation and reconstruction for tomography of deforming objects.
//!
//! A motion model `Γ` turns every line measurement into an integral of
//! the reference object along a curve `C(φ, s)`. This crate provides the
//! forward operator, filtered backprojection type reconstructions, and
//! predictions of which edges a reconstruction can recover and where
//! limited-data artifacts appear, computed from the motion model alone.

// `!(x > 0.0)` style checks are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod grid;
pub mod io;
pub mod microlocal;
pub mod motion;
pub mod operators;
pub mod par;
pub mod phantom;

pub use error::{Error, Result};
pub use geometry::{theta, theta_perp, DirectionAngle, Vec2};
pub use grid::{GridSpec, ImageGrid, Sinogram, SinogramSpec};
pub use motion::MotionModel;
pub use phantom::{default_phantom, Ellipse, EllipsePhantom, SingularitySample};

/// Library version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
