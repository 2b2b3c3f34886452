//! Computational toolkit for projections and slices along isotropic
//! subspaces of ℝ^{2n} and along horizontal subgroups of the Heisenberg
//! group ℍ^n.
//!
//! The crate is organized bottom-up:
//!
//! * [`symplectic`]: the symplectic form, frames, isotropy, projectors.
//! * [`grassmannian`]: Haar sampling of U(n) and of the invariant measure
//!   on the isotropic Grassmannian, with Monte-Carlo probes of it.
//! * [`disintegration`]: both sides of the isotropic disintegration
//!   identity for a catalogue of test functions.
//! * [`measure`], [`fractal`]: weighted point clouds and self-similar sets
//!   with known similarity dimension.
//! * [`metric`], [`dimension`]: Riesz energies, correlation and box
//!   dimension under Euclidean or Korányi distance.
//! * [`heisenberg`]: group law, gauge, dilations, horizontal and vertical
//!   projections, coset slabs and Heisenberg self-similar sets.
//! * [`catalogue`], [`experiment`]: the built-in sets and the seeded
//!   experiments that turn them into reports.
//!
//! Data-parallel loops run on rayon when the `parallel` feature (default)
//! is enabled and sequentially otherwise; results are bit-identical either
//! way.

pub mod catalogue;
pub mod dimension;
pub mod disintegration;
mod error;
pub mod experiment;
pub mod fractal;
pub mod grassmannian;
pub mod heisenberg;
pub mod measure;
pub mod metric;
pub mod par;
pub mod rng;
pub mod slicing;
pub mod stats;
pub mod symplectic;

pub use error::{Error, Result};
pub use rng::RngStream;

/// Library version embedded in experiment reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
