//! Seeded, configuration-driven experiments and the acceptance self-test.
//!
//! Every experiment draws its clouds and per-trial randomness from fixed
//! stream ids under the configured seed, runs trials through the
//! order-preserving parallel helpers, and aggregates in trial order, so a
//! report is a pure function of the resolved configuration.

mod config;
mod disintegrate;
mod heisenberg;
mod identities;
mod intersect;
mod project;
mod report;
pub mod selftest;
mod slice;

pub use config::{
    ExperimentConfig, ExperimentKind, IntersectionMode, Settings, Thresholds, MIN_POINTS, MIN_SAMPLES,
    SCHEMA_VERSION,
};
pub use disintegrate::{closed_form_constant, polar_quadrature_ratio, run_disintegration_experiment};
pub use heisenberg::run_heisenberg_experiment;
pub use identities::identity_suite;
pub use intersect::{overlap_indices, run_intersection_experiment};
pub use project::run_projection_experiment;
pub use report::{ExperimentReport, Summary, TrialRecord, Verdict};
pub use selftest::run_selftest;
pub use slice::run_slicing_experiment;

use std::time::Instant;

use crate::error::Result;
use crate::measure::{pushforward, EmpiricalMeasure};
use crate::metric::MetricTag;
use crate::rng::RngStream;
use crate::symplectic::Frame;

/// Stream ids under the experiment seed.
pub mod streams {
    pub const CLOUD_A: u64 = 1;
    pub const CLOUD_B: u64 = 2;
    pub const TRIALS: u64 = 3;
    pub const GATE: u64 = 4;
    pub const EXTRA: u64 = 5;
    /// Criterion k of the self-test uses `SELFTEST + k`.
    pub const SELFTEST: u64 = 1000;
}

/// Generic rotation used for the second cloud of intersection experiments.
pub const B_ROTATION_SEED: u64 = 0x0B0B_0B0B;

/// Resolves `config` for `kind` and runs it.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<ExperimentReport> {
    let settings = config.resolve(kind)?;
    run_settings(&settings)
}

pub fn run_settings(settings: &Settings) -> Result<ExperimentReport> {
    let start = Instant::now();
    let mut report = match settings.experiment {
        ExperimentKind::Project => run_projection_experiment(settings)?,
        ExperimentKind::Intersect => run_intersection_experiment(settings)?,
        ExperimentKind::Slice => run_slicing_experiment(settings)?,
        ExperimentKind::Disintegrate => run_disintegration_experiment(settings)?,
        ExperimentKind::Heisenberg => run_heisenberg_experiment(settings)?,
        ExperimentKind::Selftest => run_selftest(settings)?,
    };
    report.runtime_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Stream of trial `index`.
pub(crate) fn trial_stream(seed: u64, index: usize) -> RngStream {
    RngStream::new(seed, streams::TRIALS).child(index as u64)
}

/// Frame coordinates of the first `leading` coordinates of every point, as
/// a Euclidean cloud in ℝ^m.
pub(crate) fn frame_coordinates(cloud: &EmpiricalMeasure, frame: &Frame, leading: usize) -> Result<EmpiricalMeasure> {
    pushforward(cloud, |p| frame.coordinates(&p[..leading]))?.with_metric(MetricTag::Euclidean { dim: frame.dim() })
}

/// Note attached to every report of a statistical probe.
pub(crate) const THRESHOLD_NOTE: &str = "pass fractions and tolerance bands are desk-scale choices taken from \
    the thresholds section of the config; the underlying theorems are almost-everywhere statements without \
    effect sizes";
