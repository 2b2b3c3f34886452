//! JSON experiment configuration and its resolution against per-experiment
//! defaults.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::catalogue::CatalogueSet;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Project,
    Intersect,
    Slice,
    Disintegrate,
    Heisenberg,
    Selftest,
}

impl ExperimentKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Project => "project",
            ExperimentKind::Intersect => "intersect",
            ExperimentKind::Slice => "slice",
            ExperimentKind::Disintegrate => "disintegrate",
            ExperimentKind::Heisenberg => "heisenberg",
            ExperimentKind::Selftest => "selftest",
        }
    }
}

/// How the second cloud of an intersection experiment is produced.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntersectionMode {
    /// Independent sample under a different generic rotation.
    #[default]
    Independent,
    /// B is the very same cloud as A.
    Identical,
    /// B translated by 10⁶ along a fixed direction.
    Disjoint,
}

/// Tolerances and pass fractions of the statistical probes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    pub identity_residual: f64,
    pub orthonormality: f64,
    pub ks_alpha: f64,
    pub disintegration_sigmas: f64,
    pub polar_relative: f64,
    pub smallness_slope: f64,
    pub energy_relative: f64,
    pub atom_absolute: f64,
    pub calibration_euclidean: f64,
    pub calibration_koranyi: f64,
    pub calibration_stderr_factor: f64,
    pub gauge_ball_box: f64,
    pub projection_dimension: f64,
    pub positive_fraction: f64,
    pub proxy_dimension: f64,
    pub proxy_cell_exponent: f64,
    pub intersection_fraction: f64,
    pub overlap_eps: f64,
    pub slice_dimension: f64,
    pub sliced_mass_relative: f64,
    pub min_slab_points: usize,
    pub heisenberg_slice: f64,
    pub dimension_drop_slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            identity_residual: 1e-9,
            orthonormality: 1e-10,
            ks_alpha: 0.01,
            disintegration_sigmas: 3.0,
            polar_relative: 0.02,
            smallness_slope: 0.15,
            energy_relative: 0.02,
            atom_absolute: 1e-12,
            calibration_euclidean: 0.05,
            calibration_koranyi: 0.1,
            calibration_stderr_factor: 2.0,
            gauge_ball_box: 0.2,
            projection_dimension: 0.1,
            positive_fraction: 0.9,
            proxy_dimension: 0.1,
            proxy_cell_exponent: 0.2,
            intersection_fraction: 0.2,
            overlap_eps: 2e-3,
            slice_dimension: 0.25,
            sliced_mass_relative: 0.05,
            min_slab_points: 500,
            heisenberg_slice: 0.3,
            dimension_drop_slack: 0.15,
        }
    }
}

/// The configuration file as written by a user; absent fields take the
/// defaults of the experiment being run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub experiment: Option<ExperimentKind>,
    pub seed: Option<u64>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub set_a: Option<CatalogueSet>,
    pub set_b: Option<CatalogueSet>,
    pub points: Option<usize>,
    pub trials: Option<usize>,
    pub anchors: Option<usize>,
    pub deltas: Option<Vec<f64>>,
    pub samples: Option<usize>,
    pub intersection_mode: Option<IntersectionMode>,
    /// Selftest only: the criteria to run, by number.
    pub criteria: Option<Vec<u32>>,
    #[serde(default)]
    pub thresholds: Thresholds,
    /// Where the CLI writes the report unless `--out` is given.
    pub output: Option<String>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))
    }

    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// A config carrying only a seed.
    pub fn with_seed(seed: u64) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: Some(seed),
            ..Self::default()
        }
    }

    /// Fills defaults for `kind` and validates.
    pub fn resolve(&self, kind: ExperimentKind) -> Result<Settings> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        if let Some(k) = self.experiment {
            if k != kind {
                return Err(Error::Config(format!(
                    "config is for experiment '{}' but '{}' was requested",
                    k.name(),
                    kind.name()
                )));
            }
        }
        let seed = self
            .seed
            .ok_or_else(|| Error::Config("seed is required (in the config or via --seed)".into()))?;
        let d = Defaults::of(kind);
        let s = Settings {
            experiment: kind,
            seed,
            n: self.n.unwrap_or(d.n),
            m: self.m.unwrap_or(d.m),
            set_a: self.set_a.or(d.set_a),
            set_b: self.set_b.or(d.set_b),
            points: self.points.unwrap_or(d.points),
            trials: self.trials.unwrap_or(d.trials),
            anchors: self.anchors.unwrap_or(1),
            deltas: self.deltas.clone().unwrap_or(d.deltas),
            samples: self.samples.unwrap_or(d.samples),
            intersection_mode: self.intersection_mode.unwrap_or_default(),
            criteria: self.criteria.clone().unwrap_or_else(|| (1..=11).collect()),
            thresholds: self.thresholds.clone(),
        };
        s.validate()?;
        Ok(s)
    }
}

struct Defaults {
    n: usize,
    m: usize,
    set_a: Option<CatalogueSet>,
    set_b: Option<CatalogueSet>,
    points: usize,
    trials: usize,
    deltas: Vec<f64>,
    samples: usize,
}

impl Defaults {
    fn of(kind: ExperimentKind) -> Self {
        let base = Defaults {
            n: 2,
            m: 1,
            set_a: None,
            set_b: None,
            points: 100_000,
            trials: 30,
            deltas: vec![],
            samples: 1_000_000,
        };
        match kind {
            ExperimentKind::Project => Defaults {
                set_a: Some(CatalogueSet::Dust3Fifth),
                ..base
            },
            ExperimentKind::Intersect => Defaults {
                set_a: Some(CatalogueSet::Dust8Quarter),
                set_b: Some(CatalogueSet::Dust8Quarter),
                ..base
            },
            ExperimentKind::Slice => Defaults {
                set_a: Some(CatalogueSet::Dust8Quarter),
                points: 400_000,
                trials: 10,
                deltas: vec![0.005, 0.01, 0.02],
                ..base
            },
            ExperimentKind::Disintegrate => base,
            ExperimentKind::Heisenberg => Defaults {
                n: 1,
                set_a: Some(CatalogueSet::GaugeBall),
                set_b: Some(CatalogueSet::HeisDust4),
                points: 400_000,
                trials: 20,
                deltas: vec![0.03],
                ..base
            },
            ExperimentKind::Selftest => base,
        }
    }
}

/// Fully resolved parameters, echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub set_a: Option<CatalogueSet>,
    pub set_b: Option<CatalogueSet>,
    pub points: usize,
    pub trials: usize,
    pub anchors: usize,
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub intersection_mode: IntersectionMode,
    pub criteria: Vec<u32>,
    pub thresholds: Thresholds,
}

pub const MIN_POINTS: usize = 1000;
pub const MIN_SAMPLES: usize = 100;

impl Settings {
    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m == 0 || self.m > self.n {
            return bad(format!("need 1 ≤ m ≤ n, got n={}, m={}", self.n, self.m));
        }
        if self.points < MIN_POINTS {
            return bad(format!("points must be ≥ {MIN_POINTS}, got {}", self.points));
        }
        if self.trials == 0 || self.anchors == 0 {
            return bad("trials and anchors must be ≥ 1".into());
        }
        if self.samples < MIN_SAMPLES {
            return bad(format!("samples must be ≥ {MIN_SAMPLES}, got {}", self.samples));
        }
        if self.deltas.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
            return bad("deltas must be positive and finite".into());
        }
        if let Some(c) = self.criteria.iter().find(|c| !(1..=11).contains(*c)) {
            return bad(format!("unknown criterion {c}"));
        }
        let t = &self.thresholds;
        let fractions = [t.positive_fraction, t.intersection_fraction, t.ks_alpha];
        if fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            return bad("fractions and levels must lie in [0, 1]".into());
        }
        if !(t.overlap_eps > 0.0) {
            return bad("overlap_eps must be positive".into());
        }
        for set in [self.set_a, self.set_b].into_iter().flatten() {
            self.check_set(set)?;
        }
        match self.experiment {
            ExperimentKind::Slice | ExperimentKind::Heisenberg if self.deltas.is_empty() => {
                bad("this experiment needs a non-empty deltas grid".into())
            }
            ExperimentKind::Slice if self.deltas.len() < 2 => {
                bad("slice extrapolation needs at least two deltas".into())
            }
            ExperimentKind::Heisenberg if !self.set_a.is_some_and(|s| s.is_heisenberg()) => {
                bad("the Heisenberg experiment needs Heisenberg sets".into())
            }
            _ => Ok(()),
        }
    }

    fn check_set(&self, set: CatalogueSet) -> Result<()> {
        if self.experiment == ExperimentKind::Selftest {
            return Ok(());
        }
        let ambient = if set.is_heisenberg() {
            2 * self.n + 1
        } else {
            set.metric().point_dim()
        };
        let wanted = if set.is_heisenberg() { 3 } else { 2 * self.n };
        if ambient != wanted || (set.is_heisenberg() && self.n != 1) {
            return Err(Error::Config(format!(
                "set {set} does not live in the ambient space of n = {}",
                self.n
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_is_required() {
        let c = ExperimentConfig::from_json(r#"{"schema_version": 1}"#).unwrap();
        assert!(matches!(c.resolve(ExperimentKind::Project), Err(Error::Config(_))));
        let c = ExperimentConfig::from_json(r#"{"seed": 4}"#).unwrap();
        let s = c.resolve(ExperimentKind::Project).unwrap();
        assert_eq!(s.seed, 4);
        assert_eq!(s.set_a, Some(CatalogueSet::Dust3Fifth));
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            r#"{"seed": 1, "m": 3}"#,
            r#"{"seed": 1, "bogus": 3}"#,
            r#"{"seed": 1, "schema_version": 9}"#,
            r#"{"seed": 1, "points": 10}"#,
            r#"{"seed": 1, "set_a": "middle_thirds"}"#,
            r#"{"seed": 1, "experiment": "slice"}"#,
            r#"{"seed": 1, "thresholds": {"nope": 1}}"#,
        ] {
            let r = ExperimentConfig::from_json(text).and_then(|c| c.resolve(ExperimentKind::Project));
            assert!(matches!(r, Err(Error::Config(_))), "{text}");
        }
    }

    #[test]
    fn thresholds_override_partially() {
        let c = ExperimentConfig::from_json(r#"{"seed": 1, "thresholds": {"overlap_eps": 0.01}}"#).unwrap();
        assert_eq!(c.thresholds.overlap_eps, 0.01);
        assert_eq!(c.thresholds.positive_fraction, 0.9);
    }
}
