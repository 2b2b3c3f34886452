//! Overlap of projections of two clouds onto random isotropic subspaces.

use std::collections::HashMap;

use super::config::{IntersectionMode, Settings};
use super::report::{ExperimentReport, Summary, TrialRecord, Verdict};
use super::{frame_coordinates, streams, trial_stream, B_ROTATION_SEED, THRESHOLD_NOTE};
use crate::dimension::{interior_proxy, positive_measure_proxy_with, ProxyOptions};
use crate::error::{Error, Result};
use crate::fractal::EMBED_ROTATION_SEED;
use crate::grassmannian::sample_isotropic_subspace;
use crate::measure::EmpiricalMeasure;
use crate::par::{map_indexed, Execution};
use crate::rng::RngStream;

/// Shift applied to B in the disjoint control.
pub const DISJOINT_SHIFT: f64 = 1e6;

/// Indices of points of `a` within sup-distance `eps` of some point of `b`
/// (both clouds in the same ℝ^m).
pub fn overlap_indices(a: &EmpiricalMeasure, b: &EmpiricalMeasure, eps: f64) -> Vec<usize> {
    let m = a.dim();
    let cell = |p: &[f64]| -> Vec<i64> { p.iter().map(|x| (x / eps).floor() as i64).collect() };
    let mut table: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    for (j, q) in b.iter_points().enumerate() {
        table.entry(cell(q)).or_default().push(j);
    }
    let span = 3usize.pow(m as u32);
    (0..a.len())
        .filter(|&i| {
            let p = a.point(i);
            let home = cell(p);
            (0..span).any(|mut code| {
                let probe: Vec<i64> = home
                    .iter()
                    .map(|h| {
                        let o = (code % 3) as i64 - 1;
                        code /= 3;
                        h + o
                    })
                    .collect();
                table.get(&probe).is_some_and(|js| {
                    js.iter()
                        .any(|&j| p.iter().zip(b.point(j)).all(|(x, y)| (x - y).abs() <= eps))
                })
            })
        })
        .collect()
}

pub fn run_intersection_experiment(s: &Settings) -> Result<ExperimentReport> {
    let set_a = s.set_a.ok_or_else(|| Error::Config("intersection needs set_a".into()))?;
    let set_b = s.set_b.unwrap_or(set_a);
    let a = set_a.sample_rotated(s.points, &RngStream::new(s.seed, streams::CLOUD_A), EMBED_ROTATION_SEED)?;
    let b = match s.intersection_mode {
        IntersectionMode::Identical => a.clone(),
        IntersectionMode::Independent => {
            set_b.sample_rotated(s.points, &RngStream::new(s.seed, streams::CLOUD_B), B_ROTATION_SEED)?
        }
        IntersectionMode::Disjoint => {
            let b = set_b.sample_rotated(s.points, &RngStream::new(s.seed, streams::CLOUD_B), B_ROTATION_SEED)?;
            let shift = DISJOINT_SHIFT / (b.dim() as f64).sqrt();
            crate::measure::pushforward(&b, |p| p.iter().map(|x| x + shift).collect())?
        }
    };
    let trials = map_indexed(Execution::default(), s.trials, |i| overlap_trial(s, &a, &b, a.dim(), i))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new(s.clone());
    report.summary = Summary::of(&trials, "overlap_fraction", Some("positive"));
    let fraction = report.summary.pass_fraction.unwrap_or(0.0);
    let (key, ok) = match s.intersection_mode {
        IntersectionMode::Independent => ("intersection_positive_fraction", fraction > s.thresholds.intersection_fraction),
        IntersectionMode::Identical => ("identical_control", fraction == 1.0),
        IntersectionMode::Disjoint => ("disjoint_control", fraction == 0.0),
    };
    report.verdicts.insert(key.into(), Verdict::from_bool(ok));
    report.verdicts.insert("interior".into(), Verdict::Reported);
    report.notes.push(format!(
        "A = {set_a}, B = {set_b} ({:?}); overlap = points of P_V A within {} of P_V B",
        s.intersection_mode, s.thresholds.overlap_eps
    ));
    report.notes.push(THRESHOLD_NOTE.into());
    report.trials = trials;
    Ok(report)
}

/// One subspace: overlap of the two projected clouds, the positive-measure
/// proxy on it and the interior witness. `leading` is the number of
/// horizontal coordinates fed to the projection.
pub(crate) fn overlap_trial(
    s: &Settings,
    a: &EmpiricalMeasure,
    b: &EmpiricalMeasure,
    leading: usize,
    i: usize,
) -> Result<TrialRecord> {
    let stream = trial_stream(s.seed, i);
    let v = sample_isotropic_subspace(s.n, s.m, &mut stream.clone())?;
    let mut rec = TrialRecord::new(i, stream.stream_id()).with_frame(v.frame());
    let pa = frame_coordinates(a, v.frame(), leading)?;
    let pb = frame_coordinates(b, v.frame(), leading)?;
    let eps = s.thresholds.overlap_eps;
    let idx = overlap_indices(&pa, &pb, eps);
    rec.set("overlap_fraction", idx.len() as f64 / pa.len() as f64);
    let overlap = pa.select(&idx);
    let proxy = ProxyOptions {
        dim_tolerance: s.thresholds.proxy_dimension,
        cell_tolerance: s.thresholds.proxy_cell_exponent,
        ..ProxyOptions::default()
    };
    let r = positive_measure_proxy_with(&overlap, s.m, &proxy)?;
    rec.set("positive", r.positive as u8 as f64);
    if let Some(d) = &r.dimension {
        rec.set("overlap_dimension", d.value);
    }
    if let Some(reason) = r.reason {
        rec.flag(reason);
    }
    rec.set("interior", interior_proxy(&overlap, eps, eps / 4.0).is_some() as u8 as f64);
    Ok(rec)
}
