//! Dimension of slices A ∩ (V^⊥ + x) and the sliced-mass identity.

use super::config::Settings;
use super::report::{ExperimentReport, Summary, TrialRecord, Verdict};
use super::{streams, trial_stream, THRESHOLD_NOTE};
use crate::dimension::{correlation_dimension_with, CorrelationOptions, RadiusGrid};
use crate::error::{Error, Result};
use crate::grassmannian::sample_isotropic_subspace;
use crate::measure::EmpiricalMeasure;
use crate::par::{map_indexed, Execution};
use crate::rng::RngStream;
use crate::slicing::{euclidean_slab, sliced_mass_integral};
use crate::stats::fit_line;
use rand::Rng;

/// Cap on slab points fed to the pairwise correlation kernel.
pub(crate) const SLAB_MAX_POINTS: usize = 10_000;
/// Fit radii start at this multiple of δ, above the slab thickness.
pub(crate) const SLAB_MIN_RADIUS_FACTOR: f64 = 2.0;
/// Slab width and grid step of the sliced-mass Riemann sum.
const MASS_DELTA: f64 = 0.01;
const MASS_STEP: f64 = 0.0037;

pub fn run_slicing_experiment(s: &Settings) -> Result<ExperimentReport> {
    let set = s.set_a.ok_or_else(|| Error::Config("slicing needs set_a".into()))?;
    let dim = set.dimension();
    let cloud = set.sample(s.points, &RngStream::new(s.seed, streams::CLOUD_A))?;
    let pairs = s.trials * s.anchors;
    let trials = map_indexed(Execution::default(), pairs, |k| slice_trial(s, &cloud, k))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new(s.clone());
    let target = dim - s.m as f64;
    report.summary = Summary::of(&trials, "slice_dimension", Some("pass"));
    let dim_ok = report
        .summary
        .median
        .is_some_and(|med| (med - target).abs() <= s.thresholds.slice_dimension);
    report.verdicts.insert("slice_dimension".into(), Verdict::from_bool(dim_ok));
    let worst = trials
        .iter()
        .filter_map(|t| t.get("sliced_mass"))
        .map(|m| (m - cloud.total_mass()).abs() / cloud.total_mass())
        .fold(0.0, f64::max);
    let mass_ok = trials.iter().all(|t| t.get("sliced_mass").is_some())
        && worst <= s.thresholds.sliced_mass_relative;
    report.verdicts.insert("sliced_mass".into(), Verdict::from_bool(mass_ok));
    report.notes.push(format!(
        "{set}: s = {dim:.6}, target s − m = {target:.6}; slice dimension extrapolated linearly to δ = 0"
    ));
    report.notes.push(format!("worst relative sliced-mass error {worst:.4e}"));
    report.notes.push(THRESHOLD_NOTE.into());
    report.trials = trials;
    Ok(report)
}

/// Slice-dimension estimates over the δ grid and their extrapolation.
pub(crate) fn slab_dimensions(
    rec: &mut TrialRecord,
    deltas: &[f64],
    min_points: usize,
    max_fraction: f64,
    grid_top: f64,
    mut slab_at: impl FnMut(f64) -> Result<EmpiricalMeasure>,
) -> Result<Vec<(f64, f64)>> {
    let mut fits = Vec::new();
    for &delta in deltas {
        let slab = slab_at(delta)?;
        rec.set(&format!("slab_points@{delta}"), slab.len() as f64);
        if slab.len() < min_points {
            rec.flag(format!("slab_too_thin@{delta}"));
            continue;
        }
        let grid = RadiusGrid::geometric(delta / 4.0, grid_top, 30)?;
        let opts = CorrelationOptions {
            min_radius: SLAB_MIN_RADIUS_FACTOR * delta,
            max_fraction,
            max_points: Some(SLAB_MAX_POINTS),
            ..CorrelationOptions::default()
        };
        match correlation_dimension_with(&slab, slab.metric(), &grid, &opts) {
            Ok(e) => {
                rec.set(&format!("dimension@{delta}"), e.value);
                fits.push((delta, e.value));
            }
            Err(e) => rec.flag(format!("estimator_error@{delta}: {e}")),
        }
    }
    Ok(fits)
}

/// Intercept at δ = 0 of the line through the (δ, estimate) pairs; a lone
/// pair is returned as is.
pub(crate) fn extrapolate(fits: &[(f64, f64)]) -> Option<f64> {
    match fits {
        [] => None,
        [(_, d)] => Some(*d),
        _ => {
            let x: Vec<f64> = fits.iter().map(|f| f.0).collect();
            let y: Vec<f64> = fits.iter().map(|f| f.1).collect();
            fit_line(&x, &y, None).ok().map(|f| f.intercept)
        }
    }
}

fn slice_trial(s: &Settings, cloud: &EmpiricalMeasure, k: usize) -> Result<TrialRecord> {
    let stream = trial_stream(s.seed, k);
    let mut rng = stream.clone();
    let v = sample_isotropic_subspace(s.n, s.m, &mut rng)?;
    let anchor_index = rng.random_range(0..cloud.len());
    let anchor = cloud.point(anchor_index).to_vec();
    let mut rec = TrialRecord::new(k, stream.stream_id()).with_frame(v.frame());
    rec.set("anchor_index", anchor_index as f64);
    let target = s.set_a.map_or(f64::NAN, |set| set.dimension()) - s.m as f64;
    let fits = slab_dimensions(&mut rec, &s.deltas, s.thresholds.min_slab_points, 0.5, 4.0, |delta| {
        Ok(euclidean_slab(cloud, &v, &anchor, delta)?.measure)
    })?;
    match extrapolate(&fits) {
        Some(d) => {
            rec.set("slice_dimension", d);
            rec.set("pass", ((d - target).abs() <= s.thresholds.slice_dimension) as u8 as f64);
        }
        None => rec.flag("skipped: no usable slab"),
    }
    rec.set(
        "sliced_mass",
        sliced_mass_integral(cloud, v.frame(), MASS_DELTA, MASS_STEP, cloud.dim())?,
    );
    Ok(rec)
}
