//! Dimension of projections onto random isotropic subspaces.

use super::config::Settings;
use super::report::{ExperimentReport, Summary, TrialRecord, Verdict};
use super::{frame_coordinates, streams, trial_stream, THRESHOLD_NOTE};
use crate::catalogue::CatalogueSet;
use crate::dimension::{correlation_dimension, positive_measure_proxy_with, ProxyOptions, RadiusGrid};
use crate::error::{Error, Result};
use crate::grassmannian::sample_isotropic_subspace;
use crate::measure::EmpiricalMeasure;
use crate::par::{map_indexed, Execution};
use crate::rng::RngStream;

const GRID_DECADES: f64 = 6.0;
const GRID_COUNT: usize = 30;

/// For each sampled V ~ μ_{2n,m}: the correlation dimension of P_V μ when
/// s ≤ m, the positive-measure proxy otherwise.
pub fn run_projection_experiment(s: &Settings) -> Result<ExperimentReport> {
    let set = s.set_a.ok_or_else(|| Error::Config("projection needs set_a".into()))?;
    let dim = set.dimension();
    let cloud = set.sample(s.points, &RngStream::new(s.seed, streams::CLOUD_A))?;
    let below = dim <= s.m as f64;
    let proxy = ProxyOptions {
        dim_tolerance: s.thresholds.proxy_dimension,
        cell_tolerance: s.thresholds.proxy_cell_exponent,
        ..ProxyOptions::default()
    };
    let results = map_indexed(Execution::default(), s.trials, |i| {
        projection_trial(s, &cloud, below, &proxy, i)
    });
    let trials = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut report = ExperimentReport::new(s.clone());
    report.notes.push(format!("{set}: s = {dim:.6}, m = {}", s.m));
    report.notes.push(THRESHOLD_NOTE.into());
    if below {
        report.summary = Summary::of(&trials, "dimension", Some("pass"));
        let ok = report
            .summary
            .median
            .is_some_and(|med| (med - dim).abs() <= s.thresholds.projection_dimension);
        report.verdicts.insert("projection_dimension".into(), Verdict::from_bool(ok));
    } else {
        report.summary = Summary::of(&trials, "dimension", Some("positive"));
        let ok = report
            .summary
            .pass_fraction
            .is_some_and(|f| f >= s.thresholds.positive_fraction);
        report.verdicts.insert("projection_positive".into(), Verdict::from_bool(ok));
    }
    report.trials = trials;
    Ok(report)
}

fn projection_trial(
    s: &Settings,
    cloud: &EmpiricalMeasure,
    below: bool,
    proxy: &ProxyOptions,
    i: usize,
) -> Result<TrialRecord> {
    let stream = trial_stream(s.seed, i);
    let v = sample_isotropic_subspace(s.n, s.m, &mut stream.clone())?;
    let mut rec = TrialRecord::new(i, stream.stream_id()).with_frame(v.frame());
    let projected = frame_coordinates(cloud, v.frame(), cloud.dim())?;
    let target = s.set_a.map_or(f64::NAN, |set: CatalogueSet| set.dimension());
    if below {
        let est = RadiusGrid::for_measure(&projected, GRID_DECADES, GRID_COUNT)
            .and_then(|g| correlation_dimension(&projected, projected.metric(), &g));
        match est {
            Ok(e) => {
                rec.set("dimension", e.value);
                rec.set("stderr", e.stderr);
                let ok = (e.value - target).abs() <= s.thresholds.projection_dimension;
                rec.set("pass", ok as u8 as f64);
            }
            Err(e) => rec.flag(format!("estimator_error: {e}")),
        }
    } else {
        let r = positive_measure_proxy_with(&projected, s.m, proxy)?;
        if let Some(d) = &r.dimension {
            rec.set("dimension", d.value);
        }
        if let Some(e) = r.cell_exponent {
            rec.set("cell_exponent", e);
        }
        rec.set("positive", r.positive as u8 as f64);
        if let Some(reason) = r.reason {
            rec.flag(reason);
        }
    }
    Ok(rec)
}
