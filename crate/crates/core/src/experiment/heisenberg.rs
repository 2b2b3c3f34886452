//! Heisenberg probes: vertical-coset slices, the dimension drop under π,
//! and horizontal-projection intersections.

use super::config::{IntersectionMode, Settings};
use super::intersect::overlap_trial;
use super::report::{ExperimentReport, Summary, TrialRecord, Verdict};
use super::slice::{extrapolate, slab_dimensions};
use super::{streams, trial_stream, THRESHOLD_NOTE};
use crate::catalogue::CatalogueSet;
use crate::dimension::{correlation_dimension, RadiusGrid};
use crate::error::{Error, Result};
use crate::grassmannian::sample_isotropic_subspace;
use crate::heisenberg::{horizontal_projection, mul, vertical_projection, vertical_coset_slab, HeisenbergPoint, HorizontalSubgroup};
use crate::measure::{pushforward, EmpiricalMeasure};
use crate::metric::MetricTag;
use crate::par::{map_chunks, map_indexed, Execution};
use crate::rng::RngStream;
use rand::Rng;

/// Korányi slab fits keep C(r) ≤ this fraction; larger radii feel the
/// curved boundary of the slab.
pub(crate) const KORANYI_SLAB_MAX_FRACTION: f64 = 0.1;

const GATE_CHUNK: usize = 8192;

/// Largest coordinate residual of p = P_𝕍⊥(p) * P_𝕍(p) over every point of
/// `cloud`, for one sampled horizontal subgroup.
pub(crate) fn gate_cloud(cloud: &EmpiricalMeasure, h: &HorizontalSubgroup) -> Result<f64> {
    let chunks = map_chunks(Execution::default(), cloud.len(), GATE_CHUNK, |_, range| {
        let mut worst = 0.0f64;
        for i in range {
            let p = HeisenbergPoint::from_slice(cloud.point(i))?;
            let split = mul(&vertical_projection(h, &p)?, &horizontal_projection(h, &p)?)?;
            let r = split
                .to_vec()
                .iter()
                .zip(cloud.point(i))
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            if !(r <= worst) {
                worst = r;
            }
        }
        Ok::<_, Error>(worst)
    });
    let mut worst = 0.0f64;
    for c in chunks {
        let r = c?;
        if !(r <= worst) {
            worst = r;
        }
    }
    Ok(worst)
}

pub fn run_heisenberg_experiment(s: &Settings) -> Result<ExperimentReport> {
    let set_a = s.set_a.ok_or_else(|| Error::Config("heisenberg needs set_a".into()))?;
    let set_b = s.set_b.unwrap_or(CatalogueSet::HeisDust4);
    let a = set_a.sample(s.points, &RngStream::new(s.seed, streams::CLOUD_A))?;
    let b = set_b.sample(s.points, &RngStream::new(s.seed, streams::CLOUD_B))?;
    let mut report = ExperimentReport::new(s.clone());
    report.notes.push(THRESHOLD_NOTE.into());

    // Gating: the splitting identity on every generated point.
    let gate_v = HorizontalSubgroup::new(sample_isotropic_subspace(s.n, s.m, &mut RngStream::new(s.seed, streams::GATE))?);
    let drop_sets: Vec<CatalogueSet> = CatalogueSet::ALL.into_iter().filter(|c| c.is_heisenberg()).collect();
    let drop_clouds = drop_sets
        .iter()
        .enumerate()
        .map(|(k, set)| set.sample(s.points.min(100_000), &RngStream::new(s.seed, streams::EXTRA).child(k as u64)))
        .collect::<Result<Vec<_>>>()?;
    let mut gate = gate_cloud(&a, &gate_v)?.max(gate_cloud(&b, &gate_v)?);
    for c in &drop_clouds {
        gate = gate.max(gate_cloud(c, &gate_v)?);
    }
    let gate_ok = gate <= s.thresholds.identity_residual;
    report.verdicts.insert("gating".into(), Verdict::from_bool(gate_ok));
    report.notes.push(format!("gating residual {gate:.3e}"));
    if !gate_ok {
        report.notes.push("splitting identity failed; statistics skipped".into());
        return Ok(report);
    }

    // Vertical-coset slices of A, then horizontal overlaps of A and B,
    // both on the same subspace per trial.
    let target = set_a.dimension() - s.m as f64;
    let mut trials = map_indexed(Execution::default(), s.trials, |i| {
        let stream = trial_stream(s.seed, i);
        let mut rng = stream.clone();
        let v = sample_isotropic_subspace(s.n, s.m, &mut rng)?;
        let h = HorizontalSubgroup::new(v.clone());
        let anchor_index = rng.random_range(0..a.len());
        let p = HeisenbergPoint::from_slice(a.point(anchor_index))?;
        let mut rec = TrialRecord::new(i, stream.stream_id()).with_frame(v.frame());
        rec.set("anchor_index", anchor_index as f64);
        let fits = slab_dimensions(
            &mut rec,
            &s.deltas,
            s.thresholds.min_slab_points,
            KORANYI_SLAB_MAX_FRACTION,
            2.0,
            |delta| Ok(vertical_coset_slab(&a, &h, &p, delta)?.measure),
        )?;
        match extrapolate(&fits) {
            Some(d) => {
                rec.set("slice_dimension", d);
                rec.set("pass", ((d - target).abs() <= s.thresholds.heisenberg_slice) as u8 as f64);
            }
            None => rec.flag("skipped: no usable slab"),
        }
        let overlap = overlap_trial(
            &Settings {
                intersection_mode: IntersectionMode::Independent,
                ..s.clone()
            },
            &a,
            &b,
            2 * s.n,
            i,
        )?;
        for (k, v) in overlap.estimates {
            rec.set(&format!("horizontal.{k}"), v);
        }
        Ok(rec)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    report.summary = Summary::of(&trials, "slice_dimension", Some("pass"));
    // The slice theorem needs dim A > m + 2; below that it is only reported.
    let slice_verdict = if set_a.dimension() > s.m as f64 + 2.0 {
        Verdict::from_bool(
            report
                .summary
                .median
                .is_some_and(|med| (med - target).abs() <= s.thresholds.heisenberg_slice),
        )
    } else {
        Verdict::Reported
    };
    report.verdicts.insert("slice_dimension".into(), slice_verdict);
    report.verdicts.insert("horizontal_intersection".into(), Verdict::Reported);
    report.notes.push(format!(
        "A = {set_a} (Korányi dim {:.4}), slice target {target:.4}; B = {set_b} for horizontal overlaps",
        set_a.dimension()
    ));

    // dim_E π(D) ≥ dim D − 2 on every Heisenberg catalogue set.
    let mut drop_ok = true;
    for (k, (set, cloud)) in drop_sets.iter().zip(&drop_clouds).enumerate() {
        let image = pushforward(cloud, |p| p[..2 * s.n].to_vec())?.with_metric(MetricTag::Euclidean { dim: 2 * s.n })?;
        let mut rec = TrialRecord::new(s.trials + k, RngStream::new(s.seed, streams::EXTRA).child(k as u64).stream_id());
        rec.flag(format!("dimension_drop:{set}"));
        rec.set("koranyi_dimension", set.dimension());
        let est = RadiusGrid::for_measure(&image, 6.0, 30).and_then(|g| correlation_dimension(&image, image.metric(), &g));
        match est {
            Ok(e) => {
                rec.set("projected_dimension", e.value);
                let ok = e.value >= set.dimension() - 2.0 - s.thresholds.dimension_drop_slack;
                rec.set("drop_holds", ok as u8 as f64);
                drop_ok &= ok;
            }
            Err(e) => {
                rec.flag(format!("estimator_error: {e}"));
                drop_ok = false;
            }
        }
        trials.push(rec);
    }
    report.verdicts.insert("dimension_drop".into(), Verdict::from_bool(drop_ok));
    report.trials = trials;
    Ok(report)
}
