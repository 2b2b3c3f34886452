//! End-to-end behaviour of the configured experiments.

use isogeom::catalogue::CatalogueSet;
use isogeom::dimension::{correlation_dimension, RadiusGrid};
use isogeom::experiment::{run, ExperimentConfig, ExperimentKind, IntersectionMode, Verdict};
use isogeom::grassmannian::sample_isotropic_subspace;
use isogeom::slicing::euclidean_slab;
use isogeom::{Error, RngStream};

fn small(kind: &str, extra: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(&format!(
        r#"{{"experiment": "{kind}", "seed": 7, "points": 20000, "trials": 4 {extra}}}"#
    ))
    .unwrap()
}

#[test]
fn invalid_configs_are_config_errors() {
    let c = small("project", r#", "n": 1, "m": 2"#);
    assert!(matches!(run(ExperimentKind::Project, &c), Err(Error::Config(_))));
    let c = ExperimentConfig::from_json(r#"{"experiment": "project"}"#).unwrap();
    assert!(matches!(c.resolve(ExperimentKind::Project), Err(Error::Config(_))));
    assert!(matches!(ExperimentConfig::from_json(r#"{"seed": 1, "colour": 3}"#), Err(Error::Config(_))));
    let c = small("project", "");
    assert!(matches!(c.resolve(ExperimentKind::Slice), Err(Error::Config(_))));
    let c = small("project", r#", "set_a": "heis_dust4""#);
    assert!(matches!(c.resolve(ExperimentKind::Project), Err(Error::Config(_))));
}

#[test]
fn reports_are_deterministic_and_trials_replayable() {
    let c = small("project", "");
    let a = run(ExperimentKind::Project, &c).unwrap();
    let b = run(ExperimentKind::Project, &c).unwrap();
    assert_eq!(a.to_json_without_timing().unwrap(), b.to_json_without_timing().unwrap());
    assert_eq!(a.trials.len(), 4);
    for t in &a.trials {
        let v = sample_isotropic_subspace(2, 1, &mut RngStream::new(7, t.stream_id)).unwrap();
        assert_eq!(t.subspace_frame.as_deref(), Some(v.frame().vectors()));
    }
    let mut c8 = c.clone();
    c8.seed = Some(8);
    let other = run(ExperimentKind::Project, &c8).unwrap();
    assert_ne!(a.trials[0].subspace_frame, other.trials[0].subspace_frame);

    let csv = a.to_csv().unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("trial_id,stream_id"), "{header}");
    assert!(header.contains("estimates.dimension"), "{header}");
    assert_eq!(lines.count(), 4);
}

#[test]
fn intersection_controls() {
    let mut c = small("intersect", "");
    c.intersection_mode = Some(IntersectionMode::Identical);
    let r = run(ExperimentKind::Intersect, &c).unwrap();
    assert_eq!(r.verdicts.get("identical_control"), Some(&Verdict::Pass), "{:?}", r.verdicts);
    c.intersection_mode = Some(IntersectionMode::Disjoint);
    let r = run(ExperimentKind::Intersect, &c).unwrap();
    assert_eq!(r.verdicts.get("disjoint_control"), Some(&Verdict::Pass), "{:?}", r.verdicts);
}

#[test]
fn wide_slab_is_the_whole_set() {
    let mu = CatalogueSet::Dust8Quarter.sample(20_000, &RngStream::new(9, 1)).unwrap();
    let v = sample_isotropic_subspace(2, 1, &mut RngStream::new(9, 2)).unwrap();
    let delta = 10.0 * mu.diameter_bound();
    let slab = euclidean_slab(&mu, &v, mu.point(0), delta).unwrap();
    assert_eq!(slab.measure.len(), mu.len());
    assert!((slab.sliced_mass() * 2.0 * delta - 1.0).abs() < 1e-12);
    let grid = RadiusGrid::for_measure(&mu, 4.0, 24).unwrap();
    let full = correlation_dimension(&mu, mu.metric(), &grid).unwrap();
    let sliced = correlation_dimension(&slab.measure, slab.measure.metric(), &grid).unwrap();
    assert!((full.value - sliced.value).abs() < 1e-9);
    assert!((full.value - 1.5).abs() < 0.15, "{}", full.value);
}

#[test]
fn disintegration_of_zero_is_zero() {
    let c = ExperimentConfig::from_json(r#"{"experiment": "disintegrate", "seed": 3, "samples": 20000}"#).unwrap();
    let r = run(ExperimentKind::Disintegrate, &c).unwrap();
    assert_eq!(r.verdicts.get("zero_function"), Some(&Verdict::Pass), "{:?}", r.verdicts);
}

#[test]
fn heisenberg_clouds_export_with_named_columns() {
    let mu = CatalogueSet::HeisDust4.sample(50, &RngStream::new(4, 1)).unwrap();
    let mut out = Vec::new();
    mu.write_csv(&mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("z_1,z_2,t,weight"));
    assert_eq!(lines.count(), 50);
}
