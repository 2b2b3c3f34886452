//! Estimates checked against values computed independently here.

use std::f64::consts::PI;

use isogeom::catalogue::CatalogueSet;
use isogeom::dimension::{riesz_energy_with, EnergyOptions};
use isogeom::disintegration::{disintegration_check, TestFunction};
use isogeom::experiment::{closed_form_constant, polar_quadrature_ratio};
use isogeom::grassmannian::smallness_curve;
use isogeom::measure::EmpiricalMeasure;
use isogeom::symplectic::Point2n;
use isogeom::RngStream;
use rand::Rng;

/// Root of Σ cᵢ r^s = 1 by Newton's method, where `maps` lists (count, ratio).
fn moran(maps: &[(f64, f64)]) -> f64 {
    let mut s: f64 = 1.0;
    for _ in 0..100 {
        let f: f64 = maps.iter().map(|(c, r)| c * r.powf(s)).sum::<f64>() - 1.0;
        let df: f64 = maps.iter().map(|(c, r)| c * r.powf(s) * r.ln()).sum();
        s -= f / df;
    }
    s
}

#[test]
fn catalogue_dimensions_solve_the_moran_equation() {
    let cases = [
        (CatalogueSet::MiddleThirds, moran(&[(2.0, 1.0 / 3.0)])),
        (CatalogueSet::Dust8Quarter, moran(&[(8.0, 0.25)])),
        (CatalogueSet::Dust3Fifth, moran(&[(3.0, 0.2)])),
        (CatalogueSet::HeisCantor, moran(&[(2.0, 1.0 / 3.0)])),
        (CatalogueSet::HeisDust4, moran(&[(4.0, 1.0 / 3.0)])),
    ];
    for (set, s) in cases {
        assert!((set.dimension() - s).abs() < 1e-10, "{set}: {} vs {s}", set.dimension());
    }
    assert!((moran(&[(3.0, 0.2)]) - 0.6826).abs() < 1e-4);
}

/// ∬_{[0,1]²} |x − y|^{−1/2} by midpoint quadrature of its one-dimensional
/// reduction 2 ∫_0^1 (1 − u) u^{−1/2} du after u = v².
fn uniform_half_energy() -> f64 {
    let steps = 100_000;
    let h = 1.0 / steps as f64;
    (0..steps)
        .map(|k| {
            let v = (k as f64 + 0.5) * h;
            4.0 * (1.0 - v * v) * h
        })
        .sum()
}

#[test]
fn uniform_interval_energy() {
    let oracle = uniform_half_energy();
    assert!((oracle - 8.0 / 3.0).abs() < 1e-8);
    let mut rng = RngStream::new(41, 0);
    let pts: Vec<f64> = (0..20_000).map(|_| rng.random::<f64>()).collect();
    let mu = EmpiricalMeasure::euclidean(1, pts).unwrap();
    let e = riesz_energy_with(&mu, 0.5, mu.metric(), &EnergyOptions::all_pairs()).unwrap();
    assert!((e.unbiased / oracle - 1.0).abs() < 0.03, "{e:?}");
}

#[test]
fn two_atom_energy_by_hand() {
    let mu = EmpiricalMeasure::new(2, vec![0.0, 0.0, 3.0, 4.0], vec![0.25, 0.75], isogeom::metric::MetricTag::Euclidean { dim: 2 })
        .unwrap();
    let e = riesz_energy_with(&mu, 1.0, mu.metric(), &EnergyOptions::all_pairs()).unwrap();
    // 2 · ¼ · ¾ / 5
    assert!((e.value - 0.075).abs() < 1e-12);
}

/// Ratio ∫ f / ((1/π) ∫_0^π ∫_ℝ |s| f(s e_θ) ds dθ) with the trapezoid rule
/// on a Cartesian grid for the numerator and on a polar grid for the
/// denominator.
fn trapezoid_ratio(f: &TestFunction, reach: f64) -> f64 {
    let k = 1200;
    let h = 2.0 * reach / k as f64;
    let mut num = 0.0;
    for i in 0..=k {
        for j in 0..=k {
            let wx = if i == 0 || i == k { 0.5 } else { 1.0 };
            let wy = if j == 0 || j == k { 0.5 } else { 1.0 };
            num += wx * wy * f.evaluate(&[-reach + i as f64 * h, -reach + j as f64 * h]);
        }
    }
    num *= h * h;
    let (nt, ns) = (800, 2400);
    let dt = PI / nt as f64;
    let ds = 2.0 * reach / ns as f64;
    let mut den = 0.0;
    for a in 0..nt {
        let t = (a as f64 + 0.5) * dt;
        for b in 0..=ns {
            let s = -reach + b as f64 * ds;
            let w = if b == 0 || b == ns { 0.5 } else { 1.0 };
            den += w * s.abs() * f.evaluate(&[s * t.cos(), s * t.sin()]);
        }
    }
    den *= dt * ds / PI;
    num / den
}

#[test]
fn plane_ratio_matches_quadrature() {
    for f in TestFunction::catalogue(1) {
        let reach = match &f {
            TestFunction::Bump { radius } => *radius,
            _ => 10.0,
        };
        let oracle = trapezoid_ratio(&f, reach);
        assert!((oracle - polar_quadrature_ratio(&f)).abs() / oracle < 1e-4, "{f:?}");
        let (lhs, rhs) = disintegration_check(&f, 1, 1, 200_000, &RngStream::new(42, 0)).unwrap();
        let (ratio, _) = lhs.ratio(&rhs);
        assert!((ratio / oracle - 1.0).abs() < 0.02, "{f:?}: {ratio} vs {oracle}");
    }
}

#[test]
fn ratio_matches_sphere_constant() {
    for (n, m) in [(2usize, 1usize), (2, 2)] {
        let f = TestFunction::IsotropicGaussian { sigma: 1.0 };
        let (lhs, rhs) = disintegration_check(&f, n, m, 200_000, &RngStream::new(43, n as u64 * 10 + m as u64)).unwrap();
        let (ratio, se) = lhs.ratio(&rhs);
        let c = closed_form_constant(n, m);
        assert!((ratio - c).abs() <= 4.0 * se, "({n},{m}): {ratio} ± {se} vs {c}");
    }
}

#[test]
fn line_smallness_is_an_arcsine() {
    // For n = m = 1, |P_V x| = |x| |cos θ| with θ uniform.
    let x = Point2n::new(vec![0.6, 0.8]).unwrap();
    let deltas = [0.01, 0.05, 0.2, 0.5];
    let curve = smallness_curve(&x, 1, &deltas, 200_000, &RngStream::new(44, 0)).unwrap();
    for (d, e) in deltas.iter().zip(&curve) {
        let exact = 2.0 / PI * d.asin();
        assert!((e.value - exact).abs() <= 4.0 * e.standard_error.max(1e-4), "δ={d}: {} vs {exact}", e.value);
    }
}
