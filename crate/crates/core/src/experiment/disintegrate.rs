//! Both sides of the isotropic disintegration identity across test
//! functions, with a deterministic polar-quadrature oracle for ℝ².

use std::f64::consts::PI;

use super::config::Settings;
use super::report::{ExperimentReport, Summary, TrialRecord, Verdict};
use super::streams;
use crate::disintegration::{disintegration_check, TestFunction};
use crate::error::Result;
use crate::rng::RngStream;

/// |S^{2n−1}| / |S^{m−1}|, the constant relating the two sides.
pub fn closed_form_constant(n: usize, m: usize) -> f64 {
    sphere_area(2 * n) / sphere_area(m)
}

/// Area of the unit sphere S^{k−1} ⊂ ℝ^k.
fn sphere_area(k: usize) -> f64 {
    // |S^{k−1}| = k · |B^k|, with |B^k| from V_k = V_{k−2} · 2π / k.
    let mut v = if k % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * PI / j as f64;
        j += 2;
    }
    k as f64 * v
}

/// Ratio ∫_{ℝ²} f / ∫_{G_h(2,1)} ∫_V |u| f(u) du dμ(V) by composite
/// Simpson quadrature in polar coordinates. Lines through the origin are
/// parametrized by θ ∈ [0, π) with the uniform measure dθ/π.
pub fn polar_quadrature_ratio(f: &TestFunction) -> f64 {
    let radius = support_radius(f);
    let (nr, nt) = (2000, 720);
    let at = |r: f64, t: f64| f.evaluate(&[r * t.cos(), r * t.sin()]);
    // ∫_0^{2π} ∫_0^R f r dr dθ
    let ambient = simpson(0.0, 2.0 * PI, nt, |t| simpson(0.0, radius, nr, |r| r * at(r, t)));
    // (1/π) ∫_0^π ∫_{−R}^{R} |s| f(s e_θ) ds dθ
    let lines = simpson(0.0, PI, nt, |t| simpson(-radius, radius, 2 * nr, |s| s.abs() * at(s, t))) / PI;
    ambient / lines
}

fn support_radius(f: &TestFunction) -> f64 {
    match f {
        TestFunction::IsotropicGaussian { sigma } => 12.0 * sigma,
        TestFunction::AnisotropicGaussian { sigmas } => 12.0 * sigmas.iter().cloned().fold(0.0, f64::max),
        TestFunction::Bump { radius } => *radius,
        TestFunction::Zero | TestFunction::Constant { .. } => 1.0,
    }
}

fn simpson(a: f64, b: f64, intervals: usize, g: impl Fn(f64) -> f64) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| g(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (g(a) + g(b) + inner)
}

/// One record per (test function, side pair): LHS, RHS, their ratio.
pub(crate) fn disintegration_records(
    n: usize,
    m: usize,
    samples: usize,
    stream: &RngStream,
    first_id: usize,
) -> Result<Vec<TrialRecord>> {
    let mut functions = TestFunction::catalogue(n);
    functions.push(TestFunction::Zero);
    let mut out = Vec::new();
    for (k, f) in functions.iter().enumerate() {
        let st = stream.child(k as u64);
        let (lhs, rhs) = disintegration_check(f, n, m, samples, &st)?;
        let mut rec = TrialRecord::new(first_id + k, st.stream_id());
        rec.flag(format!("function:{}", f.label()));
        rec.set("n", n as f64);
        rec.set("m", m as f64);
        rec.set("lhs", lhs.value);
        rec.set("lhs_stderr", lhs.standard_error);
        rec.set("rhs", rhs.value);
        rec.set("rhs_stderr", rhs.standard_error);
        if *f != TestFunction::Zero {
            let (ratio, se) = lhs.ratio(&rhs);
            rec.set("ratio", ratio);
            rec.set("ratio_stderr", se);
            if n == 1 && m == 1 {
                rec.set("polar_oracle", polar_quadrature_ratio(f));
            }
        }
        out.push(rec);
    }
    Ok(out)
}

/// Verdicts for one (n, m): ratio constancy, zero function, and the polar
/// oracle on ℝ².
pub(crate) fn disintegration_verdicts(records: &[TrialRecord], s: &Settings) -> Vec<(String, Verdict)> {
    let ratios: Vec<(f64, f64)> = records
        .iter()
        .filter_map(|r| Some((r.get("ratio")?, r.get("ratio_stderr")?)))
        .collect();
    let mut constancy = !ratios.is_empty();
    for (i, a) in ratios.iter().enumerate() {
        for b in &ratios[i + 1..] {
            constancy &= (a.0 - b.0).abs() <= s.thresholds.disintegration_sigmas * a.1.hypot(b.1);
        }
    }
    let zero = records
        .iter()
        .filter(|r| r.has_flag("function:zero"))
        .all(|r| r.get("lhs") == Some(0.0) && r.get("rhs") == Some(0.0));
    let mut out = vec![
        ("ratio_constancy".to_string(), Verdict::from_bool(constancy)),
        ("zero_function".to_string(), Verdict::from_bool(zero)),
        ("closed_form_constant".to_string(), Verdict::Reported),
    ];
    let polar: Vec<bool> = records
        .iter()
        .filter_map(|r| Some((r.get("ratio")?, r.get("polar_oracle")?)))
        .map(|(q, o)| ((q - o) / o).abs() <= s.thresholds.polar_relative)
        .collect();
    if !polar.is_empty() {
        out.push(("polar_oracle".into(), Verdict::from_bool(polar.iter().all(|b| *b))));
    }
    out
}

pub fn run_disintegration_experiment(s: &Settings) -> Result<ExperimentReport> {
    let stream = RngStream::new(s.seed, streams::TRIALS);
    let trials = disintegration_records(s.n, s.m, s.samples, &stream, 0)?;
    let mut report = ExperimentReport::new(s.clone());
    for (k, v) in disintegration_verdicts(&trials, s) {
        report.verdicts.insert(k, v);
    }
    report.summary = Summary::of(&trials, "ratio", None);
    report.notes.push(format!(
        "closed-form constant |S^(2n−1)|/|S^(m−1)| = {:.6} for n = {}, m = {}",
        closed_form_constant(s.n, s.m),
        s.n,
        s.m
    ));
    report.trials = trials;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants() {
        assert!((closed_form_constant(1, 1) - PI).abs() < 1e-12);
        assert!((closed_form_constant(2, 1) - PI * PI).abs() < 1e-12);
        assert!((closed_form_constant(2, 2) - PI).abs() < 1e-12);
    }

    #[test]
    fn polar_ratio_is_pi() {
        for f in TestFunction::catalogue(1) {
            assert!((polar_quadrature_ratio(&f) / PI - 1.0).abs() < 1e-6, "{f:?}");
        }
    }
}
