//! Small statistics toolkit: Monte-Carlo means, Kolmogorov–Smirnov tests,
//! least-squares lines and order statistics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A Monte-Carlo mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
}

impl MonteCarloEstimate {
    /// Standard error of `self − other` for independent estimates.
    pub fn joint_error(&self, other: &Self) -> f64 {
        self.standard_error.hypot(other.standard_error)
    }

    /// Ratio `self / other` with a first-order (delta method) error.
    pub fn ratio(&self, other: &Self) -> (f64, f64) {
        let r = self.value / other.value;
        let rel = (self.standard_error / self.value).hypot(other.standard_error / other.value);
        (r, (r * rel).abs())
    }
}

/// Running mean / second moment (Welford), mergeable in a fixed order.
#[derive(Clone, Copy, Debug, Default)]
pub struct MeanAccumulator {
    count: u64,
    mean: f64,
    m2: f64,
}

impl MeanAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * (self.count as f64) * (other.count as f64) / n;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn estimate(&self) -> MonteCarloEstimate {
        let se = if self.count > 1 {
            (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
        } else {
            0.0
        };
        MonteCarloEstimate {
            value: self.mean,
            standard_error: se,
            samples: self.count,
        }
    }
}

/// Binomial proportion estimate.
pub fn proportion(successes: u64, trials: u64) -> MonteCarloEstimate {
    let p = successes as f64 / trials as f64;
    MonteCarloEstimate {
        value: p,
        standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
        samples: trials,
    }
}

/// Outcome of a Kolmogorov–Smirnov test.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub statistic: f64,
    pub critical_value: f64,
    pub p_value: f64,
    pub passed: bool,
}

/// c(α) = sqrt(−ln(α/2)/2), the asymptotic Kolmogorov quantile.
pub fn ks_coefficient(alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt()
}

/// Asymptotic survival function of the Kolmogorov distribution.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut s = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        s += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * s).clamp(0.0, 1.0)
}

fn sorted(v: &[f64]) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(Error::Argument("sample contains NaN".into()));
    }
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    Ok(s)
}

/// Two-sample statistic sup |F_a − F_b|.
pub fn ks_two_sample_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("KS test needs non-empty samples".into()));
    }
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Two-sample KS test at level `alpha` (asymptotic critical value).
pub fn ks_two_sample(a: &[f64], b: &[f64], alpha: f64) -> Result<KsReport> {
    let statistic = ks_two_sample_statistic(a, b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let scale = ((na + nb) / (na * nb)).sqrt();
    let critical_value = ks_coefficient(alpha) * scale;
    Ok(KsReport {
        statistic,
        critical_value,
        p_value: kolmogorov_survival(statistic / scale),
        passed: statistic < critical_value,
    })
}

/// One-sample KS test against a continuous CDF.
pub fn ks_one_sample<F: Fn(f64) -> f64>(sample: &[f64], cdf: F, alpha: f64) -> Result<KsReport> {
    if sample.is_empty() {
        return Err(Error::Argument("KS test needs a non-empty sample".into()));
    }
    let s = sorted(sample)?;
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in s.iter().enumerate() {
        let f = cdf(*x);
        d = d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n);
    }
    let critical_value = ks_coefficient(alpha) / n.sqrt();
    Ok(KsReport {
        statistic: d,
        critical_value,
        p_value: kolmogorov_survival(d * n.sqrt()),
        passed: d < critical_value,
    })
}

/// Least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub intercept_stderr: f64,
    /// Root mean square of the residuals.
    pub residual_rms: f64,
}

/// Ordinary (or weighted, when `weights` is given) least squares.
pub fn fit_line(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LineFit> {
    let n = x.len();
    if n != y.len() || weights.is_some_and(|w| w.len() != n) {
        return Err(Error::Argument("fit_line: length mismatch".into()));
    }
    if n < 2 {
        return Err(Error::Estimation(format!("need ≥ 2 points for a line, got {n}")));
    }
    let w = |i: usize| weights.map_or(1.0, |w| w[i]);
    let sw: f64 = (0..n).map(w).sum();
    let mx = (0..n).map(|i| w(i) * x[i]).sum::<f64>() / sw;
    let my = (0..n).map(|i| w(i) * y[i]).sum::<f64>() / sw;
    let sxx: f64 = (0..n).map(|i| w(i) * (x[i] - mx).powi(2)).sum();
    let sxy: f64 = (0..n).map(|i| w(i) * (x[i] - mx) * (y[i] - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::Estimation("fit_line: degenerate abscissae".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = (0..n)
        .map(|i| w(i) * (y[i] - intercept - slope * x[i]).powi(2))
        .sum();
    let dof = (n as f64 - 2.0).max(1.0);
    let sigma2 = ssr / sw * n as f64 / dof;
    let slope_var = sigma2 / sxx * sw / n as f64;
    let residual_rms = ((0..n)
        .map(|i| (y[i] - intercept - slope * x[i]).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr: slope_var.sqrt(),
        intercept_stderr: (slope_var * (sxx / sw + mx * mx)).sqrt(),
        residual_rms,
    })
}

/// Linear-interpolated quantile of an unsorted sample (`q` in [0, 1]).
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let s = sorted(values).ok()?;
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    Some(s[lo] + (s[hi] - s[lo]) * (pos - lo as f64))
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    #[test]
    fn accumulator_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut whole = MeanAccumulator::new();
        xs.iter().for_each(|x| whole.push(*x));
        let mut merged = MeanAccumulator::new();
        for chunk in xs.chunks(64) {
            let mut c = MeanAccumulator::new();
            chunk.iter().for_each(|x| c.push(*x));
            merged.merge(&c);
        }
        let (a, b) = (whole.estimate(), merged.estimate());
        assert_abs_diff_eq!(a.value, b.value, epsilon = 1e-12);
        assert_abs_diff_eq!(a.standard_error, b.standard_error, epsilon = 1e-12);
        assert_eq!(a.samples, 1000);
    }

    #[test]
    fn ks_identical_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let r = ks_two_sample(&a, &a, 0.01).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn ks_disjoint_samples() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..100).map(|i| 1000.0 + i as f64).collect();
        let r = ks_two_sample(&a, &b, 0.01).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(!r.passed);
    }

    #[test]
    fn ks_handles_ties() {
        let a = [1.0, 1.0, 2.0, 2.0];
        let b = [1.0, 2.0];
        assert_eq!(ks_two_sample_statistic(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn ks_critical_value_one_percent() {
        // Tabulated asymptotic coefficient for α = 0.01.
        assert_abs_diff_eq!(ks_coefficient(0.01), 1.6276, epsilon = 1e-4);
        assert_abs_diff_eq!(kolmogorov_survival(1.6276), 0.01, epsilon = 2e-4);
    }

    #[test]
    fn ks_one_sample_uniform() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let s: Vec<f64> = (0..5000).map(|_| rng.random::<f64>()).collect();
        assert!(ks_one_sample(&s, |x| x.clamp(0.0, 1.0), 0.01).unwrap().passed);
        let skew: Vec<f64> = s.iter().map(|x| x * x).collect();
        assert!(!ks_one_sample(&skew, |x| x.clamp(0.0, 1.0), 0.01).unwrap().passed);
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y, None).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 1.0, epsilon = 1e-12);
        assert!(f.slope_stderr < 1e-12);
        assert!(fit_line(&[1.0], &[1.0], None).is_err());
    }

    #[test]
    fn quantiles() {
        let v = [4.0, 1.0, 3.0, 2.0, 5.0];
        assert_eq!(median(&v), Some(3.0));
        assert_eq!(quantile(&v, 0.25), Some(2.0));
        assert_eq!(median(&[]), None);
    }
}
