//! Monte-Carlo evaluation of both sides of the isotropic disintegration
//! identity
//!
//! ```text
//! ∫_{ℝ^{2n}} f(x) dx  =  c(n, m) ∫_{G_h(2n,m)} ∫_V |u|^{2n−m} f(u) dH^m(u) dμ(V)
//! ```
//!
//! for a small catalogue of integrable test functions. The constant is not
//! known in closed form here; callers compare the ratio LHS/RHS across
//! test functions.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grassmannian::{sample_isotropic_subspace, TRIAL_CHUNK};
use crate::par::{map_chunks, Execution};
use crate::rng::RngStream;
use crate::stats::{MeanAccumulator, MonteCarloEstimate};

/// Test functions with a fixed importance-sampling recipe each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TestFunction {
    /// exp(−|x|²/2σ²)
    IsotropicGaussian { sigma: f64 },
    /// exp(−Σ x_i²/2σ_i²), one width per coordinate of ℝ^{2n}.
    AnisotropicGaussian { sigmas: Vec<f64> },
    /// exp(−1/(1 − |x|²/ρ²)) on |x| < ρ, zero outside.
    Bump { radius: f64 },
    /// f ≡ 0.
    Zero,
    /// A nonzero constant; not integrable on ℝ^{2n}.
    Constant { value: f64 },
}

impl TestFunction {
    /// Widths `0.6, 1.0, 1.4, …` cycled over the 2n coordinates.
    pub fn anisotropic_default(n: usize) -> Self {
        let base = [0.6, 1.0, 1.4, 0.8];
        TestFunction::AnisotropicGaussian {
            sigmas: (0..2 * n).map(|i| base[i % base.len()]).collect(),
        }
    }

    /// The three integrable catalogue functions for ℝ^{2n}.
    pub fn catalogue(n: usize) -> Vec<TestFunction> {
        vec![
            TestFunction::IsotropicGaussian { sigma: 1.0 },
            TestFunction::anisotropic_default(n),
            TestFunction::Bump { radius: 1.5 },
        ]
    }

    pub fn label(&self) -> &'static str {
        match self {
            TestFunction::IsotropicGaussian { .. } => "isotropic_gaussian",
            TestFunction::AnisotropicGaussian { .. } => "anisotropic_gaussian",
            TestFunction::Bump { .. } => "bump",
            TestFunction::Zero => "zero",
            TestFunction::Constant { .. } => "constant",
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::IsotropicGaussian { sigma } => {
                (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * sigma * sigma)).exp()
            }
            TestFunction::AnisotropicGaussian { sigmas } => (-x
                .iter()
                .zip(sigmas)
                .map(|(v, s)| v * v / (2.0 * s * s))
                .sum::<f64>())
            .exp(),
            TestFunction::Bump { radius } => {
                let r2 = x.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
                if r2 < 1.0 {
                    (-1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }
            TestFunction::Zero => 0.0,
            TestFunction::Constant { value } => *value,
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        match self {
            TestFunction::IsotropicGaussian { sigma } if !(*sigma > 0.0) => {
                Err(Error::Argument("gaussian width must be positive".into()))
            }
            TestFunction::AnisotropicGaussian { sigmas } => {
                if sigmas.len() != 2 * n {
                    Err(Error::DimensionMismatch {
                        expected: 2 * n,
                        actual: sigmas.len(),
                    })
                } else if sigmas.iter().any(|s| !(*s > 0.0)) {
                    Err(Error::Argument("gaussian widths must be positive".into()))
                } else {
                    Ok(())
                }
            }
            TestFunction::Bump { radius } if !(*radius > 0.0) => {
                Err(Error::Argument("bump radius must be positive".into()))
            }
            TestFunction::Constant { .. } => Err(Error::Argument(
                "constant test function is not integrable on ℝ^2n".into(),
            )),
            _ => Ok(()),
        }
    }
}

/// Importance sampler in ℝ^k; returns the density of the drawn point.
#[derive(Clone, Copy, Debug)]
enum Proposal {
    /// Centered Gaussian with the given per-call width.
    Gaussian(f64),
    /// Uniform on the centered ball of the given radius.
    Ball(f64),
}

fn unit_ball_volume(k: usize) -> f64 {
    // π^{k/2} / Γ(k/2 + 1) by the recursion V_k = V_{k−2}·2π/k.
    let mut v = if k % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if k % 2 == 0 { 2 } else { 3 };
    while j <= k {
        v *= 2.0 * std::f64::consts::PI / j as f64;
        j += 2;
    }
    v
}

impl Proposal {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> f64 {
        let k = out.len();
        match *self {
            Proposal::Gaussian(s) => {
                let mut q = 0.0;
                for o in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = s * g;
                    q += g * g;
                }
                (-q / 2.0).exp() / (2.0 * std::f64::consts::PI * s * s).powf(k as f64 / 2.0)
            }
            Proposal::Ball(radius) => {
                let mut q = 0.0;
                for o in out.iter_mut() {
                    let g: f64 = rng.sample(StandardNormal);
                    *o = g;
                    q += g * g;
                }
                let r = radius * rng.random::<f64>().powf(1.0 / k as f64) / q.sqrt();
                for o in out.iter_mut() {
                    *o *= r;
                }
                1.0 / (unit_ball_volume(k) * radius.powi(k as i32))
            }
        }
    }
}

fn ambient_proposal(f: &TestFunction, n: usize) -> Vec<Proposal> {
    match f {
        TestFunction::IsotropicGaussian { sigma } => vec![Proposal::Gaussian(*sigma); 2 * n],
        TestFunction::AnisotropicGaussian { sigmas } => {
            sigmas.iter().map(|s| Proposal::Gaussian(*s)).collect()
        }
        TestFunction::Bump { radius } => vec![Proposal::Ball(*radius)],
        TestFunction::Zero | TestFunction::Constant { .. } => vec![Proposal::Gaussian(1.0); 2 * n],
    }
}

fn plane_proposal(f: &TestFunction) -> Proposal {
    match f {
        TestFunction::IsotropicGaussian { sigma } => Proposal::Gaussian(*sigma),
        TestFunction::AnisotropicGaussian { sigmas } => {
            Proposal::Gaussian(sigmas.iter().cloned().fold(0.0, f64::max))
        }
        TestFunction::Bump { radius } => Proposal::Ball(*radius),
        TestFunction::Zero | TestFunction::Constant { .. } => Proposal::Gaussian(1.0),
    }
}

/// Importance-sampling estimate of ∫_{ℝ^{2n}} f.
pub fn ambient_integral(
    f: &TestFunction,
    n: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<MonteCarloEstimate> {
    f.validate(n)?;
    if samples == 0 {
        return Err(Error::Argument("need samples ≥ 1".into()));
    }
    let proposal = ambient_proposal(f, n);
    let chunks = map_chunks(Execution::default(), samples, TRIAL_CHUNK, |c, range| {
        let mut rng = stream.child(c as u64);
        let mut acc = MeanAccumulator::new();
        let mut x = vec![0.0; 2 * n];
        for _ in range {
            let density = if proposal.len() == 1 {
                proposal[0].sample(&mut rng, &mut x)
            } else {
                // Product proposal, one factor per coordinate.
                let mut d = 1.0;
                for (i, p) in proposal.iter().enumerate() {
                    d *= p.sample(&mut rng, &mut x[i..i + 1]);
                }
                d
            };
            acc.push(f.evaluate(&x) / density);
        }
        acc
    });
    let mut total = MeanAccumulator::new();
    chunks.iter().for_each(|c| total.merge(c));
    Ok(total.estimate())
}

/// Estimate of ∫_{G_h} ∫_V |u|^{2n−m} f(u) dH^m(u) dμ(V): V drawn from the
/// invariant measure, u ∈ V from an m-dimensional importance sampler.
pub fn plane_integral(
    f: &TestFunction,
    n: usize,
    m: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<MonteCarloEstimate> {
    f.validate(n)?;
    if m == 0 || m > n {
        return Err(Error::Argument(format!("need 1 ≤ m ≤ n, got n={n}, m={m}")));
    }
    if samples == 0 {
        return Err(Error::Argument("need samples ≥ 1".into()));
    }
    let proposal = plane_proposal(f);
    let power = (2 * n - m) as i32;
    let chunks = map_chunks(Execution::default(), samples, TRIAL_CHUNK, |c, range| {
        let mut rng = stream.child(c as u64);
        let mut acc = MeanAccumulator::new();
        let mut a = vec![0.0; m];
        for _ in range {
            let v = sample_isotropic_subspace(n, m, &mut rng)?;
            let density = proposal.sample(&mut rng, &mut a);
            let u = v.frame().embed(&a);
            let r = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            acc.push(r.powi(power) * f.evaluate(&u) / density);
        }
        Ok::<_, Error>(acc)
    });
    let mut total = MeanAccumulator::new();
    for c in chunks {
        total.merge(&c?);
    }
    Ok(total.estimate())
}

/// Both sides (LHS, RHS without the constant) on independent streams.
pub fn disintegration_check(
    f: &TestFunction,
    n: usize,
    m: usize,
    samples: usize,
    stream: &RngStream,
) -> Result<(MonteCarloEstimate, MonteCarloEstimate)> {
    let lhs = ambient_integral(f, n, samples, &stream.child(0))?;
    let rhs = plane_integral(f, n, m, samples, &stream.child(1))?;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ball_volumes() {
        assert_relative_eq!(unit_ball_volume(1), 2.0);
        assert_relative_eq!(unit_ball_volume(2), std::f64::consts::PI);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * std::f64::consts::PI / 3.0);
        assert_relative_eq!(unit_ball_volume(4), std::f64::consts::PI.powi(2) / 2.0);
    }

    #[test]
    fn gaussian_lhs_is_exact() {
        // Proposal equals the integrand up to normalization.
        let f = TestFunction::IsotropicGaussian { sigma: 0.7 };
        let e = ambient_integral(&f, 2, 1000, &RngStream::new(1, 0)).unwrap();
        let exact = (2.0 * std::f64::consts::PI * 0.49f64).powi(2);
        assert_relative_eq!(e.value, exact, max_relative = 1e-12);
    }

    #[test]
    fn zero_function_gives_zero() {
        let (l, r) = disintegration_check(&TestFunction::Zero, 2, 1, 1000, &RngStream::new(2, 0))
            .unwrap();
        assert_eq!(l.value, 0.0);
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn non_integrable_rejected() {
        let f = TestFunction::Constant { value: 1.0 };
        assert!(disintegration_check(&f, 1, 1, 10, &RngStream::new(3, 0)).is_err());
        let bad = TestFunction::AnisotropicGaussian { sigmas: vec![1.0] };
        assert!(disintegration_check(&bad, 1, 1, 10, &RngStream::new(3, 0)).is_err());
    }

    #[test]
    fn bump_lhs_matches_radial_quadrature() {
        // ∫ f = |S^{2n−1}| ∫_0^ρ r^{2n−1} f(r) dr by midpoint quadrature.
        let rho = 1.5;
        let f = TestFunction::Bump { radius: rho };
        let steps = 200_000;
        let h = rho / steps as f64;
        let radial: f64 = (0..steps)
            .map(|i| {
                let r = (i as f64 + 0.5) * h;
                r.powi(3) * f.evaluate(&[r, 0.0, 0.0, 0.0]) * h
            })
            .sum();
        let exact = 2.0 * std::f64::consts::PI.powi(2) * radial;
        let e = ambient_integral(&f, 2, 200_000, &RngStream::new(4, 0)).unwrap();
        assert!((e.value - exact).abs() < 4.0 * e.standard_error, "{e:?} {exact}");
    }
}
