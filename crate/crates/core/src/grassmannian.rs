//! Haar sampling of U(n) and of the invariant probability measure on the
//! isotropic Grassmannian G_h(2n, m), plus Monte-Carlo probes of that
//! measure.
//!
//! The invariant measure is realized as the image of Haar measure under
//! `U ↦ U·span{e_1..e_m}`: U(n) acts transitively on isotropic m-planes,
//! so any invariant law obtained this way is the invariant one.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::par::{map_chunks, Execution};
use crate::rng::RngStream;
use crate::stats::{self, fit_line, KsReport, LineFit, MonteCarloEstimate};
use crate::symplectic::{dot, Frame, IsotropicSubspace, Point2n, DEFAULT_TOLERANCE};

/// Trials per random stream in the Monte-Carlo loops.
pub(crate) const TRIAL_CHUNK: usize = 4096;

/// Real 2n×2n form of a unitary matrix acting on ℂ^n ≅ ℝ^{2n}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryAction {
    n: usize,
    /// Row-major 2n×2n entries.
    matrix: Vec<f64>,
}

impl UnitaryAction {
    pub fn identity(n: usize) -> Self {
        let d = 2 * n;
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            matrix[i * d + i] = 1.0;
        }
        Self { n, matrix }
    }

    /// Embeds a complex n×n matrix (column-major list of columns) as
    /// `[[A, −B], [B, A]]` where `U = A + iB`.
    fn from_complex_columns(cols: &[Vec<Complex64>]) -> Self {
        let n = cols.len();
        let d = 2 * n;
        let mut matrix = vec![0.0; d * d];
        for (j, col) in cols.iter().enumerate() {
            for (i, z) in col.iter().enumerate() {
                matrix[i * d + j] = z.re;
                matrix[(n + i) * d + j] = z.im;
                matrix[i * d + n + j] = -z.im;
                matrix[(n + i) * d + n + j] = z.re;
            }
        }
        Self { n, matrix }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> f64 {
        self.matrix[row * 2 * self.n + col]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        let d = 2 * self.n;
        (0..d).map(|i| self.matrix[i * d + j]).collect()
    }

    pub fn apply_slice(&self, x: &[f64]) -> Vec<f64> {
        let d = 2 * self.n;
        debug_assert_eq!(x.len(), d);
        self.matrix.chunks_exact(d).map(|row| dot(row, x)).collect()
    }

    pub fn apply(&self, x: &Point2n) -> Result<Point2n> {
        ensure_dim(2 * self.n, x.coords().len())?;
        Point2n::new(self.apply_slice(x.coords()))
    }

    /// Transpose (= inverse for an orthogonal matrix).
    pub fn transpose(&self) -> Self {
        let d = 2 * self.n;
        let mut matrix = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                matrix[j * d + i] = self.matrix[i * d + j];
            }
        }
        Self { n: self.n, matrix }
    }

    /// max |(UᵀU − I)_{ij}|
    pub fn orthogonality_defect(&self) -> f64 {
        let d = 2 * self.n;
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let s: f64 = (0..d)
                    .map(|k| self.matrix[k * d + i] * self.matrix[k * d + j])
                    .sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).abs());
            }
        }
        worst
    }

    /// The image `U·V`, an isotropic subspace again.
    pub fn apply_subspace(&self, v: &IsotropicSubspace) -> Result<IsotropicSubspace> {
        ensure_dim(self.n, v.n())?;
        let vectors = v
            .frame()
            .vectors()
            .iter()
            .map(|q| self.apply_slice(q))
            .collect();
        IsotropicSubspace::new(Frame::from_orthonormal(vectors, DEFAULT_TOLERANCE)?)
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Gram–Schmidt QR of the given columns; returns `None` when a pivot
/// vanishes. Gram–Schmidt produces an `R` whose diagonal is the (real,
/// positive) residual norms, so no separate phase correction is needed.
fn unitary_qr(mut cols: Vec<Vec<Complex64>>) -> Option<Vec<Vec<Complex64>>> {
    let n = cols.len();
    for j in 0..n {
        let (done, rest) = cols.split_at_mut(j);
        let col = &mut rest[0];
        for _ in 0..2 {
            for q in done.iter() {
                let c: Complex64 = q.iter().zip(col.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, qi) in col.iter_mut().zip(q) {
                    *x -= c * qi;
                }
            }
        }
        let r = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(r > 1e-12) {
            return None;
        }
        for x in col.iter_mut() {
            *x /= r;
        }
    }
    Some(cols)
}

/// Haar-distributed element of U(n) in real 2n×2n form.
///
/// Draws an n×n matrix of standard complex Gaussians, takes its QR
/// factorization with the diagonal of R real positive, and embeds Q.
pub fn sample_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<UnitaryAction> {
    if n == 0 {
        return Err(Error::Argument("U(n) needs n ≥ 1".into()));
    }
    loop {
        let cols: Vec<Vec<Complex64>> = (0..n)
            .map(|_| (0..n).map(|_| complex_gaussian(rng)).collect())
            .collect();
        if let Some(q) = unitary_qr(cols) {
            return Ok(UnitaryAction::from_complex_columns(&q));
        }
    }
}

/// A draw from the invariant measure on G_h(2n, m): `U·span{e_1..e_m}`
/// for a fresh Haar unitary `U`.
pub fn sample_isotropic_subspace<R: Rng + ?Sized>(
    n: usize,
    m: usize,
    rng: &mut R,
) -> Result<IsotropicSubspace> {
    if m == 0 || m > n {
        return Err(Error::Argument(format!(
            "isotropic subspaces need 1 ≤ m ≤ n, got n={n}, m={m}"
        )));
    }
    let u = sample_unitary(n, rng)?;
    let vectors = (0..m).map(|j| u.column(j)).collect();
    IsotropicSubspace::new(Frame::from_orthonormal(vectors, DEFAULT_TOLERANCE)?)
}

/// Subspace samplers used by the invariance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceSampler {
    /// The invariant sampler.
    Haar,
    /// Negative control: a Haar draw accepted with probability equal to the
    /// squared first coordinate of its first frame vector.
    BiasedFirstCoordinate,
}

impl SubspaceSampler {
    pub fn sample<R: Rng + ?Sized>(
        &self,
        n: usize,
        m: usize,
        rng: &mut R,
    ) -> Result<IsotropicSubspace> {
        match self {
            SubspaceSampler::Haar => sample_isotropic_subspace(n, m, rng),
            SubspaceSampler::BiasedFirstCoordinate => loop {
                let v = sample_isotropic_subspace(n, m, rng)?;
                let c = v.frame().vectors()[0][0];
                if rng.random::<f64>() < c * c {
                    return Ok(v);
                }
            },
        }
    }
}

/// Statistics of a subspace compared by the invariance test.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SubspaceStatistic {
    /// |P_V x₀|
    ProjectionNorm { x0: Vec<f64> },
    /// ⟨q_1, d⟩² for the first frame vector q_1.
    FrameAlignment { direction: Vec<f64> },
}

impl SubspaceStatistic {
    pub fn evaluate(&self, v: &IsotropicSubspace) -> f64 {
        match self {
            SubspaceStatistic::ProjectionNorm { x0 } => v
                .frame()
                .vectors()
                .iter()
                .map(|q| dot(q, x0).powi(2))
                .sum::<f64>()
                .sqrt(),
            SubspaceStatistic::FrameAlignment { direction } => {
                dot(&v.frame().vectors()[0], direction).powi(2)
            }
        }
    }

    fn dim(&self) -> usize {
        match self {
            SubspaceStatistic::ProjectionNorm { x0 } => x0.len(),
            SubspaceStatistic::FrameAlignment { direction } => direction.len(),
        }
    }
}

/// Which fixed unitary `W` the invariance test applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InvarianceTransform {
    Identity,
    /// A Haar unitary drawn once from the test's stream.
    Haar,
}

/// Paired two-sample KS comparison of `stat(V_i)` against `stat(W·V_i)`
/// at the 1% level.
pub fn invariance_test(
    n: usize,
    m: usize,
    statistic: &SubspaceStatistic,
    transform: InvarianceTransform,
    sampler: SubspaceSampler,
    trials: usize,
    stream: &RngStream,
) -> Result<KsReport> {
    ensure_dim(2 * n, statistic.dim())?;
    if trials == 0 {
        return Err(Error::Argument("invariance test needs trials ≥ 1".into()));
    }
    let w = match transform {
        InvarianceTransform::Identity => UnitaryAction::identity(n),
        InvarianceTransform::Haar => sample_unitary(n, &mut stream.child(u64::MAX))?,
    };
    let chunks = map_chunks(Execution::default(), trials, TRIAL_CHUNK, |c, range| {
        let mut rng = stream.child(c as u64);
        range
            .map(|_| {
                let v = sampler.sample(n, m, &mut rng)?;
                let wv = w.apply_subspace(&v)?;
                Ok((statistic.evaluate(&v), statistic.evaluate(&wv)))
            })
            .collect::<Result<Vec<_>>>()
    });
    let mut a = Vec::with_capacity(trials);
    let mut b = Vec::with_capacity(trials);
    for chunk in chunks {
        for (x, y) in chunk? {
            a.push(x);
            b.push(y);
        }
    }
    stats::ks_two_sample(&a, &b, 0.01)
}

/// Fractions of sampled V with |P_V x| ≤ δ for each δ in `deltas`, all
/// computed from the same draws.
pub fn smallness_curve(
    x: &Point2n,
    m: usize,
    deltas: &[f64],
    trials: usize,
    stream: &RngStream,
) -> Result<Vec<MonteCarloEstimate>> {
    let n = x.n();
    if x.norm() == 0.0 {
        return Err(Error::Argument(
            "smallness probability is undefined at x = 0".into(),
        ));
    }
    if deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::Argument("deltas must be positive".into()));
    }
    if trials == 0 {
        return Err(Error::Argument("need trials ≥ 1".into()));
    }
    if m == 0 || m > n {
        return Err(Error::Argument(format!("need 1 ≤ m ≤ n, got n={n}, m={m}")));
    }
    let xs = x.coords();
    let chunks = map_chunks(Execution::default(), trials, TRIAL_CHUNK, |c, range| {
        let mut rng = stream.child(c as u64);
        let mut counts = vec![0u64; deltas.len()];
        for _ in range {
            let v = sample_isotropic_subspace(n, m, &mut rng)?;
            let p2: f64 = v.frame().vectors().iter().map(|q| dot(q, xs).powi(2)).sum();
            let p = p2.sqrt();
            for (k, d) in deltas.iter().enumerate() {
                if p <= *d {
                    counts[k] += 1;
                }
            }
        }
        Ok::<_, Error>(counts)
    });
    let mut totals = vec![0u64; deltas.len()];
    for chunk in chunks {
        let counts: Vec<u64> = chunk?;
        for (t, c) in totals.iter_mut().zip(counts) {
            *t += c;
        }
    }
    Ok(totals
        .into_iter()
        .map(|s| stats::proportion(s, trials as u64))
        .collect())
}

/// μ_{2n,m}{V : |P_V x| ≤ δ} by Monte Carlo.
pub fn smallness_probability(
    x: &Point2n,
    m: usize,
    delta: f64,
    trials: usize,
    stream: &RngStream,
) -> Result<MonteCarloEstimate> {
    Ok(smallness_curve(x, m, &[delta], trials, stream)?[0])
}

/// Weighted log–log fit of a smallness curve; the slope estimates the
/// small-δ exponent. Points with no hits are skipped.
pub fn smallness_exponent(deltas: &[f64], curve: &[MonteCarloEstimate]) -> Result<LineFit> {
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut w = Vec::new();
    for (d, e) in deltas.iter().zip(curve) {
        if e.value > 0.0 && e.value < 1.0 {
            lx.push(d.ln());
            ly.push(e.value.ln());
            w.push(e.samples as f64 * e.value / (1.0 - e.value));
        }
    }
    if lx.len() < 3 {
        return Err(Error::Estimation(
            "fewer than 3 deltas with non-trivial hit counts".into(),
        ));
    }
    fit_line(&lx, &ly, Some(&w))
}

/// Smallest C with p(δ) ≤ C (δ/|x|)^m over the curve.
pub fn fitted_bound_constant(
    x_norm: f64,
    m: usize,
    deltas: &[f64],
    curve: &[MonteCarloEstimate],
) -> f64 {
    deltas
        .iter()
        .zip(curve)
        .map(|(d, e)| e.value / (d / x_norm).powi(m as i32))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{is_isotropic, omega};
    use std::f64::consts::PI;

    #[test]
    fn unitary_is_orthogonal_and_symplectic() {
        let mut rng = RngStream::new(1, 0);
        for n in 1..=4 {
            for _ in 0..20 {
                let u = sample_unitary(n, &mut rng).unwrap();
                assert!(u.orthogonality_defect() < 1e-10);
                let a: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>() - 0.5).collect();
                let b: Vec<f64> = (0..2 * n).map(|_| rng.random::<f64>() - 0.5).collect();
                let lhs = omega(&u.apply_slice(&a), &u.apply_slice(&b));
                assert!((lhs - omega(&a, &b)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn unitary_is_deterministic() {
        let a = sample_unitary(3, &mut RngStream::new(9, 4)).unwrap();
        let b = sample_unitary(3, &mut RngStream::new(9, 4)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
    }

    #[test]
    fn subspace_is_first_columns_of_unitary() {
        let u = sample_unitary(3, &mut RngStream::new(5, 5)).unwrap();
        let v = sample_isotropic_subspace(3, 2, &mut RngStream::new(5, 5)).unwrap();
        assert_eq!(v.frame().vectors()[0], u.column(0));
        assert_eq!(v.frame().vectors()[1], u.column(1));
        assert!(sample_isotropic_subspace(2, 3, &mut RngStream::new(5, 5)).is_err());
    }

    #[test]
    fn samples_are_isotropic() {
        let mut rng = RngStream::new(2, 0);
        for _ in 0..1000 {
            let v = sample_isotropic_subspace(3, 3, &mut rng).unwrap();
            assert!(v.frame().orthonormality_defect() <= 1e-10);
            assert!(is_isotropic(v.frame(), 1e-10));
        }
    }

    #[test]
    fn lines_in_plane_have_uniform_angle() {
        // G_h(2,1) = G(2,1) and the invariant law is the uniform angle.
        let mut rng = RngStream::new(3, 0);
        let angles: Vec<f64> = (0..10_000)
            .map(|_| {
                let v = sample_isotropic_subspace(1, 1, &mut rng).unwrap();
                let q = &v.frame().vectors()[0];
                q[1].atan2(q[0]).rem_euclid(PI)
            })
            .collect();
        let r = stats::ks_one_sample(&angles, |a| (a / PI).clamp(0.0, 1.0), 0.01).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn identity_transform_gives_zero_statistic() {
        let stat = SubspaceStatistic::ProjectionNorm {
            x0: Point2n::basis(2, 0).into_vec(),
        };
        let r = invariance_test(
            2,
            1,
            &stat,
            InvarianceTransform::Identity,
            SubspaceSampler::Haar,
            2000,
            &RngStream::new(4, 0),
        )
        .unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.passed);
    }

    #[test]
    fn smallness_trivial_cases() {
        let x = Point2n::new(vec![0.3, 0.4, 0.0, 0.0]).unwrap();
        let s = RngStream::new(5, 1);
        let p = smallness_probability(&x, 1, 0.5, 500, &s).unwrap();
        assert_eq!(p.value, 1.0);
        assert!(smallness_probability(&Point2n::zeros(2), 1, 0.1, 10, &s).is_err());
        assert!(smallness_probability(&x, 1, 0.0, 10, &s).is_err());
    }

    #[test]
    fn smallness_scale_invariant() {
        let x = Point2n::new(vec![0.2, -0.5, 0.7, 0.1]).unwrap();
        let y = Point2n::new(x.coords().iter().map(|c| c * 7.5).collect()).unwrap();
        let a = smallness_probability(&x, 1, 0.05, 20_000, &RngStream::new(6, 0)).unwrap();
        let b = smallness_probability(&y, 1, 0.375, 20_000, &RngStream::new(6, 1)).unwrap();
        assert!((a.value - b.value).abs() <= 3.0 * a.joint_error(&b));
    }

    #[test]
    fn lagrangian_smallness_matches_closed_form() {
        // For n = m = 2, U*x is uniform on S³ and |P_V x|² is uniform on
        // [0, 1], so the probability is exactly δ².
        let x = Point2n::basis(2, 1);
        let deltas = [0.1, 0.3, 0.6];
        let curve = smallness_curve(&x, 2, &deltas, 40_000, &RngStream::new(7, 0)).unwrap();
        for (d, e) in deltas.iter().zip(&curve) {
            assert!((e.value - d * d).abs() < 4.0 * e.standard_error.max(1e-3), "{d} {e:?}");
        }
    }

    #[test]
    fn bound_constant_holds_across_norms() {
        let deltas: Vec<f64> = (0..6).map(|k| 0.01 * 2f64.powi(k)).collect();
        let unit = Point2n::basis(2, 0);
        let curve = smallness_curve(&unit, 1, &deltas, 50_000, &RngStream::new(8, 0)).unwrap();
        let c = fitted_bound_constant(1.0, 1, &deltas, &curve);
        for (k, scale) in [0.5, 2.0, 5.0].into_iter().enumerate() {
            let x = Point2n::new(vec![0.0, scale, 0.0, 0.0]).unwrap();
            let grid: Vec<f64> = deltas.iter().map(|d| d * scale).collect();
            let other = smallness_curve(&x, 1, &grid, 50_000, &RngStream::new(8, 1 + k as u64))
                .unwrap();
            for (d, e) in grid.iter().zip(&other) {
                let bound = c * (d / scale);
                assert!(e.value <= bound + 3.0 * e.standard_error, "{d} {e:?} {bound}");
            }
        }
    }
}
