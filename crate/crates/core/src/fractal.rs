//! Self-similar sets with known similarity dimension and their natural
//! measures, sampled by the chaos game.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_dim, Error, Result};
use crate::measure::EmpiricalMeasure;
use crate::metric::MetricTag;
use crate::par::{map_indexed, Execution};
use crate::rng::RngStream;
use crate::symplectic::{dot, orthonormalize};

/// Iterates discarded before recording chaos-game points.
pub const DEFAULT_BURN_IN: usize = 100;

/// Seed of the fixed generic rotation applied by [`product_embed`].
pub const EMBED_ROTATION_SEED: u64 = 0x5EED_0F_A11;

/// Row-major square matrix helpers.
fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    (0..d).for_each(|i| m[i * d + i] = 1.0);
    m
}

fn mat_vec(m: &[f64], x: &[f64]) -> Vec<f64> {
    m.chunks_exact(x.len()).map(|row| dot(row, x)).collect()
}

fn mat_mul(a: &[f64], b: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i * d + k];
            for j in 0..d {
                out[i * d + j] += aik * b[k * d + j];
            }
        }
    }
    out
}

fn transpose(a: &[f64], d: usize) -> Vec<f64> {
    let mut out = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = a[i * d + j];
        }
    }
    out
}

fn orthogonality_defect(m: &[f64], d: usize) -> f64 {
    let p = mat_mul(&transpose(m, d), m, d);
    let id = identity(d);
    p.iter().zip(&id).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// Haar-random rotation of ℝ^d (orthogonal, determinant +1).
pub fn random_rotation<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let cols: Vec<Vec<f64>> = (0..d)
            .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
            .collect();
        let Ok(frame) = orthonormalize(&cols, 1e-10) else {
            continue;
        };
        let mut m = vec![0.0; d * d];
        for (j, q) in frame.vectors().iter().enumerate() {
            for i in 0..d {
                m[i * d + j] = q[i];
            }
        }
        if determinant(&m, d) < 0.0 {
            for i in 0..d {
                m[i * d] = -m[i * d];
            }
        }
        return m;
    }
}

fn determinant(m: &[f64], d: usize) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for c in 0..d {
        let p = (c..d)
            .max_by(|&i, &j| a[i * d + c].abs().total_cmp(&a[j * d + c].abs()))
            .unwrap();
        if a[p * d + c] == 0.0 {
            return 0.0;
        }
        if p != c {
            for j in 0..d {
                a.swap(p * d + j, c * d + j);
            }
            det = -det;
        }
        det *= a[c * d + c];
        for i in c + 1..d {
            let f = a[i * d + c] / a[c * d + c];
            for j in c..d {
                a[i * d + j] -= f * a[c * d + j];
            }
        }
    }
    det
}

/// x ↦ ratio · rotation · x + translation
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Similitude {
    ratio: f64,
    rotation: Vec<f64>,
    translation: Vec<f64>,
}

impl Similitude {
    pub fn new(ratio: f64, rotation: Vec<f64>, translation: Vec<f64>) -> Result<Self> {
        let d = translation.len();
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::Argument(format!("similitude ratio {ratio} not in (0, 1)")));
        }
        ensure_dim(d * d, rotation.len())?;
        if orthogonality_defect(&rotation, d) > 1e-10 {
            return Err(Error::Argument("similitude rotation is not orthogonal".into()));
        }
        Ok(Self {
            ratio,
            rotation,
            translation,
        })
    }

    /// x ↦ ratio · x + translation
    pub fn scaling(ratio: f64, translation: Vec<f64>) -> Result<Self> {
        let d = translation.len();
        Self::new(ratio, identity(d), translation)
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    #[inline]
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = x.len();
        for i in 0..d {
            out[i] = self.ratio * dot(&self.rotation[i * d..(i + 1) * d], x) + self.translation[i];
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        out
    }
}

/// Cube with orthonormal axes (rows of `axes`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cube {
    pub center: Vec<f64>,
    pub half_side: f64,
    pub axes: Vec<f64>,
}

impl Cube {
    pub fn axis_aligned(lower: Vec<f64>, side: f64) -> Self {
        let d = lower.len();
        Self {
            center: lower.iter().map(|l| l + side / 2.0).collect(),
            half_side: side / 2.0,
            axes: identity(d),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn contains(&self, x: &[f64], slack: f64) -> bool {
        let d = self.dim();
        let rel: Vec<f64> = x.iter().zip(&self.center).map(|(a, c)| a - c).collect();
        (0..d).all(|k| dot(&self.axes[k * d..(k + 1) * d], &rel).abs() <= self.half_side + slack)
    }

    fn corners(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..1usize << d)
            .map(|mask| {
                let mut p = self.center.clone();
                for k in 0..d {
                    let s = if mask >> k & 1 == 1 { 1.0 } else { -1.0 };
                    for i in 0..d {
                        p[i] += s * self.half_side * self.axes[k * d + i];
                    }
                }
                p
            })
            .collect()
    }

    /// Image under a similitude.
    pub fn image(&self, f: &Similitude) -> Cube {
        let d = self.dim();
        let mut axes = vec![0.0; d * d];
        for k in 0..d {
            let a = mat_vec(&f.rotation, &self.axes[k * d..(k + 1) * d]);
            axes[k * d..(k + 1) * d].copy_from_slice(&a);
        }
        Cube {
            center: f.apply(&self.center),
            half_side: f.ratio * self.half_side,
            axes,
        }
    }

    /// Projection interval on the unit direction `u`.
    fn interval(&self, u: &[f64]) -> (f64, f64) {
        let d = self.dim();
        let c = dot(&self.center, u);
        let r: f64 = (0..d)
            .map(|k| dot(&self.axes[k * d..(k + 1) * d], u).abs())
            .sum::<f64>()
            * self.half_side;
        (c - r, c + r)
    }

    /// Whether some face normal of either cube separates their interiors.
    /// A sufficient test; exact when both cubes share their axes.
    pub fn separated_from(&self, other: &Cube, slack: f64) -> bool {
        let d = self.dim();
        (0..d)
            .map(|k| &self.axes[k * d..(k + 1) * d])
            .chain((0..d).map(|k| &other.axes[k * d..(k + 1) * d]))
            .any(|u| {
                let (a0, a1) = self.interval(u);
                let (b0, b1) = other.interval(u);
                a1 <= b0 + slack || b1 <= a0 + slack
            })
    }
}

/// Unique root of Σ rᵢ^s = 1 on [0, upper], by bisection to 1e−12.
pub fn moran_dimension(ratios: &[f64], upper: f64) -> f64 {
    let g = |s: f64| ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0, upper);
    while hi - lo > 1e-13 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Iterated function system of contracting similitudes with an open-set
/// witness cube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimilarityIfs {
    maps: Vec<Similitude>,
    dim: usize,
    witness: Cube,
}

impl SimilarityIfs {
    /// Validates that every map sends the witness cube into itself and that
    /// the depth-1 images are pairwise separated.
    pub fn new(maps: Vec<Similitude>, witness: Cube) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::Config("an IFS needs at least two maps".into()));
        }
        let dim = witness.dim();
        for f in &maps {
            ensure_dim(dim, f.dim())?;
        }
        let images: Vec<Cube> = maps.iter().map(|f| witness.image(f)).collect();
        let slack = 1e-12 * (1.0 + witness.half_side);
        for (i, img) in images.iter().enumerate() {
            if !img.corners().iter().all(|c| witness.contains(c, slack)) {
                return Err(Error::Config(format!(
                    "map {i} does not send the witness cube into itself"
                )));
            }
        }
        for i in 0..images.len() {
            for j in i + 1..images.len() {
                if !images[i].separated_from(&images[j], slack) {
                    return Err(Error::Config(format!(
                        "witness images {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(Self { maps, dim, witness })
    }

    /// Equal-ratio system `x ↦ ratio·x + offset_i` on the unit cube.
    pub fn grid_dust(dim: usize, ratio: f64, offsets: &[Vec<f64>]) -> Result<Self> {
        let maps = offsets
            .iter()
            .map(|o| Similitude::scaling(ratio, o.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(maps, Cube::axis_aligned(vec![0.0; dim], 1.0))
    }

    pub fn maps(&self) -> &[Similitude] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn witness(&self) -> &Cube {
        &self.witness
    }

    pub fn similarity_dimension(&self) -> f64 {
        similarity_dimension(self)
    }
}

/// The root s of Moran's equation Σ rᵢ^s = 1.
pub fn similarity_dimension(ifs: &SimilarityIfs) -> f64 {
    let ratios: Vec<f64> = ifs.maps.iter().map(|f| f.ratio).collect();
    moran_dimension(&ratios, ifs.dim as f64 + 1.0)
}

/// Samples the natural self-similar measure: maps are chosen with
/// probability rᵢ^s, the first `burn_in` iterates are dropped and each
/// recorded point gets weight 1/count.
pub fn chaos_game<R: Rng + ?Sized>(
    ifs: &SimilarityIfs,
    count: usize,
    burn_in: usize,
    rng: &mut R,
) -> Result<EmpiricalMeasure> {
    if count == 0 {
        return Err(Error::Argument("chaos game needs count ≥ 1".into()));
    }
    let s = similarity_dimension(ifs);
    let cumulative = cumulative_probabilities(ifs.maps.iter().map(|f| f.ratio.powf(s)));
    let d = ifs.dim;
    let mut x = ifs.witness.center.clone();
    let mut next = vec![0.0; d];
    let mut points = Vec::with_capacity(count * d);
    for k in 0..burn_in + count {
        let i = pick(&cumulative, rng.random::<f64>());
        ifs.maps[i].apply_into(&x, &mut next);
        std::mem::swap(&mut x, &mut next);
        if k >= burn_in {
            points.extend_from_slice(&x);
        }
    }
    EmpiricalMeasure::uniform(d, points, MetricTag::Euclidean { dim: d })
}

pub(crate) fn cumulative_probabilities<I: Iterator<Item = f64>>(weights: I) -> Vec<f64> {
    let w: Vec<f64> = weights.collect();
    let total: f64 = w.iter().sum();
    let mut acc = 0.0;
    w.iter()
        .map(|x| {
            acc += x / total;
            acc
        })
        .collect()
}

#[inline]
pub(crate) fn pick(cumulative: &[f64], u: f64) -> usize {
    cumulative
        .iter()
        .position(|c| u < *c)
        .unwrap_or(cumulative.len() - 1)
}

/// Places a lower-dimensional IFS in the first coordinates of ℝ^ambient and
/// conjugates it by a fixed generic rotation.
pub fn product_embed(ifs: &SimilarityIfs, ambient: usize) -> Result<SimilarityIfs> {
    product_embed_with(ifs, ambient, EMBED_ROTATION_SEED)
}

/// [`product_embed`] with an explicit rotation seed.
pub fn product_embed_with(ifs: &SimilarityIfs, ambient: usize, rotation_seed: u64) -> Result<SimilarityIfs> {
    let base = ifs.dim;
    if ambient < base {
        return Err(Error::Argument(format!(
            "cannot embed a {base}-dimensional IFS into ℝ^{ambient}"
        )));
    }
    let q = random_rotation(ambient, &mut RngStream::new(rotation_seed, ambient as u64));
    let qt = transpose(&q, ambient);
    let pad_matrix = |m: &[f64]| {
        let mut out = identity(ambient);
        for i in 0..base {
            for j in 0..base {
                out[i * ambient + j] = m[i * base + j];
            }
        }
        out
    };
    let pad_vec = |v: &[f64]| {
        let mut out = vec![0.0; ambient];
        out[..base].copy_from_slice(v);
        out
    };
    let maps = ifs
        .maps
        .iter()
        .map(|f| {
            let r = mat_mul(&mat_mul(&q, &pad_matrix(&f.rotation), ambient), &qt, ambient);
            Similitude::new(f.ratio, r, mat_vec(&q, &pad_vec(&f.translation)))
        })
        .collect::<Result<Vec<_>>>()?;
    let w = &ifs.witness;
    let axes = mat_mul(&pad_matrix(&w.axes), &qt, ambient);
    let witness = Cube {
        center: mat_vec(&q, &pad_vec(&w.center)),
        half_side: w.half_side,
        axes,
    };
    SimilarityIfs::new(maps, witness)
}

/// Worst empirical Frostman ratio over the sampled centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrostmanReport {
    pub worst_ratio: f64,
    pub worst_center: usize,
    pub worst_radius: f64,
    pub constant: f64,
    pub passed: bool,
}

/// max over sample points x and radii r of μ(B(x, r)) / r^s, compared with
/// `constant`. Balls are closed and measured with the cloud's metric; at
/// most `max_centers` evenly spaced points serve as centers.
pub fn frostman_exponent_check(
    measure: &EmpiricalMeasure,
    s: f64,
    radii: &[f64],
    constant: f64,
    max_centers: usize,
) -> Result<FrostmanReport> {
    if !(s > 0.0) {
        return Err(Error::Argument("Frostman exponent must be > 0".into()));
    }
    if radii.is_empty() || radii.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Argument("radii must be positive".into()));
    }
    if measure.is_empty() {
        return Err(Error::DegenerateMeasure("empty measure".into()));
    }
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = measure.len();
    let centers = max_centers.clamp(1, n);
    let metric = measure.metric();
    let rows = map_indexed(Execution::default(), centers, |k| {
        let c = k * n / centers;
        let x = measure.point(c);
        let mut mass = vec![0.0; sorted.len()];
        for j in 0..n {
            let d = metric.distance(x, measure.point(j));
            let b = sorted.partition_point(|r| *r < d);
            if b < sorted.len() {
                mass[b] += measure.weights()[j];
            }
        }
        let mut acc = 0.0;
        let mut best = (0.0, 0.0);
        for (m, r) in mass.iter().zip(&sorted) {
            acc += m;
            let ratio = acc / r.powf(s);
            if ratio > best.0 {
                best = (ratio, *r);
            }
        }
        (best.0, c, best.1)
    });
    let (worst_ratio, worst_center, worst_radius) = rows
        .into_iter()
        .fold((0.0, 0, 0.0), |a, b| if b.0 > a.0 { b } else { a });
    Ok(FrostmanReport {
        worst_ratio,
        worst_center,
        worst_radius,
        constant,
        passed: worst_ratio <= constant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn cantor() -> SimilarityIfs {
        SimilarityIfs::grid_dust(1, 1.0 / 3.0, &[vec![0.0], vec![2.0 / 3.0]]).unwrap()
    }

    #[test]
    fn moran_examples() {
        assert_abs_diff_eq!(similarity_dimension(&cantor()), 2f64.ln() / 3f64.ln(), epsilon = 1e-12);
        let four = SimilarityIfs::grid_dust(
            2,
            0.25,
            &[vec![0.0, 0.0], vec![0.75, 0.0], vec![0.0, 0.75], vec![0.75, 0.75]],
        )
        .unwrap();
        assert_abs_diff_eq!(four.similarity_dimension(), 1.0, epsilon = 1e-12);
        let ratios = [0.25; 8];
        let s = moran_dimension(&ratios, 5.0);
        assert_abs_diff_eq!(s, 1.5, epsilon = 1e-12);
        assert!((ratios.iter().map(|r| r.powf(s)).sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn overlapping_or_escaping_maps_rejected() {
        assert!(SimilarityIfs::grid_dust(1, 0.5, &[vec![0.0], vec![0.25]]).is_err());
        assert!(SimilarityIfs::grid_dust(1, 0.5, &[vec![0.0], vec![0.75]]).is_err());
        assert!(SimilarityIfs::grid_dust(1, 0.5, &[vec![0.0]]).is_err());
        assert!(Similitude::scaling(1.0, vec![0.0]).is_err());
    }

    #[test]
    fn chaos_game_stays_in_witness() {
        let ifs = cantor();
        let mu = chaos_game(&ifs, 5000, DEFAULT_BURN_IN, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(mu.len(), 5000);
        assert!((mu.total_mass() - 1.0).abs() < 1e-12);
        assert!(mu.iter_points().all(|p| ifs.witness().contains(p, 1e-12)));
        // no point falls in the removed middle third
        assert!(mu.iter_points().all(|p| p[0] <= 1.0 / 3.0 + 1e-12 || p[0] >= 2.0 / 3.0 - 1e-12));
        let again = chaos_game(&ifs, 5000, DEFAULT_BURN_IN, &mut RngStream::new(1, 0)).unwrap();
        assert_eq!(mu, again);
    }

    #[test]
    fn embedding_keeps_dimension_and_spreads() {
        let ifs = cantor();
        let e = product_embed(&ifs, 4).unwrap();
        assert_eq!(e.dim(), 4);
        assert_abs_diff_eq!(e.similarity_dimension(), ifs.similarity_dimension(), epsilon = 1e-12);
        let mu = chaos_game(&e, 2000, DEFAULT_BURN_IN, &mut RngStream::new(2, 0)).unwrap();
        let (lo, hi) = mu.bounding_box().unwrap();
        assert!(lo.iter().zip(&hi).all(|(a, b)| b - a > 1e-3));
        assert!(mu.iter_points().all(|p| e.witness().contains(p, 1e-9)));
        assert!(product_embed(&e, 2).is_err());
    }

    #[test]
    fn rotations_are_proper() {
        let mut rng = RngStream::new(3, 0);
        for d in 1..6 {
            let q = random_rotation(d, &mut rng);
            assert!(orthogonality_defect(&q, d) < 1e-12);
            assert_abs_diff_eq!(determinant(&q, d), 1.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn atom_is_not_frostman() {
        let atom = EmpiricalMeasure::euclidean(1, vec![0.5]).unwrap();
        let radii: Vec<f64> = (1..=20).map(|k| 2f64.powi(-k)).collect();
        let r = frostman_exponent_check(&atom, 0.5, &radii, 100.0, 10).unwrap();
        assert!(!r.passed);
        assert_abs_diff_eq!(r.worst_ratio, 2f64.powi(10), epsilon = 1e-6);
    }

    #[test]
    fn uniform_grid_is_one_frostman() {
        let n = 10_000;
        let pts: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let mu = EmpiricalMeasure::euclidean(1, pts).unwrap();
        let radii: Vec<f64> = (0..=8).map(|k| 2f64.powi(-k)).collect();
        let r = frostman_exponent_check(&mu, 1.0, &radii, 3.0, n).unwrap();
        assert!(r.passed, "{r:?}");
    }
}
