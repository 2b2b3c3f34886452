//! Built-in sets with known dimension.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fractal::{chaos_game, product_embed_with, SimilarityIfs, DEFAULT_BURN_IN, EMBED_ROTATION_SEED};
use crate::heisenberg::{heisenberg_chaos_game, koranyi_norm_slice, HeisenbergIfs};
use crate::measure::EmpiricalMeasure;
use crate::metric::MetricTag;
use crate::rng::RngStream;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CatalogueSet {
    /// Middle-thirds Cantor set in ℝ.
    MiddleThirds,
    /// N = 8, r = 1/4 dust in ℝ⁴ (s = 3/2).
    Dust8Quarter,
    /// N = 3, r = 1/5 planar dust placed in ℝ⁴ (s = log 3 / log 5).
    Dust3Fifth,
    /// N = 2, r = 1/3 Heisenberg dust in ℍ¹.
    HeisCantor,
    /// N = 4, r = 1/3 Heisenberg dust in ℍ¹.
    HeisDust4,
    /// Uniform (Haar) measure on the unit Korányi ball of ℍ¹.
    GaugeBall,
    /// Radial image of the gauge-ball measure on the unit Korányi sphere.
    GaugeSphere,
}

impl CatalogueSet {
    pub const ALL: [CatalogueSet; 7] = [
        CatalogueSet::MiddleThirds,
        CatalogueSet::Dust8Quarter,
        CatalogueSet::Dust3Fifth,
        CatalogueSet::HeisCantor,
        CatalogueSet::HeisDust4,
        CatalogueSet::GaugeBall,
        CatalogueSet::GaugeSphere,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CatalogueSet::MiddleThirds => "middle_thirds",
            CatalogueSet::Dust8Quarter => "dust8_quarter",
            CatalogueSet::Dust3Fifth => "dust3_fifth",
            CatalogueSet::HeisCantor => "heis_cantor",
            CatalogueSet::HeisDust4 => "heis_dust4",
            CatalogueSet::GaugeBall => "gauge_ball",
            CatalogueSet::GaugeSphere => "gauge_sphere",
        }
    }

    pub fn metric(&self) -> MetricTag {
        match self {
            CatalogueSet::MiddleThirds => MetricTag::Euclidean { dim: 1 },
            CatalogueSet::Dust8Quarter | CatalogueSet::Dust3Fifth => MetricTag::Euclidean { dim: 4 },
            _ => MetricTag::Koranyi { n: 1 },
        }
    }

    pub fn is_heisenberg(&self) -> bool {
        matches!(self.metric(), MetricTag::Koranyi { .. })
    }

    /// Hausdorff dimension in the set's own metric.
    pub fn dimension(&self) -> f64 {
        match self {
            CatalogueSet::GaugeBall => 4.0,
            CatalogueSet::GaugeSphere => 3.0,
            s if s.is_heisenberg() => s.heisenberg_ifs().expect("catalogue IFS").similarity_dimension(),
            s => s.euclidean_ifs(EMBED_ROTATION_SEED).expect("catalogue IFS").similarity_dimension(),
        }
    }

    /// The Euclidean IFS, with `rotation_seed` choosing the generic rotation
    /// of the ambient space.
    pub fn euclidean_ifs(&self, rotation_seed: u64) -> Result<SimilarityIfs> {
        match self {
            CatalogueSet::MiddleThirds => SimilarityIfs::grid_dust(1, 1.0 / 3.0, &[vec![0.0], vec![2.0 / 3.0]]),
            CatalogueSet::Dust8Quarter => {
                let offsets: Vec<Vec<f64>> = (0u32..16)
                    .filter(|mask| mask.count_ones() % 2 == 0)
                    .map(|mask| (0..4).map(|k| if mask >> k & 1 == 1 { 0.75 } else { 0.0 }).collect())
                    .collect();
                product_embed_with(&SimilarityIfs::grid_dust(4, 0.25, &offsets)?, 4, rotation_seed)
            }
            CatalogueSet::Dust3Fifth => {
                let base = SimilarityIfs::grid_dust(2, 0.2, &[vec![0.0, 0.0], vec![0.4, 0.8], vec![0.8, 0.2]])?;
                product_embed_with(&base, 4, rotation_seed)
            }
            other => Err(Error::Config(format!("{} is not a Euclidean IFS", other.name()))),
        }
    }

    pub fn heisenberg_ifs(&self) -> Result<HeisenbergIfs> {
        let a = 0.6;
        match self {
            CatalogueSet::HeisCantor => HeisenbergIfs::horizontal(1, 1.0 / 3.0, &[vec![a, 0.0], vec![0.0, a]], 0.9),
            CatalogueSet::HeisDust4 => HeisenbergIfs::horizontal(
                1,
                1.0 / 3.0,
                &[vec![a, 0.0], vec![0.0, a], vec![-a, 0.0], vec![0.0, -a]],
                0.9,
            ),
            other => Err(Error::Config(format!("{} is not a Heisenberg IFS", other.name()))),
        }
    }

    /// `count` points of the natural measure, drawn from `stream`.
    pub fn sample(&self, count: usize, stream: &RngStream) -> Result<EmpiricalMeasure> {
        self.sample_rotated(count, stream, EMBED_ROTATION_SEED)
    }

    /// As [`CatalogueSet::sample`] with an explicit embedding rotation
    /// (ignored by the Heisenberg sets and by the middle-thirds set).
    pub fn sample_rotated(&self, count: usize, stream: &RngStream, rotation_seed: u64) -> Result<EmpiricalMeasure> {
        let mut rng = stream.clone();
        match self {
            CatalogueSet::GaugeBall => gauge_ball(count, &mut rng),
            CatalogueSet::GaugeSphere => {
                let ball = gauge_ball(count, &mut rng)?;
                let pts = ball
                    .iter_points()
                    .flat_map(|p| {
                        let r = koranyi_norm_slice(p);
                        [p[0] / r, p[1] / r, p[2] / (r * r)]
                    })
                    .collect();
                EmpiricalMeasure::uniform(3, pts, MetricTag::Koranyi { n: 1 })
            }
            s if s.is_heisenberg() => heisenberg_chaos_game(&s.heisenberg_ifs()?, count, DEFAULT_BURN_IN, &mut rng),
            s => chaos_game(&s.euclidean_ifs(rotation_seed)?, count, DEFAULT_BURN_IN, &mut rng),
        }
    }
}

impl std::fmt::Display for CatalogueSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Rejection sampling from the box |x|, |y| ≤ 1, |t| ≤ 1/4.
fn gauge_ball<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Result<EmpiricalMeasure> {
    if count == 0 {
        return Err(Error::Argument("gauge ball needs count ≥ 1".into()));
    }
    let mut pts = Vec::with_capacity(3 * count);
    while pts.len() < 3 * count {
        let p = [
            rng.random_range(-1.0..=1.0),
            rng.random_range(-1.0..=1.0),
            rng.random_range(-0.25..=0.25),
        ];
        if koranyi_norm_slice(&p) <= 1.0 {
            pts.extend(p);
        }
    }
    EmpiricalMeasure::uniform(3, pts, MetricTag::Koranyi { n: 1 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_dimensions() {
        assert!((CatalogueSet::MiddleThirds.dimension() - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((CatalogueSet::Dust8Quarter.dimension() - 1.5).abs() < 1e-12);
        assert!((CatalogueSet::Dust3Fifth.dimension() - 3f64.ln() / 5f64.ln()).abs() < 1e-12);
        assert!((CatalogueSet::HeisDust4.dimension() - 4f64.ln() / 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn every_set_samples() {
        for set in CatalogueSet::ALL {
            let mu = set.sample(500, &RngStream::new(1, 2)).unwrap();
            assert_eq!(mu.len(), 500);
            assert_eq!(mu.metric(), set.metric());
        }
        let sphere = CatalogueSet::GaugeSphere.sample(100, &RngStream::new(1, 3)).unwrap();
        assert!(sphere.iter_points().all(|p| (koranyi_norm_slice(p) - 1.0).abs() < 1e-12));
    }

    #[test]
    fn names_round_trip() {
        for set in CatalogueSet::ALL {
            let json = serde_json::to_string(&set).unwrap();
            assert_eq!(json, format!("\"{}\"", set.name()));
            assert_eq!(serde_json::from_str::<CatalogueSet>(&json).unwrap(), set);
        }
    }
}
