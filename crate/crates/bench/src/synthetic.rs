//! Reproducible synthetic classification data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use scsg::objectives::FeatureMatrix;

use crate::dataset::{DataFormat, Dataset};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SyntheticSpec {
    pub n: usize,
    pub p: usize,
    pub classes: u32,
    /// Distance scale of the class centers from the origin.
    pub separation: f64,
    /// Fraction of rows inflated by `outlier_scale`.
    pub outlier_fraction: f64,
    pub outlier_scale: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    /// The bundled desk-scale benchmark: 3 classes, n = 2000, p = 20.
    fn default() -> Self {
        Self {
            n: 2000,
            p: 20,
            classes: 3,
            separation: 1.0,
            outlier_fraction: 0.02,
            outlier_scale: 6.0,
            seed: 20_170_605,
        }
    }
}

/// Gaussian class clusters around random centers. Labels are drawn
/// uniformly from `1..=classes`; a few rows are scaled up so that the
/// smoothness trimming has something to remove.
pub fn gaussian_clusters(spec: &SyntheticSpec) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let centers: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            (0..spec.p)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    spec.separation * z
                })
                .collect()
        })
        .collect();
    let mut rows = Vec::with_capacity(spec.n);
    let mut targets = Vec::with_capacity(spec.n);
    for _ in 0..spec.n {
        let class = rng.gen_range(0..spec.classes);
        let scale = if rng.gen::<f64>() < spec.outlier_fraction {
            spec.outlier_scale
        } else {
            1.0
        };
        let row: Vec<f64> = centers[class as usize]
            .iter()
            .map(|c| {
                let z: f64 = StandardNormal.sample(&mut rng);
                scale * (c + z)
            })
            .collect();
        rows.push(row);
        targets.push(f64::from(class + 1));
    }
    Dataset {
        format: DataFormat::Libsvm,
        features: FeatureMatrix::from_dense(&rows).expect("rows have equal length"),
        targets,
    }
}
