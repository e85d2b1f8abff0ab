//! Random Fourier features approximating a Gaussian kernel.

use faer::Mat;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{rng_for, ExperimentRng, Purpose};

/// `z(x) = sqrt(2/D) · cos(Wᵀx + b)` with `W ~ N(0, 1/bandwidth²)` and
/// `b ~ U[0, 2π)`. Drawn once and applied to every split of an experiment.
#[derive(Debug, Clone)]
pub struct FourierProjection {
    weights: Mat<f64>,
    offsets: Vec<f64>,
}

impl FourierProjection {
    pub fn draw(input_dim: usize, features: usize, bandwidth: f64, rng: &mut ExperimentRng) -> Result<Self> {
        if features == 0 || input_dim == 0 {
            return Err(Error::InvalidArgument("feature counts must be at least 1".into()));
        }
        if !(bandwidth.is_finite() && bandwidth > 0.0) {
            return Err(Error::InvalidArgument(format!("bandwidth must be positive, got {bandwidth}")));
        }
        let scale = 1.0 / bandwidth;
        let mut weights = Mat::zeros(input_dim, features);
        for j in 0..features {
            for i in 0..input_dim {
                weights[(i, j)] = scale * rng.sample::<f64, _>(StandardNormal);
            }
        }
        let offsets = (0..features)
            .map(|_| rng.random_range(0.0..std::f64::consts::TAU))
            .collect();
        Ok(Self { weights, offsets })
    }

    pub fn input_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn features(&self) -> usize {
        self.offsets.len()
    }

    pub fn apply(&self, data: &LabeledDataset) -> Result<LabeledDataset> {
        if data.n_features() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                expected: self.input_dim(),
                got: data.n_features(),
            });
        }
        let d = self.features();
        let amplitude = (2.0 / d as f64).sqrt();
        let projected = data.matrix() * &self.weights;
        let mut features = Vec::with_capacity(data.len() * d);
        for i in 0..data.len() {
            for j in 0..d {
                features.push(amplitude * (projected[(i, j)] + self.offsets[j]).cos());
            }
        }
        LabeledDataset::new(features, d, data.labels().to_vec(), data.class_count())
    }
}

pub fn random_fourier_features(
    data: &LabeledDataset,
    features: usize,
    bandwidth: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    let mut rng = rng_for(seed, Purpose::Projection);
    FourierProjection::draw(data.n_features(), features, bandwidth, &mut rng)?.apply(data)
}
