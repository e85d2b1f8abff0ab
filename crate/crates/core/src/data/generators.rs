//! Synthetic two-class sources whose least-squares learning curves are not
//! monotone.

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{rng_for, ExperimentRng, Purpose};

/// How labels are allotted within a draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// Class counts as equal as possible, then shuffled.
    Stratified,
    /// Labels drawn i.i.d. from the class prior.
    Random,
}

/// Two Gaussian classes with unit covariance and means `±(δ/√d)·1`.
///
/// The Bayes error is `Φ(−δ)` for every `d`; the pseudo-inverse learner
/// peaks when the training size crosses `d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeakingParams {
    pub dim: usize,
    #[serde(default = "PeakingParams::default_separation")]
    pub separation: f64,
}

impl PeakingParams {
    pub const DEFAULT_SEPARATION: f64 = 2.33;

    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            separation: Self::DEFAULT_SEPARATION,
        }
    }

    fn default_separation() -> f64 {
        Self::DEFAULT_SEPARATION
    }
}

/// One informative coordinate plus `noise_dims` pure-noise coordinates.
///
/// Class 0 sits at `x₁ ~ N(0, spread²)`. Class 1 sits at `N(1, spread²)`
/// with probability `majority_weight` and otherwise in a far cluster at
/// `N(outlier_offset, spread²)`, on the correct side of any sensible
/// threshold. Least squares places its threshold near the pooled mean of
/// `x₁`, which the far cluster drags past the class-1 majority once enough
/// data includes outliers; small samples without outliers are nearly
/// perfect. More data makes the learner worse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DippingParams {
    pub majority_weight: f64,
    pub outlier_offset: f64,
    pub spread: f64,
    pub noise_dims: usize,
}

impl Default for DippingParams {
    fn default() -> Self {
        Self {
            majority_weight: 0.98,
            outlier_offset: 400.0,
            spread: 0.25,
            noise_dims: 2,
        }
    }
}

/// MNIST IDX files mapped through random Fourier features.
///
/// File paths default to the standard distribution names inside `dir`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MnistParams {
    pub dir: Option<PathBuf>,
    pub train_images: Option<PathBuf>,
    pub train_labels: Option<PathBuf>,
    pub test_images: Option<PathBuf>,
    pub test_labels: Option<PathBuf>,
    pub features: usize,
    pub bandwidth: f64,
}

impl Default for MnistParams {
    fn default() -> Self {
        Self {
            dir: None,
            train_images: None,
            train_labels: None,
            test_images: None,
            test_labels: None,
            features: 500,
            bandwidth: 5.0,
        }
    }
}

/// The four IDX files of an MNIST distribution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MnistPaths {
    pub train_images: PathBuf,
    pub train_labels: PathBuf,
    pub test_images: PathBuf,
    pub test_labels: PathBuf,
}

impl MnistParams {
    pub fn paths(&self) -> Result<MnistPaths> {
        let pick = |explicit: &Option<PathBuf>, name: &str, key: &str| -> Result<PathBuf> {
            match (explicit, &self.dir) {
                (Some(p), _) => Ok(p.clone()),
                (None, Some(dir)) => Ok(dir.join(name)),
                (None, None) => Err(Error::config(
                    format!("source.{key}"),
                    "no path given and no MNIST directory set",
                )),
            }
        };
        Ok(MnistPaths {
            train_images: pick(&self.train_images, "train-images-idx3-ubyte", "train_images")?,
            train_labels: pick(&self.train_labels, "train-labels-idx1-ubyte", "train_labels")?,
            test_images: pick(&self.test_images, "t10k-images-idx3-ubyte", "test_images")?,
            test_labels: pick(&self.test_labels, "t10k-labels-idx1-ubyte", "test_labels")?,
        })
    }
}

/// A data source, tagged by `kind` in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceSpec {
    Peaking(PeakingParams),
    Dipping(DippingParams),
    Mnist(MnistParams),
}

impl SourceSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SourceSpec::Peaking(_) => "peaking",
            SourceSpec::Dipping(_) => "dipping",
            SourceSpec::Mnist(_) => "mnist",
        }
    }

    pub fn synthetic(&self) -> Option<Synthetic> {
        match self {
            SourceSpec::Peaking(p) => Some(Synthetic::Peaking(p.clone())),
            SourceSpec::Dipping(p) => Some(Synthetic::Dipping(p.clone())),
            SourceSpec::Mnist(_) => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SourceSpec::Mnist(p) => {
                if p.features == 0 {
                    return Err(Error::config("source.features", "must be at least 1"));
                }
                if !(p.bandwidth.is_finite() && p.bandwidth > 0.0) {
                    return Err(Error::config("source.bandwidth", "must be positive"));
                }
                Ok(())
            }
            other => other.synthetic().expect("synthetic").validate(),
        }
    }
}

/// Specification for `gen-data`: a source and a seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub source: SourceSpec,
}

/// A source that can draw fresh i.i.d. rows on demand.
#[derive(Debug, Clone, PartialEq)]
pub enum Synthetic {
    Peaking(PeakingParams),
    Dipping(DippingParams),
}

impl Synthetic {
    pub fn dim(&self) -> usize {
        match self {
            Synthetic::Peaking(p) => p.dim,
            Synthetic::Dipping(p) => 1 + p.noise_dims,
        }
    }

    pub fn class_count(&self) -> usize {
        2
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Synthetic::Peaking(p) => {
                if p.dim == 0 {
                    return Err(Error::config("source.dim", "must be at least 1"));
                }
                if !p.separation.is_finite() {
                    return Err(Error::config("source.separation", "must be finite"));
                }
            }
            Synthetic::Dipping(p) => {
                if !(p.majority_weight > 0.5 && p.majority_weight <= 1.0) {
                    return Err(Error::config("source.majority_weight", "must lie in (0.5, 1]"));
                }
                if !(p.outlier_offset.is_finite() && p.outlier_offset > 0.0) {
                    return Err(Error::config("source.outlier_offset", "must be positive"));
                }
                if !(p.spread.is_finite() && p.spread >= 0.0) {
                    return Err(Error::config("source.spread", "must be nonnegative"));
                }
            }
        }
        Ok(())
    }

    /// Appends one row of class `label` to `out`.
    pub fn sample_row(&self, label: usize, rng: &mut ExperimentRng, out: &mut Vec<f64>) {
        match self {
            Synthetic::Peaking(p) => {
                let sign = if label == 1 { 1.0 } else { -1.0 };
                let shift = sign * p.separation / (p.dim as f64).sqrt();
                out.extend((0..p.dim).map(|_| shift + rng.sample::<f64, _>(StandardNormal)));
            }
            Synthetic::Dipping(p) => {
                let center = match label {
                    0 => 0.0,
                    _ if rng.random::<f64>() < p.majority_weight => 1.0,
                    _ => p.outlier_offset,
                };
                out.push(center + p.spread * rng.sample::<f64, _>(StandardNormal));
                out.extend((0..p.noise_dims).map(|_| rng.sample::<f64, _>(StandardNormal)));
            }
        }
    }

    /// Draws rows for the given labels, in order.
    pub fn sample_labels(&self, labels: Vec<usize>, rng: &mut ExperimentRng) -> LabeledDataset {
        let d = self.dim();
        let mut features = Vec::with_capacity(labels.len() * d);
        for &y in &labels {
            self.sample_row(y, rng, &mut features);
        }
        LabeledDataset::new(features, d, labels, self.class_count()).expect("generated rows are well formed")
    }

    pub fn sample(&self, m: usize, sampling: Sampling, rng: &mut ExperimentRng) -> LabeledDataset {
        let labels = draw_labels(m, self.class_count(), sampling, rng);
        self.sample_labels(labels, rng)
    }
}

/// Labels for a draw of `m` rows over `classes` classes.
pub fn draw_labels(m: usize, classes: usize, sampling: Sampling, rng: &mut ExperimentRng) -> Vec<usize> {
    match sampling {
        Sampling::Random => (0..m).map(|_| rng.random_range(0..classes)).collect(),
        Sampling::Stratified => {
            let mut labels = Vec::with_capacity(m);
            for (c, n) in stratified_counts(m, classes, rng).into_iter().enumerate() {
                labels.extend(std::iter::repeat_n(c, n));
            }
            labels.shuffle(rng);
            labels
        }
    }
}

/// Per-class counts summing to `m` that differ by at most one; the classes
/// receiving the remainder are chosen at random.
pub fn stratified_counts(m: usize, classes: usize, rng: &mut ExperimentRng) -> Vec<usize> {
    let mut counts = vec![m / classes; classes];
    let mut order: Vec<usize> = (0..classes).collect();
    order.shuffle(rng);
    for &c in order.iter().take(m % classes) {
        counts[c] += 1;
    }
    counts
}

pub fn generate_peaking(params: &PeakingParams, m: usize, seed: u64) -> Result<LabeledDataset> {
    generate(&Synthetic::Peaking(params.clone()), m, seed)
}

pub fn generate_dipping(params: &DippingParams, m: usize, seed: u64) -> Result<LabeledDataset> {
    generate(&Synthetic::Dipping(params.clone()), m, seed)
}

/// `m` i.i.d. rows with labels drawn from the equal class prior.
pub fn generate(source: &Synthetic, m: usize, seed: u64) -> Result<LabeledDataset> {
    source.validate()?;
    if m == 0 {
        return Err(Error::InvalidArgument("sample count must be at least 1".into()));
    }
    let mut rng = rng_for(seed, Purpose::TestSet);
    Ok(source.sample(m, Sampling::Random, &mut rng))
}
