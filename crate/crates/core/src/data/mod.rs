//! Data sources: synthetic generators, MNIST ingestion, random Fourier
//! features and batch sampling.

pub mod batches;
pub mod generators;
pub mod mnist;
pub mod rff;

pub use batches::{draw_batches, Batch, BatchPlan, BatchSource};
pub use generators::{
    generate, generate_dipping, generate_peaking, DippingParams, GeneratorSpec, MnistParams, PeakingParams, Sampling,
    SourceSpec, Synthetic,
};
pub use mnist::load_mnist;
pub use rff::{random_fourier_features, FourierProjection};
