//! Monotone learner wrappers and a learning-curve experiment harness.
//!
//! The base learner is least-squares classification ([`models`]). The
//! [`wrappers`] turn it into learners that only switch to a newly trained
//! model when a holdout comparison, an exact McNemar test ([`stats`]) or
//! cross-validation says the switch is an improvement. The [`harness`] runs
//! all learners over shared batch sequences and summarizes their learning
//! curves.

pub mod cli;
pub mod data;
pub mod dataset;
pub mod error;
pub mod harness;
pub mod models;
pub mod seed;
pub mod stats;
pub mod wrappers;

pub use dataset::LabeledDataset;
pub use error::{Error, Result};
pub use models::{empirical_error, fit_least_squares, LinearModel};
