//! Per-round batches, each split into a training and a validation part.

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use super::generators::{draw_labels, stratified_counts, Sampling, Synthetic};
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::seed::{rng_for, ExperimentRng, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchPlan {
    pub rounds: usize,
    pub train_per_round: usize,
    pub val_per_round: usize,
    pub sampling: Sampling,
    pub append_validation: bool,
}

impl BatchPlan {
    pub fn batch_size(&self) -> usize {
        self.train_per_round + self.val_per_round
    }

    pub fn validate(&self) -> Result<()> {
        if self.rounds == 0 {
            return Err(Error::config("plan.rounds", "must be at least 1"));
        }
        if self.train_per_round == 0 {
            return Err(Error::config("plan.train_per_round", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub train: LabeledDataset,
    pub validation: LabeledDataset,
}

impl Batch {
    /// Training rows followed by validation rows.
    pub fn whole(&self) -> LabeledDataset {
        self.train.concat(&self.validation).expect("splits share a layout")
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Where batch rows come from.
#[derive(Debug, Clone, Copy)]
pub enum BatchSource<'a> {
    /// Fresh i.i.d. rows every batch.
    Synthetic(&'a Synthetic),
    /// Rows drawn without replacement from a fixed pool.
    Pool(&'a LabeledDataset),
}

pub fn draw_batches(source: BatchSource<'_>, plan: &BatchPlan, seed: u64) -> Result<Vec<Batch>> {
    draw_batches_with(source, plan, &mut rng_for(seed, Purpose::Batches))
}

pub fn draw_batches_with(source: BatchSource<'_>, plan: &BatchPlan, rng: &mut ExperimentRng) -> Result<Vec<Batch>> {
    plan.validate()?;
    match source {
        BatchSource::Synthetic(gen) => {
            gen.validate()?;
            Ok((0..plan.rounds)
                .map(|_| {
                    let train = draw_labels(plan.train_per_round, gen.class_count(), plan.sampling, rng);
                    let validation = draw_labels(plan.val_per_round, gen.class_count(), plan.sampling, rng);
                    Batch {
                        train: gen.sample_labels(train, rng),
                        validation: gen.sample_labels(validation, rng),
                    }
                })
                .collect())
        }
        BatchSource::Pool(pool) => {
            let needed = plan.rounds * plan.batch_size();
            if needed > pool.len() {
                return Err(Error::InsufficientRows {
                    needed,
                    available: pool.len(),
                });
            }
            match plan.sampling {
                Sampling::Random => {
                    let order = index::sample(rng, pool.len(), needed).into_vec();
                    Ok(order
                        .chunks(plan.batch_size())
                        .map(|rows| {
                            let (t, v) = rows.split_at(plan.train_per_round);
                            Batch {
                                train: pool.select(t),
                                validation: pool.select(v),
                            }
                        })
                        .collect())
                }
                Sampling::Stratified => stratified_from_pool(pool, plan, rng),
            }
        }
    }
}

fn stratified_from_pool(pool: &LabeledDataset, plan: &BatchPlan, rng: &mut ExperimentRng) -> Result<Vec<Batch>> {
    let classes = pool.class_count();
    let mut queues: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &y) in pool.labels().iter().enumerate() {
        queues[y].push(i);
    }
    for q in &mut queues {
        q.shuffle(rng);
    }
    let needed = plan.rounds * plan.batch_size();
    let mut take = |m: usize, rng: &mut ExperimentRng| -> Result<LabeledDataset> {
        let mut rows = Vec::with_capacity(m);
        for (c, n) in stratified_counts(m, classes, rng).into_iter().enumerate() {
            if queues[c].len() < n {
                return Err(Error::InsufficientRows {
                    needed,
                    available: pool.len(),
                });
            }
            let at = queues[c].len() - n;
            rows.extend(queues[c].drain(at..));
        }
        rows.shuffle(rng);
        Ok(pool.select(&rows))
    };
    (0..plan.rounds)
        .map(|_| {
            Ok(Batch {
                train: take(plan.train_per_round, rng)?,
                validation: take(plan.val_per_round, rng)?,
            })
        })
        .collect()
}
