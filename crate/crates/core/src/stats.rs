//! Paired model comparison: McNemar's exact conditional test, the two update
//! rules used by the holdout wrappers, and the run-level confidence
//! arithmetic relating `alpha`, the number of rounds and the probability of a
//! fully monotone run.

use serde::{Deserialize, Serialize};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::models::LinearModel;

/// Joint correctness of a candidate and an incumbent on one shared sample.
///
/// The first digit is the candidate's correctness, the second the
/// incumbent's (1 = correct). `n10` are the rows only the candidate gets
/// right, `n01` the rows only the incumbent gets right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PairedOutcomeCounts {
    pub n00: usize,
    pub n01: usize,
    pub n10: usize,
    pub n11: usize,
}

impl PairedOutcomeCounts {
    /// Candidate right, incumbent wrong.
    pub fn b(&self) -> usize {
        self.n10
    }

    /// Candidate wrong, incumbent right.
    pub fn c(&self) -> usize {
        self.n01
    }

    pub fn discordant(&self) -> usize {
        self.n10 + self.n01
    }

    pub fn total(&self) -> usize {
        self.n00 + self.n01 + self.n10 + self.n11
    }

    pub fn from_predictions(candidate: &[usize], incumbent: &[usize], labels: &[usize]) -> Result<Self> {
        if candidate.len() != labels.len() || incumbent.len() != labels.len() {
            return Err(Error::InvalidArgument("prediction and label lengths differ".into()));
        }
        let mut counts = Self::default();
        for ((&h, &g), &y) in candidate.iter().zip(incumbent).zip(labels) {
            match (h == y, g == y) {
                (false, false) => counts.n00 += 1,
                (false, true) => counts.n01 += 1,
                (true, false) => counts.n10 += 1,
                (true, true) => counts.n11 += 1,
            }
        }
        Ok(counts)
    }
}

/// Evaluates both models on `sample` and tabulates their joint correctness.
pub fn paired_counts(
    candidate: &LinearModel,
    incumbent: &LinearModel,
    sample: &LabeledDataset,
) -> Result<PairedOutcomeCounts> {
    if sample.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let h = candidate.predict(sample)?;
    let g = incumbent.predict(sample)?;
    PairedOutcomeCounts::from_predictions(&h, &g, sample.labels())
}

/// One-tailed exact McNemar p-value for "the candidate is better".
///
/// Conditional on the `b + c` discordant rows, `b ~ Binomial(b + c, ½)`
/// under the null; the p-value is `P(X ≥ b)`. No discordant rows gives 1.
pub fn mcnemar_exact_one_tailed(counts: &PairedOutcomeCounts) -> f64 {
    binomial_half_upper_tail(counts.discordant(), counts.b())
}

/// `P(X ≥ k)` for `X ~ Binomial(n, ½)`.
pub fn binomial_half_upper_tail(n: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if k > n {
        return 0.0;
    }
    if 2 * k == n + 1 {
        return 0.5;
    }
    if 2 * k > n {
        decreasing_tail(n, k)
    } else {
        // P(X ≥ k) = 1 − P(X ≤ k−1) = 1 − P(X ≥ n−k+1) by symmetry.
        1.0 - decreasing_tail(n, n - k + 1)
    }
}

/// Sums the pmf from `start` (past the mode) to `n`; terms only shrink.
fn decreasing_tail(n: usize, start: usize) -> f64 {
    debug_assert!(2 * start > n);
    let ln_choose: f64 = (1..=n - start).map(|i| ((start + i) as f64 / i as f64).ln()).sum();
    let mut term = (ln_choose - n as f64 * std::f64::consts::LN_2).exp();
    let mut sum = 0.0;
    for j in start..=n {
        sum += term;
        term *= (n - j) as f64 / (j + 1) as f64;
    }
    sum.min(1.0)
}

/// Holdout comparison: switch when the candidate's validation error does not
/// exceed the incumbent's. Ties switch to the newer model.
pub fn update_simple(p_current: f64, p_best: f64) -> bool {
    p_current <= p_best
}

/// Outcome of a hypothesis-test gated update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestDecision {
    pub p_value: f64,
    pub alpha: f64,
    pub update: bool,
    pub b: usize,
    pub c: usize,
}

/// Validates a significance level in `(0, ½]`.
pub fn check_alpha(alpha: f64) -> Result<f64> {
    if alpha > 0.0 && alpha <= 0.5 {
        Ok(alpha)
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

/// Switch only when McNemar's test rejects equal error rates at level `alpha`.
pub fn update_ht(counts: &PairedOutcomeCounts, alpha: f64) -> Result<TestDecision> {
    let alpha = check_alpha(alpha)?;
    let p_value = mcnemar_exact_one_tailed(counts);
    Ok(TestDecision {
        p_value,
        alpha,
        update: p_value <= alpha,
        b: counts.b(),
        c: counts.c(),
    })
}

/// Per-round level that makes an `n`-round run fully monotone with
/// probability at least `beta`: `1 − beta^(1/n)`.
///
/// The raw value is returned even when it exceeds ½; see [`clamp_alpha`].
pub fn alpha_for_run_budget(beta: f64, rounds: usize) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) || rounds == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < beta < 1 and rounds >= 1, got beta={beta}, rounds={rounds}"
        )));
    }
    Ok(-(beta.ln() / rounds as f64).exp_m1())
}

/// Clamps a level into `(0, ½]`, reporting whether clamping happened.
pub fn clamp_alpha(raw: f64) -> (f64, bool) {
    if raw > 0.5 {
        (0.5, true)
    } else {
        (raw, false)
    }
}

/// `(1 − alpha)^n`: lower bound on the probability that a hypothesis-test
/// gated run of `n` rounds never makes a non-monotone switch.
pub fn monotone_run_probability_bound(alpha: f64, rounds: usize) -> f64 {
    (rounds as f64 * (-alpha).ln_1p()).exp()
}
