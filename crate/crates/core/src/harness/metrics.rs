//! Learning-curve summaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wrappers::LearnerKind;

/// Area under the learning curve: the mean error over rounds.
pub fn aulc(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(Error::InvalidArgument("learning curve is empty".into()));
    }
    Ok(curve.iter().sum::<f64>() / curve.len() as f64)
}

/// Share of consecutive rounds where the error strictly increases.
pub fn nonmonotone_fraction(curve: &[f64]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::InvalidArgument("need at least two rounds".into()));
    }
    Ok(rises(curve) as f64 / (curve.len() - 1) as f64)
}

pub(crate) fn rises(curve: &[f64]) -> usize {
    curve.windows(2).filter(|w| w[1] > w[0]).count()
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Aggregates of one learner's curves over all runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveStats {
    pub learner: LearnerKind,
    pub runs: usize,
    /// Expected learning curve, one entry per round.
    pub mean_curve: Vec<f64>,
    pub std_curve: Vec<f64>,
    pub aulc_mean: f64,
    pub aulc_std: f64,
    pub fraction_mean: f64,
    pub fraction_std: f64,
}

impl CurveStats {
    /// `curves` holds one learning curve per run, all of equal length.
    pub fn from_curves(learner: LearnerKind, curves: &[Vec<f64>]) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::MissingResults(format!("no runs for {learner}")));
        }
        let rounds = curves[0].len();
        if curves.iter().any(|c| c.len() != rounds) {
            return Err(Error::InvalidArgument("curves differ in length".into()));
        }
        let aulcs = curves.iter().map(|c| aulc(c)).collect::<Result<Vec<_>>>()?;
        let fractions: Vec<f64> = if rounds >= 2 {
            curves.iter().map(|c| nonmonotone_fraction(c)).collect::<Result<_>>()?
        } else {
            vec![0.0; curves.len()]
        };
        let (mean_curve, std_curve) = (0..rounds)
            .map(|i| mean_std(&curves.iter().map(|c| c[i]).collect::<Vec<_>>()))
            .unzip();
        let (aulc_mean, aulc_std) = mean_std(&aulcs);
        let (fraction_mean, fraction_std) = mean_std(&fractions);
        Ok(Self {
            learner,
            runs: curves.len(),
            mean_curve,
            std_curve,
            aulc_mean,
            aulc_std,
            fraction_mean,
            fraction_std,
        })
    }

    /// Per-round standard error of the expected curve.
    pub fn std_error(&self) -> Vec<f64> {
        let r = (self.runs as f64).sqrt();
        self.std_curve.iter().map(|s| s / r).collect()
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    #[test]
    fn aulc_examples() {
        assert_abs_diff_eq!(aulc(&[0.5, 0.4, 0.3]).unwrap(), 0.4, epsilon = 1e-15);
        assert_eq!(aulc(&[0.7; 4]).unwrap(), 0.7);
        assert_eq!(aulc(&[0.25]).unwrap(), 0.25);
        assert!(aulc(&[]).is_err());
    }

    #[test]
    fn fraction_examples() {
        assert_abs_diff_eq!(nonmonotone_fraction(&[0.5, 0.4, 0.45, 0.3]).unwrap(), 1.0 / 3.0);
        assert_eq!(nonmonotone_fraction(&[0.5, 0.5, 0.5]).unwrap(), 0.0);
        assert_eq!(nonmonotone_fraction(&[0.1, 0.2, 0.3, 0.4]).unwrap(), 1.0);
        assert!(nonmonotone_fraction(&[0.1]).is_err());
    }

    #[test]
    fn stats_over_runs() {
        let s = CurveStats::from_curves(LearnerKind::Standard, &[vec![0.4, 0.2], vec![0.2, 0.4]]).unwrap();
        for m in &s.mean_curve {
            assert_abs_diff_eq!(*m, 0.3, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(s.aulc_mean, 0.3, epsilon = 1e-15);
        assert_eq!(s.aulc_std, 0.0);
        assert_eq!(s.fraction_mean, 0.5);
        assert_abs_diff_eq!(s.fraction_std, 0.5f64.sqrt(), epsilon = 1e-15);
    }
}
