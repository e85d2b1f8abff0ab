//! Least-squares classification on ±1 targets.
//!
//! Binary problems regress a single output on targets −1 (class 0) and +1
//! (class 1); problems with three or more classes fit one ±1 regressor per
//! class (one-vs-all). An intercept is always fitted and never penalized:
//! the data is centered, the ridge system `(XcᵀXc + λI) w = Xcᵀ yc` is solved
//! for the feature weights, and the intercept is recovered from the means.
//! With `λ = 0` and a rank-deficient design the minimum-norm solution is
//! returned. Systems are solved by Cholesky, through the `n × n` Gram matrix
//! when there are fewer rows than features, and by a truncated SVD of the
//! centered design when the factorization is ill-conditioned.

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef, Side};

use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};

/// How class labels are turned into regression targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TargetEncoding {
    /// One ±1 output for two classes, one-vs-all otherwise.
    #[default]
    Auto,
    /// One ±1 output per class, even for two classes.
    OneVsAll,
}

impl TargetEncoding {
    fn outputs(self, class_count: usize) -> usize {
        match self {
            TargetEncoding::Auto if class_count == 2 => 1,
            _ => class_count,
        }
    }
}

/// A trained linear classifier.
#[derive(Debug, Clone)]
pub struct LinearModel {
    /// `d × outputs`.
    weights: Mat<f64>,
    intercepts: Vec<f64>,
    class_count: usize,
    trained_on: usize,
}

impl LinearModel {
    /// Assembles a model from explicit parameters, one weight vector per
    /// output. A single output means a binary ±1 model; otherwise there must
    /// be one output per class.
    pub fn from_parts(
        weights: Vec<Vec<f64>>,
        intercepts: Vec<f64>,
        class_count: usize,
    ) -> Result<Self> {
        let outputs = weights.len();
        if outputs == 0 || outputs != intercepts.len() {
            return Err(Error::InvalidArgument(format!(
                "{} weight columns but {} intercepts",
                outputs,
                intercepts.len()
            )));
        }
        if class_count < 2 || (outputs != 1 && outputs != class_count) || (outputs == 1 && class_count != 2) {
            return Err(Error::InvalidArgument(format!(
                "{outputs} outputs cannot encode {class_count} classes"
            )));
        }
        let dim = weights[0].len();
        if dim == 0 || weights.iter().any(|w| w.len() != dim) {
            return Err(Error::InvalidArgument("weight columns must share a nonzero length".into()));
        }
        Ok(Self {
            weights: Mat::from_fn(dim, outputs, |i, j| weights[j][i]),
            intercepts,
            class_count,
            trained_on: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn outputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    /// Number of samples the model was fitted on (0 for hand-built models).
    pub fn trained_on(&self) -> usize {
        self.trained_on
    }

    pub fn intercepts(&self) -> &[f64] {
        &self.intercepts
    }

    /// Weight vector of one output column.
    pub fn weights(&self, output: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.weights[(i, output)]).collect()
    }

    /// Real-valued outputs, row-major `n × outputs`.
    pub fn scores(&self, features: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim();
        if features.len() % d != 0 {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: features.len(),
            });
        }
        let n = features.len() / d;
        let x = MatRef::from_row_major_slice(features, n, d);
        let s = x * &self.weights;
        let k = self.outputs();
        let mut out = Vec::with_capacity(n * k);
        for i in 0..n {
            for j in 0..k {
                out.push(s[(i, j)] + self.intercepts[j]);
            }
        }
        Ok(out)
    }

    /// Predicts labels for row-major features whose length is a multiple of
    /// the model dimension.
    pub fn predict_features(&self, features: &[f64]) -> Result<Vec<usize>> {
        let k = self.outputs();
        let scores = self.scores(features)?;
        Ok(scores.chunks_exact(k).map(decide).collect())
    }

    /// Binary models: class 1 when the output is ≥ 0. Multiclass: argmax of
    /// the class scores, lowest class index on ties.
    pub fn predict(&self, data: &LabeledDataset) -> Result<Vec<usize>> {
        if data.n_features() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: data.n_features(),
            });
        }
        self.predict_features(data.features())
    }
}

fn decide(scores: &[f64]) -> usize {
    if scores.len() == 1 {
        return usize::from(scores[0] >= 0.0);
    }
    let mut best = 0;
    for (j, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = j;
        }
    }
    best
}

/// Fraction of rows the model misclassifies.
pub fn empirical_error(model: &LinearModel, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyEvaluationSet);
    }
    let predicted = model.predict(data)?;
    Ok(count_mistakes(&predicted, data.labels()) as f64 / data.len() as f64)
}

pub(crate) fn count_mistakes(predicted: &[usize], labels: &[usize]) -> usize {
    predicted.iter().zip(labels).filter(|(p, l)| p != l).count()
}

/// Fits a least-squares classifier with ridge penalty `lambda` on the
/// feature weights.
pub fn fit_least_squares(train: &LabeledDataset, lambda: f64) -> Result<LinearModel> {
    fit_least_squares_with(train, lambda, TargetEncoding::Auto)
}

pub fn fit_least_squares_with(
    train: &LabeledDataset,
    lambda: f64,
    encoding: TargetEncoding,
) -> Result<LinearModel> {
    let mut acc = IncrementalLeastSquares::with_encoding(train.n_features(), train.class_count(), encoding);
    acc.push(train)?;
    acc.fit(lambda)
}

/// A growing training set together with its centered second moments, so
/// that refitting after each appended batch costs `O(batch · d²)` plus one
/// `d × d` factorization instead of a pass over all rows.
#[derive(Debug, Clone)]
pub struct IncrementalLeastSquares {
    encoding: TargetEncoding,
    rows: LabeledDataset,
    mean_x: Vec<f64>,
    mean_t: Vec<f64>,
    /// Σ (x − x̄)(x − x̄)ᵀ
    scatter_xx: Mat<f64>,
    /// Σ (x − x̄)(t − t̄)ᵀ
    scatter_xt: Mat<f64>,
}

/// Smallest Cholesky pivot, relative to the largest diagonal entry, for
/// which a direct solve is trusted over the SVD route.
const PIVOT_TOLERANCE: f64 = 1e-9;

/// Eigenvectors, eigenvalues and the cutoff below which an eigenvalue is
/// treated as zero. `other_dim` is the second dimension of the design.
fn eigen(g: &Mat<f64>, other_dim: usize) -> Result<(Mat<f64>, Vec<f64>, f64)> {
    let evd = g
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigendecomposition failed: {e:?}")))?;
    let n = g.nrows();
    let s = evd.S().column_vector();
    let e: Vec<f64> = (0..n).map(|i| s[i]).collect();
    let e_max = e.iter().copied().fold(0.0_f64, f64::max);
    let cutoff = (n.max(other_dim) as f64) * f64::EPSILON * e_max;
    Ok((evd.U().to_owned(), e, cutoff))
}

/// `diag(1 / (e + λ)) · projected`, dropping null directions when `λ = 0`.
fn spectral_scale(e: &[f64], cutoff: f64, lambda: f64, projected: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(e.len(), projected.ncols(), |i, j| {
        let gain = if (e[i] <= cutoff && lambda == 0.0) || e[i] + lambda <= 0.0 {
            0.0
        } else {
            1.0 / (e[i] + lambda)
        };
        gain * projected[(i, j)]
    })
}

fn trusted_llt(g: &Mat<f64>) -> Option<faer::linalg::solvers::Llt<f64>> {
    let n = g.nrows();
    let max_diag = (0..n).map(|i| g[(i, i)]).fold(0.0_f64, f64::max);
    if max_diag <= 0.0 {
        return None;
    }
    let llt = g.llt(Side::Lower).ok()?;
    let l = llt.L();
    let min_pivot = (0..n).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
    (min_pivot > PIVOT_TOLERANCE * max_diag).then_some(llt)
}

impl IncrementalLeastSquares {
    pub fn new(n_features: usize, class_count: usize) -> Self {
        Self::with_encoding(n_features, class_count, TargetEncoding::Auto)
    }

    pub fn with_encoding(n_features: usize, class_count: usize, encoding: TargetEncoding) -> Self {
        let k = encoding.outputs(class_count);
        Self {
            encoding,
            rows: LabeledDataset::empty(n_features, class_count),
            mean_x: vec![0.0; n_features],
            mean_t: vec![0.0; k],
            scatter_xx: Mat::zeros(n_features, n_features),
            scatter_xt: Mat::zeros(n_features, k),
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn encoding(&self) -> TargetEncoding {
        self.encoding
    }

    /// All rows seen so far.
    pub fn data(&self) -> &LabeledDataset {
        &self.rows
    }

    fn outputs(&self) -> usize {
        self.mean_t.len()
    }

    fn targets(&self, labels: &[usize]) -> Mat<f64> {
        let k = self.outputs();
        Mat::from_fn(labels.len(), k, |i, j| {
            let positive = if k == 1 { labels[i] == 1 } else { labels[i] == j };
            if positive {
                1.0
            } else {
                -1.0
            }
        })
    }

    /// Appends a batch of rows.
    pub fn push(&mut self, batch: &LabeledDataset) -> Result<()> {
        if batch.n_features() != self.rows.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.rows.n_features(),
                got: batch.n_features(),
            });
        }
        if batch.is_empty() {
            return Ok(());
        }
        if !batch.is_finite() {
            return Err(Error::InvalidData("non-finite feature value".into()));
        }
        let d = batch.n_features();
        let k = self.outputs();
        let nb = batch.len();
        let x = batch.matrix();
        let t = self.targets(batch.labels());

        let mb: Vec<f64> = (0..d).map(|j| (0..nb).map(|i| x[(i, j)]).sum::<f64>() / nb as f64).collect();
        let tb: Vec<f64> = (0..k).map(|j| (0..nb).map(|i| t[(i, j)]).sum::<f64>() / nb as f64).collect();
        let xc = Mat::from_fn(nb, d, |i, j| x[(i, j)] - mb[j]);
        let tc = Mat::from_fn(nb, k, |i, j| t[(i, j)] - tb[j]);
        let sxx = xc.transpose() * &xc;
        let sxt = xc.transpose() * &tc;

        let na = self.rows.len() as f64;
        let nbf = nb as f64;
        let n = na + nbf;
        let dx: Vec<f64> = (0..d).map(|j| mb[j] - self.mean_x[j]).collect();
        let dt: Vec<f64> = (0..k).map(|j| tb[j] - self.mean_t[j]).collect();
        let f = na * nbf / n;
        for c in 0..d {
            for r in 0..d {
                self.scatter_xx[(r, c)] += sxx[(r, c)] + f * dx[r] * dx[c];
            }
        }
        for c in 0..k {
            for r in 0..d {
                self.scatter_xt[(r, c)] += sxt[(r, c)] + f * dx[r] * dt[c];
            }
        }
        for (m, delta) in self.mean_x.iter_mut().zip(&dx) {
            *m += delta * nbf / n;
        }
        for (m, delta) in self.mean_t.iter_mut().zip(&dt) {
            *m += delta * nbf / n;
        }
        self.rows.append(batch)
    }

    pub fn fit(&self, lambda: f64) -> Result<LinearModel> {
        Ok(self.fit_path(&[lambda])?.pop().expect("one model per lambda"))
    }

    /// Fits one model per penalty, sharing a single factorization.
    pub fn fit_path(&self, lambdas: &[f64]) -> Result<Vec<LinearModel>> {
        if self.rows.is_empty() {
            return Err(Error::EmptyTrainingSet);
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
            return Err(Error::InvalidArgument(format!("lambda must be finite and >= 0, got {bad}")));
        }
        let n = self.rows.len();
        let d = self.rows.n_features();
        let weights = match (lambdas, n > d + 1) {
            ([lambda], true) => self.solve_primal(*lambda),
            ([lambda], false) => self.solve_dual(*lambda),
            (_, true) => Some(self.solve_eigen(lambdas)?),
            (_, false) => Some(self.solve_dual_eigen(lambdas)?),
        };
        let weights = match weights {
            Some(w) => w,
            None => self.solve_svd(lambdas)?,
        };
        Ok(weights.into_iter().map(|w| self.assemble(w)).collect())
    }

    /// `(XcᵀXc + λI) w = Xcᵀ tc` by Cholesky.
    fn solve_primal(&self, lambda: f64) -> Option<Vec<Mat<f64>>> {
        let mut g = self.scatter_xx.clone();
        for i in 0..g.nrows() {
            g[(i, i)] += lambda;
        }
        Some(vec![trusted_llt(&g)?.solve(&self.scatter_xt)])
    }

    /// `w = Xcᵀ (XcXcᵀ + 11ᵀ + λI)⁻¹ tc`. Centering puts `1` in the null
    /// space of the Gram matrix and makes `tc ⊥ 1`, so the added `11ᵀ`
    /// leaves the solution unchanged; at `λ = 0` it is the minimum-norm
    /// interpolant whenever the centered rows have rank `n − 1`.
    fn solve_dual(&self, lambda: f64) -> Option<Vec<Mat<f64>>> {
        let (xc, tc) = self.centered();
        let n = xc.nrows();
        let gram = &xc * xc.transpose();
        let g = Mat::from_fn(n, n, |i, j| gram[(i, j)] + 1.0 + if i == j { lambda } else { 0.0 });
        let a = trusted_llt(&g)?.solve(&tc);
        Some(vec![xc.transpose() * &a])
    }

    /// Whole penalty path from one eigendecomposition of the `n × n` Gram
    /// matrix.
    fn solve_dual_eigen(&self, lambdas: &[f64]) -> Result<Vec<Mat<f64>>> {
        let (xc, tc) = self.centered();
        let gram = &xc * xc.transpose();
        let (u, e, cutoff) = eigen(&gram, xc.ncols())?;
        let projected = u.transpose() * &tc;
        Ok(lambdas
            .iter()
            .map(|&lambda| {
                let a = &u * &spectral_scale(&e, cutoff, lambda, &projected);
                xc.transpose() * &a
            })
            .collect())
    }

    /// Whole penalty path from one eigendecomposition of `XcᵀXc`.
    fn solve_eigen(&self, lambdas: &[f64]) -> Result<Vec<Mat<f64>>> {
        let (u, e, cutoff) = eigen(&self.scatter_xx, self.rows.len())?;
        let projected = u.transpose() * &self.scatter_xt;
        Ok(lambdas
            .iter()
            .map(|&lambda| &u * &spectral_scale(&e, cutoff, lambda, &projected))
            .collect())
    }

    fn centered(&self) -> (Mat<f64>, Mat<f64>) {
        let n = self.rows.len();
        let d = self.rows.n_features();
        let x = self.rows.matrix();
        let t = self.targets(self.rows.labels());
        let xc = Mat::from_fn(n, d, |i, j| x[(i, j)] - self.mean_x[j]);
        let tc = Mat::from_fn(n, self.outputs(), |i, j| t[(i, j)] - self.mean_t[j]);
        (xc, tc)
    }

    fn solve_svd(&self, lambdas: &[f64]) -> Result<Vec<Mat<f64>>> {
        let n = self.rows.len();
        let d = self.rows.n_features();
        let k = self.outputs();
        let (xc, tc) = self.centered();
        let svd = xc
            .thin_svd()
            .map_err(|e| Error::Numerical(format!("svd failed: {e:?}")))?;
        let s = svd.S().column_vector();
        let r = s.nrows();
        let s_max = if r > 0 { s[0] } else { 0.0 };
        let cutoff = (n.max(d) as f64) * f64::EPSILON * s_max;
        let projected = svd.U().transpose() * &tc;
        let v = svd.V();
        Ok(lambdas
            .iter()
            .map(|&lambda| {
                let gain: Vec<f64> = (0..r)
                    .map(|i| if s[i] <= cutoff { 0.0 } else { s[i] / (s[i] * s[i] + lambda) })
                    .collect();
                let scaled = Mat::from_fn(r, k, |i, j| gain[i] * projected[(i, j)]);
                v * &scaled
            })
            .collect())
    }

    fn assemble(&self, weights: Mat<f64>) -> LinearModel {
        let d = weights.nrows();
        let intercepts = (0..weights.ncols())
            .map(|j| self.mean_t[j] - (0..d).map(|i| self.mean_x[i] * weights[(i, j)]).sum::<f64>())
            .collect();
        LinearModel {
            weights,
            intercepts,
            class_count: self.rows.class_count(),
            trained_on: self.rows.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn ds(rows: &[&[f64]], labels: &[usize]) -> LabeledDataset {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        LabeledDataset::from_rows(&rows, labels.to_vec(), 2).unwrap()
    }

    #[test]
    fn two_points_interpolate_exactly() {
        let m = fit_least_squares(&ds(&[&[0.0], &[1.0]], &[0, 1]), 0.0).unwrap();
        assert_abs_diff_eq!(m.weights(0)[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.intercepts()[0], -1.0, epsilon = 1e-12);
        assert_eq!(m.predict(&ds(&[&[0.0], &[1.0]], &[0, 0])).unwrap(), vec![0, 1]);
    }

    #[test]
    fn ridge_leaves_intercept_unpenalized() {
        // (XcᵀXc + λ) w = Xcᵀ yc with Xc = (−1, 1), yc = (−1, 1): (2 + 1) w = 2.
        let m = fit_least_squares(&ds(&[&[-1.0], &[1.0]], &[0, 1]), 1.0).unwrap();
        assert_abs_diff_eq!(m.weights(0)[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(m.intercepts()[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_sample_has_no_component_off_the_data() {
        let m = fit_least_squares(&ds(&[&[1.0, 0.0]], &[1]), 0.0).unwrap();
        assert_abs_diff_eq!(m.weights(0)[1], 0.0, epsilon = 1e-15);
        assert_eq!(m.predict(&ds(&[&[1.0, 0.0]], &[0])).unwrap(), vec![1]);
    }

    #[test]
    fn zero_model_tie_rules() {
        let binary = LinearModel::from_parts(vec![vec![0.0, 0.0]], vec![0.0], 2).unwrap();
        let multi = LinearModel::from_parts(vec![vec![0.0]; 3], vec![0.0; 3], 3).unwrap();
        assert_eq!(binary.predict_features(&[3.0, -1.0]).unwrap(), vec![1]);
        assert_eq!(multi.predict_features(&[0.0, 0.0]).unwrap(), vec![0, 0]);
    }

    #[test]
    fn argmax_ties_go_to_lowest_index() {
        let m = LinearModel::from_parts(vec![vec![0.0]; 3], vec![0.2, 0.9, 0.9], 3).unwrap();
        assert_eq!(m.predict_features(&[5.0]).unwrap(), vec![1]);
    }

    #[test]
    fn empirical_error_counts() {
        let m = LinearModel::from_parts(vec![vec![1.0]], vec![0.0], 2).unwrap();
        let data = ds(&[&[1.0], &[2.0], &[-1.0], &[3.0]], &[1, 1, 0, 0]);
        assert_eq!(empirical_error(&m, &data).unwrap(), 0.25);
        let all_right = ds(&[&[1.0], &[-1.0]], &[1, 0]);
        assert_eq!(empirical_error(&m, &all_right).unwrap(), 0.0);
        let all_wrong = ds(&[&[1.0], &[-1.0]], &[0, 1]);
        assert_eq!(empirical_error(&m, &all_wrong).unwrap(), 1.0);
    }

    #[test]
    fn error_paths() {
        let empty = LabeledDataset::empty(1, 2);
        assert_eq!(fit_least_squares(&empty, 0.0).unwrap_err().to_string(), "empty training set");
        let nan = ds(&[&[f64::NAN], &[1.0]], &[0, 1]);
        assert!(fit_least_squares(&nan, 0.0).unwrap_err().to_string().starts_with("invalid data"));
        let m = LinearModel::from_parts(vec![vec![1.0]], vec![0.0], 2).unwrap();
        assert_eq!(empirical_error(&m, &empty).unwrap_err().to_string(), "empty evaluation set");
        let wide = LabeledDataset::empty(2, 2);
        assert!(matches!(m.predict(&wide), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn incremental_matches_batch_fit() {
        let a = ds(&[&[0.0, 1.0], &[1.0, 3.0], &[2.0, -1.0]], &[0, 1, 1]);
        let b = ds(&[&[4.0, 0.5], &[-2.0, 2.0], &[1.5, 1.5], &[0.3, -0.7]], &[0, 1, 0, 1]);
        let mut acc = IncrementalLeastSquares::new(2, 2);
        acc.push(&a).unwrap();
        acc.push(&b).unwrap();
        let inc = acc.fit(0.0).unwrap();
        let batch = fit_least_squares(&a.concat(&b).unwrap(), 0.0).unwrap();
        for (x, y) in inc.weights(0).iter().zip(batch.weights(0)) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(inc.intercepts()[0], batch.intercepts()[0], epsilon = 1e-10);
    }

    #[test]
    fn path_matches_individual_fits() {
        let data = ds(
            &[&[0.0, 1.0], &[1.0, 3.0], &[2.0, -1.0], &[4.0, 0.5], &[-2.0, 2.0], &[1.5, 1.5]],
            &[0, 1, 1, 0, 1, 0],
        );
        let mut acc = IncrementalLeastSquares::new(2, 2);
        acc.push(&data).unwrap();
        let grid = [0.0, 0.1, 1.0, 10.0];
        let path = acc.fit_path(&grid).unwrap();
        for (&lambda, m) in grid.iter().zip(&path) {
            let single = acc.fit(lambda).unwrap();
            for (x, y) in m.weights(0).iter().zip(single.weights(0)) {
                assert_abs_diff_eq!(*x, y, epsilon = 1e-9);
            }
        }
    }
}
