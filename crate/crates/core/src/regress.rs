//! Multi-output ridge regression with k-fold cross-validation.
//!
//! Inputs are z-scored per column (population standard deviation, floored at
//! [`SCALE_FLOOR`]) and targets are centered before the closed-form solve.
//! The normal equations are solved on the `d x d` system when `d <= n` and on
//! the `n x n` kernel system when `d > n`; both routes produce the same
//! minimizer for `lambda > 0`.

use std::fs;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{map_jobs, ExecMode};

/// Lower bound on the per-column standardization scale. Columns whose
/// standard deviation falls at or below the floor are treated as constant and
/// receive zero weight.
pub const SCALE_FLOOR: f64 = 1e-12;

/// Which linear system to factorize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolveRoute {
    /// Primal for `d <= n`, dual otherwise.
    #[default]
    Auto,
    /// The `d x d` system `(X'X + lambda I) W' = X'Y`.
    Primal,
    /// The `n x n` kernel system `(X X' + lambda I) alpha = Y`, `W' = X' alpha`.
    Dual,
}

/// A fitted multi-output linear map with its normalization statistics.
///
/// Prediction is `weights . ((x - input_mean) / input_scale) + bias`, and the
/// bias is constructed so that the training-input mean maps to the
/// training-target mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionModel {
    /// `k x d` weight matrix in standardized input coordinates.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub lambda: f64,
    pub input_mean: Array1<f64>,
    /// Strictly positive, elementwise `max(std, SCALE_FLOOR)`.
    pub input_scale: Array1<f64>,
    pub target_mean: Array1<f64>,
}

impl RegressionModel {
    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn n_outputs(&self) -> usize {
        self.weights.nrows()
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut text = serde_json::to_string(self).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        text.push('\n');
        fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Cross-validation record: held-out MSE per `(lambda, fold)` cell and the
/// selected regularization strength.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub lambda_grid: Vec<f64>,
    /// `lambda_grid.len() x folds` held-out MSE matrix.
    pub fold_mse: Array2<f64>,
    pub selected_lambda: f64,
    pub folds: usize,
    pub seed: u64,
}

impl CvReport {
    /// Mean held-out MSE per grid point, in grid order.
    pub fn mean_mse(&self) -> Vec<f64> {
        self.fold_mse
            .rows()
            .into_iter()
            .map(|row| row.mean().expect("folds >= 2"))
            .collect()
    }
}

/// Fits ridge regression in closed form, choosing the solve route by shape.
pub fn fit_ridge(x: &Array2<f64>, y: &Array2<f64>, lambda: f64) -> Result<RegressionModel> {
    fit_ridge_with_route(x, y, lambda, SolveRoute::Auto)
}

/// [`fit_ridge`] with an explicit choice of linear system.
pub fn fit_ridge_with_route(
    x: &Array2<f64>,
    y: &Array2<f64>,
    lambda: f64,
    route: SolveRoute,
) -> Result<RegressionModel> {
    let n = x.nrows();
    let d = x.ncols();
    let k = y.ncols();
    if n == 0 {
        return Err(Error::invalid("cannot fit a regression on zero rows"));
    }
    if y.nrows() != n {
        return Err(Error::shape(
            "fit_ridge targets",
            format!("{n} rows"),
            format!("{} rows", y.nrows()),
        ));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be a finite non-negative real, got {lambda}"
        )));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression inputs".into()));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("regression targets".into()));
    }

    let stats = Standardization::fit(x);
    let x_std = stats.apply(x);
    let target_mean = y.mean_axis(Axis(0)).expect("n >= 1");
    let y_centered = y - &target_mean;

    let use_dual = match route {
        SolveRoute::Auto => d > n,
        SolveRoute::Primal => false,
        SolveRoute::Dual => true,
    };

    // Weights transposed: d x k.
    let weights_t = if use_dual {
        let mut gram = x_std.dot(&x_std.t());
        for i in 0..n {
            gram[[i, i]] += lambda;
        }
        let alpha = cholesky_solve(gram, &y_centered, lambda)?;
        x_std.t().dot(&alpha)
    } else {
        let mut gram = x_std.t().dot(&x_std);
        for j in 0..d {
            gram[[j, j]] += lambda;
            // Constant columns standardize to exact zeros; pin their
            // (otherwise all-zero) equation so the factorization stays
            // positive definite at lambda = 0. Their weight solves to zero.
            if stats.constant[j] && gram[[j, j]] == 0.0 {
                gram[[j, j]] = 1.0;
            }
        }
        let rhs = x_std.t().dot(&y_centered);
        cholesky_solve(gram, &rhs, lambda)?
    };

    let weights = weights_t.t().to_owned();
    debug_assert_eq!(weights.dim(), (k, d));
    // The standardized training-input mean is exactly zero, so the bias is
    // the target mean.
    let bias = target_mean.clone();

    Ok(RegressionModel {
        weights,
        bias,
        lambda,
        input_mean: stats.mean,
        input_scale: stats.scale,
        target_mean,
    })
}

/// Applies the fitted affine map to a single input.
pub fn predict(model: &RegressionModel, x: &Array1<f64>) -> Result<Array1<f64>> {
    if x.len() != model.n_features() {
        return Err(Error::shape(
            "predict input",
            format!("{} features", model.n_features()),
            format!("{} features", x.len()),
        ));
    }
    let z = (x - &model.input_mean) / &model.input_scale;
    Ok(model.weights.dot(&z) + &model.bias)
}

/// Row-wise [`predict`] over a matrix of inputs.
pub fn predict_matrix(model: &RegressionModel, x: &Array2<f64>) -> Result<Array2<f64>> {
    if x.ncols() != model.n_features() {
        return Err(Error::shape(
            "predict input",
            format!("{} features", model.n_features()),
            format!("{} features", x.ncols()),
        ));
    }
    let z = (x - &model.input_mean) / &model.input_scale;
    Ok(z.dot(&model.weights.t()) + &model.bias)
}

/// Mean squared error between two equal-length sequences.
pub fn mse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || a.len() != b.len() {
        return Err(Error::shape(
            "mse operands",
            format!("two non-empty sequences of equal length (left has {})", a.len()),
            format!("right has {}", b.len()),
        ));
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&ai, &bi)| (ai - bi) * (ai - bi))
        .sum();
    Ok(sum / a.len() as f64)
}

/// K-fold cross-validation over a grid of regularization strengths.
///
/// Rows are permuted with a seeded generator and assigned to folds
/// round-robin; the caller supplies rows in id-sorted order to make the
/// assignment reproducible. Ties in mean held-out MSE select the larger
/// lambda.
pub fn kfold_cv(
    x: &Array2<f64>,
    y: &Array2<f64>,
    lambda_grid: &[f64],
    folds: usize,
    seed: u64,
    mode: ExecMode,
) -> Result<CvReport> {
    let n = x.nrows();
    if folds < 2 {
        return Err(Error::invalid(format!("folds must be >= 2, got {folds}")));
    }
    if n < folds {
        return Err(Error::invalid(format!(
            "cannot split {n} rows into {folds} folds"
        )));
    }
    if y.nrows() != n {
        return Err(Error::shape(
            "kfold_cv targets",
            format!("{n} rows"),
            format!("{} rows", y.nrows()),
        ));
    }
    if lambda_grid.is_empty() {
        return Err(Error::invalid("lambda grid must be non-empty"));
    }
    for &lambda in lambda_grid {
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!(
                "lambda grid entries must be finite non-negative reals, got {lambda}"
            )));
        }
    }

    let mut permutation: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    permutation.shuffle(&mut rng);
    let mut fold_of = vec![0usize; n];
    for (position, &row) in permutation.iter().enumerate() {
        fold_of[row] = position % folds;
    }

    struct FoldData {
        train_x: Array2<f64>,
        train_y: Array2<f64>,
        test_x: Array2<f64>,
        test_y: Array2<f64>,
    }
    let fold_data: Vec<FoldData> = (0..folds)
        .map(|fold| {
            let train: Vec<usize> = (0..n).filter(|&r| fold_of[r] != fold).collect();
            let test: Vec<usize> = (0..n).filter(|&r| fold_of[r] == fold).collect();
            FoldData {
                train_x: x.select(Axis(0), &train),
                train_y: y.select(Axis(0), &train),
                test_x: x.select(Axis(0), &test),
                test_y: y.select(Axis(0), &test),
            }
        })
        .collect();

    let cells: Vec<(usize, usize)> = (0..lambda_grid.len())
        .flat_map(|g| (0..folds).map(move |f| (g, f)))
        .collect();
    let cell_mse: Vec<Result<f64>> = map_jobs(mode, cells, |(g, f)| {
        let data = &fold_data[f];
        let model = fit_ridge(&data.train_x, &data.train_y, lambda_grid[g])?;
        let predicted = predict_matrix(&model, &data.test_x)?;
        mse(
            predicted.as_slice().expect("standard layout"),
            data.test_y.as_slice().expect("standard layout"),
        )
    });

    let mut fold_mse = Array2::zeros((lambda_grid.len(), folds));
    for (idx, value) in cell_mse.into_iter().enumerate() {
        fold_mse[[idx / folds, idx % folds]] = value?;
    }

    let mut selected_lambda = lambda_grid[0];
    let mut best_mean = f64::INFINITY;
    for (g, &lambda) in lambda_grid.iter().enumerate() {
        let mean = fold_mse.row(g).mean().expect("folds >= 2");
        if mean < best_mean || (mean == best_mean && lambda > selected_lambda) {
            best_mean = mean;
            selected_lambda = lambda;
        }
    }

    Ok(CvReport {
        lambda_grid: lambda_grid.to_vec(),
        fold_mse,
        selected_lambda,
        folds,
        seed,
    })
}

struct Standardization {
    mean: Array1<f64>,
    scale: Array1<f64>,
    constant: Vec<bool>,
}

impl Standardization {
    fn fit(x: &Array2<f64>) -> Self {
        let n = x.nrows() as f64;
        let d = x.ncols();
        let mut mean = Array1::zeros(d);
        let mut scale = Array1::zeros(d);
        let mut constant = vec![false; d];
        for j in 0..d {
            let column = x.column(j);
            let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if lo == hi {
                // Exactly constant: pin the mean to the shared value so the
                // centered column is exactly zero.
                mean[j] = lo;
                scale[j] = SCALE_FLOOR;
                constant[j] = true;
                continue;
            }
            let m = column.sum() / n;
            let var = column.iter().map(|&v| (v - m) * (v - m)).sum::<f64>() / n;
            let std = var.sqrt();
            mean[j] = m;
            scale[j] = std.max(SCALE_FLOOR);
            constant[j] = std <= SCALE_FLOOR;
        }
        Standardization {
            mean,
            scale,
            constant,
        }
    }

    fn apply(&self, x: &Array2<f64>) -> Array2<f64> {
        (x - &self.mean) / &self.scale
    }
}

/// Solves `A X = B` for symmetric positive-definite `A`, consuming `A` as the
/// factorization workspace.
fn cholesky_solve(mut a: Array2<f64>, b: &Array2<f64>, lambda: f64) -> Result<Array2<f64>> {
    let n = a.nrows();
    debug_assert_eq!(a.ncols(), n);
    debug_assert_eq!(b.nrows(), n);

    // In-place lower-triangular factorization.
    for j in 0..n {
        let mut diag = a[[j, j]];
        for k in 0..j {
            diag -= a[[j, k]] * a[[j, k]];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::Singular { lambda });
        }
        let root = diag.sqrt();
        a[[j, j]] = root;
        for i in (j + 1)..n {
            let mut value = a[[i, j]];
            for k in 0..j {
                value -= a[[i, k]] * a[[j, k]];
            }
            a[[i, j]] = value / root;
        }
    }

    let mut solution = b.clone();
    let k = solution.ncols();
    for rhs in 0..k {
        // Forward substitution: L z = b.
        for i in 0..n {
            let mut value = solution[[i, rhs]];
            for j in 0..i {
                value -= a[[i, j]] * solution[[j, rhs]];
            }
            solution[[i, rhs]] = value / a[[i, i]];
        }
        // Back substitution: L' x = z.
        for i in (0..n).rev() {
            let mut value = solution[[i, rhs]];
            for j in (i + 1)..n {
                value -= a[[j, i]] * solution[[j, rhs]];
            }
            solution[[i, rhs]] = value / a[[i, i]];
        }
    }
    Ok(solution)
}
