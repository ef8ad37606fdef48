//! Least squares without intercept, plus the closed-form variance and bias
//! expressions of the one- and two-feature models.
//!
//! Every formula assumes zero-mean features and target; callers standardize
//! features and center the target first.

use crate::linalg::{gram, symmetric_eigen, Matrix};
use crate::scalar::{clamp_nonnegative, dot, Scalar};
use crate::{Error, Result};

/// Relative eigenvalue floor below which a Gram matrix counts as singular.
pub const SINGULAR_RCOND: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit<T> {
    pub weights: Vec<T>,
    /// `RSS / (n - p - 1)`.
    pub residual_variance: T,
    /// `(XᵀX)⁻¹ s²`.
    pub weight_covariance: Matrix<T>,
    pub n: usize,
    pub p: usize,
}

impl<T: Scalar> LinearFit<T> {
    pub fn weight_sd(&self, i: usize) -> T {
        self.weight_covariance[(i, i)].max(T::zero()).sqrt()
    }

    /// Prediction for one row given feature values in fit order.
    pub fn predict_row(&self, x: &[T]) -> T {
        dot(&self.weights, x)
    }

    /// Predictions for a design given as columns.
    pub fn predict(&self, columns: &[&[T]]) -> Vec<T> {
        assert_eq!(columns.len(), self.p, "design width");
        let n = columns.first().map_or(0, |c| c.len());
        let mut out = vec![T::zero(); n];
        for (w, col) in self.weights.iter().zip(columns) {
            for (o, &x) in out.iter_mut().zip(col.iter()) {
                *o += *w * x;
            }
        }
        out
    }
}

fn check_design<T: Scalar>(columns: &[&[T]], y: &[T]) -> Result<(usize, usize)> {
    let p = columns.len();
    let n = y.len();
    if p == 0 {
        return Err(Error::NoColumns);
    }
    for c in columns {
        if c.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: c.len(),
            });
        }
    }
    if n <= p + 1 {
        return Err(Error::InsufficientSamples { n, p });
    }
    Ok((n, p))
}

fn singular_guard<T: Scalar>(eigenvalues: &[T]) -> Result<()> {
    let max = eigenvalues.iter().copied().fold(T::neg_infinity(), T::max);
    let min = eigenvalues.iter().copied().fold(T::infinity(), T::min);
    if !(max > T::zero()) || min < T::lit(SINGULAR_RCOND) * max {
        return Err(Error::SingularDesign {
            min_eigenvalue: min.as_f64(),
            max_eigenvalue: max.as_f64(),
        });
    }
    Ok(())
}

/// Ordinary least squares of `y` on the given columns, no intercept.
pub fn ols_fit<T: Scalar>(columns: &[&[T]], y: &[T]) -> Result<LinearFit<T>> {
    let (n, p) = check_design(columns, y)?;
    let g = gram(columns);
    singular_guard(&symmetric_eigen(&g)?.values)?;
    let l = g.cholesky().ok_or(Error::SingularDesign {
        min_eigenvalue: 0.0,
        max_eigenvalue: 0.0,
    })?;
    let xty: Vec<T> = columns.iter().map(|c| dot(c, y)).collect();
    let weights = l.cholesky_solve(&xty);

    let mut rss = T::zero();
    for i in 0..n {
        let mut fitted = T::zero();
        for (w, c) in weights.iter().zip(columns) {
            fitted += *w * c[i];
        }
        let r = y[i] - fitted;
        rss += r * r;
    }
    let s2 = rss / T::count(n - p - 1);
    Ok(LinearFit {
        weight_covariance: l.cholesky_inverse().scale(s2),
        weights,
        residual_variance: s2,
        n,
        p,
    })
}

/// Sufficient statistics of a two-feature regression: the Gram entries,
/// the cross products with `y`, and `yᵀy`.
#[derive(Debug, Clone, Copy)]
pub struct PairMoments<T> {
    pub x1x1: T,
    pub x2x2: T,
    pub x1x2: T,
    pub x1y: T,
    pub x2y: T,
    pub yy: T,
    pub n: usize,
}

/// Two-feature OLS from precomputed cross products.
///
/// Same estimator as [`ols_fit`] with `p = 2`; the residual sum of squares
/// is `yᵀy - ŵᵀXᵀy`, clamped at zero.
pub fn ols_fit_pair<T: Scalar>(m: &PairMoments<T>) -> Result<LinearFit<T>> {
    let n = m.n;
    if n <= 3 {
        return Err(Error::InsufficientSamples { n, p: 2 });
    }
    let (a, b, c) = (m.x1x1, m.x2x2, m.x1x2);
    let half_tr = (a + b) * T::lit(0.5);
    let disc = ((a - b) * (a - b) * T::lit(0.25) + c * c).sqrt();
    singular_guard(&[half_tr + disc, half_tr - disc])?;
    let det = a * b - c * c;
    let w1 = (b * m.x1y - c * m.x2y) / det;
    let w2 = (a * m.x2y - c * m.x1y) / det;
    let rss = (m.yy - w1 * m.x1y - w2 * m.x2y).max(T::zero());
    let s2 = rss / T::count(n - 3);
    let k = s2 / det;
    Ok(LinearFit {
        weights: vec![w1, w2],
        residual_variance: s2,
        weight_covariance: Matrix::from_rows(2, 2, vec![b * k, -c * k, -c * k, a * k]),
        n,
        p: 2,
    })
}

fn positive<T: Scalar>(value: T, what: &'static str) -> Result<()> {
    if value > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveVariance {
            what,
            value: value.as_f64(),
        })
    }
}

fn n_minus_1<T: Scalar>(n: usize) -> Result<T> {
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    Ok(T::count(n - 1))
}

/// Variance of the single slope on the averaged feature: `σ²/((n-1)σ̂²)`.
pub fn weight_variance_1d<T: Scalar>(sigma2: T, sample_var_xbar: T, n: usize) -> Result<T> {
    positive(sample_var_xbar, "sample variance of the averaged feature")?;
    Ok(sigma2 / (n_minus_1::<T>(n)? * sample_var_xbar))
}

/// Conditional covariance of the two-feature weights.
pub fn weight_covariance_2d<T: Scalar>(
    sigma2: T,
    var1: T,
    var2: T,
    cov12: T,
    n: usize,
) -> Result<Matrix<T>> {
    let det = var1 * var2 - cov12 * cov12;
    if !(det > T::zero()) {
        return Err(Error::Collinear {
            determinant: det.as_f64(),
        });
    }
    let k = sigma2 / (n_minus_1::<T>(n)? * det);
    Ok(Matrix::from_rows(
        2,
        2,
        vec![var2 * k, -cov12 * k, -cov12 * k, var1 * k],
    ))
}

fn sum_variance<T: Scalar>(var1: T, var2: T, cov12: T) -> Result<T> {
    let s = var1 + var2 + cov12 + cov12;
    if s > T::zero() {
        Ok(s)
    } else {
        Err(Error::DegenerateSum { value: s.as_f64() })
    }
}

/// Expected slope of `y` on `(x1 + x2)/2` given the training features.
pub fn expected_weight_1d<T: Scalar>(w1: T, w2: T, var1: T, var2: T, cov12: T) -> Result<T> {
    let s = sum_variance(var1, var2, cov12)?;
    Ok(T::lit(2.0) * (w1 * var1 + w2 * var2 + (w1 + w2) * cov12) / s)
}

/// Variance of the aggregated one-feature model.
pub fn model_variance_1d<T: Scalar>(
    sigma2: T,
    pop_var_sum: T,
    samp_var_sum: T,
    n: usize,
) -> Result<T> {
    positive(samp_var_sum, "sample variance of x1 + x2")?;
    Ok(pop_var_sum * sigma2 / (n_minus_1::<T>(n)? * samp_var_sum))
}

/// Variance of the two-feature model.
#[allow(clippy::too_many_arguments)]
pub fn model_variance_2d<T: Scalar>(
    sigma2: T,
    pop_var1: T,
    pop_var2: T,
    pop_cov: T,
    samp_var1: T,
    samp_var2: T,
    samp_cov: T,
    n: usize,
) -> Result<T> {
    let det = samp_var1 * samp_var2 - samp_cov * samp_cov;
    if !(det > T::zero()) {
        return Err(Error::Collinear {
            determinant: det.as_f64(),
        });
    }
    let num = pop_var1 * samp_var2 + pop_var2 * samp_var1 - T::lit(2.0) * pop_cov * samp_cov;
    Ok(sigma2 * num / (n_minus_1::<T>(n)? * det))
}

/// Squared bias of the aggregated model when the truth is linear in both
/// features. The two-feature model is unbiased, so this is also the bias
/// increase caused by aggregating.
#[allow(clippy::too_many_arguments)]
pub fn model_bias_1d<T: Scalar>(
    w1: T,
    w2: T,
    pop_var1: T,
    pop_var2: T,
    pop_cov: T,
    samp_var1: T,
    samp_var2: T,
    samp_cov: T,
) -> Result<T> {
    let s_hat = sum_variance(samp_var1, samp_var2, samp_cov)?;
    let s_pop = pop_var1 + pop_var2 + pop_cov + pop_cov;
    let a_hat = w1 * samp_var1 + w2 * samp_var2 + (w1 + w2) * samp_cov;
    let a_pop = w1 * pop_var1 + w2 * pop_var2 + (w1 + w2) * pop_cov;
    let signal = w1 * w1 * pop_var1 + w2 * w2 * pop_var2 + T::lit(2.0) * w1 * w2 * pop_cov;
    let bias = s_pop * a_hat * a_hat / (s_hat * s_hat) + signal
        - T::lit(2.0) * a_pop * a_hat / s_hat;
    // cancellation leaves error proportional to the largest term
    let scale = (s_pop * a_hat * a_hat / (s_hat * s_hat)).abs() + signal.abs();
    let floor = T::lit(1e-12).max(T::lit(64.0) * T::epsilon() * scale);
    if bias < T::zero() && bias >= -floor {
        return Ok(T::zero());
    }
    clamp_nonnegative(bias, "aggregated-model bias")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noiseless_slope() {
        let x = [-1.5, -0.5, 0.5, 1.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let fit = ols_fit::<f64>(&[&x], &y).unwrap();
        assert!((fit.weights[0] - 2.0).abs() < 1e-14);
        assert!(fit.residual_variance.abs() < 1e-28);
    }

    #[test]
    fn duplicated_columns_are_singular() {
        let x = [-1.0, 0.0, 2.0, 3.0, -4.0];
        let y = [1.0, 2.0, 0.0, 1.0, 3.0];
        assert!(matches!(
            ols_fit::<f64>(&[&x, &x], &y),
            Err(Error::SingularDesign { .. })
        ));
    }

    #[test]
    fn too_few_samples() {
        let x = [1.0, 2.0, 3.0];
        assert!(matches!(
            ols_fit::<f64>(&[&x, &[3.0, 1.0, 2.0]], &[1.0, 0.0, 1.0]),
            Err(Error::InsufficientSamples { n: 3, p: 2 })
        ));
    }

    #[test]
    fn pair_fit_matches_general_fit() {
        let x1 = [0.3, -1.2, 0.8, 1.9, -0.4, 0.1, -1.5];
        let x2 = [0.5, -0.7, 1.1, 1.2, 0.2, -0.6, -1.0];
        let y = [0.9, -1.0, 1.7, 2.8, 0.5, -0.2, -2.1];
        let full = ols_fit::<f64>(&[&x1, &x2], &y).unwrap();
        let m = PairMoments {
            x1x1: dot(&x1, &x1),
            x2x2: dot(&x2, &x2),
            x1x2: dot(&x1, &x2),
            x1y: dot(&x1, &y),
            x2y: dot(&x2, &y),
            yy: dot(&y, &y),
            n: 7,
        };
        let pair = ols_fit_pair(&m).unwrap();
        for i in 0..2 {
            assert!((full.weights[i] - pair.weights[i]).abs() < 1e-12);
            for j in 0..2 {
                let (a, b) = (full.weight_covariance[(i, j)], pair.weight_covariance[(i, j)]);
                assert!((a - b).abs() < 1e-12 * a.abs().max(1.0));
            }
        }
        assert!((full.residual_variance - pair.residual_variance).abs() < 1e-12);
    }

    #[test]
    fn closed_form_hand_values() {
        assert!((weight_variance_1d::<f64>(1.0, 1.0, 101).unwrap() - 0.01).abs() < 1e-15);
        assert_eq!(weight_variance_1d::<f64>(0.0, 3.0, 10).unwrap(), 0.0);
        assert!((weight_variance_1d::<f64>(2.0, 0.5, 5).unwrap() - 1.0).abs() < 1e-15);
        assert!(weight_variance_1d::<f64>(1.0, 0.0, 5).is_err());

        let c = weight_covariance_2d::<f64>(1.0, 1.0, 1.0, 0.0, 101).unwrap();
        assert!((c[(0, 0)] - 0.01).abs() < 1e-15 && c[(0, 1)] == 0.0);
        assert!(matches!(
            weight_covariance_2d::<f64>(1.0, 1.0, 1.0, 1.0, 101),
            Err(Error::Collinear { .. })
        ));
        let z = weight_covariance_2d::<f64>(0.0, 1.0, 2.0, 0.3, 50).unwrap();
        assert!((0..2).all(|i| (0..2).all(|j| z[(i, j)] == 0.0)));

        assert!((expected_weight_1d::<f64>(0.7, 0.7, 1.3, 0.4, 0.2).unwrap() - 1.4).abs() < 1e-14);
        assert!((expected_weight_1d::<f64>(1.0, 0.0, 1.0, 1.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(expected_weight_1d::<f64>(0.0, 0.0, 1.0, 1.0, 0.5).unwrap(), 0.0);
        assert!(matches!(
            expected_weight_1d::<f64>(1.0, 0.0, 1.0, 1.0, -1.0),
            Err(Error::DegenerateSum { .. })
        ));

        assert!((model_variance_1d::<f64>(1.0, 2.0, 4.0, 101).unwrap() - 0.005).abs() < 1e-15);
        assert!((model_variance_1d::<f64>(0.5, 3.0, 3.0, 11).unwrap() - 0.05).abs() < 1e-15);
        let v2 = model_variance_2d::<f64>(1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 101).unwrap();
        assert!((v2 - 0.02).abs() < 1e-15);
        assert_eq!(
            model_variance_2d::<f64>(0.0, 1.0, 1.0, 0.3, 1.0, 1.0, 0.3, 9).unwrap(),
            0.0
        );
    }

    #[test]
    fn bias_hand_values() {
        let b = model_bias_1d::<f64>(0.2, 0.8, 1.0, 1.0, 0.5, 1.0, 1.0, 0.5).unwrap();
        assert!((b - 0.09).abs() < 1e-15);
        assert_eq!(model_bias_1d::<f64>(0.2, 0.8, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap(), 0.0);
        assert!(model_bias_1d::<f64>(0.4, 0.4, 1.3, 0.6, 0.2, 1.3, 0.6, 0.2).unwrap() < 1e-15);
    }

    #[test]
    fn variance_gap_is_sigma2_over_n_minus_1_when_moments_agree() {
        let (s2, v1, v2, c, n) = (0.7, 1.4, 0.6, 0.5, 40);
        let full = model_variance_2d::<f64>(s2, v1, v2, c, v1, v2, c, n).unwrap();
        let sum = v1 + v2 + 2.0 * c;
        let agg = model_variance_1d::<f64>(s2, sum, sum, n).unwrap();
        assert!((full - agg - s2 / 39.0).abs() < 1e-15);
    }
}
