//! Principal component baseline on the sample covariance.

use crate::linalg::{symmetric_eigen, Matrix};
use crate::scalar::Scalar;
use crate::stats::{align_columns, mean, Dataset};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel<T> {
    /// Retained unit eigenvectors as rows, `retained x D`.
    pub components: Matrix<T>,
    /// All eigenvalues, descending, negatives from round-off set to zero.
    pub eigenvalues: Vec<T>,
    pub retained: usize,
    pub variance_fraction: T,
    pub means: Vec<T>,
    pub names: Vec<String>,
}

impl<T: Scalar> PcaModel<T> {
    /// Fraction of total variance carried by the first `k` components.
    pub fn explained(&self, k: usize) -> T {
        let total: T = self.eigenvalues.iter().copied().sum();
        if total <= T::zero() {
            return T::one();
        }
        self.eigenvalues[..k].iter().copied().sum::<T>() / total
    }
}

/// Sample covariance matrix of the columns (divisor n-1).
pub fn covariance_matrix<T: Scalar>(d: &Dataset<T>) -> Matrix<T> {
    let dim = d.dim();
    let nm1 = T::count(d.n() - 1);
    let centred: Vec<Vec<T>> = d
        .columns()
        .iter()
        .map(|c| {
            let m = mean(c);
            c.iter().map(|&v| v - m).collect()
        })
        .collect();
    let mut cov = Matrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..=i {
            let v = crate::scalar::dot(&centred[i], &centred[j]) / nm1;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    cov
}

/// Fit on (standardized) data, keeping the fewest components whose
/// cumulative share of variance reaches `variance_fraction`.
pub fn pca_fit<T: Scalar>(d: &Dataset<T>, variance_fraction: T) -> Result<PcaModel<T>> {
    if !(variance_fraction > T::zero() && variance_fraction <= T::one()) {
        return Err(Error::InvalidInput(format!(
            "variance fraction must lie in (0, 1], got {variance_fraction}"
        )));
    }
    let eig = symmetric_eigen(&covariance_matrix(d))?;
    let dim = d.dim();
    let eigenvalues: Vec<T> = eig.values.iter().map(|&v| v.max(T::zero())).collect();
    let total: T = eigenvalues.iter().copied().sum();
    let mut retained = dim;
    if total > T::zero() {
        let mut cum = T::zero();
        // tolerate round-off when the target is hit exactly
        let target = variance_fraction * total * (T::one() - T::lit(4.0) * T::epsilon());
        for (k, &v) in eigenvalues.iter().enumerate() {
            cum += v;
            if cum >= target {
                retained = k + 1;
                break;
            }
        }
    }
    let mut components = Matrix::zeros(retained, dim);
    for r in 0..retained {
        let row = eig.vectors.row(r);
        let pivot = row
            .iter()
            .enumerate()
            .fold((0, T::zero()), |best, (k, &v)| if v.abs() > best.1.abs() { (k, v) } else { best })
            .0;
        let sign = if row[pivot] < T::zero() { -T::one() } else { T::one() };
        for k in 0..dim {
            components[(r, k)] = sign * row[k];
        }
    }
    Ok(PcaModel {
        components,
        eigenvalues,
        retained,
        variance_fraction,
        means: d.columns().iter().map(|c| mean(c)).collect(),
        names: d.names().to_vec(),
    })
}

/// Project centred data onto the retained components. Columns are matched
/// by name.
pub fn pca_transform<T: Scalar>(m: &PcaModel<T>, d: &Dataset<T>) -> Result<Dataset<T>> {
    let order = align_columns(&m.names, d.names())?;
    let n = d.n();
    let mut out = vec![vec![T::zero(); n]; m.retained];
    for (k, &src) in order.iter().enumerate() {
        let col = d.column(src);
        let mu = m.means[k];
        for (r, o) in out.iter_mut().enumerate() {
            let w = m.components[(r, k)];
            for (v, &x) in o.iter_mut().zip(col) {
                *v += w * (x - mu);
            }
        }
    }
    let names = (1..=m.retained).map(|k| format!("pc{k}")).collect();
    Dataset::from_columns(names, out)
}
