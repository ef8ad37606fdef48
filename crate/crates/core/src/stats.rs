//! Sample moments with the n-1 divisor, and standardization.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;
use crate::{Error, Result};

/// Column-major numeric table with unique column names.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<T> {
    columns: Vec<Vec<T>>,
    names: Vec<String>,
}

impl<T: Scalar> Dataset<T> {
    /// Build from columns. Every column must have the same length `n >= 2`
    /// and hold finite values only.
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<T>>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::NoColumns);
        }
        if names.len() != columns.len() {
            return Err(Error::LengthMismatch {
                left: names.len(),
                right: columns.len(),
            });
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::DegenerateSample { n });
        }
        let mut seen = HashSet::with_capacity(names.len());
        for (name, col) in names.iter().zip(&columns) {
            if !seen.insert(name.as_str()) {
                return Err(Error::DuplicateColumn(name.clone()));
            }
            if col.len() != n {
                return Err(Error::LengthMismatch {
                    left: n,
                    right: col.len(),
                });
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue {
                    column: name.clone(),
                    row,
                });
            }
        }
        Ok(Self { columns, names })
    }

    /// Columns named `x1..xD`.
    pub fn from_unnamed(columns: Vec<Vec<T>>) -> Result<Self> {
        let names = (1..=columns.len()).map(|i| format!("x{i}")).collect();
        Self::from_columns(names, columns)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn dim(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<T>] {
        &self.columns
    }

    pub fn into_parts(self) -> (Vec<String>, Vec<Vec<T>>) {
        (self.names, self.columns)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|c| c == name)
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.columns[col][row]
    }

    /// Keep only the listed rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self::from_columns(self.names.clone(), columns)
    }

    pub fn column_moments(&self, j: usize) -> Result<(T, T)> {
        let col = self.columns.get(j).ok_or(Error::IndexOutOfRange {
            index: j,
            len: self.dim(),
        })?;
        column_moments(col)
    }
}

/// Mean and sample variance (divisor n-1) of a slice.
pub fn column_moments<T: Scalar>(x: &[T]) -> Result<(T, T)> {
    let n = x.len();
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    let m = mean(x);
    Ok((m, centered_cross(x, m, x, m) / T::count(n - 1)))
}

pub fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::count(x.len())
}

fn centered_cross<T: Scalar>(a: &[T], ma: T, b: &[T], mb: T) -> T {
    a.iter()
        .zip(b)
        .fold(T::zero(), |acc, (&u, &v)| acc + (u - ma) * (v - mb))
}

pub fn sample_variance<T: Scalar>(x: &[T]) -> Result<T> {
    column_moments(x).map(|(_, v)| v)
}

pub fn sample_covariance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::DegenerateSample { n });
    }
    Ok(centered_cross(a, mean(a), b, mean(b)) / T::count(n - 1))
}

/// Pearson correlation, clamped to [-1, 1].
///
/// A zero-variance argument is reported as `a` or `b`; use
/// [`correlation_named`] to carry real column names.
pub fn sample_correlation<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    correlation_named(a, "a", b, "b")
}

pub fn correlation_named<T: Scalar>(a: &[T], name_a: &str, b: &[T], name_b: &str) -> Result<T> {
    let cov = sample_covariance(a, b)?;
    let va = sample_variance(a)?;
    if va <= T::zero() {
        return Err(Error::ZeroVariance {
            column: name_a.to_owned(),
        });
    }
    let vb = sample_variance(b)?;
    if vb <= T::zero() {
        return Err(Error::ZeroVariance {
            column: name_b.to_owned(),
        });
    }
    Ok(clamp_unit(cov / (va.sqrt() * vb.sqrt())))
}

pub(crate) fn clamp_unit<T: Scalar>(r: T) -> T {
    r.max(-T::one()).min(T::one())
}

/// Per-column location and scale learned on training data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationState<T> {
    pub names: Vec<String>,
    pub means: Vec<T>,
    pub stds: Vec<T>,
}

impl<T: Scalar> StandardizationState<T> {
    pub fn fit(d: &Dataset<T>) -> Result<Self> {
        let mut means = Vec::with_capacity(d.dim());
        let mut stds = Vec::with_capacity(d.dim());
        for (name, col) in d.names.iter().zip(&d.columns) {
            let (m, v) = column_moments(col)?;
            if v <= T::zero() {
                return Err(Error::ZeroVariance {
                    column: name.clone(),
                });
            }
            means.push(m);
            stds.push(v.sqrt());
        }
        Ok(Self {
            names: d.names.clone(),
            means,
            stds,
        })
    }

    /// A state that leaves data unchanged.
    pub fn identity(names: Vec<String>) -> Self {
        let k = names.len();
        Self {
            names,
            means: vec![T::zero(); k],
            stds: vec![T::one(); k],
        }
    }

    /// Standardize `d`, aligning its columns to the fitted names.
    ///
    /// Output columns follow the fitted order, whatever order `d` uses.
    pub fn apply(&self, d: &Dataset<T>) -> Result<Dataset<T>> {
        let order = align_columns(&self.names, d.names())?;
        let columns = order
            .iter()
            .enumerate()
            .map(|(k, &src)| {
                let (m, s) = (self.means[k], self.stds[k]);
                d.column(src).iter().map(|&v| (v - m) / s).collect()
            })
            .collect();
        Dataset::from_columns(self.names.clone(), columns)
    }
}

/// For each expected name, the index of that name in `actual`.
pub fn align_columns(expected: &[String], actual: &[String]) -> Result<Vec<usize>> {
    let missing: Vec<String> = expected
        .iter()
        .filter(|e| !actual.contains(e))
        .cloned()
        .collect();
    let extra: Vec<String> = actual
        .iter()
        .filter(|a| !expected.contains(a))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::SchemaMismatch { missing, extra });
    }
    Ok(expected
        .iter()
        .map(|e| actual.iter().position(|a| a == e).unwrap())
        .collect())
}

pub fn standardize<T: Scalar>(d: &Dataset<T>) -> Result<(Dataset<T>, StandardizationState<T>)> {
    let state = StandardizationState::fit(d)?;
    let out = state.apply(d)?;
    Ok((out, state))
}

/// Subtract the sample mean.
pub fn center<T: Scalar>(y: &[T]) -> Vec<T> {
    let m = mean(y);
    y.iter().map(|&v| v - m).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn moments_hand_values() {
        assert_eq!(column_moments(&[1.0, 1.0, 1.0, 1.0]).unwrap(), (1.0, 0.0));
        let (m, v) = column_moments(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(close(m, 1.5, 1e-15) && close(v, 5.0 / 3.0, 1e-15));
        assert_eq!(column_moments(&[-1.0, 1.0]).unwrap(), (0.0, 2.0));
        assert!(matches!(
            column_moments(&[1.0f64]),
            Err(Error::DegenerateSample { n: 1 })
        ));
    }

    #[test]
    fn covariance_and_correlation() {
        let a = [0.0, 1.0, 2.0, 3.0];
        let b = [1.0, 3.0, 2.0, 4.0];
        assert!(close(sample_covariance(&a, &b).unwrap(), 4.0 / 3.0, 1e-15));
        assert!(close(sample_correlation(&a, &b).unwrap(), 0.8, 1e-15));
        assert_eq!(sample_covariance(&a, &[7.0; 4]).unwrap(), 0.0);
        let r = sample_correlation(&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(sample_correlation(&a, &a).unwrap(), 1.0);
        assert!(matches!(
            sample_covariance(&a, &[1.0, 2.0]),
            Err(Error::LengthMismatch { .. })
        ));
        match correlation_named(&a, "lhs", &[2.0; 4], "flat") {
            Err(Error::ZeroVariance { column }) => assert_eq!(column, "flat"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn standardize_small() {
        let d = Dataset::from_unnamed(vec![vec![0.0, 2.0]]).unwrap();
        let (s, st) = standardize(&d).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(s.get(0, 0), -h, 1e-15) && close(s.get(1, 0), h, 1e-15));
        assert_eq!(st.means, vec![1.0]);
        assert!(close(st.stds[0], 2f64.sqrt(), 1e-15));

        let flat = Dataset::from_unnamed(vec![vec![0.0, 1.0, 2.0], vec![3.0; 3]]).unwrap();
        match standardize(&flat) {
            Err(Error::ZeroVariance { column }) => assert_eq!(column, "x2"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn dataset_validation() {
        let dup = Dataset::<f64>::from_columns(
            vec!["a".into(), "a".into()],
            vec![vec![1.0, 2.0], vec![3.0, 4.0]],
        );
        assert!(matches!(dup, Err(Error::DuplicateColumn(_))));
        let nan = Dataset::from_unnamed(vec![vec![1.0, f64::NAN]]);
        assert!(matches!(nan, Err(Error::NonFiniteValue { row: 1, .. })));
        let short = Dataset::from_unnamed(vec![vec![1.0f64]]);
        assert!(matches!(short, Err(Error::DegenerateSample { .. })));
    }

    #[test]
    fn apply_aligns_by_name() {
        let d = Dataset::from_columns(
            vec!["a".into(), "b".into()],
            vec![vec![1.0, 2.0, 4.0], vec![0.0, 5.0, 1.0]],
        )
        .unwrap();
        let (s, st) = standardize(&d).unwrap();
        let swapped = Dataset::from_columns(
            vec!["b".into(), "a".into()],
            vec![d.column(1).to_vec(), d.column(0).to_vec()],
        )
        .unwrap();
        assert_eq!(st.apply(&swapped).unwrap(), s);
        let narrow = Dataset::from_columns(vec!["a".into()], vec![d.column(0).to_vec()]).unwrap();
        match st.apply(&narrow) {
            Err(Error::SchemaMismatch { missing, extra }) => {
                assert_eq!(missing, vec!["b".to_string()]);
                assert!(extra.is_empty());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn works_in_single_precision() {
        let (m, v) = column_moments(&[0.0f32, 1.0, 2.0, 3.0]).unwrap();
        assert!((m - 1.5).abs() < 1e-6 && (v - 5.0 / 3.0).abs() < 1e-6);
    }
}
