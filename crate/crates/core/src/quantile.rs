//! Upper-tail critical values of the chi-squared and F distributions.
//!
//! `q` is returned such that `P(X >= q) = alpha`. Both are found by
//! bracketing and bisecting the survival function, which comes from the
//! regularized incomplete gamma/beta functions in `statrs`.

use statrs::function::{beta::checked_beta_reg, gamma::checked_gamma_ur};

use crate::{Error, Result};

const REL_TOL: f64 = 1e-13;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::QuantileDomain(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

fn check_df(df: usize, what: &str) -> Result<()> {
    if df >= 1 {
        Ok(())
    } else {
        Err(Error::QuantileDomain(format!("{what} must be at least 1")))
    }
}

/// Invert a decreasing survival function on `[0, inf)`.
fn invert_survival(alpha: f64, start: f64, sf: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut lo = 0.0;
    let mut hi = start.max(1.0);
    while sf(hi)? > alpha {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::QuantileDomain("failed to bracket the quantile".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sf(mid)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= REL_TOL * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Survival function of the chi-squared distribution.
pub fn chi2_sf(df: usize, q: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    if q <= 0.0 {
        return Ok(1.0);
    }
    checked_gamma_ur(df as f64 / 2.0, q / 2.0).map_err(|e| Error::QuantileDomain(e.to_string()))
}

/// Survival function of the F distribution.
pub fn f_sf(df1: usize, df2: usize, q: f64) -> Result<f64> {
    check_df(df1, "numerator degrees of freedom")?;
    check_df(df2, "denominator degrees of freedom")?;
    if q <= 0.0 {
        return Ok(1.0);
    }
    let (d1, d2) = (df1 as f64, df2 as f64);
    checked_beta_reg(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * q))
        .map_err(|e| Error::QuantileDomain(e.to_string()))
}

pub fn chi2_upper_quantile(df: usize, alpha: f64) -> Result<f64> {
    check_df(df, "degrees of freedom")?;
    check_alpha(alpha)?;
    invert_survival(alpha, df as f64, |q| chi2_sf(df, q))
}

pub fn f_upper_quantile(df1: usize, df2: usize, alpha: f64) -> Result<f64> {
    check_df(df1, "numerator degrees of freedom")?;
    check_df(df2, "denominator degrees of freedom")?;
    check_alpha(alpha)?;
    invert_survival(alpha, 2.0, |q| f_sf(df1, df2, q))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    // critical values from printed statistical tables and scipy.stats
    #[test]
    fn chi2_table_values() {
        assert!(rel(chi2_upper_quantile(10, 0.05).unwrap(), 18.30703805327515) < 1e-6);
        assert!(rel(chi2_upper_quantile(1, 0.05).unwrap(), 3.8414588206941285) < 1e-6);
        assert!(rel(chi2_upper_quantile(2, 0.01).unwrap(), 9.210340371976182) < 1e-6);
        assert!(rel(chi2_upper_quantile(497, 0.025).unwrap(), 560.6652423974061) < 1e-6);
        assert!(rel(chi2_upper_quantile(497, 0.975).unwrap(), 437.122271612815) < 1e-6);
    }

    #[test]
    fn f_table_values() {
        assert!(rel(f_upper_quantile(3, 60, 0.05).unwrap(), 2.7580782958425805) < 1e-6);
        assert!(rel(f_upper_quantile(1, 10, 0.05).unwrap(), 4.9646027437307145) < 1e-6);
        assert!(rel(f_upper_quantile(3, 497, 0.025).unwrap(), 3.142442308940651) < 1e-6);
    }

    #[test]
    fn chi2_median_bracket() {
        for k in 2..60 {
            let m = chi2_upper_quantile(k, 0.5).unwrap();
            assert!(m >= (k - 1) as f64 && m <= k as f64, "k={k} median={m}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(chi2_upper_quantile(0, 0.05).is_err());
        assert!(chi2_upper_quantile(3, 0.0).is_err());
        assert!(f_upper_quantile(3, 10, 1.0).is_err());
        assert!(f_upper_quantile(0, 10, 0.5).is_err());
    }
}
