//! Ordinary least squares with heteroskedasticity-consistent standard errors.
//!
//! Coefficients come from a Householder QR of the design matrix. The robust
//! covariance is the sandwich `(X'X)^-1 X' Ω X (X'X)^-1` with `Ω = diag(e_i²)`
//! (HC0), optionally scaled by `n / (n - k)` (HC1).

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Relative tolerance on `|R_ii|` below which a column counts as dependent.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SeFlavor {
    HC0,
    #[default]
    HC1,
}

impl SeFlavor {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hc0" => Ok(SeFlavor::HC0),
            "hc1" => Ok(SeFlavor::HC1),
            other => Err(Error::InvalidParameter(format!("unknown standard-error flavor {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// `sqrt(SSR / (n - k))`.
    pub residual_se: f64,
    pub n_obs: usize,
    pub df_resid: usize,
    pub se_flavor: SeFlavor,
}

impl RegressionResult {
    fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn coef(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.coefficients[i])
    }

    pub fn se(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.std_errors[i])
    }

    pub fn p_value(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.p_values[i])
    }

    pub fn t_stat(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.t_stats[i])
    }
}

/// Two-sided p-value of a t statistic with `df` degrees of freedom.
pub fn two_sided_p(t: f64, df: usize) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { f64::NAN } else { 0.0 };
    }
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0)
}

/// Fits `y = X b + e` and reports robust inference.
///
/// `x` is row-major with one row per observation and must already contain
/// any intercept column. `names` labels the columns.
pub fn ols_robust(y: &[f64], x: &[Vec<f64>], names: &[&str], flavor: SeFlavor) -> Result<RegressionResult> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::DimensionMismatch(format!("{} responses but {} design rows", n, x.len())));
    }
    let k = names.len();
    if k == 0 {
        return Err(Error::DimensionMismatch("design has no columns".into()));
    }
    if let Some(bad) = x.iter().position(|row| row.len() != k) {
        return Err(Error::DimensionMismatch(format!("row {bad} has {} columns, expected {k}", x[bad].len())));
    }
    if n <= k {
        return Err(Error::DimensionMismatch(format!("need more observations ({n}) than columns ({k})")));
    }

    let xm = DMatrix::from_fn(n, k, |i, j| x[i][j]);
    let yv = DVector::from_column_slice(y);

    let qr = xm.clone().qr();
    let r = qr.r();
    let scale = (0..k).map(|j| r[(j, j)].abs()).fold(0.0, f64::max);
    let rank = (0..k).filter(|&j| r[(j, j)].abs() > RANK_TOL * scale.max(f64::MIN_POSITIVE)).count();
    if rank < k {
        return Err(Error::RankDeficient { rank, cols: k });
    }

    let qty = qr.q().transpose() * &yv;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient { rank: k - 1, cols: k })?;
    let resid = &yv - &xm * &beta;

    // (X'X)^-1 = R^-1 R^-T
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(k, k))
        .ok_or(Error::RankDeficient { rank: k - 1, cols: k })?;
    let bread = &r_inv * r_inv.transpose();

    let mut meat = DMatrix::<f64>::zeros(k, k);
    for i in 0..n {
        let e2 = resid[i] * resid[i];
        for a in 0..k {
            let xa = xm[(i, a)] * e2;
            for b in 0..k {
                meat[(a, b)] += xa * xm[(i, b)];
            }
        }
    }
    let mut cov = &bread * meat * &bread;
    let df = n - k;
    if flavor == SeFlavor::HC1 {
        cov *= n as f64 / df as f64;
    }

    let coefficients: Vec<f64> = beta.iter().copied().collect();
    let std_errors: Vec<f64> = (0..k).map(|j| cov[(j, j)].max(0.0).sqrt()).collect();
    let t_stats: Vec<f64> = coefficients.iter().zip(&std_errors).map(|(b, s)| b / s).collect();
    let p_values = t_stats.iter().map(|&t| two_sided_p(t, df)).collect();

    let ssr: f64 = resid.iter().map(|e| e * e).sum();
    let y_mean = y.iter().sum::<f64>() / n as f64;
    let sst: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let has_intercept = (0..k).any(|j| x.iter().all(|row| row[j] == 1.0));
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { f64::NAN };
    let adj_r_squared = if has_intercept {
        1.0 - (1.0 - r_squared) * (n - 1) as f64 / df as f64
    } else {
        1.0 - (1.0 - r_squared) * n as f64 / df as f64
    };

    Ok(RegressionResult {
        names: names.iter().map(|s| s.to_string()).collect(),
        coefficients,
        std_errors,
        t_stats,
        p_values,
        r_squared,
        adj_r_squared,
        residual_se: (ssr / df as f64).sqrt(),
        n_obs: n,
        df_resid: df,
        se_flavor: flavor,
    })
}

/// Residuals of a fitted regression on the same data.
pub fn residuals(y: &[f64], x: &[Vec<f64>], coefficients: &[f64]) -> Vec<f64> {
    y.iter()
        .zip(x)
        .map(|(yi, row)| yi - row.iter().zip(coefficients).map(|(a, b)| a * b).sum::<f64>())
        .collect()
}
