//! ARMA and ARMAX baselines fit by Hannan-Rissanen two-stage least
//! squares: a long autoregression supplies residual proxies for the
//! moving-average terms, then AR, MA, and (for ARMAX) exogenous
//! coefficients are fit jointly by ordinary least squares. Everything is
//! linear algebra, so fits are deterministic.
//!
//! The ARMAX form regresses on the current and first `p` lags of the
//! external series (`eta_0 .. eta_p`) in addition to the AR and MA terms.
//! Forecasts evaluate the fitted recursion with the future noise term set
//! to zero, filtering past residuals out of the provided history.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Minimum-norm least squares via SVD; rank-deficient designs (constant
/// or collinear columns) get the smallest-coefficient exact solution.
pub(crate) fn lstsq(x: &Array2<f64>, y: &[f64]) -> Result<Vec<f64>> {
    let n = x.nrows();
    let p = x.ncols();
    if y.len() != n {
        return Err(Error::Data(format!(
            "design has {n} rows but target has {}",
            y.len()
        )));
    }
    let m = nalgebra::DMatrix::from_fn(n, p, |i, j| x[[i, j]]);
    let b = nalgebra::DVector::from_column_slice(y);
    let svd = m.svd(true, true);
    let cutoff = svd
        .singular_values
        .iter()
        .cloned()
        .fold(0.0f64, f64::max)
        * 1e-10;
    let sol = svd
        .solve(&b, cutoff.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numeric(format!("least squares failed: {e}")))?;
    Ok(sol.iter().copied().collect())
}

/// Fitted ARMA(p, q) with intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaModel {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
}

/// Fitted ARMAX(p, q) with `p + 1` exogenous coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmaxModel {
    pub ar: Vec<f64>,
    /// Coefficients on `x[t], x[t-1], .., x[t-p]`.
    pub exog: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
}

/// Long-AR order for the residual-proxy stage, capped by series length.
fn stage_one_order(n: usize, p: usize, q: usize) -> usize {
    let ideal = p.max(q) + 5;
    let cap = n.saturating_sub(1) / 3;
    ideal.min(cap)
}

/// Spectral radius of the residual recursion `e_t = -theta_1 e_{t-1} -
/// ... - theta_q e_{t-q} + ...`, via the companion matrix.
fn ma_recursion_radius(ma: &[f64]) -> f64 {
    let q = ma.len();
    if q == 0 {
        return 0.0;
    }
    let mut companion = nalgebra::DMatrix::zeros(q, q);
    for (i, th) in ma.iter().enumerate() {
        companion[(0, i)] = -th;
    }
    for i in 1..q {
        companion[(i, i - 1)] = 1.0;
    }
    companion
        .complex_eigenvalues()
        .iter()
        .map(|e| e.norm())
        .fold(0.0, f64::max)
}

/// Least squares can return a non-invertible moving-average estimate
/// (typical when the series holds a sharp spike), which makes the
/// residual filter diverge. Shrink the coefficients lag-wise so every
/// recursion root moves strictly inside the unit circle; this rescales
/// the roots and preserves their configuration.
pub(crate) fn clamp_ma_invertible(ma: &mut [f64]) {
    const TARGET: f64 = 0.97;
    let radius = ma_recursion_radius(ma);
    if radius > TARGET {
        let c = TARGET / radius;
        let mut factor = 1.0;
        for th in ma.iter_mut() {
            factor *= c;
            *th *= factor;
        }
    }
}

struct LinearFit {
    ar: Vec<f64>,
    exog: Vec<f64>,
    ma: Vec<f64>,
    intercept: f64,
    residual_variance: f64,
}

/// Shared two-stage fit. `external` adds exogenous regressors
/// `x[t], .., x[t-p]`.
fn fit_linear(
    series: &[f64],
    external: Option<&[f64]>,
    p: usize,
    q: usize,
) -> Result<LinearFit> {
    let n = series.len();
    if p == 0 {
        return Err(Error::Config("autoregressive order p must be >= 1".into()));
    }
    if let Some(ext) = external {
        if ext.len() < n {
            return Err(Error::Data(format!(
                "external series shorter than case counts ({} < {n})",
                ext.len()
            )));
        }
    }
    let n_exog = if external.is_some() { p + 1 } else { 0 };

    // Residual proxies from a long autoregression (with the same
    // exogenous terms, so a zero external series reduces exactly to the
    // plain ARMA fit).
    let residuals: Vec<f64> = if q > 0 {
        let m = stage_one_order(n, p, q);
        if m < p.max(q) + 1 || n < m + q + p + q + n_exog + 2 {
            return Err(Error::Data(format!(
                "series too short for ARMA/ARMAX({p},{q}): {n} points"
            )));
        }
        let rows = n - m;
        let mut x = Array2::zeros((rows, m + n_exog + 1));
        let mut y = Vec::with_capacity(rows);
        for (row, t) in (m..n).enumerate() {
            for i in 1..=m {
                x[[row, i - 1]] = series[t - i];
            }
            if let Some(ext) = external {
                for i in 0..=p {
                    x[[row, m + i]] = ext[t - i];
                }
            }
            x[[row, m + n_exog]] = 1.0;
            y.push(series[t]);
        }
        let coef = lstsq(&x, &y)?;
        let mut eps = vec![0.0; n];
        for (row, t) in (m..n).enumerate() {
            let mut pred = 0.0;
            for j in 0..x.ncols() {
                pred += coef[j] * x[[row, j]];
            }
            eps[t] = series[t] - pred;
        }
        eps
    } else {
        vec![0.0; n]
    };

    // Joint regression on AR lags, exogenous terms, and residual lags.
    let start = if q > 0 { stage_one_order(n, p, q) + q } else { p };
    if n <= start || n - start < p + q + n_exog + 2 {
        return Err(Error::Data(format!(
            "series too short for ARMA/ARMAX({p},{q}): {n} points"
        )));
    }
    let rows = n - start;
    let n_cols = p + n_exog + q + 1;
    let mut x = Array2::zeros((rows, n_cols));
    let mut y = Vec::with_capacity(rows);
    for (row, t) in (start..n).enumerate() {
        for i in 1..=p {
            x[[row, i - 1]] = series[t - i];
        }
        if let Some(ext) = external {
            for i in 0..=p {
                x[[row, p + i]] = ext[t - i];
            }
        }
        for i in 1..=q {
            x[[row, p + n_exog + i - 1]] = residuals[t - i];
        }
        x[[row, n_cols - 1]] = 1.0;
        y.push(series[t]);
    }
    let coef = lstsq(&x, &y)?;

    let mut sse = 0.0;
    for (row, t) in (start..n).enumerate() {
        let mut pred = 0.0;
        for j in 0..n_cols {
            pred += coef[j] * x[[row, j]];
        }
        sse += (series[t] - pred).powi(2);
    }

    let mut ma = coef[p + n_exog..p + n_exog + q].to_vec();
    clamp_ma_invertible(&mut ma);
    Ok(LinearFit {
        ar: coef[..p].to_vec(),
        exog: coef[p..p + n_exog].to_vec(),
        ma,
        intercept: coef[n_cols - 1],
        residual_variance: sse / rows as f64,
    })
}

/// Filter model residuals over the history, then evaluate the recursion
/// at `t = history.len()` with the future noise term set to zero.
fn forecast_linear(
    ar: &[f64],
    exog: &[f64],
    ma: &[f64],
    intercept: f64,
    history: &[f64],
    external: Option<&[f64]>,
    t: usize,
) -> Result<f64> {
    let p = ar.len();
    if t != history.len() {
        return Err(Error::Data(format!(
            "forecast target {t} must be one past the history (len {})",
            history.len()
        )));
    }
    if t < p {
        return Err(Error::InsufficientHistory { earliest_feasible: p, available: t });
    }
    if !exog.is_empty() {
        let ext = external.ok_or_else(|| {
            Error::Data("exogenous model requires an external series".into())
        })?;
        if ext.len() <= t {
            return Err(Error::Data(format!(
                "external series too short: need index {t}, have {}",
                ext.len()
            )));
        }
    }

    let predict = |idx: usize, eps: &[f64]| -> f64 {
        let mut v = intercept;
        for (i, g) in ar.iter().enumerate() {
            v += g * history.get(idx - 1 - i).copied().unwrap_or(0.0);
        }
        if let Some(ext) = external {
            for (i, e) in exog.iter().enumerate() {
                v += e * ext[idx - i];
            }
        }
        for (i, th) in ma.iter().enumerate() {
            if idx >= i + 1 {
                v += th * eps.get(idx - 1 - i).copied().unwrap_or(0.0);
            }
        }
        v
    };

    let mut eps = vec![0.0; t];
    for idx in p..t {
        eps[idx] = history[idx] - predict(idx, &eps);
    }
    Ok(predict(t, &eps))
}

/// Fit an ARMA(p, q) baseline over past case counts.
pub fn arma_fit(series: &[f64], p: usize, q: usize) -> Result<ArmaModel> {
    let fit = fit_linear(series, None, p, q)?;
    Ok(ArmaModel {
        ar: fit.ar,
        ma: fit.ma,
        intercept: fit.intercept,
        residual_variance: fit.residual_variance,
    })
}

/// One-step forecast at `t = history.len()`.
pub fn arma_forecast(model: &ArmaModel, history: &[f64], t: usize) -> Result<f64> {
    forecast_linear(&model.ar, &[], &model.ma, model.intercept, history, None, t)
}

/// Fit an ARMAX(p, q) with the external series as exogenous input.
pub fn armax_fit(series: &[f64], external: &[f64], p: usize, q: usize) -> Result<ArmaxModel> {
    let fit = fit_linear(series, Some(external), p, q)?;
    Ok(ArmaxModel {
        ar: fit.ar,
        exog: fit.exog,
        ma: fit.ma,
        intercept: fit.intercept,
        residual_variance: fit.residual_variance,
    })
}

/// One-step forecast at `t = history.len()`; the external series must
/// cover index `t` (same-period news is available).
pub fn armax_forecast(
    model: &ArmaxModel,
    history: &[f64],
    external: &[f64],
    t: usize,
) -> Result<f64> {
    forecast_linear(
        &model.ar,
        &model.exog,
        &model.ma,
        model.intercept,
        history,
        Some(external),
        t,
    )
}
