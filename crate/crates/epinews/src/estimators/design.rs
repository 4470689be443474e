//! Regression design for the ARNet estimator.
//!
//! A target row at time `t` has features
//! `[S[t-1] .. S[t-p], g_r(x[t+s]), g_r(x[t-1+s]) .. g_r(x[t-q+1+s])]`
//! where `S` is the case-count series, `x` the external trend, `g_r` the
//! rolling transform, `s` the shift, and the target is `S[t]`. External
//! indices may reach `t` itself (same-period news is available even when
//! the count at `t` is not).

use ndarray::Array2;

use crate::error::Error;
use crate::Result;

use super::ArnetConfig;

/// Change in value over a window: `series[t] - series[t - r]`.
pub fn rolling_transform(series: &[f64], r: usize, t: usize) -> Result<f64> {
    if t >= series.len() {
        return Err(Error::Data(format!(
            "rolling transform index {t} out of range (len {})",
            series.len()
        )));
    }
    if t < r {
        return Err(Error::Data(format!(
            "rolling transform window underflow: t = {t}, window = {r}"
        )));
    }
    Ok(series[t] - series[t - r])
}

/// Smallest target index with full lag coverage for `config`.
pub(crate) fn earliest_target(config: &ArnetConfig) -> usize {
    let from_internal = config.p as i64;
    let from_external = if config.q == 0 {
        0
    } else {
        // index t - q + 1 + s must reach back r more steps
        config.q as i64 - 1 - config.s + config.r as i64
    };
    from_internal.max(from_external).max(0) as usize
}

/// Build the feature matrix and target vector over every usable target
/// `t <= len(case_counts) - 1`.
pub fn build_design(
    case_counts: &[f64],
    external: &[f64],
    config: &ArnetConfig,
) -> Result<(Array2<f64>, Vec<f64>)> {
    if case_counts.is_empty() {
        return Err(Error::Data("case-count series is empty".into()));
    }
    let t_last = case_counts.len() - 1;
    let t_min = earliest_target(config);
    if t_min > t_last {
        return Err(Error::InsufficientHistory {
            earliest_feasible: t_min,
            available: t_last,
        });
    }
    if config.q > 0 {
        let needed = t_last as i64 + config.s;
        if needed >= external.len() as i64 {
            return Err(Error::Data(format!(
                "external series too short: need index {needed}, have {}",
                external.len()
            )));
        }
    }

    let n_rows = t_last - t_min + 1;
    let n_cols = config.p + config.q;
    let mut x = Array2::zeros((n_rows, n_cols));
    let mut y = Vec::with_capacity(n_rows);
    for (row, t) in (t_min..=t_last).enumerate() {
        for i in 1..=config.p {
            x[[row, i - 1]] = case_counts[t - i];
        }
        for j in 1..=config.q {
            let idx = (t as i64 - j as i64 + 1 + config.s) as usize;
            x[[row, config.p + j - 1]] = rolling_transform(external, config.r, idx)?;
        }
        y.push(case_counts[t]);
    }
    Ok((x, y))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(p: usize, q: usize, r: usize, s: i64) -> ArnetConfig {
        ArnetConfig { p, q, r, s, lambda1: 0.0, lambda2: 0.0 }
    }

    #[test]
    fn rolling_transform_of_constant_series_is_zero() {
        let series = [3.5; 6];
        for r in 1..4 {
            assert_eq!(rolling_transform(&series, r, 5).unwrap(), 0.0);
        }
    }

    #[test]
    fn rolling_transform_hand_value() {
        assert_eq!(rolling_transform(&[1.0, 3.0, 6.0], 2, 2).unwrap(), 5.0);
    }

    #[test]
    fn window_one_is_first_difference() {
        let series = [2.0, 5.0, 4.0, 9.0];
        for t in 1..series.len() {
            assert_eq!(
                rolling_transform(&series, 1, t).unwrap(),
                series[t] - series[t - 1]
            );
        }
    }

    #[test]
    fn rolling_transform_underflow_is_an_error() {
        assert!(rolling_transform(&[1.0, 2.0], 2, 1).is_err());
        assert!(rolling_transform(&[1.0, 2.0], 1, 5).is_err());
    }

    #[test]
    fn pure_ar_design_uses_lagged_counts_only() {
        let s = [1.0, 2.0, 3.0, 4.0];
        let (x, y) = build_design(&s, &[], &config(1, 0, 1, 0)).unwrap();
        assert_eq!(x.nrows(), 3);
        assert_eq!(x.ncols(), 1);
        assert_eq!(x.column(0).to_vec(), vec![1.0, 2.0, 3.0]);
        assert_eq!(y, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn hand_built_row_matches() {
        let s = [2.0, 4.0, 8.0];
        let xi = [0.1, 0.3, 0.6];
        let (x, y) = build_design(&s, &xi, &config(1, 1, 1, 0)).unwrap();
        // target t = 2 is the last row: features [S[1], g_1(xi[2])]
        let last = x.nrows() - 1;
        assert_eq!(x[[last, 0]], 4.0);
        assert!((x[[last, 1]] - 0.3).abs() < 1e-15);
        assert_eq!(y[last], 8.0);
    }

    #[test]
    fn negative_shift_moves_external_back() {
        let s = [1.0, 1.0, 1.0, 1.0, 1.0];
        let xi = [0.0, 1.0, 3.0, 6.0, 10.0];
        let c0 = config(1, 1, 1, 0);
        let cm1 = config(1, 1, 1, -1);
        let (x0, _) = build_design(&s, &xi, &c0).unwrap();
        let (xm1, _) = build_design(&s, &xi, &cm1).unwrap();
        // with s = -1 the external feature at target t equals the s = 0
        // feature at target t - 1
        let last0 = x0.nrows() - 1;
        let last1 = xm1.nrows() - 1;
        assert_eq!(xm1[[last1, 1]], x0[[last0 - 1, 1]]);
    }

    #[test]
    fn infeasible_history_names_earliest_target() {
        let s = [1.0, 2.0];
        let xi = [0.1, 0.2];
        let err = build_design(&s, &xi, &config(1, 2, 3, -2)).unwrap_err();
        match err {
            Error::InsufficientHistory { earliest_feasible, available } => {
                // q - 1 - s + r = 2 - 1 + 2 + 3 = 6
                assert_eq!(earliest_feasible, 6);
                assert_eq!(available, 1);
            }
            other => panic!("unexpected error {other}"),
        }
    }
}
