//! One-step-ahead case-count estimators.
//!
//! The primary estimator (ARNet) is an Elastic-Net-regularized
//! autoregression over past case counts plus rolling-transformed external
//! news trends, with a shift indicator aligning news incidence against
//! case incidence. ARMA and ARMAX serve as baselines.

mod arma;
mod design;
mod elastic_net;

pub use arma::{arma_fit, arma_forecast, armax_fit, armax_forecast, ArmaModel, ArmaxModel};
pub use design::{build_design, rolling_transform};
pub use elastic_net::{elastic_net_fit, soft_threshold, ElasticNetFit};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::exec::{map_indexed, Jobs};
use crate::Result;

/// ARNet shape and regularization parameters.
///
/// `s <= 0` in estimation mode: a positive shift would index news trends
/// past the estimation horizon, which only exists in retrospective
/// analysis (see [`ArnetConfig::validate_retrospective`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArnetConfig {
    /// Autoregressive order over case counts.
    pub p: usize,
    /// Number of external lags.
    pub q: usize,
    /// Rolling-transform window.
    pub r: usize,
    /// Shift applied to external indices (negative = leading trend).
    pub s: i64,
    /// L1 penalty.
    pub lambda1: f64,
    /// L2 penalty.
    pub lambda2: f64,
}

impl ArnetConfig {
    pub fn validate(&self) -> Result<()> {
        self.validate_shape()?;
        if self.s > 0 {
            return Err(Error::Config(format!(
                "shift s = {} indexes trends beyond the estimation horizon; \
                 positive shifts are retrospective-only",
                self.s
            )));
        }
        Ok(())
    }

    /// Like [`validate`](Self::validate) but permits `s > 0` for
    /// after-the-fact analysis of lagging news trends.
    pub fn validate_retrospective(&self) -> Result<()> {
        self.validate_shape()
    }

    fn validate_shape(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Config("p must be >= 1".into()));
        }
        if self.r == 0 {
            return Err(Error::Config("r must be >= 1".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::Config("penalties must be non-negative".into()));
        }
        Ok(())
    }
}

/// Fitted ARNet coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArnetModel {
    /// Internal (case-count lag) coefficients, length `p`.
    pub gamma: Vec<f64>,
    /// External (trend) coefficients, length `q`.
    pub eta: Vec<f64>,
    pub intercept: f64,
    pub residual_variance: f64,
    pub config: ArnetConfig,
}

impl ArnetModel {
    /// Unclamped linear predictor at horizon `t`: exactly linear in the
    /// features, so doubling every input doubles `predictor - intercept`.
    pub fn linear_predictor(&self, case_counts: &[f64], external: &[f64], t: usize) -> Result<f64> {
        let c = &self.config;
        if t < c.p || case_counts.len() < t {
            return Err(Error::InsufficientHistory {
                earliest_feasible: design::earliest_target(c),
                available: case_counts.len().saturating_sub(1),
            });
        }
        let mut value = self.intercept;
        for i in 1..=c.p {
            value += self.gamma[i - 1] * case_counts[t - i];
        }
        for j in 1..=c.q {
            let idx = t as i64 - j as i64 + 1 + c.s;
            if idx < 0 || idx as usize >= external.len() {
                return Err(Error::Data(format!(
                    "external index {idx} out of range at horizon {t}"
                )));
            }
            value += self.eta[j - 1] * rolling_transform(external, c.r, idx as usize)?;
        }
        Ok(value)
    }

    /// One-step estimate at horizon `t`, clamped to zero: case counts are
    /// non-negative.
    pub fn estimate(&self, case_counts: &[f64], external: &[f64], t: usize) -> Result<f64> {
        Ok(self.linear_predictor(case_counts, external, t)?.max(0.0))
    }
}

/// Fit ARNet on counts up to the end of `case_counts`.
pub fn arnet_fit(
    case_counts: &[f64],
    external: &[f64],
    config: &ArnetConfig,
) -> Result<ArnetModel> {
    config.validate_retrospective()?;
    let (x, y) = build_design(case_counts, external, config)?;
    let fit = elastic_net_fit(&x, &y, config.lambda1, config.lambda2)?;
    let mut sse = 0.0;
    for (row, target) in y.iter().enumerate() {
        let mut pred = fit.intercept;
        for (j, c) in fit.coefficients.iter().enumerate() {
            pred += c * x[[row, j]];
        }
        sse += (target - pred).powi(2);
    }
    Ok(ArnetModel {
        gamma: fit.coefficients[..config.p].to_vec(),
        eta: fit.coefficients[config.p..].to_vec(),
        intercept: fit.intercept,
        residual_variance: sse / y.len() as f64,
        config: *config,
    })
}

/// Free-function form of [`ArnetModel::estimate`].
pub fn arnet_estimate(
    model: &ArnetModel,
    case_counts: &[f64],
    external: &[f64],
    t: usize,
) -> Result<f64> {
    model.estimate(case_counts, external, t)
}

/// Candidate values per ARNet parameter for cross-validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvGrids {
    pub p: Vec<usize>,
    pub q: Vec<usize>,
    pub r: Vec<usize>,
    pub s: Vec<i64>,
    pub lambda1: Vec<f64>,
    pub lambda2: Vec<f64>,
}

impl Default for CvGrids {
    fn default() -> Self {
        Self {
            p: vec![1, 2, 3, 4],
            q: vec![1, 2, 3],
            r: vec![1, 2, 3, 4],
            s: vec![-3, -2, -1, 0],
            lambda1: vec![0.0, 0.01, 0.1, 1.0],
            lambda2: vec![0.0, 0.01, 0.1, 1.0],
        }
    }
}

impl CvGrids {
    fn configs(&self) -> Vec<ArnetConfig> {
        let mut out = Vec::new();
        for &p in &self.p {
            for &q in &self.q {
                for &r in &self.r {
                    for &s in &self.s {
                        for &lambda1 in &self.lambda1 {
                            for &lambda2 in &self.lambda2 {
                                out.push(ArnetConfig { p, q, r, s, lambda1, lambda2 });
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Total order used to pick a winner: mean squared error first, then a
/// simplicity cascade so equal-error configs resolve identically whatever
/// the evaluation order.
fn rank_key(mse: f64, c: &ArnetConfig) -> [f64; 10] {
    [
        mse,
        (c.p + c.q) as f64,
        c.r as f64,
        c.s.unsigned_abs() as f64,
        c.lambda1 + c.lambda2,
        c.p as f64,
        c.q as f64,
        c.s as f64,
        c.lambda1,
        c.lambda2,
    ]
}

/// Expanding-window selection of an ARNet configuration on the training
/// series: the last `max(4, ceil(20% * len))` points are held out one at
/// a time, the model is refit on everything before each held-out point,
/// and configurations are ranked by mean squared one-step error.
pub fn cross_validate(
    case_counts: &[f64],
    external: &[f64],
    grids: &CvGrids,
    jobs: Jobs,
) -> Result<ArnetConfig> {
    let len = case_counts.len();
    let holdout = 4.max((len as f64 * 0.2).ceil() as usize);
    if len <= holdout + 1 {
        return Err(Error::Data(format!(
            "training series too short for cross-validation: {len} points, {holdout} held out"
        )));
    }
    let configs = grids.configs();
    if configs.is_empty() {
        return Err(Error::Config("cross-validation grid is empty".into()));
    }
    if configs.iter().any(|c| c.q > 0) && external.len() < len {
        return Err(Error::Data(format!(
            "external series must cover the training window: {} < {len}",
            external.len()
        )));
    }
    for c in &configs {
        c.validate()?;
    }

    let folds: Vec<usize> = (len - holdout..len).collect();
    let scores: Vec<Option<(f64, f64)>> = map_indexed(configs.len(), jobs, |ci| {
        let config = &configs[ci];
        let mut errors = Vec::with_capacity(folds.len());
        for &t in &folds {
            let train = &case_counts[..t];
            let ext = &external[..external.len().min(t + 1)];
            let model = match arnet_fit(train, ext, config) {
                Ok(m) => m,
                Err(_) => return None,
            };
            match model.estimate(train, ext, t) {
                Ok(est) => errors.push((est - case_counts[t]).powi(2)),
                Err(_) => return None,
            }
        }
        let h = errors.len() as f64;
        let mse = errors.iter().sum::<f64>() / h;
        let var = errors.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / h;
        // standard error of the mean squared error across folds
        Some((mse, (var / h).sqrt()))
    });

    let mut best: Option<([f64; 10], f64, ArnetConfig)> = None;
    for (ci, score) in scores.iter().enumerate() {
        if let Some((mse, se)) = score {
            let key = rank_key(*mse, &configs[ci]);
            if best.as_ref().is_none_or(|(k, _, _)| key < *k) {
                best = Some((key, *se, configs[ci]));
            }
        }
    }
    // Configurations within one standard error of the winner count as
    // tied; the simplicity cascade decides among them.
    if let Some((best_key, best_se, _)) = &best {
        let threshold = best_key[0] + best_se;
        let mut tied: Option<([f64; 10], ArnetConfig)> = None;
        for (ci, score) in scores.iter().enumerate() {
            if let Some((mse, _)) = score {
                if *mse <= threshold {
                    let mut key = rank_key(*mse, &configs[ci]);
                    key[0] = 0.0; // rank tied configs by simplicity alone
                    if tied.as_ref().is_none_or(|(k, _)| key < *k) {
                        tied = Some((key, configs[ci]));
                    }
                }
            }
        }
        if let Some((_, c)) = tied {
            return Ok(c);
        }
    }
    best.map(|(_, _, c)| c).ok_or_else(|| {
        let min_len = configs
            .iter()
            .map(|c| design::earliest_target(c) + 1 + holdout)
            .min()
            .unwrap();
        Error::Data(format!(
            "no feasible configuration: training series has {len} points but \
             the smallest grid entry needs at least {min_len}"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, StandardNormal};

    fn cfg(p: usize, q: usize, r: usize, s: i64, l1: f64, l2: f64) -> ArnetConfig {
        ArnetConfig { p, q, r, s, lambda1: l1, lambda2: l2 }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(1, 1, 1, 0, 0.0, 0.0).validate().is_ok());
        assert!(cfg(0, 1, 1, 0, 0.0, 0.0).validate().is_err());
        assert!(cfg(1, 1, 0, 0, 0.0, 0.0).validate().is_err());
        assert!(cfg(1, 1, 1, 2, 0.0, 0.0).validate().is_err());
        assert!(cfg(1, 1, 1, 2, 0.0, 0.0).validate_retrospective().is_ok());
        assert!(cfg(1, 1, 1, 0, -0.1, 0.0).validate().is_err());
    }

    #[test]
    fn noise_free_ar1_recovery() {
        let mut counts = vec![100.0];
        for _ in 0..20 {
            counts.push(0.5 * counts.last().unwrap());
        }
        let zeros = vec![0.0; counts.len() + 1];
        let model = arnet_fit(&counts, &zeros, &cfg(1, 1, 1, 0, 0.0, 0.0)).unwrap();
        assert!((model.gamma[0] - 0.5).abs() < 1e-6, "gamma = {:?}", model.gamma);
        assert!(model.eta[0].abs() < 1e-8, "eta = {:?}", model.eta);
        assert!(model.intercept.abs() < 1e-6);
    }

    #[test]
    fn q_zero_is_a_pure_penalized_ar() {
        let counts: Vec<f64> = (1..30).map(|i| i as f64).collect();
        let model = arnet_fit(&counts, &[], &cfg(2, 0, 1, 0, 0.01, 0.01)).unwrap();
        assert_eq!(model.gamma.len(), 2);
        assert!(model.eta.is_empty());
    }

    #[test]
    fn fit_beats_the_zero_model_in_sample() {
        let mut rng = rng_from_seed(14);
        let mut counts = vec![10.0, 12.0];
        for _ in 0..40 {
            let prev = *counts.last().unwrap();
            let e: f64 = StandardNormal.sample(&mut rng);
            counts.push(4.0 + 0.6 * prev + e);
        }
        let model = arnet_fit(&counts, &[], &cfg(1, 0, 1, 0, 0.0, 0.0)).unwrap();
        let sse_model: f64 = (1..counts.len())
            .map(|t| {
                let est = model.linear_predictor(&counts, &[], t).unwrap();
                (counts[t] - est).powi(2)
            })
            .sum();
        let sse_zero: f64 = counts[1..].iter().map(|v| v * v).sum();
        assert!(sse_model < sse_zero);
    }

    #[test]
    fn intercept_only_model_estimates_the_intercept() {
        let model = ArnetModel {
            gamma: vec![0.0],
            eta: vec![],
            intercept: 7.5,
            residual_variance: 0.0,
            config: cfg(1, 0, 1, 0, 0.0, 0.0),
        };
        let est = model.estimate(&[3.0, 4.0], &[], 2).unwrap();
        assert_eq!(est, 7.5);
    }

    #[test]
    fn hand_substitution_matches() {
        let model = ArnetModel {
            gamma: vec![0.5],
            eta: vec![2.0],
            intercept: 0.0,
            residual_variance: 0.0,
            config: cfg(1, 1, 1, 0, 0.0, 0.0),
        };
        // S[T-1] = 10, xi[T] = 0.4, xi[T-1] = 0.1:
        // 0.5 * 10 + 2 * (0.4 - 0.1) = 5.6
        let est = model.estimate(&[10.0], &[0.1, 0.4], 1).unwrap();
        assert!((est - 5.6).abs() < 1e-12, "{est}");
    }

    #[test]
    fn negative_prediction_clamps_to_zero() {
        let model = ArnetModel {
            gamma: vec![-1.0],
            eta: vec![],
            intercept: 0.0,
            residual_variance: 0.0,
            config: cfg(1, 0, 1, 0, 0.0, 0.0),
        };
        assert!(model.linear_predictor(&[3.0], &[], 1).unwrap() < 0.0);
        assert_eq!(model.estimate(&[3.0], &[], 1).unwrap(), 0.0);
    }

    #[test]
    fn predictor_is_linear_in_inputs() {
        let model = ArnetModel {
            gamma: vec![0.4, -0.2],
            eta: vec![1.5],
            intercept: 3.0,
            residual_variance: 0.0,
            config: cfg(2, 1, 1, 0, 0.0, 0.0),
        };
        let counts = [5.0, 8.0, 6.0];
        let ext = [0.1, 0.25, 0.4, 0.2];
        let doubled_counts: Vec<f64> = counts.iter().map(|v| v * 2.0).collect();
        let doubled_ext: Vec<f64> = ext.iter().map(|v| v * 2.0).collect();
        let base = model.linear_predictor(&counts, &ext, 3).unwrap();
        let double = model.linear_predictor(&doubled_counts, &doubled_ext, 3).unwrap();
        assert!(((double - model.intercept) - 2.0 * (base - model.intercept)).abs() < 1e-12);
    }

    #[test]
    fn single_config_grid_returns_it() {
        let counts: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).sin() + 2.0).collect();
        let ext = vec![0.5; 31];
        let grids = CvGrids {
            p: vec![2],
            q: vec![1],
            r: vec![1],
            s: vec![0],
            lambda1: vec![0.1],
            lambda2: vec![0.0],
        };
        let chosen = cross_validate(&counts, &ext, &grids, 1).unwrap();
        assert_eq!(chosen, cfg(2, 1, 1, 0, 0.1, 0.0));
    }

    #[test]
    fn infeasible_grid_reports_required_length() {
        let counts = vec![1.0; 8];
        let ext = vec![0.1; 9];
        let grids = CvGrids {
            p: vec![4],
            q: vec![3],
            r: vec![4],
            s: vec![-3],
            lambda1: vec![0.0],
            lambda2: vec![0.0],
        };
        let err = cross_validate(&counts, &ext, &grids, 1).unwrap_err();
        assert!(err.to_string().contains("at least"), "{err}");
    }

    #[test]
    fn cross_validation_prefers_the_true_ar_order() {
        // AR(2) data; p = 2 should win in at least 80% of noise seeds.
        let grids = CvGrids {
            p: vec![1, 2, 3, 4],
            q: vec![1],
            r: vec![1],
            s: vec![0],
            lambda1: vec![0.0],
            lambda2: vec![0.0],
        };
        let mut wins = 0;
        for seed in 0..20 {
            let mut rng = rng_from_seed(1000 + seed);
            let mut counts = vec![20.0, 22.0];
            for _ in 0..138 {
                let a = counts[counts.len() - 1];
                let b = counts[counts.len() - 2];
                let e: f64 = StandardNormal.sample(&mut rng);
                counts.push(5.0 + 1.4 * a - 0.8 * b + e);
            }
            let ext = vec![0.0; counts.len() + 1];
            let chosen = cross_validate(&counts, &ext, &grids, 1).unwrap();
            if chosen.p == 2 {
                wins += 1;
            }
        }
        assert!(wins >= 16, "p=2 selected only {wins}/20 times");
    }

    #[test]
    fn cross_validation_is_job_count_invariant() {
        let counts: Vec<f64> = (0..40)
            .map(|i| 10.0 + (i as f64 * 0.5).sin() * 3.0 + (i % 3) as f64)
            .collect();
        let ext: Vec<f64> = (0..41).map(|i| (i as f64 * 0.5).cos() * 0.1 + 0.2).collect();
        let grids = CvGrids {
            p: vec![1, 2],
            q: vec![1, 2],
            r: vec![1, 2],
            s: vec![-1, 0],
            lambda1: vec![0.0, 0.1],
            lambda2: vec![0.0],
        };
        let seq = cross_validate(&counts, &ext, &grids, 1).unwrap();
        let par = cross_validate(&counts, &ext, &grids, 0).unwrap();
        assert_eq!(seq, par);
    }

    #[test]
    fn arnet_model_serializes() {
        let model = ArnetModel {
            gamma: vec![0.5],
            eta: vec![1.0, -0.5],
            intercept: 2.0,
            residual_variance: 1.1,
            config: cfg(1, 2, 2, -1, 0.1, 0.01),
        };
        let json = serde_json::to_string(&model).unwrap();
        let back: ArnetModel = serde_json::from_str(&json).unwrap();
        assert_eq!(model, back);
    }
}
