//! Rolling-origin evaluation of one-step-ahead estimators.
//!
//! For every horizon `T` in the evaluation range: re-run topic inference
//! on the corpus truncated to `t <= T`, turn the chosen topic's temporal
//! trend into an external series (raw or multinomial-sampled to count
//! scale), fit the plan's estimator on case counts up to `T - 1`, and
//! emit the estimate for `T`. Scores are NRMSE over the range.
//!
//! Estimator shape parameters are selected once on the static training
//! window and reused across horizons; coefficients are refit at every
//! horizon. The estimate at horizon `T` depends only on corpus records
//! with `t <= T`, case counts with `t <= T - 1`, and derived seeds, so
//! perturbing anything later leaves it bit-identical.
//!
//! Horizons are independent given their derived seeds and may run
//! concurrently; results are reduced in horizon order.

use std::collections::HashMap;
use std::io::Write as _;
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{CaseCountSeries, SeedSpec, TupleCorpus};
use crate::error::Error;
use crate::estimators::{
    arma_fit, arma_forecast, armax_fit, armax_forecast, arnet_fit, cross_validate, ArnetConfig,
    CvGrids,
};
use crate::exec::{map_indexed, Jobs};
use crate::rng::{derive_seed, STREAM_INFERENCE, STREAM_SAMPLING};
use crate::topic_model::{run_inference, Hyperparameters, TopicPosterior};
use crate::trend_sampling::{cumulative_total, sample_counts};
use crate::Result;

/// Estimation method under evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// ARMA over past case counts only.
    ArmaBaseline,
    /// ARMAX with raw temporal topic trends as exogenous input.
    ArmaxTrends,
    /// ARMAX with multinomial-sampled counts as exogenous input.
    ArmaxSamples,
    /// ARNet with raw temporal topic trends.
    ArnetTrends,
    /// ARNet with multinomial-sampled counts.
    ArnetSamples,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::ArmaBaseline,
        Method::ArmaxTrends,
        Method::ArmaxSamples,
        Method::ArnetTrends,
        Method::ArnetSamples,
    ];

    pub fn uses_topics(&self) -> bool {
        !matches!(self, Method::ArmaBaseline)
    }

    fn uses_samples(&self) -> bool {
        matches!(self, Method::ArmaxSamples | Method::ArnetSamples)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Method::ArmaBaseline => "arma",
            Method::ArmaxTrends => "armax-trends",
            Method::ArmaxSamples => "armax-samples",
            Method::ArnetTrends => "arnet-trends",
            Method::ArnetSamples => "arnet-samples",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arma" => Ok(Method::ArmaBaseline),
            "armax-trends" => Ok(Method::ArmaxTrends),
            "armax-samples" => Ok(Method::ArmaxSamples),
            "arnet-trends" => Ok(Method::ArnetTrends),
            "arnet-samples" => Ok(Method::ArnetSamples),
            other => Err(Error::Config(format!(
                "unknown method {other:?} (expected arma, armax-trends, armax-samples, \
                 arnet-trends, or arnet-samples)"
            ))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// RMSE normalizer. The spread of the actual series is the default; the
/// mean is exposed as an alternative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normalizer {
    Range,
    Mean,
}

/// Normalized root-mean-square error with the range normalizer.
pub fn nrmse(actual: &[f64], estimated: &[f64]) -> Result<f64> {
    nrmse_with(actual, estimated, Normalizer::Range)
}

pub fn nrmse_with(actual: &[f64], estimated: &[f64], normalizer: Normalizer) -> Result<f64> {
    if actual.is_empty() || actual.len() != estimated.len() {
        return Err(Error::Data(format!(
            "series lengths differ or are empty: {} vs {}",
            actual.len(),
            estimated.len()
        )));
    }
    let mse = actual
        .iter()
        .zip(estimated)
        .map(|(a, e)| (a - e).powi(2))
        .sum::<f64>()
        / actual.len() as f64;
    let denom = match normalizer {
        Normalizer::Range => {
            let max = actual.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let min = actual.iter().cloned().fold(f64::INFINITY, f64::min);
            max - min
        }
        Normalizer::Mean => actual.iter().sum::<f64>() / actual.len() as f64,
    };
    if denom <= 0.0 {
        return Err(Error::Numeric(
            "NRMSE normalizer is zero (constant actual series)".into(),
        ));
    }
    Ok(mse.sqrt() / denom)
}

/// What to evaluate: the train/evaluation split, method, topic, and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPlan {
    /// Last time index of the static training period.
    pub static_training_end: usize,
    /// Inclusive evaluation range; starts right after the training period.
    pub evaluation_start: usize,
    pub evaluation_end: usize,
    pub method: Method,
    /// Topic whose temporal trend feeds the external component.
    pub topic_index: usize,
    pub base_seed: u64,
}

impl EvaluationPlan {
    pub fn validate(&self) -> Result<()> {
        if self.evaluation_start != self.static_training_end + 1 {
            return Err(Error::Config(format!(
                "evaluation must start right after training: start = {}, training end = {}",
                self.evaluation_start, self.static_training_end
            )));
        }
        if self.evaluation_end < self.evaluation_start {
            return Err(Error::Config(format!(
                "empty evaluation range [{}, {}]",
                self.evaluation_start, self.evaluation_end
            )));
        }
        Ok(())
    }
}

/// Knobs shared across an evaluation run.
#[derive(Debug, Clone)]
pub struct EvalOptions {
    /// Topic-model settings; `rng_seed` is overridden per horizon from
    /// the plan's base seed.
    pub hyper: Hyperparameters,
    /// ARNet configuration grid for the static-window cross-validation.
    pub grids: CvGrids,
    /// Candidate (p, q) orders for the ARMA/ARMAX baselines.
    pub arma_orders: Vec<(usize, usize)>,
    pub normalizer: Normalizer,
    pub jobs: Jobs,
}

impl EvalOptions {
    pub fn new(hyper: Hyperparameters) -> Self {
        let mut arma_orders = Vec::new();
        for p in 1..=4 {
            for q in 0..=2 {
                arma_orders.push((p, q));
            }
        }
        Self {
            hyper,
            grids: CvGrids::default(),
            arma_orders,
            normalizer: Normalizer::Range,
            jobs: 0,
        }
    }
}

/// Concurrent-safe memo of per-horizon posteriors, keyed by the truncated
/// corpus fingerprint and the full hyperparameter set (including the
/// derived seed). Purely a performance cache: methods sharing horizons
/// reuse one inference run.
#[derive(Debug, Default)]
pub struct PosteriorCache {
    inner: Mutex<HashMap<(u64, u64), Arc<TopicPosterior>>>,
}

impl PosteriorCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.inner.lock().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_compute(
        &self,
        key: (u64, u64),
        compute: impl FnOnce() -> Result<TopicPosterior>,
    ) -> Result<Arc<TopicPosterior>> {
        if let Some(hit) = self.inner.lock().unwrap().get(&key) {
            return Ok(Arc::clone(hit));
        }
        // Computed outside the lock; a racing duplicate is deterministic
        // and harmless.
        let value = Arc::new(compute()?);
        let mut map = self.inner.lock().unwrap();
        let entry = map.entry(key).or_insert_with(|| Arc::clone(&value));
        Ok(Arc::clone(entry))
    }
}

fn hyper_hash(hp: &Hyperparameters) -> u64 {
    use std::hash::{Hash, Hasher};
    let mut h = std::collections::hash_map::DefaultHasher::new();
    serde_json::to_string(hp).unwrap().hash(&mut h);
    h.finish()
}

fn with_horizon(t: usize, e: Error) -> Error {
    match e {
        Error::Config(m) => Error::Config(format!("horizon {t}: {m}")),
        Error::Data(m) => Error::Data(format!("horizon {t}: {m}")),
        Error::Numeric(m) => Error::Numeric(format!("horizon {t}: {m}")),
        other => other,
    }
}

/// Per-plan scores and estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub method: Method,
    pub horizons: Vec<usize>,
    pub actuals: Vec<f64>,
    pub estimates: Vec<f64>,
    pub nrmse: f64,
    /// Configuration chosen once on the static training window (ARNet).
    pub arnet_config: Option<ArnetConfig>,
    /// Orders chosen once on the static training window (ARMA/ARMAX).
    pub arma_order: Option<(usize, usize)>,
    pub base_seed: u64,
    pub wall_time_ms: u128,
}

/// External input series (trend or sampled counts) covering `0..=t_max`,
/// derived from inference on the corpus truncated at `t_max`.
fn external_series(
    corpus: &TupleCorpus,
    seeds: &SeedSpec,
    counts: &CaseCountSeries,
    plan: &EvaluationPlan,
    hyper: &Hyperparameters,
    cache: &PosteriorCache,
    t_max: usize,
) -> Result<Vec<f64>> {
    let truncated = corpus.truncate(t_max)?;
    let hp = Hyperparameters {
        rng_seed: derive_seed(plan.base_seed, STREAM_INFERENCE, t_max as u64),
        ..hyper.clone()
    };
    let key = (truncated.fingerprint(), hyper_hash(&hp));
    let posterior = cache.get_or_compute(key, || run_inference(&truncated, seeds, &hp))?;
    if plan.topic_index >= posterior.num_topics() {
        return Err(Error::Config(format!(
            "topic index {} out of range (K = {})",
            plan.topic_index,
            posterior.num_topics()
        )));
    }
    let xi = posterior.xi_row(plan.topic_index);
    if plan.method.uses_samples() {
        let total = if t_max == 0 {
            0
        } else {
            cumulative_total(counts.values(), t_max - 1)
        };
        let seed = derive_seed(plan.base_seed, STREAM_SAMPLING, t_max as u64);
        Ok(sample_counts(&xi, total, seed)?.as_f64())
    } else {
        Ok(xi)
    }
}

/// Expanding-window (p, q) selection for the baselines, mirroring the
/// ARNet cross-validation: last `max(4, 20%)` points of the training
/// window held out one at a time, mean squared one-step error, ties
/// within one standard error resolved toward smaller orders.
fn select_arma_order(
    series: &[f64],
    external: Option<&[f64]>,
    orders: &[(usize, usize)],
) -> Result<(usize, usize)> {
    let len = series.len();
    let holdout = 4.max((len as f64 * 0.2).ceil() as usize);
    if len <= holdout + 1 {
        return Err(Error::Data(format!(
            "training series too short for baseline order selection: {len} points"
        )));
    }
    let mut best: Option<(f64, f64, (usize, usize))> = None;
    let mut scored: Vec<(f64, (usize, usize))> = Vec::new();
    for &(p, q) in orders {
        let mut errors = Vec::new();
        let mut feasible = true;
        for t in len - holdout..len {
            let train = &series[..t];
            let forecast = match external {
                None => arma_fit(train, p, q).and_then(|m| arma_forecast(&m, train, t)),
                Some(ext) => {
                    let ext_t = &ext[..ext.len().min(t + 1)];
                    armax_fit(train, ext_t, p, q)
                        .and_then(|m| armax_forecast(&m, train, ext_t, t))
                }
            };
            match forecast {
                Ok(f) => errors.push((f - series[t]).powi(2)),
                Err(_) => {
                    feasible = false;
                    break;
                }
            }
        }
        if !feasible {
            continue;
        }
        let h = errors.len() as f64;
        let mse = errors.iter().sum::<f64>() / h;
        let var = errors.iter().map(|e| (e - mse).powi(2)).sum::<f64>() / h;
        let se = (var / h).sqrt();
        scored.push((mse, (p, q)));
        if best
            .as_ref()
            .is_none_or(|(m, _, o)| (mse, p + q, p) < (*m, o.0 + o.1, o.0))
        {
            best = Some((mse, se, (p, q)));
        }
    }
    let (best_mse, best_se, _) = best.ok_or_else(|| {
        Error::Data("no feasible baseline order for the training window".into())
    })?;
    let threshold = best_mse + best_se;
    let tied = scored
        .iter()
        .filter(|(mse, _)| *mse <= threshold)
        .min_by_key(|(_, (p, q))| (p + q, *p, *q))
        .map(|(_, o)| *o)
        .unwrap();
    Ok(tied)
}

/// Run the full rolling protocol for one plan.
///
/// `corpus` and `seeds` may be `None` for the ARMA baseline, which never
/// invokes the topic model.
pub fn run_evaluation(
    corpus: Option<&TupleCorpus>,
    seeds: Option<&SeedSpec>,
    counts: &CaseCountSeries,
    plan: &EvaluationPlan,
    opts: &EvalOptions,
    cache: &PosteriorCache,
) -> Result<EvaluationResult> {
    plan.validate()?;
    let started = Instant::now();
    let values = counts.values();
    if values.len() <= plan.evaluation_end {
        return Err(Error::Data(format!(
            "case counts cover {} points but the evaluation range ends at {}",
            values.len(),
            plan.evaluation_end
        )));
    }

    let topics = if plan.method.uses_topics() {
        let corpus = corpus.ok_or_else(|| {
            Error::Config(format!("method {} requires a corpus", plan.method))
        })?;
        let seeds = seeds.ok_or_else(|| {
            Error::Config(format!("method {} requires a seed spec", plan.method))
        })?;
        if corpus.time_horizon() <= plan.evaluation_end {
            return Err(Error::Data(format!(
                "corpus horizon {} does not cover the evaluation range end {}",
                corpus.time_horizon(),
                plan.evaluation_end
            )));
        }
        Some((corpus, seeds))
    } else {
        None
    };

    // Shape selection, once, on the static training window.
    let t_train = plan.static_training_end;
    let train = &values[..=t_train];
    let mut arnet_config = None;
    let mut arma_order = None;
    match plan.method {
        Method::ArmaBaseline => {
            arma_order = Some(select_arma_order(train, None, &opts.arma_orders)?);
        }
        Method::ArmaxTrends | Method::ArmaxSamples => {
            let (corpus, seeds) = topics.unwrap();
            let ext = external_series(corpus, seeds, counts, plan, &opts.hyper, cache, t_train)?;
            arma_order = Some(select_arma_order(train, Some(&ext), &opts.arma_orders)?);
        }
        Method::ArnetTrends | Method::ArnetSamples => {
            let (corpus, seeds) = topics.unwrap();
            let ext = external_series(corpus, seeds, counts, plan, &opts.hyper, cache, t_train)?;
            arnet_config = Some(cross_validate(train, &ext, &opts.grids, opts.jobs)?);
        }
    }

    let horizons: Vec<usize> = (plan.evaluation_start..=plan.evaluation_end).collect();
    let estimates: Vec<Result<f64>> = map_indexed(horizons.len(), opts.jobs, |i| {
        let t = horizons[i];
        let history = &values[..t];
        let run = || -> Result<f64> {
            match plan.method {
                Method::ArmaBaseline => {
                    let (p, q) = arma_order.unwrap();
                    let model = arma_fit(history, p, q)?;
                    arma_forecast(&model, history, t)
                }
                Method::ArmaxTrends | Method::ArmaxSamples => {
                    let (corpus, seeds) = topics.unwrap();
                    let ext =
                        external_series(corpus, seeds, counts, plan, &opts.hyper, cache, t)?;
                    let (p, q) = arma_order.unwrap();
                    let model = armax_fit(history, &ext, p, q)?;
                    armax_forecast(&model, history, &ext, t)
                }
                Method::ArnetTrends | Method::ArnetSamples => {
                    let (corpus, seeds) = topics.unwrap();
                    let ext =
                        external_series(corpus, seeds, counts, plan, &opts.hyper, cache, t)?;
                    let config = arnet_config.as_ref().unwrap();
                    let model = arnet_fit(history, &ext, config)?;
                    model.estimate(history, &ext, t)
                }
            }
        };
        run().map_err(|e| with_horizon(t, e))
    });
    let estimates: Vec<f64> = estimates.into_iter().collect::<Result<_>>()?;

    let actuals: Vec<f64> = horizons.iter().map(|&t| values[t]).collect();
    let score = nrmse_with(&actuals, &estimates, opts.normalizer)?;
    Ok(EvaluationResult {
        method: plan.method,
        horizons,
        actuals,
        estimates,
        nrmse: score,
        arnet_config,
        arma_order,
        base_seed: plan.base_seed,
        wall_time_ms: started.elapsed().as_millis(),
    })
}

/// NRMSE of several methods on one disease, lowest flagged.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonTable {
    pub disease: String,
    pub results: Vec<EvaluationResult>,
    /// Index into `results` of the lowest NRMSE.
    pub best: usize,
}

impl ComparisonTable {
    /// Plain-text grid, one method per row, best row marked.
    pub fn render(&self) -> String {
        let mut out = format!("{:<16} {:>10}\n", "method", "nrmse");
        for (i, r) in self.results.iter().enumerate() {
            let mark = if i == self.best { " *" } else { "" };
            out.push_str(&format!("{:<16} {:>10.4}{mark}\n", r.method.name(), r.nrmse));
        }
        out
    }
}

/// Evaluate every plan (sharing one posterior cache, so methods reuse
/// per-horizon inference) and tabulate NRMSE.
pub fn compare_methods(
    corpus: Option<&TupleCorpus>,
    seeds: Option<&SeedSpec>,
    counts: &CaseCountSeries,
    plans: &[EvaluationPlan],
    opts: &EvalOptions,
) -> Result<ComparisonTable> {
    if plans.is_empty() {
        return Err(Error::Config("no plans to compare".into()));
    }
    let range = (plans[0].evaluation_start, plans[0].evaluation_end);
    if plans
        .iter()
        .any(|p| (p.evaluation_start, p.evaluation_end) != range)
    {
        return Err(Error::Config(
            "compared plans must share the same evaluation range".into(),
        ));
    }
    let cache = PosteriorCache::new();
    let mut results = Vec::with_capacity(plans.len());
    for plan in plans {
        results.push(run_evaluation(corpus, seeds, counts, plan, opts, &cache)?);
    }
    let best = results
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.nrmse.partial_cmp(&b.nrmse).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(ComparisonTable {
        disease: counts.disease.clone(),
        results,
        best,
    })
}

/// Write per-horizon estimates as CSV (`horizon,actual,estimate`).
pub fn write_result_csv(result: &EvaluationResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["horizon", "actual", "estimate"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for i in 0..result.horizons.len() {
        w.write_record([
            result.horizons[i].to_string(),
            result.actuals[i].to_string(),
            result.estimates[i].to_string(),
        ])
        .map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Write the JSON summary (scores, chosen configs, seed, timing).
pub fn write_result_summary(result: &EvaluationResult, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    writeln!(f, "{}", serde_json::to_string_pretty(result).unwrap())
        .map_err(|e| Error::io(path, e))
}

/// Write the comparison grid as CSV (`disease,method,nrmse,best`).
pub fn write_comparison_csv(table: &ComparisonTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["disease", "method", "nrmse", "best"])
        .map_err(|e| Error::Data(e.to_string()))?;
    for (i, r) in table.results.iter().enumerate() {
        w.write_record([
            table.disease.clone(),
            r.method.name().to_string(),
            r.nrmse.to_string(),
            (i == table.best).to_string(),
        ])
        .map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
