//! Seed-word-supervised temporal topic model with collapsed Gibbs inference.
//!
//! A topic is the convex combination of two word distributions: a seed
//! topic distribution `phi_s` over the topic's own seed words and a
//! regular topic distribution `phi_r` over the whole vocabulary, mixed by
//! a per-topic path probability `pi`. Each unit token carries a topic
//! assignment `z` and a path indicator (seed or regular); collapsed Gibbs
//! resamples both jointly per token from closed-form conditionals over
//! count matrices. Time and location are modeled jointly with words, so
//! the fit also yields `xi` (topic-over-time trends) and `theta`
//! (location-over-topic mixtures).
//!
//! Inference is deterministic given `Hyperparameters::rng_seed`: the same
//! corpus, seeds, and hyperparameters reproduce the posterior bit for bit.

mod priors;
mod state;
mod synthetic;

pub use priors::{compute_alpha_prior, compute_gamma_prior};
pub use state::{
    init_state, Event, EventDistribution, GibbsState, TokenInstance, WordPath,
};
pub use synthetic::{generate_synthetic, GenerativeSpec, PiModel, XiConcentration};

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::corpus::{SeedSpec, TupleCorpus, Vocabulary, WordId};
use crate::error::Error;
use crate::Result;

/// Smoothing constants, seed-path probability, and chain settings.
///
/// Defaults follow the reference configuration: `alpha_smooth = 2/K`,
/// `gamma_smooth = beta_smooth = 0.01`, `mu_smooth = 1e-7`, `pi = 0.7`,
/// 300 sweeps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Location-topic prior smoothing (alpha').
    pub alpha_smooth: f64,
    /// Topic-time prior smoothing (gamma').
    pub gamma_smooth: f64,
    /// Regular word distribution smoothing (beta').
    pub beta_smooth: f64,
    /// Seed word distribution smoothing (mu').
    pub mu_smooth: f64,
    /// Probability that a seed word takes the seed path under its topic.
    pub pi: f64,
    /// Number of full Gibbs sweeps.
    pub n_iterations: usize,
    pub rng_seed: u64,
}

impl Hyperparameters {
    pub const DEFAULT_ITERATIONS: usize = 300;

    /// Defaults for a model with `k` topics.
    pub fn defaults_for(k: usize) -> Self {
        Self {
            alpha_smooth: 2.0 / k.max(1) as f64,
            gamma_smooth: 0.01,
            beta_smooth: 0.01,
            mu_smooth: 1e-7,
            pi: 0.7,
            n_iterations: Self::DEFAULT_ITERATIONS,
            rng_seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_smooth", self.alpha_smooth),
            ("gamma_smooth", self.gamma_smooth),
            ("beta_smooth", self.beta_smooth),
            ("mu_smooth", self.mu_smooth),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.pi > 0.0 && self.pi < 1.0) {
            return Err(Error::Config(format!(
                "pi must lie strictly between 0 and 1, got {}",
                self.pi
            )));
        }
        if self.n_iterations == 0 {
            return Err(Error::Config("n_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Resolved view of a seed spec against one vocabulary: which topic owns
/// each in-vocabulary seed word, and how many seed slots each topic has.
/// Unresolved seed words keep their slot (zero occurrences, so they only
/// receive the mu' floor in `phi_s`).
#[derive(Debug, Clone)]
pub(crate) struct SeedIndex {
    /// word id -> (topic, slot within the topic's seed list)
    owner: HashMap<WordId, (usize, usize)>,
    /// Seed-list length per topic, counting unresolved words.
    slots: Vec<usize>,
    topic_names: Vec<String>,
    seed_words: Vec<Vec<String>>,
}

impl SeedIndex {
    pub(crate) fn build(seeds: &SeedSpec, vocab: &Vocabulary) -> Self {
        let resolved = seeds.resolve(vocab);
        let mut owner = HashMap::new();
        for (k, ids) in resolved.iter().enumerate() {
            for (slot, id) in ids.iter().enumerate() {
                if let Some(id) = id {
                    owner.insert(*id, (k, slot));
                }
            }
        }
        SeedIndex {
            owner,
            slots: seeds.topics().iter().map(|t| t.words.len()).collect(),
            topic_names: seeds.topics().iter().map(|t| t.name.clone()).collect(),
            seed_words: seeds.topics().iter().map(|t| t.words.clone()).collect(),
        }
    }

    pub(crate) fn num_topics(&self) -> usize {
        self.slots.len()
    }

    /// `(topic, slot)` if `word` is one of that topic's seed words.
    pub(crate) fn owner(&self, word: WordId) -> Option<(usize, usize)> {
        self.owner.get(&word).copied()
    }

    pub(crate) fn slots(&self, topic: usize) -> usize {
        self.slots[topic]
    }
}

/// Posterior point estimate read from the final sweep's counts.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicPosterior {
    /// L x K, row-stochastic: topic mixture per location.
    pub theta: Array2<f64>,
    /// K x V, row-stochastic: regular word distribution per topic.
    pub phi_r: Array2<f64>,
    /// Per-topic distribution over that topic's own seed slots.
    pub phi_s: Vec<Vec<f64>>,
    /// K x T, row-stochastic: temporal trend per topic.
    pub xi: Array2<f64>,
    pub topic_names: Vec<String>,
    /// Seed-slot labels aligned with `phi_s` rows.
    pub seed_words: Vec<Vec<String>>,
}

impl TopicPosterior {
    pub fn num_topics(&self) -> usize {
        self.xi.nrows()
    }

    /// Temporal trend of topic `z` as an owned vector of length T.
    pub fn xi_row(&self, z: usize) -> Vec<f64> {
        self.xi.row(z).to_vec()
    }

    /// Top `n` regular words of topic `z` as (word id, probability),
    /// highest first. Ties resolve to the lower word id.
    pub fn top_words(&self, z: usize, n: usize) -> Vec<(WordId, f64)> {
        let mut pairs: Vec<(WordId, f64)> = self.phi_r.row(z).iter().copied().enumerate().collect();
        pairs.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
        pairs.truncate(n);
        pairs
    }
}

/// Run collapsed Gibbs inference: initialize token assignments, sweep
/// `hp.n_iterations` times, and read the posterior off the final counts.
/// No burn-in is discarded and no averaging across sweeps is performed.
pub fn run_inference(
    corpus: &TupleCorpus,
    seeds: &SeedSpec,
    hp: &Hyperparameters,
) -> Result<TopicPosterior> {
    let mut state = init_state(corpus, seeds, hp)?;
    for _ in 0..hp.n_iterations {
        state.sweep();
    }
    Ok(state.posterior())
}

/// Write a posterior as one CSV per matrix plus a JSON manifest recording
/// the hyperparameters and RNG seed.
///
/// Row labels are location ids (`theta`) or topic ids (`phi_r`, `phi_s`,
/// `xi`); columns are topic, word, seed-slot, or time ids.
pub fn export_posterior(
    posterior: &TopicPosterior,
    hp: &Hyperparameters,
    dir: impl AsRef<Path>,
) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let write_matrix = |name: &str, label: &str, m: &Array2<f64>| -> Result<()> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path)
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let mut header = vec![label.to_string()];
        header.extend((0..m.ncols()).map(|c| c.to_string()));
        w.write_record(&header).map_err(|e| Error::Data(e.to_string()))?;
        for (i, row) in m.rows().into_iter().enumerate() {
            let mut rec = vec![i.to_string()];
            rec.extend(row.iter().map(|v| format!("{v:.17e}")));
            w.write_record(&rec).map_err(|e| Error::Data(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))
    };

    write_matrix("theta.csv", "location", &posterior.theta)?;
    write_matrix("phi_r.csv", "topic", &posterior.phi_r)?;
    write_matrix("xi.csv", "topic", &posterior.xi)?;

    // phi_s rows are ragged (one slot per seed word), so rows carry their
    // own length.
    let path = dir.join("phi_s.csv");
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(&path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    w.write_record(["topic", "probabilities..."])
        .map_err(|e| Error::Data(e.to_string()))?;
    for (k, row) in posterior.phi_s.iter().enumerate() {
        let mut rec = vec![k.to_string()];
        rec.extend(row.iter().map(|v| format!("{v:.17e}")));
        w.write_record(&rec).map_err(|e| Error::Data(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))?;

    let manifest = serde_json::json!({
        "hyperparameters": hp,
        "rng_seed": hp.rng_seed,
        "num_topics": posterior.num_topics(),
        "num_locations": posterior.theta.nrows(),
        "vocab_size": posterior.phi_r.ncols(),
        "time_points": posterior.xi.ncols(),
        "topic_names": posterior.topic_names,
        "seed_words": posterior.seed_words,
    });
    let path = dir.join("manifest.json");
    let mut f = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    writeln!(f, "{}", serde_json::to_string_pretty(&manifest).unwrap())
        .map_err(|e| Error::io(&path, e))
}

/// Read one row of a matrix CSV written by [`export_posterior`].
pub fn load_matrix_row(path: impl AsRef<Path>, row_label: usize) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    for rec in reader.records() {
        let rec = rec.map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        let label: usize = match rec.get(0).and_then(|s| s.parse().ok()) {
            Some(l) => l,
            None => continue,
        };
        if label == row_label {
            return rec
                .iter()
                .skip(1)
                .map(|s| {
                    s.parse::<f64>().map_err(|e| Error::Data(format!(
                        "{}: bad matrix entry {s:?}: {e}",
                        path.display()
                    )))
                })
                .collect();
        }
    }
    Err(Error::Data(format!(
        "{}: no row labelled {row_label}",
        path.display()
    )))
}
