//! Forward simulation of the generative process, for fixtures and
//! recovery tests.
//!
//! Draws the four latent distributions (regular/seed word distributions,
//! temporal trend, location mixture) from their Dirichlet priors, then
//! samples unit tokens: topic from the location mixture, path indicator
//! from `pi`, word from the chosen word distribution, time point from the
//! topic trend. Tokens aggregate back into a tuple corpus. Returns the
//! corpus together with the seed spec and the generating distributions so
//! recovery can be scored against ground truth.

use std::collections::BTreeMap;

use ndarray::Array2;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma};

use crate::corpus::{LocationSet, SeedSpec, SeedTopic, TupleCorpus, TupleRecord, Vocabulary};
use crate::error::Error;
use crate::rng::{derive_seed, rng_from_seed, Rng, STREAM_SYNTHESIS};
use crate::Result;

use super::TopicPosterior;

/// Per-topic seed-path probability used during generation.
#[derive(Debug, Clone, PartialEq)]
pub enum PiModel {
    /// The same constant for every topic.
    Fixed(f64),
    /// Draw each topic's probability from Beta(1, 1).
    BetaDraw,
}

/// Concentration of the Dirichlet prior over time points.
#[derive(Debug, Clone, PartialEq)]
pub enum XiConcentration {
    /// Symmetric concentration per entry.
    Symmetric(f64),
    /// Explicit K x T concentration matrix, e.g. to plant well-separated
    /// temporal peaks per topic.
    Explicit(Array2<f64>),
}

/// Parameters of the forward simulation.
#[derive(Debug, Clone)]
pub struct GenerativeSpec {
    pub num_topics: usize,
    pub num_locations: usize,
    pub time_points: usize,
    pub vocab_size: usize,
    /// The first `seeds_per_topic` words of each topic's vocabulary block
    /// become that topic's seed words.
    pub seeds_per_topic: usize,
    pub token_budget: u64,
    pub rng_seed: u64,
    pub pi: PiModel,
    /// Concentration of the regular word distributions.
    pub beta_conc: f64,
    /// Concentration of the seed word distributions.
    pub mu_conc: f64,
    /// Concentration of the location-topic mixtures.
    pub alpha_conc: f64,
    pub xi_conc: XiConcentration,
}

impl GenerativeSpec {
    /// A workable default: moderately concentrated word distributions and
    /// a fixed seed-path probability of 0.7.
    pub fn new(num_topics: usize, num_locations: usize, time_points: usize, vocab_size: usize) -> Self {
        Self {
            num_topics,
            num_locations,
            time_points,
            vocab_size,
            seeds_per_topic: 3,
            token_budget: 1000,
            rng_seed: 0,
            pi: PiModel::Fixed(0.7),
            beta_conc: 0.1,
            mu_conc: 1.0,
            alpha_conc: 1.0,
            xi_conc: XiConcentration::Symmetric(0.5),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.num_topics == 0 || self.num_locations == 0 || self.time_points == 0 {
            return Err(Error::Config(
                "num_topics, num_locations, and time_points must all be >= 1".into(),
            ));
        }
        if self.vocab_size < self.num_topics * self.seeds_per_topic.max(1) {
            return Err(Error::Config(format!(
                "vocab_size {} too small for {} topics with {} seed words each",
                self.vocab_size, self.num_topics, self.seeds_per_topic
            )));
        }
        if self.seeds_per_topic == 0 {
            return Err(Error::Config("seeds_per_topic must be >= 1".into()));
        }
        if let PiModel::Fixed(p) = self.pi {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!("pi must lie in [0, 1], got {p}")));
            }
        }
        if let XiConcentration::Explicit(m) = &self.xi_conc {
            if m.nrows() != self.num_topics || m.ncols() != self.time_points {
                return Err(Error::Config(format!(
                    "explicit xi concentration must be {}x{}, got {}x{}",
                    self.num_topics,
                    self.time_points,
                    m.nrows(),
                    m.ncols()
                )));
            }
        }
        Ok(())
    }
}

fn dirichlet(rng: &mut Rng, conc: &[f64]) -> Result<Vec<f64>> {
    for _attempt in 0..16 {
        let mut draw = Vec::with_capacity(conc.len());
        let mut sum = 0.0;
        for &a in conc {
            let g = Gamma::new(a, 1.0)
                .map_err(|e| Error::Numeric(format!("bad Dirichlet concentration {a}: {e}")))?;
            let x: f64 = g.sample(rng);
            draw.push(x);
            sum += x;
        }
        if sum > 0.0 && sum.is_finite() {
            for x in &mut draw {
                *x /= sum;
            }
            return Ok(draw);
        }
    }
    Err(Error::Numeric(
        "Dirichlet draw underflowed to zero repeatedly".into(),
    ))
}

fn categorical(rng: &mut Rng, probs: &[f64]) -> usize {
    let u: f64 = rng.random::<f64>();
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1
}

/// Run the forward simulation.
pub fn generate_synthetic(
    spec: &GenerativeSpec,
) -> Result<(TupleCorpus, SeedSpec, TopicPosterior)> {
    spec.validate()?;
    let mut rng = rng_from_seed(derive_seed(spec.rng_seed, STREAM_SYNTHESIS, 0));
    let k_n = spec.num_topics;
    let v_n = spec.vocab_size;
    let t_n = spec.time_points;
    let l_n = spec.num_locations;

    let words: Vec<String> = (0..v_n).map(|i| format!("w{i:04}")).collect();
    let vocabulary = Vocabulary::from_words(words.clone());
    let locations = LocationSet::from_pairs(
        (0..l_n).map(|i| ("synthland".to_string(), format!("region{i:02}"))),
    );

    // Topic k's seed words are the first seeds_per_topic words of its
    // vocabulary block; blocks are disjoint by construction.
    let block = v_n / k_n;
    let seed_ids: Vec<Vec<usize>> = (0..k_n)
        .map(|k| (0..spec.seeds_per_topic).map(|j| k * block + j).collect())
        .collect();
    let seeds = SeedSpec::new(
        (0..k_n)
            .map(|k| SeedTopic {
                name: format!("topic{k}"),
                words: seed_ids[k].iter().map(|&w| words[w].clone()).collect(),
            })
            .collect(),
    )?;

    let phi_r_rows: Vec<Vec<f64>> = (0..k_n)
        .map(|_| dirichlet(&mut rng, &vec![spec.beta_conc; v_n]))
        .collect::<Result<_>>()?;
    let phi_s: Vec<Vec<f64>> = (0..k_n)
        .map(|_| dirichlet(&mut rng, &vec![spec.mu_conc; spec.seeds_per_topic]))
        .collect::<Result<_>>()?;
    let xi_rows: Vec<Vec<f64>> = (0..k_n)
        .map(|k| match &spec.xi_conc {
            XiConcentration::Symmetric(c) => dirichlet(&mut rng, &vec![*c; t_n]),
            XiConcentration::Explicit(m) => dirichlet(&mut rng, &m.row(k).to_vec()),
        })
        .collect::<Result<_>>()?;
    let pi: Vec<f64> = (0..k_n)
        .map(|_| match spec.pi {
            PiModel::Fixed(p) => p,
            PiModel::BetaDraw => rng.random::<f64>(),
        })
        .collect();
    let theta_rows: Vec<Vec<f64>> = (0..l_n)
        .map(|_| dirichlet(&mut rng, &vec![spec.alpha_conc; k_n]))
        .collect::<Result<_>>()?;

    // Split the token budget as evenly as possible across locations.
    let base = spec.token_budget / l_n as u64;
    let extra = (spec.token_budget % l_n as u64) as usize;
    let mut counts: BTreeMap<(usize, usize, usize), u32> = BTreeMap::new();
    for l in 0..l_n {
        let quota = base + u64::from(l < extra);
        for _ in 0..quota {
            let z = categorical(&mut rng, &theta_rows[l]);
            let take_seed = rng.random::<f64>() < pi[z];
            let w = if take_seed {
                seed_ids[z][categorical(&mut rng, &phi_s[z])]
            } else {
                categorical(&mut rng, &phi_r_rows[z])
            };
            let t = categorical(&mut rng, &xi_rows[z]);
            *counts.entry((l, t, w)).or_insert(0) += 1;
        }
    }

    let records: Vec<TupleRecord> = counts
        .into_iter()
        .map(|((l, t, w), count)| TupleRecord {
            word_id: w,
            location_id: l,
            time_index: t,
            count,
        })
        .collect();
    let corpus = TupleCorpus::new(vocabulary, locations, t_n, records)?;

    let truth = TopicPosterior {
        theta: rows_to_array(&theta_rows, k_n),
        phi_r: rows_to_array(&phi_r_rows, v_n),
        phi_s,
        xi: rows_to_array(&xi_rows, t_n),
        topic_names: seeds.topics().iter().map(|t| t.name.clone()).collect(),
        seed_words: seeds.topics().iter().map(|t| t.words.clone()).collect(),
    };
    Ok((corpus, seeds, truth))
}

fn rows_to_array(rows: &[Vec<f64>], ncols: usize) -> Array2<f64> {
    let mut m = Array2::zeros((rows.len(), ncols));
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            m[[i, j]] = *v;
        }
    }
    m
}
