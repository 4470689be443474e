//! Token-level sampler state: count matrices, the per-token conditional
//! event distribution, and the Gibbs sweep.
//!
//! Corpus counts are expanded to unit tokens, each carrying its own
//! `(topic, path)` assignment. The sampler keeps four count matrices and
//! their running totals:
//!
//! - `n[k][v]` — times word `v` was assigned to topic `k` via the regular
//!   path, with total `n_k`;
//! - `s[k][j]` — times topic `k`'s seed slot `j` was taken via the seed
//!   path, with total `s_k`;
//! - `m[k][t]` — times a token at time `t` was assigned topic `k`;
//! - `o[l][k]` — times a token at location `l` was assigned topic `k`.
//!
//! Resampling a token follows the `-i` convention: decrement its current
//! assignment everywhere, evaluate the conditional weights, draw one joint
//! `(topic, path)` event, and increment. The event space has at most
//! `K + 1` live entries: the regular path under every topic, plus the
//! seed path under the one topic whose seed set contains the word. A
//! regular word can never take a seed path, and a seed word can take the
//! seed path only under its owning topic.

use ndarray::Array2;
use rand::Rng as _;

use crate::corpus::{LocationId, SeedSpec, TimeIndex, TupleCorpus, WordId};
use crate::error::Error;
use crate::rng::{derive_seed, rng_from_seed, Rng, STREAM_INIT};
use crate::Result;

use super::{
    compute_alpha_prior, compute_gamma_prior, Hyperparameters, SeedIndex, TopicPosterior,
};

/// Which of a topic's two word distributions generated a token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WordPath {
    Regular,
    Seed,
}

/// One unit token with its current assignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenInstance {
    pub word_id: WordId,
    pub location_id: LocationId,
    pub time_index: TimeIndex,
    pub topic: usize,
    pub path: WordPath,
}

/// A joint `(topic, path)` resampling outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Event {
    pub topic: usize,
    pub path: WordPath,
}

/// Normalized conditional distribution over a token's live events.
/// Events not listed (seed paths under non-owning topics, any seed path
/// for a regular word) have probability exactly zero.
#[derive(Debug, Clone)]
pub struct EventDistribution {
    pub events: Vec<Event>,
    pub probs: Vec<f64>,
}

/// Mutable collapsed-Gibbs state. Single-owner: one chain per state.
#[derive(Debug, Clone)]
pub struct GibbsState {
    num_topics: usize,
    vocab_size: usize,
    tokens: Vec<TokenInstance>,
    n_wk: Array2<u64>,
    s_slots: Vec<Vec<u64>>,
    m_kt: Array2<u64>,
    o_lk: Array2<u64>,
    n_tot: Vec<u64>,
    s_tot: Vec<u64>,
    m_tot: Vec<u64>,
    o_tot: Vec<u64>,
    gamma: Array2<f64>,
    gamma_row_sum: Vec<f64>,
    alpha: Array2<f64>,
    alpha_row_sum: Vec<f64>,
    seed_index: SeedIndex,
    hp: Hyperparameters,
    rng: Rng,
    weight_buf: Vec<f64>,
}

/// Expand the corpus to unit tokens with random initial assignments.
///
/// Topics are drawn uniformly; a seed-word token additionally draws its
/// path indicator with probability `pi`, forced to the regular path when
/// the drawn topic does not own the word. Deterministic in
/// `hp.rng_seed`.
pub fn init_state(
    corpus: &TupleCorpus,
    seeds: &SeedSpec,
    hp: &Hyperparameters,
) -> Result<GibbsState> {
    hp.validate()?;
    let k = seeds.num_topics();
    if k == 0 {
        return Err(Error::Config("at least one topic is required".into()));
    }
    let v = corpus.vocabulary().len();
    let l = corpus.locations().len();
    let t = corpus.time_horizon();

    let seed_index = SeedIndex::build(seeds, corpus.vocabulary());
    let gamma = compute_gamma_prior(corpus, seeds, hp.gamma_smooth);
    let alpha = compute_alpha_prior(corpus, seeds, hp.alpha_smooth);
    let gamma_row_sum = gamma.rows().into_iter().map(|r| r.sum()).collect();
    let alpha_row_sum = alpha.rows().into_iter().map(|r| r.sum()).collect();

    let mut state = GibbsState {
        num_topics: k,
        vocab_size: v,
        tokens: Vec::with_capacity(corpus.token_total() as usize),
        n_wk: Array2::zeros((k, v)),
        s_slots: (0..k).map(|i| vec![0; seed_index.slots(i)]).collect(),
        m_kt: Array2::zeros((k, t)),
        o_lk: Array2::zeros((l, k)),
        n_tot: vec![0; k],
        s_tot: vec![0; k],
        m_tot: vec![0; k],
        o_tot: vec![0; l],
        gamma,
        gamma_row_sum,
        alpha,
        alpha_row_sum,
        seed_index,
        hp: hp.clone(),
        rng: rng_from_seed(derive_seed(hp.rng_seed, STREAM_INIT, 0)),
        weight_buf: Vec::with_capacity(k + 1),
    };

    for r in corpus.records() {
        let owner = state.seed_index.owner(r.word_id);
        for _ in 0..r.count {
            let topic = state.rng.random_range(0..k);
            let path = match owner {
                Some((k0, _)) => {
                    let take_seed = state.rng.random::<f64>() < state.hp.pi;
                    if take_seed && topic == k0 {
                        WordPath::Seed
                    } else {
                        WordPath::Regular
                    }
                }
                None => WordPath::Regular,
            };
            let i = state.tokens.len();
            state.tokens.push(TokenInstance {
                word_id: r.word_id,
                location_id: r.location_id,
                time_index: r.time_index,
                topic: 0,
                path: WordPath::Regular,
            });
            state.assign(i, topic, path);
        }
    }
    Ok(state)
}

impl GibbsState {
    pub fn num_topics(&self) -> usize {
        self.num_topics
    }

    pub fn tokens(&self) -> &[TokenInstance] {
        &self.tokens
    }

    /// Current `(topic, path)` assignment per token, in corpus order.
    pub fn assignments(&self) -> Vec<(usize, WordPath)> {
        self.tokens.iter().map(|t| (t.topic, t.path)).collect()
    }

    fn unassign(&mut self, i: usize) {
        let tok = self.tokens[i];
        match tok.path {
            WordPath::Regular => {
                self.n_wk[[tok.topic, tok.word_id]] -= 1;
                self.n_tot[tok.topic] -= 1;
            }
            WordPath::Seed => {
                let (k0, slot) = self
                    .seed_index
                    .owner(tok.word_id)
                    .expect("seed-path token for a non-seed word");
                debug_assert_eq!(k0, tok.topic);
                self.s_slots[tok.topic][slot] -= 1;
                self.s_tot[tok.topic] -= 1;
            }
        }
        self.m_kt[[tok.topic, tok.time_index]] -= 1;
        self.m_tot[tok.topic] -= 1;
        self.o_lk[[tok.location_id, tok.topic]] -= 1;
        self.o_tot[tok.location_id] -= 1;
    }

    fn assign(&mut self, i: usize, topic: usize, path: WordPath) {
        let tok = &mut self.tokens[i];
        tok.topic = topic;
        tok.path = path;
        let tok = *tok;
        match path {
            WordPath::Regular => {
                self.n_wk[[topic, tok.word_id]] += 1;
                self.n_tot[topic] += 1;
            }
            WordPath::Seed => {
                let (k0, slot) = self
                    .seed_index
                    .owner(tok.word_id)
                    .expect("seed path drawn for a non-seed word");
                debug_assert_eq!(k0, topic);
                self.s_slots[topic][slot] += 1;
                self.s_tot[topic] += 1;
            }
        }
        self.m_kt[[topic, tok.time_index]] += 1;
        self.m_tot[topic] += 1;
        self.o_lk[[tok.location_id, topic]] += 1;
        self.o_tot[tok.location_id] += 1;
    }

    /// Fill `buf` with unnormalized event weights for a token whose
    /// current assignment has already been removed from the counts.
    ///
    /// Layout: `buf[k]` is the regular-path weight under topic `k`; if
    /// the word is a seed word, one extra entry at the end is the seed
    /// path under the owning topic (returned).
    fn fill_event_weights(
        &self,
        word: WordId,
        location: LocationId,
        time: TimeIndex,
        buf: &mut Vec<f64>,
    ) -> Option<usize> {
        buf.clear();
        let beta = self.hp.beta_smooth;
        let mu = self.hp.mu_smooth;
        let pi = self.hp.pi;
        let v = self.vocab_size as f64;
        let owner = self.seed_index.owner(word);

        for k in 0..self.num_topics {
            let word_fac =
                (self.n_wk[[k, word]] as f64 + beta) / (self.n_tot[k] as f64 + v * beta);
            let time_fac = (self.m_kt[[k, time]] as f64 + self.gamma[[k, time]])
                / (self.m_tot[k] as f64 + self.gamma_row_sum[k]);
            let loc_fac = (self.o_lk[[location, k]] as f64 + self.alpha[[location, k]])
                / (self.o_tot[location] as f64 + self.alpha_row_sum[location]);
            let indicator = match owner {
                // Regular word: marginal over the path indicator, built
                // from the topic's running regular/seed totals.
                None => {
                    let n_term = self.n_tot[k] as f64 + beta;
                    let s_term = self.s_tot[k] as f64 + mu;
                    (n_term + pi) / (n_term + s_term + 2.0 * pi)
                }
                // Seed word taking the regular path.
                Some(_) => 1.0 - pi,
            };
            buf.push(word_fac * time_fac * loc_fac * indicator);
        }

        if let Some((k0, slot)) = owner {
            let s_count = self.seed_index.slots(k0) as f64;
            let seed_fac = (self.s_slots[k0][slot] as f64 + mu)
                / (self.s_tot[k0] as f64 + s_count * mu);
            let time_fac = (self.m_kt[[k0, time]] as f64 + self.gamma[[k0, time]])
                / (self.m_tot[k0] as f64 + self.gamma_row_sum[k0]);
            let loc_fac = (self.o_lk[[location, k0]] as f64 + self.alpha[[location, k0]])
                / (self.o_tot[location] as f64 + self.alpha_row_sum[location]);
            buf.push(seed_fac * time_fac * loc_fac * pi);
            Some(k0)
        } else {
            None
        }
    }

    /// Normalized conditional event distribution for token `i`, holding
    /// everything else fixed. The state is left unchanged.
    pub fn conditional_event_probs(&mut self, i: usize) -> EventDistribution {
        self.unassign(i);
        let tok = self.tokens[i];
        let mut buf = Vec::with_capacity(self.num_topics + 1);
        let owner = self.fill_event_weights(tok.word_id, tok.location_id, tok.time_index, &mut buf);
        self.assign(i, tok.topic, tok.path);

        debug_assert!(buf.iter().all(|w| *w > 0.0 && w.is_finite()));
        let total: f64 = buf.iter().sum();
        assert!(
            total > 0.0 && total.is_finite(),
            "event weights degenerate despite positive smoothing"
        );
        let mut events: Vec<Event> = (0..self.num_topics)
            .map(|k| Event { topic: k, path: WordPath::Regular })
            .collect();
        if let Some(k0) = owner {
            events.push(Event { topic: k0, path: WordPath::Seed });
        }
        let probs = buf.iter().map(|w| w / total).collect();
        EventDistribution { events, probs }
    }

    /// One full sweep: every token resampled once, in corpus order.
    pub fn sweep(&mut self) {
        let mut buf = std::mem::take(&mut self.weight_buf);
        for i in 0..self.tokens.len() {
            self.unassign(i);
            let tok = self.tokens[i];
            let owner =
                self.fill_event_weights(tok.word_id, tok.location_id, tok.time_index, &mut buf);
            let total: f64 = buf.iter().sum();
            assert!(
                total > 0.0 && total.is_finite(),
                "event weights degenerate despite positive smoothing"
            );
            let u = self.rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut choice = buf.len() - 1;
            for (e, w) in buf.iter().enumerate() {
                acc += w;
                if u < acc {
                    choice = e;
                    break;
                }
            }
            let (topic, path) = if choice < self.num_topics {
                (choice, WordPath::Regular)
            } else {
                (owner.expect("seed event without owner"), WordPath::Seed)
            };
            self.assign(i, topic, path);
        }
        self.weight_buf = buf;
    }

    /// Recompute every count matrix from the token list and compare with
    /// the stored matrices. Any mismatch is a bookkeeping bug.
    pub fn verify_counts(&self) -> std::result::Result<(), String> {
        let mut n_wk = Array2::<u64>::zeros(self.n_wk.raw_dim());
        let mut s_slots: Vec<Vec<u64>> = self.s_slots.iter().map(|s| vec![0; s.len()]).collect();
        let mut m_kt = Array2::<u64>::zeros(self.m_kt.raw_dim());
        let mut o_lk = Array2::<u64>::zeros(self.o_lk.raw_dim());
        for tok in &self.tokens {
            match tok.path {
                WordPath::Regular => n_wk[[tok.topic, tok.word_id]] += 1,
                WordPath::Seed => {
                    let (k0, slot) = self
                        .seed_index
                        .owner(tok.word_id)
                        .ok_or_else(|| "seed-path token for non-seed word".to_string())?;
                    if k0 != tok.topic {
                        return Err(format!(
                            "token assigned seed path under topic {} but word is owned by topic {k0}",
                            tok.topic
                        ));
                    }
                    s_slots[tok.topic][slot] += 1;
                }
            }
            m_kt[[tok.topic, tok.time_index]] += 1;
            o_lk[[tok.location_id, tok.topic]] += 1;
        }
        if n_wk != self.n_wk {
            return Err("regular word-topic counts diverge from token list".into());
        }
        if s_slots != self.s_slots {
            return Err("seed slot counts diverge from token list".into());
        }
        if m_kt != self.m_kt {
            return Err("time-topic counts diverge from token list".into());
        }
        if o_lk != self.o_lk {
            return Err("location-topic counts diverge from token list".into());
        }
        for k in 0..self.num_topics {
            let n_sum: u64 = self.n_wk.row(k).sum();
            let s_sum: u64 = self.s_slots[k].iter().sum();
            let m_sum: u64 = self.m_kt.row(k).sum();
            if n_sum != self.n_tot[k] || s_sum != self.s_tot[k] || m_sum != self.m_tot[k] {
                return Err(format!("running totals diverge for topic {k}"));
            }
            if self.m_tot[k] != self.n_tot[k] + self.s_tot[k] {
                return Err(format!("token accounting broken for topic {k}"));
            }
        }
        for l in 0..self.o_tot.len() {
            let o_sum: u64 = self.o_lk.row(l).sum();
            if o_sum != self.o_tot[l] {
                return Err(format!("running totals diverge for location {l}"));
            }
        }
        let m_total: u64 = self.m_tot.iter().sum();
        if m_total != self.tokens.len() as u64 {
            return Err("total token count diverges".into());
        }
        Ok(())
    }

    /// Point estimates from the current counts.
    pub fn posterior(&self) -> TopicPosterior {
        let k_n = self.num_topics;
        let v = self.vocab_size;
        let l_n = self.o_tot.len();
        let t_n = self.m_kt.ncols();

        let mut theta = Array2::zeros((l_n, k_n));
        for l in 0..l_n {
            let denom = self.o_tot[l] as f64 + self.alpha_row_sum[l];
            for k in 0..k_n {
                theta[[l, k]] = (self.o_lk[[l, k]] as f64 + self.alpha[[l, k]]) / denom;
            }
        }

        let beta = self.hp.beta_smooth;
        let mut phi_r = Array2::zeros((k_n, v));
        for k in 0..k_n {
            let denom = self.n_tot[k] as f64 + v as f64 * beta;
            for w in 0..v {
                phi_r[[k, w]] = (self.n_wk[[k, w]] as f64 + beta) / denom;
            }
        }

        let mu = self.hp.mu_smooth;
        let phi_s = (0..k_n)
            .map(|k| {
                let slots = self.seed_index.slots(k);
                let denom = self.s_tot[k] as f64 + slots as f64 * mu;
                (0..slots)
                    .map(|j| (self.s_slots[k][j] as f64 + mu) / denom)
                    .collect()
            })
            .collect();

        let mut xi = Array2::zeros((k_n, t_n));
        for k in 0..k_n {
            let denom = self.m_tot[k] as f64 + self.gamma_row_sum[k];
            for t in 0..t_n {
                xi[[k, t]] = (self.m_kt[[k, t]] as f64 + self.gamma[[k, t]]) / denom;
            }
        }

        TopicPosterior {
            theta,
            phi_r,
            phi_s,
            xi,
            topic_names: self.seed_index.topic_names.clone(),
            seed_words: self.seed_index.seed_words.clone(),
        }
    }
}
