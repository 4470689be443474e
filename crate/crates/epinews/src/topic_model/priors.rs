//! Asymmetric Dirichlet priors built from seed-word occurrence counts.
//!
//! Seed occurrences carry the supervision: a topic's prior mass over time
//! points (and a location's prior mass over topics) is the observed count
//! of that topic's seed words there, plus a flat smoothing pseudocount so
//! news-silent cells keep nonzero probability.

use ndarray::Array2;

use crate::corpus::{SeedSpec, TupleCorpus};

use super::SeedIndex;

/// K x T prior over time points per topic: entry `(k, t)` is the summed
/// count of topic `k`'s seed words at time `t` across all locations, plus
/// `gamma_smooth`.
pub fn compute_gamma_prior(
    corpus: &TupleCorpus,
    seeds: &SeedSpec,
    gamma_smooth: f64,
) -> Array2<f64> {
    let index = SeedIndex::build(seeds, corpus.vocabulary());
    let k = seeds.num_topics();
    let t = corpus.time_horizon();
    let mut prior = Array2::from_elem((k, t), gamma_smooth);
    for r in corpus.records() {
        if let Some((topic, _slot)) = index.owner(r.word_id) {
            prior[[topic, r.time_index]] += f64::from(r.count);
        }
    }
    prior
}

/// L x K prior over topics per location: entry `(l, k)` is the summed
/// count of topic `k`'s seed words among location `l`'s records over all
/// times, plus `alpha_smooth`.
pub fn compute_alpha_prior(
    corpus: &TupleCorpus,
    seeds: &SeedSpec,
    alpha_smooth: f64,
) -> Array2<f64> {
    let index = SeedIndex::build(seeds, corpus.vocabulary());
    let l = corpus.locations().len();
    let k = seeds.num_topics();
    let mut prior = Array2::from_elem((l, k), alpha_smooth);
    for r in corpus.records() {
        if let Some((topic, _slot)) = index.owner(r.word_id) {
            prior[[r.location_id, topic]] += f64::from(r.count);
        }
    }
    prior
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{LocationSet, SeedTopic, TupleRecord, Vocabulary};

    fn seeds2(first: &str, second: &str) -> SeedSpec {
        SeedSpec::new(vec![
            SeedTopic { name: "t0".into(), words: vec![first.into()] },
            SeedTopic { name: "t1".into(), words: vec![second.into()] },
        ])
        .unwrap()
    }

    #[test]
    fn gamma_is_smoothing_only_without_seed_occurrences() {
        let vocab = Vocabulary::from_words(["plain", "words"]);
        let locs = LocationSet::from_pairs([("c".into(), "s".into())]);
        let records = vec![
            TupleRecord { word_id: 0, location_id: 0, time_index: 0, count: 5 },
            TupleRecord { word_id: 1, location_id: 0, time_index: 1, count: 2 },
        ];
        let corpus = TupleCorpus::new(vocab, locs, 2, records).unwrap();
        let prior = compute_gamma_prior(&corpus, &seeds2("absent", "missing"), 0.01);
        assert!(prior.iter().all(|&v| v == 0.01));
    }

    #[test]
    fn gamma_sums_seed_counts_per_time() {
        let vocab = Vocabulary::from_words(["dengue", "rain"]);
        let locs = LocationSet::from_pairs([("c".into(), "s".into())]);
        let records = vec![
            TupleRecord { word_id: 0, location_id: 0, time_index: 0, count: 3 },
            TupleRecord { word_id: 0, location_id: 0, time_index: 1, count: 2 },
        ];
        let corpus = TupleCorpus::new(vocab, locs, 2, records).unwrap();
        let prior = compute_gamma_prior(&corpus, &seeds2("dengue", "zzz"), 0.01);
        assert_eq!(prior[[0, 0]], 3.01);
        assert_eq!(prior[[0, 1]], 2.01);
        assert_eq!(prior[[1, 0]], 0.01);
    }

    #[test]
    fn alpha_defaults_to_two_over_k() {
        let vocab = Vocabulary::from_words(["w"]);
        let locs = LocationSet::from_pairs([("c".into(), "s".into())]);
        let records = vec![TupleRecord { word_id: 0, location_id: 0, time_index: 0, count: 1 }];
        let corpus = TupleCorpus::new(vocab, locs, 1, records).unwrap();
        let seeds = SeedSpec::new(
            (0..4)
                .map(|i| SeedTopic { name: format!("t{i}"), words: vec![format!("seed{i}")] })
                .collect(),
        )
        .unwrap();
        let prior = compute_alpha_prior(&corpus, &seeds, 2.0 / 4.0);
        assert!(prior.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn alpha_accumulates_seed_counts_per_location() {
        let vocab = Vocabulary::from_words(["dengue", "rain"]);
        let locs = LocationSet::from_pairs([("c".into(), "s".into())]);
        let records = vec![
            TupleRecord { word_id: 0, location_id: 0, time_index: 0, count: 3 },
            TupleRecord { word_id: 0, location_id: 0, time_index: 1, count: 2 },
            TupleRecord { word_id: 1, location_id: 0, time_index: 0, count: 7 },
        ];
        let corpus = TupleCorpus::new(vocab, locs, 2, records).unwrap();
        // K = 2 so alpha' = 1; topic 0 has 5 seed occurrences, topic 1 none.
        let prior = compute_alpha_prior(&corpus, &seeds2("dengue", "zzz"), 1.0);
        assert_eq!(prior[[0, 0]], 6.0);
        assert_eq!(prior[[0, 1]], 1.0);
    }

    #[test]
    fn seedless_location_row_is_uniform_smoothing() {
        let vocab = Vocabulary::from_words(["dengue", "rain"]);
        let locs = LocationSet::from_pairs([
            ("c".into(), "a".into()),
            ("c".into(), "b".into()),
        ]);
        let records = vec![
            TupleRecord { word_id: 0, location_id: 0, time_index: 0, count: 4 },
            TupleRecord { word_id: 1, location_id: 1, time_index: 0, count: 9 },
        ];
        let corpus = TupleCorpus::new(vocab, locs, 1, records).unwrap();
        let prior = compute_alpha_prior(&corpus, &seeds2("dengue", "zzz"), 1.0);
        assert_eq!(prior[[1, 0]], 1.0);
        assert_eq!(prior[[1, 1]], 1.0);
    }
}
