// Scratch harness: scans synthetic-world parameters for the paired
// method-ordering experiment and prints win counts.

use epinews::corpus::{CaseCountSeries, Granularity, SeedSpec, TupleCorpus};
use epinews::evaluation::{compare_methods, EvalOptions, EvaluationPlan, Method};
use epinews::exec::map_indexed;
use epinews::rng::{derive_seed, rng_from_seed};
use epinews::topic_model::{generate_synthetic, GenerativeSpec, Hyperparameters, XiConcentration};
use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

fn outbreak_xi(t: usize) -> Array2<f64> {
    // topic 0: quiet baseline with a training-window bump and a larger
    // evaluation-window outbreak; topic 1: flat background
    let mut conc = Array2::zeros((2, t));
    for time in 0..t {
        let bump1 = 6.0 * (-((time as f64 - 14.0) / 2.0).powi(2)).exp();
        let bump2 = 24.0 * (-((time as f64 - 24.0) / 1.8).powi(2)).exp();
        conc[[0, time]] = (0.6 + bump1 + bump2) * 12.0;
        conc[[1, time]] = 10.0;
    }
    conc
}

fn world(seed: u64, scale: f64, noise_sd: f64, budget: u64) -> (TupleCorpus, SeedSpec, CaseCountSeries) {
    let t_n = 30;
    let spec = GenerativeSpec {
        token_budget: budget,
        rng_seed: seed,
        seeds_per_topic: 6,
        beta_conc: 0.08,
        alpha_conc: 12.0,
        xi_conc: XiConcentration::Explicit(outbreak_xi(t_n)),
        ..GenerativeSpec::new(2, 1, t_n, 80)
    };
    let (corpus, seeds, truth) = generate_synthetic(&spec).unwrap();
    let xi_z = truth.xi.row(0).to_vec();
    let mut rng = rng_from_seed(derive_seed(seed, 71, 0));
    let mut ar = 0.0;
    let values: Vec<f64> = xi_z
        .iter()
        .map(|x| {
            let w: f64 = StandardNormal.sample(&mut rng);
            ar = 0.6 * ar + noise_sd * w;
            (scale * x + ar).max(0.0)
        })
        .collect();
    (corpus, seeds, CaseCountSeries::new("synthetic", Granularity::Weekly, values).unwrap())
}

fn main() {
    for (offset, scale, noise_sd, budget) in [
        (9000u64, 200.0, 1.2, 2_500u64),
        (9100, 200.0, 1.2, 2_500),
        (9200, 200.0, 1.2, 2_500),
        (9000, 200.0, 1.5, 3_000),
        (9100, 200.0, 1.5, 3_000),
        (9200, 200.0, 1.5, 3_000),
        (9000, 150.0, 1.2, 2_000),
        (9100, 150.0, 1.2, 2_000),
        (9200, 150.0, 1.2, 2_000),
    ] {
        let outcomes: Vec<(f64, f64, f64)> = map_indexed(20, 0, |i| {
            let (corpus, seeds, counts) = world(offset + i as u64, scale, noise_sd, budget);
            let plan = |method| EvaluationPlan {
                static_training_end: 17,
                evaluation_start: 18,
                evaluation_end: 29,
                method,
                topic_index: 0,
                base_seed: derive_seed(500 + i as u64, 72, 0),
            };
            let opts = EvalOptions { jobs: 1, ..EvalOptions::new(Hyperparameters::defaults_for(2)) };
            let table = compare_methods(
                Some(&corpus),
                Some(&seeds),
                &counts,
                &[plan(Method::ArmaBaseline), plan(Method::ArnetTrends), plan(Method::ArnetSamples)],
                &opts,
            )
            .unwrap();
            (table.results[0].nrmse, table.results[1].nrmse, table.results[2].nrmse)
        });
        let vs_arma = outcomes.iter().filter(|(a, _, s)| s < a).count();
        let vs_trends = outcomes.iter().filter(|(_, t, s)| s < t).count();
        let mean =
            |f: &dyn Fn(&(f64, f64, f64)) -> f64| outcomes.iter().map(f).sum::<f64>() / 20.0;
        println!(
            "offset={offset} scale={scale} noise={noise_sd} budget={budget}: samples<arma {vs_arma}/20, samples<trends {vs_trends}/20 | mean nrmse arma={:.3} trends={:.3} samples={:.3}",
            mean(&|o| o.0), mean(&|o| o.1), mean(&|o| o.2),
        );
    }
}
