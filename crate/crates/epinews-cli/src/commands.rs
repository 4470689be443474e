//! Subcommand implementations.

use std::io::Write as _;
use std::path::Path;

use epinews::corpus::{
    load_case_counts, load_corpus, load_seed_spec, save_case_counts, save_corpus, CaseCountSeries,
    Granularity, SeedSpec, TupleCorpus,
};
use epinews::estimators::{
    arma_fit, arma_forecast, armax_fit, armax_forecast, arnet_fit, cross_validate, ArnetConfig,
    CvGrids,
};
use epinews::evaluation::{
    compare_methods, nrmse_with, run_evaluation, write_comparison_csv, write_result_csv,
    write_result_summary, EvalOptions, EvaluationPlan, Method, Normalizer, PosteriorCache,
};
use epinews::rng::{derive_seed, rng_from_seed, STREAM_INFERENCE, STREAM_SAMPLING};
use epinews::topic_model::{
    export_posterior, generate_synthetic, load_matrix_row, run_inference, GenerativeSpec,
    Hyperparameters, XiConcentration,
};
use epinews::trend_sampling::{cumulative_total, sample_counts};
use epinews::Error;
use rand_distr::Distribution;

use crate::config::FileConfig;
use crate::{
    CompareArgs, EstimateArgs, EvaluateArgs, FitTopicsArgs, IngestArgs, SampleArgs, SynthArgs,
};

type Result<T = ()> = std::result::Result<T, Error>;

/// Global settings resolved from flags and the optional config file.
pub struct Context {
    pub seed: u64,
    pub jobs: usize,
    pub file: FileConfig,
}

fn require<T>(value: Option<T>, what: &str) -> Result<T> {
    value.ok_or_else(|| Error::Config(format!("missing required option --{what}")))
}

pub fn ingest(_ctx: &Context, args: IngestArgs) -> Result {
    let corpus = load_corpus(&args.corpus)?;
    println!(
        "records {}  tokens {}  vocabulary {}  locations {}  time points {}",
        corpus.records().len(),
        corpus.token_total(),
        corpus.vocabulary().len(),
        corpus.locations().len(),
        corpus.time_horizon()
    );
    if let Some(out) = args.out {
        save_corpus(&corpus, &out)?;
        println!("canonical corpus written to {}", out.display());
    }
    Ok(())
}

fn hyper_from(
    ctx: &Context,
    k: usize,
    iterations: Option<usize>,
    pi: Option<f64>,
    alpha: Option<f64>,
    gamma: Option<f64>,
    beta: Option<f64>,
    mu: Option<f64>,
) -> Result<Hyperparameters> {
    let d = Hyperparameters::defaults_for(k);
    let hp = Hyperparameters {
        alpha_smooth: ctx.file.resolve(alpha, "alpha-smooth")?.unwrap_or(d.alpha_smooth),
        gamma_smooth: ctx.file.resolve(gamma, "gamma-smooth")?.unwrap_or(d.gamma_smooth),
        beta_smooth: ctx.file.resolve(beta, "beta-smooth")?.unwrap_or(d.beta_smooth),
        mu_smooth: ctx.file.resolve(mu, "mu-smooth")?.unwrap_or(d.mu_smooth),
        pi: ctx.file.resolve(pi, "pi")?.unwrap_or(d.pi),
        n_iterations: ctx
            .file
            .resolve(iterations, "iterations")?
            .unwrap_or(d.n_iterations),
        rng_seed: 0,
    };
    hp.validate()?;
    Ok(hp)
}

pub fn fit_topics(ctx: &Context, args: FitTopicsArgs) -> Result {
    let corpus = load_corpus(&args.corpus)?;
    let seeds = load_seed_spec(&args.seeds, corpus.vocabulary())?;
    for (topic, word) in seeds.unresolved_words(corpus.vocabulary()) {
        eprintln!("note: seed word {word:?} of topic {topic:?} is absent from the corpus (inert)");
    }
    let hp = hyper_from(
        ctx,
        seeds.num_topics(),
        args.iterations,
        args.pi,
        args.alpha_smooth,
        args.gamma_smooth,
        args.beta_smooth,
        args.mu_smooth,
    )?
    .with_seed(derive_seed(ctx.seed, STREAM_INFERENCE, 0));

    let posterior = run_inference(&corpus, &seeds, &hp)?;
    export_posterior(&posterior, &hp, &args.out_dir)?;

    let top = ctx.file.resolve(args.top_words, "top-words")?.unwrap_or(10);
    for (k, name) in posterior.topic_names.iter().enumerate() {
        let words: Vec<String> = posterior
            .top_words(k, top)
            .into_iter()
            .map(|(w, p)| format!("{} {:.4}", corpus.vocabulary().word(w), p))
            .collect();
        println!("topic {k} ({name}): {}", words.join(", "));
    }
    println!("posterior written to {}", args.out_dir.display());
    Ok(())
}

pub fn sample(ctx: &Context, args: SampleArgs) -> Result {
    let topic = ctx.file.resolve(args.topic, "topic")?.unwrap_or(0);
    let xi = load_matrix_row(&args.xi, topic)?;
    let total = match args.total {
        Some(t) => t,
        None => {
            let path = require(args.case_counts, "case-counts (or --total)")?;
            let counts = load_case_counts(&path, "disease", Granularity::Weekly)?;
            if counts.is_empty() {
                return Err(Error::Data(format!("{}: empty series", path.display())));
            }
            let through = args.through.unwrap_or(counts.len() - 1);
            cumulative_total(counts.values(), through)
        }
    };
    let out = sample_counts(&xi, total, derive_seed(ctx.seed, STREAM_SAMPLING, topic as u64))?;
    save_case_counts(&out.as_f64(), &args.out)?;
    println!(
        "sampled {} draws over {} time points -> {}",
        out.total(),
        out.values().len(),
        args.out.display()
    );
    Ok(())
}

fn load_series_csv(path: &Path) -> Result<Vec<f64>> {
    Ok(load_case_counts(path, "external", Granularity::Weekly)?
        .values()
        .to_vec())
}

pub fn estimate(ctx: &Context, args: EstimateArgs) -> Result {
    let counts = load_case_counts(&args.case_counts, "disease", Granularity::Weekly)?;
    let history = counts.values();
    let t = history.len();
    let external = match &args.external {
        Some(path) => Some(load_series_csv(path)?),
        None => None,
    };
    let method = require(ctx.file.resolve(args.method, "method")?, "method")?;
    let p = ctx.file.resolve(args.p, "p")?;
    let q = ctx.file.resolve(args.q, "q")?;

    let (estimate, model_json) = match method.as_str() {
        "arnet" => {
            let ext = external.clone().unwrap_or_default();
            let config = if args.cv {
                let grids = if ext.is_empty() {
                    CvGrids { q: vec![0], ..CvGrids::default() }
                } else {
                    CvGrids::default()
                };
                cross_validate(history, &ext, &grids, ctx.jobs)?
            } else {
                ArnetConfig {
                    p: p.unwrap_or(1),
                    q: q.unwrap_or(usize::from(!ext.is_empty())),
                    r: ctx.file.resolve(args.r, "r")?.unwrap_or(1),
                    s: ctx.file.resolve(args.s, "s")?.unwrap_or(0),
                    lambda1: ctx.file.resolve(args.lambda1, "lambda1")?.unwrap_or(0.0),
                    lambda2: ctx.file.resolve(args.lambda2, "lambda2")?.unwrap_or(0.0),
                }
            };
            if args.retrospective {
                config.validate_retrospective()?;
            } else {
                config.validate()?;
            }
            // estimating at t needs external through t + s
            let model = arnet_fit(&history[..t - 1], &ext, &config)?;
            let value = model.estimate(history, &ext, t)?;
            (value, serde_json::to_value(&model).unwrap())
        }
        "arma" => {
            let model = arma_fit(&history[..t - 1], p.unwrap_or(1), q.unwrap_or(1))?;
            let value = arma_forecast(&model, history, t)?;
            (value, serde_json::to_value(&model).unwrap())
        }
        "armax" => {
            let ext = external
                .clone()
                .ok_or_else(|| Error::Config("armax requires --external".into()))?;
            let model = armax_fit(&history[..t - 1], &ext, p.unwrap_or(1), q.unwrap_or(1))?;
            let value = armax_forecast(&model, history, &ext, t)?;
            (value, serde_json::to_value(&model).unwrap())
        }
        other => {
            return Err(Error::Config(format!(
                "unknown method {other:?} (expected arnet, arma, or armax)"
            )))
        }
    };

    println!("estimate at t={t}: {estimate}");
    if let Some(path) = args.model_out {
        let mut f = std::fs::File::create(&path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        writeln!(f, "{}", serde_json::to_string_pretty(&model_json).unwrap())
            .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
        println!("model written to {}", path.display());
    }
    Ok(())
}

struct EvalSetup {
    corpus: Option<TupleCorpus>,
    seeds: Option<SeedSpec>,
    counts: CaseCountSeries,
    opts: EvalOptions,
    train_end: usize,
    eval_end: usize,
    topic: usize,
}

fn eval_setup(ctx: &Context, args: &EvaluateArgs, needs_topics: bool) -> Result<EvalSetup> {
    let disease = ctx
        .file
        .resolve(args.disease.clone(), "disease")?
        .unwrap_or_else(|| "disease".to_string());
    let granularity: Granularity = ctx
        .file
        .resolve(args.granularity.clone(), "granularity")?
        .unwrap_or_else(|| "weekly".to_string())
        .parse()?;
    let counts = load_case_counts(&args.case_counts, disease, granularity)?;
    if counts.is_empty() {
        return Err(Error::Data(format!(
            "{}: empty case-count series",
            args.case_counts.display()
        )));
    }

    let (corpus, seeds) = if needs_topics {
        let corpus_path = require(args.corpus.clone(), "corpus")?;
        let seeds_path = require(args.seeds.clone(), "seeds")?;
        let corpus = load_corpus(&corpus_path)?;
        let seeds = load_seed_spec(&seeds_path, corpus.vocabulary())?;
        (Some(corpus), Some(seeds))
    } else {
        (None, None)
    };

    let k = seeds.as_ref().map_or(1, |s| s.num_topics());
    let hyper = hyper_from(ctx, k, args.iterations, None, None, None, None, None)?;
    let normalizer = match ctx
        .file
        .resolve(args.normalizer.clone(), "normalizer")?
        .as_deref()
    {
        None | Some("range") => Normalizer::Range,
        Some("mean") => Normalizer::Mean,
        Some(other) => {
            return Err(Error::Config(format!(
                "unknown normalizer {other:?} (expected range or mean)"
            )))
        }
    };
    let opts = EvalOptions {
        jobs: ctx.jobs,
        normalizer,
        ..EvalOptions::new(hyper)
    };
    let train_end = require(ctx.file.resolve(args.train_end, "train-end")?, "train-end")?;
    let eval_end = ctx
        .file
        .resolve(args.eval_end, "eval-end")?
        .unwrap_or(counts.len() - 1);
    let topic = ctx.file.resolve(args.topic, "topic")?.unwrap_or(0);
    Ok(EvalSetup { corpus, seeds, counts, opts, train_end, eval_end, topic })
}

fn make_plan(setup: &EvalSetup, method: Method, base_seed: u64) -> EvaluationPlan {
    EvaluationPlan {
        static_training_end: setup.train_end,
        evaluation_start: setup.train_end + 1,
        evaluation_end: setup.eval_end,
        method,
        topic_index: setup.topic,
        base_seed,
    }
}

pub fn evaluate(ctx: &Context, args: EvaluateArgs) -> Result {
    let method: Method = require(ctx.file.resolve(args.method.clone(), "method")?, "method")?
        .parse()?;
    let setup = eval_setup(ctx, &args, method.uses_topics())?;
    let plan = make_plan(&setup, method, ctx.seed);
    let cache = PosteriorCache::new();
    let result = run_evaluation(
        setup.corpus.as_ref(),
        setup.seeds.as_ref(),
        &setup.counts,
        &plan,
        &setup.opts,
        &cache,
    )?;

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Config(format!("{}: {e}", args.out_dir.display())))?;
    write_result_csv(&result, args.out_dir.join(format!("{}.csv", method.name())))?;
    write_result_summary(&result, args.out_dir.join(format!("{}.summary.json", method.name())))?;
    println!(
        "{}: nrmse {:.4} over horizons {}..={}",
        method.name(),
        result.nrmse,
        plan.evaluation_start,
        plan.evaluation_end
    );
    Ok(())
}

pub fn compare(ctx: &Context, args: CompareArgs) -> Result {
    let spec = ctx
        .file
        .resolve(args.methods.clone(), "methods")?
        .unwrap_or_else(|| "all".to_string());
    let methods: Vec<Method> = if spec.trim() == "all" {
        Method::ALL.to_vec()
    } else {
        spec.split(',')
            .map(|m| m.trim().parse())
            .collect::<Result<_>>()?
    };
    if methods.is_empty() {
        return Err(Error::Config("no methods selected".into()));
    }
    let needs_topics = methods.iter().any(Method::uses_topics);
    let setup = eval_setup(ctx, &args.eval, needs_topics)?;
    let plans: Vec<EvaluationPlan> = methods
        .iter()
        .map(|&m| make_plan(&setup, m, ctx.seed))
        .collect();
    let table = compare_methods(
        setup.corpus.as_ref(),
        setup.seeds.as_ref(),
        &setup.counts,
        &plans,
        &setup.opts,
    )?;

    std::fs::create_dir_all(&args.eval.out_dir)
        .map_err(|e| Error::Config(format!("{}: {e}", args.eval.out_dir.display())))?;
    write_comparison_csv(&table, args.eval.out_dir.join("comparison.csv"))?;
    for result in &table.results {
        write_result_csv(
            result,
            args.eval.out_dir.join(format!("{}.csv", result.method.name())),
        )?;
        write_result_summary(
            result,
            args.eval.out_dir.join(format!("{}.summary.json", result.method.name())),
        )?;
    }
    print!("{}", table.render());
    Ok(())
}

pub fn synth(ctx: &Context, args: SynthArgs) -> Result {
    let topics = ctx.file.resolve(args.topics, "topics")?.unwrap_or(2);
    let spec = GenerativeSpec {
        seeds_per_topic: ctx
            .file
            .resolve(args.seeds_per_topic, "seeds-per-topic")?
            .unwrap_or(4),
        token_budget: ctx.file.resolve(args.tokens, "tokens")?.unwrap_or(4000),
        rng_seed: ctx.seed,
        xi_conc: XiConcentration::Symmetric(0.6),
        ..GenerativeSpec::new(
            topics,
            ctx.file.resolve(args.locations, "locations")?.unwrap_or(1),
            ctx.file.resolve(args.time_points, "time-points")?.unwrap_or(30),
            ctx.file.resolve(args.vocab, "vocab")?.unwrap_or(80),
        )
    };
    let (corpus, seeds, truth) = generate_synthetic(&spec)?;

    let topic = ctx.file.resolve(args.topic, "topic")?.unwrap_or(0);
    if topic >= topics {
        return Err(Error::Config(format!(
            "topic {topic} out of range (K = {topics})"
        )));
    }
    let scale = ctx.file.resolve(args.count_scale, "count-scale")?.unwrap_or(250.0);
    let noise_sd = ctx.file.resolve(args.noise_sd, "noise-sd")?.unwrap_or(0.0);
    let noise_ar = ctx.file.resolve(args.noise_ar, "noise-ar")?.unwrap_or(0.6);
    let mut rng = rng_from_seed(derive_seed(ctx.seed, 100, 0));
    let normal = rand_distr::Normal::new(0.0, 1.0).unwrap();
    let mut ar = 0.0;
    let counts: Vec<f64> = truth
        .xi
        .row(topic)
        .iter()
        .map(|x| {
            let w: f64 = normal.sample(&mut rng);
            ar = noise_ar * ar + noise_sd * w;
            (scale * x + ar).max(0.0)
        })
        .collect();

    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::Config(format!("{}: {e}", args.out_dir.display())))?;
    save_corpus(&corpus, args.out_dir.join("corpus.jsonl"))?;
    epinews::corpus::save_seed_spec(&seeds, args.out_dir.join("seeds.json"))?;
    save_case_counts(&counts, args.out_dir.join("counts.csv"))?;
    let hp = Hyperparameters::defaults_for(topics).with_seed(ctx.seed);
    export_posterior(&truth, &hp, args.out_dir.join("truth"))?;
    println!(
        "synthetic corpus: {} records, {} tokens, K={topics}, T={}, counts driven by topic {topic} -> {}",
        corpus.records().len(),
        corpus.token_total(),
        corpus.time_horizon(),
        args.out_dir.display()
    );
    Ok(())
}

// nrmse_with is re-exported through this module for integration tests
// that score CLI outputs.
#[allow(unused_imports)]
pub(crate) use nrmse_with as _nrmse_with;
