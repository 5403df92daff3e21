use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use claimscope::classifiers::logistic::{train_logistic, TrainingConfig};
use claimscope::corpus::Claim;
use claimscope::eval::{aggregate_judge, auroc, judge_prf, SimilarityMatrix};
use claimscope::features::{FeatureSet, FeatureSpace, LinguisticConfig};
use claimscope::oa_parser::fuzzy::fuzzy_match_recitation;

const WORDS: &[&str] = &[
    "apparatus", "comprising", "processor", "configured", "signal", "module",
    "substantially", "threshold", "coupled", "memory", "wherein", "interface",
    "transmitting", "receiving", "determining", "value", "circuit", "plurality",
    "first", "second", "element", "portion", "layer", "assembly",
];

fn synthetic_text(rng: &mut ChaCha8Rng, words: usize) -> String {
    (0..words)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn bench_fuzzy_matching(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let claim = synthetic_text(&mut rng, 120);
    let mut group = c.benchmark_group("fuzzy_match");
    for needle_words in [3usize, 8, 20] {
        // slice an in-claim span so the benchmark exercises both the exact
        // fast path and the windowed scan under light perturbation
        let tokens: Vec<&str> = claim.split(' ').collect();
        let start = 40 % (tokens.len() - needle_words);
        let verbatim = tokens[start..start + needle_words].join(" ");
        let perturbed = verbatim.replacen(' ', "  ", 1).to_uppercase();
        group.bench_with_input(
            BenchmarkId::new("verbatim", needle_words),
            &verbatim,
            |b, needle| b.iter(|| fuzzy_match_recitation(needle, &claim, 0.8)),
        );
        group.bench_with_input(
            BenchmarkId::new("perturbed", needle_words),
            &perturbed,
            |b, needle| b.iter(|| fuzzy_match_recitation(needle, &claim, 0.8)),
        );
    }
    group.finish();
}

fn bench_auroc(c: &mut Criterion) {
    let mut group = c.benchmark_group("auroc");
    for n in [100usize, 1_000, 10_000] {
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        // quantized scores force heavy midrank tie handling
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..50) as f64 / 50.0).collect();
        let labels: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| auroc(&scores, &labels).unwrap())
        });
    }
    group.finish();
}

fn bench_judge_aggregation(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let mut per_claim = Vec::new();
    for _ in 0..2_000 {
        let n = rng.gen_range(0..=4);
        let m = rng.gen_range(0..=4);
        let scores: Vec<f64> = (0..n * m).map(|_| rng.gen_range(0.0..100.0)).collect();
        let matrix = SimilarityMatrix::new(n, m, scores).unwrap();
        per_claim.push(judge_prf(&matrix, 75.0));
    }
    c.bench_function("aggregate_judge/2000_claims", |b| {
        b.iter(|| aggregate_judge(&per_claim, 75.0))
    });
}

fn bench_vectorization(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let train_texts: Vec<String> = (0..500).map(|_| synthetic_text(&mut rng, 80)).collect();
    let space = FeatureSpace::fit(
        &train_texts,
        FeatureSet::All,
        20_000,
        LinguisticConfig::default(),
    )
    .unwrap();
    let claim = Claim {
        number: 1,
        text: synthetic_text(&mut rng, 80),
        parent_numbers: vec![],
        application_id: "bench".into(),
    };
    c.bench_function("featurize/all_features", |b| {
        b.iter(|| space.featurize(&claim, &[]))
    });
    c.bench_function("tfidf_fit/500_docs", |b| {
        b.iter(|| {
            FeatureSpace::fit(
                &train_texts,
                FeatureSet::TfidfOnly,
                20_000,
                LinguisticConfig::default(),
            )
            .unwrap()
        })
    });
}

fn bench_training(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(57);
    let train_texts: Vec<String> = (0..200).map(|_| synthetic_text(&mut rng, 60)).collect();
    let space = FeatureSpace::fit(
        &train_texts,
        FeatureSet::All,
        20_000,
        LinguisticConfig::default(),
    )
    .unwrap();
    let rows: Vec<_> = train_texts
        .iter()
        .enumerate()
        .map(|(i, text)| {
            let claim = Claim {
                number: 1,
                text: text.clone(),
                parent_numbers: vec![],
                application_id: format!("app-{i}"),
            };
            (space.featurize(&claim, &[]), text.contains("substantially"))
        })
        .collect();
    let features: Vec<_> = rows.iter().map(|(f, _)| f.clone()).collect();
    let labels: Vec<bool> = rows.iter().map(|(_, l)| *l).collect();
    let config = TrainingConfig {
        epochs: 50,
        ..TrainingConfig::default()
    };
    c.bench_function("train_logistic/200x50_epochs", |b| {
        b.iter(|| train_logistic(&features, &labels, space.dimension(), config.clone()).unwrap())
    });
}

criterion_group!(
    benches,
    bench_fuzzy_matching,
    bench_auroc,
    bench_judge_aggregation,
    bench_vectorization,
    bench_training
);
criterion_main!(benches);
