use ant_core::engine::{Configuration, EngineConfig, Simulator};
use ant_core::highway::{detect, extract_candidate, periodic_suffix_candidates, verify_highway};
use ant_core::montecarlo::{random_initial, ExperimentSpec};
use ant_core::rule::RuleWord;
use criterion::{criterion_group, criterion_main, Criterion, Throughput};

fn stepping(c: &mut Criterion) {
    let rule: RuleWord = "LR".parse().unwrap();
    let mut group = c.benchmark_group("stepping");
    group.throughput(Throughput::Elements(1_000_000));
    group.bench_function("lr_1e6_steps", |b| {
        b.iter(|| {
            let mut sim = Simulator::new(
                rule.clone(),
                Configuration::white(),
                EngineConfig::default(),
            );
            sim.run(1_000_000).unwrap();
            sim.config().picture.nonzero_count()
        });
    });
    group.finish();
}

fn periodicity_scan(c: &mut Criterion) {
    let rule: RuleWord = "LLRL".parse().unwrap();
    let mut sim = Simulator::new(rule, Configuration::white(), EngineConfig::default());
    sim.run(300_000).unwrap();
    c.bench_function("suffix_scan_max_period_2048", |b| {
        b.iter(|| periodic_suffix_candidates(sim.trace(), 2048));
    });
}

fn detection(c: &mut Criterion) {
    let rule: RuleWord = "LR".parse().unwrap();
    c.bench_function("detect_lr_white", |b| {
        b.iter(|| {
            detect(
                &rule,
                Configuration::white(),
                20_000,
                512,
                &EngineConfig::default(),
            )
            .unwrap()
        });
    });
}

fn verification(c: &mut Criterion) {
    let rule: RuleWord = "LR".parse().unwrap();
    let report = detect(
        &rule,
        Configuration::white(),
        20_000,
        512,
        &EngineConfig::default(),
    )
    .unwrap();
    let highway = report.highway.unwrap();
    c.bench_function("verify_lr_104", |b| {
        b.iter(|| verify_highway(&highway).is_ok());
    });
    let config = highway.to_configuration();
    c.bench_function("extract_lr_104", |b| {
        b.iter(|| extract_candidate(&rule, &config, 104).unwrap());
    });
}

fn census_run(c: &mut Criterion) {
    let spec = ExperimentSpec::new("LLLLR".parse().unwrap(), 1, 42);
    c.bench_function("census_single_llllr_run", |b| {
        let engine = EngineConfig {
            trace_capacity: 8_192,
            ..EngineConfig::default()
        };
        b.iter(|| {
            detect(
                &spec.ruleword,
                random_initial(&spec, 0),
                spec.steps_per_run,
                spec.max_period,
                &engine,
            )
            .unwrap()
        });
    });
}

criterion_group!(
    benches,
    stepping,
    periodicity_scan,
    detection,
    verification,
    census_run
);
criterion_main!(benches);
