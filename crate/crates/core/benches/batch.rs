use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use vowelmark::audio::VowelRecording;
use vowelmark::pipeline::extract_batch;
use vowelmark::synth::{synth_cohort, CohortProfiles};
use vowelmark::{Config, Execution};

fn cohort(n_per_group: usize) -> Vec<VowelRecording> {
    synth_cohort(n_per_group, &CohortProfiles::default(), 7, Execution::Parallel)
        .expect("cohort")
        .into_iter()
        .map(|r| r.recording)
        .collect()
}

fn extraction(c: &mut Criterion) {
    let recs = cohort(2);
    let cfg = Config::default();
    let mut group = c.benchmark_group("extract_batch");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_with_input(BenchmarkId::from_parameter(format!("{exec:?}")), &recs, |b, recs| {
            b.iter(|| extract_batch(recs, &cfg, exec).expect("extract"))
        });
    }
    group.finish();
}

fn synthesis(c: &mut Criterion) {
    let mut group = c.benchmark_group("synth_cohort");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        group.bench_function(format!("{exec:?}"), |b| {
            b.iter(|| synth_cohort(2, &CohortProfiles::default(), 3, exec).expect("cohort"))
        });
    }
    group.finish();
}

criterion_group!(benches, extraction, synthesis);
criterion_main!(benches);
