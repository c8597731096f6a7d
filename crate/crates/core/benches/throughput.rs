use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rapidkit_core::corpus::{synthesize_corpus, CorpusEntry, NamingConvention, SynthOptions};
use rapidkit_core::exec::Execution;
use rapidkit_core::syntax::{parse_routine, print_routine};
use rapidkit_core::transforms::{TaskKind, TransformPolicy};
use rapidkit_core::validator::validate;

const ROUTINES: usize = 2_000;

fn corpus() -> (Vec<CorpusEntry>, NamingConvention, TransformPolicy) {
    let convention = NamingConvention::new(Default::default()).expect("default convention");
    let policy = TransformPolicy::default();
    let entries = synthesize_corpus(11, ROUTINES, &convention, &policy, &SynthOptions::default()).expect("synthesis");
    (entries, convention, policy)
}

fn modes() -> Vec<(&'static str, Execution)> {
    let mut modes = vec![("sequential", Execution::Sequential)];
    if Execution::parallel_available() {
        modes.push(("parallel", Execution::Parallel));
    }
    modes
}

fn bench_validation(c: &mut Criterion) {
    let (entries, convention, policy) = corpus();
    let jobs: Vec<(usize, TaskKind)> =
        (0..entries.len()).flat_map(|i| TaskKind::ALL.into_iter().map(move |t| (i, t))).collect();
    let outputs: Vec<_> = jobs
        .iter()
        .map(|&(i, t)| parse_routine(&entries[i].oracle_outputs[&t]).expect("oracle output parses"))
        .collect();
    let mut group = c.benchmark_group("validate_oracle_outputs");
    group.throughput(Throughput::Elements(jobs.len() as u64));
    for (name, mode) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let indices: Vec<usize> = (0..jobs.len()).collect();
                let clean = mode.map(&indices, |&j| {
                    let (i, task) = jobs[j];
                    let request = entries[i].request(task).expect("synthetic entries carry every task");
                    validate(&entries[i].routine, &outputs[j], request, &convention, &policy).is_correct
                });
                black_box(clean.iter().filter(|ok| **ok).count())
            })
        });
    }
    group.finish();
}

fn bench_round_trip(c: &mut Criterion) {
    let (entries, _, _) = corpus();
    let texts: Vec<String> = entries.iter().map(|e| print_routine(&e.routine)).collect();
    let mut group = c.benchmark_group("parse_print_round_trip");
    group.throughput(Throughput::Elements(texts.len() as u64));
    for (name, mode) in modes() {
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                let printed = mode.map(&texts, |t| print_routine(&parse_routine(t).expect("synthetic routine parses")));
                black_box(printed.len())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_validation, bench_round_trip);
criterion_main!(benches);
