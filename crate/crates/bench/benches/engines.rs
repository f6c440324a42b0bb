use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use subsum_core::dyn_subset_sum::DynSubsetSum;
use subsum_core::k_sum::KSum;
use subsum_core::offline_subset_sum::run_offline;
use subsum_core::oracle::naive_subset_sum_trace;
use subsum_core::three_sum::ThreeSum;
use subsum_core::trace::{generate_trace, GenSpec, Mode, Trace};

fn trace(mode: Mode, bound: u64, oprs: usize, k: Option<usize>) -> Trace {
    let mut spec = GenSpec::new(mode, bound, oprs, 7);
    if mode != Mode::SubsetSum {
        spec.query_ratio = 0.2;
        spec.delete_ratio = 0.2;
    }
    spec.k = k.or(spec.k);
    generate_trace(&spec).expect("valid settings")
}

fn subset_sum(c: &mut Criterion) {
    let mut g = c.benchmark_group("subset_sum");
    g.sample_size(10);
    for tmax in [1024u64, 4096] {
        let t = trace(Mode::SubsetSum, tmax, 2 * tmax as usize, None);
        let ops = t.sum_ops().unwrap();
        g.bench_with_input(BenchmarkId::new("dynamic", tmax), ops, |b, ops| {
            b.iter(|| DynSubsetSum::new(tmax as usize, 1).unwrap().run(ops).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("offline", tmax), ops, |b, ops| {
            b.iter(|| run_offline(ops, tmax as usize).unwrap())
        });
        if tmax <= 1024 {
            g.bench_with_input(BenchmarkId::new("naive", tmax), ops, |b, ops| {
                b.iter(|| naive_subset_sum_trace(ops, tmax))
            });
        }
    }
    g.finish();
}

fn bounded_sums(c: &mut Criterion) {
    let mut g = c.benchmark_group("bounded_sums");
    g.sample_size(10);
    for rmax in [100u64, 1000] {
        let t = trace(Mode::ThreeSum, rmax, 2000, None);
        let ops = t.set_ops().unwrap();
        g.bench_with_input(BenchmarkId::new("3sum", rmax), ops, |b, ops| {
            b.iter(|| ThreeSum::new(rmax).unwrap().run(ops).unwrap())
        });
    }
    for k in [4usize, 5] {
        let t = trace(Mode::KSum, 30, 400, Some(k));
        let ops = t.set_ops().unwrap();
        g.bench_with_input(BenchmarkId::new("ksum", k), ops, |b, ops| {
            b.iter(|| KSum::new(k, 30).unwrap().run(ops).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, subset_sum, bounded_sums);
criterion_main!(benches);
