use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use varjack::lcs::{lcs_bitparallel, lcs_dp};
use varjack::RandomSource;
use varjack_bench::random_word;

fn dp_vs_bitparallel(c: &mut Criterion) {
    let mut group = c.benchmark_group("lcs");
    let mut rng = RandomSource::new(1, 0);
    for len in [64usize, 256, 1024] {
        let x = random_word(&mut rng, len, 2);
        let y = random_word(&mut rng, len, 2);
        group.bench_with_input(BenchmarkId::new("dp", len), &len, |b, _| {
            b.iter(|| lcs_dp(black_box(&x), black_box(&y)))
        });
        group.bench_with_input(BenchmarkId::new("bitparallel", len), &len, |b, _| {
            b.iter(|| lcs_bitparallel(black_box(&x), black_box(&y)))
        });
    }
    group.finish();
}

criterion_group!(benches, dp_vs_bitparallel);
criterion_main!(benches);
