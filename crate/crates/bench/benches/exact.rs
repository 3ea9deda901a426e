use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use varjack::exact::{b_and_derivatives, correlation_table, hoeffding_energies, ExactConfig};
use varjack::lcs::LcsModel;

fn tables(c: &mut Criterion) {
    let cfg = ExactConfig::default();
    let mut group = c.benchmark_group("exact");
    group.sample_size(20);
    // LCS of two words of length n/2: 2^n binary states, 3^n ternary
    for (n, m) in [(8usize, 2u32), (12, 2), (8, 3)] {
        let model = LcsModel::uniform(n / 2, m).unwrap();
        let space = model.space().unwrap();
        let f = model.function().unwrap();
        let id = format!("n{n}_m{m}");
        group.bench_with_input(BenchmarkId::new("table_route", &id), &n, |b, _| {
            b.iter(|| b_and_derivatives(&correlation_table(&space, &f, &cfg).unwrap()))
        });
        group.bench_with_input(BenchmarkId::new("energy_route", &id), &n, |b, _| {
            b.iter(|| hoeffding_energies(&space, &f, &cfg).unwrap().b())
        });
    }
    group.finish();
}

criterion_group!(benches, tables);
criterion_main!(benches);
