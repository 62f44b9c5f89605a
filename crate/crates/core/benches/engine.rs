use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use cwm_core::exec::Exec;
use cwm_core::table::{circulant_table, TableFixture, TableOptions};
use cwm_core::weilsearch::{weil_enumerate_with, SolutionCache, WeilOptions};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn table(c: &mut Criterion) {
    let fixture = TableFixture::strassler();
    let mut group = c.benchmark_group("table_v60_s10");
    group.sample_size(10);
    for (name, exec) in MODES {
        let opts = TableOptions {
            vmax: 60,
            exec,
            ..Default::default()
        };
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| circulant_table(&fixture, &opts, &SolutionCache::in_memory()))
        });
    }
    group.finish();
}

fn weil(c: &mut Criterion) {
    let mut group = c.benchmark_group("weil_enumerate");
    group.sample_size(10);
    for (v, n) in [(31u64, 36u64), (60, 36)] {
        for (name, exec) in MODES {
            let opts = WeilOptions {
                exec,
                ..Default::default()
            };
            group.bench_with_input(
                BenchmarkId::new(name, format!("{v}_{n}")),
                &(v, n),
                |b, &(v, n)| b.iter(|| weil_enumerate_with(v, n, &opts).unwrap()),
            );
        }
    }
    group.finish();
}

criterion_group!(benches, table, weil);
criterion_main!(benches);
