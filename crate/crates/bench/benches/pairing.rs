use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use microyoung::{make_bump, parse_kernel};
use microyoung_bench::kernels_1d;

fn pairing(c: &mut Criterion) {
    let phi = make_bump(1, 1.0, 2);
    for u in kernels_1d() {
        c.bench_function(&format!("pair_scaled/{}", u.label()), |b| {
            b.iter(|| {
                u.pair_scaled(&phi, black_box(&[0.01, 0.0]), black_box(0.01))
                    .unwrap()
            })
        });
    }
    let u = parse_kernel("powerlaw@0:-1", 2).unwrap();
    let phi2 = make_bump(2, 1.0, 2);
    c.bench_function("pair_scaled/2d-powerlaw", |b| {
        b.iter(|| {
            u.pair_scaled(&phi2, black_box(&[0.05, 0.02]), black_box(0.1))
                .unwrap()
        })
    });
}

criterion_group!(benches, pairing);
criterion_main!(benches);
