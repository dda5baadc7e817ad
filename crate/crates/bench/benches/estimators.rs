use criterion::{criterion_group, criterion_main, Criterion};
use microyoung::{
    check_young_microlocal, estimate_beta_star, estimate_holder_exponent, estimate_local_sobolev,
    parse_kernel,
};
use microyoung_bench::{kernels_1d, unit_region};

fn estimators(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimators");
    g.sample_size(10);
    let region = unit_region(1);
    for u in kernels_1d() {
        let name = u.label().to_string();
        g.bench_function(format!("holder/{name}"), |b| {
            b.iter(|| estimate_holder_exponent(&u, &region).unwrap())
        });
        g.bench_function(format!("beta_star/{name}"), |b| {
            b.iter(|| estimate_beta_star(&u, &region, &[2.0, 4.0, 8.0, f64::INFINITY]).unwrap())
        });
        g.bench_function(format!("sobolev/{name}"), |b| {
            b.iter(|| estimate_local_sobolev(&u, &[0.0, 0.0]).unwrap())
        });
    }
    let f = parse_kernel("cusp@0:0.6", 1).unwrap();
    let h = parse_kernel("powerlaw@0:-0.5", 1).unwrap();
    g.bench_function("product_check/cusp-power", |b| {
        b.iter(|| check_young_microlocal(&f, &h).unwrap())
    });
    g.finish();
}

criterion_group!(benches, estimators);
criterion_main!(benches);
