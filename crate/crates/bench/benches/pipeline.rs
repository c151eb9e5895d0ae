use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fel_core::function::harmonic_corpus;
use fel_core::lipschitz::b_coefficient;
use fel_core::{dimensions, energy_m, presets, solve_ndhs, FractalSystem, LipschitzParams, Sampler};

fn build(c: &mut Criterion) {
    let mut group = c.benchmark_group("build");
    for level in [4, 6] {
        group.bench_with_input(BenchmarkId::new("gasket2", level), &level, |b, &level| {
            b.iter(|| FractalSystem::build(presets::gasket2_maps(), level).unwrap())
        });
    }
    group.bench_function("snowflake/4", |b| {
        b.iter(|| FractalSystem::build(presets::snowflake_maps(), 4).unwrap())
    });
    group.finish();
}

fn ndhs(c: &mut Criterion) {
    let gasket = FractalSystem::build(presets::gasket2_maps(), 1).unwrap();
    let snowflake = FractalSystem::build(presets::snowflake_maps(), 1).unwrap();
    c.bench_function("solve_ndhs/gasket2", |b| b.iter(|| solve_ndhs(black_box(&gasket)).unwrap()));
    c.bench_function("solve_ndhs/snowflake", |b| b.iter(|| solve_ndhs(black_box(&snowflake)).unwrap()));
}

fn energy(c: &mut Criterion) {
    let g = FractalSystem::build(presets::gasket2_maps(), 8).unwrap();
    let hs = solve_ndhs(&g).unwrap();
    let f = harmonic_corpus(&g, 1, 0)[0].sample(&g, &hs, 8).unwrap();
    c.bench_function("energy_m/gasket2/8", |b| b.iter(|| energy_m(&g, &hs, black_box(&f)).unwrap()));
}

fn coefficients(c: &mut Criterion) {
    let g = FractalSystem::build(presets::gasket2_maps(), 6).unwrap();
    let hs = solve_ndhs(&g).unwrap();
    let params = LipschitzParams::natural(&g, &dimensions(&g, &hs).unwrap());
    let f = harmonic_corpus(&g, 1, 0)[0].sample(&g, &hs, 6).unwrap();
    let mut group = c.benchmark_group("b_coefficient/gasket2/6");
    for m in [1, 3] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| b_coefficient(&g, black_box(&f), m, &params).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, build, ndhs, energy, coefficients);
criterion_main!(benches);
