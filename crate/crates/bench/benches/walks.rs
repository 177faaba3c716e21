use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use dpsw_bench::texture;
use dpsw_core::dataset::extract_rasters;
use dpsw_core::eval::{cross_validate, DEFAULT_RIDGE};
use dpsw_core::walk::run_all_walks_serial;
use dpsw_core::{DescriptorConfig, Rule, WalkMap};

fn walk_pass(c: &mut Criterion) {
    let raster = texture(200, 7);
    let mut group = c.benchmark_group("walk pass 200x200");
    group.throughput(Throughput::Elements(raster.len() as u64));
    group.sample_size(10);
    for (rule, k) in [
        (Rule::Min, 0),
        (Rule::Min, 5),
        (Rule::Max, 0),
        (Rule::Max, 5),
    ] {
        let map = WalkMap::new(&raster, rule, k);
        for memory in [0usize, 3, 6] {
            group.bench_with_input(
                BenchmarkId::new(format!("{rule} k={k}"), memory),
                &memory,
                |b, &mu| b.iter(|| run_all_walks_serial(&map, mu)),
            );
        }
    }
    group.finish();
}

fn map_build(c: &mut Criterion) {
    let raster = texture(200, 7);
    c.bench_function("map build 200x200", |b| {
        b.iter(|| WalkMap::new(&raster, Rule::Min, 3))
    });
}

fn image_features(c: &mut Criterion) {
    let raster = texture(64, 3);
    let config = DescriptorConfig::default();
    let mut group = c.benchmark_group("features");
    group.sample_size(10);
    group.bench_function("psi_min 64x64", |b| b.iter(|| config.extract(&raster)));
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let items: Vec<(String, _)> = (0..40)
        .map(|i| (format!("c{}", i % 4), texture(24, i as u64 / 4)))
        .collect();
    let config = DescriptorConfig::default();
    let data = extract_rasters(&items, &config)
        .unwrap()
        .to_dataset()
        .unwrap();
    let mut group = c.benchmark_group("lda");
    group.sample_size(10);
    group.bench_function("10-fold cv, 280 features", |b| {
        b.iter(|| cross_validate(&data, 10, 0, DEFAULT_RIDGE).unwrap())
    });
    group.finish();
}

criterion_group!(benches, walk_pass, map_build, image_features, evaluation);
criterion_main!(benches);
