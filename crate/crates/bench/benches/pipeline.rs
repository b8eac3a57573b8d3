use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use xyf_bench::memory;
use xyf_core::circuit::{build_circuit, Basis, Init};
use xyf_core::decoder::decode;
use xyf_core::experiment::{run_memory_experiment, ExperimentConfig};
use xyf_core::lattice::{GeometrySpec, SpacetimeLattice};
use xyf_core::noise::NoiseParams;
use xyf_core::path_integral::{AnyonConfig, PathIntegralInstance};
use xyf_core::sampler::FrameSampler;
use xyf_core::syndrome::build_detector_graph;

fn build(c: &mut Criterion) {
    let mut g = c.benchmark_group("build");
    for l in [3u32, 5, 7] {
        let lat = SpacetimeLattice::new(GeometrySpec::rectangle(l, l, l)).unwrap();
        g.bench_with_input(BenchmarkId::new("circuit+graph", l), &lat, |b, lat| {
            b.iter(|| {
                let circ = build_circuit(lat, Some(Init::Z), Some(Basis::Z)).unwrap();
                black_box(build_detector_graph(&circ).unwrap())
            })
        });
    }
    g.finish();
}

fn sample_and_decode(c: &mut Criterion) {
    let mut g = c.benchmark_group("shots64");
    for l in [3u32, 5, 7] {
        let (circ, graph, mg) = memory(l);
        let np = NoiseParams::gate_and_meas(0.002);
        let sampler = FrameSampler::new(&circ, &np, &graph);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        g.bench_function(BenchmarkId::new("sample", l), |b| b.iter(|| black_box(sampler.sample(&mut rng))));
        let batch = sampler.sample(&mut rng);
        g.bench_function(BenchmarkId::new("decode", l), |b| {
            b.iter(|| (0..64).map(|lane| decode(&mg, &batch.fired(&graph, lane)).unwrap().predicted).fold(0, |a, p| a ^ p))
        });
    }
    g.finish();
}

fn end_to_end(c: &mut Criterion) {
    let mut g = c.benchmark_group("memory");
    g.sample_size(10);
    let cfg = ExperimentConfig {
        geometry: GeometrySpec::rectangle(5, 5, 5),
        noise: NoiseParams::gate_and_meas(0.002),
        shots: 2000,
        seed: 1,
        workers: 0,
    };
    g.bench_function("rectangle5_2000shots", |b| b.iter(|| black_box(run_memory_experiment(&cfg).unwrap().fails_z)));
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let p = PathIntegralInstance::periodic([3, 3, 2]).unwrap();
    let a = AnyonConfig::default();
    c.bench_function("path_integral/periodic_3x3x2", |b| b.iter(|| black_box(p.evaluate(&a, &[]).unwrap())));
}

criterion_group!(benches, build, sample_and_decode, end_to_end, oracle);
criterion_main!(benches);
