//! Benchmarks for the hot paths: network forward/backward, channel fading,
//! Bessel evaluation, and a full toy search.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::Rng;

use coordtune::channel::gg_sample;
use coordtune::grid::{AxisValue, HyperparamGrid, ParamAxis};
use coordtune::seed::rng_from;
use coordtune::special::bessel_k;
use coordtune::tuner::{marginal_search, SearchConfig};
use coordtune::{ActivationKind, HyperparamPoint, LossKind, NetworkSpec, NetworkState, OptimizerKind};

fn bench_network(c: &mut Criterion) {
    let spec = NetworkSpec {
        input_dim: 2,
        output_dim: 16,
        hidden_layers: 2,
        hidden_width: 50,
        activation: ActivationKind::Relu,
    };
    let net = NetworkState::init(spec, OptimizerKind::from_tag("adam", 0.01).unwrap(), 1);
    let mut rng = rng_from(2);
    let inputs: Vec<Vec<f64>> = (0..256)
        .map(|_| vec![rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)])
        .collect();
    let targets: Vec<usize> = (0..256).map(|_| rng.gen_range(0..16)).collect();

    c.bench_function("forward_256x2-50-50-16", |b| {
        b.iter(|| net.forward(black_box(&inputs)).unwrap())
    });
    c.bench_function("backward_256x2-50-50-16", |b| {
        b.iter(|| {
            net.backward(black_box(&inputs), black_box(&targets), LossKind::SoftmaxCe)
                .unwrap()
        })
    });
}

fn bench_channel(c: &mut Criterion) {
    c.bench_function("gg_sample_4096", |b| {
        let mut rng = rng_from(3);
        b.iter(|| gg_sample(&mut rng, 4.2, 1.4, black_box(4096)))
    });
    c.bench_function("bessel_k_frac_order", |b| {
        b.iter(|| bessel_k(black_box(2.8), black_box(1.7)).unwrap())
    });
}

fn toy_grid() -> HyperparamGrid {
    let ints = |lo: i64, hi: i64| (lo..=hi).map(AxisValue::Int).collect();
    HyperparamGrid::new(vec![
        ParamAxis::numeric("a", ints(1, 10)),
        ParamAxis::numeric("b", ints(1, 10)),
        ParamAxis::numeric("c", ints(1, 10)),
    ])
    .unwrap()
}

fn bench_search(c: &mut Criterion) {
    let grid = toy_grid();
    let init = grid
        .parse_point(&serde_json::json!({ "a": 10, "b": 10, "c": 10 }))
        .unwrap();
    let obj = |p: &HyperparamPoint, _seed: u64| {
        ["a", "b", "c"]
            .iter()
            .map(|id| (p.f64(id).unwrap() - 3.0).powi(2))
            .sum::<f64>()
    };
    let cfg = SearchConfig::default();
    c.bench_function("marginal_search_toy_3x10", |b| {
        b.iter(|| marginal_search(black_box(&grid), &init, &obj, &cfg).unwrap())
    });
}

criterion_group!(benches, bench_network, bench_channel, bench_search);
criterion_main!(benches);
