use criterion::{criterion_group, criterion_main, Criterion};
use rankdiv::transport::{co_rpt_step, gaussian_cloud, rank_prox, rpt_step, ToyTarget};
use rankdiv::{CoRptConfig, EntropyKind, EntropySpec, ParticleState, TransportConfig};

fn prox(c: &mut Criterion) {
    let u0: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 * 0.5 + 0.1).collect();
    let spec = EntropySpec::new(EntropyKind::Kl);
    c.bench_function("rank_prox_N1000_K128", |b| b.iter(|| rank_prox(&u0, 128, &spec, 0.5, 10, 0.05).unwrap()));
}

fn steps(c: &mut Criterion) {
    let x = gaussian_cloud(1000, 2, 1).unwrap();
    let y = ToyTarget::TwoBlobs.sample(1000, 2).unwrap();
    let state = ParticleState::new(x, 3);
    let rpt = TransportConfig::toy_2d();
    let corpt = CoRptConfig::toy_2d();
    let mut g = c.benchmark_group("outer_step_N1000");
    g.sample_size(10);
    g.bench_function("rpt", |b| b.iter(|| rpt_step(&state, &y, &rpt, 0).unwrap()));
    g.bench_function("co_rpt", |b| b.iter(|| co_rpt_step(&state, &y, &corpt, 0).unwrap()));
    g.finish();
}

criterion_group!(benches, prox, steps);
criterion_main!(benches);
