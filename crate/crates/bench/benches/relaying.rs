use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use relaynet::gsnr::msuee_ef;
use relaynet::network::{evaluate_topology, Topology};
use relaynet::sim::{simulate, SimConfig};
use relaynet::{gaussian_density, make_psk, make_qam, Complex64, GaussianLink, GridSpec, RelayKind};

fn posterior_mean(c: &mut Criterion) {
    let d = gaussian_density(&make_qam(16, 4.0).unwrap(), GaussianLink::unit(), GridSpec::default()).unwrap();
    c.bench_function("posterior_mean_qam16", |b| b.iter(|| d.posterior_mean(black_box(Complex64::new(0.3, -1.1)))));
}

fn quadrature(c: &mut Criterion) {
    c.bench_function("msuee_ef_bpsk", |b| {
        b.iter(|| {
            let d = gaussian_density(&make_psk(2, black_box(2.0)).unwrap(), GaussianLink::unit(), GridSpec::default())
                .unwrap();
            msuee_ef(&d).unwrap()
        })
    });
    let t = Topology::hybrid_default(RelayKind::Ef, 2.0, 2.0).unwrap();
    let con = make_psk(2, 2.0).unwrap();
    c.bench_function("hybrid_ef_quadrature", |b| b.iter(|| evaluate_topology(&t, &con, GridSpec::default()).unwrap()));
}

fn monte_carlo(c: &mut Criterion) {
    let t = Topology::parallel_uniform(RelayKind::Ef, 2, 1.0, 1.0).unwrap();
    let con = make_psk(2, 1.0).unwrap();
    let cfg = SimConfig { samples: 100_000, seed: 1, batches: 32, pilot_samples: 10_000 };
    let mut g = c.benchmark_group("monte_carlo");
    g.sample_size(10);
    g.bench_function("parallel2_ef_1e5", |b| b.iter(|| simulate(&t, &con, GridSpec::default(), &cfg).unwrap()));
    g.finish();
}

criterion_group!(benches, posterior_mean, quadrature, monte_carlo);
criterion_main!(benches);
