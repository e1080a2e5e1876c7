use relaynet::network::Topology;
use relaynet::sim::{ber_sweep, simulate, SimConfig, SweepPoint};
use relaynet::{make_psk, GridSpec, RelayKind};

fn cfg(samples: u64) -> SimConfig {
    SimConfig { samples, seed: 11, batches: 32, pilot_samples: 200_000 }
}

fn at(points: &[SweepPoint], p: f64, kind: RelayKind) -> &SweepPoint {
    points.iter().find(|s| s.power == p && s.kind == kind).unwrap()
}

/// a ≤ b within three combined standard errors.
fn le3(a: &SweepPoint, b: &SweepPoint) -> bool {
    a.ber <= b.ber + 3.0 * a.ber_stderr.hypot(b.ber_stderr)
}

#[test]
fn parallel_ef_has_lowest_ber() {
    let powers = [0.5, 2.0, 8.0];
    let pts = ber_sweep(
        |k, p| Topology::parallel_uniform(k, 2, p, p),
        &make_psk(2, 1.0).unwrap(),
        &powers,
        &RelayKind::STANDARD,
        GridSpec::default(),
        &cfg(400_000),
    )
    .unwrap();
    for p in powers {
        let ef = at(&pts, p, RelayKind::Ef);
        assert!(le3(ef, at(&pts, p, RelayKind::Af)) && le3(ef, at(&pts, p, RelayKind::Df)), "P={p}");
    }
}

#[test]
fn serial_ber_crossover() {
    let pts = ber_sweep(
        |k, p| Topology::serial_uniform(k, 2, p, p),
        &make_psk(2, 1.0).unwrap(),
        &[0.2, 10.0],
        &[RelayKind::Af, RelayKind::Df],
        GridSpec::default(),
        &cfg(400_000),
    )
    .unwrap();
    assert!(le3(at(&pts, 0.2, RelayKind::Af), at(&pts, 0.2, RelayKind::Df)));
    assert!(le3(at(&pts, 10.0, RelayKind::Df), at(&pts, 10.0, RelayKind::Af)));
}

#[test]
fn qpsk_ef_errors_uncorrelated() {
    let p = 2.0;
    let t = Topology::parallel_uniform(RelayKind::Ef, 2, p, p).unwrap();
    let r = simulate(&t, &make_psk(4, p).unwrap(), GridSpec::default(), &cfg(300_000)).unwrap();
    let (c, se) = r.correlation_between("R1", "R2").unwrap();
    assert!(c.norm() < 3.0 * se, "{c} ± {se}");
}
