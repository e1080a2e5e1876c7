use std::f64::consts::TAU;

use proptest::prelude::*;
use relaynet::gsnr::{decompose, msuee_af, msuee_df_bpsk, msuee_ef, single_relay_gsnr};
use relaynet::network::Topology;
use relaynet::{
    gaussian_density, make_pam, make_psk, make_qam, Complex64, GaussianLink, GridSpec, RelayFunction, RelayKind,
};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decompose_recovers_gain_and_error(
        power in 0.01f64..100.0,
        a_re in -5.0f64..5.0,
        a_im in -5.0f64..5.0,
        noise in 0.001f64..50.0,
    ) {
        let a = c(a_re, a_im);
        prop_assume!(a.norm() > 1e-2);
        // y = a x + t with E[x* t] = 0, E|t|² = noise
        let r = decompose(power, a * power, a.norm_sqr() * power + noise).unwrap();
        prop_assert!((r.alpha - a.inv()).norm() <= 1e-9 * a.inv().norm());
        let expected = noise / a.norm_sqr();
        prop_assert!((r.msuee - expected).abs() <= 1e-8 * expected.max(power));
        prop_assert!((r.gsnr * r.msuee - power).abs() <= 1e-9 * power);
    }

    #[test]
    fn gsnr_ignores_output_scaling(
        power in 0.01f64..100.0,
        scale in 0.01f64..100.0,
        phase in 0.0f64..TAU,
        noise in 0.01f64..10.0,
    ) {
        let base = decompose(power, c(power, 0.0), power + noise).unwrap();
        let k = Complex64::from_polar(scale, phase);
        let scaled = decompose(power, k * power, k.norm_sqr() * (power + noise)).unwrap();
        prop_assert!((base.gsnr - scaled.gsnr).abs() <= 1e-9 * base.gsnr);
    }

    #[test]
    fn single_relay_gsnr_monotone(e in 0.0f64..5.0, de in 1e-3f64..1.0, p in 0.01f64..50.0, pr in 0.01f64..50.0) {
        prop_assert!(single_relay_gsnr(e + de, p, pr) < single_relay_gsnr(e, p, pr));
        prop_assert!(single_relay_gsnr(e, p, pr * 1.5) > single_relay_gsnr(e, p, pr));
    }

    #[test]
    fn ef_msuee_below_af_and_df(p in 0.01f64..30.0) {
        let d = gaussian_density(&make_psk(2, p).unwrap(), GaussianLink::unit(), GridSpec::default()).unwrap();
        let ef = msuee_ef(&d).unwrap();
        prop_assert!(ef > 0.0);
        prop_assert!(ef <= msuee_af().min(msuee_df_bpsk(p).unwrap()));
    }

    #[test]
    fn relay_maps_meet_power_constraint(p in 0.05f64..20.0, pr in 0.05f64..20.0, m in prop::sample::select(vec![2usize, 4])) {
        let con = make_pam(m, p).unwrap();
        let d = gaussian_density(&con, GaussianLink::unit(), GridSpec::default()).unwrap();
        for f in [RelayFunction::af_for(&d, pr).unwrap(), RelayFunction::df(&d, pr).unwrap(), RelayFunction::ef(&d, pr).unwrap()] {
            let moments = f.conditional_moments(&d).unwrap();
            let out: f64 = moments.iter().zip(con.priors()).map(|(m, q)| q * m.power).sum();
            prop_assert!((out - pr).abs() <= 1e-8 * pr, "{:?}: {} vs {}", f.kind(), out, pr);
        }
    }

    #[test]
    fn psk_posterior_mean_rotates(m in prop::sample::select(vec![2usize, 4, 8]), p in 0.1f64..10.0, rho in 0.0f64..6.0, theta in 0.0f64..TAU, k in 0usize..8) {
        let d = gaussian_density(&make_psk(m, p).unwrap(), GaussianLink::unit(), GridSpec::default()).unwrap();
        let r = Complex64::from_polar(rho, theta);
        let w = Complex64::from_polar(1.0, TAU * (k % m) as f64 / m as f64);
        let lhs = d.posterior_mean(r * w).mean;
        let rhs = w * d.posterior_mean(r).mean;
        prop_assert!((lhs - rhs).norm() <= 1e-9 * rhs.norm().max(1e-12));
    }

    #[test]
    fn constellations_have_requested_power(p in 1e-3f64..1e3, m in prop::sample::select(vec![4usize, 16, 64])) {
        for con in [make_psk(m, p).unwrap(), make_pam(m, p).unwrap(), make_qam(m, p).unwrap()] {
            prop_assert!((con.power() - p).abs() <= 1e-12 * p);
            prop_assert!((con.priors().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn topology_text_round_trips(gains in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..5), p in 0.1f64..10.0) {
        let gains: Vec<Complex64> = gains.into_iter().map(|(a, b)| c(a, b)).filter(|g| g.norm() > 1e-3).collect();
        prop_assume!(!gains.is_empty());
        let t = Topology::parallel(RelayKind::Ef, &gains, p, 2.0 * p).unwrap();
        let back: Topology = t.to_text().parse().unwrap();
        prop_assert_eq!(back, t);
    }
}

#[test]
fn topology_file_with_comments_and_gains() {
    let text = "\
# two-branch network
node S source power=2
node A relay ef power=1
node B relay df power=1.5
node D destination
edge S A gain=0.5,1
edge S B
edge A D gain=2
edge B D
";
    let t: Topology = text.parse().unwrap();
    assert_eq!(t.relays().len(), 2);
    assert_eq!(t.source_power(), 2.0);
    assert!(t.has_independent_inputs());
    let a = t.index_of("A").unwrap();
    assert_eq!(t.node(a).incoming[0].1, c(0.5, 1.0));
}

#[test]
fn topology_file_errors() {
    for bad in [
        "node S source\nnode D destination\nedge S D\nedge S D",
        "node S source\nnode R relay\nnode D destination",
        "node S source\nnode R relay ef colour=red\nnode D destination",
        "node S source\nnode R relay xf\nnode D destination",
        "node S source power=abc\nnode D destination\nedge S D",
        "node D destination",
    ] {
        assert!(bad.parse::<Topology>().is_err(), "accepted: {bad}");
    }
}
