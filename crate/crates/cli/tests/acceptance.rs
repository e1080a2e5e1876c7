//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.
//!
//! Reference values are computed here from first principles (closed forms and
//! direct trapezoid integrals) rather than through the library's quadrature.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use relaynet::gsnr::{mmse_relation, msuee_af, msuee_df_bpsk, msuee_ef};
use relaynet::network::{correlation_matrix, evaluate_topology, Topology};
use relaynet::relayfn::CustomMap;
use relaynet::sim::{compare_maps, simulate, SimConfig, SimResult};
use relaynet::{
    gaussian_density, make_pam, make_psk, q_function, ChannelDensity, Complex64, GaussianLink, GridSpec, RelayKind,
    SourceModel,
};

type Outcome = Result<String, String>;

fn spec() -> GridSpec {
    GridSpec::default()
}

fn bpsk_density(p: f64) -> ChannelDensity {
    gaussian_density(&make_psk(2, p).unwrap(), GaussianLink::unit(), spec()).unwrap()
}

fn phi(u: f64) -> f64 {
    (-0.5 * u * u).exp() / (2.0 * PI).sqrt()
}

/// ∫ φ(u) h(u) du by the trapezoid rule on [−14, 14].
fn gauss_expect(h: impl Fn(f64) -> f64) -> f64 {
    let n = 56_000;
    let step = 28.0 / n as f64;
    (0..=n)
        .map(|i| {
            let u = -14.0 + i as f64 * step;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            w * phi(u) * h(u)
        })
        .sum::<f64>()
        * step
}

/// J = E[E(x|r)²] for equiprobable real levels in unit noise, by direct integration.
fn estimator_power(levels: &[f64]) -> f64 {
    let post = |r: f64| {
        let w: Vec<f64> = levels.iter().map(|x| (-(r - x).powi(2) / 2.0).exp()).collect();
        let s: f64 = w.iter().sum();
        levels.iter().zip(&w).map(|(x, w)| x * w).sum::<f64>() / s
    };
    levels.iter().map(|x| gauss_expect(|u| post(x + u).powi(2))).sum::<f64>() / levels.len() as f64
}

fn ef_msuee_oracle(p: f64) -> f64 {
    let j = estimator_power(&[p.sqrt(), -p.sqrt()]);
    p * (p - j) / j
}

fn df_msuee_oracle(p: f64) -> f64 {
    let eps = q_function(p.sqrt());
    4.0 * p * eps * (1.0 - eps) / (1.0 - 2.0 * eps).powi(2)
}

fn single_relay_oracle(e: f64, p: f64, pr: f64) -> f64 {
    p / (e + (p + e) / pr)
}

/// Small deterministic generator for test inputs.
struct Lcg(u64);

impl Lcg {
    fn next(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
}

fn mc(t: &Topology, p: f64, samples: u64) -> SimResult {
    simulate(
        t,
        &make_psk(2, p).unwrap(),
        spec(),
        &SimConfig { samples, seed: 2024, batches: 40, pilot_samples: 1_000_000 },
    )
    .unwrap()
}

fn se(r: &SimResult) -> f64 {
    r.report.gsnr_stderr.unwrap()
}

/// a ≥ b within three combined standard errors.
fn ge3(a: f64, sa: f64, b: f64, sb: f64) -> bool {
    a >= b - 3.0 * (sa * sa + sb * sb).sqrt()
}

fn c1_table_limits() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for p in [1e-4, 1.0, 1e4] {
        ok &= msuee_af() == 1.0;
        notes.push(format!("AF({p:e})={}", msuee_af()));
    }
    let df_lo = msuee_df_bpsk(1e-6).unwrap();
    ok &= (df_lo / FRAC_PI_2 - 1.0).abs() < 0.01;
    let df_hi = msuee_df_bpsk(25.0).unwrap();
    ok &= df_hi < 1e-4;
    let ef_lo = msuee_ef(&bpsk_density(1e-4)).unwrap();
    ok &= (ef_lo - 1.0).abs() < 0.01;
    let ef_hi = msuee_ef(&bpsk_density(25.0)).unwrap();
    ok &= ef_hi < 1e-4;
    notes.push(format!("DF(1e-6)={df_lo:.6} DF(25)={df_hi:.3e} EF(1e-4)={ef_lo:.6} EF(25)={ef_hi:.3e}"));
    if ok {
        Ok(notes.join(" "))
    } else {
        Err(notes.join(" "))
    }
}

fn c2_tanh() -> Outcome {
    let mut worst: f64 = 0.0;
    for p in [0.25, 1.0, 4.0] {
        let d = bpsk_density(p);
        let s = p.sqrt();
        for i in 0..=2400 {
            let r = -6.0 * s + 12.0 * s * i as f64 / 2400.0;
            let got = d.posterior_mean(Complex64::new(r, 0.0)).mean.re;
            worst = worst.max((got - s * (s * r).tanh()).abs());
        }
    }
    let msg = format!("max |E[x|r] - sqrt(P) tanh(sqrt(P) r)| = {worst:.3e}");
    if worst < 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c3_ordering() -> Outcome {
    let mut ok = true;
    let mut min_gap = f64::INFINITY;
    for i in 0..50 {
        let p = 0.01 * 3000f64.powf(i as f64 / 49.0);
        let ef = msuee_ef(&bpsk_density(p)).unwrap();
        let bound = msuee_af().min(msuee_df_bpsk(p).unwrap());
        ok &= ef <= bound;
        if (0.5..=10.0).contains(&p) {
            ok &= ef < bound;
            min_gap = min_gap.min(bound - ef);
        }
        // the library value also agrees with the direct integral
        ok &= (ef - ef_msuee_oracle(p)).abs() <= 1e-7 * ef.max(1e-3);
    }
    let msg = format!("50 points, smallest strict gap on [0.5,10] = {min_gap:.4e}");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c4_optimality() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    let mut rng = Lcg(99);
    for p in [0.1f64, 1.0, 10.0] {
        let s = p.sqrt();
        let mut maps: Vec<CustomMap> = vec![Arc::new(move |r: Complex64| Complex64::new(s * (s * r.re).tanh(), 0.0))];
        for _ in 0..50 {
            let terms: Vec<(f64, f64, f64)> =
                (0..3).map(|_| (2.0 * rng.next() - 1.0, 0.2 + 2.0 * rng.next(), TAU * rng.next())).collect();
            let amp = 0.05 + 0.3 * rng.next();
            let width = 1.0 + 3.0 * rng.next() + s;
            maps.push(Arc::new(move |r: Complex64| {
                let x = r.re;
                let bump: f64 = terms.iter().map(|(c, w, ph)| c * (w * x + ph).sin()).sum();
                Complex64::new(s * (s * x).tanh() + amp * s * bump * (-x * x / (2.0 * width * width)).exp(), 0.0)
            }));
        }
        let cfg = SimConfig { samples: 1_000_000, seed: 7, batches: 40, pilot_samples: 10_000 };
        let c = compare_maps(&make_psk(2, p).unwrap(), Complex64::new(1.0, 0.0), &maps, &cfg).unwrap();
        let ef = ef_msuee_oracle(p);
        let mut worst_paired = f64::INFINITY;
        let mut worst_abs = f64::INFINITY;
        for i in 1..maps.len() {
            let (d, dse) = c.msuee_excess[i];
            worst_paired = worst_paired.min(d / dse);
            let r = &c.reports[i];
            worst_abs = worst_abs.min((r.msuee - ef) / r.msuee_stderr.unwrap());
            ok &= d >= -3.0 * dse && r.msuee >= ef - 3.0 * r.msuee_stderr.unwrap();
        }
        notes.push(format!("P={p}: min paired z {worst_paired:.1}, min z vs exact {worst_abs:.1}"));
    }
    notes.push(format!("{:.1}s", start.elapsed().as_secs_f64()));
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn c5_identity() -> Outcome {
    let mut ok = true;
    let mut worst_res: f64 = 0.0;
    let mut worst_mu = f64::NEG_INFINITY;
    let mut worst_oracle: f64 = 0.0;
    for p in [0.5, 1.0, 4.0] {
        for (con, levels) in [
            (make_psk(2, p).unwrap(), vec![p.sqrt(), -p.sqrt()]),
            (make_pam(4, p).unwrap(), {
                let d = (p / 5.0).sqrt();
                vec![-3.0 * d, -d, d, 3.0 * d]
            }),
        ] {
            let rel = mmse_relation(&gaussian_density(&con, GaussianLink::unit(), spec()).unwrap()).unwrap();
            let pred = (rel.mmsee - rel.mu * rel.mu / p) / (1.0 + rel.mu / p).powi(2);
            let res = (rel.mmsuee - pred).abs() / rel.mmsuee;
            worst_res = worst_res.max(res);
            worst_mu = worst_mu.max(rel.mu);
            // for the conditional mean, MMSEE = P − J and μ = J − P
            let j = estimator_power(&levels);
            worst_oracle = worst_oracle.max((rel.mmsee - (p - j)).abs()).max((rel.mu - (j - p)).abs());
            ok &= res < 1e-6 && rel.mu <= 0.0;
        }
    }
    let mut worst_g: f64 = 0.0;
    for p in [0.5, 1.0, 4.0] {
        let con = SourceModel::gaussian(p).unwrap().to_constellation().unwrap();
        let rel = mmse_relation(&gaussian_density(&con, GaussianLink::unit(), spec()).unwrap()).unwrap();
        worst_g = worst_g.max((rel.mu + p / (p + 1.0)).abs());
    }
    ok &= worst_g < 1e-6 && worst_oracle < 1e-7;
    let msg = format!(
        "max residual {worst_res:.2e}, max mu {worst_mu:.3e}, Gaussian |mu + P/(P+1)| {worst_g:.2e}, vs direct integral {worst_oracle:.1e}"
    );
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c6_rotation() -> Outcome {
    let mut rng = Lcg(5);
    let mut worst: f64 = 0.0;
    for m in [2usize, 4, 8] {
        let d = gaussian_density(&make_psk(m, 2.0).unwrap(), GaussianLink::unit(), spec()).unwrap();
        for _ in 0..100 {
            let r = Complex64::from_polar(4.0 * rng.next(), TAU * rng.next());
            let base = d.posterior_mean(r).mean;
            for k in 0..m {
                let w = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
                let lhs = d.posterior_mean(r * w).mean;
                worst = worst.max((lhs - w * base).norm() / (w * base).norm());
            }
        }
    }
    let msg = format!("max relative error {worst:.3e}");
    if worst < 1e-9 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c7_correlation() -> Outcome {
    let gains = [Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)];
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [2usize, 4, 8] {
        let c = correlation_matrix(RelayKind::Ef, &make_psk(m, 1.0).unwrap(), &gains, 1.0, spec()).unwrap();
        let v = c.get(0, 1).norm();
        ok &= v < 1e-6;
        notes.push(format!("EF psk{m} {v:.1e}"));
    }
    let c = correlation_matrix(RelayKind::Df, &make_psk(2, 1.0).unwrap(), &gains, 1.0, spec()).unwrap();
    let v = c.get(0, 1).norm();
    ok &= v < 1e-6;
    notes.push(format!("DF bpsk {v:.1e}"));
    let c = correlation_matrix(RelayKind::Af, &make_psk(4, 1.0).unwrap(), &gains, 1.0, spec()).unwrap();
    ok &= c.get(0, 1) == Complex64::new(0.0, 0.0) && c.get(1, 0) == Complex64::new(0.0, 0.0);
    notes.push(format!("AF {}", c.get(0, 1).norm()));
    if ok {
        Ok(notes.join(", "))
    } else {
        Err(notes.join(", "))
    }
}

fn c8_asymptotics() -> Outcome {
    let g = |k, p: f64| {
        evaluate_topology(&Topology::parallel_uniform(k, 2, p, p).unwrap(), &make_psk(2, p).unwrap(), spec())
            .unwrap()
            .gsnr
    };
    let hi = g(RelayKind::Ef, 100.0) / g(RelayKind::Af, 100.0);
    let lo = g(RelayKind::Ef, 0.01) / g(RelayKind::Df, 0.01);
    let ok = (hi / 3.0 - 1.0).abs() < 0.05 && (lo / FRAC_PI_2 - 1.0).abs() < 0.05;
    let msg = format!("EF/AF at P=100: {hi:.4} (target 3), EF/DF at P=0.01: {lo:.4} (target {FRAC_PI_2:.4})");
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c9_mc_agreement() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut check = |name: String, analytic: f64, r: &SimResult| {
        let z = (r.report.gsnr - analytic) / se(r);
        worst = worst.max(z.abs());
        if z.abs() >= 3.0 {
            ok = false;
            failures.push(format!("{name}: analytic {analytic:.6} mc {:.6} ({z:+.2} sigma)", r.report.gsnr));
        }
    };
    for p in [0.5, 2.0, 8.0] {
        let e = [(RelayKind::Af, 1.0), (RelayKind::Df, df_msuee_oracle(p)), (RelayKind::Ef, ef_msuee_oracle(p))];
        for (k, e) in e {
            let r = mc(&Topology::single(k, p, p).unwrap(), p, 1_000_000);
            check(format!("single {k} P={p}"), single_relay_oracle(e, p, p), &r);
        }
    }
    let p = 1.0;
    for (k, e) in [(RelayKind::Af, 1.0), (RelayKind::Df, df_msuee_oracle(p)), (RelayKind::Ef, ef_msuee_oracle(p))] {
        // symmetric L = 2: 4P / (2E + 1 + E/P) with α² = P_R/(P + E)
        let analytic = 4.0 * p / (2.0 * e + 1.0 + e / p);
        let r = mc(&Topology::parallel_uniform(k, 2, p, p).unwrap(), p, 1_000_000);
        check(format!("parallel {k}"), analytic, &r);
    }
    // serial AF, L = 2, P = P_R = 10, written out hop by hop
    let p: f64 = 10.0;
    let b1 = p / (p + 1.0);
    let b2 = p / (b1 * p + b1 + 1.0);
    let analytic = b1 * b2 * p / (b1 * b2 + b2 + 1.0);
    let r = mc(&Topology::serial_uniform(RelayKind::Af, 2, p, p).unwrap(), p, 1_000_000);
    check("serial af".into(), analytic, &r);
    let elapsed = start.elapsed().as_secs_f64();
    let msg = format!("13 cases, worst |z| = {worst:.2}, {elapsed:.1}s {}", failures.join("; "));
    if ok && elapsed < 120.0 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn c10_serial_ordering() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [0.2, 0.5, 1.0, 2.0, 5.0, 10.0] {
        let run = |k| mc(&Topology::serial_uniform(k, 2, p, p).unwrap(), p, 1_000_000);
        let (af, df, ef) = (run(RelayKind::Af), run(RelayKind::Df), run(RelayKind::Ef));
        let (ga, gd, ge) = (af.report.gsnr, df.report.gsnr, ef.report.gsnr);
        ok &= ge3(ge, se(&ef), ga, se(&af)) && ge3(ge, se(&ef), gd, se(&df));
        if p == 0.2 {
            ok &= ge3(ga, se(&af), gd, se(&df));
        }
        if p == 10.0 {
            ok &= ge3(gd, se(&df), ga, se(&af));
        }
        notes.push(format!("P={p}: af {ga:.4} df {gd:.4} ef {ge:.4}"));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn c11_last_relay() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    let p = 1.0;
    for first in RelayKind::STANDARD {
        let run = |second| mc(&Topology::serial(&[first, second], p, p).unwrap(), p, 1_000_000);
        let (af, df, ef) = (run(RelayKind::Af), run(RelayKind::Df), run(RelayKind::Ef));
        ok &= ge3(ef.report.gsnr, se(&ef), af.report.gsnr, se(&af))
            && ge3(ef.report.gsnr, se(&ef), df.report.gsnr, se(&df));
        notes.push(format!("{first}->(af {:.4}, df {:.4}, ef {:.4})", af.report.gsnr, df.report.gsnr, ef.report.gsnr));
    }
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn c12_hybrid() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for p in [0.5, 2.0, 8.0] {
        let run = |k| mc(&Topology::hybrid_default(k, p, p).unwrap(), p, 10_000_000);
        let (af, df, ef) = (run(RelayKind::Af), run(RelayKind::Df), run(RelayKind::Ef));
        // strict: EF exceeds each rival by more than three combined standard errors
        let beats = |a: &SimResult, b: &SimResult| !ge3(b.report.gsnr, se(b), a.report.gsnr, se(a));
        let fewer =
            |a: &SimResult, b: &SimResult| a.ber < b.ber - 3.0 * (a.ber_stderr.powi(2) + b.ber_stderr.powi(2)).sqrt();
        ok &= beats(&ef, &af) && beats(&ef, &df) && fewer(&ef, &af) && fewer(&ef, &df);
        notes.push(format!(
            "P={p}: gsnr af {:.4} df {:.4} ef {:.4}, ber af {:.3e} df {:.3e} ef {:.3e}",
            af.report.gsnr, df.report.gsnr, ef.report.gsnr, af.ber, df.ber, ef.ber
        ));
    }
    notes.push(format!("{:.0}s", start.elapsed().as_secs_f64()));
    if ok {
        Ok(notes.join("; "))
    } else {
        Err(notes.join("; "))
    }
}

fn c13_determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_relaynet");
    let cases: [&[&str]; 6] = [
        &["relay-fn", "--mod", "pam:4", "--power", "1"],
        &["msuee-sweep", "--sweep", "0.1:5:4"],
        &["parallel", "--method", "mc", "--samples", "20000", "--seed", "9", "--sweep", "0.5:2:2"],
        &["hybrid", "--method", "mc", "--samples", "20000", "--seed", "3", "--power", "2", "--json"],
        &["correlation", "--method", "mc", "--samples", "20000", "--mod", "qam:16", "--power", "10"],
        &["reproduce", "table1", "--json"],
    ];
    let mut notes = Vec::new();
    for args in cases {
        let a = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        let b = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
        if !a.status.success() || a.stdout.is_empty() {
            return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&a.stderr)));
        }
        if a.stdout != b.stdout {
            return Err(format!("{args:?} differs between runs"));
        }
        notes.push(args[0]);
    }
    Ok(format!("byte-identical: {}", notes.join(", ")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 13] = [
        ("MSUEE limits", c1_table_limits),
        ("EF closed form", c2_tanh),
        ("MSUEE ordering", c3_ordering),
        ("EF optimality under perturbation", c4_optimality),
        ("MMSUEE/MMSEE identity", c5_identity),
        ("PSK rotational property", c6_rotation),
        ("zero error correlation", c7_correlation),
        ("asymptotic ratios", c8_asymptotics),
        ("analytic vs Monte Carlo", c9_mc_agreement),
        ("serial orderings", c10_serial_ordering),
        ("last relay estimates", c11_last_relay),
        ("hybrid ordering", c12_hybrid),
        ("determinism", c13_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                failed += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} {:>2} {name}: {detail}", i + 1);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
