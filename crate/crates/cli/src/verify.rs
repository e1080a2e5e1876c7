//! Invariant suites run by `relaynet verify`.

use std::f64::consts::TAU;
use std::sync::Arc;

use relaynet::gsnr::{mmse_relation, msuee_af, msuee_df_bpsk, msuee_ef, single_relay_gsnr};
use relaynet::network::{
    bpsk_msuee, bpsk_parallel_gsnr, correlation_matrix, evaluate_topology, serial_af_gsnr, Topology,
};
use relaynet::relayfn::CustomMap;
use relaynet::sim::{compare_maps, simulate, smooth_perturbation, NodeRng, SimConfig};
use relaynet::{
    gaussian_density, make_pam, make_psk, Complex64, GaussianLink, GridSpec, RelayKind, Result, SourceModel,
};

use crate::table::Table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    All,
    Theorems,
    Appendices,
    Networks,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Theorems => "theorems",
            Suite::Appendices => "appendices",
            Suite::Networks => "networks",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: impl Into<String>, pass: bool, detail: String) -> Check {
    Check { suite, name: name.into(), pass, detail }
}

pub fn run(suite: Suite, sim: &SimConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Appendices) {
        out.extend(appendices()?);
    }
    if matches!(suite, Suite::All | Suite::Theorems) {
        out.extend(theorems(sim)?);
    }
    if matches!(suite, Suite::All | Suite::Networks) {
        out.extend(networks(sim)?);
    }
    Ok(out)
}

pub fn to_table(checks: &[Check]) -> Table {
    let mut t = Table::new(["suite", "check", "status", "detail"]);
    for c in checks {
        t.push(vec![
            c.suite.into(),
            c.name.clone().into(),
            (if c.pass { "PASS" } else { "FAIL" }).into(),
            c.detail.clone().into(),
        ]);
    }
    t
}

fn spec() -> GridSpec {
    GridSpec::default()
}

fn appendices() -> Result<Vec<Check>> {
    const S: &str = "appendices";
    let mut out = Vec::new();
    for m in [2usize, 4, 8] {
        let con = make_psk(m, 1.0)?;
        let d = gaussian_density(&con, GaussianLink::unit(), spec())?;
        let mut rng = NodeRng::at(17, 9, m, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (a, b) = rng.normal_pair();
            let r = Complex64::new(2.0 * a, 2.0 * b);
            let base = d.posterior_mean(r).mean;
            for k in 0..m {
                let rot = Complex64::from_polar(1.0, TAU * k as f64 / m as f64);
                let lhs = d.posterior_mean(r * rot).mean;
                let rhs = rot * base;
                worst = worst.max((lhs - rhs).norm() / rhs.norm().max(1e-300));
            }
        }
        out.push(check(S, format!("rotation-psk{m}"), worst < 1e-9, format!("max relative error {worst:.3e}")));
    }
    let mut worst_mu = f64::NEG_INFINITY;
    let mut worst_res: f64 = 0.0;
    for p in [0.5, 1.0, 4.0] {
        for con in [make_psk(2, p)?, make_pam(4, p)?] {
            let rel = mmse_relation(&gaussian_density(&con, GaussianLink::unit(), spec())?)?;
            worst_mu = worst_mu.max(rel.mu);
            worst_res = worst_res.max(rel.relative_residual());
        }
    }
    out.push(check(S, "mu-nonpositive", worst_mu <= 1e-9, format!("max mu {worst_mu:.3e}")));
    out.push(check(S, "mmsuee-identity", worst_res < 1e-6, format!("max relative residual {worst_res:.3e}")));
    let mut worst_g: f64 = 0.0;
    for p in [0.5, 1.0, 4.0] {
        let con = SourceModel::gaussian(p)?.to_constellation()?;
        let rel = mmse_relation(&gaussian_density(&con, GaussianLink::unit(), spec())?)?;
        worst_g = worst_g.max((rel.mu + p / (p + 1.0)).abs());
    }
    out.push(check(S, "gaussian-mu", worst_g < 1e-6, format!("max |mu + P/(P+1)| {worst_g:.3e}")));
    let gains = [Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)];
    for m in [2usize, 4, 8] {
        let c = correlation_matrix(RelayKind::Ef, &make_psk(m, 1.0)?, &gains, 1.0, spec())?;
        let v = c.max_off_diagonal();
        out.push(check(S, format!("zero-correlation-ef-psk{m}"), v < 1e-6, format!("|C12| {v:.3e}")));
    }
    let c = correlation_matrix(RelayKind::Df, &make_psk(2, 1.0)?, &gains, 1.0, spec())?;
    let v = c.max_off_diagonal();
    out.push(check(S, "zero-correlation-df-bpsk", v < 1e-6, format!("|C12| {v:.3e}")));
    let c = correlation_matrix(RelayKind::Af, &make_psk(4, 1.0)?, &gains, 1.0, spec())?;
    let v = c.max_off_diagonal();
    out.push(check(S, "zero-correlation-af", v == 0.0, format!("|C12| {v:.3e}")));
    Ok(out)
}

/// Largest negative paired MSUEE excess of perturbed EF maps, in standard errors.
pub fn perturbation_margin(p: f64, count: usize, sim: &SimConfig) -> Result<(f64, f64)> {
    let con = make_psk(2, p)?;
    let sp = p.sqrt();
    let mut maps: Vec<CustomMap> = vec![Arc::new(move |r: Complex64| Complex64::new(sp * (sp * r.re).tanh(), 0.0))];
    for i in 0..count {
        let d = smooth_perturbation(sim.seed, i, 0.2 * sp, 2.0 + sp);
        maps.push(Arc::new(move |r: Complex64| Complex64::new(sp * (sp * r.re).tanh() + d(r.re), 0.0)));
    }
    let c = compare_maps(&con, Complex64::new(1.0, 0.0), &maps, sim)?;
    let mut worst = f64::INFINITY;
    let mut min_excess = f64::INFINITY;
    for (e, se) in &c.msuee_excess[1..] {
        worst = worst.min(e / se);
        min_excess = min_excess.min(*e);
    }
    Ok((worst, min_excess))
}

fn theorems(sim: &SimConfig) -> Result<Vec<Check>> {
    const S: &str = "theorems";
    let mut out = Vec::new();
    for p in [0.1, 1.0, 10.0] {
        let (z, e) = perturbation_margin(p, 50, sim)?;
        out.push(check(
            S,
            format!("ef-optimal-P{p}"),
            z >= -3.0,
            format!("min excess {e:.3e}, min excess/stderr {z:.2}"),
        ));
    }
    let mut mono = true;
    for (p, pr) in [(0.5, 1.0), (1.0, 1.0), (8.0, 2.0)] {
        let vals: Vec<f64> = (0..=40).map(|i| single_relay_gsnr(i as f64 * 0.05, p, pr)).collect();
        mono &= vals.windows(2).all(|w| w[1] < w[0]);
    }
    out.push(check(S, "single-relay-decreasing", mono, "GSNR strictly decreasing in E".into()));
    let mut worst = f64::INFINITY;
    for m in [2usize, 4] {
        for l in [2usize, 4] {
            for p in [0.1, 0.5, 2.0, 8.0, 30.0] {
                let g = |k| -> Result<f64> {
                    Ok(evaluate_topology(&Topology::parallel_uniform(k, l, p, p)?, &make_psk(m, p)?, spec())?.gsnr)
                };
                let (af, df, ef) = (g(RelayKind::Af)?, g(RelayKind::Df)?, g(RelayKind::Ef)?);
                worst = worst.min((ef - af.max(df)) / ef);
            }
        }
    }
    out.push(check(S, "parallel-ef-dominates", worst >= -1e-9, format!("min relative EF margin {worst:.3e}")));
    let mut ok = true;
    let mut strict = true;
    for i in 0..50 {
        let p = 0.01 * (3000f64).powf(i as f64 / 49.0);
        let [af, df, ef] = [
            msuee_af(),
            msuee_df_bpsk(p)?,
            msuee_ef(&gaussian_density(&make_psk(2, p)?, GaussianLink::unit(), spec())?)?,
        ];
        ok &= ef <= af.min(df) + 1e-12;
        if (0.5..=10.0).contains(&p) {
            strict &= ef < af.min(df);
        }
    }
    out.push(check(
        S,
        "msuee-ordering",
        ok && strict,
        format!("EF ≤ min(AF, DF): {ok}, strict on [0.5, 10]: {strict}"),
    ));
    Ok(out)
}

/// (analytic, Monte Carlo, standard error) for the networks with exact formulas.
pub fn agreement_cases(sim: &SimConfig) -> Result<Vec<(String, f64, f64, f64)>> {
    let mut out = Vec::new();
    let mc = |t: &Topology, p: f64| -> Result<(f64, f64)> {
        let r = simulate(t, &make_psk(2, p)?, spec(), sim)?;
        Ok((r.report.gsnr, r.report.gsnr_stderr.unwrap_or(f64::NAN)))
    };
    for kind in RelayKind::STANDARD {
        for p in [0.5, 2.0, 8.0] {
            let e = bpsk_msuee(kind, p, spec())?;
            let (g, se) = mc(&Topology::single(kind, p, p)?, p)?;
            out.push((format!("single-{kind}-P{p}"), single_relay_gsnr(e, p, p), g, se));
        }
        let (g, se) = mc(&Topology::parallel_uniform(kind, 2, 1.0, 1.0)?, 1.0)?;
        out.push((format!("parallel2-{kind}-P1"), bpsk_parallel_gsnr(kind, 2, 1.0, 1.0, spec())?, g, se));
    }
    let (g, se) = mc(&Topology::serial_uniform(RelayKind::Af, 2, 10.0, 10.0)?, 10.0)?;
    out.push(("serial2-af-P10".into(), serial_af_gsnr(2, 10.0, 10.0), g, se));
    Ok(out)
}

fn networks(sim: &SimConfig) -> Result<Vec<Check>> {
    Ok(agreement_cases(sim)?
        .into_iter()
        .map(|(name, a, m, se)| {
            let z = (m - a) / se;
            check("networks", name, z.abs() < 3.0, format!("analytic {a:.6} mc {m:.6} ± {se:.2e} ({z:+.2}σ)"))
        })
        .collect())
}
