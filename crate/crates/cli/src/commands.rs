//! Command implementations. Each returns a [`Table`].

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use relaynet::gsnr::{msuee_af, msuee_df_bpsk, msuee_ef, relay_msuee};
use relaynet::network::{
    bpsk_parallel_gsnr, correlation_matrix, evaluate_topology, serial_af_gsnr, serial_df_gsnr, SerialDfModel, Topology,
};
use relaynet::sim::{simulate, RelayPlan, SimConfig};
use relaynet::{
    gaussian_density, Complex64, Error, GaussianLink, GridSpec, Modulation, RelayFunction, RelayKind, Result,
};

use crate::table::{Cell, Table};

/// Evaluation route of a network command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMethod {
    Closed,
    Quad,
    Mc,
}

impl EvalMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::Closed => "closed",
            Self::Quad => "quad",
            Self::Mc => "mc",
        }
    }
}

/// Network family of the `parallel`, `serial` and `hybrid` commands.
#[derive(Debug, Clone)]
pub enum Family {
    Parallel(usize),
    Serial(usize),
    /// Default hybrid, or a topology read from a file.
    Hybrid(Option<Topology>),
}

impl Family {
    /// Network for strategy `kind`; `None` keeps a file's own strategies.
    pub fn topology(&self, kind: Option<RelayKind>, p: f64, pr: f64) -> Result<Topology> {
        let k = kind.unwrap_or(RelayKind::Ef);
        match self {
            Family::Parallel(l) => Topology::parallel_uniform(k, *l, p, pr),
            Family::Serial(l) => Topology::serial_uniform(k, *l, p, pr),
            Family::Hybrid(None) => Topology::hybrid_default(k, p, pr),
            Family::Hybrid(Some(t)) => {
                let t = t.with_powers(p, pr)?;
                Ok(match kind {
                    Some(k) => t.with_strategy(k),
                    None => t,
                })
            }
        }
    }
}

/// `r, f_af, f_df, f_ef` over a range of observations.
pub fn relay_fn(
    modulation: Modulation,
    power: f64,
    relay_power: f64,
    range: (f64, f64, usize),
    density_csv: Option<&Path>,
) -> Result<Table> {
    if !modulation.is_real() {
        return Err(Error::Unsupported(format!("relay functions of {modulation} cannot be plotted on a line")));
    }
    let (lo, hi, n) = range;
    if n < 2 || !(hi > lo) {
        return Err(Error::InvalidArgument("the r range needs hi > lo and at least 2 points".into()));
    }
    let con = modulation.build(power)?;
    let density = gaussian_density(&con, GaussianLink::unit(), GridSpec::default())?;
    if let Some(path) = density_csv {
        let f = File::create(path).map_err(|e| Error::Configuration(format!("{}: {e}", path.display())))?;
        density.write_csv(BufWriter::new(f)).map_err(|e| Error::Configuration(e.to_string()))?;
    }
    let maps = [
        RelayFunction::af_for(&density, relay_power)?,
        RelayFunction::df(&density, relay_power)?,
        RelayFunction::ef(&density, relay_power)?,
    ];
    let mut t = Table::new(["r", "f_af", "f_df", "f_ef"]);
    for i in 0..n {
        let r = if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 };
        let mut row: Vec<Cell> = vec![r.into()];
        row.extend(maps.iter().map(|f| Cell::Num(f.evaluate(Complex64::new(r, 0.0)).re)));
        t.push(row);
    }
    Ok(t)
}

/// Uncorrelated-error power of one relay of each kind.
pub fn msuee_values(modulation: Modulation, p: f64) -> Result<[f64; 3]> {
    let con = modulation.build(p)?;
    let density = gaussian_density(&con, GaussianLink::unit(), GridSpec::default())?;
    let df = if modulation == Modulation::Psk(2) {
        msuee_df_bpsk(p)?
    } else {
        relay_msuee(&density, &RelayFunction::df(&density, p)?)?.msuee
    };
    Ok([msuee_af(), df, msuee_ef(&density)?])
}

/// `P, msuee_af, msuee_df, msuee_ef`.
pub fn msuee_sweep(modulation: Modulation, powers: &[f64]) -> Result<Table> {
    let mut t = Table::new(["P", "msuee_af", "msuee_df", "msuee_ef"]);
    for &p in powers {
        let v = msuee_values(modulation, p)?;
        t.push(vec![p.into(), v[0].into(), v[1].into(), v[2].into()]);
    }
    Ok(t)
}

/// Settings shared by the network commands.
#[derive(Debug, Clone)]
pub struct NetworkRun {
    pub family: Family,
    pub modulation: Modulation,
    pub powers: Vec<f64>,
    /// `None` tracks the source power.
    pub relay_power: Option<f64>,
    /// `None` in the list keeps a topology file's strategies.
    pub strategies: Vec<Option<RelayKind>>,
    pub method: EvalMethod,
    pub sim: SimConfig,
}

fn kind_label(k: Option<RelayKind>) -> String {
    k.map_or_else(|| "file".to_string(), |k| k.to_string())
}

/// One row per power: GSNR per strategy, plus standard errors and BER for Monte Carlo.
pub fn network(run: &NetworkRun) -> Result<Table> {
    let mut cols = vec!["P".to_string()];
    for k in &run.strategies {
        let s = kind_label(*k);
        cols.push(format!("gsnr_{s}"));
        if run.method == EvalMethod::Mc {
            cols.extend([format!("gsnr_{s}_se"), format!("ber_{s}"), format!("ber_{s}_se")]);
        }
    }
    let mut t = Table::new(cols);
    for &p in &run.powers {
        let pr = run.relay_power.unwrap_or(p);
        let mut row: Vec<Cell> = vec![p.into()];
        for &k in &run.strategies {
            match run.method {
                EvalMethod::Closed => row.push(closed_form(&run.family, k, run.modulation, p, pr)?.into()),
                EvalMethod::Quad => {
                    let topo = run.family.topology(k, p, pr)?;
                    row.push(evaluate_topology(&topo, &run.modulation.build(p)?, GridSpec::default())?.gsnr.into());
                }
                EvalMethod::Mc => {
                    let topo = run.family.topology(k, p, pr)?;
                    let r = simulate(&topo, &run.modulation.build(p)?, GridSpec::default(), &run.sim)?;
                    row.extend([
                        r.report.gsnr.into(),
                        r.report.gsnr_stderr.unwrap_or(f64::NAN).into(),
                        r.ber.into(),
                        r.ber_stderr.into(),
                    ]);
                }
            }
        }
        t.push(row);
    }
    Ok(t)
}

fn closed_form(family: &Family, kind: Option<RelayKind>, modulation: Modulation, p: f64, pr: f64) -> Result<f64> {
    let kind = kind.ok_or_else(|| Error::Unsupported("closed forms need a strategy".into()))?;
    let unsupported = || Error::Unsupported(format!("no closed form for {kind} in this network with {modulation}"));
    match family {
        Family::Parallel(l) if modulation == Modulation::Psk(2) => {
            bpsk_parallel_gsnr(kind, *l, p, pr, GridSpec::default())
        }
        Family::Serial(l) => match kind {
            RelayKind::Af => Ok(serial_af_gsnr(*l, p, pr)),
            RelayKind::Df if (pr - p).abs() <= 1e-12 * p => match modulation {
                Modulation::Psk(2) => Ok(serial_df_gsnr(*l, p, SerialDfModel::Bpsk)?.gsnr),
                Modulation::Qam(m) => Ok(serial_df_gsnr(*l, p, SerialDfModel::Qam(m))?.gsnr),
                _ => Err(unsupported()),
            },
            _ => Err(unsupported()),
        },
        _ => Err(unsupported()),
    }
}

/// Error correlation of parallel relays hearing the source over `gains`.
pub fn correlation(
    modulation: Modulation,
    kind: RelayKind,
    gains: &[Complex64],
    p: f64,
    pr: f64,
    method: EvalMethod,
    sim: &SimConfig,
) -> Result<Table> {
    let con = modulation.build(p)?;
    match method {
        EvalMethod::Mc => {
            let topo = Topology::parallel(kind, gains, p, pr)?;
            let plan = RelayPlan::build(&topo, &con, GridSpec::default(), sim)?;
            let r = relaynet::sim::run(&topo, &con, &plan, sim)?;
            let mut t = Table::new(["i", "j", "re", "im", "stderr"]);
            for i in 0..gains.len() {
                for j in 0..gains.len() {
                    let c = r.correlation.get(i, j);
                    t.push(vec![
                        i.to_string().into(),
                        j.to_string().into(),
                        c.re.into(),
                        c.im.into(),
                        r.correlation_stderr[i][j].into(),
                    ]);
                }
            }
            Ok(t)
        }
        _ => {
            let c = correlation_matrix(kind, &con, gains, pr, GridSpec::default())?;
            let mut t = Table::new(["i", "j", "re", "im"]);
            for i in 0..c.len() {
                for j in 0..c.len() {
                    let v = c.get(i, j);
                    t.push(vec![i.to_string().into(), j.to_string().into(), v.re.into(), v.im.into()]);
                }
            }
            Ok(t)
        }
    }
}

/// Limits of the uncorrelated-error powers at very low and very high power.
pub fn table1() -> Result<Table> {
    let spec = GridSpec::default();
    let ef = |p: f64| -> Result<f64> {
        msuee_ef(&gaussian_density(&relaynet::make_psk(2, p)?, GaussianLink::unit(), spec)?)
    };
    let mut t = Table::new(["strategy", "regime", "P", "msuee", "limit"]);
    let rows: [(&str, &str, f64, f64, f64); 6] = [
        ("af", "low", 1e-4, msuee_af(), 1.0),
        ("af", "high", 1e4, msuee_af(), 1.0),
        ("df", "low", 1e-6, msuee_df_bpsk(1e-6)?, std::f64::consts::FRAC_PI_2),
        ("df", "high", 25.0, msuee_df_bpsk(25.0)?, 0.0),
        ("ef", "low", 1e-4, ef(1e-4)?, 1.0),
        ("ef", "high", 25.0, ef(25.0)?, 0.0),
    ];
    for (s, regime, p, v, lim) in rows {
        t.push(vec![s.into(), regime.into(), p.into(), v.into(), lim.into()]);
    }
    Ok(t)
}

/// Parses `re` or `re+imj`/`re-imj` gains separated by commas.
pub fn parse_gains(text: &str) -> Result<Vec<Complex64>> {
    text.split(',')
        .map(|g| {
            let g = g.trim();
            let bad = || Error::InvalidArgument(format!("bad gain '{g}'"));
            if let Some(body) = g.strip_suffix('j') {
                let split = body.char_indices().skip(1).filter(|(_, c)| *c == '+' || *c == '-').map(|(i, _)| i).last();
                match split {
                    Some(i) => {
                        let re: f64 = body[..i].parse().map_err(|_| bad())?;
                        let im: f64 = body[i..].parse().map_err(|_| bad())?;
                        Ok(Complex64::new(re, im))
                    }
                    None => Ok(Complex64::new(0.0, body.parse().map_err(|_| bad())?)),
                }
            } else {
                Ok(Complex64::new(g.parse().map_err(|_| bad())?, 0.0))
            }
        })
        .collect()
}
