//! Monte Carlo evaluation of relay networks.
//!
//! Samples are split into fixed batches that run on the rayon pool and are
//! merged in batch order, so results do not depend on the thread count.
//! Standard errors come from the leave-one-batch-out jackknife.

mod rng;

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use rng::{streams, NodeRng, DOMAIN_MAIN, DOMAIN_PILOT, WORDS_PER_SAMPLE};

use crate::channel::GridSpec;
use crate::constellation::Constellation;
use crate::error::{config, invalid, Error, Result};
use crate::gsnr::{decompose, GsnrReport, Method};
use crate::network::{propagate, source_alphabet, CorrelationMatrix, Propagation, Role, Topology};
use crate::quadrature::Grid1;
use crate::relayfn::{CustomMap, RelayFunction, RelayKind};

/// Fewest samples accepted for a reported GSNR.
pub const MIN_SAMPLES: u64 = 10_000;
/// Fewest batches accepted for batch-based standard errors.
pub const MIN_BATCHES: usize = 30;
/// Bins of an empirical real relay table.
pub const TABLE_BINS_REAL: usize = 1024;
/// Bins per axis of an empirical complex relay table.
pub const TABLE_BINS_COMPLEX: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: usize,
    /// Samples used to tabulate relay maps that have no quadrature form.
    pub pilot_samples: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self { samples: 1_000_000, seed: 1, batches: 32, pilot_samples: 1_000_000 }
    }
}

impl SimConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(config(format!("at least {MIN_SAMPLES} samples are required, got {}", self.samples)));
        }
        if self.batches < MIN_BATCHES {
            return Err(config(format!("at least {MIN_BATCHES} batches are required, got {}", self.batches)));
        }
        if self.samples < self.batches as u64 {
            return Err(config("fewer samples than batches"));
        }
        Ok(())
    }

    /// Sample range `[start, end)` of batch `b`.
    pub fn batch_range(&self, b: usize) -> (u64, u64) {
        let n = self.samples as u128;
        let nb = self.batches as u128;
        ((n * b as u128 / nb) as u64, (n * (b as u128 + 1) / nb) as u64)
    }
}

/// Running sums over simulated samples. Relay terms use each relay's
/// unscaled output t_i.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleMoments {
    pub n: u64,
    pub sum_xy: Complex64,
    pub sum_y2: f64,
    pub sum_x2: f64,
    /// Σ x* t_i.
    pub sum_xt: Vec<Complex64>,
    /// Σ |t_i|².
    pub sum_t2: Vec<f64>,
    /// Σ t_i* t_j, row-major.
    pub sum_tt: Vec<Complex64>,
    pub error_count: u64,
}

impl SampleMoments {
    pub fn zeros(relays: usize) -> Self {
        Self {
            sum_xt: vec![Complex64::new(0.0, 0.0); relays],
            sum_t2: vec![0.0; relays],
            sum_tt: vec![Complex64::new(0.0, 0.0); relays * relays],
            ..Self::default()
        }
    }

    pub fn relays(&self) -> usize {
        self.sum_xt.len()
    }

    fn push(&mut self, x: Complex64, y: Complex64, t: &[Complex64]) {
        self.n += 1;
        self.sum_xy += x.conj() * y;
        self.sum_y2 += y.norm_sqr();
        self.sum_x2 += x.norm_sqr();
        let l = t.len();
        for i in 0..l {
            self.sum_xt[i] += x.conj() * t[i];
            self.sum_t2[i] += t[i].norm_sqr();
            for j in 0..l {
                self.sum_tt[i * l + j] += t[i].conj() * t[j];
            }
        }
    }

    pub fn merge(&mut self, o: &Self) {
        self.n += o.n;
        self.sum_xy += o.sum_xy;
        self.sum_y2 += o.sum_y2;
        self.sum_x2 += o.sum_x2;
        self.error_count += o.error_count;
        for (a, b) in self.sum_xt.iter_mut().zip(&o.sum_xt) {
            *a += b;
        }
        for (a, b) in self.sum_t2.iter_mut().zip(&o.sum_t2) {
            *a += b;
        }
        for (a, b) in self.sum_tt.iter_mut().zip(&o.sum_tt) {
            *a += b;
        }
    }

    /// Sums with `o` removed.
    pub fn without(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.n -= o.n;
        r.sum_xy -= o.sum_xy;
        r.sum_y2 -= o.sum_y2;
        r.sum_x2 -= o.sum_x2;
        r.error_count -= o.error_count;
        for (a, b) in r.sum_xt.iter_mut().zip(&o.sum_xt) {
            *a -= b;
        }
        for (a, b) in r.sum_t2.iter_mut().zip(&o.sum_t2) {
            *a -= b;
        }
        for (a, b) in r.sum_tt.iter_mut().zip(&o.sum_tt) {
            *a -= b;
        }
        r
    }

    fn mean(&self, v: f64) -> f64 {
        v / self.n as f64
    }

    /// Decomposition of the destination observation.
    pub fn report(&self, power: f64) -> Result<GsnrReport> {
        let n = self.n as f64;
        decompose(power, self.sum_xy / n, self.sum_y2 / n)
    }

    /// Decomposition of relay `i`'s unscaled output.
    pub fn relay_report(&self, power: f64, i: usize) -> Result<GsnrReport> {
        let n = self.n as f64;
        decompose(power, self.sum_xt[i] / n, self.sum_t2[i] / n)
    }

    /// C_ij = E[e_i* e_j] with e_i = a_i t_i − x and a_i = P / E[x* t_i].
    pub fn correlation(&self, power: f64) -> Result<CorrelationMatrix> {
        let n = self.n as f64;
        let l = self.relays();
        let a: Vec<Complex64> = self
            .sum_xt
            .iter()
            .map(|s| {
                let c = s / n;
                if c.norm() == 0.0 {
                    Err(Error::ZeroCorrelation(0.0))
                } else {
                    Ok(Complex64::new(power, 0.0) / c)
                }
            })
            .collect::<Result<_>>()?;
        let mut entries = vec![vec![Complex64::new(0.0, 0.0); l]; l];
        for i in 0..l {
            for j in 0..l {
                entries[i][j] = if i == j {
                    Complex64::new(a[i].norm_sqr() * self.sum_t2[i] / n - power, 0.0)
                } else {
                    a[i].conj() * a[j] * self.sum_tt[i * l + j] / n - power
                };
            }
        }
        CorrelationMatrix::new(entries)
    }
}

/// Jackknife standard error of a statistic over batches.
pub fn jackknife<F>(total: &SampleMoments, batches: &[SampleMoments], stat: F) -> Result<f64>
where
    F: Fn(&SampleMoments) -> Result<f64>,
{
    let vals: Vec<f64> = batches.iter().map(|b| stat(&total.without(b))).collect::<Result<_>>()?;
    let b = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / b;
    Ok(((b - 1.0) / b * vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>()).sqrt())
}

/// Jackknife standard error of a complex statistic (root of E|θ − θ̄|²).
pub fn jackknife_complex<F>(total: &SampleMoments, batches: &[SampleMoments], stat: F) -> Result<f64>
where
    F: Fn(&SampleMoments) -> Result<Complex64>,
{
    let vals: Vec<Complex64> = batches.iter().map(|b| stat(&total.without(b))).collect::<Result<_>>()?;
    let b = vals.len() as f64;
    let mean = vals.iter().sum::<Complex64>() / b;
    Ok(((b - 1.0) / b * vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>()).sqrt())
}

/// Where the relay maps of a plan came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PlanSource {
    /// Built from exactly propagated input densities.
    Quadrature,
    /// Tabulated from pilot samples.
    Empirical,
    /// Supplied by the caller, possibly mixed with the above.
    Custom,
}

/// Relay maps of every relay node of a topology, indexed by node.
#[derive(Debug, Clone)]
pub struct RelayPlan {
    maps: Vec<Option<RelayFunction>>,
    source: PlanSource,
}

impl RelayPlan {
    pub fn from_propagation(p: &Propagation) -> Self {
        Self { maps: p.relays.clone(), source: PlanSource::Quadrature }
    }

    /// Quadrature maps when the network admits them, else pilot tables.
    pub fn build(topology: &Topology, constellation: &Constellation, spec: GridSpec, cfg: &SimConfig) -> Result<Self> {
        match propagate(topology, constellation, spec) {
            Ok(p) => Ok(Self::from_propagation(&p)),
            Err(Error::Unsupported(_)) => empirical_plan(topology, constellation, cfg),
            Err(e) => Err(e),
        }
    }

    pub fn source(&self) -> PlanSource {
        self.source
    }

    pub fn map(&self, node: usize) -> Option<&RelayFunction> {
        self.maps.get(node).and_then(|m| m.as_ref())
    }

    /// Replaces the map of relay `id`.
    pub fn with_map(mut self, topology: &Topology, id: &str, f: RelayFunction) -> Result<Self> {
        let i = topology.index_of(id).ok_or_else(|| invalid(format!("unknown node '{id}'")))?;
        if topology.node(i).role != Role::Relay {
            return Err(invalid(format!("'{id}' is not a relay")));
        }
        self.maps[i] = Some(f);
        self.source = PlanSource::Custom;
        Ok(self)
    }
}

struct Engine<'a> {
    topology: &'a Topology,
    con: &'a Constellation,
    cumulative: Vec<f64>,
    real: bool,
    maps: Vec<Option<&'a RelayFunction>>,
    /// Relay node indices in topological order.
    relays: Vec<usize>,
}

impl<'a> Engine<'a> {
    fn new(topology: &'a Topology, con: &'a Constellation, maps: Vec<Option<&'a RelayFunction>>) -> Self {
        let mut acc = 0.0;
        let cumulative = con
            .priors()
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        let relays = topology.order().iter().copied().filter(|&i| topology.node(i).role == Role::Relay).collect();
        Self { topology, con, cumulative, real: con.is_real(), maps, relays }
    }

    fn require_maps(&self) -> Result<()> {
        for &i in &self.relays {
            if self.maps[i].is_none() {
                return Err(invalid(format!("relay '{}' has no map", self.topology.node(i).id)));
            }
        }
        Ok(())
    }

    fn noise(&self, rng: &mut NodeRng) -> Complex64 {
        let (a, b) = rng.normal_pair();
        if self.real {
            Complex64::new(a, 0.0)
        } else {
            Complex64::new(a * FRAC_1_SQRT_2, b * FRAC_1_SQRT_2)
        }
    }

    /// One network use. Fills the received and transmitted value of every
    /// node and returns the symbol index and the destination observation.
    fn step(
        &self,
        rngs: &mut [NodeRng],
        received: &mut [Complex64],
        sent: &mut [Complex64],
        unscaled: &mut [Complex64],
    ) -> Result<(usize, Complex64)> {
        let src = self.topology.source();
        let (u, _) = rngs[src].uniform_pair();
        let k = self.cumulative.iter().position(|c| u < *c).unwrap_or(self.con.len() - 1);
        sent[src] = self.con.points()[k];
        let mut y = Complex64::new(0.0, 0.0);
        for &i in self.topology.order() {
            let node = self.topology.node(i);
            if node.role == Role::Source {
                continue;
            }
            let mut r = self.noise(&mut rngs[i]);
            for (p, g) in &node.incoming {
                r += g * sent[*p];
            }
            received[i] = r;
            match node.role {
                Role::Destination => y = r,
                _ => match self.maps[i] {
                    Some(f) => {
                        let (t, _) = f.unscaled(r);
                        if !(t.re.is_finite() && t.im.is_finite()) {
                            return Err(Error::NonFinite { node: node.id.clone(), detail: format!("f({r}) = {t}") });
                        }
                        unscaled[i] = t;
                        sent[i] = t * f.scale();
                    }
                    None => {
                        unscaled[i] = Complex64::new(0.0, 0.0);
                        sent[i] = unscaled[i];
                    }
                },
            }
        }
        Ok((k, y))
    }

    fn buffers(&self) -> (Vec<Complex64>, Vec<Complex64>, Vec<Complex64>) {
        let n = self.topology.nodes().len();
        let z = Complex64::new(0.0, 0.0);
        (vec![z; n], vec![z; n], vec![z; n])
    }

    fn moments_batch(&self, cfg: &SimConfig, b: usize) -> Result<SampleMoments> {
        let (start, end) = cfg.batch_range(b);
        let mut rngs = streams(cfg.seed, DOMAIN_MAIN, self.topology.nodes().len(), start);
        let (mut rec, mut sent, mut un) = self.buffers();
        let mut m = SampleMoments::zeros(self.relays.len());
        let mut t = vec![Complex64::new(0.0, 0.0); self.relays.len()];
        for _ in start..end {
            let (k, y) = self.step(&mut rngs, &mut rec, &mut sent, &mut un)?;
            for (slot, &i) in t.iter_mut().zip(&self.relays) {
                *slot = un[i];
            }
            m.push(self.con.points()[k], y, &t);
        }
        Ok(m)
    }

    fn errors_batch(&self, cfg: &SimConfig, b: usize, alpha: Complex64) -> Result<u64> {
        let (start, end) = cfg.batch_range(b);
        let mut rngs = streams(cfg.seed, DOMAIN_MAIN, self.topology.nodes().len(), start);
        let (mut rec, mut sent, mut un) = self.buffers();
        let mut errors = 0;
        for _ in start..end {
            let (k, y) = self.step(&mut rngs, &mut rec, &mut sent, &mut un)?;
            if self.con.nearest(alpha * y) != k {
                errors += 1;
            }
        }
        Ok(errors)
    }

    /// Pilot observations (symbol index, received value) at node `node`.
    fn pilot(&self, cfg: &SimConfig, node: usize) -> Result<Vec<(usize, Complex64)>> {
        let pilot_cfg = SimConfig { samples: cfg.pilot_samples, ..*cfg };
        let parts: Vec<Vec<(usize, Complex64)>> = (0..cfg.batches)
            .into_par_iter()
            .map(|b| {
                let (start, end) = pilot_cfg.batch_range(b);
                let mut rngs = streams(cfg.seed, DOMAIN_PILOT, self.topology.nodes().len(), start);
                let (mut rec, mut sent, mut un) = self.buffers();
                let mut out = Vec::with_capacity((end - start) as usize);
                for _ in start..end {
                    let (k, _) = self.step(&mut rngs, &mut rec, &mut sent, &mut un)?;
                    out.push((k, rec[node]));
                }
                Ok(out)
            })
            .collect::<Result<_>>()?;
        Ok(parts.concat())
    }
}

/// Outcome of a Monte Carlo run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimResult {
    pub report: GsnrReport,
    /// Symbol error rate of minimum-distance detection on α·y.
    pub ber: f64,
    pub ber_stderr: f64,
    /// Empirical E|x|².
    pub power_estimate: f64,
    pub power_stderr: f64,
    /// Relay ids in the order used by `correlation`.
    pub relay_ids: Vec<String>,
    pub correlation: CorrelationMatrix,
    pub correlation_stderr: Vec<Vec<f64>>,
    pub moments: SampleMoments,
}

impl SimResult {
    /// Entry (i, j) of the error correlation with its standard error.
    pub fn correlation_between(&self, a: &str, b: &str) -> Result<(Complex64, f64)> {
        let find = |id: &str| {
            self.relay_ids.iter().position(|r| r == id).ok_or_else(|| invalid(format!("unknown relay '{id}'")))
        };
        let (i, j) = (find(a)?, find(b)?);
        Ok((self.correlation.get(i, j), self.correlation_stderr[i][j]))
    }
}

/// Simulates `topology` with the relay maps of `plan`.
pub fn run(topology: &Topology, constellation: &Constellation, plan: &RelayPlan, cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let con = source_alphabet(topology, constellation)?;
    let maps = (0..topology.nodes().len()).map(|i| plan.map(i)).collect();
    let engine = Engine::new(topology, &con, maps);
    engine.require_maps()?;
    let mut batches: Vec<SampleMoments> =
        (0..cfg.batches).into_par_iter().map(|b| engine.moments_batch(cfg, b)).collect::<Result<_>>()?;
    let p = con.power();
    let alpha = total_of(&batches).report(p)?.alpha;
    let errors: Vec<u64> =
        (0..cfg.batches).into_par_iter().map(|b| engine.errors_batch(cfg, b, alpha)).collect::<Result<_>>()?;
    for (m, e) in batches.iter_mut().zip(errors) {
        m.error_count = e;
    }
    let total = total_of(&batches);
    summarize(topology, &engine.relays, p, total, &batches)
}

fn total_of(batches: &[SampleMoments]) -> SampleMoments {
    let mut total = SampleMoments::zeros(batches.first().map_or(0, |b| b.relays()));
    for b in batches {
        total.merge(b);
    }
    total
}

fn summarize(
    topology: &Topology,
    relays: &[usize],
    p: f64,
    total: SampleMoments,
    batches: &[SampleMoments],
) -> Result<SimResult> {
    let mut report = total.report(p)?.with_method(Method::MonteCarlo);
    report.sample_count = total.n;
    if !report.degenerate {
        report.gsnr_stderr = Some(jackknife(&total, batches, |m| Ok(m.report(p)?.gsnr))?);
        report.msuee_stderr = Some(jackknife(&total, batches, |m| Ok(m.report(p)?.msuee))?);
    }
    let ber = total.error_count as f64 / total.n as f64;
    let ber_stderr = jackknife(&total, batches, |m| Ok(m.error_count as f64 / m.n as f64))?;
    let power_estimate = total.mean(total.sum_x2);
    let power_stderr = jackknife(&total, batches, |m| Ok(m.mean(m.sum_x2)))?;
    let l = relays.len();
    let correlation = total.correlation(p)?;
    let mut correlation_stderr = vec![vec![0.0; l]; l];
    for (i, row) in correlation_stderr.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = jackknife_complex(&total, batches, |m| Ok(m.correlation(p)?.get(i, j)))?;
        }
    }
    Ok(SimResult {
        report,
        ber,
        ber_stderr,
        power_estimate,
        power_stderr,
        relay_ids: relays.iter().map(|&i| topology.node(i).id.clone()).collect(),
        correlation,
        correlation_stderr,
        moments: total,
    })
}

/// Builds the relay plan and simulates.
pub fn simulate(
    topology: &Topology,
    constellation: &Constellation,
    spec: GridSpec,
    cfg: &SimConfig,
) -> Result<SimResult> {
    let plan = RelayPlan::build(topology, constellation, spec, cfg)?;
    run(topology, constellation, &plan, cfg)
}

/// E[e_a* e_b] between two relays, with its standard error.
pub fn empirical_correlation(
    topology: &Topology,
    constellation: &Constellation,
    plan: &RelayPlan,
    cfg: &SimConfig,
    pair: (&str, &str),
) -> Result<(Complex64, f64)> {
    run(topology, constellation, plan, cfg)?.correlation_between(pair.0, pair.1)
}

/// Relay maps tabulated from pilot samples, relay by relay in topological
/// order. EF maps are binned conditional means of x, DF maps binned MAP
/// decisions and AF maps use the measured input power.
pub fn empirical_plan(topology: &Topology, constellation: &Constellation, cfg: &SimConfig) -> Result<RelayPlan> {
    if cfg.pilot_samples < MIN_SAMPLES || cfg.pilot_samples < cfg.batches as u64 {
        return Err(config(format!("at least {MIN_SAMPLES} pilot samples are required")));
    }
    let con = source_alphabet(topology, constellation)?;
    let n = topology.nodes().len();
    let mut maps: Vec<Option<RelayFunction>> = vec![None; n];
    for &i in topology.order() {
        let node = topology.node(i);
        if node.role != Role::Relay {
            continue;
        }
        let samples = {
            let engine = Engine::new(topology, &con, maps.iter().map(|m| m.as_ref()).collect());
            engine.pilot(cfg, i)?
        };
        let kind = node.strategy.expect("relays carry a strategy");
        maps[i] = Some(tabulate(kind, &con, &samples, node.power)?);
    }
    Ok(RelayPlan { maps, source: PlanSource::Empirical })
}

/// Relay map of `kind` fitted to pilot pairs (symbol index, observation).
pub fn tabulate(
    kind: RelayKind,
    con: &Constellation,
    samples: &[(usize, Complex64)],
    relay_power: f64,
) -> Result<RelayFunction> {
    if samples.is_empty() {
        return Err(config("no pilot samples"));
    }
    let n = samples.len() as f64;
    let f = match kind {
        RelayKind::Af => {
            let power = samples.iter().map(|(_, r)| r.norm_sqr()).sum::<f64>() / n;
            return RelayFunction::af_from_received(power, relay_power);
        }
        RelayKind::Custom => return Err(invalid("custom maps need an explicit function")),
        RelayKind::Ef | RelayKind::Df if con.is_real() => {
            let h = samples.iter().map(|(_, r)| r.re.abs()).fold(0.0, f64::max).max(1e-6);
            let grid = Grid1::symmetric(h, TABLE_BINS_REAL);
            let bins = bin_samples(con, samples, |r| vec![nearest(&grid, r.re)], TABLE_BINS_REAL);
            if kind == RelayKind::Ef {
                let values = fill_real(bins.iter().map(|b| b.mean(con).map(|v| v.re)).collect());
                RelayFunction::estimate_table(grid, values, 1.0, relay_power)
            } else {
                let labels = fill_real(bins.iter().map(|b| b.argmax().map(|k| k as f64)).collect());
                let labels: Vec<usize> = labels.into_iter().map(|v| v as usize).collect();
                let mut thresholds = Vec::new();
                let mut runs = vec![labels[0]];
                for w in 1..labels.len() {
                    if labels[w] != labels[w - 1] {
                        thresholds.push(0.5 * (grid.node(w - 1) + grid.node(w)));
                        runs.push(labels[w]);
                    }
                }
                RelayFunction::decision_intervals(thresholds, runs, con.points().to_vec(), 1.0, relay_power)?
            }
        }
        RelayKind::Ef | RelayKind::Df => {
            let h = samples.iter().map(|(_, r)| r.re.abs().max(r.im.abs())).fold(0.0, f64::max).max(1e-6);
            let grid = Grid1::symmetric(h, TABLE_BINS_COMPLEX);
            let nb = TABLE_BINS_COMPLEX;
            let bins = bin_samples(con, samples, |r| vec![nearest(&grid, r.re) * nb + nearest(&grid, r.im)], nb * nb);
            if kind == RelayKind::Ef {
                let values = fill_square(bins.iter().map(|b| b.mean(con)).collect(), nb);
                RelayFunction::estimate_table_2d(grid, values, 1.0, relay_power)
            } else {
                let labels =
                    fill_square(bins.iter().map(|b| b.argmax().map(|k| Complex64::new(k as f64, 0.0))).collect(), nb);
                // filled cells copy a neighbour's label, so rounding is exact
                let labels = labels.into_iter().map(|v| v.re.round() as usize).collect();
                RelayFunction::decision_table_2d(grid, labels, con.points().to_vec(), 1.0, relay_power)
            }
        }
    };
    let power = samples.iter().map(|(_, r)| f.unscaled(*r).0.norm_sqr()).sum::<f64>() / n;
    if !(power > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    Ok(f.rescaled((relay_power / power).sqrt()))
}

fn nearest(grid: &Grid1, x: f64) -> usize {
    (((x - grid.lo) / grid.step()).round().max(0.0) as usize).min(grid.n - 1)
}

#[derive(Clone)]
struct Bin {
    counts: Vec<u64>,
}

impl Bin {
    fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    fn mean(&self, con: &Constellation) -> Option<Complex64> {
        let t = self.total();
        (t > 0).then(|| self.counts.iter().zip(con.points()).map(|(c, x)| x * *c as f64).sum::<Complex64>() / t as f64)
    }

    fn argmax(&self) -> Option<usize> {
        (self.total() > 0).then(|| {
            let mut best = 0;
            for (k, c) in self.counts.iter().enumerate() {
                if *c > self.counts[best] {
                    best = k;
                }
            }
            best
        })
    }
}

fn bin_samples(
    con: &Constellation,
    samples: &[(usize, Complex64)],
    index: impl Fn(Complex64) -> Vec<usize>,
    bins: usize,
) -> Vec<Bin> {
    let mut out = vec![Bin { counts: vec![0; con.len()] }; bins];
    for (k, r) in samples {
        for b in index(*r) {
            out[b].counts[*k] += 1;
        }
    }
    out
}

/// Fills empty real bins by holding the nearest occupied neighbour (left first).
fn fill_real(values: Vec<Option<f64>>) -> Vec<f64> {
    let n = values.len();
    let occupied: Vec<usize> = (0..n).filter(|&i| values[i].is_some()).collect();
    (0..n)
        .map(|i| match values[i] {
            Some(v) => v,
            None => {
                let j = occupied
                    .iter()
                    .copied()
                    .min_by_key(|&j| (j as isize - i as isize).unsigned_abs())
                    .expect("at least one occupied bin");
                values[j].unwrap()
            }
        })
        .collect()
}

/// Fills empty cells of a square table from occupied 4-neighbours, sweeping
/// outward until every cell holds a value.
fn fill_square(mut values: Vec<Option<Complex64>>, n: usize) -> Vec<Complex64> {
    while values.iter().any(|v| v.is_none()) {
        let prev = values.clone();
        for i in 0..n {
            for j in 0..n {
                if prev[i * n + j].is_some() {
                    continue;
                }
                let nbrs = [(i.wrapping_sub(1), j), (i + 1, j), (i, j.wrapping_sub(1)), (i, j + 1)];
                let found = nbrs.iter().filter(|(a, b)| *a < n && *b < n).find_map(|(a, b)| prev[a * n + b]);
                values[i * n + j] = found;
            }
        }
    }
    values.into_iter().map(|v| v.unwrap()).collect()
}

/// Monte Carlo moments of memoryless maps of a single observation r = g·x + n.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MapComparison {
    /// Decomposition of each map's output t = f(r).
    pub reports: Vec<GsnrReport>,
    /// MSUEE of map i minus MSUEE of map 0 on the same samples, with its
    /// standard error.
    pub msuee_excess: Vec<(f64, f64)>,
}

/// Evaluates several maps on common samples of r = g·x + n.
pub fn compare_maps(
    constellation: &Constellation,
    gain: Complex64,
    maps: &[CustomMap],
    cfg: &SimConfig,
) -> Result<MapComparison> {
    cfg.validate()?;
    if maps.is_empty() {
        return Err(invalid("no maps to compare"));
    }
    let con = constellation;
    let p = con.power();
    let t = Topology::direct(p)?;
    let engine = Engine::new(&t, con, vec![None; 2]);
    let l = maps.len();
    let batches: Vec<SampleMoments> = (0..cfg.batches)
        .into_par_iter()
        .map(|b| {
            let (start, end) = cfg.batch_range(b);
            let mut rngs = streams(cfg.seed, DOMAIN_MAIN, 2, start);
            let mut m = SampleMoments::zeros(l);
            let mut out = vec![Complex64::new(0.0, 0.0); l];
            for _ in start..end {
                let (u, _) = rngs[0].uniform_pair();
                let k = engine.cumulative.iter().position(|c| u < *c).unwrap_or(con.len() - 1);
                let x = con.points()[k];
                let r = gain * x + engine.noise(&mut rngs[1]);
                for (o, f) in out.iter_mut().zip(maps) {
                    *o = f(r);
                    if !(o.re.is_finite() && o.im.is_finite()) {
                        return Err(Error::NonFinite { node: "map".into(), detail: format!("f({r}) = {o}") });
                    }
                }
                m.push(x, r, &out);
            }
            Ok(m)
        })
        .collect::<Result<_>>()?;
    let total = total_of(&batches);
    let mut reports = Vec::with_capacity(l);
    let mut msuee_excess = Vec::with_capacity(l);
    for i in 0..l {
        let mut r = total.relay_report(p, i)?.with_method(Method::MonteCarlo);
        r.sample_count = total.n;
        r.msuee_stderr = Some(jackknife(&total, &batches, |m| Ok(m.relay_report(p, i)?.msuee))?);
        if !r.degenerate {
            r.gsnr_stderr = Some(jackknife(&total, &batches, |m| Ok(m.relay_report(p, i)?.gsnr))?);
        }
        let diff = |m: &SampleMoments| Ok(m.relay_report(p, i)?.msuee - m.relay_report(p, 0)?.msuee);
        msuee_excess.push((diff(&total)?, jackknife(&total, &batches, diff)?));
        reports.push(r);
    }
    Ok(MapComparison { reports, msuee_excess })
}

/// A smooth random perturbation δ(r) = a·Σ_k c_k sin(ω_k r + φ_k)·e^{−r²/(2w²)},
/// drawn deterministically from `(seed, index)`.
pub fn smooth_perturbation(seed: u64, index: usize, amplitude: f64, width: f64) -> impl Fn(f64) -> f64 + Send + Sync {
    let mut rng = NodeRng::at(seed, DOMAIN_PILOT + 1, index, 0);
    let terms: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            let (c, w) = rng.uniform_pair();
            let (phi, _) = rng.uniform_pair();
            (2.0 * c - 1.0, 0.2 + 2.0 * w, std::f64::consts::TAU * phi)
        })
        .collect();
    move |r: f64| {
        let s: f64 = terms.iter().map(|(c, w, phi)| c * (w * r + phi).sin()).sum();
        amplitude * s * (-r * r / (2.0 * width * width)).exp()
    }
}

/// One row of a BER sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub power: f64,
    pub kind: RelayKind,
    pub gsnr: f64,
    pub gsnr_stderr: f64,
    pub ber: f64,
    pub ber_stderr: f64,
}

/// Simulates `template(kind, P)` for every power and strategy.
pub fn ber_sweep(
    template: impl Fn(RelayKind, f64) -> Result<Topology>,
    constellation: &Constellation,
    powers: &[f64],
    kinds: &[RelayKind],
    spec: GridSpec,
    cfg: &SimConfig,
) -> Result<Vec<SweepPoint>> {
    let mut out = Vec::with_capacity(powers.len() * kinds.len());
    for &p in powers {
        for &kind in kinds {
            let t = template(kind, p)?;
            let r = simulate(&t, constellation, spec, cfg)?;
            out.push(SweepPoint {
                power: p,
                kind,
                gsnr: r.report.gsnr,
                gsnr_stderr: r.report.gsnr_stderr.unwrap_or(f64::NAN),
                ber: r.ber,
                ber_stderr: r.ber_stderr,
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{make_psk, make_qam, q_function};
    use crate::gsnr::single_relay_gsnr;
    use crate::network::serial_af_gsnr;
    use std::sync::Arc;

    fn cfg(samples: u64) -> SimConfig {
        SimConfig { samples, seed: 11, batches: 32, pilot_samples: 200_000 }
    }

    fn within(a: f64, b: f64, se: f64, k: f64) -> bool {
        (a - b).abs() <= k * se
    }

    #[test]
    fn config_checks() {
        assert!(SimConfig::new(100, 1).validate().is_err());
        assert!(SimConfig { batches: 4, ..SimConfig::default() }.validate().is_err());
        let c = SimConfig::new(1001, 1);
        let c = SimConfig { samples: 10_001, ..c };
        let mut covered = 0;
        for b in 0..c.batches {
            let (s, e) = c.batch_range(b);
            assert_eq!(s, covered);
            covered = e;
        }
        assert_eq!(covered, c.samples);
    }

    #[test]
    fn direct_link_ber() {
        let con = make_psk(2, 4.0).unwrap();
        let t = Topology::direct(4.0).unwrap();
        let r = simulate(&t, &con, GridSpec::default(), &cfg(400_000)).unwrap();
        assert!(within(r.ber, q_function(2.0), r.ber_stderr, 4.0), "{} vs {}", r.ber, q_function(2.0));
        assert!(within(r.report.gsnr, 4.0, r.report.gsnr_stderr.unwrap(), 4.0));
        assert!(within(r.power_estimate, 4.0, r.power_stderr, 4.0));
    }

    #[test]
    fn single_af_relay() {
        let con = make_psk(2, 1.0).unwrap();
        let t = Topology::single(RelayKind::Af, 1.0, 1.0).unwrap();
        let r = simulate(&t, &con, GridSpec::default(), &cfg(200_000)).unwrap();
        let se = r.report.gsnr_stderr.unwrap();
        assert!(within(r.report.gsnr, single_relay_gsnr(1.0, 1.0, 1.0), se, 4.0));
    }

    #[test]
    fn deterministic_and_batch_order_free() {
        let con = make_psk(2, 2.0).unwrap();
        let t = Topology::serial_uniform(RelayKind::Af, 2, 2.0, 2.0).unwrap();
        let a = simulate(&t, &con, GridSpec::default(), &cfg(50_000)).unwrap();
        let b = simulate(&t, &con, GridSpec::default(), &cfg(50_000)).unwrap();
        assert_eq!(a.ber.to_bits(), b.ber.to_bits());
        assert_eq!(a.report.gsnr.to_bits(), b.report.gsnr.to_bits());
        // a different batch split sees the same samples
        let c = simulate(&t, &con, GridSpec::default(), &SimConfig { batches: 40, ..cfg(50_000) }).unwrap();
        assert_eq!(a.moments.error_count, c.moments.error_count);
        assert!((a.report.gsnr - c.report.gsnr).abs() < 1e-9 * a.report.gsnr);
        let se = a.report.gsnr_stderr.unwrap();
        assert!(within(a.report.gsnr, serial_af_gsnr(2, 2.0, 2.0), se, 4.0));
    }

    #[test]
    fn af_correlation_is_noise() {
        let con = make_psk(4, 2.0).unwrap();
        let t = Topology::parallel_uniform(RelayKind::Af, 2, 2.0, 2.0).unwrap();
        let r = simulate(&t, &con, GridSpec::default(), &cfg(200_000)).unwrap();
        let (c, se) = r.correlation_between("R1", "R2").unwrap();
        assert!(c.norm() < 4.0 * se, "{c} ± {se}");
        assert!(within(r.correlation.get(0, 0).re, 1.0, r.correlation_stderr[0][0], 4.0));
    }

    #[test]
    fn empirical_tables_track_quadrature() {
        let con = make_psk(2, 1.0).unwrap();
        for kind in RelayKind::STANDARD {
            let t = Topology::serial_uniform(kind, 2, 1.0, 1.0).unwrap();
            let q = crate::network::evaluate_topology(&t, &con, GridSpec::default()).unwrap();
            let c = SimConfig { pilot_samples: 400_000, ..cfg(200_000) };
            let plan = empirical_plan(&t, &con, &c).unwrap();
            assert_eq!(plan.source(), PlanSource::Empirical);
            let r = run(&t, &con, &plan, &c).unwrap();
            let se = r.report.gsnr_stderr.unwrap();
            assert!(
                (r.report.gsnr - q.gsnr).abs() < 4.0 * se + 0.01 * q.gsnr,
                "{kind}: {} vs {}",
                r.report.gsnr,
                q.gsnr
            );
        }
    }

    #[test]
    fn complex_serial_falls_back_to_pilot_tables() {
        let con = make_qam(4, 4.0).unwrap();
        let t = Topology::serial_uniform(RelayKind::Ef, 2, 4.0, 4.0).unwrap();
        let c = SimConfig { pilot_samples: 200_000, ..cfg(100_000) };
        let plan = RelayPlan::build(&t, &con, GridSpec::default(), &c).unwrap();
        assert_eq!(plan.source(), PlanSource::Empirical);
        let r = run(&t, &con, &plan, &c).unwrap();
        let df = simulate(&t.with_strategy(RelayKind::Df), &con, GridSpec::default(), &c).unwrap();
        assert!(r.report.gsnr + 4.0 * r.report.gsnr_stderr.unwrap() >= df.report.gsnr);
    }

    #[test]
    fn map_comparison_is_paired() {
        let con = make_psk(2, 1.0).unwrap();
        let tanh: CustomMap = Arc::new(|r: Complex64| Complex64::new(r.re.tanh(), 0.0));
        let twice: CustomMap = Arc::new(|r: Complex64| Complex64::new(2.0 * r.re.tanh(), 0.0));
        let lin: CustomMap = Arc::new(|r: Complex64| r);
        let c = compare_maps(&con, Complex64::new(1.0, 0.0), &[tanh, twice, lin], &cfg(100_000)).unwrap();
        assert!(c.msuee_excess[1].0.abs() < 1e-9);
        assert!(within(c.reports[2].msuee, 1.0, c.reports[2].msuee_stderr.unwrap(), 4.0));
        assert!(c.msuee_excess[2].0 > 3.0 * c.msuee_excess[2].1);
    }

    #[test]
    fn perturbations_are_reproducible() {
        let a = smooth_perturbation(3, 5, 0.1, 3.0);
        let b = smooth_perturbation(3, 5, 0.1, 3.0);
        let c = smooth_perturbation(3, 6, 0.1, 3.0);
        assert_eq!(a(0.7), b(0.7));
        assert_ne!(a(0.7), c(0.7));
        assert!(a(40.0).abs() < 1e-12);
    }
}
