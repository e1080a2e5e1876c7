//! Observation likelihoods `p(r | x = x_k)`.
//!
//! Each per-symbol density is held as a Gaussian mixture. A plain link
//! `r = g·x + n` is one component per symbol; after a nonlinear relay the
//! density becomes the pushforward of the previous stage (a set of atoms, exact
//! for DF and quadrature-discretized for EF) convolved with the next hop's unit
//! noise. Mixture form keeps point evaluation exact anywhere on the line, while
//! expectations over real observations use trapezoid quadrature on a uniform
//! grid and complex observations use noise-centred two-dimensional rules.

use std::io::{self, Write};
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::constellation::{phi_cdf, q_function, Constellation};
use crate::error::{config, invalid, Error, Result};
use crate::quadrature::{log_sum_exp, Grid1, NoiseRule};

const LN_2PI: f64 = 1.837_877_066_409_345_3;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Mass-loss tolerance for a constructed density.
pub const MASS_TOL: f64 = 1e-6;
/// Atoms lighter than this are dropped when a pushforward is discretized.
const PRUNE_WEIGHT: f64 = 1e-20;

/// A link `r = g·x + n` with unit-power noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLink {
    gain: Complex64,
}

impl GaussianLink {
    pub fn new(gain: Complex64) -> Result<Self> {
        if !gain.re.is_finite() || !gain.im.is_finite() || gain.norm() == 0.0 {
            return Err(invalid(format!("link gain must be finite and nonzero, got {gain}")));
        }
        Ok(Self { gain })
    }

    pub fn real(gain: f64) -> Result<Self> {
        Self::new(Complex64::new(gain, 0.0))
    }

    pub fn unit() -> Self {
        Self { gain: Complex64::new(1.0, 0.0) }
    }

    pub fn gain(&self) -> Complex64 {
        self.gain
    }

    pub fn noise_variance(&self) -> f64 {
        1.0
    }
}

/// One weighted Gaussian component. `var` is the real variance for real
/// observations and E|n|² for circular complex ones; zero means a point mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub mean: Complex64,
    pub weight: f64,
    pub var: f64,
}

impl Component {
    pub fn atom(mean: Complex64, weight: f64) -> Self {
        Self { mean, weight, var: 0.0 }
    }
}

/// Weighted sum of Gaussian components (and atoms).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Mixture {
    comps: Vec<Component>,
}

impl Mixture {
    pub fn new(comps: Vec<Component>) -> Self {
        Self { comps }
    }

    pub fn point(mean: Complex64) -> Self {
        Self { comps: vec![Component::atom(mean, 1.0)] }
    }

    pub fn components(&self) -> &[Component] {
        &self.comps
    }

    pub fn len(&self) -> usize {
        self.comps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.comps.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.comps.iter().map(|c| c.weight).sum()
    }

    pub fn mean(&self) -> Complex64 {
        self.comps.iter().map(|c| c.mean * c.weight).sum()
    }

    /// E|·|² including the component variances.
    pub fn second_moment(&self) -> f64 {
        self.comps.iter().map(|c| c.weight * (c.mean.norm_sqr() + c.var)).sum()
    }

    /// Law of `g·t` when `t` has this law.
    pub fn scaled(&self, g: Complex64) -> Self {
        let g2 = g.norm_sqr();
        Self {
            comps: self
                .comps
                .iter()
                .map(|c| Component { mean: c.mean * g, weight: c.weight, var: c.var * g2 })
                .collect(),
        }
    }

    /// Law after adding independent noise of variance `var`.
    pub fn with_noise(&self, var: f64) -> Self {
        Self { comps: self.comps.iter().map(|c| Component { var: c.var + var, ..*c }).collect() }
    }

    pub fn pruned(mut self) -> Self {
        self.comps.retain(|c| c.weight > PRUNE_WEIGHT);
        self
    }

    /// Law of the sum of independent variables. Exact when the pairwise product
    /// stays below `max_components`; otherwise both laws are binned onto a
    /// lattice of spacing `step` first (real laws only).
    pub fn convolve(&self, other: &Self, max_components: usize, step: f64) -> Result<Self> {
        if self.len() * other.len() <= max_components {
            let mut comps = Vec::with_capacity(self.len() * other.len());
            for a in &self.comps {
                for b in &other.comps {
                    comps.push(Component { mean: a.mean + b.mean, weight: a.weight * b.weight, var: a.var + b.var });
                }
            }
            return Ok(Self { comps }.pruned());
        }
        if self.comps.iter().chain(&other.comps).any(|c| c.mean.im != 0.0) {
            return Err(Error::Unsupported("binned convolution of complex laws".into()));
        }
        let (oa, la) = self.lattice(step);
        let (ob, lb) = other.lattice(step);
        let mut out = vec![0.0; la.len() + lb.len() - 1];
        for (i, wa) in la.iter().enumerate() {
            if *wa == 0.0 {
                continue;
            }
            for (j, wb) in lb.iter().enumerate() {
                out[i + j] += wa * wb;
            }
        }
        let origin = oa + ob;
        let comps = out
            .into_iter()
            .enumerate()
            .filter(|(_, w)| *w > PRUNE_WEIGHT)
            .map(|(i, w)| Component::atom(Complex64::new((origin + i as i64) as f64 * step, 0.0), w))
            .collect();
        Ok(Self { comps })
    }

    /// Spreads the law over integer multiples of `step`: atoms are split
    /// linearly between neighbours (mean preserving), Gaussian components are
    /// sampled over ±8σ. Returns the index of the first cell and the weights.
    fn lattice(&self, step: f64) -> (i64, Vec<f64>) {
        let mut lo = i64::MAX;
        let mut hi = i64::MIN;
        for c in &self.comps {
            let reach = 8.0 * c.var.sqrt();
            lo = lo.min(((c.mean.re - reach) / step).floor() as i64);
            hi = hi.max(((c.mean.re + reach) / step).ceil() as i64 + 1);
        }
        let mut w = vec![0.0; (hi - lo + 1) as usize];
        for c in &self.comps {
            if c.var == 0.0 {
                let t = c.mean.re / step;
                let i = t.floor();
                let frac = t - i;
                let idx = (i as i64 - lo) as usize;
                w[idx] += c.weight * (1.0 - frac);
                w[idx + 1] += c.weight * frac;
            } else {
                let sd = c.var.sqrt();
                let a = ((c.mean.re - 8.0 * sd) / step).floor() as i64;
                let b = ((c.mean.re + 8.0 * sd) / step).ceil() as i64;
                let vals: Vec<f64> = (a..=b)
                    .map(|i| {
                        let z = (i as f64 * step - c.mean.re) / sd;
                        (-0.5 * z * z).exp()
                    })
                    .collect();
                let total: f64 = vals.iter().sum();
                for (k, v) in vals.into_iter().enumerate() {
                    w[(a - lo) as usize + k] += c.weight * v / total;
                }
            }
        }
        (lo, w)
    }

    fn log_density(&self, r: Complex64, real: bool) -> f64 {
        log_sum_exp(self.comps.iter().map(|c| c.weight.ln() + log_gauss(r, c.mean, c.var, real)))
    }
}

fn log_gauss(r: Complex64, mean: Complex64, var: f64, real: bool) -> f64 {
    if var == 0.0 {
        return if r == mean { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    if real {
        let d = r.re - mean.re;
        -0.5 * d * d / var - 0.5 * (LN_2PI + var.ln())
    } else {
        -(r - mean).norm_sqr() / var - (LN_PI + var.ln())
    }
}

/// Probability that a real Gaussian N(mean, var) falls in `[lo, hi)`.
pub fn interval_probability(lo: f64, hi: f64, mean: f64, var: f64) -> f64 {
    if var == 0.0 {
        return if mean >= lo && mean < hi { 1.0 } else { 0.0 };
    }
    let sd = var.sqrt();
    let a = (lo - mean) / sd;
    let b = (hi - mean) / sd;
    if a >= 0.0 {
        q_function(a) - q_function(b)
    } else if b <= 0.0 {
        phi_cdf(b) - phi_cdf(a)
    } else {
        1.0 - q_function(b) - phi_cdf(a)
    }
}

/// Grid and quadrature resolution used to build densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    /// Points of the real observation grid.
    pub points: usize,
    /// Half-width margin beyond the outermost component, in standard deviations.
    pub margin: f64,
    /// Points per axis of the complex observation grid.
    pub complex_points: usize,
    /// Nodes per axis of the complex noise-centred quadrature rule.
    pub complex_noise_nodes: usize,
    /// Fixed half-width; derived from the components when `None`.
    pub half_width: Option<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 4096, margin: 8.0, complex_points: 512, complex_noise_nodes: 241, half_width: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Real line sampled on the grid.
    Real(Grid1),
    /// Square region, same grid on both axes.
    Complex(Grid1),
}

/// Result of a conditional-mean evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Posterior {
    pub mean: Complex64,
    /// All likelihoods vanished; `mean` is the prior mean.
    pub degenerate: bool,
}

/// Per-symbol observation density together with its quadrature domain.
#[derive(Debug)]
pub struct ChannelDensity {
    constellation: Constellation,
    symbols: Vec<Mixture>,
    real: bool,
    domain: Domain,
    spec: GridSpec,
    /// Variance shared by every component when each symbol has exactly one.
    single_var: Option<f64>,
    /// Real only: log p(r_i | x_k), indexed `[k][i]`.
    grid_loglik: Vec<Vec<f64>>,
    grid_posterior: OnceLock<Vec<Complex64>>,
    noise_rule: OnceLock<NoiseRule>,
}

impl Clone for ChannelDensity {
    fn clone(&self) -> Self {
        Self {
            constellation: self.constellation.clone(),
            symbols: self.symbols.clone(),
            real: self.real,
            domain: self.domain,
            spec: self.spec,
            single_var: self.single_var,
            grid_loglik: self.grid_loglik.clone(),
            grid_posterior: self.grid_posterior.clone(),
            noise_rule: OnceLock::new(),
        }
    }
}

/// Density of `r = g·x + n` for every constellation point.
pub fn gaussian_density(constellation: &Constellation, link: GaussianLink, spec: GridSpec) -> Result<ChannelDensity> {
    if constellation.is_real() && link.gain().im != 0.0 {
        return Err(Error::Unsupported("real constellations take real link gains".into()));
    }
    let symbols = constellation
        .points()
        .iter()
        .map(|x| Mixture::new(vec![Component { mean: x * link.gain(), weight: 1.0, var: 1.0 }]))
        .collect();
    ChannelDensity::from_mixtures(constellation.clone(), symbols, spec)
}

impl ChannelDensity {
    /// Builds a density from per-symbol mixtures (one per constellation point).
    pub fn from_mixtures(constellation: Constellation, symbols: Vec<Mixture>, spec: GridSpec) -> Result<Self> {
        if symbols.len() != constellation.len() {
            return Err(invalid("one mixture per constellation point is required"));
        }
        if symbols.iter().any(|m| m.is_empty()) {
            return Err(invalid("empty per-symbol mixture"));
        }
        if symbols.iter().flat_map(|m| &m.comps).any(|c| c.var <= 0.0) {
            return Err(invalid("observation densities need strictly positive component variance"));
        }
        let real = constellation.is_real() && symbols.iter().flat_map(|m| &m.comps).all(|c| c.mean.im == 0.0);
        if !real && constellation.is_real() {
            return Err(Error::Unsupported("complex observations of a real constellation".into()));
        }
        let single_var = {
            let first = symbols[0].comps[0].var;
            symbols.iter().all(|m| m.len() == 1 && m.comps[0].var == first).then_some(first)
        };
        let domain = Self::domain_for(&symbols, real, &spec)?;
        let mut density = Self {
            constellation,
            symbols,
            real,
            domain,
            spec,
            single_var,
            grid_loglik: Vec::new(),
            grid_posterior: OnceLock::new(),
            noise_rule: OnceLock::new(),
        };
        if let Some(m) = density.symbols.iter().map(Mixture::mass).find(|m| (m - 1.0).abs() > MASS_TOL) {
            return Err(config(format!("per-symbol mixture carries mass {m}, expected 1")));
        }
        let loss = density.mass_loss();
        if loss > MASS_TOL {
            return Err(config(format!(
                "observation grid too narrow: {loss:.3e} of the probability mass falls outside"
            )));
        }
        if let Domain::Real(grid) = density.domain {
            let nodes = grid.nodes();
            density.grid_loglik = density
                .symbols
                .par_iter()
                .map(|m| nodes.iter().map(|&r| m.log_density(Complex64::new(r, 0.0), true)).collect())
                .collect();
        }
        Ok(density)
    }

    fn domain_for(symbols: &[Mixture], real: bool, spec: &GridSpec) -> Result<Domain> {
        if real && spec.points < 16 || !real && spec.complex_points < 16 {
            return Err(config("observation grid needs at least 16 points per axis"));
        }
        let half = match spec.half_width {
            Some(h) if h > 0.0 => h,
            Some(h) => return Err(config(format!("grid half-width must be positive, got {h}"))),
            None => {
                let mut half: f64 = 0.0;
                for c in symbols.iter().flat_map(|m| &m.comps) {
                    if c.weight < 1e-15 {
                        continue;
                    }
                    if real {
                        half = half.max(c.mean.re.abs() + spec.margin * c.var.sqrt());
                    } else {
                        let reach = spec.margin * (0.5 * c.var).sqrt();
                        half = half.max(c.mean.re.abs() + reach).max(c.mean.im.abs() + reach);
                    }
                }
                half
            }
        };
        Ok(if real {
            Domain::Real(Grid1::symmetric(half, spec.points))
        } else {
            Domain::Complex(Grid1::symmetric(half, spec.complex_points))
        })
    }

    pub fn constellation(&self) -> &Constellation {
        &self.constellation
    }

    pub fn symbols(&self) -> &[Mixture] {
        &self.symbols
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn grid(&self) -> Grid1 {
        match self.domain {
            Domain::Real(g) | Domain::Complex(g) => g,
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Total component count over all symbols.
    pub fn complexity(&self) -> usize {
        self.symbols.iter().map(Mixture::len).sum()
    }

    /// Probability mass outside the grid, worst symbol (computed analytically).
    pub fn mass_loss(&self) -> f64 {
        let g = self.grid();
        self.symbols
            .iter()
            .map(|m| {
                let inside: f64 = m
                    .comps
                    .iter()
                    .map(|c| {
                        let p_re =
                            interval_probability(g.lo, g.hi, c.mean.re, if self.real { c.var } else { 0.5 * c.var });
                        let p_im =
                            if self.real { 1.0 } else { interval_probability(g.lo, g.hi, c.mean.im, 0.5 * c.var) };
                        c.weight * p_re * p_im
                    })
                    .sum();
                (m.mass() - inside).abs()
            })
            .fold(0.0, f64::max)
    }

    /// E[r | x_k] and E[|r|² | x_k] for each symbol (exact).
    pub fn conditional_moments(&self) -> Vec<(Complex64, f64)> {
        self.symbols.iter().map(|m| (m.mean(), m.second_moment())).collect()
    }

    /// E|r|² under the marginal.
    pub fn received_power(&self) -> f64 {
        self.symbols.iter().zip(self.constellation.priors()).map(|(m, p)| p * m.second_moment()).sum()
    }

    /// log p(r | x_k) at an arbitrary point.
    pub fn log_likelihood(&self, k: usize, r: Complex64) -> f64 {
        self.symbols[k].log_density(r, self.real)
    }

    /// p(r | x_k) at an arbitrary point.
    pub fn likelihood(&self, k: usize, r: Complex64) -> f64 {
        self.log_likelihood(k, r).exp()
    }

    /// Unnormalized log posterior weights `ln p_k + ln p(r | x_k)` (up to a
    /// common constant).
    fn logits(&self, r: Complex64) -> Vec<f64> {
        let priors = self.constellation.priors();
        match self.single_var {
            // Expanded quadratic: the |r|² term is common to every symbol and is
            // dropped, which keeps far-tail ratios exact.
            Some(v) => {
                let denom = if self.real { 2.0 * v } else { v };
                self.symbols
                    .iter()
                    .zip(priors)
                    .map(|(m, p)| {
                        let mu = m.comps[0].mean;
                        let cross = if self.real { r.re * mu.re } else { (r * mu.conj()).re };
                        p.ln() + (2.0 * cross - mu.norm_sqr()) / denom
                    })
                    .collect()
            }
            None => (0..self.symbols.len()).map(|k| priors[k].ln() + self.log_likelihood(k, r)).collect(),
        }
    }

    /// E[x | r] under the constellation priors.
    pub fn posterior_mean(&self, r: Complex64) -> Posterior {
        posterior_from_logits(&self.logits(r), self.constellation.points())
    }

    /// Index maximizing `p_k · p(r | x_k)`; ties go to the lowest index.
    pub fn map_decision(&self, r: Complex64) -> usize {
        argmax_first(&self.logits(r))
    }

    /// Conditional means at every real grid node (cached).
    pub fn posterior_on_grid(&self) -> &[Complex64] {
        self.grid_posterior.get_or_init(|| {
            let Domain::Real(grid) = self.domain else {
                return Vec::new();
            };
            let priors = self.constellation.priors();
            (0..grid.n)
                .into_par_iter()
                .map(|i| {
                    if self.single_var.is_some() {
                        return self.posterior_mean(Complex64::new(grid.node(i), 0.0)).mean;
                    }
                    let logits: Vec<f64> =
                        self.grid_loglik.iter().zip(priors).map(|(row, p)| p.ln() + row[i]).collect();
                    posterior_from_logits(&logits, self.constellation.points()).mean
                })
                .collect()
        })
    }

    /// p(r_i | x_k) on the real grid, indexed `[k][i]`. Empty for complex domains.
    pub fn densities_on_grid(&self) -> Vec<Vec<f64>> {
        self.grid_loglik.iter().map(|row| row.iter().map(|l| l.exp()).collect()).collect()
    }

    /// Per-symbol densities on the complex grid, row-major (real axis outer).
    pub fn sample_complex(&self) -> Vec<Vec<f64>> {
        let g = self.grid();
        (0..self.symbols.len())
            .into_par_iter()
            .map(|k| {
                let mut out = Vec::with_capacity(g.n * g.n);
                for i in 0..g.n {
                    for j in 0..g.n {
                        out.push(self.likelihood(k, Complex64::new(g.node(i), g.node(j))));
                    }
                }
                out
            })
            .collect()
    }

    /// Trapezoid integral of each per-symbol density over the grid.
    pub fn grid_masses(&self) -> Vec<f64> {
        let g = self.grid();
        if self.real {
            self.densities_on_grid().iter().map(|d| g.integrate(d)).collect()
        } else {
            self.sample_complex()
                .iter()
                .map(|d| {
                    let mut s = 0.0;
                    for i in 0..g.n {
                        for j in 0..g.n {
                            s += g.weight(i) * g.weight(j) * d[i * g.n + j];
                        }
                    }
                    s
                })
                .collect()
        }
    }

    fn noise_rule(&self) -> &NoiseRule {
        self.noise_rule.get_or_init(|| NoiseRule::complex(self.spec.complex_noise_nodes, 9.0))
    }

    /// E[h(r) | x_k] for every symbol, generic over the accumulated value.
    pub fn expect_per_symbol<T>(&self, h: impl Fn(Complex64) -> T + Sync) -> Vec<T>
    where
        T: Copy + Default + Send + Sync + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        match self.domain {
            Domain::Real(grid) => {
                let values: Vec<T> =
                    (0..grid.n).into_par_iter().map(|i| h(Complex64::new(grid.node(i), 0.0))).collect();
                self.expect_grid_values(&values)
            }
            Domain::Complex(_) => self.expect_per_symbol_with(|_, r| h(r)),
        }
    }

    /// E[h(k, r) | x_k] for every symbol `k`.
    pub fn expect_per_symbol_with<T>(&self, h: impl Fn(usize, Complex64) -> T + Sync) -> Vec<T>
    where
        T: Copy + Default + Send + Sync + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        match self.domain {
            Domain::Real(grid) => self.expect_on_grid(|k, i| h(k, Complex64::new(grid.node(i), 0.0))),
            Domain::Complex(_) => {
                let rule = self.noise_rule();
                self.symbols
                    .par_iter()
                    .enumerate()
                    .map(|(k, m)| {
                        let mut acc = T::default();
                        for c in &m.comps {
                            let sd = c.var.sqrt();
                            let mut inner = T::default();
                            for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                                inner += h(k, c.mean + z * sd) * *w;
                            }
                            acc += inner * c.weight;
                        }
                        acc
                    })
                    .collect()
            }
        }
    }

    /// E[h | x_k] from samples of `h` at the real grid nodes.
    pub fn expect_grid_values<T>(&self, values: &[T]) -> Vec<T>
    where
        T: Copy + Default + Send + Sync + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        self.expect_on_grid(|_, i| values[i])
    }

    /// Σ_i w_i p(r_i | x_k) h(k, i) over the real grid nodes, for every symbol.
    pub fn expect_on_grid<T>(&self, h: impl Fn(usize, usize) -> T + Sync) -> Vec<T>
    where
        T: Copy + Default + Send + Sync + std::ops::AddAssign + std::ops::Mul<f64, Output = T>,
    {
        let Domain::Real(grid) = self.domain else {
            panic!("grid expectations need a real domain");
        };
        self.grid_loglik
            .par_iter()
            .enumerate()
            .map(|(k, row)| {
                let mut acc = T::default();
                for (i, l) in row.iter().enumerate() {
                    let d = l.exp();
                    if d > 0.0 {
                        acc += h(k, i) * (d * grid.weight(i));
                    }
                }
                acc
            })
            .collect()
    }

    /// E[h(r)] under the marginal Σ_k p_k p(r | x_k).
    pub fn expect_marginal(&self, h: impl Fn(Complex64) -> f64 + Sync) -> f64 {
        self.expect_per_symbol(h).iter().zip(self.constellation.priors()).map(|(v, p)| v * p).sum()
    }

    /// Writes the grid and per-symbol densities as CSV.
    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        let g = self.grid();
        let m = self.symbols.len();
        if self.real {
            write!(w, "r")?;
            for k in 0..m {
                write!(w, ",p{k}")?;
            }
            writeln!(w)?;
            let d = self.densities_on_grid();
            for i in 0..g.n {
                write!(w, "{:.11e}", g.node(i))?;
                for row in &d {
                    write!(w, ",{:.11e}", row[i])?;
                }
                writeln!(w)?;
            }
        } else {
            write!(w, "re,im")?;
            for k in 0..m {
                write!(w, ",p{k}")?;
            }
            writeln!(w)?;
            let d = self.sample_complex();
            for i in 0..g.n {
                for j in 0..g.n {
                    write!(w, "{:.11e},{:.11e}", g.node(i), g.node(j))?;
                    for row in &d {
                        write!(w, ",{:.11e}", row[i * g.n + j])?;
                    }
                    writeln!(w)?;
                }
            }
        }
        Ok(())
    }
}

fn posterior_from_logits(logits: &[f64], points: &[Complex64]) -> Posterior {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Posterior { mean: Complex64::new(0.0, 0.0), degenerate: true };
    }
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for (l, x) in logits.iter().zip(points) {
        let w = (l - max).exp();
        num += x * w;
        den += w;
    }
    Posterior { mean: num / den, degenerate: false }
}

pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, v) in values.iter().enumerate() {
        if *v > values[best] {
            best = k;
        }
    }
    best
}

/// Free-function form of [`ChannelDensity::posterior_mean`].
pub fn posterior_mean(density: &ChannelDensity, r: Complex64) -> Posterior {
    density.posterior_mean(r)
}

/// Density of `f(r) + n` where `r` follows `density` and `n` is unit noise.
pub fn push_through_relay(
    density: &ChannelDensity,
    relay: &crate::relayfn::RelayFunction,
    spec: GridSpec,
) -> Result<ChannelDensity> {
    let transmit = relay.pushforward(density)?;
    let received = transmit.iter().map(|m| m.with_noise(1.0)).collect();
    ChannelDensity::from_mixtures(density.constellation().clone(), received, spec)
}

/// Shared handle used by relay functions that keep their input density.
pub type SharedDensity = Arc<ChannelDensity>;
