//! Memoryless relay maps: amplify, demodulate and estimate-and-forward.
//!
//! Each map is stored unscaled together with the factor that brings its output
//! power to the relay budget, so `evaluate(r) = scale · map(r)`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{interval_probability, ChannelDensity, Component, Domain, Mixture};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate_gl, Grid1, NoiseRule};

/// Mixtures at or below this many components keep an exact conditional mean;
/// larger ones are tabulated on the observation grid.
pub const EXACT_ESTIMATE_LIMIT: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RelayKind {
    Af,
    Df,
    Ef,
    Custom,
}

impl RelayKind {
    pub const STANDARD: [RelayKind; 3] = [RelayKind::Af, RelayKind::Df, RelayKind::Ef];
}

impl fmt::Display for RelayKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Af => "af",
            Self::Df => "df",
            Self::Ef => "ef",
            Self::Custom => "custom",
        })
    }
}

impl FromStr for RelayKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "af" | "amplify" => Ok(Self::Af),
            "df" | "demodulate" => Ok(Self::Df),
            "ef" | "estimate" => Ok(Self::Ef),
            "custom" => Ok(Self::Custom),
            other => Err(invalid(format!("unknown relay strategy '{other}'"))),
        }
    }
}

pub type CustomMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Conditional output moments E[f(r) | x_k] and E[|f(r)|² | x_k].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OutputMoments {
    pub mean: Complex64,
    pub power: f64,
}

impl std::ops::AddAssign for OutputMoments {
    fn add_assign(&mut self, o: Self) {
        self.mean += o.mean;
        self.power += o.power;
    }
}

impl std::ops::Mul<f64> for OutputMoments {
    type Output = Self;
    fn mul(self, w: f64) -> Self {
        Self { mean: self.mean * w, power: self.power * w }
    }
}

#[derive(Clone)]
enum Map {
    Linear,
    /// Real decision regions: `labels[i]` owns `[thresholds[i-1], thresholds[i])`.
    Intervals {
        thresholds: Vec<f64>,
        labels: Vec<usize>,
    },
    /// Complex decision by likelihood argmax.
    Decide {
        density: Arc<ChannelDensity>,
        geometry: Geometry,
    },
    /// Complex decision from a labelled square table (nearest cell).
    LabelTable {
        grid: Grid1,
        labels: Vec<usize>,
    },
    /// Exact conditional mean of a small mixture.
    Exact(Arc<ChannelDensity>),
    /// Real samples on a grid, linearly interpolated.
    Sampled {
        grid: Grid1,
        values: Vec<f64>,
    },
    /// Complex samples on a square grid, bilinearly interpolated.
    Sampled2 {
        grid: Grid1,
        values: Vec<Complex64>,
    },
    Func(CustomMap),
}

/// Shape of the decision regions of a complex demodulator.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Geometry {
    /// Centres g·x_k on a circle, equally spaced; wedges of width 2π/M.
    Psk {
        rotation: f64,
    },
    /// Centres g·x_k on a square grid; separable after de-rotation by g.
    Qam {
        gain: Complex64,
    },
    General,
}

/// A power-normalized memoryless relay map.
#[derive(Clone)]
pub struct RelayFunction {
    kind: RelayKind,
    map: Map,
    scale: f64,
    relay_power: f64,
    /// Unscaled output alphabet of a demodulator.
    alphabet: Vec<Complex64>,
}

impl fmt::Debug for RelayFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let map = match &self.map {
            Map::Linear => "linear",
            Map::Intervals { .. } => "intervals",
            Map::Decide { .. } => "decision",
            Map::LabelTable { .. } => "label-table",
            Map::Exact(_) => "exact-mean",
            Map::Sampled { .. } => "sampled",
            Map::Sampled2 { .. } => "sampled-2d",
            Map::Func(_) => "custom",
        };
        f.debug_struct("RelayFunction")
            .field("kind", &self.kind)
            .field("map", &map)
            .field("scale", &self.scale)
            .field("relay_power", &self.relay_power)
            .finish()
    }
}

fn check_power(p: f64, what: &str) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be positive and finite, got {p}")))
    }
}

impl RelayFunction {
    /// Amplify-and-forward for an input of signal power `input_power` plus unit noise.
    pub fn af(input_power: f64, relay_power: f64) -> Result<Self> {
        if !(input_power >= 0.0) {
            return Err(invalid("input power must be non-negative"));
        }
        check_power(relay_power, "relay power")?;
        Ok(Self::linear((relay_power / (input_power + 1.0)).sqrt(), relay_power))
    }

    /// Amplify-and-forward normalized by the received power of `density`.
    pub fn af_for(density: &ChannelDensity, relay_power: f64) -> Result<Self> {
        check_power(relay_power, "relay power")?;
        Self::af_from_received(density.received_power(), relay_power)
    }

    /// Amplify-and-forward normalized by a measured received power E|r|².
    pub fn af_from_received(received_power: f64, relay_power: f64) -> Result<Self> {
        if !(received_power > 0.0) {
            return Err(invalid("received power must be positive"));
        }
        Ok(Self::linear((relay_power / received_power).sqrt(), relay_power))
    }

    fn linear(scale: f64, relay_power: f64) -> Self {
        Self { kind: RelayKind::Af, map: Map::Linear, scale, relay_power, alphabet: Vec::new() }
    }

    /// Demodulate-and-forward: MAP decision re-modulated onto the source
    /// alphabet and scaled to the relay power under the actual decision law.
    pub fn df(density: &ChannelDensity, relay_power: f64) -> Result<Self> {
        check_power(relay_power, "relay power")?;
        let alphabet = density.constellation().points().to_vec();
        let map = if density.is_real() {
            let (thresholds, labels) = decision_intervals(density);
            Map::Intervals { thresholds, labels }
        } else {
            Map::Decide { geometry: geometry_of(density), density: Arc::new(density.clone()) }
        };
        let mut f = Self { kind: RelayKind::Df, map, scale: 1.0, relay_power, alphabet };
        f.normalize(density)?;
        Ok(f)
    }

    /// Estimate-and-forward: the conditional mean E[x | r] scaled to the relay power.
    pub fn ef(density: &ChannelDensity, relay_power: f64) -> Result<Self> {
        check_power(relay_power, "relay power")?;
        let map = match density.domain() {
            Domain::Real(grid) if density.complexity() > EXACT_ESTIMATE_LIMIT => {
                Map::Sampled { grid, values: density.posterior_on_grid().iter().map(|x| x.re).collect() }
            }
            _ => Map::Exact(Arc::new(density.clone())),
        };
        let mut f = Self { kind: RelayKind::Ef, map, scale: 1.0, relay_power, alphabet: Vec::new() };
        f.normalize(density).map_err(|e| match e {
            Error::InvalidArgument(_) => Error::DegenerateChannel,
            other => other,
        })?;
        Ok(f)
    }

    /// Arbitrary map scaled to the relay power under `density`.
    pub fn custom(map: CustomMap, density: &ChannelDensity, relay_power: f64) -> Result<Self> {
        check_power(relay_power, "relay power")?;
        let mut f =
            Self { kind: RelayKind::Custom, map: Map::Func(map), scale: 1.0, relay_power, alphabet: Vec::new() };
        f.normalize(density)?;
        Ok(f)
    }

    /// Arbitrary map with an explicit scale; no normalization is applied.
    pub fn custom_scaled(map: CustomMap, scale: f64, relay_power: f64) -> Self {
        Self { kind: RelayKind::Custom, map: Map::Func(map), scale, relay_power, alphabet: Vec::new() }
    }

    /// Estimate map from a real lookup table (grid samples of E[x | r]).
    pub fn estimate_table(grid: Grid1, values: Vec<f64>, scale: f64, relay_power: f64) -> Self {
        Self { kind: RelayKind::Ef, map: Map::Sampled { grid, values }, scale, relay_power, alphabet: Vec::new() }
    }

    /// Estimate map from a complex square table, row-major with the real axis outer.
    pub fn estimate_table_2d(grid: Grid1, values: Vec<Complex64>, scale: f64, relay_power: f64) -> Self {
        Self { kind: RelayKind::Ef, map: Map::Sampled2 { grid, values }, scale, relay_power, alphabet: Vec::new() }
    }

    /// Real demodulator from explicit decision regions.
    pub fn decision_intervals(
        thresholds: Vec<f64>,
        labels: Vec<usize>,
        alphabet: Vec<Complex64>,
        scale: f64,
        relay_power: f64,
    ) -> Result<Self> {
        if labels.len() != thresholds.len() + 1 || labels.iter().any(|&l| l >= alphabet.len()) {
            return Err(invalid("decision regions do not match the alphabet"));
        }
        if thresholds.windows(2).any(|w| w[0] > w[1]) {
            return Err(invalid("decision thresholds must be sorted"));
        }
        Ok(Self { kind: RelayKind::Df, map: Map::Intervals { thresholds, labels }, scale, relay_power, alphabet })
    }

    /// Complex demodulator from a labelled square table.
    pub fn decision_table_2d(
        grid: Grid1,
        labels: Vec<usize>,
        alphabet: Vec<Complex64>,
        scale: f64,
        relay_power: f64,
    ) -> Self {
        Self { kind: RelayKind::Df, map: Map::LabelTable { grid, labels }, scale, relay_power, alphabet }
    }

    /// Rescales so that E|f(r)|² equals the relay power under `density`.
    pub fn normalize(&mut self, density: &ChannelDensity) -> Result<()> {
        self.scale = 1.0;
        let power = self.output_power(density)?;
        if !(power > 0.0) || !power.is_finite() {
            return Err(invalid(format!("relay map carries no power ({power:e})")));
        }
        self.scale = (self.relay_power / power).sqrt();
        Ok(())
    }

    /// Same map with an explicit scale.
    pub fn rescaled(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    pub fn kind(&self) -> RelayKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn relay_power(&self) -> f64 {
        self.relay_power
    }

    /// Output alphabet of a demodulator, scaled.
    pub fn alphabet(&self) -> Vec<Complex64> {
        self.alphabet.iter().map(|x| x * self.scale).collect()
    }

    /// True when the map is stored as grid samples.
    pub fn is_grid_backed(&self) -> bool {
        matches!(self.map, Map::Sampled { .. } | Map::Sampled2 { .. } | Map::LabelTable { .. })
    }

    /// f(r).
    pub fn evaluate(&self, r: Complex64) -> Complex64 {
        self.evaluate_flagged(r).0
    }

    /// f(r) and whether a grid-backed map was extrapolated.
    pub fn evaluate_flagged(&self, r: Complex64) -> (Complex64, bool) {
        let (v, out) = self.unscaled(r);
        (v * self.scale, out)
    }

    /// The map before power scaling.
    pub fn unscaled(&self, r: Complex64) -> (Complex64, bool) {
        match &self.map {
            Map::Linear => (r, false),
            Map::Intervals { thresholds, labels } => (self.alphabet[interval_label(thresholds, labels, r.re)], false),
            Map::Decide { density, .. } => (self.alphabet[density.map_decision(r)], false),
            Map::LabelTable { grid, labels } => {
                let (i, oi) = nearest_index(grid, r.re);
                let (j, oj) = nearest_index(grid, r.im);
                (self.alphabet[labels[i * grid.n + j]], oi || oj)
            }
            Map::Exact(density) => (density.posterior_mean(r).mean, false),
            Map::Sampled { grid, values } => {
                let (v, out) = grid.interpolate(values, r.re);
                (Complex64::new(v, 0.0), out)
            }
            Map::Sampled2 { grid, values } => bilinear(grid, values, r),
            Map::Func(f) => (f(r), false),
        }
    }

    /// Law of f(r) for each source symbol, where r follows `density`.
    pub fn pushforward(&self, density: &ChannelDensity) -> Result<Vec<Mixture>> {
        let s = Complex64::new(self.scale, 0.0);
        match &self.map {
            Map::Linear => Ok(density.symbols().iter().map(|m| m.scaled(s)).collect()),
            Map::Intervals { .. } | Map::Decide { .. } => {
                let probs = self.decision_probabilities(density)?;
                Ok(probs
                    .into_iter()
                    .map(|row| {
                        Mixture::new(
                            row.into_iter()
                                .enumerate()
                                .filter(|(_, p)| *p > 0.0)
                                .map(|(m, p)| Component::atom(self.alphabet[m] * self.scale, p))
                                .collect(),
                        )
                    })
                    .collect())
            }
            _ => {
                let Domain::Real(grid) = density.domain() else {
                    return Err(Error::Unsupported("pushforward of a nonlinear map over complex observations".into()));
                };
                let values: Vec<Complex64> =
                    (0..grid.n).map(|i| self.evaluate(Complex64::new(grid.node(i), 0.0))).collect();
                let dens = density.densities_on_grid();
                Ok(dens
                    .iter()
                    .map(|row| {
                        Mixture::new(
                            row.iter()
                                .enumerate()
                                .map(|(i, d)| Component::atom(values[i], d * grid.weight(i)))
                                .collect(),
                        )
                        .pruned()
                    })
                    .collect())
            }
        }
    }

    /// Decision probabilities P(m | x_k) under `density`, indexed `[k][m]`.
    pub fn decision_probabilities(&self, density: &ChannelDensity) -> Result<Vec<Vec<f64>>> {
        let m = self.alphabet.len();
        match &self.map {
            Map::Intervals { thresholds, labels } => Ok(density
                .symbols()
                .iter()
                .map(|mix| {
                    let mut row = vec![0.0; m];
                    for c in mix.components() {
                        for (i, &label) in labels.iter().enumerate() {
                            let lo = if i == 0 { f64::NEG_INFINITY } else { thresholds[i - 1] };
                            let hi = thresholds.get(i).copied().unwrap_or(f64::INFINITY);
                            row[label] += c.weight * interval_probability(lo, hi, c.mean.re, c.var);
                        }
                    }
                    row
                })
                .collect()),
            Map::Decide { density: own, geometry } => {
                let centres: Vec<Complex64> = own.symbols().iter().map(|s| s.components()[0].mean).collect();
                let rule =
                    (*geometry == Geometry::General).then(|| NoiseRule::complex(own.spec().complex_noise_nodes, 9.0));
                Ok(density
                    .symbols()
                    .iter()
                    .map(|mix| {
                        let mut row = vec![0.0; m];
                        for c in mix.components() {
                            match geometry {
                                Geometry::Psk { rotation } => {
                                    for (k, p) in row.iter_mut().enumerate() {
                                        let centre = rotation + 2.0 * PI * k as f64 / m as f64;
                                        *p += c.weight
                                            * wedge_probability(
                                                c.mean,
                                                c.var,
                                                centre - PI / m as f64,
                                                centre + PI / m as f64,
                                            );
                                    }
                                }
                                Geometry::Qam { gain } => {
                                    let mean = c.mean / gain;
                                    let axis_var = 0.5 * c.var / gain.norm_sqr();
                                    let levels: Vec<f64> = sorted_levels(centres.iter().map(|x| (x / gain).re));
                                    let pi = axis_probabilities(&levels, mean.re, axis_var);
                                    let pq = axis_probabilities(&levels, mean.im, axis_var);
                                    for (k, p) in row.iter_mut().enumerate() {
                                        let x = centres[k] / gain;
                                        let i = level_index(&levels, x.re);
                                        let q = level_index(&levels, x.im);
                                        *p += c.weight * pi[i] * pq[q];
                                    }
                                }
                                Geometry::General => {
                                    let rule = rule.as_ref().expect("rule built for general geometry");
                                    let sd = c.var.sqrt();
                                    for (z, w) in rule.nodes.iter().zip(&rule.weights) {
                                        row[own.map_decision(c.mean + z * sd)] += c.weight * w;
                                    }
                                }
                            }
                        }
                        row
                    })
                    .collect())
            }
            _ => Err(Error::Unsupported("decision probabilities of a non-demodulating map".into())),
        }
    }

    /// Per-symbol output moments under `density`.
    pub fn conditional_moments(&self, density: &ChannelDensity) -> Result<Vec<OutputMoments>> {
        match (&self.map, density.domain()) {
            (Map::Linear | Map::Intervals { .. } | Map::Decide { .. }, _) | (_, Domain::Real(_)) => Ok(self
                .pushforward(density)?
                .iter()
                .map(|m| OutputMoments { mean: m.mean(), power: m.second_moment() })
                .collect()),
            (_, Domain::Complex(_)) => Ok(density.expect_per_symbol(|r| {
                let v = self.evaluate(r);
                OutputMoments { mean: v, power: v.norm_sqr() }
            })),
        }
    }

    /// E|f(r)|² under the marginal of `density`.
    pub fn output_power(&self, density: &ChannelDensity) -> Result<f64> {
        Ok(self
            .conditional_moments(density)?
            .iter()
            .zip(density.constellation().priors())
            .map(|(m, p)| p * m.power)
            .sum())
    }
}

fn interval_label(thresholds: &[f64], labels: &[usize], r: f64) -> usize {
    let i = thresholds.partition_point(|&t| t < r);
    if i < thresholds.len() && thresholds[i] == r {
        labels[i].min(labels[i + 1])
    } else {
        labels[i]
    }
}

fn nearest_index(grid: &Grid1, x: f64) -> (usize, bool) {
    let t = ((x - grid.lo) / grid.step()).round();
    let out = !grid.contains(x);
    (t.clamp(0.0, (grid.n - 1) as f64) as usize, out)
}

fn bilinear(grid: &Grid1, values: &[Complex64], r: Complex64) -> (Complex64, bool) {
    let out = !grid.contains(r.re) || !grid.contains(r.im);
    let locate = |x: f64| {
        let t = ((x.clamp(grid.lo, grid.hi) - grid.lo) / grid.step()).max(0.0);
        let i = (t.floor() as usize).min(grid.n - 2);
        (i, (t - i as f64).clamp(0.0, 1.0))
    };
    let (i, a) = locate(r.re);
    let (j, b) = locate(r.im);
    let n = grid.n;
    let v = values[i * n + j] * ((1.0 - a) * (1.0 - b))
        + values[(i + 1) * n + j] * (a * (1.0 - b))
        + values[i * n + j + 1] * ((1.0 - a) * b)
        + values[(i + 1) * n + j + 1] * (a * b);
    (v, out)
}

/// MAP decision regions of a real density. Boundaries are located on the grid
/// and refined by bisection; for single-Gaussian symbols with a shared variance
/// they are replaced by the exact crossing of the two log-likelihood lines.
fn decision_intervals(density: &ChannelDensity) -> (Vec<f64>, Vec<usize>) {
    let grid = density.grid();
    let decide = |r: f64| density.map_decision(Complex64::new(r, 0.0));
    let mut thresholds = Vec::new();
    let mut labels = vec![decide(grid.node(0))];
    let mut prev = labels[0];
    for i in 1..grid.n {
        let cur = decide(grid.node(i));
        if cur == prev {
            continue;
        }
        let (mut a, mut b) = (grid.node(i - 1), grid.node(i));
        for _ in 0..80 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if decide(mid) == prev {
                a = mid;
            } else {
                b = mid;
            }
        }
        let t = exact_crossing(density, prev, cur).filter(|t| (t - b).abs() < 1e-6).unwrap_or(b);
        thresholds.push(t);
        labels.push(cur);
        prev = cur;
    }
    (thresholds, labels)
}

fn exact_crossing(density: &ChannelDensity, a: usize, b: usize) -> Option<f64> {
    let sa = density.symbols()[a].components();
    let sb = density.symbols()[b].components();
    if sa.len() != 1 || sb.len() != 1 || sa[0].var != sb[0].var {
        return None;
    }
    let (ma, mb, v) = (sa[0].mean.re, sb[0].mean.re, sa[0].var);
    let pr = density.constellation().priors();
    if ma == mb {
        return None;
    }
    Some((ma * ma - mb * mb + 2.0 * v * (pr[b] / pr[a]).ln()) / (2.0 * (ma - mb)))
}

fn geometry_of(density: &ChannelDensity) -> Geometry {
    let con = density.constellation();
    let uniform = con.priors().iter().all(|&p| (p - con.priors()[0]).abs() < 1e-15);
    let single = density.symbols().iter().all(|m| m.len() == 1);
    if !uniform || !single {
        return Geometry::General;
    }
    let var = density.symbols()[0].components()[0].var;
    if density.symbols().iter().any(|m| m.components()[0].var != var) {
        return Geometry::General;
    }
    // common complex gain g with centre_k = g·x_k
    let pts = con.points();
    let centres: Vec<Complex64> = density.symbols().iter().map(|m| m.components()[0].mean).collect();
    let Some(k0) = pts.iter().position(|x| x.norm() > 0.0) else {
        return Geometry::General;
    };
    let gain = centres[k0] / pts[k0];
    if pts.iter().zip(&centres).any(|(x, c)| (x * gain - c).norm() > 1e-12 * (1.0 + c.norm())) {
        return Geometry::General;
    }
    let m = pts.len();
    let r0 = pts[0].norm();
    let is_psk = pts.iter().enumerate().all(|(k, x)| {
        (x - Complex64::from_polar(r0, pts[0].arg() + 2.0 * PI * k as f64 / m as f64)).norm() < 1e-9 * r0
    });
    if is_psk {
        return Geometry::Psk { rotation: (pts[0] * gain).arg() };
    }
    let levels = sorted_levels(pts.iter().map(|x| x.re));
    let side = levels.len();
    let spacing_ok =
        levels.windows(2).all(|w| ((w[1] - w[0]) - (levels[1] - levels[0])).abs() < 1e-9 * (1.0 + w[1].abs()));
    let distinct: std::collections::BTreeSet<(usize, usize)> =
        pts.iter().map(|x| (level_index(&levels, x.re), level_index(&levels, x.im))).collect();
    let sq_ok = side * side == m
        && spacing_ok
        && distinct.len() == m
        && pts.iter().all(|x| levels.iter().any(|l| (l - x.im).abs() < 1e-9 * (1.0 + l.abs())));
    if sq_ok && side >= 2 {
        return Geometry::Qam { gain };
    }
    Geometry::General
}

fn sorted_levels(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + b.abs()));
    v
}

fn level_index(levels: &[f64], x: f64) -> usize {
    let mut best = 0;
    for (i, l) in levels.iter().enumerate() {
        if (l - x).abs() < (levels[best] - x).abs() {
            best = i;
        }
    }
    best
}

/// Probability of each nearest-level cell along one axis.
fn axis_probabilities(levels: &[f64], mean: f64, var: f64) -> Vec<f64> {
    let n = levels.len();
    (0..n)
        .map(|i| {
            let lo = if i == 0 { f64::NEG_INFINITY } else { 0.5 * (levels[i - 1] + levels[i]) };
            let hi = if i + 1 == n { f64::INFINITY } else { 0.5 * (levels[i] + levels[i + 1]) };
            interval_probability(lo, hi, mean, var)
        })
        .collect()
}

/// P(arg r ∈ [a, b]) for circular r ~ CN(mean, var), integrating the closed-form
/// radial marginal over the wedge.
fn wedge_probability(mean: Complex64, var: f64, a: f64, b: f64) -> f64 {
    let s = var.sqrt();
    let m2 = mean.norm_sqr();
    let density = |phi: f64| {
        let u = (mean * Complex64::from_polar(1.0, -phi)).re;
        let base = 0.5 * var * (-m2 / var).exp();
        let tail = u * s * PI.sqrt() * 0.5 * libm::erfc(-u / s) * (-(m2 - u * u) / var).exp();
        (base + tail) / (PI * var)
    };
    let width = b - a;
    let sharp = (mean.norm() / s).max(1.0);
    let panels = ((width * sharp * 4.0).ceil() as usize).clamp(16, 4096);
    integrate_gl(density, a, b, panels, 20)
}
