//! Discrete modulation alphabets and the Gaussian source.
//!
//! Every alphabet is stored as complex amplitudes with explicit priors and is
//! normalized to a prescribed average power. Noise is unit power throughout the
//! crate, so `power` doubles as the per-link SNR of a unit-gain hop.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const PRIOR_TOL: f64 = 1e-12;
const MOMENT_TOL: f64 = 1e-9;

/// A discrete complex signal set with priors and average power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constellation {
    points: Vec<Complex64>,
    priors: Vec<f64>,
    power: f64,
}

impl Constellation {
    /// Builds a constellation from explicit points and priors, checking the
    /// prior, power and zero-mean invariants.
    pub fn new(points: Vec<Complex64>, priors: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != priors.len() {
            return Err(invalid("points and priors must be non-empty and of equal length"));
        }
        if priors.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(invalid("priors must be finite and non-negative"));
        }
        if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
            return Err(invalid("constellation points must be finite"));
        }
        let total: f64 = priors.iter().sum();
        if (total - 1.0).abs() > PRIOR_TOL {
            return Err(invalid(format!("priors sum to {total}, expected 1")));
        }
        let mean: Complex64 = points.iter().zip(&priors).map(|(x, p)| x * p).sum();
        if mean.norm() > MOMENT_TOL {
            return Err(invalid(format!("constellation mean {mean} is not zero")));
        }
        let power = points.iter().zip(&priors).map(|(x, p)| p * x.norm_sqr()).sum();
        Ok(Self { points, priors, power })
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    /// Average power Σ p_k |x_k|².
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// True when every point lies on the real axis. Real alphabets use real
    /// unit-variance noise; complex ones use circular noise with E|n|² = 1.
    pub fn is_real(&self) -> bool {
        self.points.iter().all(|p| p.im == 0.0)
    }

    pub fn max_amplitude(&self) -> f64 {
        self.points.iter().map(|p| p.norm()).fold(0.0, f64::max)
    }

    /// Smallest distance between two distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let d = (a - b).norm();
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }

    /// Index of the nearest point; ties go to the lowest index.
    pub fn nearest(&self, r: Complex64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, x) in self.points.iter().enumerate() {
            let d = (r - x).norm_sqr();
            if d < best_d {
                best = k;
                best_d = d;
            }
        }
        best
    }

    /// Same alphabet rescaled to a new average power.
    pub fn scaled_to(&self, power: f64) -> Result<Self> {
        if !(power > 0.0) || !self.power.is_normal() {
            return Err(invalid("cannot rescale to non-positive power"));
        }
        let s = (power / self.power).sqrt();
        Ok(Self {
            points: self.points.iter().map(|x| x * s).collect(),
            priors: self.priors.clone(),
            power: self.points.iter().zip(&self.priors).map(|(x, p)| p * (x * s).norm_sqr()).sum(),
        })
    }

    fn uniform(points: Vec<Complex64>, power: f64) -> Result<Self> {
        let m = points.len();
        let raw = Self::new(points, vec![1.0 / m as f64; m])?;
        raw.scaled_to(power)
    }
}

/// Source symbol model: a discrete alphabet or a Gaussian input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum SourceModel {
    Discrete(Constellation),
    Gaussian { power: f64 },
}

impl SourceModel {
    pub fn gaussian(power: f64) -> Result<Self> {
        if !(power > 0.0) {
            return Err(invalid("Gaussian source power must be positive"));
        }
        Ok(Self::Gaussian { power })
    }

    pub fn power(&self) -> f64 {
        match self {
            Self::Discrete(c) => c.power(),
            Self::Gaussian { power } => *power,
        }
    }

    /// Alphabet used for numerical work. A Gaussian source is represented by a
    /// dense trapezoid discretization of its density over ±10σ; integrals
    /// against it are spectrally accurate for smooth likelihoods.
    pub fn to_constellation(&self) -> Result<Constellation> {
        match self {
            Self::Discrete(c) => Ok(c.clone()),
            Self::Gaussian { power } => gaussian_proxy(*power, 1001),
        }
    }
}

/// Discretized N(0, power) source with `n` (odd) equally spaced atoms.
pub fn gaussian_proxy(power: f64, n: usize) -> Result<Constellation> {
    if !(power > 0.0) || n < 3 {
        return Err(invalid("Gaussian proxy needs positive power and at least 3 atoms"));
    }
    let n = n | 1;
    let half = 10.0 * power.sqrt();
    let step = 2.0 * half / (n - 1) as f64;
    let xs: Vec<f64> = (0..n).map(|i| -half + i as f64 * step).collect();
    let w: Vec<f64> = xs.iter().map(|x| (-x * x / (2.0 * power)).exp()).collect();
    let total: f64 = w.iter().sum();
    let priors: Vec<f64> = w.iter().map(|v| v / total).collect();
    // Symmetrize the priors so the mean is zero to rounding.
    let priors: Vec<f64> = (0..n).map(|i| 0.5 * (priors[i] + priors[n - 1 - i])).collect();
    let total: f64 = priors.iter().sum();
    let priors = priors.into_iter().map(|p| p / total).collect();
    let points = xs.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
    Constellation::new(points, priors)?.scaled_to(power)
}

/// M-PSK with points √P·e^{j2πm/M}.
pub fn make_psk(m: usize, power: f64) -> Result<Constellation> {
    if m < 2 {
        return Err(invalid(format!("PSK order must be at least 2, got {m}")));
    }
    check_power(power)?;
    let points = (0..m)
        .map(|k| {
            if m == 2 {
                // exact real BPSK
                Complex64::new(if k == 0 { 1.0 } else { -1.0 }, 0.0)
            } else if m == 4 {
                // exact quarter turns
                [
                    Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 1.0),
                    Complex64::new(-1.0, 0.0),
                    Complex64::new(0.0, -1.0),
                ][k]
            } else {
                Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)
            }
        })
        .collect();
    Constellation::uniform(points, power)
}

/// M-PAM with equally spaced real levels ±d/2, ±3d/2, … in ascending order.
pub fn make_pam(m: usize, power: f64) -> Result<Constellation> {
    if m < 2 || !m.is_multiple_of(2) {
        return Err(invalid(format!("PAM order must be even and at least 2, got {m}")));
    }
    check_power(power)?;
    let points = (0..m).map(|k| Complex64::new(2.0 * k as f64 - (m as f64 - 1.0), 0.0)).collect();
    Constellation::uniform(points, power)
}

/// Square M-QAM, row-major over (in-phase, quadrature) levels.
pub fn make_qam(m: usize, power: f64) -> Result<Constellation> {
    let side = (m as f64).sqrt().round() as usize;
    if m < 4 || side * side != m {
        return Err(invalid(format!("QAM order must be a perfect square ≥ 4, got {m}")));
    }
    check_power(power)?;
    let level = |k: usize| 2.0 * k as f64 - (side as f64 - 1.0);
    let mut points = Vec::with_capacity(m);
    for i in 0..side {
        for q in 0..side {
            points.push(Complex64::new(level(i), level(q)));
        }
    }
    Constellation::uniform(points, power)
}

/// Minimum distance √(6P/(M−1)) of square M-QAM.
pub fn qam_min_distance(m: usize, power: f64) -> f64 {
    (6.0 * power / (m as f64 - 1.0)).sqrt()
}

fn check_power(power: f64) -> Result<()> {
    if power > 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("power must be positive and finite, got {power}")))
    }
}

/// Gaussian tail probability Q(z) = P(N(0,1) > z).
pub fn q_function(z: f64) -> f64 {
    0.5 * libm::erfc(z / SQRT_2)
}

/// Standard normal CDF Φ(z) = Q(−z).
pub fn phi_cdf(z: f64) -> f64 {
    q_function(-z)
}

/// Modulation named on the command line: `psk:M`, `pam:M`, `qam:M`, `bpsk` or `gauss`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    Psk(usize),
    Pam(usize),
    Qam(usize),
    Gaussian,
}

impl Modulation {
    pub fn build(self, power: f64) -> Result<Constellation> {
        match self {
            Self::Psk(m) => make_psk(m, power),
            Self::Pam(m) => make_pam(m, power),
            Self::Qam(m) => make_qam(m, power),
            Self::Gaussian => SourceModel::gaussian(power)?.to_constellation(),
        }
    }

    pub fn is_real(self) -> bool {
        matches!(self, Self::Psk(2) | Self::Pam(_) | Self::Gaussian)
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Psk(m) => write!(f, "psk:{m}"),
            Self::Pam(m) => write!(f, "pam:{m}"),
            Self::Qam(m) => write!(f, "qam:{m}"),
            Self::Gaussian => write!(f, "gauss"),
        }
    }
}

impl FromStr for Modulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "bpsk" => return Ok(Self::Psk(2)),
            "qpsk" => return Ok(Self::Psk(4)),
            "gauss" | "gaussian" => return Ok(Self::Gaussian),
            _ => {}
        }
        let (kind, order) = s
            .split_once(':')
            .ok_or_else(|| invalid(format!("modulation '{s}' must look like psk:M, pam:M or qam:M")))?;
        let m: usize = order.parse().map_err(|_| invalid(format!("bad modulation order '{order}'")))?;
        let parsed = match kind {
            "psk" => Self::Psk(m),
            "pam" => Self::Pam(m),
            "qam" => Self::Qam(m),
            _ => return Err(invalid(format!("unknown modulation family '{kind}'"))),
        };
        // validate the order eagerly
        parsed.build(1.0)?;
        Ok(parsed)
    }
}
