//! Error correlation between relays that hear the same source.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{gaussian_density, GaussianLink, GridSpec};
use crate::constellation::Constellation;
use crate::error::{invalid, Error, Result};
use crate::relayfn::{OutputMoments, RelayFunction, RelayKind};

/// C_ij = E[e_i* e_j] for the uncorrelated errors of relays `i`, `j`; the
/// diagonal holds the uncorrelated-error powers E_i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    entries: Vec<Vec<Complex64>>,
}

impl CorrelationMatrix {
    pub fn new(entries: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = entries.len();
        if entries.iter().any(|row| row.len() != n) {
            return Err(invalid("correlation matrix must be square"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(n: usize) -> Self {
        Self { entries: vec![vec![Complex64::new(0.0, 0.0); n]; n] }
    }

    /// Uncorrelated errors with the given powers.
    pub fn diagonal(es: &[f64]) -> Self {
        let mut m = Self::zeros(es.len());
        for (i, e) in es.iter().enumerate() {
            m.entries[i][i] = Complex64::new(*e, 0.0);
        }
        m
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<Complex64>] {
        &self.entries
    }

    /// The uncorrelated-error powers E_i.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.entries[i][i].re).collect()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.len()).all(|i| (0..self.len()).all(|j| (self.entries[i][j] - self.entries[j][i].conj()).norm() <= tol))
    }

    /// Largest |C_ij| − √(E_i E_j); non-positive for a valid matrix.
    pub fn bound_excess(&self) -> f64 {
        let d = self.diag();
        let mut worst = f64::NEG_INFINITY;
        for i in 0..self.len() {
            for j in 0..self.len() {
                worst = worst.max(self.entries[i][j].norm() - (d[i] * d[j]).max(0.0).sqrt());
            }
        }
        worst
    }

    /// Largest off-diagonal magnitude.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.len() {
            for j in 0..self.len() {
                if i != j {
                    worst = worst.max(self.entries[i][j].norm());
                }
            }
        }
        worst
    }
}

/// Correlation matrix of relays with conditionally independent outputs, from
/// their per-symbol output moments `moments[i][k]`.
///
/// With m_i(x) = E[t_i | x] and a_i = P / E[x* t_i]:
/// C_ij = a_i* a_j Σ_k p_k m_i(x_k)* m_j(x_k) − P for i ≠ j, and
/// E_i = |a_i|² E|t_i|² − P on the diagonal.
pub fn correlation_from_moments(
    constellation: &Constellation,
    moments: &[Vec<OutputMoments>],
) -> Result<CorrelationMatrix> {
    let p = constellation.power();
    let priors = constellation.priors();
    let points = constellation.points();
    let a: Vec<Complex64> = moments
        .iter()
        .map(|m| {
            let cross: Complex64 = points.iter().zip(priors).zip(m).map(|((x, q), mi)| x.conj() * mi.mean * *q).sum();
            if cross.norm() == 0.0 {
                Err(Error::ZeroCorrelation(0.0))
            } else {
                Ok(Complex64::new(p, 0.0) / cross)
            }
        })
        .collect::<Result<_>>()?;
    let n = moments.len();
    let mut entries = vec![vec![Complex64::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            entries[i][j] = if i == j {
                let power: f64 = priors.iter().zip(&moments[i]).map(|(q, m)| q * m.power).sum();
                Complex64::new(a[i].norm_sqr() * power - p, 0.0)
            } else {
                let cross: Complex64 = priors
                    .iter()
                    .zip(&moments[i])
                    .zip(&moments[j])
                    .map(|((q, mi), mj)| mi.mean.conj() * mj.mean * *q)
                    .sum();
                a[i].conj() * a[j] * cross - p
            };
        }
    }
    CorrelationMatrix::new(entries)
}

/// Correlation of `gains.len()` parallel relays of one strategy, by quadrature.
/// Amplify-and-forward errors are the independent relay noises, so their
/// cross terms are set to zero exactly.
pub fn correlation_matrix(
    kind: RelayKind,
    constellation: &Constellation,
    gains: &[Complex64],
    relay_power: f64,
    spec: GridSpec,
) -> Result<CorrelationMatrix> {
    let mut moments = Vec::with_capacity(gains.len());
    for g in gains {
        let density = gaussian_density(constellation, GaussianLink::new(*g)?, spec)?;
        let f = match kind {
            RelayKind::Af => RelayFunction::af_for(&density, relay_power)?,
            RelayKind::Df => RelayFunction::df(&density, relay_power)?,
            RelayKind::Ef => RelayFunction::ef(&density, relay_power)?,
            RelayKind::Custom => return Err(invalid("custom maps need an explicit function")),
        };
        moments.push(f.conditional_moments(&density)?);
    }
    let mut c = correlation_from_moments(constellation, &moments)?;
    if kind == RelayKind::Af {
        let d = c.diag();
        c = CorrelationMatrix::diagonal(&d);
    }
    Ok(c)
}
