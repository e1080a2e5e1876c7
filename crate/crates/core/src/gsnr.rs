//! Generalized SNR.
//!
//! Any observation `y` of a zero-mean symbol `x` with power `P` splits as
//! `α·y = x + e_u` with `e_u` uncorrelated with `x`, where `α = P / E[x* y]`.
//! The generalized SNR is `P / E|e_u|²`; for `y = h·x + n` it is `|h|²P`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelDensity, Domain};
use crate::constellation::q_function;
use crate::error::{invalid, Error, Result};
use crate::relayfn::RelayFunction;

/// Uncorrelated-error powers whose magnitude is below this are treated as zero.
pub const MSUEE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    ClosedForm,
    Quadrature,
    MonteCarlo,
}

/// Outcome of a generalized-SNR decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GsnrReport {
    pub power: f64,
    pub alpha: Complex64,
    pub msuee: f64,
    pub gsnr: f64,
    pub method: Method,
    /// Zero for analytic results.
    pub sample_count: u64,
    /// Standard error of `gsnr` (Monte Carlo only).
    pub gsnr_stderr: Option<f64>,
    /// Standard error of `msuee` (Monte Carlo only).
    pub msuee_stderr: Option<f64>,
    /// The uncorrelated error vanished; `gsnr` is +∞.
    pub degenerate: bool,
    /// The value comes from an approximate closed form.
    pub approximate: bool,
}

impl GsnrReport {
    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn gsnr_db(&self) -> f64 {
        10.0 * self.gsnr.log10()
    }

    /// A report built directly from a GSNR value.
    pub fn from_gsnr(power: f64, gsnr: f64, method: Method) -> Self {
        let msuee = power / gsnr;
        Self {
            power,
            alpha: Complex64::new(f64::NAN, 0.0),
            msuee,
            gsnr,
            method,
            sample_count: 0,
            gsnr_stderr: None,
            msuee_stderr: None,
            degenerate: gsnr.is_infinite(),
            approximate: false,
        }
    }
}

/// Decomposes an observation given E[x* y] and E|y|².
pub fn decompose(power: f64, e_xy: Complex64, e_y2: f64) -> Result<GsnrReport> {
    if !(power > 0.0) {
        return Err(invalid("source power must be positive"));
    }
    if e_xy.norm() == 0.0 || !e_xy.norm().is_finite() {
        return Err(Error::ZeroCorrelation(e_xy.norm()));
    }
    let alpha = Complex64::new(power, 0.0) / e_xy;
    let raw = alpha.norm_sqr() * e_y2 - power;
    let (msuee, degenerate) = if raw.abs() < MSUEE_FLOOR * power.max(1.0) {
        (0.0, true)
    } else if raw < 0.0 {
        return Err(Error::NumericalInconsistency(format!(
            "negative uncorrelated-error power {raw:e} (E[x*y] = {e_xy}, E|y|² = {e_y2})"
        )));
    } else {
        (raw, false)
    };
    Ok(GsnrReport {
        power,
        alpha,
        msuee,
        gsnr: if degenerate { f64::INFINITY } else { power / msuee },
        method: Method::Quadrature,
        sample_count: 0,
        gsnr_stderr: None,
        msuee_stderr: None,
        degenerate,
        approximate: false,
    })
}

/// Uncorrelated error of amplify-and-forward: the unit noise itself.
pub fn msuee_af() -> f64 {
    1.0
}

/// 1 − 2ε for ε = Q(√P), computed without cancellation.
pub(crate) fn one_minus_two_eps(power: f64) -> f64 {
    libm::erf((0.5 * power).sqrt())
}

fn checked_eps(power: f64) -> Result<f64> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(invalid(format!("power must be positive, got {power}")));
    }
    let eps = q_function(power.sqrt());
    if eps >= 0.5 - 1e-12 {
        return Err(Error::NearSingular(eps));
    }
    Ok(eps)
}

/// Uncorrelated error of BPSK demodulate-and-forward, 4Pε(1−ε)/(1−2ε)².
pub fn msuee_df_bpsk(power: f64) -> Result<f64> {
    let eps = checked_eps(power)?;
    let d = one_minus_two_eps(power);
    Ok(4.0 * power * eps * (1.0 - eps) / (d * d))
}

/// E[x·d] for the BPSK demodulation error d = f_DF(r) − x, which is −2Pε.
pub fn df_bpsk_error_correlation(power: f64) -> Result<f64> {
    Ok(-2.0 * power * checked_eps(power)?)
}

/// Moments of the conditional-mean estimator under a density, each by its own quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
struct EstimatorMoments {
    /// E[x* X̂]
    cross: Complex64,
    /// J = E|X̂|²
    j: f64,
    /// E|X̂ − x|²
    mse: f64,
}

fn estimator_moments(density: &ChannelDensity) -> EstimatorMoments {
    let con = density.constellation();
    let points = con.points();
    let per_symbol: Vec<[f64; 4]> = match density.domain() {
        Domain::Real(_) => {
            let post = density.posterior_on_grid();
            density.expect_on_grid(|k, i| Quad::of(post[i], points[k])).into_iter().map(|q| q.0).collect()
        }
        Domain::Complex(_) => density
            .expect_per_symbol_with(|k, r| Quad::of(density.posterior_mean(r).mean, points[k]))
            .into_iter()
            .map(|q| q.0)
            .collect(),
    };
    let mut m = EstimatorMoments { cross: Complex64::new(0.0, 0.0), j: 0.0, mse: 0.0 };
    for ((x, p), q) in points.iter().zip(con.priors()).zip(&per_symbol) {
        m.cross += x.conj() * Complex64::new(q[0], q[1]) * *p;
        m.j += p * q[2];
        m.mse += p * q[3];
    }
    m
}

/// (Re X̂, Im X̂, |X̂|², |X̂ − x|²) accumulated together.
#[derive(Debug, Clone, Copy, Default)]
struct Quad([f64; 4]);

impl Quad {
    fn of(est: Complex64, x: Complex64) -> Self {
        Self([est.re, est.im, est.norm_sqr(), (est - x).norm_sqr()])
    }
}

impl std::ops::AddAssign for Quad {
    fn add_assign(&mut self, o: Self) {
        for (a, b) in self.0.iter_mut().zip(o.0) {
            *a += b;
        }
    }
}

impl std::ops::Mul<f64> for Quad {
    type Output = Self;
    fn mul(self, w: f64) -> Self {
        Self(self.0.map(|v| v * w))
    }
}

/// Uncorrelated error of estimate-and-forward, P(P − J)/J with J = E|E[x | r]|².
pub fn msuee_ef(density: &ChannelDensity) -> Result<f64> {
    Ok(msuee_ef_report(density)?.msuee)
}

/// Full decomposition of the conditional-mean estimator.
pub fn msuee_ef_report(density: &ChannelDensity) -> Result<GsnrReport> {
    let power = density.constellation().power();
    let j = estimator_power(density);
    if !(j > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    // E[x* X̂] = J for the conditional mean, so α = P/J and the decomposition
    // collapses to P(P − J)/J
    decompose(power, Complex64::new(j, 0.0), j)
}

/// J = E_r |E[x | r]|².
pub fn estimator_power(density: &ChannelDensity) -> f64 {
    let per_symbol = match density.domain() {
        Domain::Real(_) => {
            let values: Vec<f64> = density.posterior_on_grid().iter().map(|x| x.norm_sqr()).collect();
            density.expect_grid_values(&values)
        }
        Domain::Complex(_) => density.expect_per_symbol(|r| density.posterior_mean(r).mean.norm_sqr()),
    };
    per_symbol.iter().zip(density.constellation().priors()).map(|(v, p)| v * p).sum()
}

/// Generalized SNR of a relay output y = f(r) + n at the destination, by quadrature.
pub fn relay_output_report(density: &ChannelDensity, relay: &RelayFunction) -> Result<GsnrReport> {
    let con = density.constellation();
    let moments = relay.conditional_moments(density)?;
    let mut e_xy = Complex64::new(0.0, 0.0);
    let mut e_y2 = 1.0;
    for ((x, p), m) in con.points().iter().zip(con.priors()).zip(&moments) {
        e_xy += x.conj() * m.mean * *p;
        e_y2 += p * m.power;
    }
    decompose(con.power(), e_xy, e_y2)
}

/// Uncorrelated error of a relay map at its own output (before the next hop's noise).
pub fn relay_msuee(density: &ChannelDensity, relay: &RelayFunction) -> Result<GsnrReport> {
    let con = density.constellation();
    let moments = relay.conditional_moments(density)?;
    let mut e_xy = Complex64::new(0.0, 0.0);
    let mut e_t2 = 0.0;
    for ((x, p), m) in con.points().iter().zip(con.priors()).zip(&moments) {
        e_xy += x.conj() * m.mean * *p;
        e_t2 += p * m.power;
    }
    decompose(con.power(), e_xy, e_t2)
}

/// Destination GSNR of one relay with uncorrelated error power `e`:
/// P / (E + (P + E)/P_R).
pub fn single_relay_gsnr(e: f64, power: f64, relay_power: f64) -> f64 {
    power / (e + (power + e) / relay_power)
}

/// MMSEE, μ = E[x*(E[x|r] − x)] and MMSUEE of the conditional-mean estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MmseRelation {
    pub power: f64,
    pub mmsee: f64,
    pub mu: f64,
    pub mmsuee: f64,
}

impl MmseRelation {
    /// (MMSEE − μ²/P) / (1 + μ/P)².
    pub fn predicted_mmsuee(&self) -> f64 {
        let p = self.power;
        (self.mmsee - self.mu * self.mu / p) / (1.0 + self.mu / p).powi(2)
    }

    /// |MMSUEE − prediction| / MMSUEE.
    pub fn relative_residual(&self) -> f64 {
        (self.mmsuee - self.predicted_mmsuee()).abs() / self.mmsuee
    }
}

/// Computes the three quantities by independent quadratures.
pub fn mmse_relation(density: &ChannelDensity) -> Result<MmseRelation> {
    let m = estimator_moments(density);
    let power = density.constellation().power();
    if !(m.j > 0.0) {
        return Err(Error::DegenerateChannel);
    }
    let mmsuee = decompose(power, m.cross, m.j)?.msuee;
    Ok(MmseRelation { power, mmsee: m.mse, mu: m.cross.re - power, mmsuee })
}
