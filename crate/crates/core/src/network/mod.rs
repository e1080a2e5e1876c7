//! Parallel, serial and hybrid relay networks.
//!
//! Closed forms cover the symmetric cases; [`propagate`] handles any graph
//! whose receiving nodes hear conditionally independent inputs, carrying the
//! exact per-symbol law of every relay input through the network.

mod correlation;
mod topology;

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use correlation::{correlation_from_moments, correlation_matrix, CorrelationMatrix};
pub use topology::{Node, Role, Topology, TopologyBuilder};

use crate::channel::{gaussian_density, ChannelDensity, GaussianLink, GridSpec, Mixture};
use crate::constellation::{make_psk, q_function, Constellation};
use crate::error::{invalid, Error, Result};
use crate::gsnr::{decompose, msuee_af, msuee_df_bpsk, msuee_ef, one_minus_two_eps, GsnrReport, Method};
use crate::relayfn::{OutputMoments, RelayFunction, RelayKind};

/// Exact pairwise convolution is used up to this many output components.
pub const CONVOLUTION_CAP: usize = 20_000;
/// Lattice spacing of the binned convolution, per unit amplitude.
pub const CONVOLUTION_STEP: f64 = 0.005;

/// (Σα_i)² P / (Σα_i² E_i + Σ_{i≠j} α_i α_j C_ij + 1).
pub fn parallel_gsnr(alphas: &[f64], es: &[f64], c: &CorrelationMatrix, power: f64) -> Result<f64> {
    let l = alphas.len();
    if es.len() != l || c.len() != l {
        return Err(invalid("alphas, error powers and correlation matrix must agree in size"));
    }
    let sum: f64 = alphas.iter().sum();
    let mut den = 1.0;
    for i in 0..l {
        den += alphas[i] * alphas[i] * es[i];
        for j in 0..l {
            if i != j {
                den += alphas[i] * alphas[j] * c.get(i, j).re;
            }
        }
    }
    if !(den > 0.0) {
        return Err(Error::NumericalInconsistency(format!("non-positive denominator {den:e}")));
    }
    Ok(sum * sum * power / den)
}

/// α_i = √(P_i / (P + E_i)).
pub fn parallel_alpha(relay_power: f64, power: f64, e: f64) -> f64 {
    (relay_power / (power + e)).sqrt()
}

/// Equal gains and P_R = P: L²P / (LE + L(L−1)C + 1 + E/P).
pub fn symmetric_parallel_gsnr(relays: usize, power: f64, e: f64, c: f64) -> f64 {
    let l = relays as f64;
    l * l * power / (l * e + l * (l - 1.0) * c + 1.0 + e / power)
}

/// Correlation level above which amplify-and-forward beats estimate-and-forward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AfThreshold {
    /// (1 − E)(L + 1/P) / (L(L − 1)).
    pub correlation: f64,
    /// E ≥ 1: the formula gives no positive threshold.
    pub degenerate: bool,
}

pub fn af_beats_ef_threshold(relays: usize, power: f64, e: f64) -> Result<AfThreshold> {
    if relays < 2 {
        return Err(invalid("the threshold needs at least two relays"));
    }
    if !(power > 0.0) {
        return Err(invalid("power must be positive"));
    }
    let l = relays as f64;
    Ok(AfThreshold { correlation: (1.0 - e) * (l + 1.0 / power) / (l * (l - 1.0)), degenerate: e >= 1.0 })
}

/// Relay count above which AF overtakes EF at correlation `c` (high power): (1 − E)/C + 1.
pub fn relays_for_af_advantage(c: f64, e: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(invalid("the relay-count bound needs positive correlation"));
    }
    Ok((1.0 - e) / c + 1.0)
}

/// GSNR ratios of estimate-and-forward in a symmetric BPSK parallel network
/// with uncorrelated errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticRatios {
    pub relays: usize,
    pub power: f64,
    pub msuee_ef: f64,
    pub msuee_df: f64,
    /// (LP + P + 1) / (LPE + P + E).
    pub ef_over_af: f64,
    pub ef_over_df: f64,
    /// L → ∞: 1/E.
    pub ef_over_af_many_relays: f64,
    /// L → ∞: E_DF/E.
    pub ef_over_df_many_relays: f64,
    /// P → ∞: (L + 1, 1).
    pub high_power_limit: (f64, f64),
    /// P → 0: (1, π/2).
    pub low_power_limit: (f64, f64),
}

pub fn asymptotic_ratios(relays: usize, power: f64, spec: GridSpec) -> Result<AsymptoticRatios> {
    if relays < 1 {
        return Err(invalid("at least one relay is required"));
    }
    let density = gaussian_density(&make_psk(2, power)?, GaussianLink::unit(), spec)?;
    let e = msuee_ef(&density)?;
    let e_df = msuee_df_bpsk(power)?;
    let l = relays as f64;
    let den = |m: f64| l * m + 1.0 + m / power;
    Ok(AsymptoticRatios {
        relays,
        power,
        msuee_ef: e,
        msuee_df: e_df,
        ef_over_af: (l * power + power + 1.0) / (l * power * e + power + e),
        ef_over_df: den(e_df) / den(e),
        ef_over_af_many_relays: msuee_af() / e,
        ef_over_df_many_relays: e_df / e,
        high_power_limit: (l + 1.0, 1.0),
        low_power_limit: (1.0, FRAC_PI_2),
    })
}

/// Uncorrelated-error power of one unit-gain BPSK relay.
pub fn bpsk_msuee(kind: RelayKind, power: f64, spec: GridSpec) -> Result<f64> {
    match kind {
        RelayKind::Af => Ok(msuee_af()),
        RelayKind::Df => msuee_df_bpsk(power),
        RelayKind::Ef => msuee_ef(&gaussian_density(&make_psk(2, power)?, GaussianLink::unit(), spec)?),
        RelayKind::Custom => Err(invalid("custom maps have no closed form")),
    }
}

/// Closed-form GSNR of `relays` unit-gain BPSK relays in parallel with zero
/// error correlation.
pub fn bpsk_parallel_gsnr(kind: RelayKind, relays: usize, power: f64, relay_power: f64, spec: GridSpec) -> Result<f64> {
    let e = bpsk_msuee(kind, power, spec)?;
    let alphas = vec![parallel_alpha(relay_power, power, e); relays];
    parallel_gsnr(&alphas, &vec![e; relays], &CorrelationMatrix::diagonal(&vec![e; relays]), power)
}

/// Serial AF by the exact linear recursion: each hop adds unit noise and
/// rescales signal and noise to the relay power.
pub fn serial_af_gsnr(relays: usize, power: f64, relay_power: f64) -> f64 {
    let mut a2 = 1.0;
    let mut noise = 0.0;
    for _ in 0..relays {
        noise += 1.0;
        let beta2 = relay_power / (a2 * power + noise);
        a2 *= beta2;
        noise *= beta2;
    }
    noise += 1.0;
    a2 * power / noise
}

/// Alphabet model of the serial demodulate-and-forward closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SerialDfModel {
    Bpsk,
    /// Nearest-neighbour errors of large square QAM.
    Qam(usize),
}

/// Serial DF with equal powers: P(1−2ε)²/(4PLε(1−ε)+1) for BPSK and
/// P/(L·d_min²·ε + 1) for large QAM. Both treat the per-hop errors as
/// accumulating independently and are flagged approximate.
pub fn serial_df_gsnr(relays: usize, power: f64, model: SerialDfModel) -> Result<GsnrReport> {
    if !(power > 0.0) {
        return Err(invalid("power must be positive"));
    }
    let l = relays as f64;
    let gsnr = if relays == 0 {
        power
    } else {
        match model {
            SerialDfModel::Bpsk => {
                let eps = q_function(power.sqrt());
                let d = one_minus_two_eps(power);
                power * d * d / (4.0 * power * l * eps * (1.0 - eps) + 1.0)
            }
            SerialDfModel::Qam(m) => {
                let side = (m as f64).sqrt();
                if m < 4 || side.fract() != 0.0 {
                    return Err(invalid(format!("QAM order must be a perfect square ≥ 4, got {m}")));
                }
                let (dmin2, eps) = qam_error_model(m, power);
                power / (l * dmin2 * eps + 1.0)
            }
        }
    };
    let mut r = GsnrReport::from_gsnr(power, gsnr, Method::ClosedForm);
    r.approximate = relays > 0;
    Ok(r)
}

/// (d_min², ε) of the nearest-neighbour QAM model.
pub fn qam_error_model(m: usize, power: f64) -> (f64, f64) {
    let mf = m as f64;
    let eps = 4.0 * (1.0 - 1.0 / mf.sqrt()) * q_function((3.0 * power / (mf - 1.0)).sqrt());
    (6.0 * power / (mf - 1.0), eps)
}

/// Exact serial BPSK DF with P_R = P: each hop flips the sign independently
/// with probability ε, so E[x y] = P(1−2ε)^L and
/// GSNR = P c² / (P + 1 − P c²) with c = (1−2ε)^L.
pub fn serial_df_bpsk_exact(relays: usize, power: f64) -> Result<f64> {
    if !(power > 0.0) {
        return Err(invalid("power must be positive"));
    }
    let c2 = one_minus_two_eps(power).powi(2 * relays as i32);
    Ok(power * c2 / (power + 1.0 - power * c2))
}

/// Per-node results of a quadrature pass through a network.
#[derive(Debug, Clone)]
pub struct Propagation {
    pub constellation: Constellation,
    /// Input density of each relay, indexed by node.
    pub inputs: Vec<Option<Arc<ChannelDensity>>>,
    /// Relay map of each relay, indexed by node.
    pub relays: Vec<Option<RelayFunction>>,
    /// Per-symbol moments of each node's transmitted signal.
    pub transmit: Vec<Vec<OutputMoments>>,
    /// Per-symbol moments of the destination observation.
    pub destination: Vec<OutputMoments>,
    pub report: GsnrReport,
}

impl Propagation {
    /// Relay map of the node with id `id`.
    pub fn relay(&self, topology: &Topology, id: &str) -> Option<&RelayFunction> {
        self.relays[topology.index_of(id)?].as_ref()
    }
}

/// Source alphabet rescaled to the topology's source power.
pub fn source_alphabet(topology: &Topology, constellation: &Constellation) -> Result<Constellation> {
    let p = topology.source_power();
    if (constellation.power() - p).abs() <= 1e-12 * p {
        Ok(constellation.clone())
    } else {
        constellation.scaled_to(p)
    }
}

/// Builds a relay map of the given kind for its input density.
pub fn build_relay(kind: RelayKind, density: &ChannelDensity, relay_power: f64) -> Result<RelayFunction> {
    match kind {
        RelayKind::Af => RelayFunction::af_for(density, relay_power),
        RelayKind::Df => RelayFunction::df(density, relay_power),
        RelayKind::Ef => RelayFunction::ef(density, relay_power),
        RelayKind::Custom => Err(invalid("custom maps need an explicit function")),
    }
}

/// Carries per-symbol laws through the network in topological order and
/// decomposes the destination observation.
pub fn propagate(topology: &Topology, constellation: &Constellation, spec: GridSpec) -> Result<Propagation> {
    if !topology.has_independent_inputs() {
        return Err(Error::Unsupported(
            "quadrature needs conditionally independent inputs at every node; use Monte Carlo".into(),
        ));
    }
    let con = source_alphabet(topology, constellation)?;
    let n = topology.nodes().len();
    let m = con.len();
    let mut inputs = vec![None; n];
    let mut relays = vec![None; n];
    let mut transmit: Vec<Vec<OutputMoments>> = vec![Vec::new(); n];
    let mut laws: Vec<Option<Vec<Mixture>>> = vec![None; n];
    let src = topology.source();
    transmit[src] = con.points().iter().map(|x| OutputMoments { mean: *x, power: x.norm_sqr() }).collect();
    laws[src] = Some(con.points().iter().map(|x| Mixture::point(*x)).collect());
    let max_power = topology.nodes().iter().map(|n| n.power).fold(con.power(), f64::max);
    let step = CONVOLUTION_STEP * max_power.sqrt().max(1.0);

    let mut destination = Vec::new();
    for &i in topology.order() {
        let node = topology.node(i);
        if node.role == Role::Source {
            continue;
        }
        let received = received_moments(node, &transmit, m);
        if node.role == Role::Destination {
            destination = received;
            continue;
        }
        let mut mixtures: Vec<Mixture> = Vec::with_capacity(m);
        for k in 0..m {
            let mut acc: Option<Mixture> = None;
            for (p, g) in &node.incoming {
                let law = laws[*p].as_ref().ok_or_else(|| {
                    Error::Unsupported(format!("the law of '{}' is not available", topology.node(*p).id))
                })?;
                let part = law[k].scaled(*g);
                acc = Some(match acc {
                    None => part,
                    Some(prev) => prev.convolve(&part, CONVOLUTION_CAP, step)?,
                });
            }
            mixtures.push(acc.expect("relays have predecessors").with_noise(1.0));
        }
        let density = ChannelDensity::from_mixtures(con.clone(), mixtures, spec)?;
        let kind = node.strategy.expect("relays carry a strategy");
        let f = build_relay(kind, &density, node.power)?;
        let feeds_relay = topology.successors(i).iter().any(|&s| topology.node(s).role == Role::Relay);
        if feeds_relay {
            let law = f.pushforward(&density)?;
            transmit[i] =
                law.iter().map(|mix| OutputMoments { mean: mix.mean(), power: mix.second_moment() }).collect();
            laws[i] = Some(law);
        } else {
            transmit[i] = f.conditional_moments(&density)?;
        }
        inputs[i] = Some(Arc::new(density));
        relays[i] = Some(f);
    }
    let (e_xy, e_y2) = destination_moments(&con, &destination);
    let report = decompose(con.power(), e_xy, e_y2)?;
    Ok(Propagation { constellation: con, inputs, relays, transmit, destination, report })
}

/// E[x* y] and E|y|² from per-symbol observation moments.
pub fn destination_moments(con: &Constellation, moments: &[OutputMoments]) -> (Complex64, f64) {
    let mut e_xy = Complex64::new(0.0, 0.0);
    let mut e_y2 = 0.0;
    for ((x, p), mo) in con.points().iter().zip(con.priors()).zip(moments) {
        e_xy += x.conj() * mo.mean * *p;
        e_y2 += p * mo.power;
    }
    (e_xy, e_y2)
}

/// Moments of Σ_j g_j t_j + n given x_k, for conditionally independent t_j.
fn received_moments(node: &Node, transmit: &[Vec<OutputMoments>], m: usize) -> Vec<OutputMoments> {
    (0..m)
        .map(|k| {
            let mut mean = Complex64::new(0.0, 0.0);
            let mut power = 1.0;
            let parts: Vec<(Complex64, f64)> = node
                .incoming
                .iter()
                .map(|(p, g)| (g * transmit[*p][k].mean, g.norm_sqr() * transmit[*p][k].power))
                .collect();
            for (a, (ma, pa)) in parts.iter().enumerate() {
                mean += ma;
                power += pa;
                for (mb, _) in &parts[a + 1..] {
                    power += 2.0 * (ma.conj() * mb).re;
                }
            }
            OutputMoments { mean, power }
        })
        .collect()
}

/// End-to-end GSNR of a network by quadrature.
pub fn evaluate_topology(topology: &Topology, constellation: &Constellation, spec: GridSpec) -> Result<GsnrReport> {
    Ok(propagate(topology, constellation, spec)?.report)
}

/// Serial chain of `relays` estimate-and-forward relays; each stage's map is
/// built from the true law of its own input.
pub fn serial_ef_chain(
    relays: usize,
    constellation: &Constellation,
    power: f64,
    relay_power: f64,
    spec: GridSpec,
) -> Result<Propagation> {
    let t = Topology::serial_uniform(RelayKind::Ef, relays, power, relay_power)?;
    propagate(&t, constellation, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{make_pam, make_qam};
    use crate::gsnr::single_relay_gsnr;
    use approx::assert_relative_eq;

    fn spec() -> GridSpec {
        GridSpec::default()
    }

    #[test]
    fn parallel_collapses_to_single_relay() {
        for (e, p, pr) in [(1.0, 1.0, 1.0), (0.3, 4.0, 2.0), (0.0, 0.5, 3.0)] {
            let a = parallel_alpha(pr, p, e);
            let g = parallel_gsnr(&[a], &[e], &CorrelationMatrix::diagonal(&[e]), p).unwrap();
            assert_relative_eq!(g, single_relay_gsnr(e, p, pr), max_relative = 1e-12);
        }
    }

    #[test]
    fn two_af_relays() {
        // α² = P_R/(P + E) = 1/2, so GSNR = 4·½·1 / (2·½ + 1) = 1
        let g = bpsk_parallel_gsnr(RelayKind::Af, 2, 1.0, 1.0, spec()).unwrap();
        assert_relative_eq!(g, 1.0, max_relative = 1e-14);
        assert_relative_eq!(symmetric_parallel_gsnr(2, 1.0, 1.0, 0.0), 1.0, max_relative = 1e-14);
        let t = Topology::parallel_uniform(RelayKind::Af, 2, 1.0, 1.0).unwrap();
        let q = evaluate_topology(&t, &make_psk(2, 1.0).unwrap(), spec()).unwrap();
        assert_relative_eq!(q.gsnr, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn symmetric_matches_general_and_df_form() {
        for l in 1..5 {
            for p in [0.2, 1.0, 6.0] {
                let e = msuee_df_bpsk(p).unwrap();
                let a = parallel_alpha(p, p, e);
                let g = parallel_gsnr(&vec![a; l], &vec![e; l], &CorrelationMatrix::diagonal(&vec![e; l]), p).unwrap();
                let s = symmetric_parallel_gsnr(l, p, e, 0.0);
                assert_relative_eq!(g, s, max_relative = 1e-12);
                let eps = q_function(p.sqrt());
                let lf = l as f64;
                let df = p * lf * lf * (1.0 - 2.0 * eps).powi(2) / (4.0 * p * lf * eps * (1.0 - eps) + 1.0);
                assert_relative_eq!(s, df, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn thresholds() {
        let t = af_beats_ef_threshold(2, 1.0, 0.5).unwrap();
        assert_relative_eq!(t.correlation, 0.75);
        assert!(!t.degenerate);
        assert!(af_beats_ef_threshold(10_000, 1.0, 0.5).unwrap().correlation < 1e-4);
        assert!(af_beats_ef_threshold(3, 1.0, 1.0).unwrap().degenerate);
        assert_relative_eq!(relays_for_af_advantage(0.1, 0.5).unwrap(), 6.0);
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let con = make_psk(2, 1.0).unwrap();
        for kind in RelayKind::STANDARD {
            for p in [0.5, 2.0] {
                let t = Topology::single(kind, p, p).unwrap();
                let q = evaluate_topology(&t, &con, spec()).unwrap();
                let e = bpsk_msuee(kind, p, spec()).unwrap();
                assert_relative_eq!(q.gsnr, single_relay_gsnr(e, p, p), max_relative = 1e-9);
                let t = Topology::parallel_uniform(kind, 3, p, 1.5).unwrap();
                let q = evaluate_topology(&t, &con, spec()).unwrap();
                let a = bpsk_parallel_gsnr(kind, 3, p, 1.5, spec()).unwrap();
                assert_relative_eq!(q.gsnr, a, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn serial_af_recursion() {
        assert_relative_eq!(serial_af_gsnr(0, 3.0, 1.0), 3.0);
        for p in [0.1, 1.0, 10.0] {
            assert_relative_eq!(serial_af_gsnr(1, p, p), single_relay_gsnr(1.0, p, p), max_relative = 1e-14);
            for l in 1..6 {
                assert!(serial_af_gsnr(l, p, p) < p / (l as f64 + 1.0));
            }
            let t = Topology::serial_uniform(RelayKind::Af, 3, p, p).unwrap();
            let q = evaluate_topology(&t, &make_psk(2, 1.0).unwrap(), spec()).unwrap();
            assert_relative_eq!(q.gsnr, serial_af_gsnr(3, p, p), max_relative = 1e-10);
        }
    }

    #[test]
    fn serial_df_forms() {
        assert_eq!(serial_df_gsnr(0, 9.0, SerialDfModel::Bpsk).unwrap().gsnr, 9.0);
        assert_eq!(serial_df_bpsk_exact(0, 9.0).unwrap(), 9.0);
        let approx = serial_df_gsnr(1, 2.0, SerialDfModel::Bpsk).unwrap();
        assert!(approx.approximate);
        // one hop: both forms coincide
        assert_relative_eq!(approx.gsnr, serial_df_bpsk_exact(1, 2.0).unwrap(), max_relative = 1e-12);
        // the quadrature chain propagates exact flip laws
        for (l, p) in [(2, 9.0), (3, 1.0)] {
            let t = Topology::serial_uniform(RelayKind::Df, l, p, p).unwrap();
            let q = evaluate_topology(&t, &make_psk(2, p).unwrap(), spec()).unwrap();
            assert_relative_eq!(q.gsnr, serial_df_bpsk_exact(l, p).unwrap(), max_relative = 1e-10);
        }
        for p in [20.0, 60.0, 200.0] {
            let (d2, eps) = qam_error_model(64, p);
            let g = serial_df_gsnr(2, p, SerialDfModel::Qam(64)).unwrap().gsnr;
            if d2 * eps < 1.0 {
                assert!(g >= p / 3.0);
            }
        }
    }

    #[test]
    fn ef_chain_stage_maps_differ() {
        let con = make_psk(2, 1.0).unwrap();
        let chain = serial_ef_chain(2, &con, 1.0, 1.0, spec()).unwrap();
        let t = Topology::serial_uniform(RelayKind::Ef, 2, 1.0, 1.0).unwrap();
        let f1 = chain.relay(&t, "R1").unwrap();
        let f2 = chain.relay(&t, "R2").unwrap();
        let mut sup: f64 = 0.0;
        for i in 0..=400 {
            let r = Complex64::new(-5.0 + 0.025 * i as f64, 0.0);
            sup = sup.max((f1.evaluate(r) - f2.evaluate(r)).norm());
        }
        assert!(sup > 1e-3, "sup-norm difference {sup}");
        let one = serial_ef_chain(1, &con, 1.0, 1.0, spec()).unwrap();
        let e = bpsk_msuee(RelayKind::Ef, 1.0, spec()).unwrap();
        assert_relative_eq!(one.report.gsnr, single_relay_gsnr(e, 1.0, 1.0), max_relative = 1e-9);
    }

    #[test]
    fn serial_ordering_by_quadrature() {
        let con = make_psk(2, 1.0).unwrap();
        for p in [0.2, 1.0, 10.0] {
            let g = |k| evaluate_topology(&Topology::serial_uniform(k, 2, p, p).unwrap(), &con, spec()).unwrap().gsnr;
            let (af, df, ef) = (g(RelayKind::Af), g(RelayKind::Df), g(RelayKind::Ef));
            assert!(ef >= af && ef >= df, "P={p}: af {af} df {df} ef {ef}");
        }
    }

    #[test]
    fn correlations() {
        let gains = [Complex64::new(1.0, 0.0), Complex64::new(1.5, 0.0)];
        for m in [2, 4, 8] {
            let con = make_psk(m, 2.0).unwrap();
            let spec = GridSpec { complex_points: 64, complex_noise_nodes: 161, ..GridSpec::default() };
            let c = correlation_matrix(RelayKind::Ef, &con, &gains, 1.0, spec).unwrap();
            assert!(c.max_off_diagonal() < 1e-6, "M={m}: {}", c.max_off_diagonal());
            assert!(c.is_hermitian(1e-12));
            assert!(c.bound_excess() <= 1e-9);
        }
        let con = make_psk(2, 1.0).unwrap();
        let c = correlation_matrix(RelayKind::Df, &con, &gains, 1.0, spec()).unwrap();
        assert!(c.max_off_diagonal() < 1e-6);
        let c = correlation_matrix(RelayKind::Af, &con, &gains, 1.0, spec()).unwrap();
        assert_eq!(c.max_off_diagonal(), 0.0);
        // 4-PAM EF errors do correlate
        let c = correlation_matrix(RelayKind::Ef, &make_pam(4, 2.0).unwrap(), &gains, 1.0, spec()).unwrap();
        assert!(c.max_off_diagonal() > 1e-4);
        assert!(c.bound_excess() <= 1e-9);
    }

    #[test]
    fn qam16_correlation_band() {
        let sp = GridSpec { complex_points: 64, complex_noise_nodes: 121, ..GridSpec::default() };
        let one = Complex64::new(1.0, 0.0);
        for p in [5.0, 10.0, 20.0] {
            let c = correlation_matrix(RelayKind::Ef, &make_qam(16, p).unwrap(), &[one, one], p, sp).unwrap();
            let e = c.diag()[0];
            assert!(c.get(0, 1).norm() < 0.05 * e, "P={p}: C={} E={e}", c.get(0, 1));
        }
    }

    #[test]
    fn asymptotics() {
        let hi = asymptotic_ratios(2, 100.0, spec()).unwrap();
        assert!((hi.ef_over_af / 3.0 - 1.0).abs() < 0.05);
        let lo = asymptotic_ratios(2, 0.01, spec()).unwrap();
        assert!((lo.ef_over_df / FRAC_PI_2 - 1.0).abs() < 0.05);
        assert!((lo.ef_over_af - 1.0).abs() < 0.05);
        let mid = asymptotic_ratios(1000, 1.0, spec()).unwrap();
        assert!((mid.ef_over_af / mid.ef_over_af_many_relays - 1.0).abs() < 0.01);
    }
}
