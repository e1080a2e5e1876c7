//! Counter-addressed random streams.
//!
//! Every node owns a ChaCha8 stream selected by `(seed, domain, node)`, and
//! every sample consumes exactly one pair of 64-bit words from it, so the
//! draw for sample `s` sits at a fixed stream position regardless of batching.

use std::f64::consts::TAU;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// 32-bit words consumed per node per sample.
pub const WORDS_PER_SAMPLE: u128 = 4;

/// Stream domains keep independent uses of one seed apart.
pub const DOMAIN_MAIN: u64 = 0;
pub const DOMAIN_PILOT: u64 = 1;

#[derive(Debug, Clone)]
pub struct NodeRng(ChaCha8Rng);

impl NodeRng {
    /// Stream of `node` in `domain`, positioned at sample `sample`.
    pub fn at(seed: u64, domain: u64, node: usize, sample: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((domain << 32) | node as u64);
        rng.set_word_pos(sample as u128 * WORDS_PER_SAMPLE);
        Self(rng)
    }

    fn open_unit(&mut self) -> f64 {
        ((self.0.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Two uniforms on (0, 1).
    pub fn uniform_pair(&mut self) -> (f64, f64) {
        let a = self.open_unit();
        (a, self.open_unit())
    }

    /// Two independent standard normals (Box–Muller).
    pub fn normal_pair(&mut self) -> (f64, f64) {
        let (u, v) = self.uniform_pair();
        let rho = (-2.0 * u.ln()).sqrt();
        let (s, c) = (TAU * v).sin_cos();
        (rho * c, rho * s)
    }
}

/// Streams for all `nodes` positioned at `sample`.
pub fn streams(seed: u64, domain: u64, nodes: usize, sample: u64) -> Vec<NodeRng> {
    (0..nodes).map(|i| NodeRng::at(seed, domain, i, sample)).collect()
}
