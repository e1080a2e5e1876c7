//! Uniform grids, trapezoid rules and Gauss–Legendre nodes.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Uniformly spaced grid on `[lo, hi]` with `n ≥ 2` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1 {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid1 {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        assert!(n >= 2 && hi > lo, "degenerate grid [{lo}, {hi}] with {n} points");
        Self { lo, hi, n }
    }

    pub fn symmetric(half_width: f64, n: usize) -> Self {
        Self::new(-half_width, half_width, n)
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.hi
        } else {
            self.lo + i as f64 * self.step()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// Trapezoid weight of node `i`.
    pub fn weight(&self, i: usize) -> f64 {
        let h = self.step();
        if i == 0 || i + 1 == self.n {
            0.5 * h
        } else {
            h
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Linear interpolation of samples `values` at `x`. Outside the grid the
    /// boundary value is held and the second field is `true`.
    pub fn interpolate(&self, values: &[f64], x: f64) -> (f64, bool) {
        debug_assert_eq!(values.len(), self.n);
        if x.is_nan() {
            return (f64::NAN, true);
        }
        if x <= self.lo {
            return (values[0], x < self.lo);
        }
        if x >= self.hi {
            return (values[self.n - 1], x > self.hi);
        }
        let t = (x - self.lo) / self.step();
        let i = (t.floor() as usize).min(self.n - 2);
        let frac = t - i as f64;
        (values[i] + frac * (values[i + 1] - values[i]), false)
    }

    /// Trapezoid integral of sampled values.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        values.iter().enumerate().map(|(i, v)| self.weight(i) * v).sum()
    }
}

/// Nodes and weights approximating an expectation over unit-variance noise.
///
/// Real noise is N(0, 1); complex noise is circular with E|n|² = 1. Weights are
/// the trapezoid rule against the noise density, normalized to sum to one.
#[derive(Debug, Clone)]
pub struct NoiseRule {
    pub nodes: Vec<Complex64>,
    pub weights: Vec<f64>,
}

impl NoiseRule {
    /// `n` nodes over ±`span` standard deviations.
    pub fn real(n: usize, span: f64) -> Self {
        let g = Grid1::symmetric(span, n);
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let z = g.node(i);
            nodes.push(Complex64::new(z, 0.0));
            weights.push(g.weight(i) * (-0.5 * z * z).exp());
        }
        normalize(&mut weights);
        Self { nodes, weights }
    }

    /// `n × n` nodes, each axis over ±`span` per-axis standard deviations.
    pub fn complex(n: usize, span: f64) -> Self {
        let sd = std::f64::consts::FRAC_1_SQRT_2;
        let g = Grid1::symmetric(span * sd, n);
        let mut nodes = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let a = g.node(i);
            for j in 0..n {
                let b = g.node(j);
                let w = g.weight(i) * g.weight(j) * (-(a * a + b * b)).exp();
                if w > 1e-300 {
                    nodes.push(Complex64::new(a, b));
                    weights.push(w);
                }
            }
        }
        normalize(&mut weights);
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn normalize(w: &mut [f64]) {
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= total);
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "Gauss-Legendre rule needs at least two nodes");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre integral of `f` over `[a, b]`.
pub fn integrate_gl(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * f(mid + 0.5 * h * xi);
        }
    }
    0.5 * h * total
}

/// log Σ exp(terms), robust to underflow.
pub fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = w.iter().sum();
        assert_abs_diff_eq!(s, 2.0, epsilon = 1e-14);
        let m14: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert_abs_diff_eq!(m14, 2.0 / 15.0, epsilon = 1e-14);
        let v = integrate_gl(|t| t.sin(), 0.0, PI, 4, 16);
        assert_abs_diff_eq!(v, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn noise_rules_match_moments() {
        let r = NoiseRule::real(401, 12.0);
        let m2: f64 = r.nodes.iter().zip(&r.weights).map(|(z, w)| w * z.re * z.re).sum();
        let m4: f64 = r.nodes.iter().zip(&r.weights).map(|(z, w)| w * z.re.powi(4)).sum();
        assert_abs_diff_eq!(m2, 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(m4, 3.0, epsilon = 1e-12);
        let c = NoiseRule::complex(121, 9.0);
        let p: f64 = c.nodes.iter().zip(&c.weights).map(|(z, w)| w * z.norm_sqr()).sum();
        assert_abs_diff_eq!(p, 1.0, epsilon = 1e-13);
    }

    #[test]
    fn interpolation_holds_boundary() {
        let g = Grid1::new(0.0, 1.0, 3);
        let v = [0.0, 1.0, 4.0];
        assert_eq!(g.interpolate(&v, 0.25), (0.5, false));
        assert_eq!(g.interpolate(&v, 2.0), (4.0, true));
        assert_eq!(g.interpolate(&v, -1.0), (0.0, true));
        assert_eq!(g.interpolate(&v, 1.0), (4.0, false));
    }

    #[test]
    fn lse_handles_underflow() {
        let v = [-1000.0, -1001.0];
        let l = log_sum_exp(v.iter().copied());
        assert_abs_diff_eq!(l, -1000.0 + (1.0 + (-1.0f64).exp()).ln(), epsilon = 1e-12);
        assert_eq!(log_sum_exp(std::iter::empty()), f64::NEG_INFINITY);
    }
}
