//! One-dimensional quadrature rules and compensated summation.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::quaternion::Quaternion;
use crate::special::gamma;

/// Nodes and weights of a Gauss rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

fn legendre_cache() -> &'static Mutex<HashMap<usize, Arc<GaussRule>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<GaussRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, nodes ascending. Cached.
pub fn gauss_legendre(n: usize) -> Arc<GaussRule> {
    assert!(n > 0, "Gauss-Legendre rule needs at least one node");
    if let Some(r) = legendre_cache().lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = Arc::new(compute_gauss_legendre(n));
    legendre_cache().lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gauss_legendre(n: usize) -> GaussRule {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussRule { nodes, weights }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let (p, pm1) = if n == 0 { (1.0, 0.0) } else { (p1, p0) };
    let d = n as f64 * (x * p - pm1) / (x * x - 1.0);
    (p, d)
}

/// Gauss–Jacobi rule for the weight `(1 - x)^a (1 + x)^b` on `[-1, 1]`
/// (Golub–Welsch).
pub fn gauss_jacobi(n: usize, a: f64, b: f64) -> GaussRule {
    assert!(n > 0 && a > -1.0 && b > -1.0);
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 0..n {
        let kf = k as f64;
        let s = 2.0 * kf + a + b;
        let diag = if k == 0 {
            (b - a) / (a + b + 2.0)
        } else {
            (b * b - a * a) / (s * (s + 2.0))
        };
        j[(k, k)] = diag;
        if k + 1 < n {
            let m = kf + 1.0;
            let t = 2.0 * m + a + b;
            let num = 4.0 * m * (m + a) * (m + b) * (m + a + b);
            let den = t * t * (t + 1.0) * (t - 1.0);
            let off = (num / den).sqrt();
            j[(k, k + 1)] = off;
            j[(k + 1, k)] = off;
        }
    }
    let mu0 = 2f64.powf(a + b + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(a + b + 2.0);
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let v0 = eig.eigenvectors[(0, i)];
            (eig.eigenvalues[i], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
    GaussRule {
        nodes: pairs.iter().map(|p| p.0).collect(),
        weights: pairs.iter().map(|p| p.1).collect(),
    }
}

/// Which ends of an interval a graded rule clusters towards.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ends {
    None,
    Lower,
    Upper,
    Both,
}

/// A one-dimensional rule on an interval: `∫ f ≈ Σ w_i f(t_i)`.
#[derive(Debug, Clone, Default)]
pub struct Rule1d {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule1d {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn gauss(n: usize, lo: f64, hi: f64) -> Self {
        Self::graded(n, lo, hi, 1.0, Ends::None)
    }

    pub fn midpoint(n: usize, lo: f64, hi: f64) -> Self {
        let h = (hi - lo) / n as f64;
        Rule1d {
            nodes: (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect(),
            weights: vec![h; n],
        }
    }

    /// Gauss–Legendre in a variable `s ∈ [0, 1]` mapped onto `[lo, hi]` by
    /// a polynomial grading of power `p` at the requested ends.
    pub fn graded(n: usize, lo: f64, hi: f64, p: f64, ends: Ends) -> Self {
        let g = gauss_legendre(n);
        let len = hi - lo;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for (x, w) in g.nodes.iter().zip(g.weights.iter()) {
            let s = 0.5 * (x + 1.0);
            let (phi, dphi) = grade(s, p, ends);
            nodes.push(lo + len * phi);
            weights.push(0.5 * w * len * dphi);
        }
        Rule1d { nodes, weights }
    }

    /// Concatenates rules on adjacent intervals.
    pub fn concat(parts: &[Rule1d]) -> Self {
        let mut out = Rule1d::default();
        for p in parts {
            out.nodes.extend_from_slice(&p.nodes);
            out.weights.extend_from_slice(&p.weights);
        }
        out
    }

    /// A rule for `[lo, hi]` graded towards both ends, optionally split at an
    /// interior point (which then becomes a graded end of both halves).
    /// Each piece receives `n` nodes.
    pub fn split_graded(n: usize, lo: f64, hi: f64, p: f64, split: Option<f64>) -> Self {
        match split {
            Some(c) if c > lo && c < hi => Rule1d::concat(&[
                Rule1d::graded(n, lo, c, p, Ends::Both),
                Rule1d::graded(n, c, hi, p, Ends::Both),
            ]),
            _ => Rule1d::graded(n, lo, hi, p, Ends::Both),
        }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let mut s = NeumaierSum::default();
        for (t, w) in self.nodes.iter().zip(self.weights.iter()) {
            s.add(w * f(*t));
        }
        s.value()
    }
}

/// Grading map `φ: [0,1] → [0,1]` and its derivative.
fn grade(s: f64, p: f64, ends: Ends) -> (f64, f64) {
    if p == 1.0 {
        return (s, 1.0);
    }
    match ends {
        Ends::None => (s, 1.0),
        Ends::Lower => (s.powf(p), p * s.powf(p - 1.0)),
        Ends::Upper => {
            let r = 1.0 - s;
            (1.0 - r.powf(p), p * r.powf(p - 1.0))
        }
        Ends::Both if p.fract() == 0.0 && p <= 12.0 => beta_map(s, p as i32),
        Ends::Both => {
            let u = s.powf(p);
            let v = (1.0 - s).powf(p);
            let du = p * s.powf(p - 1.0);
            let dv = -p * (1.0 - s).powf(p - 1.0);
            let d = u + v;
            (u / d, (du * v - u * dv) / (d * d))
        }
    }
}

/// Regularized incomplete beta `I_s(p, p)` for integer `p`: a polynomial
/// map of degree `2p - 1` with `φ'` vanishing to order `p - 1` at both ends.
fn beta_map(s: f64, p: i32) -> (f64, f64) {
    let n = 2 * p - 1;
    let mut phi = 0.0;
    let mut binom = 1.0;
    for j in 0..=n {
        if j >= p {
            phi += binom * s.powi(j) * (1.0 - s).powi(n - j);
        }
        binom = binom * (n - j) as f64 / (j + 1) as f64;
    }
    // 1 / B(p, p) = (2p - 1)! / ((p - 1)!)^2
    let mut inv_beta = 1.0;
    for j in 0..(p - 1) {
        inv_beta *= (n - j) as f64 / (p - 1 - j) as f64;
    }
    inv_beta *= p as f64;
    let dphi = inv_beta * (s * (1.0 - s)).powi(p - 1);
    (phi, dphi)
}

/// Neumaier compensated sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Componentwise compensated sum of quaternions.
#[derive(Clone, Copy, Debug, Default)]
pub struct QuaternionSum {
    parts: [NeumaierSum; 4],
}

impl QuaternionSum {
    #[inline]
    pub fn add(&mut self, q: Quaternion) {
        for k in 0..4 {
            self.parts[k].add(q.0[k]);
        }
    }

    #[inline]
    pub fn value(&self) -> Quaternion {
        Quaternion([
            self.parts[0].value(),
            self.parts[1].value(),
            self.parts[2].value(),
            self.parts[3].value(),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 33] {
            let g = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = g
                    .nodes
                    .iter()
                    .zip(g.weights.iter())
                    .map(|(x, w)| w * x.powi(deg as i32))
                    .sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((got - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn jacobi_moments() {
        // ∫_{-1}^{1} (1+x)^b x^m dx against a fine graded reference.
        let b = -0.4;
        let rule = gauss_jacobi(12, 0.0, b);
        for m in 0..10 {
            let got: f64 = rule
                .nodes
                .iter()
                .zip(rule.weights.iter())
                .map(|(x, w)| w * x.powi(m))
                .sum();
            // in t = 1 + x, so the grading never rounds onto the singularity
            let reference =
                Rule1d::graded(400, 0.0, 2.0, 4.0, Ends::Lower).integrate(|t| t.powf(b) * (t - 1.0).powi(m));
            assert!((got - reference).abs() < 1e-9, "m={m}: {got} vs {reference}");
        }
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let r = Rule1d::graded(24, 0.0, 1.0, 3.0, Ends::Both);
        let got = r.integrate(|t| t.powf(-0.5));
        assert!((got - 2.0).abs() < 1e-4);
        let total: f64 = r.weights.iter().sum();
        assert!((total - 1.0).abs() < 1e-14, "{total}");
    }

    #[test]
    fn beta_map_is_a_monotone_bijection() {
        for p in 1..6 {
            let (lo, _) = beta_map(0.0, p);
            let (hi, _) = beta_map(1.0, p);
            assert!(lo.abs() < 1e-15 && (hi - 1.0).abs() < 1e-14, "p={p}");
            let h = 1e-6;
            for i in 1..20 {
                let s = i as f64 / 20.0;
                let fd = (beta_map(s + h, p).0 - beta_map(s - h, p).0) / (2.0 * h);
                assert!((fd - beta_map(s, p).1).abs() < 1e-7, "p={p} s={s}");
            }
        }
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let mut s = NeumaierSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }
}
