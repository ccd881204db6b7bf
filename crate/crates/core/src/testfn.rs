//! Seeded quaternion-coefficient polynomials in four real variables.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::box_domain::Point;
use crate::fueter::{FieldFn, Smoothness};
use crate::quaternion::Quaternion;

/// `Σ c_e x^e` with quaternion coefficients `c_e` and multi-indices `e`.
#[derive(Clone, Debug, PartialEq)]
pub struct Poly4 {
    terms: Vec<(Quaternion, [u32; 4])>,
}

fn monomial(x: &Point, e: &[u32; 4]) -> f64 {
    x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32) * x[3].powi(e[3] as i32)
}

/// All multi-indices of total degree at most `degree`, in a fixed order.
fn exponents(degree: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for total in 0..=degree {
        for e0 in (0..=total).rev() {
            for e1 in (0..=total - e0).rev() {
                for e2 in (0..=total - e0 - e1).rev() {
                    out.push([e0, e1, e2, total - e0 - e1 - e2]);
                }
            }
        }
    }
    out
}

impl Poly4 {
    pub fn new(terms: Vec<(Quaternion, [u32; 4])>) -> Self {
        Poly4 { terms }
    }

    pub fn constant(c: Quaternion) -> Self {
        Poly4 { terms: vec![(c, [0; 4])] }
    }

    /// Dense polynomial of total degree `degree` with coefficient components
    /// drawn uniformly from `[-1, 1]`.
    pub fn random(seed: u64, degree: u32) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let terms = exponents(degree)
            .into_iter()
            .map(|e| {
                let c = Quaternion(std::array::from_fn(|_| rng.gen_range(-1.0..=1.0)));
                (c, e)
            })
            .collect();
        Poly4 { terms }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|(_, e)| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn eval(&self, x: &Point) -> Quaternion {
        self.terms.iter().map(|(c, e)| *c * monomial(x, e)).sum()
    }

    /// `∂_k` as a polynomial.
    pub fn partial(&self, k: usize) -> Poly4 {
        let terms = self
            .terms
            .iter()
            .filter(|(_, e)| e[k] > 0)
            .map(|(c, e)| {
                let mut d = *e;
                d[k] -= 1;
                (*c * e[k] as f64, d)
            })
            .collect();
        Poly4 { terms }
    }

    /// Wraps the polynomial as a field with analytic partial derivatives.
    pub fn to_field(&self) -> FieldFn {
        let p = self.clone();
        let partials: [Poly4; 4] = std::array::from_fn(|k| self.partial(k));
        FieldFn::new(move |x: &Point| p.eval(x), Smoothness::Polynomial)
            .with_partials(move |x: &Point| std::array::from_fn(|k| partials[k].eval(x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_polynomials_are_reproducible() {
        assert_eq!(Poly4::random(7, 3), Poly4::random(7, 3));
        assert_ne!(Poly4::random(7, 3), Poly4::random(8, 3));
        assert_eq!(exponents(2).len(), 15);
        assert_eq!(Poly4::random(1, 3).degree(), 3);
    }

    #[test]
    fn partials_match_finite_differences() {
        let p = Poly4::random(3, 3);
        let x = [0.3, -0.2, 0.7, 0.1];
        let h = 1e-5;
        for k in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) * (0.5 / h);
            assert!((fd - p.partial(k).eval(&x)).norm() < 1e-8);
        }
    }
}
