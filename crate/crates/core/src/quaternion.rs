//! Real and complex quaternions, structural sets and the coordinate maps
//! attached to them.
//!
//! Real quaternions use the Hamilton relations `ij = -ji = k`,
//! `jk = -kj = i`, `ki = -ik = j`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, Mul, MulAssign, Neg, Sub, SubAssign};

use nalgebra::Matrix4;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance used when accepting a candidate structural set.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A real quaternion `c[0] + c[1] i + c[2] j + c[3] k`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Quaternion(pub [f64; 4]);

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion([0.0; 4]);
    pub const ONE: Quaternion = Quaternion([1.0, 0.0, 0.0, 0.0]);
    pub const I: Quaternion = Quaternion([0.0, 1.0, 0.0, 0.0]);
    pub const J: Quaternion = Quaternion([0.0, 0.0, 1.0, 0.0]);
    pub const K: Quaternion = Quaternion([0.0, 0.0, 0.0, 1.0]);

    #[inline]
    pub const fn new(w0: f64, w1: f64, w2: f64, w3: f64) -> Self {
        Quaternion([w0, w1, w2, w3])
    }

    #[inline]
    pub const fn real(r: f64) -> Self {
        Quaternion([r, 0.0, 0.0, 0.0])
    }

    /// The standard basis element `e_k` (`1, i, j, k`).
    #[inline]
    pub fn basis(k: usize) -> Self {
        let mut c = [0.0; 4];
        c[k] = 1.0;
        Quaternion(c)
    }

    #[inline]
    pub fn scalar(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn conj(&self) -> Self {
        let [a, b, c, d] = self.0;
        Quaternion([a, -b, -c, -d])
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c * c).sum()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Largest absolute coefficient.
    #[inline]
    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Quaternionic scalar product `<q, x> = (q̄x + x̄q)/2`, which equals the
    /// Euclidean inner product of the coefficient vectors.
    #[inline]
    pub fn dot(&self, other: &Quaternion) -> f64 {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|c| c.is_finite())
    }

    /// Inverse of a nonzero real quaternion.
    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm_sqr();
        if n == 0.0 {
            None
        } else {
            Some(self.conj() * (1.0 / n))
        }
    }
}

/// `<q, x>` computed literally as `(q̄x + x̄q)/2`.
pub fn scalar_product(q: &Quaternion, x: &Quaternion) -> f64 {
    0.5 * (q.conj() * *x + x.conj() * *q).scalar()
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.0;
        write!(f, "{a} {b:+}i {c:+}j {d:+}k")
    }
}

impl Index<usize> for Quaternion {
    type Output = f64;
    #[inline]
    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn add(self, o: Quaternion) -> Quaternion {
        let (a, b) = (self.0, o.0);
        Quaternion([a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]])
    }
}

impl AddAssign for Quaternion {
    #[inline]
    fn add_assign(&mut self, o: Quaternion) {
        for k in 0..4 {
            self.0[k] += o.0[k];
        }
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn sub(self, o: Quaternion) -> Quaternion {
        let (a, b) = (self.0, o.0);
        Quaternion([a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]])
    }
}

impl SubAssign for Quaternion {
    #[inline]
    fn sub_assign(&mut self, o: Quaternion) {
        for k in 0..4 {
            self.0[k] -= o.0[k];
        }
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn neg(self) -> Quaternion {
        let a = self.0;
        Quaternion([-a[0], -a[1], -a[2], -a[3]])
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, o: Quaternion) -> Quaternion {
        let [a0, a1, a2, a3] = self.0;
        let [b0, b1, b2, b3] = o.0;
        Quaternion([
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ])
    }
}

impl MulAssign for Quaternion {
    #[inline]
    fn mul_assign(&mut self, o: Quaternion) {
        *self = *self * o;
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    #[inline]
    fn mul(self, s: f64) -> Quaternion {
        let a = self.0;
        Quaternion([a[0] * s, a[1] * s, a[2] * s, a[3] * s])
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    #[inline]
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |acc, q| acc + q)
    }
}

/// Orientation of a structural set relative to `{1, i, j, k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }
}

/// An orthonormal quaternion basis `ψ = {ψ_0, ψ_1, ψ_2, ψ_3}` together with
/// its orientation sign.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StructuralSet {
    psi: [Quaternion; 4],
    orientation: Orientation,
}

impl StructuralSet {
    /// `{1, i, j, k}`.
    pub fn standard() -> Self {
        StructuralSet {
            psi: [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K],
            orientation: Orientation::Positive,
        }
    }

    /// Checks orthonormality and computes the orientation from the sign of
    /// the determinant of the coordinate matrix.
    pub fn new(candidates: [Quaternion; 4]) -> Result<Self> {
        for k in 0..4 {
            for s in 0..4 {
                let expected = if k == s { 1.0 } else { 0.0 };
                let got = candidates[k].dot(&candidates[s]);
                if (got - expected).abs() > ORTHONORMAL_TOL {
                    return Err(Error::NotOrthonormal {
                        k,
                        s,
                        value: got,
                    });
                }
            }
        }
        let m = Matrix4::from_fn(|r, c| candidates[r].0[c]);
        let orientation = if m.determinant() > 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        };
        Ok(StructuralSet {
            psi: candidates,
            orientation,
        })
    }

    #[inline]
    pub fn elements(&self) -> &[Quaternion; 4] {
        &self.psi
    }

    #[inline]
    pub fn get(&self, k: usize) -> Quaternion {
        self.psi[k]
    }

    #[inline]
    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    /// `sgnψ` as a real number.
    #[inline]
    pub fn sgn(&self) -> f64 {
        self.orientation.sign()
    }

    /// The conjugate structural set `ψ̄ = {ψ̄_0, ψ̄_1, ψ̄_2, ψ̄_3}`.
    pub fn conjugate(&self) -> Self {
        let psi = self.psi.map(|p| p.conj());
        // Conjugation fixes 1 and flips i, j, k: determinant changes by -1.
        let m = Matrix4::from_fn(|r, c| psi[r].0[c]);
        let orientation = if m.determinant() > 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        };
        StructuralSet { psi, orientation }
    }

    /// ψ-coordinates of `q`, i.e. the `x_k` with `q = Σ x_k ψ_k`.
    #[inline]
    pub fn coords(&self, q: &Quaternion) -> [f64; 4] {
        [
            q.dot(&self.psi[0]),
            q.dot(&self.psi[1]),
            q.dot(&self.psi[2]),
            q.dot(&self.psi[3]),
        ]
    }

    /// `Σ x_k ψ_k`.
    #[inline]
    pub fn assemble(&self, x: &[f64; 4]) -> Quaternion {
        self.psi[0] * x[0] + self.psi[1] * x[1] + self.psi[2] * x[2] + self.psi[3] * x[3]
    }

    /// `<q, x>_ψ = Σ q_k x_k` on ψ-coordinates.
    pub fn scalar_product(&self, q: &Quaternion, x: &Quaternion) -> f64 {
        let a = self.coords(q);
        let b = self.coords(x);
        a.iter().zip(b.iter()).map(|(u, v)| u * v).sum()
    }
}

/// A complex quaternion `Σ ψ_k c_k` with complex coefficients on a
/// structural set. The complex unit commutes with every quaternion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexQuaternion {
    pub coeffs: [Complex64; 4],
    basis: StructuralSet,
}

impl ComplexQuaternion {
    pub fn new(coeffs: [Complex64; 4], basis: StructuralSet) -> Self {
        ComplexQuaternion { coeffs, basis }
    }

    /// Embeds a real quaternion.
    pub fn from_real(q: Quaternion, basis: StructuralSet) -> Self {
        let c = basis.coords(&q);
        ComplexQuaternion {
            coeffs: c.map(|v| Complex64::new(v, 0.0)),
            basis,
        }
    }

    /// A complex scalar `z · 1`.
    pub fn scalar(z: Complex64, basis: StructuralSet) -> Self {
        let one = basis.coords(&Quaternion::ONE);
        ComplexQuaternion {
            coeffs: one.map(|v| z * v),
            basis,
        }
    }

    pub fn basis(&self) -> &StructuralSet {
        &self.basis
    }

    /// Splits into `q_1 + 𝗂 q_2` with real quaternions `q_1, q_2`.
    pub fn parts(&self) -> (Quaternion, Quaternion) {
        let re = self.coeffs.map(|c| c.re);
        let im = self.coeffs.map(|c| c.im);
        (self.basis.assemble(&re), self.basis.assemble(&im))
    }

    fn from_parts(re: Quaternion, im: Quaternion, basis: StructuralSet) -> Self {
        let r = basis.coords(&re);
        let i = basis.coords(&im);
        ComplexQuaternion {
            coeffs: [0, 1, 2, 3].map(|k| Complex64::new(r[k], i[k])),
            basis,
        }
    }

    fn check_basis(&self, other: &ComplexQuaternion) -> Result<()> {
        if self.basis != other.basis {
            Err(Error::MixedBasis)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, other: &ComplexQuaternion) -> Result<ComplexQuaternion> {
        self.check_basis(other)?;
        let mut coeffs = self.coeffs;
        for (c, o) in coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c += o;
        }
        Ok(ComplexQuaternion::new(coeffs, self.basis))
    }

    pub fn scale(&self, z: Complex64) -> ComplexQuaternion {
        ComplexQuaternion::new(self.coeffs.map(|c| c * z), self.basis)
    }

    /// Bilinear extension of the quaternion product.
    pub fn mul(&self, other: &ComplexQuaternion) -> Result<ComplexQuaternion> {
        self.check_basis(other)?;
        let (a1, a2) = self.parts();
        let (b1, b2) = other.parts();
        let re = a1 * b1 - a2 * b2;
        let im = a1 * b2 + a2 * b1;
        Ok(ComplexQuaternion::from_parts(re, im, self.basis))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.norm()))
    }
}
