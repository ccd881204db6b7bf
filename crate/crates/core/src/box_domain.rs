//! The box `J_a^b ⊂ ℝ⁴`, its oriented faces and tensor-product quadrature on
//! faces and volume.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, Ends, NeumaierSum, QuaternionSum, Rule1d};
use crate::quaternion::{Quaternion, StructuralSet};

pub type Point = [f64; 4];

/// Relative tolerance of the orientation calibration.
pub const CALIBRATION_TOL: f64 = 1e-8;

/// The open box `Π (a_k, b_k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Box4 {
    a: Point,
    b: Point,
}

impl Box4 {
    pub fn new(a: Point, b: Point) -> Result<Self> {
        for k in 0..4 {
            if !(a[k] < b[k]) || !a[k].is_finite() || !b[k].is_finite() {
                return Err(Error::DegenerateBox { axis: k, a: a[k], b: b[k] });
            }
        }
        Ok(Box4 { a, b })
    }

    pub fn unit() -> Self {
        Box4 { a: [0.0; 4], b: [1.0; 4] }
    }

    #[inline]
    pub fn a(&self) -> &Point {
        &self.a
    }

    #[inline]
    pub fn b(&self) -> &Point {
        &self.b
    }

    #[inline]
    pub fn width(&self, k: usize) -> f64 {
        self.b[k] - self.a[k]
    }

    /// `m(J_a^b) = Π (b_k - a_k)`.
    pub fn measure(&self) -> f64 {
        (0..4).map(|k| self.width(k)).product()
    }

    pub fn center(&self) -> Point {
        std::array::from_fn(|k| 0.5 * (self.a[k] + self.b[k]))
    }

    pub fn diameter(&self) -> f64 {
        (0..4).map(|k| self.width(k).powi(2)).sum::<f64>().sqrt()
    }

    /// Signed distance to the boundary along the coordinate axes: the
    /// smallest margin `min(x_k - a_k, b_k - x_k)`, negative outside.
    pub fn margin(&self, x: &Point) -> f64 {
        (0..4)
            .map(|k| (x[k] - self.a[k]).min(self.b[k] - x[k]))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.margin(x) > 0.0
    }

    /// Euclidean distance from `x` to the closed box (0 inside).
    pub fn distance_outside(&self, x: &Point) -> f64 {
        (0..4)
            .map(|k| {
                let d = (self.a[k] - x[k]).max(x[k] - self.b[k]).max(0.0);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Number of coordinates in which `x` lies outside `[a_k, b_k]`.
    pub fn exterior_axes(&self, x: &Point) -> usize {
        (0..4).filter(|&k| x[k] < self.a[k] || x[k] > self.b[k]).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FaceSide {
    Lower,
    Upper,
}

impl FaceSide {
    /// Sign of the outward normal along the fixed axis.
    pub fn outward(self) -> f64 {
        match self {
            FaceSide::Lower => -1.0,
            FaceSide::Upper => 1.0,
        }
    }
}

/// Sign multipliers for the 8 faces relative to the nominal factor
/// `-sgnψ (-1)^k ψ_k`, indexed by `2k + side` (lower = 0, upper = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceSigns(pub [f64; 8]);

impl FaceSigns {
    #[inline]
    pub fn get(&self, axis: usize, side: FaceSide) -> f64 {
        self.0[2 * axis + side as usize]
    }

    fn from_bits(bits: u32) -> Self {
        FaceSigns(std::array::from_fn(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }))
    }
}

/// One oriented 3-cube of `∂J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub side: FaceSide,
    pub free_axes: [usize; 3],
    /// Value of the fixed coordinate on this face.
    pub coordinate: f64,
    /// Constant quaternion carried by `σ^ψ` on this face.
    pub sigma_factor: Quaternion,
    pub area: f64,
}

fn free_axes(k: usize) -> [usize; 3] {
    let mut out = [0; 3];
    let mut i = 0;
    for m in 0..4 {
        if m != k {
            out[i] = m;
            i += 1;
        }
    }
    out
}

/// Nominal face factor `-sgnψ (-1)^k ψ_k`.
pub fn nominal_factor(psi: &StructuralSet, k: usize) -> Quaternion {
    let parity = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    psi.get(k) * (-psi.sgn() * parity)
}

/// The 8 faces with the given sign table.
pub fn faces_with_signs(domain: &Box4, psi: &StructuralSet, signs: &FaceSigns) -> [Face; 8] {
    std::array::from_fn(|i| {
        let axis = i / 2;
        let side = if i % 2 == 0 { FaceSide::Lower } else { FaceSide::Upper };
        let free = free_axes(axis);
        Face {
            axis,
            side,
            free_axes: free,
            coordinate: match side {
                FaceSide::Lower => domain.a[axis],
                FaceSide::Upper => domain.b[axis],
            },
            sigma_factor: nominal_factor(psi, axis) * signs.get(axis, side),
            area: free.iter().map(|&m| domain.width(m)).product(),
        }
    })
}

/// The 8 faces with calibrated orientation.
pub fn enumerate_faces(domain: &Box4, psi: &StructuralSet) -> Result<[Face; 8]> {
    let signs = calibrate_orientation(psi, domain, 8)?;
    Ok(faces_with_signs(domain, psi, &signs))
}

/// Per face, the five moments `∫_face σ_nominal · p dS` for `p ∈ {1, x_0..x_3}`.
fn calibration_moments(psi: &StructuralSet, domain: &Box4, n_face: usize) -> Vec<[Quaternion; 5]> {
    let unit = FaceSigns([1.0; 8]);
    let faces = faces_with_signs(domain, psi, &unit);
    let quad = FaceQuad::gauss(n_face);
    faces
        .iter()
        .map(|face| {
            std::array::from_fn(|m| {
                let weight = |y: &Point| if m == 0 { 1.0 } else { y[m - 1] };
                let s = integrate_face(face, domain, &quad, |y| Quaternion::real(weight(y)));
                face.sigma_factor * s.scalar()
            })
        })
        .collect()
}

fn calibration_residual(moments: &[[Quaternion; 5]], signs: &FaceSigns, domain: &Box4, psi: &StructuralSet) -> f64 {
    let measure = domain.measure();
    let scale = measure.max(f64::MIN_POSITIVE);
    (0..5)
        .map(|m| {
            let total: Quaternion = moments
                .iter()
                .enumerate()
                .map(|(i, mom)| mom[m] * signs.0[i])
                .sum();
            // ∫ σ = 0 and ∫ σ x_m = ψ_m m(J)
            let target = if m == 0 { Quaternion::ZERO } else { psi.get(m - 1) * measure };
            (total - target).norm() / scale
        })
        .fold(0.0, f64::max)
}

/// Finds the unique face sign table for which Stokes' formula with `1` on
/// the left and `1, x_0, .., x_3` on the right holds on `domain`.
pub fn calibrate_orientation(psi: &StructuralSet, domain: &Box4, n_face: usize) -> Result<FaceSigns> {
    let moments = calibration_moments(psi, domain, n_face.max(1));
    let mut best: Option<(f64, FaceSigns)> = None;
    let mut accepted = Vec::new();
    for bits in 0..256u32 {
        let signs = FaceSigns::from_bits(bits);
        let r = calibration_residual(&moments, &signs, domain, psi);
        if r <= CALIBRATION_TOL {
            accepted.push(signs);
        }
        if best.is_none_or(|(b, _)| r < b) {
            best = Some((r, signs));
        }
    }
    match accepted.as_slice() {
        [only] => Ok(*only),
        _ => Err(Error::CalibrationFailure {
            residual: best.map_or(f64::INFINITY, |b| b.0),
        }),
    }
}

/// Residual of the calibration identities for a given sign table.
pub fn verify_orientation(psi: &StructuralSet, domain: &Box4, signs: &FaceSigns, n_face: usize) -> Result<f64> {
    let moments = calibration_moments(psi, domain, n_face.max(1));
    let r = calibration_residual(&moments, signs, domain, psi);
    if r <= CALIBRATION_TOL {
        Ok(r)
    } else {
        Err(Error::CalibrationFailure { residual: r })
    }
}

/// Tensor Gauss rule on each face, optionally split at the projection of a
/// point and graded towards the split and the face edges.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceQuad {
    /// Nodes per free axis (per piece when split).
    pub n: usize,
    /// Grading power; 1 gives plain Gauss–Legendre.
    pub grading: f64,
    pub split: Option<Point>,
}

impl FaceQuad {
    pub fn gauss(n: usize) -> Self {
        FaceQuad { n, grading: 1.0, split: None }
    }

    pub fn split_at(n: usize, grading: f64, z: Point) -> Self {
        FaceQuad { n, grading, split: Some(z) }
    }

    /// The rule used along free axis `m`.
    pub fn axis_rule(&self, domain: &Box4, m: usize) -> Rule1d {
        let (lo, hi) = (domain.a[m], domain.b[m]);
        match self.split {
            Some(z) if z[m] > lo && z[m] < hi => Rule1d::split_graded(self.n, lo, hi, self.grading, Some(z[m])),
            _ if self.grading != 1.0 => Rule1d::graded(self.n, lo, hi, self.grading, Ends::Both),
            _ => Rule1d::gauss(self.n, lo, hi),
        }
    }
}

fn integrate_face(
    face: &Face,
    domain: &Box4,
    quad: &FaceQuad,
    f: impl Fn(&Point) -> Quaternion + Sync,
) -> Quaternion {
    let rules = face.free_axes.map(|m| quad.axis_rule(domain, m));
    let [m0, m1, m2] = face.free_axes;
    let partial: Vec<Quaternion> = (0..rules[0].len())
        .into_par_iter()
        .map(|i| {
            let mut acc = QuaternionSum::default();
            let mut y = [0.0; 4];
            y[face.axis] = face.coordinate;
            y[m0] = rules[0].nodes[i];
            for (u, wu) in rules[1].nodes.iter().zip(rules[1].weights.iter()) {
                y[m1] = *u;
                for (v, wv) in rules[2].nodes.iter().zip(rules[2].weights.iter()) {
                    y[m2] = *v;
                    acc.add(f(&y) * (wu * wv));
                }
            }
            acc.value() * rules[0].weights[i]
        })
        .collect();
    let mut total = QuaternionSum::default();
    for p in partial {
        total.add(p);
    }
    total.value()
}

/// `Σ_faces ∫_face left(y) · σ_face · right(y) dS`.
pub fn surface_integral(
    faces: &[Face],
    domain: &Box4,
    left: impl Fn(&Point) -> Quaternion + Sync,
    right: impl Fn(&Point) -> Quaternion + Sync,
    quad: &FaceQuad,
) -> Result<Quaternion> {
    let mut total = QuaternionSum::default();
    for face in faces {
        let s = integrate_face(face, domain, quad, |y| left(y) * face.sigma_factor * right(y));
        if !s.is_finite() {
            return Err(non_finite_on_face(face, domain, quad, &left, &right));
        }
        total.add(s);
    }
    Ok(total.value())
}

fn non_finite_on_face(
    face: &Face,
    domain: &Box4,
    quad: &FaceQuad,
    left: &(impl Fn(&Point) -> Quaternion + Sync),
    right: &(impl Fn(&Point) -> Quaternion + Sync),
) -> Error {
    let rules = face.free_axes.map(|m| quad.axis_rule(domain, m));
    let mut y = [0.0; 4];
    y[face.axis] = face.coordinate;
    for u in &rules[0].nodes {
        for v in &rules[1].nodes {
            for w in &rules[2].nodes {
                y[face.free_axes[0]] = *u;
                y[face.free_axes[1]] = *v;
                y[face.free_axes[2]] = *w;
                if !(left(&y) * right(&y)).is_finite() {
                    return Error::NonFiniteIntegrand { point: y };
                }
            }
        }
    }
    Error::NonFiniteIntegrand { point: y }
}

/// Scalar surface integral `∫_face f dS` over one face.
pub fn face_scalar_integral(face: &Face, domain: &Box4, quad: &FaceQuad, f: impl Fn(&Point) -> f64 + Sync) -> f64 {
    integrate_face(face, domain, quad, |y| Quaternion::real(f(y))).scalar()
}

/// A ball whose nodes are dropped from a volume rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Exclusion {
    pub center: Point,
    pub radius: f64,
}

/// Tensor-product volume rule.
#[derive(Clone, Debug)]
pub struct VolumeGrid {
    pub axes: [Rule1d; 4],
    pub exclusion: Option<Exclusion>,
}

impl VolumeGrid {
    pub fn gauss(domain: &Box4, n: usize) -> Self {
        VolumeGrid {
            axes: std::array::from_fn(|k| Rule1d::gauss(n, domain.a[k], domain.b[k])),
            exclusion: None,
        }
    }

    pub fn midpoint(domain: &Box4, n: usize) -> Self {
        VolumeGrid {
            axes: std::array::from_fn(|k| Rule1d::midpoint(n, domain.a[k], domain.b[k])),
            exclusion: None,
        }
    }

    /// Gauss rules graded towards both ends of each axis with power `p`;
    /// when `split` lies inside the box each axis is cut there and each
    /// piece receives `n` nodes.
    pub fn graded(domain: &Box4, n: usize, p: f64, split: Option<Point>) -> Self {
        VolumeGrid {
            axes: std::array::from_fn(|k| {
                let s = split.map(|z| z[k]).filter(|&c| c > domain.a[k] && c < domain.b[k]);
                Rule1d::split_graded(n, domain.a[k], domain.b[k], p, s)
            }),
            exclusion: None,
        }
    }

    /// Graded towards the lower faces only, where fractional integrands of
    /// order `1 - α` are singular.
    pub fn graded_lower(domain: &Box4, n: usize, p: f64) -> Self {
        VolumeGrid {
            axes: std::array::from_fn(|k| Rule1d::graded(n, domain.a[k], domain.b[k], p, Ends::Lower)),
            exclusion: None,
        }
    }

    pub fn with_exclusion(mut self, center: Point, radius: f64) -> Self {
        self.exclusion = Some(Exclusion { center, radius });
        self
    }

    /// Largest node spacing `max_k (b_k - a_k) / n_k`.
    pub fn spacing(&self) -> f64 {
        self.axes
            .iter()
            .map(|r| {
                let lo = r.nodes.first().copied().unwrap_or(0.0);
                let hi = r.nodes.last().copied().unwrap_or(0.0);
                (hi - lo) / (r.len().max(2) - 1) as f64
            })
            .fold(0.0, f64::max)
    }

    pub fn node_count(&self) -> usize {
        self.axes.iter().map(|r| r.len()).product()
    }

    fn excluded(&self, y: &Point) -> bool {
        match self.exclusion {
            Some(ex) => {
                let d2: f64 = (0..4).map(|k| (y[k] - ex.center[k]).powi(2)).sum();
                d2 < ex.radius * ex.radius
            }
            None => false,
        }
    }
}

/// `Σ w_i f(y_i)` over the grid, skipping excluded nodes. Partial sums are
/// formed per outer node and combined in a fixed order, so the result does
/// not depend on the thread count.
pub fn volume_integral(grid: &VolumeGrid, f: impl Fn(&Point) -> Quaternion + Sync) -> Result<Quaternion> {
    let [r0, r1, r2, r3] = &grid.axes;
    let partial: Vec<std::result::Result<Quaternion, Point>> = (0..r0.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = QuaternionSum::default();
            let mut y = [r0.nodes[i], 0.0, 0.0, 0.0];
            for (u, wu) in r1.nodes.iter().zip(r1.weights.iter()) {
                y[1] = *u;
                for (v, wv) in r2.nodes.iter().zip(r2.weights.iter()) {
                    y[2] = *v;
                    let w12 = wu * wv;
                    for (s, ws) in r3.nodes.iter().zip(r3.weights.iter()) {
                        y[3] = *s;
                        if grid.excluded(&y) {
                            continue;
                        }
                        let val = f(&y);
                        if !val.is_finite() {
                            return Err(y);
                        }
                        acc.add(val * (w12 * ws));
                    }
                }
            }
            Ok(acc.value() * r0.weights[i])
        })
        .collect();
    let mut total = QuaternionSum::default();
    for p in partial {
        match p {
            Ok(q) => total.add(q),
            Err(point) => return Err(Error::NonFiniteIntegrand { point }),
        }
    }
    Ok(total.value())
}

/// `∫_(J ∖ B_ε(z)) f(y) dy` over the 8 pyramids with apex `z` and the faces
/// as bases. With `y = z + t (p - z)` for `p` on a face at distance `h`
/// from `z`, `dy = h t³ dt dA(p)` and the ball becomes the lower limit
/// `t > ε / |p - z|`, so the cut is exact. Face coordinates use `face`;
/// `t` uses `n_radial` Gauss nodes.
pub fn pyramid_integral(
    domain: &Box4,
    z: &Point,
    eps: f64,
    face: &FaceQuad,
    n_radial: usize,
    f: impl Fn(&Point) -> Quaternion + Sync,
) -> Result<Quaternion> {
    if !domain.contains(z) {
        return Err(Error::InvalidPoint(format!("pyramid apex {z:?} is not inside the box")));
    }
    let margin = domain.margin(z);
    if !(eps >= 0.0 && eps < margin) {
        return Err(Error::BoundaryProximity { axis: nearest_face_axis(domain, z), needed: eps });
    }
    let radial = gauss_legendre(n_radial);
    let mut total = QuaternionSum::default();
    for axis in 0..4 {
        for coordinate in [domain.a[axis], domain.b[axis]] {
            let h = (coordinate - z[axis]).abs();
            let free = free_axes(axis);
            let rules = free.map(|m| face.axis_rule(domain, m));
            let partial: Vec<std::result::Result<Quaternion, Point>> = (0..rules[0].len())
                .into_par_iter()
                .map(|i| {
                    let mut acc = QuaternionSum::default();
                    let mut p = [0.0; 4];
                    p[axis] = coordinate;
                    p[free[0]] = rules[0].nodes[i];
                    for (u, wu) in rules[1].nodes.iter().zip(rules[1].weights.iter()) {
                        p[free[1]] = *u;
                        for (v, wv) in rules[2].nodes.iter().zip(rules[2].weights.iter()) {
                            p[free[2]] = *v;
                            let dist = (0..4).map(|k| (p[k] - z[k]).powi(2)).sum::<f64>().sqrt();
                            let t0 = eps / dist;
                            let half = 0.5 * (1.0 - t0);
                            let mut ray = QuaternionSum::default();
                            for (r, wr) in radial.nodes.iter().zip(radial.weights.iter()) {
                                let t = t0 + half * (r + 1.0);
                                let y: Point = std::array::from_fn(|k| z[k] + t * (p[k] - z[k]));
                                let val = f(&y);
                                if !val.is_finite() {
                                    return Err(y);
                                }
                                ray.add(val * (wr * t * t * t));
                            }
                            acc.add(ray.value() * (half * wu * wv));
                        }
                    }
                    Ok(acc.value() * (rules[0].weights[i] * h))
                })
                .collect();
            for part in partial {
                match part {
                    Ok(q) => total.add(q),
                    Err(point) => return Err(Error::NonFiniteIntegrand { point }),
                }
            }
        }
    }
    Ok(total.value())
}

fn nearest_face_axis(domain: &Box4, z: &Point) -> usize {
    (0..4)
        .min_by(|&i, &j| {
            let di = (z[i] - domain.a[i]).min(domain.b[i] - z[i]);
            let dj = (z[j] - domain.a[j]).min(domain.b[j] - z[j]);
            di.total_cmp(&dj)
        })
        .unwrap_or(0)
}

/// Scalar volume integral.
pub fn volume_integral_scalar(grid: &VolumeGrid, f: impl Fn(&Point) -> f64 + Sync) -> Result<f64> {
    Ok(volume_integral(grid, |y| Quaternion::real(f(y)))?.scalar())
}

/// Total unsigned face area.
pub fn total_area(faces: &[Face]) -> f64 {
    let mut s = NeumaierSum::default();
    for f in faces {
        s.add(f.area);
    }
    s.value()
}
