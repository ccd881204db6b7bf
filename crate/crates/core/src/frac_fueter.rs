//! Fractional ψ-Fueter operators with respect to a weight vector `g⃗`, the
//! auxiliary operators `I`, `C`, `C_r`, `P`, the cross-axis term `M`, the
//! fractional kernel `𝔎`, and quadrature checks of the identities built on
//! them.
//!
//! Every operator acts on mixed slices: along axis `j` the function
//! `t ↦ f(q_0, .., t, .., q_3)` through a base point `q`. With
//! `I_j = I^(1-α_j)_(g_j)` and `D_j = D^(α_j)_(g_j)` applied to slice `j`:
//!
//! ```text
//! I[f](q, x)   = Σ_j I_j(x_j)
//! D[f](q, x)   = Σ_j ψ_j D_j(x_j)            (right: D_j(x_j) ψ_j)
//! C[f](q, x)   = Σ_j (g_j'(x_j) - 1) ψ_j D_j(x_j)
//! P[f](q, x)   = Σ_j D^(1-α_j)_(g_j)(slice_j)(x_j)
//! M[f](q, x)   = Σ_(j≠k) I_k(x_k) (g_j(x_j) - g_j(a_j))^(α_j-1) / Γ(α_j)
//! ```
//!
//! When `P` acts on a function of `x` (as in `P∘I` and in `𝔎`) the slices
//! run through the evaluation point itself, see [`SliceAnchor`].

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::box_domain::{Box4, Face, Point};
use crate::error::{Error, Result};
use crate::frac1d::{
    frac_derivative, frac_integral, plain, FracOrder, SingularQuadSpec, WeightFunction, WeightKind,
};
use crate::fueter::{
    assemble_fueter, bp_axis_coordinates, bp_lhs, kernel, kernel_partial, partial, second_partial, BpEval,
    BpFields, BpQuad, FDScheme, FieldFn, OperatorSide,
};
use crate::quadrature::{Ends, NeumaierSum, QuaternionSum, Rule1d};
use crate::quaternion::{Quaternion, StructuralSet};
use crate::special::gamma;

/// Default extent of each weight's domain beyond the box, as a multiple of
/// the box width, so that exterior points can be evaluated.
pub const DEFAULT_REACH: f64 = 3.0;

/// Pole margin of [`frac_kernel`].
pub const KERNEL_PATH_MARGIN: f64 = 1e-6;

/// One weight per axis, each starting at the box corner `a_k`.
#[derive(Clone, Debug)]
pub struct WeightVector {
    w: [WeightFunction; 4],
}

impl WeightVector {
    pub fn new(w: [WeightFunction; 4], domain: &Box4) -> Result<Self> {
        for (k, wk) in w.iter().enumerate() {
            let (lo, hi) = wk.domain();
            if lo != domain.a()[k] || hi < domain.b()[k] {
                return Err(Error::InvalidWeight(format!(
                    "axis {k}: weight domain [{lo}, {hi}] does not start at a_{k} = {} and cover b_{k} = {}",
                    domain.a()[k],
                    domain.b()[k]
                )));
            }
        }
        Ok(WeightVector { w })
    }

    /// The same kind on every axis, on `[a_k, a_k + reach (b_k - a_k)]`.
    pub fn uniform(kind: WeightKind, domain: &Box4, reach: f64) -> Result<Self> {
        Self::from_kinds(std::array::from_fn(|_| kind.clone()), domain, reach)
    }

    pub fn from_kinds(kinds: [WeightKind; 4], domain: &Box4, reach: f64) -> Result<Self> {
        if !(reach >= 1.0) {
            return Err(Error::InvalidWeight(format!("reach {reach} is below 1")));
        }
        let mut out = Vec::with_capacity(4);
        for (k, kind) in kinds.into_iter().enumerate() {
            let a = domain.a()[k];
            out.push(WeightFunction::new(kind, a, a + reach * domain.width(k))?);
        }
        let w: [WeightFunction; 4] = out.try_into().expect("four weights");
        Self::new(w, domain)
    }

    pub fn identity(domain: &Box4) -> Result<Self> {
        Self::uniform(WeightKind::Identity, domain, DEFAULT_REACH)
    }

    pub fn log(domain: &Box4) -> Result<Self> {
        Self::uniform(WeightKind::Log, domain, DEFAULT_REACH)
    }

    #[inline]
    pub fn get(&self, k: usize) -> &WeightFunction {
        &self.w[k]
    }

    pub fn all_identity(&self) -> bool {
        self.w.iter().all(|w| w.is_identity())
    }

    /// Left endpoint `a_k` of axis `k`.
    #[inline]
    pub fn start(&self, k: usize) -> f64 {
        self.w[k].domain().0
    }
}

/// Orders `(α_0, .., α_3) ∈ (0, 1)⁴`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracOrderVec(pub [FracOrder; 4]);

impl FracOrderVec {
    pub fn new(alpha: [f64; 4]) -> Result<Self> {
        let mut out = [FracOrder::new(0.5)?; 4];
        for k in 0..4 {
            out[k] = FracOrder::new(alpha[k])?;
        }
        Ok(FracOrderVec(out))
    }

    pub fn uniform(alpha: f64) -> Result<Self> {
        Self::new([alpha; 4])
    }

    #[inline]
    pub fn get(&self, k: usize) -> f64 {
        self.0[k].get()
    }

    pub fn values(&self) -> [f64; 4] {
        self.0.map(|a| a.get())
    }
}

/// The fixed point `q` whose coordinates are replaced one at a time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasePoint(Point);

impl BasePoint {
    pub fn new(q: Point, domain: &Box4) -> Result<Self> {
        if domain.contains(&q) {
            Ok(BasePoint(q))
        } else {
            Err(Error::InvalidPoint(format!("base point {q:?} is not strictly inside the box")))
        }
    }

    pub fn center(domain: &Box4) -> Self {
        BasePoint(domain.center())
    }

    #[inline]
    pub fn point(&self) -> &Point {
        &self.0
    }
}

/// Weights, orders and 1D quadrature of one family of fractional operators.
#[derive(Clone, Debug)]
pub struct FracSpec {
    pub weights: WeightVector,
    pub orders: FracOrderVec,
    pub quad: SingularQuadSpec,
}

/// Which point the slices of `P` pass through when `P` is applied to a
/// function of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceAnchor {
    /// Slices `(q_0, .., t, .., q_3)` through the base point.
    Base,
    /// Slices `(x_0, .., t, .., x_3)` through the evaluation point; this is
    /// the partial fractional derivative in `x_j`.
    Evaluation,
}

/// `(p_0, .., t, .., p_3)`.
#[inline]
pub fn slice_point(p: &Point, j: usize, t: f64) -> Point {
    let mut y = *p;
    y[j] = t;
    y
}

fn check_axis_range(spec: &FracSpec, x: &Point, strict: bool) -> Result<()> {
    for j in 0..4 {
        let (lo, hi) = spec.weights.get(j).domain();
        let ok = if strict { x[j] > lo } else { x[j] >= lo };
        if !ok || x[j] > hi {
            return Err(Error::DomainError { x: x[j], a: lo, b: hi });
        }
    }
    Ok(())
}

/// `I^(1-α_j)_(g_j)` of the axis-`j` slice through `anchor`, at `t`.
pub fn axis_integral(f: &FieldFn, anchor: &Point, j: usize, t: f64, spec: &FracSpec) -> Result<Quaternion> {
    let w = spec.weights.get(j);
    frac_integral(
        |s| f.eval(&slice_point(anchor, j, s)),
        w,
        spec.weights.start(j),
        t,
        spec.orders.0[j].complement(),
        &spec.quad,
    )
}

/// `D^(order)_(g_j)` of the axis-`j` slice through `anchor`, at `t`.
pub fn axis_derivative(
    f: &FieldFn,
    anchor: &Point,
    j: usize,
    t: f64,
    order: FracOrder,
    spec: &FracSpec,
) -> Result<Quaternion> {
    frac_derivative(
        |s| f.eval(&slice_point(anchor, j, s)),
        spec.weights.get(j),
        spec.weights.start(j),
        t,
        order,
        &spec.quad,
    )
}

/// `I[f](q, x) = Σ_j I^(1-α_j)(slice_j)(x_j)`.
pub fn op_i(f: &FieldFn, q: &BasePoint, x: &Point, spec: &FracSpec) -> Result<Quaternion> {
    check_axis_range(spec, x, false)?;
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        acc.add(axis_integral(f, q.point(), j, x[j], spec)?);
    }
    Ok(acc.value())
}

fn per_axis_d(f: &FieldFn, q: &BasePoint, x: &Point, spec: &FracSpec) -> Result<[Quaternion; 4]> {
    check_axis_range(spec, x, true)?;
    let mut out = [Quaternion::ZERO; 4];
    for j in 0..4 {
        out[j] = axis_derivative(f, q.point(), j, x[j], spec.orders.0[j], spec)?;
    }
    Ok(out)
}

#[inline]
fn with_psi(psi: &StructuralSet, j: usize, v: Quaternion, side: OperatorSide) -> Quaternion {
    match side {
        OperatorSide::Left => psi.get(j) * v,
        OperatorSide::Right => v * psi.get(j),
    }
}

/// Fractional ψ-Fueter operator `Σ_j ψ_j D^(α_j)(slice_j)(x_j)` (left) or
/// with `ψ_j` on the right.
pub fn op_d(
    f: &FieldFn,
    q: &BasePoint,
    x: &Point,
    spec: &FracSpec,
    psi: &StructuralSet,
    side: OperatorSide,
) -> Result<Quaternion> {
    let d = per_axis_d(f, q, x, spec)?;
    Ok((0..4).map(|j| with_psi(psi, j, d[j], side)).sum())
}

/// `C[f] = Σ_j (g_j'(x_j) - 1) ψ_j D^(α_j)(slice_j)(x_j)`; `C_r` with the
/// right side.
pub fn op_c(
    f: &FieldFn,
    q: &BasePoint,
    x: &Point,
    spec: &FracSpec,
    psi: &StructuralSet,
    side: OperatorSide,
) -> Result<Quaternion> {
    let d = per_axis_d(f, q, x, spec)?;
    Ok((0..4)
        .map(|j| with_psi(psi, j, d[j], side) * (spec.weights.get(j).prime(x[j]) - 1.0))
        .sum())
}

/// `P[f](q, x) = Σ_j D^(1-α_j)(slice_j)(x_j)` with slices through `q`.
pub fn op_p(f: &FieldFn, q: &BasePoint, x: &Point, spec: &FracSpec) -> Result<Quaternion> {
    op_p_at(|y| f.eval(y), q.point(), x, spec)
}

/// `Σ_j D^(1-α_j)` of the slices of `h` through `anchor`, evaluated at `x_j`.
pub fn op_p_at(h: impl Fn(&Point) -> Quaternion, anchor: &Point, x: &Point, spec: &FracSpec) -> Result<Quaternion> {
    check_axis_range(spec, x, true)?;
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        acc.add(frac_derivative(
            |s| h(&slice_point(anchor, j, s)),
            spec.weights.get(j),
            spec.weights.start(j),
            x[j],
            spec.orders.0[j].complement(),
            &spec.quad,
        )?);
    }
    Ok(acc.value())
}

/// `D^(1-α)[1]` at `x`: `(g(x) - g(a))^(α-1) / Γ(α)`.
pub fn p_of_one(w: &WeightFunction, x: f64, alpha: f64) -> f64 {
    let u = w.value(x) - w.value(w.domain().0);
    u.powf(alpha - 1.0) / gamma(alpha)
}

/// Cross-axis term `Σ_(j≠k) I_k(x_k) (g_j(x_j) - g_j(a_j))^(α_j-1) / Γ(α_j)`.
pub fn m_term(f: &FieldFn, q: &BasePoint, x: &Point, spec: &FracSpec) -> Result<Quaternion> {
    check_axis_range(spec, x, true)?;
    let mut ik = [Quaternion::ZERO; 4];
    for k in 0..4 {
        ik[k] = axis_integral(f, q.point(), k, x[k], spec)?;
    }
    Ok(m_from_integrals(&ik, x, spec))
}

fn m_from_integrals(ik: &[Quaternion; 4], x: &Point, spec: &FracSpec) -> Quaternion {
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        let pj = p_of_one(spec.weights.get(j), x[j], spec.orders.get(j));
        for k in 0..4 {
            if k != j {
                acc.add(ik[k] * pj);
            }
        }
    }
    acc.value()
}

/// `P∘I[f](q, x)` with the outer slices through `x`. Along the axis-`j`
/// slice only the `j`-th term of `I` varies, the others are the constants
/// `I_k(x_k)`.
pub fn p_after_i(f: &FieldFn, q: &BasePoint, x: &Point, spec: &FracSpec) -> Result<Quaternion> {
    check_axis_range(spec, x, true)?;
    let mut ik = [Quaternion::ZERO; 4];
    for k in 0..4 {
        ik[k] = axis_integral(f, q.point(), k, x[k], spec)?;
    }
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        let others: Quaternion = (0..4).filter(|&k| k != j).map(|k| ik[k]).sum();
        let inner = |t: f64| {
            axis_integral(f, q.point(), j, t, spec).unwrap_or(Quaternion([f64::NAN; 4])) + others
        };
        acc.add(frac_derivative(
            inner,
            spec.weights.get(j),
            spec.weights.start(j),
            x[j],
            spec.orders.0[j].complement(),
            &spec.quad,
        )?);
    }
    Ok(acc.value())
}

fn distance_to_segment(y: &Point, anchor: &Point, j: usize, lo: f64, hi: f64) -> f64 {
    let t = y[j].clamp(lo, hi);
    let p = slice_point(anchor, j, t);
    (0..4).map(|k| (y[k] - p[k]).powi(2)).sum::<f64>().sqrt()
}

/// `𝔎(x, y) = Σ_j D^(1-α_j)_t [K_ψ(y - p^(j)(t))](x_j)` where `p^(j)(t)` is
/// the axis-`j` slice through `q` or through `x` (see [`SliceAnchor`]).
pub fn frac_kernel(
    q: &BasePoint,
    x: &Point,
    y: &Point,
    spec: &FracSpec,
    psi: &StructuralSet,
    anchor: SliceAnchor,
) -> Result<Quaternion> {
    check_axis_range(spec, x, true)?;
    let base = match anchor {
        SliceAnchor::Base => *q.point(),
        SliceAnchor::Evaluation => *x,
    };
    for j in 0..4 {
        let lo = spec.weights.start(j);
        let reach = 2.0 * (x[j] - lo) * 0.05 + 1e-3 * (spec.weights.get(j).domain().1 - lo);
        let d = distance_to_segment(y, &base, j, lo, x[j] + reach);
        if d < KERNEL_PATH_MARGIN {
            return Err(Error::KernelPathSingularity { axis: j, distance: d });
        }
    }
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        acc.add(frac_derivative(
            |t| {
                let p = slice_point(&base, j, t);
                kernel(psi, &[y[0] - p[0], y[1] - p[1], y[2] - p[2], y[3] - p[3]])
            },
            spec.weights.get(j),
            spec.weights.start(j),
            x[j],
            spec.orders.0[j].complement(),
            &spec.quad,
        )?);
    }
    Ok(acc.value())
}

/// Which of the three composition identities to check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prop1Item {
    /// `ψD_x ∘ I = C + D`.
    One,
    /// `P ∘ I = Σ_j slice_j(x_j) + M`.
    Two,
    /// `ψ̄D_x ∘ D = Δ∘I - ψ̄D_x ∘ C` with the four-variable Laplacian.
    Three,
}

fn check_fd_room(spec: &FracSpec, x: &Point, fd: &FDScheme, domain: &Box4) -> Result<()> {
    for k in 0..4 {
        let room = (x[k] - spec.weights.start(k)).min(domain.b()[k] - x[k]);
        if room <= fd.reach() {
            return Err(Error::BoundaryProximity { axis: k, needed: fd.reach() });
        }
    }
    Ok(())
}

/// Residual `|lhs - rhs|` of one composition identity at `(q, x)`.
#[allow(clippy::too_many_arguments)]
pub fn prop1_residual(
    f: &FieldFn,
    q: &BasePoint,
    x: &Point,
    spec: &FracSpec,
    psi: &StructuralSet,
    item: Prop1Item,
    side: OperatorSide,
    fd: &FDScheme,
    domain: &Box4,
) -> Result<f64> {
    check_fd_room(spec, x, fd, domain)?;
    let nan = Quaternion([f64::NAN; 4]);
    let lhs_rhs = match item {
        Prop1Item::One => {
            let i_of = |y: &Point| op_i(f, q, y, spec).unwrap_or(nan);
            let lhs = fueter_side(i_of, x, psi, side, fd);
            let rhs = op_c(f, q, x, spec, psi, side)? + op_d(f, q, x, spec, psi, side)?;
            (lhs, rhs)
        }
        Prop1Item::Two => {
            let lhs = p_after_i(f, q, x, spec)?;
            let slices: Quaternion = (0..4).map(|j| f.eval(&slice_point(q.point(), j, x[j]))).sum();
            (lhs, slices + m_term(f, q, x, spec)?)
        }
        Prop1Item::Three => {
            let bar = psi.conjugate();
            let d_of = |y: &Point| op_d(f, q, y, spec, psi, side).unwrap_or(nan);
            let c_of = |y: &Point| op_c(f, q, y, spec, psi, side).unwrap_or(nan);
            let i_of = |y: &Point| op_i(f, q, y, spec).unwrap_or(nan);
            let lhs = fueter_side(d_of, x, &bar, side, fd);
            let lap: Quaternion = (0..4).map(|k| second_partial(i_of, x, k, fd)).sum();
            let rhs = lap - fueter_side(c_of, x, &bar, side, fd);
            (lhs, rhs)
        }
    };
    let r = (lhs_rhs.0 - lhs_rhs.1).norm();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(Error::QuadratureFailure(format!("composition identity residual at {x:?}")))
    }
}

fn fueter_side(
    h: impl Fn(&Point) -> Quaternion,
    x: &Point,
    psi: &StructuralSet,
    side: OperatorSide,
    fd: &FDScheme,
) -> Quaternion {
    let partials: [Quaternion; 4] = std::array::from_fn(|k| partial(&h, x, k, fd));
    assemble_fueter(psi, &partials, side)
}

/// Per-axis values `(I_j(t), g_j'(t) D_j(t))` of a fractional field, memoized
/// by coordinate.
struct AxisMemo<'a> {
    f: &'a FieldFn,
    q: Point,
    spec: &'a FracSpec,
    /// Replaces `(g_j' D_j, I_j)` by `(D_j - g_j''/g_j'² I_j, I_j/g_j')`.
    second_order: bool,
    maps: [Mutex<HashMap<u64, (Quaternion, Quaternion)>>; 4],
}

/// Values of a separable field at a fixed, sorted set of coordinates.
struct AxisTable {
    coords: [Vec<f64>; 4],
    vals: [Vec<(Quaternion, Quaternion)>; 4],
}

impl AxisTable {
    #[inline]
    fn get(&self, j: usize, t: f64) -> &(Quaternion, Quaternion) {
        let i = self.coords[j]
            .binary_search_by(|c| c.total_cmp(&t))
            .expect("coordinate missing from axis table");
        &self.vals[j][i]
    }
}

impl<'a> AxisMemo<'a> {
    fn new(f: &'a FieldFn, q: &BasePoint, spec: &'a FracSpec, second_order: bool) -> Self {
        AxisMemo {
            f,
            q: *q.point(),
            spec,
            second_order,
            maps: Default::default(),
        }
    }

    fn compute(&self, j: usize, t: f64) -> Result<(Quaternion, Quaternion)> {
        let i = axis_integral(self.f, &self.q, j, t, self.spec)?;
        let w = self.spec.weights.get(j);
        // the derivative is only needed at interior volume nodes
        if t <= self.spec.weights.start(j) {
            return Ok((i, Quaternion::ZERO));
        }
        let d = axis_derivative(self.f, &self.q, j, t, self.spec.orders.0[j], self.spec)?;
        if self.second_order {
            let g1 = w.prime(t);
            let g2 = w.second(t).ok_or(Error::MissingSecondDerivative(j))?;
            Ok((i * (1.0 / g1), d - i * (g2 / (g1 * g1))))
        } else {
            Ok((i, d * w.prime(t)))
        }
    }

    fn table(&self, coords: [Vec<f64>; 4]) -> Result<AxisTable> {
        let mut vals: [Vec<(Quaternion, Quaternion)>; 4] = Default::default();
        for j in 0..4 {
            let missing: Vec<f64> = {
                let map = self.maps[j].lock().unwrap();
                coords[j].iter().copied().filter(|t| !map.contains_key(&t.to_bits())).collect()
            };
            let computed: Vec<Result<(Quaternion, Quaternion)>> =
                missing.par_iter().map(|&t| self.compute(j, t)).collect();
            let mut map = self.maps[j].lock().unwrap();
            for (t, v) in missing.iter().zip(computed) {
                map.insert(t.to_bits(), v?);
            }
            vals[j] = coords[j].iter().map(|t| map[&t.to_bits()]).collect();
        }
        Ok(AxisTable { coords, vals })
    }
}

/// Quadrature of the fractional Stokes and Borel–Pompeiu evaluations.
#[derive(Clone, Debug, PartialEq)]
pub struct FracBpQuad {
    pub bp: BpQuad,
    /// Rule of the outer fractional derivative `P` in the contracted form.
    pub outer: SingularQuadSpec,
}

impl FracBpQuad {
    pub fn new(n_volume: usize, n_face: usize, outer_nodes: usize) -> Self {
        FracBpQuad {
            bp: BpQuad::subtraction(n_volume, n_face),
            outer: SingularQuadSpec::with_nodes(outer_nodes),
        }
    }
}

/// Both sides of the fractional Stokes formula.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FracStokesEval {
    pub boundary: Quaternion,
    pub volume: Quaternion,
    pub residual: f64,
}

impl FracStokesEval {
    /// Residual relative to the larger side.
    pub fn relative(&self) -> f64 {
        let s = self.boundary.norm().max(self.volume.norm());
        if s > 0.0 {
            self.residual / s
        } else {
            self.residual
        }
    }
}

fn separable_value(t: &AxisTable, y: &Point) -> Quaternion {
    t.get(0, y[0]).0 + t.get(1, y[1]).0 + t.get(2, y[2]).0 + t.get(3, y[3]).0
}

fn separable_fueter(t: &AxisTable, y: &Point, psi: &StructuralSet, side: OperatorSide) -> Quaternion {
    (0..4).map(|j| with_psi(psi, j, t.get(j, y[j]).1, side)).sum()
}

/// Fractional Stokes formula:
/// `∫_∂J I_h[ttf] σ I_g[f] = ∫_J (I_h[ttf] (C_g + D_g)[f] + (C_r,h + D_r,h)[ttf] I_g[f]) dx`.
#[allow(clippy::too_many_arguments)]
pub fn frac_stokes_residual(
    f: &FieldFn,
    ttf: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    faces: &[Face],
    g: &FracSpec,
    h: &FracSpec,
    psi: &StructuralSet,
    n_face: usize,
    n_volume: usize,
    grading: f64,
) -> Result<FracStokesEval> {
    use crate::box_domain::{surface_integral, volume_integral, FaceQuad, VolumeGrid};
    let fq = FaceQuad {
        n: n_face,
        grading,
        split: None,
    };
    let grid = VolumeGrid::graded(domain, n_volume, grading, None);
    let coords: [Vec<f64>; 4] = std::array::from_fn(|k| {
        let mut c = fq.axis_rule(domain, k).nodes;
        c.extend_from_slice(&grid.axes[k].nodes);
        c.push(domain.a()[k]);
        c.push(domain.b()[k]);
        c.sort_by(f64::total_cmp);
        c.dedup();
        c
    });
    let tf = AxisMemo::new(f, q, g, false).table(coords.clone())?;
    let tt = AxisMemo::new(ttf, q, h, false).table(coords)?;
    let boundary = surface_integral(
        faces,
        domain,
        |y| separable_value(&tt, y),
        |y| separable_value(&tf, y),
        &fq,
    )?;
    let volume = volume_integral(&grid, |y| {
        separable_value(&tt, y) * separable_fueter(&tf, y, psi, OperatorSide::Left)
            + separable_fueter(&tt, y, psi, OperatorSide::Right) * separable_value(&tf, y)
    })?;
    Ok(FracStokesEval {
        boundary,
        volume,
        residual: (boundary - volume).norm(),
    })
}

fn tabulated_coordinates(domain: &Box4, z: &Point, quad: &BpQuad) -> Result<[Vec<f64>; 4]> {
    bp_axis_coordinates(domain, z, quad).ok_or_else(|| {
        Error::InvalidQuadrature("fractional Borel–Pompeiu evaluations need the subtraction volume mode".into())
    })
}

/// Classical Borel–Pompeiu left side at `z` for the separable fields of one
/// or both operator families.
#[allow(clippy::too_many_arguments)]
fn separable_bp_lhs(
    memo_left: Option<&AxisMemo<'_>>,
    memo_right: Option<&AxisMemo<'_>>,
    domain: &Box4,
    faces: &[Face],
    psi: &StructuralSet,
    z: &Point,
    quad: &BpQuad,
    g_volume: bool,
) -> Result<Quaternion> {
    let coords = tabulated_coordinates(domain, z, quad)?;
    let tl = memo_left.map(|m| m.table(coords.clone())).transpose()?;
    let tr = memo_right.map(|m| m.table(coords)).transpose()?;
    let zero = |_: &Point| Quaternion::ZERO;
    let fl = |y: &Point| separable_value(tl.as_ref().unwrap(), y);
    let gl = |y: &Point| separable_fueter(tl.as_ref().unwrap(), y, psi, OperatorSide::Left);
    let fr = |y: &Point| separable_value(tr.as_ref().unwrap(), y);
    let gr = |y: &Point| separable_fueter(tr.as_ref().unwrap(), y, psi, OperatorSide::Right);
    let fields = BpFields {
        left: tl.as_ref().map(|_| -> (crate::fueter::PointRef<'_>, crate::fueter::PointRef<'_>) {
            (&fl, if g_volume { &gl } else { &zero })
        }),
        right: tr.as_ref().map(|_| -> (crate::fueter::PointRef<'_>, crate::fueter::PointRef<'_>) {
            (&fr, if g_volume { &gr } else { &zero })
        }),
    };
    bp_lhs(domain, faces, psi, z, fields, quad)
}

/// `D^(1-α_j)` at `x_j > b_j` of a slice function supported on `[a_j, b_j]`:
/// `(α_j - 1)/Γ(α_j) ∫_a^b u(y) g_j'(y) (g_j(x_j) - g_j(y))^(α_j - 2) dy`.
fn truncated_tail(
    spec: &FracSpec,
    j: usize,
    xj: f64,
    b: f64,
    nodes: usize,
    u: impl Fn(f64) -> Result<Quaternion>,
) -> Result<Quaternion> {
    let w = spec.weights.get(j);
    let alpha = spec.orders.get(j);
    let rule = Rule1d::graded(nodes, spec.weights.start(j), b, 2.0, Ends::Lower);
    let gx = w.value(xj);
    let mut acc = QuaternionSum::default();
    for (y, wy) in rule.nodes.iter().zip(rule.weights.iter()) {
        acc.add(u(*y)? * (wy * w.prime(*y) * (gx - w.value(*y)).powf(alpha - 2.0)));
    }
    Ok(acc.value() * ((alpha - 1.0) / gamma(alpha)))
}

/// `P` (slices through `x`) of a function evaluated pointwise, with the
/// order and weights of `spec`. Slices leaving the box through `b_j` use
/// the closed form of [`truncated_tail`].
fn contracted_p(
    spec: &FracSpec,
    domain: &Box4,
    x: &Point,
    outer: &SingularQuadSpec,
    b: impl Fn(&Point) -> Result<Quaternion> + Sync,
) -> Result<Quaternion> {
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        if x[j] > domain.b()[j] {
            acc.add(truncated_tail(spec, j, x[j], domain.b()[j], outer.node_count, |t| {
                b(&slice_point(x, j, t))
            })?);
            continue;
        }
        let err: Mutex<Option<Error>> = Mutex::new(None);
        let v = frac_derivative(
            |t| match b(&slice_point(x, j, t)) {
                Ok(v) => v,
                Err(e) => {
                    err.lock().unwrap().get_or_insert(e);
                    Quaternion([f64::NAN; 4])
                }
            },
            spec.weights.get(j),
            spec.weights.start(j),
            x[j],
            spec.orders.0[j].complement(),
            outer,
        );
        if let Some(e) = err.into_inner().unwrap() {
            return Err(e);
        }
        acc.add(v?);
    }
    Ok(acc.value())
}

/// Expected right side of the fractional Borel–Pompeiu identity for one
/// family: `Σ_j slice_j(x_j) + M` inside the box, `0` when `x` lies outside
/// in at least two coordinates, and the nonlocal tail of the truncated
/// slice when exactly one coordinate is outside.
fn frac_bp_expected(
    f: &FieldFn,
    q: &BasePoint,
    x: &Point,
    spec: &FracSpec,
    domain: &Box4,
    nodes: usize,
) -> Result<Quaternion> {
    if f.is_known_zero() {
        return Ok(Quaternion::ZERO);
    }
    if domain.contains(x) {
        let slices: Quaternion = (0..4).map(|j| f.eval(&slice_point(q.point(), j, x[j]))).sum();
        return Ok(slices + m_term(f, q, x, spec)?);
    }
    let outside: Vec<usize> = (0..4)
        .filter(|&k| x[k] < domain.a()[k] || x[k] > domain.b()[k])
        .collect();
    if outside.len() != 1 {
        return Ok(Quaternion::ZERO);
    }
    let j = outside[0];
    let others: Quaternion = (0..4)
        .filter(|&k| k != j)
        .map(|k| axis_integral(f, q.point(), k, x[k], spec))
        .sum::<Result<Quaternion>>()?;
    truncated_tail(spec, j, x[j], domain.b()[j], nodes, |t| {
        Ok(axis_integral(f, q.point(), j, t, spec)? + others)
    })
}

fn check_bp_point(x: &Point, domain: &Box4, specs: [&FracSpec; 2]) -> Result<()> {
    for spec in specs {
        for j in 0..4 {
            let (lo, hi) = spec.weights.get(j).domain();
            if !(x[j] > lo && x[j] < hi) {
                return Err(Error::DomainError { x: x[j], a: lo, b: hi });
            }
        }
    }
    if domain.contains(x) {
        let need = 1e-3 * (0..4).map(|k| domain.width(k)).fold(f64::INFINITY, f64::min);
        for k in 0..4 {
            if domain.b()[k] - x[k] < need {
                return Err(Error::BoundaryProximity { axis: k, needed: need });
            }
        }
    }
    Ok(())
}

/// Fractional Borel–Pompeiu identity at `x`.
///
/// The left side is evaluated in contracted order: for each axis the outer
/// fractional derivative is applied to the classical two-sided
/// Borel–Pompeiu expression `B(z)` along the slice through `x`, which is the
/// kernel `𝔎` integrated against the fields after exchanging the
/// `x`-derivative with the `y`-integrals.
#[allow(clippy::too_many_arguments)]
pub fn frac_bp_eval(
    f: &FieldFn,
    ttf: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    faces: &[Face],
    g: &FracSpec,
    h: &FracSpec,
    psi: &StructuralSet,
    x: &Point,
    quad: &FracBpQuad,
) -> Result<BpEval> {
    frac_bp_general(f, ttf, q, domain, faces, g, h, psi, x, quad, true)
}

#[allow(clippy::too_many_arguments)]
fn frac_bp_general(
    f: &FieldFn,
    ttf: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    faces: &[Face],
    g: &FracSpec,
    h: &FracSpec,
    psi: &StructuralSet,
    x: &Point,
    quad: &FracBpQuad,
    d_volume: bool,
) -> Result<BpEval> {
    quad.bp.validate()?;
    quad.outer.validate()?;
    check_bp_point(x, domain, [g, h])?;
    let mut lhs = Quaternion::ZERO;
    if !f.is_known_zero() {
        let memo = AxisMemo::new(f, q, g, false);
        lhs += contracted_p(g, domain, x, &quad.outer, |z| {
            separable_bp_lhs_c(Some(&memo), None, domain, faces, psi, z, &quad.bp, d_volume, g)
        })?;
    }
    if !ttf.is_known_zero() {
        let memo = AxisMemo::new(ttf, q, h, false);
        lhs += contracted_p(h, domain, x, &quad.outer, |z| {
            separable_bp_lhs_c(None, Some(&memo), domain, faces, psi, z, &quad.bp, d_volume, h)
        })?;
    }
    let n = quad.outer.node_count;
    let expected = frac_bp_expected(f, q, x, g, domain, n)? + frac_bp_expected(ttf, q, x, h, domain, n)?;
    Ok(BpEval::new(lhs, expected))
}

/// As [`separable_bp_lhs`], with the volume field restricted to the `C`
/// part when the `D` part is dropped.
#[allow(clippy::too_many_arguments)]
fn separable_bp_lhs_c(
    memo_left: Option<&AxisMemo<'_>>,
    memo_right: Option<&AxisMemo<'_>>,
    domain: &Box4,
    faces: &[Face],
    psi: &StructuralSet,
    z: &Point,
    quad: &BpQuad,
    d_volume: bool,
    spec: &FracSpec,
) -> Result<Quaternion> {
    if d_volume {
        return separable_bp_lhs(memo_left, memo_right, domain, faces, psi, z, quad, true);
    }
    // volume field Σ (g_j' - 1) ψ_j D_j = Σ ψ_j (g_j' D_j) (1 - 1/g_j')
    let coords = tabulated_coordinates(domain, z, quad)?;
    let table = match (memo_left, memo_right) {
        (Some(m), _) => m.table(coords)?,
        (None, Some(m)) => m.table(coords)?,
        (None, None) => return Ok(Quaternion::ZERO),
    };
    let side = if memo_left.is_some() { OperatorSide::Left } else { OperatorSide::Right };
    let val = |y: &Point| separable_value(&table, y);
    let cpart = |y: &Point| -> Quaternion {
        (0..4)
            .map(|j| {
                let gp = spec.weights.get(j).prime(y[j]);
                with_psi(psi, j, table.get(j, y[j]).1, side) * (1.0 - 1.0 / gp)
            })
            .sum()
    };
    let pair: (crate::fueter::PointRef<'_>, crate::fueter::PointRef<'_>) = (&val, &cpart);
    let fields = match side {
        OperatorSide::Left => BpFields { left: Some(pair), right: None },
        OperatorSide::Right => BpFields { left: None, right: Some(pair) },
    };
    bp_lhs(domain, faces, psi, z, fields, quad)
}

/// Result of the Cauchy-type check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyEval {
    pub eval: BpEval,
    /// Largest `|D[f]|`, `|D_r[ttf]|` seen on the hypothesis sample grid.
    pub hypothesis_magnitude: f64,
}

/// Cauchy-type formula: the Borel–Pompeiu identity with the `D` volume terms
/// dropped, valid when `D_g[f] = 0` and `D_r,h[ttf] = 0`. The hypothesis is
/// checked on a `3⁴` interior sample grid first.
#[allow(clippy::too_many_arguments)]
pub fn cauchy_type_check(
    f: &FieldFn,
    ttf: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    faces: &[Face],
    g: &FracSpec,
    h: &FracSpec,
    psi: &StructuralSet,
    x: &Point,
    quad: &FracBpQuad,
    tolerance: f64,
) -> Result<CauchyEval> {
    let mut magnitude = 0.0_f64;
    for idx in 0..81 {
        let s = [idx % 3, idx / 3 % 3, idx / 9 % 3, idx / 27];
        let y: Point = std::array::from_fn(|k| domain.a()[k] + domain.width(k) * (s[k] as f64 + 1.0) / 4.0);
        if !f.is_known_zero() {
            magnitude = magnitude.max(op_d(f, q, &y, g, psi, OperatorSide::Left)?.norm());
        }
        if !ttf.is_known_zero() {
            magnitude = magnitude.max(op_d(ttf, q, &y, h, psi, OperatorSide::Right)?.norm());
        }
    }
    if magnitude > tolerance {
        return Err(Error::HypothesisNotMet { magnitude, tolerance });
    }
    let eval = frac_bp_general(f, ttf, q, domain, faces, g, h, psi, x, quad, false)?;
    Ok(CauchyEval {
        eval,
        hypothesis_magnitude: magnitude,
    })
}

/// Second-order variant: the classical Borel–Pompeiu formula applied to
/// `H = Σ_j I_j / g_j'`, whose Fueter derivative is
/// `D_g[f] - Σ_j ψ_j (g_j'' / g_j'²) I_j`. Expected `H(x)` inside, `0`
/// outside.
#[allow(clippy::too_many_arguments)]
pub fn second_order_bp_check(
    f: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    faces: &[Face],
    spec: &FracSpec,
    psi: &StructuralSet,
    x: &Point,
    quad: &BpQuad,
) -> Result<BpEval> {
    for j in 0..4 {
        if !spec.weights.get(j).has_second() {
            return Err(Error::MissingSecondDerivative(j));
        }
    }
    check_bp_point(x, domain, [spec, spec])?;
    let memo = AxisMemo::new(f, q, spec, true);
    let lhs = separable_bp_lhs(Some(&memo), None, domain, faces, psi, x, quad, true)?;
    let expected = if domain.contains(x) {
        let mut acc = QuaternionSum::default();
        for j in 0..4 {
            let w = spec.weights.get(j);
            acc.add(axis_integral(f, q.point(), j, x[j], spec)? * (1.0 / w.prime(x[j])));
        }
        acc.value()
    } else {
        Quaternion::ZERO
    };
    Ok(BpEval::new(lhs, expected))
}

/// Operators of the Hadamard specialization (`g⃗ = ln`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HadamardOp {
    I,
    D,
    DRight,
    C,
}

fn slice_partial(f: &FieldFn, p: &Point, j: usize, fd: &FDScheme) -> Quaternion {
    match f.analytic_partials(p) {
        Some(d) => d[j],
        None => partial(|y| f.eval(y), p, j, fd),
    }
}

/// The Hadamard operators written in `x_j ∂/∂x_j` form, evaluated in the
/// variable `u = ln t` with Gauss–Jacobi rules:
///
/// ```text
/// I = Σ_j I_j,   D = Σ_j ψ_j x_j ∂_j I_j,   C = Σ_j (1 - x_j) ψ_j ∂_j I_j
/// ```
#[allow(clippy::too_many_arguments)]
pub fn hadamard_ops(
    f: &FieldFn,
    q: &BasePoint,
    domain: &Box4,
    x: &Point,
    orders: &FracOrderVec,
    psi: &StructuralSet,
    which: HadamardOp,
    nodes: usize,
) -> Result<Quaternion> {
    for k in 0..4 {
        if domain.a()[k] <= 0.0 {
            return Err(Error::DomainError {
                x: domain.a()[k],
                a: 0.0,
                b: f64::INFINITY,
            });
        }
        if x[k] < domain.a()[k] {
            return Err(Error::DomainError {
                x: x[k],
                a: domain.a()[k],
                b: f64::INFINITY,
            });
        }
    }
    let fd = FDScheme::default();
    let qp = q.point();
    let mut acc = QuaternionSum::default();
    for j in 0..4 {
        let a = domain.a()[j];
        let alpha = orders.get(j);
        let phi = |t: f64| f.eval(&slice_point(qp, j, t));
        let dphi = |t: f64| slice_partial(f, &slice_point(qp, j, t), j, &fd);
        let term = match which {
            HadamardOp::I => plain::hadamard_integral(phi, a, x[j], 1.0 - alpha, nodes),
            _ => {
                // x ∂_x I^(1-α)_ln = D^α_ln, the plain derivative in u = ln t
                let x_dx = plain::hadamard_derivative(phi, dphi, a, x[j], alpha, nodes);
                match which {
                    HadamardOp::D => psi.get(j) * x_dx,
                    HadamardOp::DRight => x_dx * psi.get(j),
                    _ => psi.get(j) * (x_dx * ((1.0 - x[j]) / x[j])),
                }
            }
        };
        acc.add(term);
    }
    Ok(acc.value())
}

/// Plain Riemann–Liouville versions (`g⃗ = id`) of the operators, coded
/// directly on Gauss–Jacobi rules and analytic slice derivatives.
pub mod reduced {
    use super::*;

    fn dslice<'a>(f: &'a FieldFn, anchor: &Point, j: usize) -> impl Fn(f64) -> Quaternion + 'a {
        let anchor = *anchor;
        move |t| slice_partial(f, &slice_point(&anchor, j, t), j, &FDScheme::default())
    }

    pub fn op_i(f: &FieldFn, q: &BasePoint, a: &Point, x: &Point, alpha: &[f64; 4], n: usize) -> Quaternion {
        (0..4)
            .map(|j| plain::rl_integral(|t| f.eval(&slice_point(q.point(), j, t)), a[j], x[j], 1.0 - alpha[j], n))
            .sum()
    }

    fn axis_d(f: &FieldFn, anchor: &Point, a: &Point, x: &Point, j: usize, order: f64, n: usize) -> Quaternion {
        plain::rl_derivative(
            |t| f.eval(&slice_point(anchor, j, t)),
            dslice(f, anchor, j),
            a[j],
            x[j],
            order,
            n,
        )
    }

    #[allow(clippy::too_many_arguments)]
    pub fn op_d(
        f: &FieldFn,
        q: &BasePoint,
        a: &Point,
        x: &Point,
        alpha: &[f64; 4],
        psi: &StructuralSet,
        side: OperatorSide,
        n: usize,
    ) -> Quaternion {
        (0..4)
            .map(|j| with_psi(psi, j, axis_d(f, q.point(), a, x, j, alpha[j], n), side))
            .sum()
    }

    pub fn op_p(f: &FieldFn, q: &BasePoint, a: &Point, x: &Point, alpha: &[f64; 4], n: usize) -> Quaternion {
        (0..4).map(|j| axis_d(f, q.point(), a, x, j, 1.0 - alpha[j], n)).sum()
    }

    pub fn m_term(f: &FieldFn, q: &BasePoint, a: &Point, x: &Point, alpha: &[f64; 4], n: usize) -> Quaternion {
        let ik: [Quaternion; 4] = std::array::from_fn(|k| {
            plain::rl_integral(|t| f.eval(&slice_point(q.point(), k, t)), a[k], x[k], 1.0 - alpha[k], n)
        });
        let mut acc = QuaternionSum::default();
        for j in 0..4 {
            let pj = (x[j] - a[j]).powf(alpha[j] - 1.0) / gamma(alpha[j]);
            for k in 0..4 {
                if k != j {
                    acc.add(ik[k] * pj);
                }
            }
        }
        acc.value()
    }

    /// `𝔎` with the slice derivative of the kernel taken analytically.
    #[allow(clippy::too_many_arguments)]
    pub fn frac_kernel(
        anchor: &Point,
        a: &Point,
        x: &Point,
        y: &Point,
        alpha: &[f64; 4],
        psi: &StructuralSet,
        n: usize,
    ) -> Quaternion {
        let d_at = |j: usize, t: f64| -> Point {
            let p = slice_point(anchor, j, t);
            [y[0] - p[0], y[1] - p[1], y[2] - p[2], y[3] - p[3]]
        };
        (0..4)
            .map(|j| {
                plain::rl_derivative(
                    |t| kernel(psi, &d_at(j, t)),
                    // d/dt K(y - p(t)) = -∂_j K
                    |t| -kernel_partial(psi, &d_at(j, t), j),
                    a[j],
                    x[j],
                    1.0 - alpha[j],
                    n,
                )
            })
            .sum()
    }
}

/// Sum of `|v|` over a list, compensated.
pub fn total_norm(values: &[Quaternion]) -> f64 {
    let mut s = NeumaierSum::default();
    for v in values {
        s.add(v.norm());
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::box_domain::enumerate_faces;
    use crate::testfn::Poly4;

    fn spec_for(domain: &Box4, kind: WeightKind, alpha: [f64; 4], nodes: usize) -> FracSpec {
        FracSpec {
            weights: WeightVector::uniform(kind, domain, DEFAULT_REACH).unwrap(),
            orders: FracOrderVec::new(alpha).unwrap(),
            quad: SingularQuadSpec::with_nodes(nodes),
        }
    }

    #[test]
    fn constant_field_closed_forms() {
        let domain = Box4::new([1.0; 4], [2.0; 4]).unwrap();
        let spec = spec_for(&domain, WeightKind::Log, [0.3, 0.5, 0.6, 0.8], 256);
        let q = BasePoint::center(&domain);
        let c = Quaternion::new(0.5, -1.0, 2.0, 0.25);
        let f = FieldFn::constant(c);
        let x: Point = [1.3, 1.7, 1.2, 1.9];
        let psi = StructuralSet::standard();
        let mut expected_i = 0.0;
        let mut expected_p = 0.0;
        let mut expected_d = Quaternion::ZERO;
        for j in 0..4 {
            let a = spec.orders.get(j);
            let u = x[j].ln();
            expected_i += u.powf(1.0 - a) / gamma(2.0 - a);
            expected_p += u.powf(a - 1.0) / gamma(a);
            expected_d += psi.get(j) * c * (u.powf(-a) / gamma(1.0 - a));
        }
        assert!((op_i(&f, &q, &x, &spec).unwrap() - c * expected_i).norm() < 1e-12);
        assert!((op_p(&f, &q, &x, &spec).unwrap() - c * expected_p).norm() < 1e-8);
        assert!((op_d(&f, &q, &x, &spec, &psi, OperatorSide::Left).unwrap() - expected_d).norm() < 1e-8);
        assert_eq!(op_i(&FieldFn::zero(), &q, &x, &spec).unwrap(), Quaternion::ZERO);
    }

    #[test]
    fn c_vanishes_for_identity_weights() {
        let domain = Box4::unit();
        let spec = spec_for(&domain, WeightKind::Identity, [0.4; 4], 128);
        let f = Poly4::random(2, 2).to_field();
        let q = BasePoint::center(&domain);
        let c = op_c(&f, &q, &[0.3, 0.6, 0.5, 0.7], &spec, &StructuralSet::standard(), OperatorSide::Left).unwrap();
        assert_eq!(c, Quaternion::ZERO);
    }

    #[test]
    fn m_term_for_unit_field() {
        let domain = Box4::unit();
        let spec = spec_for(&domain, WeightKind::Identity, [0.5; 4], 256);
        let x = [0.3, 0.6, 0.5, 0.7];
        let m = m_term(&FieldFn::constant(Quaternion::ONE), &BasePoint::center(&domain), &x, &spec).unwrap();
        let mut expected = 0.0;
        for j in 0..4 {
            for k in 0..4 {
                if j != k {
                    expected += x[k].sqrt() / gamma(1.5) * x[j].powf(-0.5) / gamma(0.5);
                }
            }
        }
        assert!((m.scalar() - expected).abs() < 1e-12);
    }

    #[test]
    fn composition_identities_on_quadratic() {
        let domain = Box4::new([1.0; 4], [2.0; 4]).unwrap();
        let spec = spec_for(&domain, WeightKind::Log, [0.3, 0.45, 0.6, 0.7], 256);
        let f = Poly4::random(4, 2).to_field();
        let q = BasePoint::new([1.4, 1.5, 1.6, 1.45], &domain).unwrap();
        let x = [1.35, 1.62, 1.5, 1.71];
        let psi = StructuralSet::standard();
        let fd = FDScheme::default();
        for item in [Prop1Item::One, Prop1Item::Two, Prop1Item::Three] {
            let r = prop1_residual(&f, &q, &x, &spec, &psi, item, OperatorSide::Left, &fd, &domain).unwrap();
            assert!(r < 1e-5, "{item:?}: {r}");
        }
    }

    #[test]
    fn reduced_path_agrees() {
        let domain = Box4::unit();
        let alpha = [0.3, 0.5, 0.65, 0.8];
        let spec = spec_for(&domain, WeightKind::Identity, alpha, 512);
        let f = Poly4::random(6, 3).to_field();
        let q = BasePoint::center(&domain);
        let x = [0.35, 0.7, 0.55, 0.4];
        let a = [0.0; 4];
        let psi = StructuralSet::standard();
        let d1 = op_d(&f, &q, &x, &spec, &psi, OperatorSide::Left).unwrap();
        let d2 = reduced::op_d(&f, &q, &a, &x, &alpha, &psi, OperatorSide::Left, 32);
        assert!((d1 - d2).norm() < 1e-10, "{}", (d1 - d2).norm());
        let y = [1.6, 1.3, -0.4, 0.9];
        let k1 = frac_kernel(&q, &x, &y, &spec, &psi, SliceAnchor::Evaluation).unwrap();
        let k2 = reduced::frac_kernel(&x, &a, &x, &y, &alpha, &psi, 48);
        assert!((k1 - k2).norm() < 1e-8 * k2.norm().max(1.0), "{}", (k1 - k2).norm());
    }

    #[test]
    fn kernel_path_guard() {
        let domain = Box4::unit();
        let spec = spec_for(&domain, WeightKind::Identity, [0.5; 4], 64);
        let q = BasePoint::center(&domain);
        let x = [0.6, 0.5, 0.5, 0.5];
        let on_path = [0.3, 0.5, 0.5, 0.5];
        assert!(matches!(
            frac_kernel(&q, &x, &on_path, &spec, &StructuralSet::standard(), SliceAnchor::Base),
            Err(Error::KernelPathSingularity { axis: 0, .. })
        ));
    }

    #[test]
    fn hadamard_forms_match_generic() {
        let domain = Box4::new([1.0; 4], [2.0; 4]).unwrap();
        let alpha = [0.3, 0.5, 0.6, 0.75];
        let spec = spec_for(&domain, WeightKind::Log, alpha, 512);
        let f = Poly4::random(8, 2).to_field();
        let q = BasePoint::center(&domain);
        let x = [1.3, 1.8, 1.55, 1.2];
        let psi = StructuralSet::standard();
        let orders = FracOrderVec::new(alpha).unwrap();
        let pairs = [
            (HadamardOp::I, op_i(&f, &q, &x, &spec).unwrap()),
            (HadamardOp::D, op_d(&f, &q, &x, &spec, &psi, OperatorSide::Left).unwrap()),
            (HadamardOp::DRight, op_d(&f, &q, &x, &spec, &psi, OperatorSide::Right).unwrap()),
            (HadamardOp::C, op_c(&f, &q, &x, &spec, &psi, OperatorSide::Left).unwrap()),
        ];
        for (op, generic) in pairs {
            let special = hadamard_ops(&f, &q, &domain, &x, &orders, &psi, op, 40).unwrap();
            assert!((special - generic).norm() < 1e-10, "{op:?}: {}", (special - generic).norm());
        }
    }

    #[test]
    fn frac_stokes_constant_fields() {
        let domain = Box4::unit();
        let psi = StructuralSet::standard();
        let faces = enumerate_faces(&domain, &psi).unwrap();
        let g = spec_for(&domain, WeightKind::Identity, [0.4, 0.5, 0.6, 0.7], 128);
        let q = BasePoint::center(&domain);
        let one = FieldFn::constant(Quaternion::ONE);
        let two = FieldFn::constant(Quaternion::new(0.0, 1.0, -1.0, 0.5));
        let r = frac_stokes_residual(&one, &two, &q, &domain, &faces, &g, &g, &psi, 8, 8, 3.0).unwrap();
        assert!(r.relative() < 0.05, "{r:?}");
    }
}
