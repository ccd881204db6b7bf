use super::{mixed_error, Ctx};
use fracfueter_core::box_domain::enumerate_faces;
use fracfueter_core::frac_fueter::{
    cauchy_type_check, frac_bp_eval, frac_kernel, frac_stokes_residual, hadamard_ops, m_term, op_c, op_d, op_i,
    op_p, prop1_residual, reduced, second_order_bp_check, HadamardOp, Prop1Item,
};
use fracfueter_core::{
    BasePoint, Error, FieldFn, FracBpQuad, OperatorSide, Point, Quaternion, Result, SingularQuadSpec, SliceAnchor,
    WeightKind, WeightVector,
};
use rand::Rng;

const SIDES: [(OperatorSide, &str); 2] = [(OperatorSide::Left, "left"), (OperatorSide::Right, "right")];

/// Fixed interior and exterior points of the Borel–Pompeiu type checks, in
/// box-relative coordinates. Exterior points leave the box in two axes.
const FRAC_INTERIOR: [[f64; 4]; 2] = [[0.4, 0.6, 0.5, 0.45], [0.3, 0.35, 0.7, 0.6]];
const FRAC_EXTERIOR: [[f64; 4]; 2] = [[1.4, 1.3, 0.5, 0.5], [0.5, 1.35, 1.25, 0.4]];

const STOKES_GRADING: f64 = 3.0;
const REDUCED_NODES: usize = 32;
const REDUCED_KERNEL_NODES: usize = 48;
const HADAMARD_NODES: usize = 40;
const HYPOTHESIS_TOL: f64 = 1e-8;

fn one() -> FieldFn {
    FieldFn::constant(Quaternion::ONE)
}

fn frac_quad(ctx: &Ctx) -> FracBpQuad {
    FracBpQuad {
        bp: ctx.res.bp_quad(),
        outer: SingularQuadSpec::with_nodes(ctx.res.node_count_outer),
    }
}

fn random_rel(rng: &mut impl Rng, lo: f64, hi: f64) -> [f64; 4] {
    std::array::from_fn(|_| rng.gen_range(lo..hi))
}

pub fn prop1(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let spec = ctx.spec_g();
    let f = ctx.field(0);
    let fd = ctx.res.fd();
    let mut rng = ctx.rng();
    for i in 0..20 {
        let q = BasePoint::new(ctx.at(random_rel(&mut rng, 0.2, 0.8)), &domain)?;
        let x = ctx.at(random_rel(&mut rng, 0.2, 0.8));
        for (side, name) in SIDES {
            let r = prop1_residual(&f, &q, &x, &spec, &psi, Prop1Item::One, side, &fd, &domain)?;
            ctx.record(format!("pair[{i}] {name}"), "item1", r);
        }
        // item 2 has no side
        let r = prop1_residual(&f, &q, &x, &spec, &psi, Prop1Item::Two, OperatorSide::Left, &fd, &domain)?;
        ctx.record(format!("pair[{i}]"), "item2", r);
        for (side, name) in SIDES {
            let r = prop1_residual(&f, &q, &x, &spec, &psi, Prop1Item::Three, side, &fd, &domain)?;
            ctx.record(format!("pair[{i}] {name}"), "item3", r);
        }
    }
    Ok(())
}

/// Generic operators with `g = id` weights against the plain
/// Riemann–Liouville path.
pub fn reduction(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let weights = WeightVector::uniform(WeightKind::Identity, &domain, ctx.cfg.weight_reach)?;
    let spec = ctx.spec(&weights, &ctx.setup.alpha);
    let alpha = ctx.setup.alpha.values();
    let a = *domain.a();
    let f = ctx.field(0);
    let mut rng = ctx.rng();
    for i in 0..50 {
        let q = BasePoint::new(ctx.at(random_rel(&mut rng, 0.1, 0.9)), &domain)?;
        let x = ctx.at(random_rel(&mut rng, 0.1, 0.9));
        let y = ctx.at(random_rel(&mut rng, 1.3, 2.0));
        let n = REDUCED_NODES;
        let pairs = [
            ("I", op_i(&f, &q, &x, &spec)?, reduced::op_i(&f, &q, &a, &x, &alpha, n)),
            (
                "D",
                op_d(&f, &q, &x, &spec, &psi, OperatorSide::Left)?,
                reduced::op_d(&f, &q, &a, &x, &alpha, &psi, OperatorSide::Left, n),
            ),
            (
                "D_r",
                op_d(&f, &q, &x, &spec, &psi, OperatorSide::Right)?,
                reduced::op_d(&f, &q, &a, &x, &alpha, &psi, OperatorSide::Right, n),
            ),
            ("P", op_p(&f, &q, &x, &spec)?, reduced::op_p(&f, &q, &a, &x, &alpha, n)),
            ("M", m_term(&f, &q, &x, &spec)?, reduced::m_term(&f, &q, &a, &x, &alpha, n)),
        ];
        for (name, generic, plain) in pairs {
            ctx.record(format!("eval[{i}] {name}"), "operators", mixed_error(generic, plain));
        }
        let generic = frac_kernel(&q, &x, &y, &spec, &psi, SliceAnchor::Evaluation)?;
        let plain = reduced::frac_kernel(&x, &a, &x, &y, &alpha, &psi, REDUCED_KERNEL_NODES);
        ctx.record(format!("eval[{i}] K"), "kernel", mixed_error(generic, plain));
    }
    Ok(())
}

pub fn frac_stokes(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let faces = enumerate_faces(&domain, &psi)?;
    let (g, h) = (ctx.spec_g(), ctx.spec_h());
    let q = ctx.setup.base;
    let cases = [
        ("constant", one(), FieldFn::constant(Quaternion([0.2, 1.0, -0.5, 0.3]))),
        ("linear", FieldFn::coordinate(0), FieldFn::coordinate(1)),
    ];
    for (label, f, ttf) in cases {
        let s = frac_stokes_residual(
            &f,
            &ttf,
            &q,
            &domain,
            &faces,
            &g,
            &h,
            &psi,
            ctx.res.n_face,
            ctx.res.n_volume,
            STOKES_GRADING,
        )?;
        ctx.record(label, "relative", s.relative());
    }
    Ok(())
}

fn scaled(v: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        v / scale
    } else {
        v
    }
}

pub fn frac_bp(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let faces = enumerate_faces(&domain, &psi)?;
    let (g, h) = (ctx.spec_g(), ctx.spec_h());
    let q = ctx.setup.base;
    let quad = frac_quad(ctx);
    let (f, ttf) = (one(), FieldFn::zero());
    let mut scale = 0.0_f64;
    for (i, rel) in FRAC_INTERIOR.into_iter().enumerate() {
        let e = frac_bp_eval(&f, &ttf, &q, &domain, &faces, &g, &h, &psi, &ctx.at(rel), &quad)?;
        scale = scale.max(e.expected.norm());
        ctx.record(format!("interior[{i}]"), "interior", e.relative(None));
    }
    for (i, rel) in FRAC_EXTERIOR.into_iter().enumerate() {
        let e = frac_bp_eval(&f, &ttf, &q, &domain, &faces, &g, &h, &psi, &ctx.at(rel), &quad)?;
        ctx.record(format!("exterior[{i}]"), "exterior", scaled(e.lhs.norm(), scale));
    }
    Ok(())
}

pub fn cauchy_type(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let faces = enumerate_faces(&domain, &psi)?;
    let (g, h) = (ctx.spec_g(), ctx.spec_h());
    let q = ctx.setup.base;
    let quad = frac_quad(ctx);
    let x = ctx.at(FRAC_INTERIOR[0]);
    let zero = FieldFn::zero();
    let c = cauchy_type_check(&zero, &zero, &q, &domain, &faces, &g, &h, &psi, &x, &quad, HYPOTHESIS_TOL)?;
    ctx.record("f = ttf = 0", "zero_solution", c.eval.residual);
    // f = 1 is not fractionally monogenic, so the check must refuse it
    let refused = match cauchy_type_check(&one(), &zero, &q, &domain, &faces, &g, &h, &psi, &x, &quad, HYPOTHESIS_TOL) {
        Err(Error::HypothesisNotMet { .. }) => 0.0,
        Ok(_) => 1.0,
        Err(e) => return Err(e),
    };
    ctx.record("f = 1 rejected", "negative_control", refused);
    Ok(())
}

pub fn hadamard(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let weights = WeightVector::uniform(WeightKind::Log, &domain, ctx.cfg.weight_reach)?;
    let spec = ctx.spec(&weights, &ctx.setup.alpha);
    let orders = ctx.setup.alpha;
    let f = ctx.field(0);
    let mut rng = ctx.rng();
    for i in 0..50 {
        let q = BasePoint::new(ctx.at(random_rel(&mut rng, 0.1, 0.9)), &domain)?;
        let x: Point = ctx.at(random_rel(&mut rng, 0.1, 0.9));
        let pairs = [
            (HadamardOp::I, "I", op_i(&f, &q, &x, &spec)?),
            (HadamardOp::D, "D", op_d(&f, &q, &x, &spec, &psi, OperatorSide::Left)?),
            (HadamardOp::DRight, "D_r", op_d(&f, &q, &x, &spec, &psi, OperatorSide::Right)?),
            (HadamardOp::C, "C", op_c(&f, &q, &x, &spec, &psi, OperatorSide::Left)?),
        ];
        for (op, name, generic) in pairs {
            let special = hadamard_ops(&f, &q, &domain, &x, &orders, &psi, op, HADAMARD_NODES)?;
            ctx.record(format!("eval[{i}] {name}"), "dual_path", mixed_error(generic, special));
        }
    }
    Ok(())
}

pub fn second_order(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let faces = enumerate_faces(&domain, &psi)?;
    let spec = ctx.spec_g();
    let q = ctx.setup.base;
    let quad = ctx.res.bp_quad();
    let f = one();
    let mut scale = 0.0_f64;
    for (i, rel) in FRAC_INTERIOR.into_iter().enumerate() {
        let e = second_order_bp_check(&f, &q, &domain, &faces, &spec, &psi, &ctx.at(rel), &quad)?;
        scale = scale.max(e.expected.norm());
        ctx.record(format!("interior[{i}]"), "interior", e.relative(None));
    }
    let e = second_order_bp_check(&f, &q, &domain, &faces, &spec, &psi, &ctx.at(FRAC_EXTERIOR[0]), &quad)?;
    ctx.record("exterior[0]", "exterior", scaled(e.lhs.norm(), scale));
    Ok(())
}
