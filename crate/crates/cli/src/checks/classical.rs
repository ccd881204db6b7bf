use super::Ctx;
use fracfueter_core::box_domain::{calibrate_orientation, enumerate_faces, verify_orientation};
use fracfueter_core::fueter::{borel_pompeiu_eval, fueter_fd, stokes_residual, teodorescu as transform};
use fracfueter_core::{Error, OperatorSide, Quaternion, Result, StructuralSet};
use rand::Rng;

const CALIBRATION_NODES: usize = 8;

pub(super) const BP_EXTERIOR: [[f64; 4]; 2] = [[1.5, 0.5, 0.5, 0.5], [0.3, -0.45, 1.4, 0.6]];

/// The configured set and a second one: the standard set if the configured
/// one is not standard, otherwise `{1, j, i, k}`, which has the opposite
/// orientation.
fn structural_sets(ctx: &Ctx) -> Vec<(String, StructuralSet)> {
    let configured = ctx.setup.psi;
    let std = StructuralSet::standard();
    let other = if configured == std {
        let e = Quaternion::basis;
        ("psi={1,j,i,k}".to_string(), StructuralSet::new([e(0), e(2), e(1), e(3)]).expect("permuted basis"))
    } else {
        ("psi=std".to_string(), std)
    };
    vec![("psi=configured".to_string(), configured), other]
}

fn relative(r: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        r / scale
    } else {
        r
    }
}

pub fn stokes(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let (f, ttf) = (ctx.field(0), ctx.field(1));
    let fd = ctx.res.fd();
    for (label, psi) in structural_sets(ctx) {
        let signs = calibrate_orientation(&psi, &domain, CALIBRATION_NODES)?;
        let r = match verify_orientation(&psi, &domain, &signs, CALIBRATION_NODES) {
            Ok(r) | Err(Error::CalibrationFailure { residual: r }) => r,
            Err(e) => return Err(e),
        };
        ctx.record(label.clone(), "calibration", r);
        let faces = enumerate_faces(&domain, &psi)?;
        let s = stokes_residual(&f, &ttf, &domain, &faces, &psi, ctx.res.n_face, ctx.res.n_volume, &fd)?;
        ctx.record(label, "polynomial", relative(s.residual, s.boundary.norm().max(s.volume.norm())));
    }
    Ok(())
}

pub fn borel_pompeiu(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let faces = enumerate_faces(&domain, &psi)?;
    let (f, ttf) = (ctx.field(0), ctx.field(1));
    let quad = ctx.res.bp_quad();
    let fd = ctx.res.fd();
    let mut rng = ctx.rng();
    let mut scale = 0.0_f64;
    for i in 0..5 {
        let x = ctx.at(std::array::from_fn(|_| rng.gen_range(0.2..0.8)));
        let e = borel_pompeiu_eval(&f, &ttf, &domain, &faces, &psi, &x, &quad, &fd)?;
        scale = scale.max(e.expected.norm());
        ctx.record(format!("interior[{i}]"), "interior", e.relative(None));
    }
    for (i, rel) in BP_EXTERIOR.into_iter().enumerate() {
        let x = ctx.at(rel);
        let e = borel_pompeiu_eval(&f, &ttf, &domain, &faces, &psi, &x, &quad, &fd)?;
        ctx.record(format!("exterior[{i}]"), "exterior", relative(e.lhs.norm(), scale));
    }
    Ok(())
}

pub fn teodorescu(ctx: &mut Ctx) -> Result<()> {
    let domain = ctx.setup.domain;
    let psi = ctx.setup.psi;
    let f = ctx.field(0);
    let quad = ctx.res.bp_quad();
    let fd = ctx.res.fd();
    let mut rng = ctx.rng();
    for i in 0..5 {
        let x = ctx.at(std::array::from_fn(|_| rng.gen_range(0.3..0.7)));
        // surfaces configuration errors before the stencil swallows them
        transform(&f, &domain, &psi, &x, &quad)?;
        let t = |y: &[f64; 4]| transform(&f, &domain, &psi, y, &quad).unwrap_or(Quaternion([f64::NAN; 4]));
        let dt = fueter_fd(t, &x, &psi, OperatorSide::Left, &fd);
        let want = f.eval(&x);
        ctx.record(format!("x[{i}]"), "inversion", relative((dt - want).norm(), want.norm()));
    }
    Ok(())
}
