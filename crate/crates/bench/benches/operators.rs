use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use fracfueter_core::box_domain::enumerate_faces;
use fracfueter_core::frac1d::frac_integral;
use fracfueter_core::frac_fueter::{frac_bp_eval, op_d, WeightVector, DEFAULT_REACH};
use fracfueter_core::fueter::borel_pompeiu_eval;
use fracfueter_core::testfn::Poly4;
use fracfueter_core::*;

fn quaternion_product(c: &mut Criterion) {
    let p = Quaternion([0.3, -1.2, 0.7, 2.0]);
    let q = Quaternion([1.1, 0.4, -0.9, 0.2]);
    c.bench_function("quaternion_product", |b| b.iter(|| black_box(p) * black_box(q)));
}

fn fractional_integral(c: &mut Criterion) {
    let mut group = c.benchmark_group("frac_integral");
    let w = WeightFunction::log(1.0, 2.0).unwrap();
    let alpha = FracOrder::new(0.4).unwrap();
    for n in [128usize, 512, 2048] {
        let quad = SingularQuadSpec::with_nodes(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &quad, |b, quad| {
            b.iter(|| frac_integral(|y: f64| y * y - 0.5, &w, 1.0, black_box(1.7), alpha, quad).unwrap())
        });
    }
    group.finish();
}

fn fractional_fueter(c: &mut Criterion) {
    let domain = Box4::unit();
    let spec = FracSpec {
        weights: WeightVector::uniform(WeightKind::Identity, &domain, DEFAULT_REACH).unwrap(),
        orders: FracOrderVec::new([0.3, 0.45, 0.6, 0.75]).unwrap(),
        quad: SingularQuadSpec::with_nodes(512),
    };
    let f = Poly4::random(3, 2).to_field();
    let q = BasePoint::center(&domain);
    let psi = StructuralSet::standard();
    c.bench_function("op_d_512", |b| {
        b.iter(|| op_d(&f, &q, black_box(&[0.3, 0.6, 0.45, 0.7]), &spec, &psi, OperatorSide::Left).unwrap())
    });
}

fn borel_pompeiu(c: &mut Criterion) {
    let mut group = c.benchmark_group("borel_pompeiu");
    group.sample_size(10);
    let domain = Box4::unit();
    let psi = StructuralSet::standard();
    let faces = enumerate_faces(&domain, &psi).unwrap();
    let f = Poly4::random(5, 2).to_field();
    let zero = FieldFn::zero();
    let x = [0.4, 0.6, 0.5, 0.45];
    for (name, quad) in [("subtraction_12", BpQuad::subtraction(12, 12)), ("exclusion_12", BpQuad::exclusion(12, 12, 0.1))] {
        group.bench_function(name, |b| {
            b.iter(|| borel_pompeiu_eval(&f, &zero, &domain, &faces, &psi, &x, &quad, &FDScheme::default()).unwrap())
        });
    }
    let spec = FracSpec {
        weights: WeightVector::uniform(WeightKind::Identity, &domain, DEFAULT_REACH).unwrap(),
        orders: FracOrderVec::new([0.3, 0.45, 0.6, 0.75]).unwrap(),
        quad: SingularQuadSpec::with_nodes(128),
    };
    let one = FieldFn::constant(Quaternion::ONE);
    let q = BasePoint::center(&domain);
    group.bench_function("fractional_8", |b| {
        b.iter(|| {
            frac_bp_eval(&one, &zero, &q, &domain, &faces, &spec, &spec, &psi, &x, &FracBpQuad::new(8, 8, 24)).unwrap()
        })
    });
    group.finish();
}

criterion_group!(benches, quaternion_product, fractional_integral, fractional_fueter, borel_pompeiu);
criterion_main!(benches);
