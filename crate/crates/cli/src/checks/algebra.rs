use super::Ctx;
use fracfueter_core::{Quaternion, Result};
use rand::Rng;

const TRIPLES: usize = 1000;

pub fn quaternion_laws(ctx: &mut Ctx) -> Result<()> {
    let mut rng = ctx.rng();
    let psi = ctx.setup.psi;
    let mut worst = [0.0_f64; 4];
    for _ in 0..TRIPLES {
        let mut draw = || Quaternion(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)));
        let (p, q, r) = (draw(), draw(), draw());
        let pq = p.norm() * q.norm();
        let assoc = ((p * q) * r - p * (q * r)).norm() / (pq * r.norm());
        let conj = ((p * q).conj() - q.conj() * p.conj()).norm() / pq;
        let norm = ((p * q).norm() - pq).abs() / pq;
        let structural = (psi.assemble(&psi.coords(&p)) - p).norm() / p.norm();
        for (w, v) in worst.iter_mut().zip([assoc, conj, norm, structural]) {
            *w = w.max(v);
        }
    }
    let case = format!("{TRIPLES} seeded triples");
    for (metric, v) in ["associativity", "conjugation", "norm", "structural"].into_iter().zip(worst) {
        ctx.record(case.clone(), metric, v);
    }
    Ok(())
}
