use super::Ctx;
use fracfueter_core::frac1d::{
    frac_derivative, frac_integral, power_rule_derivative_oracle, power_rule_oracle, semigroup_residual,
};
use fracfueter_core::{FracOrder, Result, SingularQuadSpec, WeightFunction};

const ORDERS: [f64; 3] = [0.25, 0.5, 0.75];

fn weights() -> Result<Vec<(&'static str, WeightFunction)>> {
    Ok(vec![
        ("g=id on [0,1]", WeightFunction::identity(0.0, 1.0)?),
        ("g=ln on [1,2]", WeightFunction::log(1.0, 2.0)?),
        ("g=2x+0.5 on [0,1]", WeightFunction::affine(2.0, 0.5, 0.0, 1.0)?),
    ])
}

/// Power rule at `node_count_1d`, then the semigroup identity at half that
/// count: its rule is nested, so cost grows with the square.
pub fn selftest(ctx: &mut Ctx) -> Result<()> {
    let quad = SingularQuadSpec::with_nodes(ctx.res.node_count_1d);
    for (label, w) in weights()? {
        let (a, b) = w.domain();
        let x = a + 0.7 * (b - a);
        let ga = w.value(a);
        for alpha in ORDERS {
            let order = FracOrder::new(alpha)?;
            for p in 0..4 {
                let f = |y: f64| (w.value(y) - ga).powi(p);
                let got = frac_integral(f, &w, a, x, order, &quad)?;
                let want = power_rule_oracle(p as f64, order, &w, a, x);
                ctx.record(format!("{label} I alpha={alpha} p={p}"), "power_rule", ((got - want) / want).abs());
                let got = frac_derivative(f, &w, a, x, order, &quad)?;
                let want = power_rule_derivative_oracle(p as f64, order, &w, a, x);
                ctx.record(format!("{label} D alpha={alpha} p={p}"), "power_rule", ((got - want) / want).abs());
            }
        }
    }
    ctx.end_phase("power_rule");
    let inner = SingularQuadSpec::with_nodes((ctx.res.node_count_1d / 2).max(8));
    let f = |y: f64| 1.0 - y + 0.5 * y * y - 0.3 * y * y * y;
    for (label, w) in weights()? {
        let (a, b) = w.domain();
        for i in 1..=10 {
            // every (g, alpha) pair is covered by cycling the order
            let alpha = ORDERS[i % ORDERS.len()];
            let x = a + (b - a) * i as f64 / 11.0;
            let r = semigroup_residual(f, &w, a, FracOrder::new(alpha)?, &[x], &inner)?;
            ctx.record(format!("{label} alpha={alpha} x={x:.4}"), "semigroup", r);
        }
    }
    ctx.end_phase("semigroup");
    Ok(())
}
