//! The named checks. Each one evaluates an identity at seeded or fixed
//! sample points and records one residual row per evaluation.

mod algebra;
mod classical;
mod fractional;
mod one_dim;

use crate::config::{Resolution, Resolved, RunConfig, Setup, TestFunctionConfig, VolumeModeName};
use fracfueter_core::testfn::Poly4;
use fracfueter_core::{FieldFn, FracOrderVec, FracSpec, Point, Quaternion, SingularQuadSpec, WeightVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckName {
    QuaternionLaws,
    Frac1dSelftest,
    Stokes,
    BorelPompeiu,
    Teodorescu,
    Prop1,
    Reduction,
    FracStokes,
    FracBp,
    CauchyType,
    Hadamard,
    SecondOrder,
}

impl CheckName {
    pub const ALL: [CheckName; 12] = [
        CheckName::QuaternionLaws,
        CheckName::Frac1dSelftest,
        CheckName::Stokes,
        CheckName::BorelPompeiu,
        CheckName::Teodorescu,
        CheckName::Prop1,
        CheckName::Reduction,
        CheckName::FracStokes,
        CheckName::FracBp,
        CheckName::CauchyType,
        CheckName::Hadamard,
        CheckName::SecondOrder,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::QuaternionLaws => "quaternion-laws",
            CheckName::Frac1dSelftest => "frac1d-selftest",
            CheckName::Stokes => "stokes",
            CheckName::BorelPompeiu => "borel-pompeiu",
            CheckName::Teodorescu => "teodorescu",
            CheckName::Prop1 => "prop1",
            CheckName::Reduction => "reduction",
            CheckName::FracStokes => "frac-stokes",
            CheckName::FracBp => "frac-bp",
            CheckName::CauchyType => "cauchy-type",
            CheckName::Hadamard => "hadamard",
            CheckName::SecondOrder => "second-order",
        }
    }

    /// The identity being checked, for reports and `list-checks`.
    pub fn identity(self) -> &'static str {
        match self {
            CheckName::QuaternionLaws => {
                "Hamilton product: associativity, conjugation reversal, norm multiplicativity, structural coordinates"
            }
            CheckName::Frac1dSelftest => "1-D fractional calculus w.r.t. g: power rule and D^a I^a f = f",
            CheckName::Stokes => "classical psi-Stokes formula on the box, with face-orientation calibration",
            CheckName::BorelPompeiu => "classical two-sided psi-Borel-Pompeiu formula: f(x) inside, 0 outside",
            CheckName::Teodorescu => "psi-Fueter derivative of the Teodorescu transform: D T[f] = f",
            CheckName::Prop1 => "composition identities: D.I = C + D, P.I = slices + M, Dbar.D = Lap.I - Dbar.C",
            CheckName::Reduction => "g = id reduction: generic operators against plain Riemann-Liouville ones",
            CheckName::FracStokes => "fractional psi-Stokes formula with weights g, h",
            CheckName::FracBp => "fractional Borel-Pompeiu formula: Sum I_j inside, 0 outside in two or more axes",
            CheckName::CauchyType => "fractional Cauchy-type formula: exact zero solution, rejection of non-solutions",
            CheckName::Hadamard => "Hadamard operators (g = ln) in x d/dx form against the generic g path",
            CheckName::SecondOrder => "second-order Borel-Pompeiu variant for H = Sum_j I_j / g_j'",
        }
    }

    /// Names of the residual metrics the check records.
    pub fn metrics(self) -> &'static [&'static str] {
        match self {
            CheckName::QuaternionLaws => &["associativity", "conjugation", "norm", "structural"],
            CheckName::Frac1dSelftest => &["power_rule", "semigroup"],
            CheckName::Stokes => &["calibration", "polynomial"],
            CheckName::BorelPompeiu | CheckName::FracBp | CheckName::SecondOrder => &["interior", "exterior"],
            CheckName::Teodorescu => &["inversion"],
            CheckName::Prop1 => &["item1", "item2", "item3"],
            CheckName::Reduction => &["operators", "kernel"],
            CheckName::FracStokes => &["relative"],
            CheckName::CauchyType => &["zero_solution", "negative_control"],
            CheckName::Hadamard => &["dual_path"],
        }
    }

    pub fn default_tolerance(self, metric: &str) -> f64 {
        match (self, metric) {
            (CheckName::QuaternionLaws, _) => 1e-12,
            (CheckName::Frac1dSelftest, "power_rule") => 1e-6,
            (CheckName::Frac1dSelftest, _) => 1e-3,
            (CheckName::Stokes, "calibration") => 1e-8,
            (CheckName::Stokes, _) => 1e-4,
            (CheckName::BorelPompeiu | CheckName::Teodorescu, _) => 2e-2,
            (CheckName::Prop1, "item3") => 1e-2,
            (CheckName::Prop1, _) => 1e-3,
            (CheckName::Reduction, "kernel") => 1e-8,
            (CheckName::Reduction | CheckName::Hadamard, _) => 1e-10,
            (CheckName::CauchyType, "zero_solution") => 1e-12,
            (CheckName::CauchyType, _) => 0.5,
            (CheckName::FracStokes | CheckName::FracBp | CheckName::SecondOrder, _) => 5e-2,
        }
    }

    /// Built-in settings that sit between the user's global resolution
    /// section and the global defaults.
    pub fn default_resolution(self) -> Resolution {
        let mut r = Resolution::default();
        match self {
            CheckName::Frac1dSelftest => r.node_count_1d = Some(4096),
            CheckName::BorelPompeiu => {
                r.n_volume = Some(24);
                r.n_face = Some(24);
            }
            CheckName::Teodorescu => {
                r.n_volume = Some(16);
                r.n_face = Some(16);
                r.fd_h = Some(1e-2);
                r.fd_order = Some(2);
            }
            CheckName::FracStokes => r.node_count_1d = Some(256),
            CheckName::FracBp | CheckName::SecondOrder => {
                r.node_count_1d = Some(256);
                r.volume_mode = Some(VolumeModeName::Subtraction);
            }
            CheckName::CauchyType => {
                r.n_volume = Some(8);
                r.n_face = Some(8);
                r.node_count_outer = Some(32);
                r.node_count_1d = Some(256);
                r.volume_mode = Some(VolumeModeName::Subtraction);
            }
            _ => {}
        }
        r
    }

    fn run(self, ctx: &mut Ctx) -> fracfueter_core::Result<()> {
        match self {
            CheckName::QuaternionLaws => algebra::quaternion_laws(ctx),
            CheckName::Frac1dSelftest => one_dim::selftest(ctx),
            CheckName::Stokes => classical::stokes(ctx),
            CheckName::BorelPompeiu => classical::borel_pompeiu(ctx),
            CheckName::Teodorescu => classical::teodorescu(ctx),
            CheckName::Prop1 => fractional::prop1(ctx),
            CheckName::Reduction => fractional::reduction(ctx),
            CheckName::FracStokes => fractional::frac_stokes(ctx),
            CheckName::FracBp => fractional::frac_bp(ctx),
            CheckName::CauchyType => fractional::cauchy_type(ctx),
            CheckName::Hadamard => fractional::hadamard(ctx),
            CheckName::SecondOrder => fractional::second_order(ctx),
        }
    }
}

impl fmt::Display for CheckName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CheckName {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CheckName::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown check {s:?}"))
    }
}

/// One residual of one evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub case: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Timing of a named part of a check.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Phase {
    pub name: &'static str,
    pub wall_time_s: f64,
}

/// Everything a check produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: CheckName,
    pub identity: &'static str,
    pub resolution: Resolved,
    pub residuals: Vec<Residual>,
    pub error: Option<String>,
    pub pass: bool,
    pub phases: Vec<Phase>,
    pub wall_time_s: f64,
}

impl CheckOutcome {
    /// Largest `value / tolerance` over the rows; infinite after an error.
    pub fn score(&self) -> f64 {
        if self.error.is_some() {
            return f64::INFINITY;
        }
        self.residuals
            .iter()
            .map(|r| if r.value.is_nan() { f64::INFINITY } else { r.value / r.tolerance })
            .fold(0.0, f64::max)
    }

    pub fn phase_time(&self, name: &str) -> Option<f64> {
        self.phases.iter().find(|p| p.name == name).map(|p| p.wall_time_s)
    }

    /// Whether every row of `metric` passed (and there is at least one).
    pub fn metric_passes(&self, metric: &str) -> bool {
        let mut rows = self.residuals.iter().filter(|r| r.metric == metric).peekable();
        rows.peek().is_some() && rows.all(|r| r.pass)
    }

    pub fn worst(&self, metric: &str) -> Option<f64> {
        self.residuals
            .iter()
            .filter(|r| r.metric == metric)
            .map(|r| if r.value.is_nan() { f64::INFINITY } else { r.value })
            .reduce(f64::max)
    }
}

/// State handed to a running check.
pub struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub setup: &'a Setup,
    pub res: Resolved,
    check: CheckName,
    rows: Vec<Residual>,
    phases: Vec<Phase>,
    mark: std::time::Instant,
}

impl Ctx<'_> {
    /// Closes a timed phase that started at the previous call (or at the
    /// start of the check).
    pub fn end_phase(&mut self, name: &'static str) {
        let now = std::time::Instant::now();
        self.phases.push(Phase {
            name,
            wall_time_s: (now - self.mark).as_secs_f64(),
        });
        self.mark = now;
    }

    pub fn record(&mut self, case: impl Into<String>, metric: &str, value: f64) {
        let tolerance = self.cfg.tolerance_for(self.check, metric);
        self.rows.push(Residual {
            case: case.into(),
            metric: metric.to_string(),
            value,
            tolerance,
            // NaN fails
            pass: value <= tolerance,
        });
    }

    /// Random stream private to this check, so results do not depend on
    /// which other checks run.
    pub fn rng(&self) -> ChaCha8Rng {
        let idx = CheckName::ALL.iter().position(|c| *c == self.check).unwrap_or(0) as u64;
        ChaCha8Rng::seed_from_u64(self.cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (idx + 1))
    }

    /// The configured test function; `offset` shifts the polynomial seed so
    /// that a second, different field can be drawn.
    pub fn field(&self, offset: u64) -> FieldFn {
        match &self.cfg.test_function {
            TestFunctionConfig::Polynomial { degree, seed } => Poly4::random(seed + offset, *degree).to_field(),
            TestFunctionConfig::Constant { value } => FieldFn::constant(Quaternion(*value)),
            TestFunctionConfig::Zero => FieldFn::zero(),
        }
    }

    /// Point at relative coordinates `rel` of the box.
    pub fn at(&self, rel: [f64; 4]) -> Point {
        let d = &self.setup.domain;
        std::array::from_fn(|k| d.a()[k] + rel[k] * d.width(k))
    }

    pub fn spec(&self, weights: &WeightVector, orders: &FracOrderVec) -> FracSpec {
        FracSpec {
            weights: weights.clone(),
            orders: *orders,
            quad: SingularQuadSpec::with_nodes(self.res.node_count_1d),
        }
    }

    pub fn spec_g(&self) -> FracSpec {
        self.spec(&self.setup.weights_g, &self.setup.alpha)
    }

    pub fn spec_h(&self) -> FracSpec {
        self.spec(&self.setup.weights_h, &self.setup.beta)
    }
}

/// `|got - want| / max(1, |want|)`.
pub fn mixed_error(got: Quaternion, want: Quaternion) -> f64 {
    (got - want).norm() / want.norm().max(1.0)
}

/// Runs one check to completion. Errors end the check and are reported in
/// the outcome rather than propagated.
pub fn run_check(check: CheckName, cfg: &RunConfig, setup: &Setup) -> CheckOutcome {
    let start = std::time::Instant::now();
    let mut ctx = Ctx {
        cfg,
        setup,
        res: cfg.resolution_for(check),
        check,
        rows: Vec::new(),
        phases: Vec::new(),
        mark: start,
    };
    let result = check.run(&mut ctx);
    let error = result.err().map(|e| e.to_string());
    let pass = error.is_none() && !ctx.rows.is_empty() && ctx.rows.iter().all(|r| r.pass);
    CheckOutcome {
        name: check,
        identity: check.identity(),
        resolution: ctx.res,
        residuals: ctx.rows,
        error,
        pass,
        phases: ctx.phases,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}
