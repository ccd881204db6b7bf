//! JSON run configuration. Every field has a default, and unknown keys are
//! rejected so that a typo cannot silently fall back to one.

use crate::checks::CheckName;
use fracfueter_core::fueter::FdOrder;
use fracfueter_core::{BasePoint, Box4, FracOrderVec, Quaternion, StructuralSet, WeightKind, WeightVector};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid config: {0}")]
    Invalid(String),

    #[error("unknown sweep parameter {0:?} (expected one of N_volume, N_face, node_count_1d, fd_h, epsilon)")]
    UnknownParameter(String),

    #[error("invalid sweep value {value:?} for {param}")]
    BadValue { param: String, value: String },
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxConfig {
    pub a: [f64; 4],
    pub b: [f64; 4],
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig { a: [1.0; 4], b: [2.0; 4] }
    }
}

/// `"std"` or four quaternions given as rows of components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StructuralSetConfig {
    Named(String),
    Rows([[f64; 4]; 4]),
}

impl Default for StructuralSetConfig {
    fn default() -> Self {
        StructuralSetConfig::Named("std".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WeightSpec {
    Identity,
    Log,
    Affine { slope: f64, intercept: f64 },
    Power { exponent: f64 },
}

impl WeightSpec {
    fn kind(&self) -> WeightKind {
        match *self {
            WeightSpec::Identity => WeightKind::Identity,
            WeightSpec::Log => WeightKind::Log,
            WeightSpec::Affine { slope, intercept } => WeightKind::Affine { slope, intercept },
            WeightSpec::Power { exponent } => WeightKind::Power { exponent },
        }
    }
}

/// One weight for every axis, or one per axis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum WeightsConfig {
    Uniform(WeightSpec),
    PerAxis([WeightSpec; 4]),
}

impl Default for WeightsConfig {
    fn default() -> Self {
        WeightsConfig::Uniform(WeightSpec::Identity)
    }
}

impl WeightsConfig {
    fn kinds(&self) -> [WeightKind; 4] {
        match self {
            WeightsConfig::Uniform(w) => std::array::from_fn(|_| w.kind()),
            WeightsConfig::PerAxis(ws) => std::array::from_fn(|k| ws[k].kind()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OrdersConfig {
    Uniform(f64),
    PerAxis([f64; 4]),
}

impl OrdersConfig {
    pub fn values(&self) -> [f64; 4] {
        match *self {
            OrdersConfig::Uniform(a) => [a; 4],
            OrdersConfig::PerAxis(a) => a,
        }
    }
}

fn default_alpha() -> OrdersConfig {
    OrdersConfig::PerAxis([0.3, 0.45, 0.6, 0.75])
}

fn default_beta() -> OrdersConfig {
    OrdersConfig::PerAxis([0.5, 0.35, 0.7, 0.4])
}

/// `"center"` or an explicit interior point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasePointConfig {
    Named(String),
    Point([f64; 4]),
}

impl Default for BasePointConfig {
    fn default() -> Self {
        BasePointConfig::Named("center".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase", deny_unknown_fields)]
pub enum TestFunctionConfig {
    /// Seeded polynomial with quaternion coefficients.
    Polynomial { degree: u32, seed: u64 },
    Constant { value: [f64; 4] },
    Zero,
}

impl Default for TestFunctionConfig {
    fn default() -> Self {
        TestFunctionConfig::Polynomial { degree: 2, seed: 7 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VolumeModeName {
    Exclusion,
    Subtraction,
}

/// Discretisation settings. Unset fields fall back to the per-check
/// defaults listed by `list-checks`, then to the global defaults.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_volume: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_face: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_count_1d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_count_outer: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fd_order: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_mode: Option<VolumeModeName>,
}

impl Resolution {
    /// Fields set in `self` win over those in `below`.
    pub fn over(&self, below: &Resolution) -> Resolution {
        Resolution {
            n_volume: self.n_volume.or(below.n_volume),
            n_face: self.n_face.or(below.n_face),
            node_count_1d: self.node_count_1d.or(below.node_count_1d),
            node_count_outer: self.node_count_outer.or(below.node_count_outer),
            fd_h: self.fd_h.or(below.fd_h),
            fd_order: self.fd_order.or(below.fd_order),
            epsilon: self.epsilon.or(below.epsilon),
            volume_mode: self.volume_mode.or(below.volume_mode),
        }
    }

    pub fn resolve(&self) -> Resolved {
        Resolved {
            n_volume: self.n_volume.unwrap_or(12),
            n_face: self.n_face.unwrap_or(12),
            node_count_1d: self.node_count_1d.unwrap_or(512),
            node_count_outer: self.node_count_outer.unwrap_or(48),
            fd_h: self.fd_h.unwrap_or(1e-3),
            fd_order: self.fd_order.unwrap_or(4),
            epsilon: self.epsilon.unwrap_or(0.1),
            volume_mode: self.volume_mode.unwrap_or(VolumeModeName::Exclusion),
        }
    }

    fn validate(&self, at: &str) -> Result<(), ConfigError> {
        let positive = |name: &str, v: Option<usize>, min: usize| match v {
            Some(n) if n < min => Err(invalid(format!("{at}.{name} must be at least {min}"))),
            _ => Ok(()),
        };
        positive("n_volume", self.n_volume, 2)?;
        positive("n_face", self.n_face, 2)?;
        positive("node_count_1d", self.node_count_1d, 8)?;
        positive("node_count_outer", self.node_count_outer, 8)?;
        if let Some(h) = self.fd_h {
            if !(h > 0.0 && h < 0.1) {
                return Err(invalid(format!("{at}.fd_h must lie in (0, 0.1)")));
            }
        }
        if let Some(o) = self.fd_order {
            if o != 2 && o != 4 {
                return Err(invalid(format!("{at}.fd_order must be 2 or 4")));
            }
        }
        if let Some(e) = self.epsilon {
            if !(e > 0.0 && e.is_finite()) {
                return Err(invalid(format!("{at}.epsilon must be positive")));
            }
        }
        Ok(())
    }
}

/// Fully resolved settings for one check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Resolved {
    pub n_volume: usize,
    pub n_face: usize,
    pub node_count_1d: usize,
    pub node_count_outer: usize,
    pub fd_h: f64,
    pub fd_order: u8,
    pub epsilon: f64,
    pub volume_mode: VolumeModeName,
}

impl Resolved {
    pub fn fd(&self) -> fracfueter_core::FDScheme {
        let order = if self.fd_order == 2 { FdOrder::Second } else { FdOrder::Fourth };
        fracfueter_core::FDScheme { h: self.fd_h, order }
    }

    pub fn bp_quad(&self) -> fracfueter_core::BpQuad {
        match self.volume_mode {
            VolumeModeName::Exclusion => fracfueter_core::BpQuad::exclusion(self.n_volume, self.n_face, self.epsilon),
            VolumeModeName::Subtraction => fracfueter_core::BpQuad::subtraction(self.n_volume, self.n_face),
        }
    }
}

/// Tolerance for every metric of a check, or per metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ToleranceConfig {
    All(f64),
    PerMetric(BTreeMap<String, f64>),
}

fn default_checks() -> Vec<CheckName> {
    CheckName::ALL.to_vec()
}

fn default_reach() -> f64 {
    fracfueter_core::frac_fueter::DEFAULT_REACH
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "box", default)]
    pub domain: BoxConfig,
    #[serde(default)]
    pub structural_set: StructuralSetConfig,
    #[serde(default)]
    pub weights_g: WeightsConfig,
    #[serde(default)]
    pub weights_h: WeightsConfig,
    #[serde(default = "default_alpha")]
    pub alpha: OrdersConfig,
    #[serde(default = "default_beta")]
    pub beta: OrdersConfig,
    #[serde(default)]
    pub base_point: BasePointConfig,
    #[serde(default)]
    pub test_function: TestFunctionConfig,
    #[serde(default = "default_checks")]
    pub checks: Vec<CheckName>,
    #[serde(default)]
    pub resolution: Resolution,
    #[serde(default)]
    pub overrides: BTreeMap<CheckName, Resolution>,
    #[serde(default)]
    pub tolerances: BTreeMap<CheckName, ToleranceConfig>,
    /// Seed for sample points and seeded test data.
    #[serde(default)]
    pub seed: u64,
    /// Weight domains run from `a_k` to `a_k + weight_reach·(b_k - a_k)`.
    #[serde(default = "default_reach")]
    pub weight_reach: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("empty config is valid")
    }
}

/// Objects built from a validated config.
#[derive(Clone, Debug)]
pub struct Setup {
    pub domain: Box4,
    pub psi: StructuralSet,
    pub weights_g: WeightVector,
    pub weights_h: WeightVector,
    pub alpha: FracOrderVec,
    pub beta: FracOrderVec,
    pub base: BasePoint,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.setup().map(|_| ())
    }

    /// Validates the config and builds the shared objects.
    pub fn setup(&self) -> Result<Setup, ConfigError> {
        let domain = Box4::new(self.domain.a, self.domain.b).map_err(|e| invalid(format!("box: {e}")))?;
        let psi = match &self.structural_set {
            StructuralSetConfig::Named(n) if n == "std" => StructuralSet::standard(),
            StructuralSetConfig::Named(n) => return Err(invalid(format!("structural_set: unknown name {n:?}"))),
            StructuralSetConfig::Rows(rows) => StructuralSet::new(rows.map(Quaternion))
                .map_err(|e| invalid(format!("structural_set: {e}")))?,
        };
        if !(self.weight_reach >= 1.0 && self.weight_reach.is_finite()) {
            return Err(invalid("weight_reach must be at least 1"));
        }
        let weights_g = WeightVector::from_kinds(self.weights_g.kinds(), &domain, self.weight_reach)
            .map_err(|e| invalid(format!("weights_g: {e}")))?;
        let weights_h = WeightVector::from_kinds(self.weights_h.kinds(), &domain, self.weight_reach)
            .map_err(|e| invalid(format!("weights_h: {e}")))?;
        let alpha = FracOrderVec::new(self.alpha.values()).map_err(|e| invalid(format!("alpha: {e}")))?;
        let beta = FracOrderVec::new(self.beta.values()).map_err(|e| invalid(format!("beta: {e}")))?;
        let base = match &self.base_point {
            BasePointConfig::Named(n) if n == "center" => BasePoint::center(&domain),
            BasePointConfig::Named(n) => return Err(invalid(format!("base_point: unknown name {n:?}"))),
            BasePointConfig::Point(p) => BasePoint::new(*p, &domain).map_err(|e| invalid(format!("base_point: {e}")))?,
        };
        if let TestFunctionConfig::Polynomial { degree, .. } = self.test_function {
            if degree > 6 {
                return Err(invalid("test_function.degree must be at most 6"));
            }
        }
        if self.checks.is_empty() {
            return Err(invalid("checks must not be empty"));
        }
        self.resolution.validate("resolution")?;
        for (check, r) in &self.overrides {
            r.validate(&format!("overrides.{}", check.as_str()))?;
        }
        for (check, tol) in &self.tolerances {
            let metrics = check.metrics();
            let values: Vec<(&str, f64)> = match tol {
                ToleranceConfig::All(t) => vec![("*", *t)],
                ToleranceConfig::PerMetric(m) => m.iter().map(|(k, v)| (k.as_str(), *v)).collect(),
            };
            for (name, t) in values {
                if name != "*" && !metrics.contains(&name) {
                    return Err(invalid(format!(
                        "tolerances.{}: unknown metric {name:?} (expected one of {})",
                        check.as_str(),
                        metrics.join(", ")
                    )));
                }
                if !(t > 0.0 && t.is_finite()) {
                    return Err(invalid(format!("tolerances.{}.{name} must be positive", check.as_str())));
                }
            }
        }
        Ok(Setup {
            domain,
            psi,
            weights_g,
            weights_h,
            alpha,
            beta,
            base,
        })
    }

    /// Resolution for one check: per-check override, then the global
    /// section, then the check's built-in defaults.
    pub fn resolution_for(&self, check: CheckName) -> Resolved {
        let user = self.overrides.get(&check).cloned().unwrap_or_default();
        user.over(&self.resolution).over(&check.default_resolution()).resolve()
    }

    pub fn tolerance_for(&self, check: CheckName, metric: &str) -> f64 {
        match self.tolerances.get(&check) {
            Some(ToleranceConfig::All(t)) => *t,
            Some(ToleranceConfig::PerMetric(m)) if m.contains_key(metric) => m[metric],
            _ => check.default_tolerance(metric),
        }
    }

    /// Applies one `sweep` value to the global resolution section.
    pub fn set_param(&mut self, param: &str, value: &str) -> Result<(), ConfigError> {
        let bad = || ConfigError::BadValue {
            param: param.to_string(),
            value: value.to_string(),
        };
        let as_count = || value.trim().parse::<usize>().map_err(|_| bad());
        let as_real = || value.trim().parse::<f64>().map_err(|_| bad());
        let r = &mut self.resolution;
        match param.to_ascii_lowercase().as_str() {
            "n_volume" => r.n_volume = Some(as_count()?),
            "n_face" => r.n_face = Some(as_count()?),
            "node_count_1d" => r.node_count_1d = Some(as_count()?),
            "fd_h" => r.fd_h = Some(as_real()?),
            "epsilon" => r.epsilon = Some(as_real()?),
            _ => return Err(ConfigError::UnknownParameter(param.to_string())),
        }
        self.validate()
    }
}

/// Checks that a sweep parameter name is known before any work starts.
pub fn check_param_name(param: &str) -> Result<(), ConfigError> {
    match param.to_ascii_lowercase().as_str() {
        "n_volume" | "n_face" | "node_count_1d" | "fd_h" | "epsilon" => Ok(()),
        _ => Err(ConfigError::UnknownParameter(param.to_string())),
    }
}
