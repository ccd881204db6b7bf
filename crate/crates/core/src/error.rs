use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("structural set is not orthonormal: <psi_{k}, psi_{s}> = {value}")]
    NotOrthonormal { k: usize, s: usize, value: f64 },

    #[error("complex quaternions are expressed in different structural sets")]
    MixedBasis,

    #[error("point {x} lies outside [{a}, {b}]")]
    DomainError { x: f64, a: f64, b: f64 },

    #[error("invalid weight function: {0}")]
    InvalidWeight(String),

    #[error("fractional order {0} is outside (0, 1)")]
    InvalidOrder(f64),

    #[error("invalid quadrature specification: {0}")]
    InvalidQuadrature(String),

    #[error("non-finite value during quadrature: {0}")]
    QuadratureFailure(String),

    #[error("derivative step {step} exceeds the distance {room} to the left endpoint")]
    DerivativeStepError { step: f64, room: f64 },

    #[error("degenerate box: a_{axis} = {a} is not below b_{axis} = {b}")]
    DegenerateBox { axis: usize, a: f64, b: f64 },

    #[error("no face sign assignment reproduces the Stokes calibration (residual {residual:e})")]
    CalibrationFailure { residual: f64 },

    #[error("integrand is not finite at {point:?}")]
    NonFiniteIntegrand { point: [f64; 4] },

    #[error("point is closer than {needed} to the boundary along axis {axis}")]
    BoundaryProximity { axis: usize, needed: f64 },

    #[error("Cauchy kernel evaluated at its pole (|y - x| = {distance:e})")]
    SingularPoint { distance: f64 },

    #[error("kernel pole within {distance:e} of the axis-{axis} integration segment")]
    KernelPathSingularity { axis: usize, distance: f64 },

    #[error("hypothesis not met: fractional Fueter terms reach {magnitude:e} (tolerance {tolerance:e})")]
    HypothesisNotMet { magnitude: f64, tolerance: f64 },

    #[error("weight function for axis {0} has no second derivative")]
    MissingSecondDerivative(usize),

    #[error("invalid point: {0}")]
    InvalidPoint(String),
}
