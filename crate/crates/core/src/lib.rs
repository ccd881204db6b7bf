//! Quaternionic ψ-Fueter calculus on boxes in ℝ⁴ with fractional
//! derivatives taken with respect to another function, and quadrature
//! checks of the integral identities built on them.

// Index loops mirror the per-axis formulas, and negated comparisons are
// how NaN inputs get rejected.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod box_domain;
pub mod error;
pub mod frac1d;
pub mod frac_fueter;
pub mod fueter;
pub mod quadrature;
pub mod quaternion;
pub mod special;
pub mod testfn;

pub use box_domain::{Box4, Face, Point};
pub use error::{Error, Result};
pub use frac1d::{FracOrder, SingularQuadSpec, WeightFunction, WeightKind};
pub use frac_fueter::{BasePoint, FracBpQuad, FracOrderVec, FracSpec, SliceAnchor, WeightVector};
pub use fueter::{BpEval, BpQuad, FDScheme, FieldFn, OperatorSide, Smoothness};
pub use quaternion::{ComplexQuaternion, Orientation, Quaternion, StructuralSet};
