//! Null thin shells from cut-and-paste matchings of constant-curvature spacetimes.

// index loops mirror tensor notation; `!(x > 0)` also rejects NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::excessive_precision, clippy::type_complexity)]

pub mod distribution;
pub mod error;
pub mod expr;
pub mod jet;
pub mod jump;
pub mod matching;
pub mod metric;
pub mod quadrature;
pub mod scalar;
pub mod shell;
pub mod special;
pub mod tensor;

pub use error::{Error, Result};
pub use jet::{Jet, Layout};
pub use scalar::Scalar;

pub type Jet64 = Jet<f64>;
pub type Jet32 = Jet<f32>;
pub type JetMatrix64 = tensor::JetMatrix<f64>;
pub type LeafGeometry64 = shell::LeafGeometry<f64>;
pub type ShellContent64 = shell::ShellContent<f64>;
pub type TransverseCoefficients64 = matching::TransverseCoefficients<f64>;
pub type Gluing64 = matching::Gluing<f64>;
pub type LipschitzMetric64 = metric::LipschitzMetric<f64>;
pub type LipschitzMetric32 = metric::LipschitzMetric<f32>;
pub type RosenForm64 = metric::RosenForm<f64>;
