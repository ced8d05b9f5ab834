//! Curvature positivity of Hermitian bundles and the Weil-Petersson metric
//! on the moduli space of genus-2 curves.
//!
//! * [`tensor`]: curvature tensors, model spaces, metric jets and tensor files.
//! * [`positivity`]: the positivity notions, certified and sampled classifiers
//!   and the implication audit between them.
//! * [`wp`]: discrete hyperbolic metric, Green operator and Weil-Petersson
//!   curvature for a hyperelliptic genus-2 curve.

pub mod error;
pub mod exec;
pub mod linalg;
pub mod positivity;
pub mod tensor;
pub mod wp;

pub use error::{CurvError, Result};
pub use num_complex::Complex64 as C64;
pub use tensor::CurvatureTensor;
