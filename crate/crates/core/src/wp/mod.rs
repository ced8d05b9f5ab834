//! Weil-Petersson geometry of a genus-2 hyperelliptic curve `y^2 = p(x)`:
//! a triangulated double cover, the hyperbolic metric by a discrete
//! Liouville solve, harmonic Beltrami differentials, the Green operator of
//! `Delta_0 + 1`, and the curvature tensors assembled from them.

pub mod basis;
pub mod curve;
pub mod fem;
pub mod green;
pub mod liouville;
pub mod mesh;
pub mod pipeline;
pub mod wolpert;

pub use basis::DifferentialBasis;
pub use curve::HyperellipticCurve;
pub use fem::Discretization;
pub use green::GreenOperator;
pub use liouville::{gauss_curvature_samples, solve_liouville, HyperbolicStructure, NewtonOptions};
pub use mesh::{Chart, CoverMesh, MeshStats};
pub use pipeline::{run_pipeline, SignSummary, WpConfig, WpManifest, WpRun};
