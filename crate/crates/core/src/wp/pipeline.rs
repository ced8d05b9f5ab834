//! End-to-end run at one refinement level.

use super::basis::DifferentialBasis;
use super::curve::HyperellipticCurve;
use super::fem::Discretization;
use super::green::{kernel_symmetry_and_min, GreenOperator};
use super::liouville::{gauss_curvature_samples, solve_liouville, GaussSample, NewtonOptions};
use super::mesh::{CoverMesh, MeshStats};
use super::wolpert::{orthonormalizing_frame, symmetrized_identity_check, wp_curvature, IdentityCheck, TensorChecks};
use crate::error::{CurvError, Result};
use crate::exec::substream;
use crate::positivity::{implication_audit, Budget, ClassificationReport, Notion, Sign};
use crate::tensor::CurvatureTensor;
use crate::C64;
use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

pub const MAX_LEVEL: usize = 6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WpConfig {
    pub level: usize,
    /// Semidefinite verdicts use `mesh_tol_factor * max-norm`.
    pub mesh_tol_factor: f64,
    pub newton_tol: f64,
    /// Build the dense kernel and run the kernel-based checks.
    pub dense_checks: bool,
    /// Random `u` matrices for the symmetrization identity.
    pub identity_samples: usize,
    pub gauss_samples: usize,
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for WpConfig {
    fn default() -> Self {
        Self {
            level: 3,
            mesh_tol_factor: 1e-3,
            newton_tol: 1e-11,
            dense_checks: true,
            identity_samples: 20,
            gauss_samples: 40,
            samples: 10_000,
            restarts: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LiouvilleSummary {
    pub iterations: usize,
    pub residual: f64,
    pub residual_history: Vec<f64>,
    pub lumped_area: f64,
    pub heron_area: f64,
    /// `|heron_area / 4 pi - 1|`.
    pub area_error: f64,
    pub gauss_samples: Vec<GaussSample>,
    /// Largest `|K + 1|` over the samples.
    pub gauss_max_deviation: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreenSummary {
    /// Relative `|(Delta_0 + 1) G f - f|` for constant and random `f`.
    pub identity_residual: f64,
    pub constant_residual: f64,
    pub kernel_asymmetry: Option<f64>,
    pub kernel_min: Option<f64>,
    pub kernel_identity_residual: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisSummary {
    pub wp_gram: Vec<Vec<C64>>,
    pub hodge_gram: Vec<Vec<C64>>,
    pub gram_identity_residual: f64,
    pub harmonicity: [f64; 3],
}

/// Sign verdicts used to compare runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignSummary {
    pub cotangent_nakano: Sign,
    pub cotangent_dual_nakano: Sign,
    pub tangent_nakano: Sign,
    pub tangent_dual_nakano: Sign,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WpManifest {
    pub curve: Vec<C64>,
    pub roots: Vec<C64>,
    pub config: WpConfig,
    pub mesh: MeshStats,
    pub liouville: LiouvilleSummary,
    pub basis: BasisSummary,
    pub green: GreenSummary,
    pub tensor_checks: TensorChecks,
    pub mesh_tol: f64,
    pub cotangent_nakano_min: f64,
    pub cotangent_dual_nakano_min: f64,
    pub tangent_bisectional_max: f64,
    pub identity_checks: Vec<IdentityCheck>,
    pub signs: SignSummary,
    pub matches_expected_signs: bool,
    pub cotangent_report: ClassificationReport,
    pub tangent_report: ClassificationReport,
}

pub struct WpRun {
    pub manifest: WpManifest,
    pub cotangent: CurvatureTensor,
    pub cotangent_orthonormal: CurvatureTensor,
    pub tangent_orthonormal: CurvatureTensor,
}

fn matrix_rows(m: &DMatrix<C64>) -> Vec<Vec<C64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn verdict_sign(r: &ClassificationReport, n: Notion) -> Sign {
    r.verdict(n).map_or(Sign::Undetermined, |v| v.sign)
}

fn lower(r: &ClassificationReport, n: Notion) -> f64 {
    r.verdict(n).and_then(|v| v.lower.as_ref()).map_or(f64::NAN, |e| e.value)
}

pub fn run_pipeline(curve: &HyperellipticCurve, cfg: &WpConfig) -> Result<WpRun> {
    if cfg.level > MAX_LEVEL {
        return Err(CurvError::InvalidArgument(format!("refinement level {} exceeds {MAX_LEVEL}", cfg.level)));
    }
    if !(cfg.mesh_tol_factor > 0.0) || cfg.samples == 0 || cfg.restarts == 0 {
        return Err(CurvError::InvalidArgument("tolerance and budgets must be positive".into()));
    }
    let mesh = CoverMesh::build(curve, cfg.level)?;
    let disc = Discretization::new(&mesh);
    let hyp = solve_liouville(&mesh, &disc, NewtonOptions { tol: cfg.newton_tol, max_iter: 50 })?;
    let gauss = gauss_curvature_samples(&mesh, &hyp, cfg.gauss_samples);
    let basis = DifferentialBasis::new(&mesh, &hyp)?;
    let frame = orthonormalizing_frame(&basis)?;
    let ortho = DifferentialBasis::with_frame(&mesh, &hyp, &frame)?;
    let green = GreenOperator::new(&disc, &hyp)?;

    let mut rng = substream(cfg.seed, 0x9e3779b9);
    let f: Vec<f64> = (0..green.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let mut green_summary = GreenSummary {
        identity_residual: green.identity_residual(&f),
        constant_residual: green.apply(&vec![1.0; green.len()]).iter().fold(0.0, |m: f64, v| m.max((v - 1.0).abs())),
        kernel_asymmetry: None,
        kernel_min: None,
        kernel_identity_residual: None,
    };
    let curv = wp_curvature(&basis, &ortho, &frame, &green)?;
    let mut identity_checks = Vec::new();
    if cfg.dense_checks {
        let kernel = green.kernel();
        let (asym, min) = kernel_symmetry_and_min(&kernel);
        green_summary.kernel_asymmetry = Some(asym);
        green_summary.kernel_min = Some(min);
        green_summary.kernel_identity_residual = Some(green.kernel_identity_residual(&kernel));
        for k in 0..cfg.identity_samples {
            let mut rng = substream(cfg.seed, 1 + k as u64);
            let u = DMatrix::from_fn(3, 3, |_, _| {
                C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
            });
            identity_checks.push(symmetrized_identity_check(&curv.cotangent, &basis, &kernel, &u));
        }
    }

    let mesh_tol = cfg.mesh_tol_factor * curv.cotangent_orthonormal.max_norm();
    let budget = |t: &CurvatureTensor, seed: u64| Budget {
        tol: cfg.mesh_tol_factor * t.max_norm(),
        samples: cfg.samples,
        restarts: cfg.restarts,
        seed,
        ..Budget::default()
    };
    let cot = &curv.cotangent_orthonormal;
    let tan = &curv.tangent_orthonormal;
    let cotangent_report = implication_audit(cot, &budget(cot, cfg.seed))?;
    let tangent_report = implication_audit(tan, &budget(tan, cfg.seed.wrapping_add(1)))?;
    let signs = SignSummary {
        cotangent_nakano: verdict_sign(&cotangent_report, Notion::Nakano),
        cotangent_dual_nakano: verdict_sign(&cotangent_report, Notion::DualNakano),
        tangent_nakano: verdict_sign(&tangent_report, Notion::Nakano),
        tangent_dual_nakano: verdict_sign(&tangent_report, Notion::DualNakano),
    };
    let tangent_bisectional_max = tangent_report
        .verdict(Notion::HolomorphicBisectional)
        .and_then(|v| v.upper.as_ref())
        .map_or(f64::NAN, |e| e.value);
    let semi_pos = |s: Sign| matches!(s, Sign::Positive | Sign::Nonnegative);
    let semi_neg = |s: Sign| matches!(s, Sign::Negative | Sign::Nonpositive);
    let matches_expected_signs = signs.cotangent_nakano == Sign::Positive
        && semi_pos(signs.cotangent_dual_nakano)
        && signs.tangent_dual_nakano == Sign::Negative
        && semi_neg(signs.tangent_nakano);

    let area = 4.0 * std::f64::consts::PI;
    let manifest = WpManifest {
        curve: curve.coeffs.to_vec(),
        roots: curve.roots.to_vec(),
        config: cfg.clone(),
        mesh: mesh.stats(),
        liouville: LiouvilleSummary {
            iterations: hyp.iterations,
            residual: hyp.residual,
            residual_history: hyp.residual_history.clone(),
            lumped_area: hyp.lumped_area,
            heron_area: hyp.heron_area,
            area_error: (hyp.heron_area / area - 1.0).abs(),
            gauss_max_deviation: gauss.iter().fold(0.0, |m: f64, s| m.max((s.curvature + 1.0).abs())),
            gauss_samples: gauss,
        },
        basis: BasisSummary {
            wp_gram: matrix_rows(&basis.wp_gram),
            hodge_gram: matrix_rows(&basis.hodge_gram),
            gram_identity_residual: basis.gram_identity_residual,
            harmonicity: basis.harmonicity,
        },
        green: green_summary,
        tensor_checks: curv.checks.clone(),
        mesh_tol,
        cotangent_nakano_min: lower(&cotangent_report, Notion::Nakano),
        cotangent_dual_nakano_min: lower(&cotangent_report, Notion::DualNakano),
        tangent_bisectional_max,
        identity_checks,
        signs,
        matches_expected_signs,
        cotangent_report,
        tangent_report,
    };
    Ok(WpRun {
        manifest,
        cotangent: curv.cotangent,
        cotangent_orthonormal: curv.cotangent_orthonormal,
        tangent_orthonormal: curv.tangent_orthonormal,
    })
}
