//! Curvature of the Weil-Petersson geometry from Green-operator integrals.
//!
//! With `p_ab = theta_a conj(theta_b)`, `q_ab = M p_ab` and `G` the kernel,
//! the cotangent (Hodge) tensor is
//! `R_{i jbar alpha betabar} = q_{beta j}^T G q_{i alpha} + q_{beta alpha}^T G q_{i j}`
//! and the tangent tensor is
//! `R_{i jbar k lbar} = -(q_{k l}^T G q_{i j} + q_{k j}^T G q_{i l})`.

use super::basis::{DifferentialBasis, DIM};
use super::green::GreenOperator;
use crate::error::{CurvError, Result};
use crate::exec::map_range;
use crate::linalg::inverse_sqrt_hermitian;
use crate::tensor::CurvatureTensor;
use crate::C64;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// `q_ab` and `G q_ab` for all index pairs.
pub struct PairIntegrals {
    q: Vec<Vec<C64>>,
    gq: Vec<Vec<C64>>,
}

impl PairIntegrals {
    pub fn new(basis: &DifferentialBasis, green: &GreenOperator) -> Result<Self> {
        if basis.len() != green.len() {
            return Err(CurvError::InvalidArgument("basis and Green operator live on different meshes".into()));
        }
        let q: Vec<Vec<C64>> = (0..DIM * DIM)
            .map(|k| basis.pair(k / DIM, k % DIM).iter().zip(&basis.mass).map(|(p, m)| p * m).collect())
            .collect();
        let gq = map_range(2 * DIM * DIM, |k| {
            let part = |z: &C64| if k % 2 == 0 { z.re } else { z.im };
            green.solve(&q[k / 2].iter().map(part).collect::<Vec<_>>())
        });
        let gq = (0..DIM * DIM)
            .map(|k| gq[2 * k].iter().zip(&gq[2 * k + 1]).map(|(&a, &b)| C64::new(a, b)).collect())
            .collect();
        Ok(Self { q, gq })
    }

    /// `q_{ab}^T G q_{cd}`.
    pub fn term(&self, a: usize, b: usize, c: usize, d: usize) -> C64 {
        self.q[a * DIM + b].iter().zip(&self.gq[c * DIM + d]).map(|(x, y)| x * y).sum()
    }
}

fn assemble(f: impl Fn(usize, usize, usize, usize) -> C64 + Sync + Send) -> Vec<C64> {
    map_range(DIM * DIM * DIM * DIM, |k| {
        let (i, j, a, b) = (k / 27, (k / 9) % 3, (k / 3) % 3, k % 3);
        f(i, j, a, b)
    })
}

fn relative_hermitian_residual(t: &CurvatureTensor) -> f64 {
    t.hermitian_residual().0 / t.max_norm()
}

/// Cotangent tensor in the coframe dual to the given basis. Components are
/// not symmetrized; the Hermitian residual is checked at 1e-9.
pub fn wolpert_curvature(pairs: &PairIntegrals) -> Result<CurvatureTensor> {
    let data = assemble(|i, j, a, b| pairs.term(b, j, i, a) + pairs.term(b, a, i, j));
    CurvatureTensor::from_data(DIM, DIM, false, data)
}

/// The complex conjugate placement `theta_i conj(theta_alpha) -> conj(theta_i) theta_alpha`.
pub fn alternative_placement(pairs: &PairIntegrals) -> CurvatureTensor {
    let data = assemble(|i, j, a, b| pairs.term(j, b, a, i) + pairs.term(a, b, j, i));
    CurvatureTensor::from_fn(DIM, DIM, false, |i, j, a, b| data[((i * DIM + j) * DIM + a) * DIM + b])
}

/// Tangent tensor in the given basis of Beltrami differentials.
pub fn tangent_curvature(pairs: &PairIntegrals) -> Result<CurvatureTensor> {
    let data = assemble(|i, j, k, l| -(pairs.term(k, l, i, j) + pairs.term(k, j, i, l)));
    CurvatureTensor::from_data(DIM, DIM, true, data)
}

/// Change of basis `sigma' = sigma C` making the Weil-Petersson Gram
/// matrix the identity: `C = G^{-1/2}`.
pub fn orthonormalizing_frame(basis: &DifferentialBasis) -> Result<DMatrix<C64>> {
    inverse_sqrt_hermitian(&basis.wp_gram).ok_or(CurvError::NotPositiveDefinite(f64::NAN))
}

/// Cotangent tensor re-expressed for the basis `sigma C`, whose Beltrami
/// differentials are `theta conj(C)`.
pub fn cotangent_in_frame(cotangent: &CurvatureTensor, c: &DMatrix<C64>) -> Result<CurvatureTensor> {
    let d = c.map(|z| z.conj());
    cotangent.change_frame(&d, c)
}

/// Relative sup-norm distance.
pub fn relative_difference(a: &CurvatureTensor, b: &CurvatureTensor) -> f64 {
    let d = a.data().iter().zip(b.data()).fold(0.0, |m: f64, (x, y)| m.max((x - y).norm()));
    d / a.max_norm().max(b.max_norm())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorChecks {
    /// Relative Hermitian residual of the cotangent tensor.
    pub hermitian_residual: f64,
    pub tangent_hermitian_residual: f64,
    /// Relative size of `R_{i jbar alpha betabar} - R_{alpha jbar i betabar}`.
    pub exchange_residual: f64,
    /// Relative difference between the alternative placement and the tensor.
    pub alternative_placement_difference: f64,
    pub alternative_placement_hermitian_residual: f64,
    /// Tangent tensor vs the dual of the cotangent tensor, both in the
    /// orthonormal frame.
    pub duality_residual: f64,
}

pub struct WpCurvature {
    pub cotangent: CurvatureTensor,
    pub cotangent_orthonormal: CurvatureTensor,
    pub tangent_orthonormal: CurvatureTensor,
    pub checks: TensorChecks,
}

/// Assemble both tensors: the cotangent one from `basis`, the tangent one
/// independently from the orthonormalized basis `ortho`.
pub fn wp_curvature(
    basis: &DifferentialBasis,
    ortho: &DifferentialBasis,
    frame: &DMatrix<C64>,
    green: &GreenOperator,
) -> Result<WpCurvature> {
    let pairs = PairIntegrals::new(basis, green)?;
    let cotangent = wolpert_curvature(&pairs)?;
    let alt = alternative_placement(&pairs);
    let tangent = tangent_curvature(&PairIntegrals::new(ortho, green)?)?;
    let cotangent_orthonormal = cotangent_in_frame(&cotangent, frame)?;
    let exchange = CurvatureTensor::from_fn(DIM, DIM, false, |i, j, a, b| cotangent.get(a, j, i, b));
    let checks = TensorChecks {
        hermitian_residual: relative_hermitian_residual(&cotangent),
        tangent_hermitian_residual: relative_hermitian_residual(&tangent),
        exchange_residual: relative_difference(&cotangent, &exchange),
        alternative_placement_difference: relative_difference(&cotangent, &alt),
        alternative_placement_hermitian_residual: relative_hermitian_residual(&alt),
        duality_residual: relative_difference(&tangent, &cotangent_orthonormal.dual()),
    };
    Ok(WpCurvature { cotangent, cotangent_orthonormal, tangent_orthonormal: tangent, checks })
}

/// Both sides of the symmetrization identity for the dual-Nakano form:
/// `sum R u^{i beta} conj(u^{j alpha})` from the tensor, and
/// `1/2 sum_{z,w} M_z G_zw M_w |H(w,z) + H(z,w)|^2` with
/// `H(w,z) = sum theta_i(w) theta_beta(z) u^{i beta}` from the dense kernel.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relative_residual: f64,
}

pub fn symmetrized_identity_check(
    cotangent: &CurvatureTensor,
    basis: &DifferentialBasis,
    kernel: &DMatrix<f64>,
    u: &DMatrix<C64>,
) -> IdentityCheck {
    let mut lhs = C64::new(0.0, 0.0);
    for i in 0..DIM {
        for j in 0..DIM {
            for a in 0..DIM {
                for b in 0..DIM {
                    lhs += cotangent.get(i, j, a, b) * u[(i, b)] * u[(j, a)].conj();
                }
            }
        }
    }
    let n = basis.len();
    let th = &basis.theta;
    let m = &basis.mass;
    // H(w,z) + H(z,w) = sum_i th_i(w) a_i(z) + th_i(z) a_i(w), a_i = sum_b u_ib th_b.
    let a: Vec<[C64; DIM]> =
        th.iter().map(|t| [0, 1, 2].map(|i| (0..DIM).map(|b| u[(i, b)] * t[b]).sum())).collect();
    let rows = map_range(n, |z| {
        let col = kernel.column(z);
        let mut acc = 0.0;
        for w in 0..n {
            let mut h = C64::new(0.0, 0.0);
            for i in 0..DIM {
                h += th[w][i] * a[z][i] + th[z][i] * a[w][i];
            }
            acc += col[w] * m[w] * h.norm_sqr();
        }
        acc * m[z]
    });
    let rhs = 0.5 * rows.iter().sum::<f64>();
    let scale = lhs.norm().max(rhs.abs());
    let relative_residual = if scale == 0.0 { 0.0 } else { (lhs - rhs).norm() / scale };
    IdentityCheck { lhs: lhs.re, rhs, relative_residual }
}
