//! The quadratic differentials `x^a (dx)^2 / y^2` (a = 0, 1, 2) and their
//! harmonic Beltrami differentials `theta = conj(f) / g`, where `f` is the
//! chart coefficient and `g = g_{z zbar}` is half the hyperbolic density.
//! Products `theta_a conj(theta_b)` are functions on the surface.

use super::liouville::HyperbolicStructure;
use super::mesh::CoverMesh;
use crate::error::{CurvError, Result};
use crate::linalg::hermitian_eigen;
use crate::C64;
use nalgebra::DMatrix;

pub const DIM: usize = 3;

#[derive(Clone, Debug)]
pub struct DifferentialBasis {
    /// Coefficients `f_a` in each vertex chart.
    pub coeff: Vec<[C64; DIM]>,
    /// `g_{z zbar}` in each vertex chart.
    pub metric: Vec<f64>,
    pub theta: Vec<[C64; DIM]>,
    /// Lumped hyperbolic area per vertex.
    pub mass: Vec<f64>,
    /// `int theta_a conj(theta_b) dV`.
    pub wp_gram: DMatrix<C64>,
    /// `int g^{-2} f_a conj(f_b) dV`.
    pub hodge_gram: DMatrix<C64>,
    /// Relative `max |G_H - conj(G_WP)|`.
    pub gram_identity_residual: f64,
    /// Discrete `|d/dz (g theta_a)|` relative to `|d/dzbar (g theta_a)|`.
    pub harmonicity: [f64; DIM],
}

impl DifferentialBasis {
    pub fn new(mesh: &CoverMesh, s: &HyperbolicStructure) -> Result<Self> {
        Self::with_frame(mesh, s, &DMatrix::identity(DIM, DIM))
    }

    /// Basis `sigma'_b = sum_a sigma_a c_{ab}`.
    pub fn with_frame(mesh: &CoverMesh, s: &HyperbolicStructure, frame: &DMatrix<C64>) -> Result<Self> {
        if s.u.len() != mesh.verts.len() {
            return Err(CurvError::InvalidArgument("structure and mesh have different vertex counts".into()));
        }
        if frame.shape() != (DIM, DIM) || frame.clone().try_inverse().is_none() {
            return Err(CurvError::InvalidArgument("frame must be an invertible 3x3 matrix".into()));
        }
        let curve = &mesh.curve;
        let mut coeff = Vec::with_capacity(mesh.verts.len());
        let mut metric = Vec::with_capacity(mesh.verts.len());
        let mut theta = Vec::with_capacity(mesh.verts.len());
        for (v, cv) in mesh.verts.iter().enumerate() {
            let raw = [0, 1, 2].map(|a| cv.chart.differential(curve, cv.z, a));
            let f = [0, 1, 2].map(|b| (0..DIM).map(|a| raw[a] * frame[(a, b)]).sum::<C64>());
            if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(CurvError::Mesh(format!("differential not finite at vertex {v}")));
            }
            let g = 0.5 * (2.0 * s.u[v]).exp() * cv.chart.density(curve, cv.z);
            coeff.push(f);
            metric.push(g);
            theta.push(f.map(|z| z.conj() / g));
        }
        let gram = |val: &dyn Fn(usize, usize, usize) -> C64| {
            DMatrix::from_fn(DIM, DIM, |a, b| (0..theta.len()).map(|v| val(v, a, b) * s.mass[v]).sum::<C64>())
        };
        let wp_gram = gram(&|v, a, b| theta[v][a] * theta[v][b].conj());
        let hodge_gram = gram(&|v, a, b| coeff[v][a] * coeff[v][b].conj() / (metric[v] * metric[v]));
        let scale = wp_gram.iter().fold(0.0, |m: f64, z| m.max(z.norm()));
        let gram_identity_residual =
            hodge_gram.iter().zip(wp_gram.iter()).fold(0.0, |m: f64, (h, w)| m.max((h - w.conj()).norm())) / scale;
        let harmonicity = [0, 1, 2].map(|a| {
            let (mut hol, mut anti) = (0.0, 0.0);
            for t in &mesh.tris {
                // g theta in the triangle chart is conj of the chart coefficient.
                let vals = [0, 1, 2].map(|c| {
                    let raw = [0, 1, 2].map(|b| t.chart.differential(curve, t.z[c], b));
                    (0..DIM).map(|b| raw[b] * frame[(b, a)]).sum::<C64>().conj()
                });
                let (dz, dzb) = p1_derivatives(t.z, vals);
                let area = 0.5 * ((t.z[1] - t.z[0]).conj() * (t.z[2] - t.z[0])).im.abs();
                hol += area * dz.norm_sqr();
                anti += area * dzb.norm_sqr();
            }
            (hol / anti).sqrt()
        });
        let out = Self { coeff, metric, theta, mass: s.mass.clone(), wp_gram, hodge_gram, gram_identity_residual, harmonicity };
        let ev = hermitian_eigen(&out.wp_gram).ok_or(CurvError::NotPositiveDefinite(f64::NAN))?;
        if ev.values[0] <= 0.0 {
            return Err(CurvError::NotPositiveDefinite(ev.values[0]));
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Vertex values of `theta_a conj(theta_b)`.
    pub fn pair(&self, a: usize, b: usize) -> Vec<C64> {
        self.theta.iter().map(|t| t[a] * t[b].conj()).collect()
    }
}

/// `(d/dz, d/dzbar)` of the linear interpolant of `vals` on a triangle.
pub fn p1_derivatives(z: [C64; 3], vals: [C64; 3]) -> (C64, C64) {
    // F = F0 + a dz + b conj(dz) fitted through the two edges.
    let (e1, e2) = (z[1] - z[0], z[2] - z[0]);
    let (d1, d2) = (vals[1] - vals[0], vals[2] - vals[0]);
    let det = e1 * e2.conj() - e2 * e1.conj();
    let a = (d1 * e2.conj() - d2 * e1.conj()) / det;
    let b = (e1 * d2 - e2 * d1) / det;
    (a, b)
}
