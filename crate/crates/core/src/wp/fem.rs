//! Piecewise-linear discretization on the cover mesh.

use super::mesh::{spherical_area, CoverMesh, CoverTriangle};
use crate::error::{CurvError, Result};
use sprs::{CsMat, TriMat};
use sprs_ldl::{Ldl, LdlNumeric};
use std::collections::BTreeMap;

/// Cotangent weights of a triangle in its chart, for edges opposite
/// corners 0, 1, 2.
pub fn cotangents(t: &CoverTriangle) -> [f64; 3] {
    [0, 1, 2].map(|c| {
        let (o, a, b) = (t.z[c], t.z[(c + 1) % 3], t.z[(c + 2) % 3]);
        let w = (a - o).conj() * (b - o);
        w.re / w.im.abs()
    })
}

pub fn chart_area(t: &CoverTriangle) -> f64 {
    CoverMesh::signed_area(t).abs()
}

#[derive(Clone, Debug)]
pub struct Discretization {
    /// Stiffness matrix of the Dirichlet energy (discrete `-Laplacian`).
    pub stiffness: CsMat<f64>,
    /// Lumped background area per vertex.
    pub background_mass: Vec<f64>,
    /// Lumped background curvature `K_bg dA_bg` per vertex.
    pub source: Vec<f64>,
    /// Background density at each triangle corner, in the triangle chart.
    pub corner_density: Vec<[f64; 3]>,
}

impl Discretization {
    pub fn new(mesh: &CoverMesh) -> Self {
        let nv = mesh.verts.len();
        let mut edges: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut mass = vec![0.0; nv];
        let mut source = vec![0.0; nv];
        let mut corner_density = Vec::with_capacity(mesh.tris.len());
        for t in &mesh.tris {
            let cot = cotangents(t);
            for c in 0..3 {
                let (a, b) = (t.verts[(c + 1) % 3], t.verts[(c + 2) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_insert(0.0) += 0.5 * cot[c];
            }
            let area = chart_area(t);
            let rho = [0, 1, 2].map(|c| t.chart.density(&mesh.curve, t.z[c]));
            let sph = spherical_area(
                mesh.sphere_point(t.verts[0]),
                mesh.sphere_point(t.verts[1]),
                mesh.sphere_point(t.verts[2]),
            );
            for c in 0..3 {
                mass[t.verts[c]] += area / 3.0 * rho[c];
                // The background curvature form is minus half the spherical area form.
                source[t.verts[c]] -= 0.5 * sph / 3.0;
            }
            corner_density.push(rho);
        }
        let mut diag = vec![0.0; nv];
        let mut tri = TriMat::with_capacity((nv, nv), nv + 2 * edges.len());
        for (&(a, b), &w) in &edges {
            tri.add_triplet(a, b, -w);
            tri.add_triplet(b, a, -w);
            diag[a] += w;
            diag[b] += w;
        }
        for (v, d) in diag.into_iter().enumerate() {
            tri.add_triplet(v, v, d);
        }
        Self { stiffness: tri.to_csc(), background_mass: mass, source, corner_density }
    }

    pub fn len(&self) -> usize {
        self.background_mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.background_mass.is_empty()
    }

    /// Largest `|S_ij - S_ji|` and largest absolute row sum.
    pub fn laplacian_residuals(&self) -> (f64, f64) {
        let n = self.len();
        let mut asym: f64 = 0.0;
        let mut rows = vec![0.0; n];
        for (v, (i, j)) in self.stiffness.iter() {
            rows[i] += *v;
            let t = self.stiffness.get(j, i).copied().unwrap_or(0.0);
            asym = asym.max((v - t).abs());
        }
        (asym, rows.iter().fold(0.0, |m, r: &f64| m.max(r.abs())))
    }
}

pub fn spmv(m: &CsMat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.rows()];
    for (v, (i, j)) in m.iter() {
        y[i] += v * x[j];
    }
    y
}

/// `scale * m + diag(d)` on the pattern of `m`, which must hold the diagonal.
pub fn scaled_plus_diagonal(m: &CsMat<f64>, scale: f64, d: &[f64]) -> CsMat<f64> {
    let mut out = m.map(|v| v * scale);
    for (i, &di) in d.iter().enumerate() {
        *out.get_mut(i, i).expect("diagonal entry present") += di;
    }
    out
}

/// Sparse LDL^T factorization of a symmetric positive definite matrix,
/// with a reverse Cuthill-McKee ordering.
pub struct SpdSolver {
    ldl: LdlNumeric<f64, usize>,
}

impl SpdSolver {
    pub fn new(m: &CsMat<f64>) -> Result<Self> {
        let ldl = Ldl::new()
            .check_symmetry(sprs::SymmetryCheck::DontCheckSymmetry)
            .numeric(m.view())
            .map_err(|e| CurvError::Factorization(e.to_string()))?;
        let s = Self { ldl };
        s.check_positive()?;
        Ok(s)
    }

    /// Refactor a matrix with the pattern of the original one.
    pub fn refactor(&mut self, m: &CsMat<f64>) -> Result<()> {
        self.ldl.update(m.view()).map_err(|e| CurvError::Factorization(e.to_string()))?;
        self.check_positive()
    }

    fn check_positive(&self) -> Result<()> {
        match self.ldl.d().iter().copied().find(|&d| !(d > 0.0)) {
            Some(d) => Err(CurvError::Factorization(format!("pivot {d:e} is not positive"))),
            None => Ok(()),
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.ldl.solve(rhs.to_vec())
    }
}
