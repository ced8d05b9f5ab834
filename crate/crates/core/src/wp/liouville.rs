//! Uniformization: the conformal factor `u` making `e^{2u} rho |dz|^2` a
//! metric of constant curvature -1.
//!
//! Discretely this is `S u + A0 e^{2u} + k = 0` with `S` the stiffness
//! matrix, `A0` the lumped background area and `k` the lumped background
//! curvature. It is the gradient of a strictly convex energy, so damped
//! Newton from a constant start converges.

use super::fem::{scaled_plus_diagonal, spmv, Discretization, SpdSolver};
use super::mesh::{chart_x, Chart, CoverMesh};
use crate::error::{CurvError, Result};
use crate::C64;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug)]
pub struct NewtonOptions {
    /// Target for `max |F_v| / A0_v`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-11, max_iter: 50 }
    }
}

#[derive(Clone, Debug)]
pub struct HyperbolicStructure {
    pub u: Vec<f64>,
    /// Lumped hyperbolic area per vertex.
    pub mass: Vec<f64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub residual: f64,
    /// Sum of the lumped areas; `4 pi` up to the solve residual.
    pub lumped_area: f64,
    /// Area of the piecewise-flat surface with hyperbolic edge lengths.
    pub heron_area: f64,
}

fn residual(disc: &Discretization, u: &[f64]) -> (Vec<f64>, f64) {
    let su = spmv(&disc.stiffness, u);
    let f: Vec<f64> = (0..u.len())
        .map(|v| su[v] + disc.background_mass[v] * (2.0 * u[v]).exp() + disc.source[v])
        .collect();
    let r = f.iter().zip(&disc.background_mass).fold(0.0, |m: f64, (f, a)| m.max((f / a).abs()));
    (f, r)
}

fn energy(disc: &Discretization, u: &[f64]) -> f64 {
    let su = spmv(&disc.stiffness, u);
    (0..u.len())
        .map(|v| 0.5 * u[v] * su[v] + 0.5 * disc.background_mass[v] * (2.0 * u[v]).exp() + disc.source[v] * u[v])
        .sum()
}

pub fn solve_liouville(mesh: &CoverMesh, disc: &Discretization, opts: NewtonOptions) -> Result<HyperbolicStructure> {
    let total_k: f64 = disc.source.iter().sum();
    let total_a: f64 = disc.background_mass.iter().sum();
    let mut u = vec![0.5 * (-total_k / total_a).ln(); disc.len()];
    let (mut f, mut r) = residual(disc, &u);
    let mut history = vec![r];
    let mut solver: Option<SpdSolver> = None;
    let mut iterations = 0;
    while r > opts.tol {
        if iterations == opts.max_iter {
            return Err(CurvError::NewtonDiverged { history });
        }
        iterations += 1;
        let d: Vec<f64> = (0..u.len()).map(|v| 2.0 * disc.background_mass[v] * (2.0 * u[v]).exp()).collect();
        let jac = scaled_plus_diagonal(&disc.stiffness, 1.0, &d);
        match solver.as_mut() {
            Some(s) => s.refactor(&jac)?,
            None => solver = Some(SpdSolver::new(&jac)?),
        }
        let step = solver.as_ref().unwrap().solve(&f);
        let slope: f64 = -f.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
        let e0 = energy(disc, &u);
        let mut t = 1.0;
        let trial = loop {
            let cand: Vec<f64> = u.iter().zip(&step).map(|(a, s)| a - t * s).collect();
            if energy(disc, &cand) <= e0 + 1e-4 * t * slope || t < 1e-6 {
                break cand;
            }
            t *= 0.5;
        };
        u = trial;
        (f, r) = residual(disc, &u);
        history.push(r);
        if !r.is_finite() {
            return Err(CurvError::NewtonDiverged { history });
        }
    }
    let mass: Vec<f64> = (0..u.len()).map(|v| disc.background_mass[v] * (2.0 * u[v]).exp()).collect();
    let heron_area = mesh
        .tris
        .iter()
        .zip(&disc.corner_density)
        .map(|(t, rho)| {
            let len = [0, 1, 2].map(|c| {
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                let scale = (rho[a] * rho[b]).powf(0.25) * (0.5 * (u[t.verts[a]] + u[t.verts[b]])).exp();
                (t.z[a] - t.z[b]).norm() * scale
            });
            let s = 0.5 * (len[0] + len[1] + len[2]);
            (s * (s - len[0]) * (s - len[1]) * (s - len[2])).max(0.0).sqrt()
        })
        .sum();
    Ok(HyperbolicStructure {
        lumped_area: mass.iter().sum(),
        u,
        mass,
        iterations,
        residual: r,
        residual_history: history,
        heron_area,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussSample {
    pub vertex: usize,
    pub x: C64,
    pub curvature: f64,
}

fn vertex_neighbors(mesh: &CoverMesh) -> Vec<Vec<usize>> {
    let mut nb = vec![Vec::new(); mesh.verts.len()];
    for t in &mesh.tris {
        for c in 0..3 {
            let (a, b) = (t.verts[c], t.verts[(c + 1) % 3]);
            if !nb[a].contains(&b) {
                nb[a].push(b);
                nb[b].push(a);
            }
        }
    }
    nb
}

/// Gauss curvature of the solved metric at up to `count` vertices, from a
/// least-squares quartic fit of `u` over the two-ring in the `x` chart:
/// `K = -e^{-2u} (Laplacian u + 2/(1+|x|^2)^2) / rho`.
///
/// Samples are restricted to regular patches (valence 6 throughout the
/// two-ring) lying inside the `x` chart, with `|x| < 0.9`.
pub fn gauss_curvature_samples(mesh: &CoverMesh, s: &HyperbolicStructure, count: usize) -> Vec<GaussSample> {
    let nb = vertex_neighbors(mesh);
    let curve = &mesh.curve;
    let mut in_x = vec![true; mesh.verts.len()];
    for t in &mesh.tris {
        if t.chart != Chart::X {
            t.verts.iter().for_each(|&v| in_x[v] = false);
        }
    }
    let two_ring = |v: usize| {
        let mut ring = vec![v];
        for &w in &nb[v] {
            for &y in std::iter::once(&w).chain(&nb[w]) {
                if !ring.contains(&y) {
                    ring.push(y);
                }
            }
        }
        ring
    };
    let eligible: Vec<usize> = (0..mesh.verts.len())
        .filter(|&v| {
            let cv = &mesh.verts[v];
            cv.chart == Chart::X
                && cv.z.norm() < 0.9
                && two_ring(v).iter().all(|&w| in_x[w] && nb[w].len() == 6 && nb[w].iter().all(|&y| in_x[y]))
        })
        .collect();
    let stride = (eligible.len() / count.max(1)).max(1);
    let monomials = |d: C64| {
        let mut m = Vec::with_capacity(15);
        for deg in 0..=4 {
            for k in 0..=deg {
                m.push(d.re.powi(deg - k) * d.im.powi(k));
            }
        }
        m
    };
    eligible
        .iter()
        .step_by(stride)
        .take(count)
        .filter_map(|&v| {
            let x0 = mesh.verts[v].z;
            let ring = two_ring(v);
            let rows: Vec<Vec<f64>> = ring.iter().map(|&w| monomials(chart_x(mesh.sphere_point(w)) - x0)).collect();
            let a = DMatrix::from_fn(rows.len(), 15, |i, j| rows[i][j]);
            let b = DVector::from_iterator(ring.len(), ring.iter().map(|&w| s.u[w]));
            let coef = a.svd(true, true).solve(&b, 1e-14).ok()?;
            // Monomial order: 1, dx, dy, dx^2, dx dy, dy^2, ...
            let lap = 2.0 * (coef[3] + coef[5]);
            let rho = Chart::X.density(curve, x0);
            let k = -(-2.0 * coef[0]).exp() * (lap + 2.0 / (1.0 + x0.norm_sqr()).powi(2)) / rho;
            Some(GaussSample { vertex: v, x: x0, curvature: k })
        })
        .collect()
}
