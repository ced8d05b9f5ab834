//! The resolvent `(Delta_0 + 1)^{-1}` with `Delta_0 = -Delta_LB / 2`.
//!
//! The weak form is `(S/2 + M) u = M f` with `M` the lumped hyperbolic
//! mass, so `G = (S/2 + M)^{-1}` is the kernel: `u_z = sum_w G_zw M_w f_w`.

use super::fem::{scaled_plus_diagonal, spmv, Discretization, SpdSolver};
use super::liouville::HyperbolicStructure;
use crate::error::{CurvError, Result};
use crate::exec::{for_each_chunk_mut, map_range};
use crate::C64;
use nalgebra::DMatrix;
use sprs::CsMat;

pub struct GreenOperator {
    solver: SpdSolver,
    system: CsMat<f64>,
    mass: Vec<f64>,
}

impl GreenOperator {
    pub fn new(disc: &Discretization, s: &HyperbolicStructure) -> Result<Self> {
        if s.mass.len() != disc.len() {
            return Err(CurvError::InvalidArgument("structure and discretization have different sizes".into()));
        }
        let system = scaled_plus_diagonal(&disc.stiffness, 0.5, &s.mass);
        Ok(Self { solver: SpdSolver::new(&system)?, system, mass: s.mass.clone() })
    }

    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `G rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        self.solver.solve(rhs)
    }

    /// `(Delta_0 + 1)^{-1} f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        let mf: Vec<f64> = f.iter().zip(&self.mass).map(|(a, m)| a * m).collect();
        self.solve(&mf)
    }

    pub fn apply_complex(&self, f: &[C64]) -> Vec<C64> {
        let re = self.apply(&f.iter().map(|z| z.re).collect::<Vec<_>>());
        let im = self.apply(&f.iter().map(|z| z.im).collect::<Vec<_>>());
        re.into_iter().zip(im).map(|(a, b)| C64::new(a, b)).collect()
    }

    /// Discrete `(Delta_0 + 1) u`.
    pub fn operator(&self, u: &[f64]) -> Vec<f64> {
        spmv(&self.system, u).iter().zip(&self.mass).map(|(a, m)| a / m).collect()
    }

    /// Relative `|(Delta_0 + 1) G f - f|_inf`.
    pub fn identity_residual(&self, f: &[f64]) -> f64 {
        let back = self.operator(&self.apply(f));
        let scale = f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        back.iter().zip(f).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs())) / scale
    }

    /// Dense kernel `G`, one sparse solve per column.
    pub fn kernel(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut k = DMatrix::zeros(n, n);
        for_each_chunk_mut(k.as_mut_slice(), n, |j, col| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            col.copy_from_slice(&self.solve(&e));
        });
        k
    }

    /// Largest entry of `|(S/2 + M) G - I|`.
    pub fn kernel_identity_residual(&self, kernel: &DMatrix<f64>) -> f64 {
        let n = self.len();
        map_range(n, |j| {
            let col = spmv(&self.system, kernel.column(j).as_slice());
            col.iter().enumerate().fold(0.0, |m: f64, (i, v)| m.max((v - if i == j { 1.0 } else { 0.0 }).abs()))
        })
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// `max |G - G^T|` relative to `max |G|`, and the smallest entry.
pub fn kernel_symmetry_and_min(kernel: &DMatrix<f64>) -> (f64, f64) {
    let n = kernel.nrows();
    let (mut asym, mut big, mut small) = (0.0f64, 0.0f64, f64::INFINITY);
    for j in 0..n {
        for i in 0..n {
            let v = kernel[(i, j)];
            asym = asym.max((v - kernel[(j, i)]).abs());
            big = big.max(v.abs());
            small = small.min(v);
        }
    }
    (asym / big, small)
}
