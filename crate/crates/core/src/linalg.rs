use crate::C64;
use nalgebra::{DMatrix, DVector};

pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: Vec<f64>,
    /// Unit eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<C64>,
}

/// Eigen-decomposition of a Hermitian matrix; `None` if the QR sweep fails.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> Option<HermitianEigen> {
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = herm.try_symmetric_eigen(f64::EPSILON, 10_000)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Some(HermitianEigen { values, vectors })
}

/// Eigen-decomposition of a real symmetric matrix, ascending.
pub fn symmetric_eigen(m: &DMatrix<f64>) -> Option<(Vec<f64>, DMatrix<f64>)> {
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.try_symmetric_eigen(f64::EPSILON, 10_000)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    Some((values, vectors))
}

pub fn inverse_sqrt_hermitian(m: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let e = hermitian_eigen(m)?;
    if e.values.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let d = DVector::from_iterator(e.values.len(), e.values.iter().map(|v| C64::new(v.powf(-0.5), 0.0)));
    Some(&e.vectors * DMatrix::from_diagonal(&d) * e.vectors.adjoint())
}

/// Sum of `m[x, y] * u[x] * conj(u[y])`.
pub fn hermitian_form(m: &DMatrix<C64>, u: &[C64]) -> f64 {
    let d = u.len();
    let mut acc = C64::new(0.0, 0.0);
    for x in 0..d {
        let mut row = C64::new(0.0, 0.0);
        for y in 0..d {
            row += m[(x, y)] * u[y].conj();
        }
        acc += row * u[x];
    }
    acc.re
}

pub fn norm_sqr(u: &[C64]) -> f64 {
    u.iter().map(|z| z.norm_sqr()).sum()
}
