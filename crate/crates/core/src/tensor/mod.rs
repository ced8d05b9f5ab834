//! Curvature tensors `R_{i jbar alpha betabar}` of Hermitian bundles.
//!
//! Components are stored in a frame that is orthonormal at the base point,
//! with the `sqrt(-1)/2pi` prefactor dropped, so every positivity notion is
//! a plain Hermitian form in the stored numbers.

mod io;
mod jet;
mod models;

pub use io::{read_tensor, read_tensor_str, write_tensor, write_tensor_json, write_tensor_text, TensorFormat};
pub use jet::{curvature_from_jet, random_adapted_jet, subbundle_curvature, HermitianMetricJet, SubbundleCurvature};
pub use models::{
    complex_ball, flat, fubini_study, random_bundle_tensor, random_kahler_tensor,
    random_kahler_tensor_with, SignClass,
};

use crate::error::{CurvError, Result};
use crate::C64;
use nalgebra::DMatrix;

/// Default relative tolerance for symmetry validation.
pub const SYMMETRY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureTensor {
    n: usize,
    r: usize,
    kahler: bool,
    data: Vec<C64>,
}

impl CurvatureTensor {
    pub fn zeros(n: usize, r: usize, kahler: bool) -> Self {
        assert!(n > 0 && r > 0, "dimensions must be positive");
        assert!(!kahler || n == r, "a Kähler tensor needs r = n");
        Self { n, r, kahler, data: vec![C64::new(0.0, 0.0); n * n * r * r] }
    }

    /// Build from a flat buffer indexed by `((i*n + j)*r + a)*r + b`,
    /// validating the Hermitian (and, when flagged, Kähler) symmetries.
    pub fn from_data(n: usize, r: usize, kahler: bool, data: Vec<C64>) -> Result<Self> {
        if n == 0 || r == 0 {
            return Err(CurvError::InvalidArgument("dimensions must be positive".into()));
        }
        if kahler && n != r {
            return Err(CurvError::InvalidArgument(format!(
                "Kähler tensor needs r = n, got n = {n}, r = {r}"
            )));
        }
        if data.len() != n * n * r * r {
            return Err(CurvError::InvalidArgument(format!(
                "expected {} components, got {}",
                n * n * r * r,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CurvError::InvalidArgument("non-finite component".into()));
        }
        let t = Self { n, r, kahler, data };
        t.validate(SYMMETRY_TOL)?;
        Ok(t)
    }

    /// Build from a component function; the caller vouches for symmetry.
    pub fn from_fn(n: usize, r: usize, kahler: bool, f: impl Fn(usize, usize, usize, usize) -> C64) -> Self {
        let mut t = Self::zeros(n, r, kahler);
        for i in 0..n {
            for j in 0..n {
                for a in 0..r {
                    for b in 0..r {
                        let k = t.idx(i, j, a, b);
                        t.data[k] = f(i, j, a, b);
                    }
                }
            }
        }
        t
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn r(&self) -> usize {
        self.r
    }
    pub fn is_kahler(&self) -> bool {
        self.kahler
    }
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize, a: usize, b: usize) -> usize {
        ((i * self.n + j) * self.r + a) * self.r + b
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, a: usize, b: usize) -> C64 {
        self.data[self.idx(i, j, a, b)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, a: usize, b: usize, v: C64) {
        let k = self.idx(i, j, a, b);
        self.data[k] = v;
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Largest `|R_{ijab} - conj R_{jiba}|`.
    pub fn hermitian_residual(&self) -> (f64, [usize; 4]) {
        let mut worst = (0.0, [0; 4]);
        self.each(|i, j, a, b| {
            let d = (self.get(i, j, a, b) - self.get(j, i, b, a).conj()).norm();
            if d > worst.0 {
                worst = (d, [i, j, a, b]);
            }
        });
        worst
    }

    /// Largest deviation from `R_{ijkl} = R_{kjil} = R_{ilkj}`.
    pub fn kahler_residual(&self) -> (f64, [usize; 4]) {
        let mut worst = (0.0, [0; 4]);
        if self.n != self.r {
            return (f64::INFINITY, worst.1);
        }
        self.each(|i, j, k, l| {
            let v = self.get(i, j, k, l);
            let d = (v - self.get(k, j, i, l)).norm().max((v - self.get(i, l, k, j)).norm());
            if d > worst.0 {
                worst = (d, [i, j, k, l]);
            }
        });
        worst
    }

    /// Check symmetries to `tol` relative to the max-norm.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let scale = self.max_norm().max(f64::MIN_POSITIVE);
        let (h, at) = self.hermitian_residual();
        if h > tol * scale {
            return Err(CurvError::Symmetry { symmetry: "Hermitian", index: at, residual: h / scale });
        }
        if self.kahler {
            let (k, at) = self.kahler_residual();
            if k > tol * scale {
                return Err(CurvError::Symmetry { symmetry: "Kähler", index: at, residual: k / scale });
            }
        }
        Ok(())
    }

    fn each(&self, mut f: impl FnMut(usize, usize, usize, usize)) {
        for i in 0..self.n {
            for j in 0..self.n {
                for a in 0..self.r {
                    for b in 0..self.r {
                        f(i, j, a, b);
                    }
                }
            }
        }
    }

    /// Project onto Hermitian (and, when flagged, Kähler) tensors. Each
    /// symmetry orbit receives one averaged value, so the result satisfies
    /// the symmetries exactly.
    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        let mut done = vec![false; self.data.len()];
        let mut orbit: Vec<([usize; 4], bool)> = Vec::with_capacity(8);
        self.each(|i, j, a, b| {
            if done[self.idx(i, j, a, b)] {
                return;
            }
            orbit.clear();
            orbit.push(([i, j, a, b], false));
            if self.kahler {
                orbit.extend([([a, j, i, b], false), ([i, b, a, j], false), ([a, b, i, j], false)]);
            }
            let m = orbit.len();
            for e in 0..m {
                let t = orbit[e].0;
                orbit.push(([t[1], t[0], t[3], t[2]], true));
            }
            // Mean of offsets from the first member, so a symmetric orbit is
            // reproduced bit for bit.
            let first = self.get(i, j, a, b);
            let mut acc = C64::new(0.0, 0.0);
            for &(t, c) in orbit.iter() {
                let v = self.get(t[0], t[1], t[2], t[3]);
                acc += (if c { v.conj() } else { v }) - first;
            }
            let mut avg = first + acc / orbit.len() as f64;
            let real = orbit.iter().any(|&(t, c)| orbit.iter().any(|&(u, d)| t == u && c != d));
            if real {
                avg.im = 0.0;
            }
            for &(t, c) in orbit.iter() {
                let k = self.idx(t[0], t[1], t[2], t[3]);
                out.data[k] = if c { avg.conj() } else { avg };
                done[k] = true;
            }
        });
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut t = self.clone();
        t.data.iter_mut().for_each(|z| *z *= s);
        t
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if (self.n, self.r) != (other.n, other.r) {
            return Err(CurvError::InvalidArgument("dimension mismatch".into()));
        }
        let mut t = self.clone();
        t.kahler = self.kahler && other.kahler;
        for (x, y) in t.data.iter_mut().zip(&other.data) {
            *x += *y;
        }
        Ok(t)
    }

    /// The dual-bundle curvature `-R_{i jbar beta alphabar}`. Nakano
    /// positivity of the dual is dual-Nakano negativity of the original.
    pub fn dual(&self) -> Self {
        let mut t = Self::zeros(self.n, self.r, false);
        self.each(|i, j, a, b| t.set(i, j, a, b, -self.get(i, j, b, a)));
        t
    }

    /// Components in a new frame whose base vectors are the columns of `base`
    /// and fiber vectors the columns of `fiber`.
    pub fn change_frame(&self, base: &DMatrix<C64>, fiber: &DMatrix<C64>) -> Result<Self> {
        let (n, r) = (self.n, self.r);
        if base.shape() != (n, n) || fiber.shape() != (r, r) {
            return Err(CurvError::InvalidArgument("frame matrix has wrong shape".into()));
        }
        let mut cur = self.data.clone();
        let dims = [n, n, r, r];
        for (slot, mat, conj) in [(0, base, false), (1, base, true), (2, fiber, false), (3, fiber, true)] {
            let mut next = vec![C64::new(0.0, 0.0); cur.len()];
            let stride: usize = dims[slot + 1..].iter().product();
            let d = dims[slot];
            let outer = cur.len() / (d * stride);
            for o in 0..outer {
                for s in 0..stride {
                    for new in 0..d {
                        let mut acc = C64::new(0.0, 0.0);
                        for old in 0..d {
                            let m = if conj { mat[(old, new)].conj() } else { mat[(old, new)] };
                            acc += m * cur[(o * d + old) * stride + s];
                        }
                        next[(o * d + new) * stride + s] = acc;
                    }
                }
            }
            cur = next;
        }
        let kahler = self.kahler && base == fiber;
        Ok(Self { n, r, kahler, data: cur })
    }

    /// Change both base and fiber frames of a Kähler tensor by the same matrix.
    pub fn change_kahler_frame(&self, frame: &DMatrix<C64>) -> Result<Self> {
        self.change_frame(frame, frame)
    }
}
