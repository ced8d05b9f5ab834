//! Pointwise values of the curvature notions.
//!
//! Complex vectors are plain slices; real tangent vectors have length `2n`
//! with the `x` components first, then the `y` components. The real metric is
//! `g(d/dx_i, d/dx_i) = 2`, i.e. the Riemannian metric of a Kähler form whose
//! Hermitian matrix is the identity.

use crate::error::{CurvError, Result};
use crate::linalg::{hermitian_form, norm_sqr};
use crate::tensor::CurvatureTensor;
use crate::C64;
use nalgebra::DMatrix;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `M[(i,a),(j,b)] = R_{i jbar a bbar}`.
pub fn nakano_matrix(t: &CurvatureTensor) -> DMatrix<C64> {
    let r = t.r();
    let d = t.n() * r;
    DMatrix::from_fn(d, d, |x, y| t.get(x / r, y / r, x % r, y % r))
}

/// `M[(i,a),(j,b)] = R_{i jbar b abar}`.
pub fn dual_nakano_matrix(t: &CurvatureTensor) -> DMatrix<C64> {
    let r = t.r();
    let d = t.n() * r;
    DMatrix::from_fn(d, d, |x, y| t.get(x / r, y / r, y % r, x % r))
}

/// `sum R_{i jbar a bbar} u^{ia} conj(u^{jb})`, with `u` indexed `i*r + a`.
pub fn nakano_form(t: &CurvatureTensor, u: &[C64]) -> f64 {
    hermitian_form(&nakano_matrix(t), u)
}

/// `sum R_{i jbar a bbar} u^{ib} conj(u^{ja})`.
pub fn dual_nakano_form(t: &CurvatureTensor, u: &[C64]) -> f64 {
    hermitian_form(&dual_nakano_matrix(t), u)
}

/// `sum R u^i conj(u^j) v^a conj(v^b)`, not normalized.
pub fn griffiths_value(t: &CurvatureTensor, u: &[C64], v: &[C64]) -> f64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..t.n() {
        for j in 0..t.n() {
            let uu = u[i] * u[j].conj();
            for a in 0..t.r() {
                for b in 0..t.r() {
                    acc += t.get(i, j, a, b) * uu * v[a] * v[b].conj();
                }
            }
        }
    }
    acc.re
}

/// Holomorphic bisectional curvature of unit-normalized `u`, `v`.
pub fn bisectional_curvature(t: &CurvatureTensor, u: &[C64], v: &[C64]) -> f64 {
    griffiths_value(t, u, v) / (norm_sqr(u) * norm_sqr(v))
}

pub fn holomorphic_sectional_curvature(t: &CurvatureTensor, u: &[C64]) -> f64 {
    bisectional_curvature(t, u, u)
}

/// Rank-two matrix `A^{ij} = a^i conj(c^j) - b^j conj(d^i)` attached to
/// `Z = (a, b)` and `W = (c, d)` in holomorphic/antiholomorphic components.
pub fn sectional_matrix(n: usize, z: &[C64], w: &[C64]) -> Vec<C64> {
    let (a, b) = z.split_at(n);
    let (c, d) = w.split_at(n);
    let mut m = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = a[i] * c[j].conj() - b[j] * d[i].conj();
        }
    }
    m
}

/// `R(Z, Wbar, W, Zbar) = sum R_{i jbar k lbar} A^{ij} conj(A^{lk})`.
pub fn complex_sectional_value(t: &CurvatureTensor, z: &[C64], w: &[C64]) -> f64 {
    let n = t.n();
    let m = sectional_matrix(n, z, w);
    pair_form(t, &m)
}

/// `sum R_{i jbar k lbar} M^{ij} conj(M^{lk})` for an `n x n` matrix `M`.
pub fn pair_form(t: &CurvatureTensor, m: &[C64]) -> f64 {
    let n = t.n();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc += t.get(i, j, k, l) * m[i * n + j] * m[l * n + k].conj();
                }
            }
        }
    }
    acc.re
}

/// Siu's form with `M = A Bbar^T - C Dbar^T`.
pub fn siu_value(t: &CurvatureTensor, a: &[C64], b: &[C64], c: &[C64], d: &[C64]) -> f64 {
    let n = t.n();
    let m: Vec<C64> = (0..n * n)
        .map(|x| {
            let (i, j) = (x / n, x % n);
            a[i] * b[j].conj() - c[i] * d[j].conj()
        })
        .collect();
    pair_form(t, &m)
}

/// Holomorphic and antiholomorphic components of a real vector.
pub fn complexify(x: &[f64]) -> (Vec<C64>, Vec<C64>) {
    let n = x.len() / 2;
    let hol: Vec<C64> = (0..n).map(|i| C64::new(x[i], x[n + i])).collect();
    let anti = hol.iter().map(|z| z.conj()).collect();
    (hol, anti)
}

/// Riemannian sectional curvature of the plane spanned by real `x`, `y`;
/// `NaN` if they are (numerically) parallel.
pub fn riemannian_sectional_curvature(t: &CurvatureTensor, x: &[f64], y: &[f64]) -> f64 {
    let (xx, yy, xy) = (dot(x, x), dot(y, y), dot(x, y));
    let area = xx * yy - xy * xy;
    if area <= 1e-24 * xx * yy || area == 0.0 {
        return f64::NAN;
    }
    let (a, b) = complexify(x);
    let (c, d) = complexify(y);
    let z: Vec<C64> = a.into_iter().chain(b).collect();
    let w: Vec<C64> = c.into_iter().chain(d).collect();
    complex_sectional_value(t, &z, &w) / (4.0 * area)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Bivector basis indices `(a, b)`, `a < b`, of `R^{2n}`: x-x pairs, then
/// all x-y pairs, then y-y pairs.
pub fn bivector_basis(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(n * (2 * n - 1));
    for i in 0..n {
        for j in i + 1..n {
            out.push((i, j));
        }
    }
    for p in 0..n {
        for q in 0..n {
            out.push((p, n + q));
        }
    }
    for m in 0..n {
        for k in m + 1..n {
            out.push((n + m, n + k));
        }
    }
    out
}

/// Real curvature tensor `R(e_a, e_b, e_c, e_d)` on `R^{2n}`, flat index
/// `((a*2n + b)*2n + c)*2n + d`.
pub fn real_curvature_tensor(t: &CurvatureTensor) -> Result<Vec<f64>> {
    if !t.is_kahler() {
        return Err(CurvError::NotKahler("the real curvature tensor"));
    }
    let n = t.n();
    let m = 2 * n;
    // Holomorphic component of e_a sits at index a mod n with this weight.
    let w = |a: usize| if a < n { C64::new(1.0, 0.0) } else { I };
    let p = |a: usize, b: usize| -> [(usize, usize, C64); 2] {
        let (ia, ib) = (a % n, b % n);
        [(ia, ib, w(a) * w(b).conj()), (ib, ia, -w(b) * w(a).conj())]
    };
    let mut out = vec![0.0; m * m * m * m];
    for a in 0..m {
        for b in 0..m {
            let pab = p(a, b);
            for c in 0..m {
                for d in 0..m {
                    let qcd = p(c, d);
                    let mut acc = C64::new(0.0, 0.0);
                    for &(i, j, x) in &pab {
                        for &(k, l, y) in &qcd {
                            acc += t.get(i, j, k, l) * x * y;
                        }
                    }
                    out[((a * m + b) * m + c) * m + d] = acc.re;
                }
            }
        }
    }
    Ok(out)
}

/// Matrix of the curvature operator as the bilinear form
/// `(V, W) -> R(X_V, Y_V, Y_W, X_W)` in the basis of [`bivector_basis`].
pub fn curvature_operator_matrix(t: &CurvatureTensor) -> Result<DMatrix<f64>> {
    let real = real_curvature_tensor(t)?;
    let m = 2 * t.n();
    let basis = bivector_basis(t.n());
    let at = |a: usize, b: usize, c: usize, d: usize| real[((a * m + b) * m + c) * m + d];
    Ok(DMatrix::from_fn(basis.len(), basis.len(), |p, q| {
        let (a, b) = basis[p];
        let (c, d) = basis[q];
        at(a, b, d, c)
    }))
}

/// Anti-Hermitian matrix `B^{i jbar}` of a real bivector with coefficients in
/// the basis of [`bivector_basis`].
pub fn bivector_matrix(n: usize, v: &[f64]) -> Vec<C64> {
    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n * n];
    let mut c = vec![0.0; n * n];
    for (coef, &(p, q)) in v.iter().zip(&bivector_basis(n)) {
        match (p < n, q < n) {
            (true, true) => a[p * n + q] = *coef,
            (true, false) => b[p * n + (q - n)] = *coef,
            _ => c[(p - n) * n + (q - n)] = *coef,
        }
    }
    (0..n * n)
        .map(|x| {
            let (i, j) = (x / n, x % n);
            let y = j * n + i;
            C64::new(a[x] + c[x] - a[y] - c[y], -b[x] - b[y])
        })
        .collect()
}

/// `g(R(V), V)` computed from the Hermitian components: `-sum R B B`.
pub fn curvature_operator_value(t: &CurvatureTensor, v: &[f64]) -> f64 {
    let n = t.n();
    let bm = bivector_matrix(n, v);
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    acc -= t.get(i, j, k, l) * bm[i * n + j] * bm[k * n + l];
                }
            }
        }
    }
    acc.re
}

/// Orthonormalize four real vectors for the metric `g = 2 <.,.>`.
pub fn g_orthonormal_frame(frame: &[f64], m: usize) -> Option<Vec<f64>> {
    let mut out: Vec<f64> = frame.to_vec();
    for k in 0..4 {
        let (done, rest) = out.split_at_mut(k * m);
        let cur = &mut rest[..m];
        for p in 0..k {
            let prev = &done[p * m..(p + 1) * m];
            let proj = dot(cur, prev) * 2.0;
            cur.iter_mut().zip(prev).for_each(|(x, y)| *x -= proj * y);
        }
        let nn = (2.0 * dot(cur, cur)).sqrt();
        if !(nn > 1e-10) {
            return None;
        }
        cur.iter_mut().for_each(|x| *x /= nn);
    }
    Some(out)
}

/// `R(v, w, wbar, vbar)` for `v = e1 + i e2`, `w = e3 + i e4` after
/// orthonormalizing the frame `e1..e4` (concatenated real vectors).
pub fn isotropic_curvature(t: &CurvatureTensor, frame: &[f64]) -> f64 {
    let n = t.n();
    let Some(e) = g_orthonormal_frame(frame, 2 * n) else {
        return f64::NAN;
    };
    pair_form(t, &isotropic_matrix(n, &e))
}

/// Matrix `P^{ij} = v^i w'^j - w^i v'^j` of the isotropic pair from a
/// g-orthonormal frame; the isotropic value is [`pair_form`] at it.
pub fn isotropic_matrix(n: usize, e: &[f64]) -> Vec<C64> {
    let m = 2 * n;
    let comp = |k: usize| complexify(&e[k * m..(k + 1) * m]);
    let (h1, a1) = comp(0);
    let (h2, a2) = comp(1);
    let (h3, a3) = comp(2);
    let (h4, a4) = comp(3);
    let vh: Vec<C64> = (0..n).map(|i| h1[i] + I * h2[i]).collect();
    let va: Vec<C64> = (0..n).map(|i| a1[i] + I * a2[i]).collect();
    let wh: Vec<C64> = (0..n).map(|i| h3[i] + I * h4[i]).collect();
    let wa: Vec<C64> = (0..n).map(|i| a3[i] + I * a4[i]).collect();
    (0..n * n)
        .map(|x| {
            let (i, j) = (x / n, x % n);
            vh[i] * wa[j] - wh[i] * va[j]
        })
        .collect()
}

/// The isotropic value split as `Q(V, V) + Q(U, U)` with `v ^ w = V + iU`
/// and `Q` the curvature operator form.
pub fn isotropic_curvature_via_operator(t: &CurvatureTensor, q: &DMatrix<f64>, frame: &[f64]) -> f64 {
    let n = t.n();
    let m = 2 * n;
    let Some(e) = g_orthonormal_frame(frame, m) else {
        return f64::NAN;
    };
    let v: Vec<C64> = (0..m).map(|a| C64::new(e[a], e[m + a])).collect();
    let w: Vec<C64> = (0..m).map(|a| C64::new(e[2 * m + a], e[3 * m + a])).collect();
    let basis = bivector_basis(n);
    let xi: Vec<C64> = basis.iter().map(|&(a, b)| v[a] * w[b] - v[b] * w[a]).collect();
    let re: Vec<f64> = xi.iter().map(|z| z.re).collect();
    let im: Vec<f64> = xi.iter().map(|z| z.im).collect();
    let quad = |x: &[f64]| {
        let mut s = 0.0;
        for p in 0..x.len() {
            for r in 0..x.len() {
                s += q[(p, r)] * x[p] * x[r];
            }
        }
        s
    };
    quad(&re) + quad(&im)
}
