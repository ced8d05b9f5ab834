use super::CurvatureTensor;
use crate::exec::substream;
use crate::C64;
use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

/// Projective space with the Fubini-Study metric at a point:
/// `R = delta_ij delta_kl + delta_il delta_kj`.
pub fn fubini_study(n: usize) -> CurvatureTensor {
    CurvatureTensor::from_fn(n, n, true, |i, j, k, l| {
        C64::new(delta(i, j) * delta(k, l) + delta(i, l) * delta(k, j), 0.0)
    })
}

/// The unit ball with its Bergman-type metric, the negative of [`fubini_study`].
pub fn complex_ball(n: usize) -> CurvatureTensor {
    fubini_study(n).scaled(-1.0)
}

pub fn flat(n: usize) -> CurvatureTensor {
    CurvatureTensor::zeros(n, n, true)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SignClass {
    Unconstrained,
    SemiNakanoNegative,
    SemiDualNakanoNegative,
}

impl SignClass {
    pub const ALL: [SignClass; 3] =
        [SignClass::Unconstrained, SignClass::SemiNakanoNegative, SignClass::SemiDualNakanoNegative];

    pub fn name(self) -> &'static str {
        match self {
            SignClass::Unconstrained => "unconstrained",
            SignClass::SemiNakanoNegative => "semi-nakano-negative",
            SignClass::SemiDualNakanoNegative => "semi-dual-nakano-negative",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

fn cnormal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))
}

fn pair_index(n: usize, i: usize, k: usize) -> usize {
    let (a, b) = if i <= k { (i, k) } else { (k, i) };
    a * n - a * (a + 1) / 2 + b
}

/// Expand a Hermitian form on symmetric 2-tensors into a Kähler tensor.
fn from_sym2_form(n: usize, h: &[C64]) -> CurvatureTensor {
    let m = n * (n + 1) / 2;
    CurvatureTensor::from_fn(n, n, true, |i, j, k, l| h[pair_index(n, i, k) * m + pair_index(n, j, l)])
}

fn normalized(t: CurvatureTensor) -> CurvatureTensor {
    let s = t.max_norm();
    if s > 0.0 {
        t.scaled(1.0 / s)
    } else {
        t
    }
}

/// Random Kähler tensor of the given class, scaled to unit max-norm.
pub fn random_kahler_tensor_with<R: Rng + ?Sized>(n: usize, class: SignClass, rng: &mut R) -> CurvatureTensor {
    let m = n * (n + 1) / 2;
    let t = match class {
        SignClass::Unconstrained => {
            let mut h = vec![C64::new(0.0, 0.0); m * m];
            for a in 0..m {
                h[a * m + a] = C64::new(StandardNormal.sample(rng), 0.0);
                for b in a + 1..m {
                    let z = cnormal(rng);
                    h[a * m + b] = z;
                    h[b * m + a] = z.conj();
                }
            }
            from_sym2_form(n, &h)
        }
        SignClass::SemiNakanoNegative => {
            let rank = rng.random_range(1..=m);
            let mut h = vec![C64::new(0.0, 0.0); m * m];
            for _ in 0..rank {
                let v: Vec<C64> = (0..m).map(|_| cnormal(rng)).collect();
                for a in 0..m {
                    for b in 0..m {
                        h[a * m + b] -= v[a] * v[b].conj();
                    }
                }
            }
            from_sym2_form(n, &h)
        }
        SignClass::SemiDualNakanoNegative => {
            let pts = rng.random_range(1..=3 * n);
            let mu: Vec<Vec<C64>> = (0..pts).map(|_| (0..n).map(|_| cnormal(rng)).collect()).collect();
            let b: Vec<f64> = (0..pts * pts).map(|_| rng.random::<f64>()).collect();
            let g: Vec<f64> = (0..pts * pts)
                .map(|zw| {
                    let (z, w) = (zw / pts, zw % pts);
                    (0..pts).map(|s| b[z * pts + s] * b[w * pts + s]).sum()
                })
                .collect();
            CurvatureTensor::from_fn(n, n, true, |i, j, k, l| {
                let mut acc = C64::new(0.0, 0.0);
                for z in 0..pts {
                    for w in 0..pts {
                        let (p, q) = (&mu[z], &mu[w]);
                        let t1 = p[i] * p[j].conj() * q[k] * q[l].conj();
                        let t2 = p[i] * p[l].conj() * q[k] * q[j].conj();
                        acc -= (t1 + t2) * g[z * pts + w];
                    }
                }
                acc
            })
            .symmetrized()
        }
    };
    normalized(t)
}

pub fn random_kahler_tensor(n: usize, class: SignClass, seed: u64) -> CurvatureTensor {
    random_kahler_tensor_with(n, class, &mut substream(seed, 0))
}

/// Random bundle tensor (no Kähler symmetry) of rank `r` over an `n`-dimensional base.
pub fn random_bundle_tensor<R: Rng + ?Sized>(n: usize, r: usize, class: SignClass, rng: &mut R) -> CurvatureTensor {
    let d = n * r;
    let t = match class {
        SignClass::Unconstrained => {
            let vals: Vec<C64> = (0..d * d).map(|_| cnormal(rng)).collect();
            CurvatureTensor::from_fn(n, r, false, |i, j, a, b| vals[(i * r + a) * d + j * r + b]).symmetrized()
        }
        SignClass::SemiNakanoNegative => {
            let rank = rng.random_range(1..=d);
            let w: Vec<Vec<C64>> = (0..rank).map(|_| (0..d).map(|_| cnormal(rng)).collect()).collect();
            CurvatureTensor::from_fn(n, r, false, |i, j, a, b| {
                -w.iter().map(|v| v[i * r + a] * v[j * r + b].conj()).sum::<C64>()
            })
        }
        SignClass::SemiDualNakanoNegative => random_bundle_tensor(n, r, SignClass::SemiNakanoNegative, rng)
            .scaled(-1.0)
            .dual(),
    };
    normalized(t)
}
