//! Genus-2 curves `y^2 = p(x)` with `p` of degree six.

use crate::error::{CurvError, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Minimum distance between roots accepted as distinct.
pub const ROOT_SEPARATION: f64 = 1e-6;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct HyperellipticCurve {
    /// `c[k]` multiplies `x^k`.
    pub coeffs: [C64; 7],
    pub roots: [C64; 6],
}

fn horner(c: &[C64], x: C64) -> C64 {
    c.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * x + a)
}

fn derivative(c: &[C64]) -> Vec<C64> {
    c.iter().enumerate().skip(1).map(|(k, &a)| a * k as f64).collect()
}

/// Roots of a polynomial by simultaneous (Aberth) iteration, polished by
/// Newton steps on the original coefficients.
fn polynomial_roots(c: &[C64]) -> Vec<C64> {
    let deg = c.len() - 1;
    let lead = c[deg];
    let monic: Vec<C64> = c.iter().map(|&a| a / lead).collect();
    let dmonic = derivative(&monic);
    let radius = 1.0 + monic[..deg].iter().fold(0.0f64, |m, a| m.max(a.norm()));
    let mut z: Vec<C64> = (0..deg)
        .map(|k| C64::from_polar(radius, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for k in 0..deg {
            let p = horner(&monic, z[k]);
            let dp = horner(&dmonic, z[k]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: C64 = (0..deg).filter(|&m| m != k).map(|m| C64::new(1.0, 0.0) / (z[k] - z[m])).sum();
            let step = ratio / (C64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[k] -= step;
                moved = moved.max(step.norm() / (1.0 + z[k].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    let dc = derivative(c);
    for root in z.iter_mut() {
        for _ in 0..3 {
            let step = horner(c, *root) / horner(&dc, *root);
            if step.is_finite() {
                *root -= step;
            }
        }
    }
    z
}

impl HyperellipticCurve {
    pub fn new(coeffs: [C64; 7]) -> Result<Self> {
        if coeffs.iter().any(|z| !z.is_finite()) {
            return Err(CurvError::DegenerateCurve("non-finite coefficient".into()));
        }
        let scale = coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if coeffs[6].norm() <= 1e-14 * scale || scale == 0.0 {
            return Err(CurvError::DegenerateCurve("leading coefficient vanishes; degree must be 6".into()));
        }
        let found = polynomial_roots(&coeffs);
        let mut roots = [C64::new(0.0, 0.0); 6];
        roots.copy_from_slice(&found);
        roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        for i in 0..6 {
            for j in i + 1..6 {
                let d = (roots[i] - roots[j]).norm();
                if d < ROOT_SEPARATION {
                    return Err(CurvError::NearDegenerateRoots { i, j, distance: d });
                }
            }
        }
        let c = Self { coeffs, roots };
        if c.discriminant_scale() == 0.0 {
            return Err(CurvError::DegenerateCurve("vanishing discriminant".into()));
        }
        Ok(c)
    }

    /// The curve `y^2 = x^6 - 1`.
    pub fn x6_minus_1() -> Self {
        let mut c = [C64::new(0.0, 0.0); 7];
        c[0] = C64::new(-1.0, 0.0);
        c[6] = C64::new(1.0, 0.0);
        Self::new(c).expect("x^6 - 1 is squarefree")
    }

    /// Product of root differences, zero exactly when roots collide.
    fn discriminant_scale(&self) -> f64 {
        let mut prod = 1.0;
        for i in 0..6 {
            for j in i + 1..6 {
                prod *= (self.roots[i] - self.roots[j]).norm();
            }
        }
        prod
    }

    pub fn lead(&self) -> C64 {
        self.coeffs[6]
    }

    /// `p(x)` in factored form.
    pub fn p(&self, x: C64) -> C64 {
        self.roots.iter().fold(self.lead(), |acc, &e| acc * (x - e))
    }

    /// `p(x) / (x - e_k)`.
    pub fn q(&self, k: usize, x: C64) -> C64 {
        self.roots
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k)
            .fold(self.lead(), |acc, (_, &e)| acc * (x - e))
    }

    /// `t^6 p(1/t)`.
    pub fn p_tilde(&self, t: C64) -> C64 {
        self.roots.iter().fold(self.lead(), |acc, &e| acc * (C64::new(1.0, 0.0) - e * t))
    }

    /// Largest `|p(root)|` relative to the coefficient scale.
    pub fn root_residual(&self) -> f64 {
        let scale = self.coeffs.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        self.roots
            .iter()
            .map(|&e| horner(&self.coeffs, e).norm() / (scale * (1.0 + e.norm()).powi(6)))
            .fold(0.0, f64::max)
    }
}
