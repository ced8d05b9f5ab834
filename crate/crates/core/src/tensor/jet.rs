use super::CurvatureTensor;
use crate::error::{CurvError, Result};
use crate::linalg::{hermitian_eigen, inverse_sqrt_hermitian};
use crate::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

/// Second-order jet of a Hermitian metric `h_{alpha betabar}` at a point.
///
/// `dh[i][(a, b)] = d h_{a bbar} / dz^i` and
/// `ddh[((i*n + j)*r + a)*r + b] = d^2 h_{a bbar} / dz^i dzbar^j`.
#[derive(Clone, Debug)]
pub struct HermitianMetricJet {
    pub n: usize,
    pub r: usize,
    pub h: DMatrix<C64>,
    pub dh: Vec<DMatrix<C64>>,
    pub ddh: Vec<C64>,
}

impl HermitianMetricJet {
    pub fn validate(&self) -> Result<()> {
        let (n, r) = (self.n, self.r);
        if n == 0 || r == 0 {
            return Err(CurvError::InvalidArgument("dimensions must be positive".into()));
        }
        if self.h.shape() != (r, r) || self.dh.len() != n || self.ddh.len() != n * n * r * r {
            return Err(CurvError::InvalidArgument("jet arrays have inconsistent shapes".into()));
        }
        if self.dh.iter().any(|m| m.shape() != (r, r)) {
            return Err(CurvError::InvalidArgument("first derivative has wrong shape".into()));
        }
        let scale = self.h.iter().fold(1.0f64, |m, z| m.max(z.norm()));
        let asym = (&self.h - self.h.adjoint()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if asym > 1e-12 * scale {
            return Err(CurvError::InvalidArgument(format!("metric is not Hermitian (residual {asym:e})")));
        }
        let ev = hermitian_eigen(&self.h).ok_or(CurvError::NotPositiveDefinite(f64::NAN))?;
        let min = ev.values[0];
        if min <= 1e-14 * scale {
            return Err(CurvError::NotPositiveDefinite(min));
        }
        Ok(())
    }

    fn ddh_at(&self, i: usize, j: usize, a: usize, b: usize) -> C64 {
        self.ddh[((i * self.n + j) * self.r + a) * self.r + b]
    }
}

/// Chern curvature of the jet, expressed in a fiber frame that is
/// orthonormal at the point. The base frame is the coordinate frame.
pub fn curvature_from_jet(jet: &HermitianMetricJet) -> Result<CurvatureTensor> {
    jet.validate()?;
    let (n, r) = (jet.n, jet.r);
    let hinv = jet
        .h
        .clone()
        .try_inverse()
        .ok_or(CurvError::NotPositiveDefinite(0.0))?;
    let raw = CurvatureTensor::from_fn(n, r, false, |i, j, a, b| {
        let mut v = -jet.ddh_at(i, j, a, b);
        for g in 0..r {
            for d in 0..r {
                v += hinv[(d, g)] * jet.dh[i][(a, d)] * jet.dh[j][(b, g)].conj();
            }
        }
        v
    });
    let s = inverse_sqrt_hermitian(&jet.h).ok_or(CurvError::NotPositiveDefinite(0.0))?;
    let id = DMatrix::identity(n, n);
    let t = raw.change_frame(&id, &s.transpose())?;
    t.validate(1e-9).map_err(|_| {
        CurvError::InvalidArgument("second derivatives are not Hermitian".into())
    })?;
    Ok(t)
}

#[derive(Clone, Debug)]
pub struct SubbundleCurvature {
    /// Ambient curvature restricted to the subbundle directions.
    pub restricted: CurvatureTensor,
    /// Curvature of the induced metric on the subbundle.
    pub subbundle: CurvatureTensor,
    /// `restricted - subbundle`, a Nakano semi-positive tensor.
    pub correction: CurvatureTensor,
}

/// Curvature of the subbundle spanned by the first `s` frame vectors.
/// The frame must be orthonormal at the point.
pub fn subbundle_curvature(jet: &HermitianMetricJet, s: usize) -> Result<SubbundleCurvature> {
    jet.validate()?;
    let (n, r) = (jet.n, jet.r);
    if s == 0 || s > r {
        return Err(CurvError::InvalidArgument(format!("subbundle rank {s} out of range 1..={r}")));
    }
    let dev = (&jet.h - DMatrix::<C64>::identity(r, r))
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()));
    if dev > 1e-10 {
        return Err(CurvError::NotAdapted(format!("metric deviates from identity by {dev:e}")));
    }
    let full = curvature_from_jet(jet)?;
    let sub = HermitianMetricJet {
        n,
        r: s,
        h: jet.h.view((0, 0), (s, s)).into_owned(),
        dh: jet.dh.iter().map(|m| m.view((0, 0), (s, s)).into_owned()).collect(),
        ddh: {
            let mut v = Vec::with_capacity(n * n * s * s);
            for i in 0..n {
                for j in 0..n {
                    for a in 0..s {
                        for b in 0..s {
                            v.push(jet.ddh_at(i, j, a, b));
                        }
                    }
                }
            }
            v
        },
    };
    let subbundle = curvature_from_jet(&sub)?;
    let restricted = CurvatureTensor::from_fn(n, s, false, |i, j, a, b| full.get(i, j, a, b));
    let correction = restricted.try_add(&subbundle.scaled(-1.0))?;
    Ok(SubbundleCurvature { restricted, subbundle, correction })
}

/// Random jet in an orthonormal frame whose curvature is `target`.
pub fn random_adapted_jet<R: Rng + ?Sized>(target: &CurvatureTensor, rng: &mut R) -> HermitianMetricJet {
    let (n, r) = (target.n(), target.r());
    let mut normal = || C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng));
    let dh: Vec<DMatrix<C64>> = (0..n).map(|_| DMatrix::from_fn(r, r, |_, _| normal())).collect();
    let mut ddh = vec![C64::new(0.0, 0.0); n * n * r * r];
    for i in 0..n {
        for j in 0..n {
            for a in 0..r {
                for b in 0..r {
                    let mut conn = C64::new(0.0, 0.0);
                    for g in 0..r {
                        conn += dh[i][(a, g)] * dh[j][(b, g)].conj();
                    }
                    ddh[((i * n + j) * r + a) * r + b] = conn - target.get(i, j, a, b);
                }
            }
        }
    }
    HermitianMetricJet { n, r, h: DMatrix::identity(r, r), dh, ddh }
}
