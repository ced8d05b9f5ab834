//! Positivity notions for curvature tensors and the implications between
//! them.
//!
//! Nakano, dual-Nakano and the curvature operator are Hermitian (or real
//! symmetric) forms and are decided by eigenvalues. The remaining notions are
//! extremized by multistart sampling on products of spheres; a sampled
//! verdict certifies a sign violation through its witness but cannot prove a
//! sign.

mod audit;
pub mod forms;
mod report;
pub mod search;

pub use audit::{run_campaign, CampaignConfig, CampaignResult, CampaignViolation};
pub use report::{ChainViolation, ClassificationReport};

use crate::error::{CurvError, Result};
use crate::linalg::{hermitian_eigen, norm_sqr, symmetric_eigen};
use crate::tensor::CurvatureTensor;
use crate::C64;
use forms::{bivector_basis, curvature_operator_matrix, dual_nakano_matrix, g_orthonormal_frame, isotropic_matrix, nakano_matrix};
use nalgebra::DMatrix;
use search::{refine, sample_extremes, SearchOptions, SphereProduct};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Notion {
    Griffiths,
    Nakano,
    DualNakano,
    CurvatureOperator,
    SiuStrong,
    ComplexSectional,
    RiemannianSectional,
    HolomorphicBisectional,
    Isotropic,
}

impl Notion {
    pub const ALL: [Notion; 9] = [
        Notion::Griffiths,
        Notion::Nakano,
        Notion::DualNakano,
        Notion::CurvatureOperator,
        Notion::SiuStrong,
        Notion::ComplexSectional,
        Notion::RiemannianSectional,
        Notion::HolomorphicBisectional,
        Notion::Isotropic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Notion::Griffiths => "griffiths",
            Notion::Nakano => "nakano",
            Notion::DualNakano => "dual-nakano",
            Notion::CurvatureOperator => "curvature-operator",
            Notion::SiuStrong => "siu-strong",
            Notion::ComplexSectional => "complex-sectional",
            Notion::RiemannianSectional => "riemannian-sectional",
            Notion::HolomorphicBisectional => "holomorphic-bisectional",
            Notion::Isotropic => "isotropic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|n| n.name() == s)
    }

    /// Decided exactly by an eigenvalue computation.
    pub fn is_certified(self) -> bool {
        matches!(self, Notion::Nakano | Notion::DualNakano | Notion::CurvatureOperator)
    }

    /// Meaningful only for tensors with Kähler symmetry.
    pub fn needs_kahler(self) -> bool {
        !matches!(self, Notion::Griffiths | Notion::Nakano | Notion::DualNakano)
    }

    fn stream(self) -> u64 {
        Self::ALL.iter().position(|&n| n == self).unwrap() as u64 + 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sign {
    Positive,
    Nonnegative,
    Nonpositive,
    Negative,
    Indefinite,
    Undetermined,
}

impl Sign {
    pub fn name(self) -> &'static str {
        match self {
            Sign::Positive => "positive",
            Sign::Nonnegative => "nonnegative",
            Sign::Nonpositive => "nonpositive",
            Sign::Negative => "negative",
            Sign::Indefinite => "indefinite",
            Sign::Undetermined => "undetermined",
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Extreme {
    pub value: f64,
    pub witness: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NotionVerdict {
    pub notion: Notion,
    pub sign: Sign,
    /// True when the sign is proven by an eigenvalue computation.
    pub certified: bool,
    /// The extreme value on the side that could violate the reported sign.
    pub extremal_value: f64,
    pub witness: Vec<C64>,
    pub lower: Option<Extreme>,
    pub upper: Option<Extreme>,
    /// Number of eigenvalues within `tol` of zero (certified notions only).
    pub kernel_dim: Option<usize>,
    /// Both semi-definite: the form vanishes to within `tol`.
    pub both_semi: bool,
}

impl NotionVerdict {
    pub fn nonpositive(&self, tol: f64) -> bool {
        self.upper.as_ref().is_some_and(|u| u.value <= tol)
    }
    pub fn nonnegative(&self, tol: f64) -> bool {
        self.lower.as_ref().is_some_and(|l| l.value >= -tol)
    }

    fn from_extremes(notion: Notion, certified: bool, lower: Extreme, upper: Extreme, tol: f64, kernel_dim: Option<usize>) -> Self {
        let (lo, hi) = (lower.value, upper.value);
        let both_semi = lo >= -tol && hi <= tol;
        let sign = if lo > tol {
            Sign::Positive
        } else if hi < -tol {
            Sign::Negative
        } else if lo >= -tol {
            Sign::Nonnegative
        } else if hi <= tol {
            Sign::Nonpositive
        } else {
            Sign::Indefinite
        };
        let pick = match sign {
            Sign::Positive | Sign::Nonnegative => &lower,
            _ => &upper,
        };
        Self {
            notion,
            sign,
            certified,
            extremal_value: pick.value,
            witness: pick.witness.clone(),
            lower: Some(lower),
            upper: Some(upper),
            kernel_dim,
            both_semi,
        }
    }

    fn undetermined(notion: Notion) -> Self {
        Self {
            notion,
            sign: Sign::Undetermined,
            certified: false,
            extremal_value: f64::NAN,
            witness: Vec::new(),
            lower: None,
            upper: None,
            kernel_dim: None,
            both_semi: false,
        }
    }

    /// The verdict of the negated form.
    pub fn negated(&self, tol: f64) -> Self {
        match (&self.lower, &self.upper) {
            (Some(l), Some(u)) => {
                let lower = Extreme { value: -u.value, witness: u.witness.clone() };
                let upper = Extreme { value: -l.value, witness: l.witness.clone() };
                Self::from_extremes(self.notion, self.certified, lower, upper, tol, self.kernel_dim)
            }
            _ => self.clone(),
        }
    }
}

/// Sampling budget and sign tolerance.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Budget {
    pub tol: f64,
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
    pub max_iter: usize,
    pub grad_tol: f64,
}

impl Default for Budget {
    fn default() -> Self {
        Self { tol: 1e-9, samples: 10_000, restarts: 20, seed: 0, max_iter: 200, grad_tol: 1e-8 }
    }
}

fn check_applicable(notion: Notion, t: &CurvatureTensor) -> Result<()> {
    if notion.needs_kahler() && !t.is_kahler() {
        return Err(CurvError::NotKahler(notion.name()));
    }
    Ok(())
}

/// Eigenvalue verdict for Nakano, dual-Nakano or the curvature operator.
pub fn classify_eigen(notion: Notion, t: &CurvatureTensor, tol: f64) -> Result<NotionVerdict> {
    check_applicable(notion, t)?;
    let complex = |m: DMatrix<C64>| {
        hermitian_eigen(&m).map(|e| {
            let col = |k: usize| e.vectors.column(k).iter().map(|z| z.conj()).collect::<Vec<_>>();
            (e.values.clone(), col(0), col(e.values.len() - 1))
        })
    };
    let found = match notion {
        Notion::Nakano => complex(nakano_matrix(t)),
        Notion::DualNakano => complex(dual_nakano_matrix(t)),
        Notion::CurvatureOperator => symmetric_eigen(&curvature_operator_matrix(t)?).map(|(vals, vecs)| {
            let col = |k: usize| vecs.column(k).iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>();
            let last = vals.len() - 1;
            (vals, col(0), col(last))
        }),
        _ => {
            return Err(CurvError::InvalidArgument(format!("{} is not an eigenvalue notion", notion.name())));
        }
    };
    let Some((vals, lo_vec, hi_vec)) = found else {
        return Ok(NotionVerdict::undetermined(notion));
    };
    let kernel = vals.iter().filter(|v| v.abs() <= tol).count();
    let lower = Extreme { value: vals[0], witness: lo_vec };
    let upper = Extreme { value: *vals.last().unwrap(), witness: hi_vec };
    Ok(NotionVerdict::from_extremes(notion, true, lower, upper, tol, Some(kernel)))
}

/// Objective of a sampled notion on its sphere product, together with the
/// maps between sphere points and witnesses.
pub struct SampledObjective {
    pub notion: Notion,
    pub space: SphereProduct,
    n: usize,
    r: usize,
    /// Row-major Nakano or dual-Nakano matrix.
    form: Vec<C64>,
    dim: usize,
}

fn complex_block(x: &[f64]) -> impl Iterator<Item = C64> + '_ {
    x.chunks_exact(2).map(|p| C64::new(p[0], p[1]))
}

impl SampledObjective {
    pub fn new(notion: Notion, t: &CurvatureTensor) -> Result<Self> {
        check_applicable(notion, t)?;
        let (n, r) = (t.n(), t.r());
        let (blocks, m) = match notion {
            Notion::Griffiths => (vec![2 * n, 2 * r], nakano_matrix(t)),
            Notion::HolomorphicBisectional => (vec![2 * n, 2 * n], nakano_matrix(t)),
            Notion::ComplexSectional => (vec![4 * n, 4 * n], dual_nakano_matrix(t)),
            Notion::SiuStrong => (vec![8 * n], dual_nakano_matrix(t)),
            Notion::RiemannianSectional => (vec![2 * n, 2 * n], dual_nakano_matrix(t)),
            Notion::Isotropic => (vec![2 * n; 4], dual_nakano_matrix(t)),
            _ => {
                return Err(CurvError::InvalidArgument(format!("{} is not a sampled notion", notion.name())));
            }
        };
        let dim = m.nrows();
        if dim > 64 {
            return Err(CurvError::InvalidArgument(format!("sampled notions support n*r <= 64, got {dim}")));
        }
        let form = (0..dim * dim).map(|k| m[(k / dim, k % dim)]).collect();
        Ok(Self { notion, space: SphereProduct::new(blocks), n, r, form, dim })
    }

    fn quad(&self, u: &[C64]) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for x in 0..d {
            let row = &self.form[x * d..(x + 1) * d];
            let mut s = C64::new(0.0, 0.0);
            for (m, uy) in row.iter().zip(u) {
                s += m * uy.conj();
            }
            acc += (s * u[x]).re;
        }
        acc
    }

    /// Value at a point of the sphere product. Homogeneous, so the radial
    /// part of numerical gradients is harmless.
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let mut u = [C64::new(0.0, 0.0); 64];
        let u = &mut u[..self.dim];
        match self.notion {
            Notion::Griffiths | Notion::HolomorphicBisectional => {
                let (a, b) = x.split_at(2 * n);
                let v: Vec<C64> = complex_block(b).collect();
                for (i, ui) in complex_block(a).enumerate() {
                    for (al, va) in v.iter().enumerate() {
                        u[i * self.r + al] = ui * va;
                    }
                }
            }
            Notion::ComplexSectional => {
                let z: Vec<C64> = complex_block(&x[..4 * n]).collect();
                let w: Vec<C64> = complex_block(&x[4 * n..]).collect();
                for i in 0..n {
                    for j in 0..n {
                        u[i * n + j] = z[i] * w[j].conj() - z[n + j] * w[n + i].conj();
                    }
                }
            }
            Notion::SiuStrong => {
                let v: Vec<C64> = complex_block(x).collect();
                let (a, b, c, d) = (&v[..n], &v[n..2 * n], &v[2 * n..3 * n], &v[3 * n..]);
                for i in 0..n {
                    for j in 0..n {
                        u[i * n + j] = a[i] * b[j].conj() - c[i] * d[j].conj();
                    }
                }
            }
            Notion::RiemannianSectional => {
                let (p, q) = x.split_at(2 * n);
                let (pp, qq) = (dot(p, p), dot(q, q));
                let pq = dot(p, q);
                let area = pp * qq - pq * pq;
                if !(area > 1e-20 * pp * qq) {
                    return f64::NAN;
                }
                for i in 0..n {
                    let xi = C64::new(p[i], p[n + i]);
                    let yi = C64::new(q[i], q[n + i]);
                    for j in 0..n {
                        let xj = C64::new(p[j], p[n + j]);
                        let yj = C64::new(q[j], q[n + j]);
                        u[i * n + j] = xi * yj.conj() - xj.conj() * yi;
                    }
                }
                return self.quad(u) / (4.0 * area);
            }
            Notion::Isotropic => {
                let Some(e) = g_orthonormal_frame(x, 2 * n) else {
                    return f64::NAN;
                };
                u.copy_from_slice(&isotropic_matrix(n, &e));
            }
            _ => unreachable!(),
        }
        self.quad(u)
    }

    pub fn witness(&self, x: &[f64]) -> Vec<C64> {
        match self.notion {
            Notion::RiemannianSectional => x.iter().map(|&v| C64::new(v, 0.0)).collect(),
            Notion::Isotropic => g_orthonormal_frame(x, 2 * self.n)
                .unwrap_or_else(|| x.to_vec())
                .into_iter()
                .map(|v| C64::new(v, 0.0))
                .collect(),
            _ => complex_block(x).collect::<Vec<_>>(),
        }
    }

    pub fn point(&self, witness: &[C64]) -> Option<Vec<f64>> {
        let mut x: Vec<f64> = match self.notion {
            Notion::RiemannianSectional | Notion::Isotropic => witness.iter().map(|z| z.re).collect(),
            _ => witness.iter().flat_map(|z| [z.re, z.im]).collect(),
        };
        if x.len() != self.space.dim() {
            return None;
        }
        self.space.retract(&mut x);
        Some(x)
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Sampled verdict: random sampling, then projected-gradient refinement of
/// the directions that could still change the verdict.
pub fn classify_sampled(notion: Notion, t: &CurvatureTensor, budget: &Budget) -> Result<NotionVerdict> {
    if budget.samples == 0 {
        return Err(CurvError::InvalidArgument("sample budget must be positive".into()));
    }
    let obj = SampledObjective::new(notion, t)?;
    let opts = SearchOptions {
        samples: budget.samples,
        restarts: budget.restarts,
        seed: budget.seed,
        stream: notion.stream(),
        max_iter: budget.max_iter,
        grad_tol: budget.grad_tol,
        ..SearchOptions::default()
    };
    let f = |x: &[f64]| obj.value(x);
    let ext = sample_extremes(&obj.space, &f, &opts);
    let (Some(lo0), Some(hi0)) = (ext.lowest.first(), ext.highest.first()) else {
        return Ok(NotionVerdict::undetermined(notion));
    };
    let mut lo = lo0.clone();
    let mut hi = hi0.clone();
    let tol = budget.tol;
    if budget.restarts > 0 && lo.value >= -tol {
        if let Some(c) = refine(&obj.space, &f, &ext.lowest, false, &opts) {
            if c.value < lo.value {
                lo = c;
            }
        }
    }
    if budget.restarts > 0 && hi.value <= tol {
        if let Some(c) = refine(&obj.space, &f, &ext.highest, true, &opts) {
            if c.value > hi.value {
                hi = c;
            }
        }
    }
    let lower = Extreme { value: lo.value, witness: obj.witness(&lo.point) };
    let upper = Extreme { value: hi.value, witness: obj.witness(&hi.point) };
    Ok(NotionVerdict::from_extremes(notion, false, lower, upper, tol, None))
}

pub fn classify(notion: Notion, t: &CurvatureTensor, budget: &Budget) -> Result<NotionVerdict> {
    if notion.is_certified() {
        classify_eigen(notion, t, budget.tol)
    } else {
        classify_sampled(notion, t, budget)
    }
}

/// Normalized value of a notion at a witness in the layout used by verdicts.
pub fn evaluate(notion: Notion, t: &CurvatureTensor, witness: &[C64]) -> Result<f64> {
    check_applicable(notion, t)?;
    match notion {
        Notion::Nakano | Notion::DualNakano => {
            if witness.len() != t.n() * t.r() {
                return Err(CurvError::InvalidArgument("witness has wrong length".into()));
            }
            let m = if notion == Notion::Nakano { nakano_matrix(t) } else { dual_nakano_matrix(t) };
            Ok(crate::linalg::hermitian_form(&m, witness) / norm_sqr(witness))
        }
        Notion::CurvatureOperator => {
            let v: Vec<f64> = witness.iter().map(|z| z.re).collect();
            if v.len() != bivector_basis(t.n()).len() {
                return Err(CurvError::InvalidArgument("witness has wrong length".into()));
            }
            Ok(forms::curvature_operator_value(t, &v) / dot(&v, &v))
        }
        _ => {
            let obj = SampledObjective::new(notion, t)?;
            let x = obj
                .point(witness)
                .ok_or_else(|| CurvError::InvalidArgument("witness has wrong length".into()))?;
            Ok(obj.value(&x))
        }
    }
}

/// Notions that apply to `t`, in reporting order.
pub fn applicable_notions(t: &CurvatureTensor) -> Vec<Notion> {
    Notion::ALL.into_iter().filter(|n| t.is_kahler() || !n.needs_kahler()).collect()
}

/// Classify every applicable notion and check the implication chains.
pub fn implication_audit(t: &CurvatureTensor, budget: &Budget) -> Result<ClassificationReport> {
    implication_audit_with(t, budget, None)
}

/// As [`implication_audit`]; `flip` negates one verdict before the chains
/// are checked, which must surface as a violation.
pub fn implication_audit_with(t: &CurvatureTensor, budget: &Budget, flip: Option<Notion>) -> Result<ClassificationReport> {
    let mut verdicts = Vec::new();
    for notion in applicable_notions(t) {
        let mut v = classify(notion, t, budget)?;
        if flip == Some(notion) {
            v = v.negated(budget.tol);
        }
        verdicts.push(v);
    }
    Ok(ClassificationReport::new(t, budget, verdicts))
}
