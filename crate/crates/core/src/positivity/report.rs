use super::{Budget, Notion, NotionVerdict};
use crate::tensor::CurvatureTensor;
use crate::C64;
use serde::{Deserialize, Serialize};
use std::fmt::Write;

/// Implications between semi-negativity notions; the same implications hold
/// for semi-positivity.
const CHAINS: [(&str, Notion, Notion); 7] = [
    ("2=>3", Notion::DualNakano, Notion::CurvatureOperator),
    ("3=>5", Notion::CurvatureOperator, Notion::ComplexSectional),
    ("4<=>5", Notion::SiuStrong, Notion::ComplexSectional),
    ("4<=>5", Notion::ComplexSectional, Notion::SiuStrong),
    ("5=>6", Notion::ComplexSectional, Notion::RiemannianSectional),
    ("6=>7", Notion::RiemannianSectional, Notion::HolomorphicBisectional),
    ("5=>8", Notion::ComplexSectional, Notion::Isotropic),
];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChainViolation {
    pub label: String,
    /// `nonpositive` or `nonnegative`.
    pub direction: String,
    pub premise: Notion,
    pub conclusion: Notion,
    /// Value of the conclusion notion that breaks the implication.
    pub value: f64,
    pub witness: Vec<C64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub n: usize,
    pub r: usize,
    pub kahler: bool,
    pub tol: f64,
    pub samples: usize,
    pub restarts: usize,
    pub seed: u64,
    pub verdicts: Vec<NotionVerdict>,
    pub chain_violations: Vec<ChainViolation>,
    /// Ratio of the sampled extremes of Riemannian sectional curvature when
    /// both have the same strict sign (1/4 means weakly quarter-pinched).
    pub sectional_pinching: Option<f64>,
}

impl ClassificationReport {
    pub fn new(t: &CurvatureTensor, budget: &Budget, verdicts: Vec<NotionVerdict>) -> Self {
        let chain_violations = check_chains(&verdicts, budget.tol);
        let sectional_pinching = verdicts
            .iter()
            .find(|v| v.notion == Notion::RiemannianSectional)
            .and_then(|v| match (&v.lower, &v.upper) {
                (Some(l), Some(u)) if u.value < -budget.tol => Some(u.value / l.value),
                (Some(l), Some(u)) if l.value > budget.tol => Some(l.value / u.value),
                _ => None,
            });
        Self {
            n: t.n(),
            r: t.r(),
            kahler: t.is_kahler(),
            tol: budget.tol,
            samples: budget.samples,
            restarts: budget.restarts,
            seed: budget.seed,
            verdicts,
            chain_violations,
            sectional_pinching,
        }
    }

    pub fn verdict(&self, notion: Notion) -> Option<&NotionVerdict> {
        self.verdicts.iter().find(|v| v.notion == notion)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "tensor n={} r={} kahler={} tol={:e} samples={} restarts={} seed={}",
            self.n, self.r, self.kahler, self.tol, self.samples, self.restarts, self.seed
        );
        let _ = writeln!(s, "{:<24} {:<13} {:<9} {:>24}  kernel", "notion", "sign", "certified", "extremal");
        for v in &self.verdicts {
            let kernel = v.kernel_dim.map(|k| k.to_string()).unwrap_or_else(|| "-".into());
            let _ = writeln!(
                s,
                "{:<24} {:<13} {:<9} {:>24.16e}  {}{}",
                v.notion.name(),
                v.sign.name(),
                v.certified,
                v.extremal_value,
                kernel,
                if v.both_semi { "  (vanishes)" } else { "" }
            );
        }
        if let Some(p) = self.sectional_pinching {
            let _ = writeln!(s, "sectional pinching ratio {p:.6}");
        }
        if self.chain_violations.is_empty() {
            let _ = writeln!(s, "chain violations: none");
        } else {
            for c in &self.chain_violations {
                let _ = writeln!(
                    s,
                    "chain violation {} ({}): {} holds but {} reaches {:.6e}",
                    c.label,
                    c.direction,
                    c.premise.name(),
                    c.conclusion.name(),
                    c.value
                );
            }
        }
        s
    }
}

pub fn check_chains(verdicts: &[NotionVerdict], tol: f64) -> Vec<ChainViolation> {
    let find = |n: Notion| verdicts.iter().find(|v| v.notion == n);
    let mut out = Vec::new();
    for (label, p, c) in CHAINS {
        let (Some(pv), Some(cv)) = (find(p), find(c)) else { continue };
        if pv.nonpositive(tol) && !cv.nonpositive(tol) {
            if let Some(u) = &cv.upper {
                out.push(ChainViolation {
                    label: label.into(),
                    direction: "nonpositive".into(),
                    premise: p,
                    conclusion: c,
                    value: u.value,
                    witness: u.witness.clone(),
                });
            }
        }
        if pv.nonnegative(tol) && !cv.nonnegative(tol) {
            if let Some(l) = &cv.lower {
                out.push(ChainViolation {
                    label: label.into(),
                    direction: "nonnegative".into(),
                    premise: p,
                    conclusion: c,
                    value: l.value,
                    witness: l.witness.clone(),
                });
            }
        }
    }
    out
}
