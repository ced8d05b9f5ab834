use super::{classify_eigen, implication_audit_with, Budget, Notion};
use crate::error::Result;
use crate::exec::{map_range, substream};
use crate::tensor::{random_kahler_tensor_with, SignClass};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub class: SignClass,
    /// Base dimensions, cycled over the tensors.
    pub dims: Vec<usize>,
    pub count: usize,
    pub budget: Budget,
    /// Negate this notion's verdict before checking chains.
    pub inject_flip: Option<Notion>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignViolation {
    pub index: usize,
    pub n: usize,
    pub label: String,
    pub direction: String,
    pub value: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CampaignResult {
    pub class: SignClass,
    pub tensors: usize,
    pub violations: Vec<CampaignViolation>,
    /// Generated tensors that fail their class's defining inequality.
    pub class_failures: usize,
}

/// Audit `count` random tensors of one class. Tensor `k` is drawn from the
/// substream `(seed, k)`, so results do not depend on scheduling.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<CampaignResult> {
    let dims = if cfg.dims.is_empty() { vec![2, 3] } else { cfg.dims.clone() };
    let per = map_range(cfg.count, |k| -> Result<(Vec<CampaignViolation>, bool)> {
        let n = dims[k % dims.len()];
        let mut rng = substream(cfg.budget.seed, k as u64);
        let t = random_kahler_tensor_with(n, cfg.class, &mut rng);
        let mut budget = cfg.budget.clone();
        budget.seed = cfg.budget.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64 + 1);
        let member = match cfg.class {
            SignClass::Unconstrained => true,
            SignClass::SemiNakanoNegative => classify_eigen(Notion::Nakano, &t, budget.tol)?.nonpositive(budget.tol),
            SignClass::SemiDualNakanoNegative => {
                classify_eigen(Notion::DualNakano, &t, budget.tol)?.nonpositive(budget.tol)
            }
        };
        let report = implication_audit_with(&t, &budget, cfg.inject_flip)?;
        let v = report
            .chain_violations
            .into_iter()
            .map(|c| CampaignViolation { index: k, n, label: c.label, direction: c.direction, value: c.value })
            .collect();
        Ok((v, !member))
    });
    let mut violations = Vec::new();
    let mut class_failures = 0;
    for r in per {
        let (v, fail) = r?;
        violations.extend(v);
        class_failures += usize::from(fail);
    }
    Ok(CampaignResult { class: cfg.class, tensors: cfg.count, violations, class_failures })
}
