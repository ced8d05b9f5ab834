//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

use curvlab::linalg::hermitian_eigen;
use curvlab::positivity::forms::*;
use curvlab::positivity::*;
use curvlab::tensor::*;
use curvlab::wp::{run_pipeline, HyperellipticCurve, WpConfig, WpRun};
use curvlab::{CurvatureTensor, C64};
use rand_distr::{Distribution, StandardNormal};
use std::time::{Duration, Instant};

struct Criterion {
    id: usize,
    title: &'static str,
    limit: Duration,
    facts: Vec<(String, bool)>,
}

impl Criterion {
    fn new(id: usize, title: &'static str, limit_s: u64) -> Self {
        Self { id, title, limit: Duration::from_secs(limit_s), facts: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.facts.push((what.into(), ok));
    }

    fn finish(mut self, elapsed: Duration) -> bool {
        self.check(elapsed <= self.limit, format!("runtime {:.2} s <= {} s", elapsed.as_secs_f64(), self.limit.as_secs()));
        let ok = self.facts.iter().all(|f| f.1);
        println!("criterion {} {} {}", self.id, if ok { "PASS" } else { "FAIL" }, self.title);
        for (what, good) in &self.facts {
            println!("    [{}] {what}", if *good { "ok" } else { "XX" });
        }
        ok
    }
}

fn cvec(rng: &mut impl rand::Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(StandardNormal.sample(rng), StandardNormal.sample(rng))).collect()
}

fn timed(f: impl FnOnce() -> Criterion) -> bool {
    let start = Instant::now();
    let c = f();
    c.finish(start.elapsed())
}

fn models() -> Criterion {
    let mut c = Criterion::new(1, "model classification", 1);
    for n in 1..=3 {
        let kernel = n * (n - 1) / 2;
        let fs = fubini_study(n);
        let dual = classify_eigen(Notion::DualNakano, &fs, 1e-9).unwrap();
        let nak = classify_eigen(Notion::Nakano, &fs, 1e-9).unwrap();
        c.check(
            dual.sign == Sign::Positive && dual.extremal_value > 1e-9,
            format!("fubini_study({n}) dual-Nakano lambda_min {:.3e} > 1e-9", dual.extremal_value),
        );
        c.check(
            nak.nonnegative(1e-9) && nak.kernel_dim == Some(kernel),
            format!("fubini_study({n}) Nakano {} with kernel {:?} (expected {kernel})", nak.sign.name(), nak.kernel_dim),
        );
        let ball = complex_ball(n);
        let bdual = classify_eigen(Notion::DualNakano, &ball, 1e-9).unwrap();
        let bnak = classify_eigen(Notion::Nakano, &ball, 1e-9).unwrap();
        c.check(
            bdual.sign == Sign::Negative && bdual.extremal_value < -1e-9,
            format!("complex_ball({n}) dual-Nakano lambda_max {:.3e} < -1e-9", bdual.extremal_value),
        );
        c.check(
            bnak.nonpositive(1e-9) && bnak.kernel_dim == Some(kernel),
            format!("complex_ball({n}) Nakano {} with kernel {:?}", bnak.sign.name(), bnak.kernel_dim),
        );
    }
    c
}

/// `R(Z, Wbar, W, Zbar)` summed over every component of the complexified
/// tensor on `C^{2n}`, independent of the matrix forms.
fn sectional_by_components(t: &CurvatureTensor, z: &[C64], w: &[C64]) -> f64 {
    let n = t.n();
    let m = 2 * n;
    let mut full = vec![C64::new(0.0, 0.0); m * m * m * m];
    let at = |a: usize, b: usize, c: usize, d: usize| ((a * m + b) * m + c) * m + d;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let v = t.get(i, j, k, l);
                    full[at(i, n + j, k, n + l)] += v;
                    full[at(n + j, i, k, n + l)] -= v;
                    full[at(i, n + j, n + l, k)] -= v;
                    full[at(n + j, i, n + l, k)] += v;
                }
            }
        }
    }
    let bar = |v: &[C64]| -> Vec<C64> { v[n..].iter().chain(&v[..n]).map(|c| c.conj()).collect() };
    let (zb, wb) = (bar(z), bar(w));
    let mut acc = C64::new(0.0, 0.0);
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for d in 0..m {
                    acc += full[at(a, b, c, d)] * z[a] * wb[b] * w[c] * zb[d];
                }
            }
        }
    }
    acc.re
}

fn siu_identity() -> Criterion {
    let mut c = Criterion::new(2, "Siu form equals complex sectional curvature", 10);
    let mut rng = curvlab::exec::substream(2, 0);
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let n = 2 + k % 2;
        let t = random_kahler_tensor_with(n, SignClass::ALL[k % 3], &mut rng);
        let (a, b, cc, d) = (cvec(&mut rng, n), cvec(&mut rng, n), cvec(&mut rng, n), cvec(&mut rng, n));
        let siu = siu_value(&t, &a, &b, &cc, &d);
        let z: Vec<C64> = a.iter().copied().chain(d.iter().map(|x| x.conj())).collect();
        let w: Vec<C64> = b.iter().copied().chain(cc.iter().map(|x| x.conj())).collect();
        let cs = sectional_by_components(&t, &z, &w);
        let direct = complex_sectional_value(&t, &z, &w);
        let scale = siu.abs().max(cs.abs()).max(direct.abs()).max(f64::MIN_POSITIVE);
        worst = worst.max((siu - cs).abs() / scale).max((direct - cs).abs() / scale);
    }
    c.check(worst < 1e-12, format!("1000 tensors, max relative residual {worst:.2e} < 1e-12"));
    c
}

fn operator_bridge() -> Criterion {
    let mut c = Criterion::new(3, "curvature-operator bridge", 60);
    let mut rng = curvlab::exec::substream(3, 0);
    let mut top = f64::NEG_INFINITY;
    let mut route = 0.0f64;
    for k in 0..1000 {
        let n = 2 + k % 2;
        let t = random_kahler_tensor_with(n, SignClass::SemiDualNakanoNegative, &mut rng);
        let q = curvature_operator_matrix(&t).unwrap();
        let ev = q.clone().symmetric_eigenvalues();
        top = top.max(ev.max());
        let dim = q.nrows();
        for _ in 0..3 {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
            let quad: f64 = (0..dim).map(|p| (0..dim).map(|r| q[(p, r)] * v[p] * v[r]).sum::<f64>()).sum();
            let direct = curvature_operator_value(&t, &v);
            let norm2: f64 = v.iter().map(|x| x * x).sum();
            route = route.max((quad - direct).abs() / norm2.max(1.0));
        }
    }
    c.check(top <= 1e-9, format!("1000 tensors, max lambda_max {top:.2e} <= 1e-9"));
    c.check(route <= 1e-12, format!("matrix and direct evaluation differ by {route:.2e} <= 1e-12"));
    c
}

fn chain_audit() -> Criterion {
    let mut c = Criterion::new(4, "implication-chain audit", 600);
    for (k, class) in SignClass::ALL.into_iter().enumerate() {
        let cfg = CampaignConfig {
            class,
            dims: vec![2, 3],
            count: 1000,
            budget: Budget { tol: 1e-9, samples: 10_000, restarts: 20, seed: 40 + k as u64, ..Budget::default() },
            inject_flip: None,
        };
        let started = Instant::now();
        let r = run_campaign(&cfg).unwrap();
        c.check(
            r.violations.is_empty() && r.class_failures == 0 && r.tensors == 1000,
            format!(
                "{}: {} tensors, {} violations, {} class failures ({:.1} s)",
                class.name(),
                r.tensors,
                r.violations.len(),
                r.class_failures,
                started.elapsed().as_secs_f64()
            ),
        );
    }
    c
}

fn wp_run(level: usize, dense: bool) -> WpRun {
    let cfg = WpConfig { level, dense_checks: dense, ..WpConfig::default() };
    run_pipeline(&HyperellipticCurve::x6_minus_1(), &cfg).unwrap()
}

fn wp_pipeline(l3: &WpRun) -> Criterion {
    let mut c = Criterion::new(5, "Weil-Petersson pipeline for y^2 = x^6 - 1", 900);
    let m = &l3.manifest;
    let l = &m.liouville;
    c.check(l.area_error < 5e-3, format!("area {:.6} vs 4 pi, error {:.3}% < 0.5%", l.heron_area, 100.0 * l.area_error));
    c.check(l.residual < 1e-8, format!("Liouville residual {:.2e} < 1e-8", l.residual));
    let asym = m.green.kernel_asymmetry.unwrap_or(f64::INFINITY);
    let min = m.green.kernel_min.unwrap_or(f64::NEG_INFINITY);
    c.check(asym < 1e-10, format!("Green kernel asymmetry {asym:.2e} < 1e-10"));
    c.check(min > 0.0, format!("Green kernel minimum {min:.3e} > 0"));
    c.check(
        m.basis.gram_identity_residual < 1e-10,
        format!("Hodge = WP Gram residual {:.2e} < 1e-10", m.basis.gram_identity_residual),
    );
    let nak = m.cotangent_report.verdict(Notion::Nakano).unwrap();
    c.check(
        nak.sign == Sign::Positive && nak.certified,
        format!("cotangent Nakano {} (certified {}, lambda_min {:.4e})", nak.sign.name(), nak.certified, nak.extremal_value),
    );
    let bound = -1e-3 * l3.cotangent_orthonormal.max_norm();
    c.check(
        m.cotangent_dual_nakano_min >= bound,
        format!("cotangent dual-Nakano lambda_min {:.2e} >= {bound:.2e}", m.cotangent_dual_nakano_min),
    );
    let worst = m.identity_checks.iter().map(|i| i.relative_residual).fold(0.0, f64::max);
    c.check(
        m.identity_checks.len() == 20 && worst < 1e-6,
        format!("symmetrization identity over {} samples, worst {worst:.2e} < 1e-6", m.identity_checks.len()),
    );
    for level in [2, 4] {
        let started = Instant::now();
        let other = wp_run(level, level <= 3);
        c.check(
            other.manifest.signs == m.signs,
            format!("level {level} verdicts {:?} equal level 3 ({:.1} s)", other.manifest.signs, started.elapsed().as_secs_f64()),
        );
    }
    c.check(m.matches_expected_signs, "level 3 verdicts match the expected signs");
    c
}

fn subbundles() -> Criterion {
    let mut c = Criterion::new(6, "subbundle monotonicity", 30);
    let mut rng = curvlab::exec::substream(6, 0);
    let (mut fails, mut corr) = (0usize, f64::INFINITY);
    for k in 0..1000 {
        let (n, r) = (1 + k % 3, 2 + k % 3);
        let ambient = random_bundle_tensor(n, r, SignClass::SemiNakanoNegative, &mut rng);
        let jet = random_adapted_jet(&ambient, &mut rng);
        let s = 1 + k % (r - 1);
        let sub = subbundle_curvature(&jet, s).unwrap();
        let v = classify_eigen(Notion::Nakano, &sub.subbundle, 1e-9).unwrap();
        if !(v.certified && v.nonpositive(1e-9)) {
            fails += 1;
        }
        let ev = hermitian_eigen(&nakano_matrix(&sub.correction)).unwrap();
        corr = corr.min(ev.values[0]);
    }
    c.check(fails == 0, format!("1000 jets, {fails} subbundle tensors not certified semi-Nakano-negative"));
    c.check(corr >= -1e-12, format!("correction Nakano lambda_min {corr:.2e} >= -1e-12"));
    c
}

fn duality(l3: &WpRun) -> Criterion {
    let mut c = Criterion::new(7, "tangent and cotangent duality", 900);
    let m = &l3.manifest;
    let d = m.tensor_checks.duality_residual;
    c.check(d < 1e-4, format!("relative duality residual {d:.2e} < 1e-4"));
    c.check(
        m.tangent_bisectional_max < 0.0,
        format!("tangent holomorphic bisectional maximum {:.4e} < 0", m.tangent_bisectional_max),
    );
    c
}

fn main() {
    let mut ok = true;
    ok &= timed(models);
    ok &= timed(siu_identity);
    ok &= timed(operator_bridge);
    ok &= timed(chain_audit);
    let started = Instant::now();
    let l3 = wp_run(3, true);
    let base = started.elapsed();
    println!("(level 3 pipeline {:.1} s)", base.as_secs_f64());
    let t5 = Instant::now();
    ok &= wp_pipeline(&l3).finish(base + t5.elapsed());
    ok &= timed(subbundles);
    ok &= duality(&l3).finish(base);
    if !ok {
        std::process::exit(1);
    }
}
