//! `curvlab`: batch front end for tensor files, classification, fuzz audits
//! and the Weil-Petersson pipeline.
//!
//! Exit codes: 0 success, 1 verdict mismatch or chain violation, 2 input error.

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use curvlab::positivity::{implication_audit, run_campaign, Budget, CampaignConfig, Notion};
use curvlab::tensor::{
    complex_ball, flat, fubini_study, random_kahler_tensor, read_tensor, write_tensor_json, write_tensor_text,
    SignClass,
};
use curvlab::wp::{run_pipeline, HyperellipticCurve, WpConfig};
use curvlab::{CurvatureTensor, C64};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "curvlab", version, about = "Curvature positivity classifier and Weil-Petersson curvature pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
struct Common {
    /// Semidefinite band: absolute for tensors, relative to the max-norm for `wp`.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, global = true, default_value_t = 20)]
    restarts: usize,
    /// Master seed; every random draw uses a substream of it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads.
    #[arg(long, global = true, env = "CURVLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug, Clone, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
enum Command {
    /// Emit a model tensor file.
    Models {
        /// fubini_study, complex_ball, flat or random.
        name: String,
        #[arg(short, long, default_value_t = 2)]
        n: usize,
        /// Sign class for `random`.
        #[arg(long)]
        class: Option<String>,
    },
    /// Classify a tensor file under every applicable notion.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Fuzz the implication chains over random tensors of one sign class.
    Audit {
        #[arg(long, default_value_t = 100)]
        count: usize,
        /// Base dimensions, cycled over the tensors.
        #[arg(short, long, value_delimiter = ',', default_value = "2")]
        n: Vec<usize>,
        #[arg(long, default_value = "semi-dual-nakano-negative")]
        class: String,
        #[arg(long, hide = true)]
        inject_flip: Option<String>,
    },
    /// Weil-Petersson curvature of a genus-2 curve y^2 = c0 + c1 x + ... + c6 x^6.
    Wp {
        /// Seven complex coefficients `c0,...,c6` (`re` or `re+imi`), or fourteen reals as pairs.
        #[arg(long, default_value = "-1,0,0,0,0,0,1", allow_hyphen_values = true)]
        curve: String,
        #[arg(long, default_value_t = 3)]
        refine: usize,
        /// Dense Green-kernel checks; default on up to refinement 3.
        #[arg(long)]
        dense_checks: Option<bool>,
    },
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    config_hash: String,
    seed: u64,
    /// Substream policy for replaying random draws.
    seeding: &'static str,
}

#[derive(Serialize)]
struct RunConfig {
    command: Command,
    tol: f64,
    samples: usize,
    restarts: usize,
    seed: u64,
}

impl RunConfig {
    fn manifest(&self) -> Manifest<'_> {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        let digest = Sha256::digest(&bytes);
        let config_hash = digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Manifest {
            tool: "curvlab",
            version: env!("CARGO_PKG_VERSION"),
            config: self,
            config_hash,
            seed: self.seed,
            seeding: "ChaCha8 substream (seed, index); tensor k of an audit uses index k",
        }
    }

    fn budget(&self) -> Budget {
        Budget { tol: self.tol, samples: self.samples, restarts: self.restarts, seed: self.seed, ..Budget::default() }
    }
}

enum Failure {
    Input(anyhow::Error),
    Mismatch(String),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.common.threads {
        if t > 0 {
            curvlab::exec::init_threads(t);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let c = &cli.common;
    let default_tol = if matches!(cli.command, Command::Wp { .. }) { 1e-3 } else { 1e-9 };
    let tol = c.tol.unwrap_or(default_tol);
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(anyhow!("--tol must be positive, got {tol}").into());
    }
    if c.samples == 0 || c.restarts == 0 {
        return Err(anyhow!("--samples and --restarts must be at least 1").into());
    }
    let cfg = RunConfig { command: cli.command.clone(), tol, samples: c.samples, restarts: c.restarts, seed: c.seed };
    match &cli.command {
        Command::Models { name, n, class } => cmd_models(&cfg, c, name, *n, class.as_deref()),
        Command::Classify { input } => cmd_classify(&cfg, c, input),
        Command::Audit { count, n, class, inject_flip } => cmd_audit(&cfg, c, *count, n, class, inject_flip.as_deref()),
        Command::Wp { curve, refine, dense_checks } => cmd_wp(&cfg, c, curve, *refine, *dense_checks),
    }
}

fn emit(common: &Common, body: &str) -> Result<(), Failure> {
    match &common.out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{body}"),
    }
    Ok(())
}

fn tensor_body(t: &CurvatureTensor, format: Format) -> String {
    match format {
        Format::Text => write_tensor_text(t),
        Format::Structured => write_tensor_json(t),
    }
}

fn cmd_models(cfg: &RunConfig, common: &Common, name: &str, n: usize, class: Option<&str>) -> Result<(), Failure> {
    if n == 0 || n > 64 {
        bail_input(format!("dimension must be in 1..=64, got {n}"))?;
    }
    let t = match name {
        "fubini_study" => fubini_study(n),
        "complex_ball" => complex_ball(n),
        "flat" => flat(n),
        "random" => {
            let class = class.ok_or_else(|| anyhow!("`random` needs --class"))?;
            let class = parse_class(class)?;
            random_kahler_tensor(n, class, cfg.seed)
        }
        other => bail_input(format!("unknown model `{other}` (fubini_study, complex_ball, flat, random)"))?,
    };
    t.validate(curvlab::tensor::SYMMETRY_TOL)?;
    emit(common, &tensor_body(&t, common.format))
}

fn bail_input<T>(msg: String) -> Result<T, Failure> {
    Err(Failure::Input(anyhow!(msg)))
}

fn parse_class(s: &str) -> anyhow::Result<SignClass> {
    SignClass::parse(s).ok_or_else(|| {
        let names: Vec<&str> = SignClass::ALL.iter().map(|c| c.name()).collect();
        anyhow!("unknown sign class `{s}` (expected one of {})", names.join(", "))
    })
}

#[derive(Serialize)]
struct ClassifyOutput<'a> {
    manifest: Manifest<'a>,
    report: &'a curvlab::positivity::ClassificationReport,
}

fn cmd_classify(cfg: &RunConfig, common: &Common, input: &Path) -> Result<(), Failure> {
    let t = read_tensor(input).with_context(|| format!("reading {}", input.display()))?;
    let report = implication_audit(&t, &cfg.budget())?;
    let body = match common.format {
        Format::Text => report.to_text(),
        Format::Structured => json(&ClassifyOutput { manifest: cfg.manifest(), report: &report })?,
    };
    emit(common, &body)?;
    if report.chain_violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} chain violation(s)", report.chain_violations.len())))
    }
}

fn json<T: Serialize>(v: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct AuditOutput<'a> {
    manifest: Manifest<'a>,
    result: &'a curvlab::positivity::CampaignResult,
}

fn cmd_audit(
    cfg: &RunConfig,
    common: &Common,
    count: usize,
    dims: &[usize],
    class: &str,
    inject: Option<&str>,
) -> Result<(), Failure> {
    let class = parse_class(class)?;
    if dims.iter().any(|&n| n == 0 || n > 8) {
        bail_input("audit dimensions must be in 1..=8".into())?;
    }
    let inject_flip = match inject {
        Some(s) => Some(Notion::parse(s).ok_or_else(|| anyhow!("unknown notion `{s}`"))?),
        None => None,
    };
    let campaign = CampaignConfig { class, dims: dims.to_vec(), count, budget: cfg.budget(), inject_flip };
    let result = run_campaign(&campaign)?;
    let body = match common.format {
        Format::Structured => json(&AuditOutput { manifest: cfg.manifest(), result: &result })?,
        Format::Text => {
            let mut s = String::new();
            let _ = writeln!(s, "class {} tensors {} seed {}", class.name(), result.tensors, cfg.seed);
            let _ = writeln!(s, "class failures {}", result.class_failures);
            let _ = writeln!(s, "violations {}", result.violations.len());
            for v in &result.violations {
                let _ = writeln!(
                    s,
                    "  tensor {} (n={}): chain {} ({}) reaches {:.6e}",
                    v.index, v.n, v.label, v.direction, v.value
                );
            }
            s
        }
    };
    emit(common, &body)?;
    if result.violations.is_empty() {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("{} chain violation(s)", result.violations.len())))
    }
}

fn parse_complex(s: &str) -> anyhow::Result<C64> {
    let s = s.trim();
    if let Ok(x) = s.parse::<f64>() {
        return Ok(C64::new(x, 0.0));
    }
    s.parse::<C64>().map_err(|_| anyhow!("bad complex number `{s}`"))
}

fn parse_curve(spec: &str) -> anyhow::Result<[C64; 7]> {
    let parts: Vec<&str> = spec.split(',').collect();
    let coeffs: Vec<C64> = match parts.len() {
        7 => parts.iter().map(|p| parse_complex(p)).collect::<anyhow::Result<_>>()?,
        14 => {
            let reals: Vec<f64> = parts
                .iter()
                .map(|p| p.trim().parse::<f64>().map_err(|_| anyhow!("bad number `{p}`")))
                .collect::<anyhow::Result<_>>()?;
            reals.chunks(2).map(|c| C64::new(c[0], c[1])).collect()
        }
        k => bail!("--curve needs 7 complex or 14 real entries, got {k}"),
    };
    Ok(coeffs.try_into().expect("seven coefficients"))
}

#[derive(Serialize)]
struct WpOutput<'a> {
    manifest: Manifest<'a>,
    tensor_file: Option<String>,
    run: &'a curvlab::wp::WpManifest,
}

fn cmd_wp(cfg: &RunConfig, common: &Common, curve: &str, refine: usize, dense: Option<bool>) -> Result<(), Failure> {
    if refine > curvlab::wp::pipeline::MAX_LEVEL {
        bail_input(format!("--refine must be in 0..={}", curvlab::wp::pipeline::MAX_LEVEL))?;
    }
    let curve = HyperellipticCurve::new(parse_curve(curve)?)?;
    let wcfg = WpConfig {
        level: refine,
        mesh_tol_factor: cfg.tol,
        dense_checks: dense.unwrap_or(refine <= 3),
        samples: cfg.samples,
        restarts: cfg.restarts,
        seed: cfg.seed,
        ..WpConfig::default()
    };
    let run = run_pipeline(&curve, &wcfg)?;
    let m = &run.manifest;
    let mut tensor_file = None;
    if let Some(out) = &common.out {
        std::fs::write(out, tensor_body(&run.cotangent_orthonormal.symmetrized(), common.format))
            .with_context(|| format!("writing {}", out.display()))?;
        let tangent = sibling(out, "tangent");
        std::fs::write(&tangent, tensor_body(&run.tangent_orthonormal.symmetrized(), common.format))
            .with_context(|| format!("writing {}", tangent.display()))?;
        tensor_file = Some(out.display().to_string());
    }
    let doc = json(&WpOutput { manifest: cfg.manifest(), tensor_file: tensor_file.clone(), run: m })?;
    match &common.out {
        Some(out) => {
            let path = sibling(out, "manifest.json");
            std::fs::write(&path, &doc).with_context(|| format!("writing {}", path.display()))?;
            if common.format == Format::Text {
                print!("{}", wp_text(m));
            }
        }
        None => match common.format {
            Format::Structured => print!("{doc}"),
            Format::Text => print!("{}", wp_text(m)),
        },
    }
    if m.matches_expected_signs {
        Ok(())
    } else {
        Err(Failure::Mismatch(format!("verdicts do not match the expected signs: {:?}", m.signs)))
    }
}

fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

fn wp_text(m: &curvlab::wp::WpManifest) -> String {
    let mut s = String::new();
    let l = &m.liouville;
    let _ = writeln!(
        s,
        "mesh level {}: {} vertices, {} faces, chi {}, angles {:.1}..{:.1} deg",
        m.mesh.level, m.mesh.vertices, m.mesh.faces, m.mesh.euler_characteristic, m.mesh.min_angle_deg, m.mesh.max_angle_deg
    );
    let _ = writeln!(
        s,
        "liouville: {} iterations, residual {:.2e}, area {:.6} (error {:.3}%), gauss samples {} max |K+1| {:.2e}",
        l.iterations,
        l.residual,
        l.heron_area,
        100.0 * l.area_error,
        l.gauss_samples.len(),
        l.gauss_max_deviation
    );
    let g = &m.green;
    let _ = writeln!(s, "green: identity {:.2e}, constant {:.2e}", g.identity_residual, g.constant_residual);
    if let (Some(a), Some(k)) = (g.kernel_asymmetry, g.kernel_min) {
        let _ = writeln!(s, "green kernel: asymmetry {a:.2e}, min {k:.3e}");
    }
    let _ = writeln!(
        s,
        "basis: gram identity {:.2e}, harmonicity {:.3} {:.3} {:.3}",
        m.basis.gram_identity_residual, m.basis.harmonicity[0], m.basis.harmonicity[1], m.basis.harmonicity[2]
    );
    let t = &m.tensor_checks;
    let _ = writeln!(
        s,
        "tensor: hermitian {:.2e}, duality {:.2e}, exchange {:.3}, alternative placement {:.2e}",
        t.hermitian_residual, t.duality_residual, t.exchange_residual, t.alternative_placement_difference
    );
    if let Some(worst) = m.identity_checks.iter().map(|c| c.relative_residual).reduce(f64::max) {
        let _ = writeln!(s, "symmetrization identity: {} samples, worst {:.2e}", m.identity_checks.len(), worst);
    }
    let _ = writeln!(
        s,
        "cotangent nakano {} (min {:.4e}), dual-nakano {} (min {:.3e}), mesh tol {:.2e}",
        m.signs.cotangent_nakano.name(),
        m.cotangent_nakano_min,
        m.signs.cotangent_dual_nakano.name(),
        m.cotangent_dual_nakano_min,
        m.mesh_tol
    );
    let _ = writeln!(
        s,
        "tangent nakano {}, dual-nakano {}, bisectional max {:.4e}",
        m.signs.tangent_nakano.name(),
        m.signs.tangent_dual_nakano.name(),
        m.tangent_bisectional_max
    );
    let _ = writeln!(s, "matches expected signs: {}", m.matches_expected_signs);
    let _ = writeln!(s, "\n[cotangent]\n{}", m.cotangent_report.to_text());
    let _ = writeln!(s, "[tangent]\n{}", m.tangent_report.to_text());
    s
}
