use curvlab::positivity::{classify_eigen, Notion};
use curvlab::tensor::CurvatureTensor;
use curvlab::wp::fem::spmv;
use curvlab::wp::green::kernel_symmetry_and_min;
use curvlab::wp::mesh::{chart_at, BRANCH_RADIUS};
use curvlab::wp::wolpert::*;
use curvlab::wp::*;
use curvlab::{CurvError, C64};
use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::OnceLock;

struct Solved {
    mesh: CoverMesh,
    disc: Discretization,
    hyp: HyperbolicStructure,
}

fn solved(level: usize) -> &'static Solved {
    static CACHE: [OnceLock<Solved>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    CACHE[level].get_or_init(|| {
        let mesh = CoverMesh::build(&HyperellipticCurve::x6_minus_1(), level).unwrap();
        let disc = Discretization::new(&mesh);
        let hyp = solve_liouville(&mesh, &disc, NewtonOptions::default()).unwrap();
        Solved { mesh, disc, hyp }
    })
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn poly_from_roots(roots: &[C64]) -> [C64; 7] {
    let mut p = vec![c(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![c(0.0, 0.0); p.len() + 1];
        for (k, &a) in p.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * r;
        }
        p = next;
    }
    p.try_into().unwrap()
}

#[test]
fn curve_roots_and_rejections() {
    let curve = HyperellipticCurve::x6_minus_1();
    for k in 0..6 {
        let e = curve.roots[k];
        assert!((e.norm() - 1.0).abs() < 1e-14);
        assert!(curve.p(e).norm() < 1e-13);
    }
    assert!(curve.root_residual() < 1e-13);
    let roots = [0.3, -1.2, 2.0, 0.7].map(|r| c(r, 0.5 * r));
    let generic = HyperellipticCurve::new(poly_from_roots(&[roots[0], roots[1], roots[2], roots[3], c(0.0, 1.5), c(-0.4, -0.9)])).unwrap();
    for r in roots {
        assert!(generic.roots.iter().any(|e| (e - r).norm() < 1e-10));
    }
    let repeated = poly_from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0)]);
    assert!(matches!(
        HyperellipticCurve::new(repeated),
        Err(CurvError::NearDegenerateRoots { .. } | CurvError::DegenerateCurve(_))
    ));
    let mut quintic = poly_from_roots(&[c(1.0, 0.0); 6]);
    quintic[6] = c(0.0, 0.0);
    assert!(matches!(HyperellipticCurve::new(quintic), Err(CurvError::DegenerateCurve(_))));
}

#[test]
fn differentials_and_density_transform_between_charts() {
    let curve = HyperellipticCurve::new(poly_from_roots(&[
        c(0.9, 0.2),
        c(-0.5, 1.1),
        c(-1.3, -0.4),
        c(0.2, -0.8),
        c(2.1, 0.3),
        c(-0.1, 0.05),
    ]))
    .unwrap();
    for x in [c(0.4, 0.6), c(-1.7, 0.9), c(3.0, -2.0)] {
        let t = x.inv();
        let dxdt = -t.inv() * t.inv();
        for a in 0..3 {
            let fx = Chart::X.differential(&curve, x, a);
            let ft = Chart::T.differential(&curve, t, a);
            assert!((fx * dxdt * dxdt - ft).norm() < 1e-12 * ft.norm());
        }
        let (rx, rt) = (Chart::X.density(&curve, x), Chart::T.density(&curve, t));
        assert!((rx * dxdt.norm_sqr() - rt).abs() < 1e-12 * rt);
        for k in 0..6 {
            let w = c(0.05, -0.03) + x * 0.01;
            let xw = curve.roots[k] + w * w;
            let dxdw = w * 2.0;
            assert_eq!(Chart::W(k).x(&curve, w), Some(xw));
            for a in 0..3 {
                let fx = Chart::X.differential(&curve, xw, a);
                let fw = Chart::W(k).differential(&curve, w, a);
                assert!((fx * dxdw * dxdw - fw).norm() < 1e-9 * fw.norm());
            }
            let rw = Chart::W(k).density(&curve, w);
            assert!((Chart::X.density(&curve, xw) * dxdw.norm_sqr() - rw).abs() < 1e-9 * rw);
        }
    }
    assert_eq!(Chart::T.x(&curve, c(0.0, 0.0)), None);
}

#[test]
fn chart_selection_near_branch_points() {
    let curve = HyperellipticCurve::x6_minus_1();
    let e = curve.roots[2];
    let x = e + c(3e-9, -2e-9);
    let (chart, z) = chart_at(&curve, x);
    assert_eq!(chart, Chart::W(2));
    assert!((e + z * z - x).norm() < 1e-20);
    assert!((z.arg() - (x - e).arg() / 2.0).abs() < 1e-12);
    let far = e * (1.0 + 10.0 * BRANCH_RADIUS);
    assert_ne!(chart_at(&curve, far).0, Chart::W(2));
    assert_eq!(chart_at(&curve, c(0.2, 0.1)).0, Chart::X);
    assert_eq!(chart_at(&curve, c(3.0, 0.0)), (Chart::T, c(1.0 / 3.0, 0.0)));
}

#[test]
fn cover_meshes_are_closed_genus_two_surfaces() {
    let mut faces = Vec::new();
    for level in 0..3 {
        let stats = solved(level).mesh.stats();
        assert_eq!(stats.euler_characteristic, -2);
        assert_eq!(stats.vertices, 2 * stats.sphere_vertices - 6);
        assert_eq!(stats.faces, 2 * stats.sphere_faces);
        assert_eq!(stats.sphere_vertices, 10 * 4usize.pow(level as u32 + 1) + 2);
        assert!(stats.min_angle_deg > 1.0 && stats.max_angle_deg < 178.0);
        faces.push(stats.faces);
    }
    assert_eq!(faces[1], 4 * faces[0]);
    assert_eq!(faces[2], 4 * faces[1]);
    let mesh = &solved(1).mesh;
    assert_eq!(mesh.verts.iter().filter(|v| v.sheet == 0).count(), 6);
    for t in &mesh.tris {
        for (k, &v) in t.verts.iter().enumerate() {
            let x = t.chart.x(&mesh.curve, t.z[k]);
            if let (Some(x), Some(xv)) = (x, mesh.x_of(v)) {
                assert!((x - xv).norm() < 1e-9 * (1.0 + xv.norm()), "{x} vs {xv}");
            }
        }
    }
}

#[test]
fn laplacian_is_symmetric_with_zero_row_sums() {
    for level in 0..3 {
        let d = &solved(level).disc;
        let (asym, rows) = d.laplacian_residuals();
        assert_eq!(asym, 0.0);
        assert!(rows < 1e-12, "{rows}");
        let ones = vec![1.0; d.len()];
        assert!(spmv(&d.stiffness, &ones).iter().all(|v| v.abs() < 1e-12));
        // The curvature source integrates to the Euler characteristic.
        let total: f64 = d.source.iter().sum();
        assert!((total + 4.0 * PI).abs() < 1e-10, "{total}");
    }
}

#[test]
fn liouville_solutions_converge_to_the_hyperbolic_area() {
    let mut errors = Vec::new();
    for level in 0..3 {
        let h = &solved(level).hyp;
        assert!(h.residual < 1e-8);
        assert!((h.lumped_area - 4.0 * PI).abs() < 1e-8);
        assert!(h.residual_history.last().unwrap() < &1e-11);
        errors.push((h.heron_area / (4.0 * PI) - 1.0).abs());
    }
    assert!(errors[2] < errors[1] && errors[1] < errors[0], "{errors:?}");
    assert!(errors[2] < 0.01);
    let samples = gauss_curvature_samples(&solved(2).mesh, &solved(2).hyp, 40);
    assert!(!samples.is_empty());
    for s in &samples {
        assert!(s.x.norm() < 0.9);
        assert!((s.curvature + 1.0).abs() < 0.02, "{s:?}");
    }
}

#[test]
fn newton_reports_divergence_with_history() {
    let s = solved(0);
    let err = solve_liouville(&s.mesh, &s.disc, NewtonOptions { tol: 1e-11, max_iter: 1 }).unwrap_err();
    match err {
        CurvError::NewtonDiverged { history } => assert_eq!(history.len(), 2),
        other => panic!("{other}"),
    }
}

#[test]
fn green_operator_identities() {
    let s = solved(1);
    let green = GreenOperator::new(&s.disc, &s.hyp).unwrap();
    let ones = vec![1.0; green.len()];
    assert!(green.apply(&ones).iter().all(|v| (v - 1.0).abs() < 1e-10));
    let f: Vec<f64> = (0..green.len()).map(|k| (k as f64 * 0.37).sin()).collect();
    assert!(green.identity_residual(&f) < 1e-10);
    let g = green.apply(&f);
    let back = green.operator(&g);
    let err = back.iter().zip(&f).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(err < 1e-9, "{err}");
    let kernel = green.kernel();
    let (asym, min) = kernel_symmetry_and_min(&kernel);
    assert!(asym < 1e-10 && min > 0.0, "{asym} {min}");
    assert!(green.kernel_identity_residual(&kernel) < 1e-10);
}

#[test]
fn basis_gram_matrices_and_harmonicity() {
    let b1 = DifferentialBasis::new(&solved(1).mesh, &solved(1).hyp).unwrap();
    let b2 = DifferentialBasis::new(&solved(2).mesh, &solved(2).hyp).unwrap();
    for b in [&b1, &b2] {
        assert!(b.gram_identity_residual < 1e-10);
        let eig = b.wp_gram.clone().symmetric_eigenvalues();
        assert!(eig.iter().all(|&l| l > 0.0));
        let herm = (&b.wp_gram - b.wp_gram.adjoint()).norm() / b.wp_gram.norm();
        assert!(herm < 1e-14);
    }
    for a in 0..3 {
        assert!(b2.harmonicity[a] < b1.harmonicity[a], "{:?} {:?}", b1.harmonicity, b2.harmonicity);
    }
    let singular = DMatrix::from_element(3, 3, c(1.0, 0.0));
    assert!(DifferentialBasis::with_frame(&solved(1).mesh, &solved(1).hyp, &singular).is_err());
}

fn frame(seed: u64) -> DMatrix<C64> {
    let mut x = seed as f64 + 0.5;
    DMatrix::from_fn(3, 3, |i, j| {
        x = (x * 7.31 + 0.13).fract();
        c(x - 0.5, (x * 3.7).fract() - 0.5) + if i == j { c(1.0, 0.0) } else { c(0.0, 0.0) }
    })
}

#[test]
fn cotangent_tensor_structure_and_frame_covariance() {
    let s = solved(1);
    let green = GreenOperator::new(&s.disc, &s.hyp).unwrap();
    let basis = DifferentialBasis::new(&s.mesh, &s.hyp).unwrap();
    let cot = wolpert_curvature(&PairIntegrals::new(&basis, &green).unwrap()).unwrap();
    assert!(cot.hermitian_residual().0 < 1e-12 * cot.max_norm());
    for i in 0..3 {
        assert!(cot.get(i, i, i, i).re > 0.0);
    }
    let base = classify_eigen(Notion::Nakano, &cot, 1e-9).unwrap();
    for seed in 0..4 {
        let f = frame(seed);
        let moved = DifferentialBasis::with_frame(&s.mesh, &s.hyp, &f).unwrap();
        let congruent = f.adjoint() * &basis.wp_gram * &f;
        assert!((&moved.wp_gram - &congruent).norm() < 1e-12 * congruent.norm());
        let direct = wolpert_curvature(&PairIntegrals::new(&moved, &green).unwrap()).unwrap();
        let transformed = cotangent_in_frame(&cot, &f).unwrap();
        assert!(relative_difference(&direct, &transformed) < 1e-12);
        for notion in [Notion::Nakano, Notion::DualNakano] {
            let v = classify_eigen(notion, &direct, 1e-9).unwrap();
            let w = classify_eigen(notion, &cot, 1e-9).unwrap();
            assert_eq!(v.sign, w.sign);
        }
    }
    assert_eq!(base.sign, curvlab::positivity::Sign::Positive);
}

#[test]
fn symmetrization_identity_on_coarse_mesh() {
    let s = solved(0);
    let green = GreenOperator::new(&s.disc, &s.hyp).unwrap();
    let basis = DifferentialBasis::new(&s.mesh, &s.hyp).unwrap();
    let cot = wolpert_curvature(&PairIntegrals::new(&basis, &green).unwrap()).unwrap();
    let kernel = green.kernel();
    let zero = symmetrized_identity_check(&cot, &basis, &kernel, &DMatrix::zeros(3, 3));
    assert_eq!((zero.lhs, zero.rhs, zero.relative_residual), (0.0, 0.0, 0.0));
    for seed in 0..3 {
        let check = symmetrized_identity_check(&cot, &basis, &kernel, &frame(seed));
        assert!(check.rhs > 0.0);
        assert!(check.relative_residual < 1e-10, "{check:?}");
    }
}

#[test]
fn pipeline_signs_are_expected_and_deterministic() {
    let curve = HyperellipticCurve::x6_minus_1();
    let cfg = WpConfig { level: 1, samples: 2000, restarts: 6, identity_samples: 3, ..WpConfig::default() };
    let a = run_pipeline(&curve, &cfg).unwrap();
    let m = &a.manifest;
    assert!(m.matches_expected_signs, "{:?}", m.signs);
    assert!(m.tensor_checks.duality_residual < 1e-10);
    assert!(m.tangent_bisectional_max < 0.0);
    assert!(m.green.kernel_min.unwrap() > 0.0);
    assert_eq!(m.identity_checks.len(), 3);
    let b = run_pipeline(&curve, &cfg).unwrap();
    assert_eq!(serde_json::to_string(&a.manifest).unwrap(), serde_json::to_string(&b.manifest).unwrap());
    assert_eq!(a.cotangent, b.cotangent);
    let coarse = run_pipeline(&curve, &WpConfig { level: 0, dense_checks: false, ..cfg.clone() }).unwrap();
    assert_eq!(coarse.manifest.signs, m.signs);
    assert!(coarse.manifest.identity_checks.is_empty());
    let sym = a.cotangent_orthonormal.symmetrized();
    assert!(relative_difference(&sym, &a.cotangent_orthonormal) < 1e-14);
    let roundtrip: CurvatureTensor = curvlab::tensor::read_tensor_str(&curvlab::tensor::write_tensor_text(&sym)).unwrap();
    assert_eq!(roundtrip, sym);
}

#[test]
fn pipeline_rejects_bad_configs() {
    let curve = HyperellipticCurve::x6_minus_1();
    let too_fine = WpConfig { level: 7, ..WpConfig::default() };
    assert!(matches!(run_pipeline(&curve, &too_fine), Err(CurvError::InvalidArgument(_))));
    let no_samples = WpConfig { level: 0, samples: 0, ..WpConfig::default() };
    assert!(run_pipeline(&curve, &no_samples).is_err());
}
