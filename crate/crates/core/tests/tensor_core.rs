use curvlab::tensor::*;
use curvlab::{CurvError, CurvatureTensor, C64};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Complex derivatives of `f` at `z0` by central differences:
/// returns (d/dz, d/dzbar, d^2/dz dzbar) along coordinate `k` pairs.
fn fd_jet(f: &dyn Fn(&[C64]) -> C64, z0: &[C64], i: usize, j: usize, h: f64) -> (C64, C64) {
    let shift = |k: usize, d: C64| {
        let mut z = z0.to_vec();
        z[k] += d;
        z
    };
    let dx = |k: usize, g: &dyn Fn(&[C64]) -> C64, z: &[C64]| {
        let mut p = z.to_vec();
        let mut m = z.to_vec();
        p[k] += c(h);
        m[k] -= c(h);
        (g(&p) - g(&m)) / (2.0 * h)
    };
    let dy = |k: usize, g: &dyn Fn(&[C64]) -> C64, z: &[C64]| {
        let mut p = z.to_vec();
        let mut m = z.to_vec();
        p[k] += C64::new(0.0, h);
        m[k] -= C64::new(0.0, h);
        (g(&p) - g(&m)) / (2.0 * h)
    };
    let _ = shift;
    // d/dz_i = (d/dx_i - i d/dy_i)/2
    let dz = (dx(i, f, z0) - C64::new(0.0, 1.0) * dy(i, f, z0)) * 0.5;
    // d^2/dz_i dzbar_j = (1/4)(dx_i + i... ) expanded by nested differences
    let dzbar_j = |z: &[C64]| (dx(j, f, z) + C64::new(0.0, 1.0) * dy(j, f, z)) * 0.5;
    let ddz = (dx(i, &dzbar_j, z0) - C64::new(0.0, 1.0) * dy(i, &dzbar_j, z0)) * 0.5;
    (dz, ddz)
}

/// Fubini-Study metric `g_{ab}` of projective space in an affine chart.
fn fs_metric(z: &[C64], a: usize, b: usize) -> C64 {
    let s: f64 = 1.0 + z.iter().map(|w| w.norm_sqr()).sum::<f64>();
    let d = if a == b { s } else { 0.0 };
    (c(d) - z[a].conj() * z[b]) / (s * s)
}

fn jet_from_metric(n: usize, r: usize, z0: &[C64], metric: &dyn Fn(&[C64], usize, usize) -> C64) -> HermitianMetricJet {
    let h = DMatrix::from_fn(r, r, |a, b| metric(z0, a, b));
    let mut dh = vec![DMatrix::zeros(r, r); n];
    let mut ddh = vec![C64::new(0.0, 0.0); n * n * r * r];
    for i in 0..n {
        for j in 0..n {
            for a in 0..r {
                for b in 0..r {
                    let f = |z: &[C64]| metric(z, a, b);
                    let (dz, ddz) = fd_jet(&f, z0, i, j, 1e-3);
                    if i == j {
                        dh[i][(a, b)] = dz;
                    }
                    ddh[((i * n + j) * r + a) * r + b] = ddz;
                }
            }
        }
    }
    HermitianMetricJet { n, r, h, dh, ddh }
}

#[test]
fn line_bundle_jet_matches_finite_difference_laplacian() {
    // h = (1 + |z|^2)^(-2): ddbar h(0) = Laplacian/4 = -2, so R = 2.
    let h = |x: f64, y: f64| (1.0 + x * x + y * y).powi(-2);
    let s = 1e-3;
    let lap = (h(s, 0.0) + h(-s, 0.0) + h(0.0, s) + h(0.0, -s) - 4.0 * h(0.0, 0.0)) / (s * s);
    let jet = HermitianMetricJet {
        n: 1,
        r: 1,
        h: DMatrix::from_element(1, 1, c(1.0)),
        dh: vec![DMatrix::from_element(1, 1, c(0.0))],
        ddh: vec![c(lap / 4.0)],
    };
    let r = curvature_from_jet(&jet).unwrap();
    assert!((r.get(0, 0, 0, 0).re - 2.0).abs() < 1e-5);
}

#[test]
fn projective_tangent_jet_reproduces_model_tensor() {
    for n in 1..=3 {
        let z0 = vec![C64::new(0.0, 0.0); n];
        let jet = jet_from_metric(n, n, &z0, &fs_metric);
        let r = curvature_from_jet(&jet).unwrap();
        let model = fubini_study(n);
        for (x, y) in r.data().iter().zip(model.data()) {
            assert!((x - y).norm() < 1e-4, "{x} vs {y}");
        }
    }
}

#[test]
fn off_center_jet_is_hermitian_in_orthonormal_fiber_frame() {
    let z0 = vec![C64::new(0.3, -0.2), C64::new(-0.1, 0.4)];
    let jet = jet_from_metric(2, 2, &z0, &fs_metric);
    let r = curvature_from_jet(&jet).unwrap();
    assert!(r.hermitian_residual().0 < 1e-6);
    // Griffiths positivity survives any frame.
    let u = [C64::new(0.7, 0.1), C64::new(-0.2, 0.5)];
    let v = [C64::new(0.1, 0.9), C64::new(0.4, 0.0)];
    assert!(curvlab::positivity::forms::griffiths_value(&r, &u, &v) > 0.0);
}

#[test]
fn model_components() {
    let fs = fubini_study(2);
    assert_eq!(fs.get(0, 0, 0, 0), c(2.0));
    assert_eq!(fs.get(0, 0, 1, 1), c(1.0));
    assert_eq!(fs.get(0, 1, 1, 0), c(1.0));
    assert_eq!(fs.get(0, 1, 0, 1), c(0.0));
    let ball = complex_ball(3);
    assert_eq!(ball.get(2, 2, 2, 2), c(-2.0));
    assert!(fs.validate(1e-12).is_ok() && ball.validate(1e-12).is_ok());
    assert_eq!(flat(2).max_norm(), 0.0);
}

#[test]
fn validation_rejects_broken_symmetry() {
    let mut d = fubini_study(2).data().to_vec();
    d[1] = C64::new(0.5, 0.5);
    match CurvatureTensor::from_data(2, 2, false, d.clone()) {
        Err(CurvError::Symmetry { symmetry: "Hermitian", .. }) => {}
        other => panic!("expected Hermitian failure, got {other:?}"),
    }
    // Hermitian but not Kähler: bump R_{1 1bar 1 2bar} and its conjugate.
    let mut d = fubini_study(2).data().to_vec();
    let t = fubini_study(2);
    d[t.idx(0, 0, 0, 1)] = c(0.3);
    d[t.idx(0, 0, 1, 0)] = c(0.3);
    assert!(CurvatureTensor::from_data(2, 2, false, d.clone()).is_ok());
    match CurvatureTensor::from_data(2, 2, true, d) {
        Err(CurvError::Symmetry { symmetry: "Kähler", .. }) => {}
        other => panic!("expected Kähler failure, got {other:?}"),
    }
    assert!(CurvatureTensor::from_data(2, 3, true, vec![c(0.0); 36]).is_err());
    assert!(CurvatureTensor::from_data(2, 2, true, vec![c(0.0); 15]).is_err());
}

#[test]
fn jet_validation() {
    let mut jet = HermitianMetricJet {
        n: 1,
        r: 2,
        h: DMatrix::from_row_slice(2, 2, &[c(1.0), C64::new(0.0, 1.0), c(0.0), c(1.0)]),
        dh: vec![DMatrix::zeros(2, 2)],
        ddh: vec![c(0.0); 4],
    };
    assert!(matches!(curvature_from_jet(&jet), Err(CurvError::InvalidArgument(_))));
    jet.h = DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
    assert!(matches!(curvature_from_jet(&jet), Err(CurvError::NotPositiveDefinite(_))));
}

#[test]
fn subbundle_correction_is_nakano_semipositive() {
    let mut rng = curvlab::exec::substream(7, 0);
    for k in 0..50 {
        let (n, r) = (1 + k % 3, 2 + k % 3);
        let target = random_bundle_tensor(n, r, SignClass::SemiNakanoNegative, &mut rng);
        let jet = random_adapted_jet(&target, &mut rng);
        let full = curvature_from_jet(&jet).unwrap();
        for (x, y) in full.data().iter().zip(target.data()) {
            assert!((x - y).norm() < 1e-12);
        }
        let s = 1 + k % (r - 1);
        let sub = subbundle_curvature(&jet, s).unwrap();
        let m = curvlab::positivity::forms::nakano_matrix(&sub.correction);
        let ev = curvlab::linalg::hermitian_eigen(&m).unwrap();
        assert!(ev.values[0] >= -1e-12, "{}", ev.values[0]);
        // Independent formula for the correction: sum over the quotient directions.
        for i in 0..n {
            for j in 0..n {
                for a in 0..s {
                    for b in 0..s {
                        let mut acc = C64::new(0.0, 0.0);
                        for g in s..r {
                            acc += jet.dh[i][(a, g)] * jet.dh[j][(b, g)].conj();
                        }
                        assert!((sub.correction.get(i, j, a, b) - acc).norm() < 1e-10);
                    }
                }
            }
        }
    }
}

#[test]
fn subbundle_requires_adapted_frame() {
    let target = complex_ball(2);
    let mut jet = random_adapted_jet(&target, &mut curvlab::exec::substream(1, 1));
    jet.h[(0, 0)] = c(2.0);
    assert!(matches!(subbundle_curvature(&jet, 1), Err(CurvError::NotAdapted(_))));
    assert!(subbundle_curvature(&random_adapted_jet(&target, &mut curvlab::exec::substream(1, 2)), 3).is_err());
}

#[test]
fn dual_is_an_involution() {
    let t = random_kahler_tensor(3, SignClass::Unconstrained, 4);
    let dd = t.dual().dual();
    assert_eq!(dd.data(), t.data());
    assert!(!t.dual().is_kahler());
}

#[test]
fn text_and_json_round_trip_bit_exactly() {
    for (k, class) in SignClass::ALL.into_iter().enumerate() {
        let t = random_kahler_tensor(3, class, 11 + k as u64);
        let back = read_tensor_str(&write_tensor_text(&t)).unwrap();
        assert_eq!(back, t);
        let back = read_tensor_str(&write_tensor_json(&t)).unwrap();
        assert_eq!(back, t);
    }
    let b = random_bundle_tensor(2, 3, SignClass::Unconstrained, &mut curvlab::exec::substream(3, 3));
    assert_eq!(read_tensor_str(&write_tensor_text(&b)).unwrap(), b);
}

#[test]
fn file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = fubini_study(2);
    for (name, fmt) in [("a.txt", TensorFormat::Text), ("a.json", TensorFormat::Json)] {
        let p = dir.path().join(name);
        write_tensor(&p, &t, fmt).unwrap();
        assert_eq!(read_tensor(&p).unwrap(), t);
    }
}

#[test]
fn reader_reports_bad_records() {
    let head = "# comment\nn=1 r=1 kahler=1 version=1\n";
    let cases = [
        ("1 1 1 1 2.0\n", "expected 6 fields"),
        ("1 1 1 2 2.0 0\n", "out of range"),
        ("1 1 1 1 2.0 0\n1 1 1 1 2.0 0\n", "duplicate"),
        ("1 1 1 1 abc 0\n", "bad number"),
    ];
    for (body, needle) in cases {
        let err = read_tensor_str(&format!("{head}{body}")).unwrap_err();
        assert!(err.to_string().contains(needle), "{err}");
    }
    let err = read_tensor_str("n=2 r=2 kahler=0 version=1\n2 1 1 1 1 0\n").unwrap_err();
    assert!(err.to_string().contains("not canonical"), "{err}");
    assert!(read_tensor_str("n=1 r=1 kahler=1 version=2\n").is_err());
    assert!(read_tensor_str("1 1 1 1 1 0\n").is_err());
    assert!(read_tensor_str("").is_err());
    // Self-conjugate entries must be real.
    assert!(read_tensor_str("n=1 r=1 kahler=0 version=1\n1 1 1 1 1 0.5\n").is_err());
    let err = read_tensor_str("n=1 r=1 kahler=1 version=1\n1 1 1 1 1 0\n1 1 1 1 1 0\n").unwrap_err();
    assert!(matches!(err, CurvError::Parse { line: 3, .. }));
}

#[test]
fn sparse_files_fill_missing_entries_with_zero() {
    let t = read_tensor_str("n=2 r=2 kahler=0 version=1\n1 2 1 2 0.5 0.25\n").unwrap();
    assert_eq!(t.get(0, 1, 0, 1), C64::new(0.5, 0.25));
    assert_eq!(t.get(1, 0, 1, 0), C64::new(0.5, -0.25));
    assert_eq!(t.get(0, 0, 0, 0), c(0.0));
}

fn random_unitary(n: usize, seed: u64) -> DMatrix<C64> {
    let t = random_kahler_tensor(n, SignClass::Unconstrained, seed);
    let m = DMatrix::from_fn(n, n, |a, b| t.get(a, b, 0, 0) + t.get(b, a, 1 % n, 0) * C64::new(0.0, 1.0));
    m.qr().q()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_classes_are_valid_kahler_tensors(seed in any::<u64>(), n in 1usize..4, k in 0usize..3) {
        let t = random_kahler_tensor(n, SignClass::ALL[k], seed);
        prop_assert!(t.validate(1e-12).is_ok());
        prop_assert!((t.max_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrizing_is_idempotent(seed in any::<u64>(), n in 1usize..4) {
        let t = random_kahler_tensor(n, SignClass::Unconstrained, seed);
        prop_assert_eq!(t.symmetrized(), t.clone());
    }

    #[test]
    fn unitary_frames_preserve_kahler_symmetry_and_spectrum(seed in any::<u64>(), n in 1usize..4) {
        let t = random_kahler_tensor(n, SignClass::Unconstrained, seed);
        let u = random_unitary(n, seed ^ 0x55);
        let s = t.change_kahler_frame(&u).unwrap();
        prop_assert!(s.kahler_residual().0 < 1e-12);
        prop_assert!(s.hermitian_residual().0 < 1e-12);
        let e1 = curvlab::linalg::hermitian_eigen(&curvlab::positivity::forms::nakano_matrix(&t)).unwrap();
        let e2 = curvlab::linalg::hermitian_eigen(&curvlab::positivity::forms::nakano_matrix(&s)).unwrap();
        for (a, b) in e1.values.iter().zip(&e2.values) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn frame_changes_compose(seed in any::<u64>()) {
        let t = random_kahler_tensor(2, SignClass::Unconstrained, seed);
        let a = random_unitary(2, seed) * C64::new(1.3, 0.2);
        let b = random_unitary(2, seed.wrapping_add(9)) * C64::new(0.4, -0.7);
        let lhs = t.change_kahler_frame(&a).unwrap().change_kahler_frame(&b).unwrap();
        let rhs = t.change_kahler_frame(&(&a * &b)).unwrap();
        for (x, y) in lhs.data().iter().zip(rhs.data()) {
            prop_assert!((x - y).norm() < 1e-11);
        }
    }

    #[test]
    fn text_round_trip_is_exact(seed in any::<u64>(), n in 1usize..4, r in 1usize..4) {
        let mut rng = curvlab::exec::substream(seed, 0);
        let t = random_bundle_tensor(n, r, SignClass::Unconstrained, &mut rng).scaled(1e-7);
        prop_assert_eq!(read_tensor_str(&write_tensor_text(&t)).unwrap(), t.clone());
        prop_assert_eq!(read_tensor_str(&write_tensor_json(&t)).unwrap(), t);
    }
}
