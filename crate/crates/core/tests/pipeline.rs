use qphom::blochtransform::{BlochWave, CompactFunction};
use qphom::qpcore::input::CoefficientSpec;
use qphom::qpcore::{detect_module, LiftedMedium, QPMatrix, TrigSum, WindingMap, DEFAULT_P_CHECK, FREQ_TOL};
use qphom::tensor::{cell_tensor, cross_validate, delta_continuation};
use qphom::{BlochProblem, Route};

const SQRT3: f64 = 1.7320508075688772;
const QP_ORACLE: f64 = 2.6040081905309402;

#[test]
fn json_without_lambda_detects_the_module() {
    let spec = CoefficientSpec::from_json(
        r#"{"dim": 1, "entries": [{"k": 0, "l": 0, "terms": [
            {"freq": [0], "cos": 3}, {"freq": [1], "sin": 1}, {"freq": ["sqrt(2)"], "sin": 1}]}]}"#,
    )
    .unwrap();
    assert!(spec.winding::<f64>(DEFAULT_P_CHECK).unwrap().is_none());
    let a: QPMatrix<f64> = spec.to_matrix().unwrap();
    let w = detect_module(&a.frequencies(), DEFAULT_P_CHECK, FREQ_TOL).unwrap();
    assert_eq!(w.m(), 2);
    let m = LiftedMedium::new(&a, w).unwrap();
    let q = cell_tensor(&m, 1e-3, 12).unwrap();
    assert!((q.get(0, 0) - QP_ORACLE).abs() < 1e-3, "{}", q.get(0, 0));
}

#[test]
fn single_precision_pipeline() {
    let a = QPMatrix::scalar(TrigSum::<f32>::from_cos_sin(1, &[(vec![0.0], 2.0, 0.0), (vec![1.0], 1.0, 0.0)]).unwrap());
    let m = LiftedMedium::new(&a, WindingMap::identity(1)).unwrap();
    let c = delta_continuation(&m, &[1e-1, 1e-2, 1e-3], 12, Route::Cell, 1e-2, 1e-5).unwrap();
    assert!((c.tensor.get(0, 0) as f64 - SQRT3).abs() < 1e-3, "{}", c.tensor.get(0, 0));
}

#[test]
fn two_dimensional_quasiperiodic_routes_agree() {
    let s2 = 2f64.sqrt();
    let diag = |c: f64, f: Vec<(Vec<f64>, f64, f64)>| {
        let mut parts = vec![(vec![0.0, 0.0], c, 0.0)];
        parts.extend(f);
        TrigSum::from_cos_sin(2, &parts).unwrap()
    };
    let a11 = diag(4.0, vec![(vec![1.0, 0.0], 1.0, 0.0), (vec![s2, 0.0], 0.5, 0.0)]);
    let a22 = diag(3.0, vec![(vec![0.0, 1.0], 0.0, 1.0)]);
    let a12 = TrigSum::from_cos_sin(2, &[(vec![1.0, 1.0], 0.25, 0.0)]).unwrap();
    let a = QPMatrix::new(2, vec![vec![a11, a12.clone()], vec![a12, a22]]).unwrap();
    let w = detect_module(&a.frequencies(), DEFAULT_P_CHECK, FREQ_TOL).unwrap();
    assert_eq!((w.m(), w.d()), (3, 2));
    let m = LiftedMedium::new(&a, w).unwrap();
    let (cell, hess) = cross_validate(&m, 1e-2, 3, 1e-3, 1e-11).unwrap();
    let bound = 1e-6 * (1.0 + cell.max_abs()) + hess.diagnostics.richardson.unwrap();
    assert!(cell.distance(&hess) <= bound, "{:?} vs {:?}", cell.q, hess.q);
    assert!(cell.min_eigenvalue() > 0.0);
    assert!((cell.get(0, 1) - cell.get(1, 0)).abs() == 0.0);
}

#[test]
fn constant_wave_in_two_dimensions_is_the_fourier_transform() {
    let a = QPMatrix::<f64>::identity(2);
    let m = LiftedMedium::new(&a, WindingMap::identity(2)).unwrap();
    let bw = BlochWave::new(BlochProblem::new(&m, 1e-2, 2).unwrap(), 0.5, 1e-11).unwrap();
    let g = CompactFunction::gaussian(2, 8.0).unwrap();
    let xis = vec![vec![0.0, 0.0], vec![0.5, -0.25], vec![-0.75, 0.5]];
    let t = bw.transform(&g, &xis).unwrap();
    assert_eq!(t.sup_error(), 0.0);
    for r in &t.rows {
        let want = (-(r.xi[0] * r.xi[0] + r.xi[1] * r.xi[1]) / 2.0).exp();
        assert!((r.reference.re - want).abs() < 1e-10 && r.reference.im.abs() < 1e-10);
    }
}
