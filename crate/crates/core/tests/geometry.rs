mod common;

use common::*;
use exprnn::expm::{dexp_adjoint, expm, PadeDegree};
use exprnn::liegroup::{
    coordinate_gradient, grad_pullback, metric_inner, retraction_step, rgd_step, riemannian_grad,
    skew_from_vec, skew_len, sphere_retraction, tangent_project, vec_from_skew, OrthoLayer,
    RetractionKind, SkewParam,
};
use exprnn::matcore::Matrix;
use exprnn::optim::Optimizer;
use exprnn::verify::{dexp_sigma_min, isometry_defect, so2_step_gap};
use exprnn::Error;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn pullback_matches_finite_differences_on_fifty_instances() {
    let mut r = rng(20);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let n = 2 + k % 7;
        let norm = r.random_range(0.1..3.0);
        let a = random_skew(&mut r, n, norm);
        let f = match k % 3 {
            0 => Objective::Linear(random_matrix(&mut r, n, n)),
            1 => Objective::Procrustes(expm(&random_skew(&mut r, n, 1.5)).unwrap()),
            _ => Objective::Cubic(random_matrix(&mut r, n, n)),
        };
        let b = expm(&a).unwrap();
        let analytic = coordinate_gradient(&grad_pullback(&a, &f.grad(&b)).unwrap()).unwrap();
        let v = vec_from_skew(&a).unwrap();
        let fd = central_gradient(&v, h, |x| f.value(&expm(&skew_oracle(x, n)).unwrap()));
        worst = worst.max(rel_diff(&analytic, &fd));
    }
    assert!(worst < 1e-6, "worst relative error {worst}");
}

#[test]
fn pullback_equals_projected_dexp_adjoint() {
    let mut r = rng(28);
    for n in [2, 3, 5, 8] {
        let a = random_skew(&mut r, n, 2.5);
        let g = random_matrix(&mut r, n, n);
        let direct = dexp_adjoint(&a, &g).unwrap().skew_part();
        let pulled = grad_pullback(&a, &g).unwrap();
        assert!(diff_fro(pulled.as_slice(), direct.as_slice()) < 1e-10 * (1.0 + direct.fro_norm()));
    }
}

#[test]
fn pullback_at_zero_is_skew_part_of_gradient() {
    let mut r = rng(21);
    let g = random_matrix(&mut r, 5, 5);
    let out = grad_pullback(&Matrix::zeros(5, 5), &g).unwrap();
    assert!(diff_fro(out.as_slice(), g.skew_part().as_slice()) < 1e-15);
}

#[test]
fn pullback_rejects_non_skew_parameter() {
    let a = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0]]);
    assert!(matches!(
        grad_pullback(&a, &Matrix::identity(2)),
        Err(Error::NotSkew { .. })
    ));
}

#[test]
fn riemannian_gradient_predicts_geodesic_derivative() {
    let mut r = rng(22);
    for n in [2, 3, 5] {
        let b = expm(&random_skew(&mut r, n, 2.0)).unwrap();
        let f = Objective::Cubic(random_matrix(&mut r, n, n));
        let x = random_skew(&mut r, n, 1.0);
        let rg = riemannian_grad(&b, &f.grad(&b)).unwrap();
        let along = b.matmul(&x).unwrap();
        let predicted = metric_inner(&rg, &along).unwrap();
        let t = 1e-5;
        let fp = f.value(&b.matmul(&expm(&x.scaled(t)).unwrap()).unwrap());
        let fm = f.value(&b.matmul(&expm(&x.scaled(-t)).unwrap()).unwrap());
        let fd = (fp - fm) / (2.0 * t);
        assert!(
            (predicted - fd).abs() < 1e-8 * (1.0 + fd.abs()),
            "{predicted} vs {fd}"
        );
    }
}

#[test]
fn retractions_fix_the_base_point_and_have_identity_differential() {
    let mut r = rng(23);
    let n = 4;
    let b = expm(&random_skew(&mut r, n, 1.0)).unwrap();
    let g = random_matrix(&mut r, n, n);
    // the step direction in T_B SO(n) for descent with gradient g
    let direction = -&riemannian_grad(&b, &g).unwrap();
    let kinds = [
        RetractionKind::Cayley,
        RetractionKind::PadeSs(PadeDegree::M5),
        RetractionKind::Projection,
    ];
    for kind in kinds {
        assert_eq!(retraction_step(&b, &g, 0.0, kind).unwrap(), b, "{kind:?}");
        let h = 1e-5;
        let d = |eta: f64| (&retraction_step(&b, &g, eta, kind).unwrap() - &b).scaled(1.0 / eta);
        // Richardson extrapolation of the one-sided difference
        let richardson = &d(h / 2.0).scaled(2.0) - &d(h);
        assert!(
            rel_diff(richardson.as_slice(), direction.as_slice()) < 1e-6,
            "{kind:?}"
        );
    }
}

#[test]
fn sphere_retraction_axioms() {
    let x = [0.6, 0.0, 0.8];
    let v = [0.8, 0.3, -0.6];
    assert_eq!(sphere_retraction(&x, &[0.0; 3]).unwrap(), x.to_vec());
    let t = 1e-6;
    let vp: Vec<f64> = v.iter().map(|c| c * t).collect();
    let vm: Vec<f64> = v.iter().map(|c| -c * t).collect();
    let p = sphere_retraction(&x, &vp).unwrap();
    let m = sphere_retraction(&x, &vm).unwrap();
    let fd: Vec<f64> = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * t)).collect();
    assert!(diff_fro(&fd, &v) < 1e-6);
    assert!(sphere_retraction(&[1.0, 1.0], &[0.0, 0.0]).is_err());
    assert!(sphere_retraction(&[1.0, 0.0], &[1.0, 0.0]).is_err());
}

#[test]
fn retraction_rejects_non_orthogonal_base() {
    let b = Matrix::from_rows(&[[2.0, 0.0], [0.0, 1.0]]);
    assert!(matches!(
        retraction_step(&b, &Matrix::identity(2), 0.1, RetractionKind::Cayley),
        Err(Error::NotOrthogonal { .. })
    ));
}

#[test]
fn so2_exponential_step_is_riemannian_step() {
    assert!(so2_step_gap(24).unwrap() < 1e-10);
}

#[test]
fn dexp_is_an_isometry_only_in_the_abelian_case() {
    assert!(isometry_defect(2, 100, 25).unwrap() < 1e-10);
    assert!(isometry_defect(3, 100, 25).unwrap() > 1e-3);
}

#[test]
fn dexp_degenerates_at_angle_pi() {
    assert!(dexp_sigma_min(std::f64::consts::PI).unwrap() < 1e-8);
    let half = dexp_sigma_min(std::f64::consts::FRAC_PI_2).unwrap();
    assert!(half > 0.1, "{half}");
}

#[test]
fn metric_is_invariant_under_conjugation() {
    let mut r = rng(26);
    for n in [3, 6] {
        let q = expm(&random_skew(&mut r, n, 2.0)).unwrap();
        let x = random_skew(&mut r, n, 1.0);
        let y = random_skew(&mut r, n, 1.0);
        let conj = |m: &Matrix<f64>| q.matmul(m).unwrap().matmul(&q.transpose()).unwrap();
        let lhs = metric_inner(&conj(&x), &conj(&y)).unwrap();
        let rhs = metric_inner(&x, &y).unwrap();
        assert!((lhs - rhs).abs() < 1e-13);
    }
}

#[test]
fn expparam_and_rgd_reach_the_same_procrustes_minimum() {
    let mut r = rng(27);
    let n = 4;
    let q = expm(&random_skew(&mut r, n, 1.5)).unwrap();
    let f = Objective::Procrustes(q);
    let eta = 0.1;

    let mut layer = OrthoLayer::new(SkewParam::zeros(n));
    let mut opt = Optimizer::sgd(skew_len(n));
    let mut b_rgd = Matrix::identity(n);
    for _ in 0..1000 {
        let b = layer.refresh().unwrap().clone();
        layer.expparam_step(&f.grad(&b), eta, &mut opt).unwrap();
        b_rgd = rgd_step(&b_rgd, &f.grad(&b_rgd), eta).unwrap();
    }
    let b_exp = layer.refresh().unwrap().clone();
    assert!(b_exp.ortho_residual() <= 1e-11 * n as f64);
    assert!(b_rgd.ortho_residual() <= 1e-11 * n as f64);
    assert!((f.value(&b_exp) - f.value(&b_rgd)).abs() < 1e-6);
    assert!(f.value(&b_exp) < 1e-10);
    assert_eq!(layer.expm_eval_count(), 1001);
    assert_eq!(layer.pullback_eval_count(), 1000);
}

#[test]
fn layer_counts_one_exponential_per_parameter_change() {
    let mut layer = OrthoLayer::new(SkewParam::<f64>::zeros(3));
    assert!(matches!(layer.kernel(), Err(Error::StaleKernel)));
    layer.refresh().unwrap();
    layer.refresh().unwrap();
    layer.kernel().unwrap();
    assert_eq!(layer.expm_eval_count(), 1);
    let g = Matrix::from_fn(3, 3, |i, j| (i + 2 * j) as f64);
    layer.pullback(&g).unwrap();
    assert_eq!(layer.pullback_eval_count(), 1);
    let mut opt = Optimizer::sgd(3);
    layer.expparam_step(&g, 0.1, &mut opt).unwrap();
    assert!(layer.is_stale());
    assert_eq!(layer.expm_eval_count(), 1);
    assert_eq!(layer.pullback_eval_count(), 2);
    layer.refresh().unwrap();
    assert_eq!(layer.expm_eval_count(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn skew_coordinates_round_trip(n in 1usize..10, seed in any::<u64>()) {
        let a = random_skew(&mut rng(seed), n, 3.0);
        let v = vec_from_skew(&a).unwrap();
        prop_assert_eq!(v.len(), skew_len(n));
        prop_assert_eq!(skew_from_vec(&v, n).unwrap(), a.clone());
        prop_assert_eq!(SkewParam::new(n, v).unwrap().matrix(), a);
    }

    #[test]
    fn tangent_projection_is_idempotent_and_tangent(n in 2usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = expm(&random_skew(&mut r, n, 2.0)).unwrap();
        let x = random_matrix(&mut r, n, n);
        let p = tangent_project(&b, &x).unwrap();
        let pp = tangent_project(&b, &p).unwrap();
        prop_assert!(diff_fro(p.as_slice(), pp.as_slice()) < 1e-13);
        let pulled = b.transpose().matmul(&p).unwrap();
        prop_assert!(pulled.skew_defect() < 1e-13);
        // the residual is normal to every tangent vector
        let t = b.matmul(&random_skew(&mut r, n, 1.0)).unwrap();
        prop_assert!(metric_inner(&(&x - &p), &t).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pullback_output_is_skew(n in 2usize..7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_skew(&mut r, n, 2.0);
        let g = grad_pullback(&a, &random_matrix(&mut r, n, n)).unwrap();
        prop_assert_eq!(g.skew_defect(), 0.0);
    }

    #[test]
    fn rgd_step_stays_on_the_group(n in 2usize..7, eta in 0.0f64..1.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = expm(&random_skew(&mut r, n, 2.0)).unwrap();
        let next = rgd_step(&b, &random_matrix(&mut r, n, n), eta).unwrap();
        prop_assert!(next.ortho_residual() < 1e-12 * n as f64);
        prop_assert!((next.det().unwrap() - 1.0).abs() < 1e-12);
    }
}
