use exprnn::optim::{
    adam_step, rmsprop_step, sgd_step, GroupTag, Hyper, OptState, Optimizer, OptimizerKind,
    ParamGroup,
};
use exprnn::Error;
use proptest::prelude::*;

const GRADS: [[f64; 3]; 10] = [
    [0.5, -1.0, 2.0],
    [0.4, -0.8, 1.0],
    [-0.3, 0.2, 0.0],
    [1.5, -0.1, -2.0],
    [0.0, 0.0, 0.0],
    [2.0, 1.0, -1.0],
    [-1.0, 0.7, 0.3],
    [0.25, -0.25, 0.5],
    [0.9, 0.1, -0.6],
    [-0.2, 0.4, 1.2],
];

fn group(values: Vec<f64>, lr: f64) -> ParamGroup<f64> {
    ParamGroup::new("w", values, lr, GroupTag::General).unwrap()
}

#[test]
fn sgd_hand_values() {
    let mut g = group(vec![1.0, 2.0, 3.0], 0.5);
    sgd_step(&mut g, &[2.0, -2.0, 0.0]).unwrap();
    assert_eq!(g.values, vec![0.0, 3.0, 3.0]);
}

#[test]
fn rmsprop_follows_its_recurrence() {
    let lr = 1e-2;
    let mut g = group(vec![0.1, -0.2, 0.3], lr);
    let mut state = OptState::new(3);
    let hyper = Hyper::default();
    let mut x = [0.1, -0.2, 0.3];
    let mut s = [0.0; 3];
    for grad in &GRADS {
        rmsprop_step(&mut g, &mut state, grad, &hyper).unwrap();
        for i in 0..3 {
            s[i] = 0.99 * s[i] + 0.01 * grad[i] * grad[i];
            x[i] -= lr * grad[i] / (s[i].sqrt() + 1e-8);
        }
        for i in 0..3 {
            assert!((g.values[i] - x[i]).abs() < 1e-15);
        }
    }
    assert_eq!(state.step, 10);
}

#[test]
fn adam_follows_its_recurrence() {
    let lr = 1e-3;
    let mut g = group(vec![0.0; 3], lr);
    let mut state = OptState::new(3);
    let hyper = Hyper::default();
    let mut x = [0.0f64; 3];
    let mut m = [0.0f64; 3];
    let mut v = [0.0f64; 3];
    for (t, grad) in GRADS.iter().enumerate() {
        adam_step(&mut g, &mut state, grad, &hyper).unwrap();
        let t = (t + 1) as i32;
        for i in 0..3 {
            m[i] = 0.9 * m[i] + 0.1 * grad[i];
            v[i] = 0.999 * v[i] + 0.001 * grad[i] * grad[i];
            let mh = m[i] / (1.0 - 0.9f64.powi(t));
            let vh = v[i] / (1.0 - 0.999f64.powi(t));
            x[i] -= lr * mh / (vh.sqrt() + 1e-8);
        }
        for i in 0..3 {
            assert!((g.values[i] - x[i]).abs() < 1e-15, "step {t}");
        }
    }
}

#[test]
fn first_adam_step_moves_each_coordinate_by_about_lr() {
    let mut opt = Optimizer::new(OptimizerKind::Adam, 2);
    let mut x = vec![0.0f64, 0.0];
    opt.update(&mut x, &[3.0, -0.01], 0.1).unwrap();
    assert!((x[0] + 0.1).abs() < 1e-8);
    assert!((x[1] - 0.1).abs() < 1e-5);
}

#[test]
fn groups_keep_independent_state_and_rates() {
    let mut ortho = ParamGroup::new("A", vec![1.0, 1.0], 1e-4, GroupTag::Orthogonal).unwrap();
    let mut other = group(vec![1.0, 1.0], 1e-3);
    let mut opt_a = Optimizer::new(OptimizerKind::Rmsprop, 2);
    let mut opt_b = Optimizer::new(OptimizerKind::Rmsprop, 2);
    for grad in GRADS.iter().take(4) {
        opt_b.step_group(&mut other, &grad[..2]).unwrap();
    }
    assert_eq!(ortho.values, vec![1.0, 1.0]);
    assert_eq!(opt_a.state.step, 0);
    opt_a.step_group(&mut ortho, &[1.0, 1.0]).unwrap();
    // first rmsprop step: lr / sqrt(1 - rho) in magnitude
    let expected = 1.0 - 1e-4 / (0.01f64.sqrt() + 1e-8);
    assert!((ortho.values[0] - expected).abs() < 1e-15);
    assert_eq!(opt_b.state.step, 4);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(ParamGroup::new("x", vec![1.0], 0.0, GroupTag::General).is_err());
    assert!(ParamGroup::new("x", vec![1.0], f64::NAN, GroupTag::General).is_err());
    assert!(ParamGroup::new("x", vec![f64::INFINITY], 0.1, GroupTag::General).is_err());
    let mut opt = Optimizer::<f64>::sgd(2);
    let mut x = vec![0.0; 2];
    assert!(matches!(
        opt.update(&mut x, &[1.0], 0.1),
        Err(Error::DimensionMismatch { .. })
    ));
    assert!(matches!(
        opt.update(&mut x, &[1.0, f64::NAN], 0.1),
        Err(Error::NonFinite { .. })
    ));
    assert_eq!(x, vec![0.0; 2]);
}

#[test]
fn kind_parses_case_insensitively() {
    assert_eq!(
        "RMSprop".parse::<OptimizerKind>().unwrap(),
        OptimizerKind::Rmsprop
    );
    assert_eq!(OptimizerKind::Adam.to_string(), "adam");
    assert!("lbfgs".parse::<OptimizerKind>().is_err());
}

proptest! {
    #[test]
    fn identical_runs_are_bit_identical(
        grads in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 4), 1..20),
        kind in prop_oneof![Just(OptimizerKind::Sgd), Just(OptimizerKind::Rmsprop), Just(OptimizerKind::Adam)],
    ) {
        let run = || {
            let mut opt = Optimizer::new(kind, 4);
            let mut x = vec![0.5; 4];
            for g in &grads {
                opt.update(&mut x, g, 1e-2).unwrap();
            }
            x
        };
        prop_assert_eq!(run(), run());
    }

    #[test]
    fn zero_gradient_leaves_values_unchanged(
        kind in prop_oneof![Just(OptimizerKind::Sgd), Just(OptimizerKind::Rmsprop), Just(OptimizerKind::Adam)],
        x0 in prop::collection::vec(-5.0f64..5.0, 1..8),
    ) {
        let mut opt = Optimizer::new(kind, x0.len());
        let mut x = x0.clone();
        opt.update(&mut x, &vec![0.0; x0.len()], 0.1).unwrap();
        prop_assert_eq!(x, x0);
    }

    #[test]
    fn adaptive_steps_are_bounded_by_lr_scale(g in -100.0f64..100.0) {
        prop_assume!(g.abs() > 1e-3);
        let mut opt = Optimizer::new(OptimizerKind::Rmsprop, 1);
        let mut x = vec![0.0];
        opt.update(&mut x, &[g], 1e-3).unwrap();
        prop_assert!(x[0].abs() <= 1e-3 * 10.0 + 1e-12);
        prop_assert!(x[0] * g < 0.0);
    }
}
