//! Fits a rotation to a target with the exponential parametrization and with
//! Riemannian gradient descent, printing both objectives as they converge.

use exprnn::expm::expm;
use exprnn::liegroup::{rgd_step, skew_len, OrthoLayer, SkewParam};
use exprnn::optim::Optimizer;
use exprnn::SquareMat;

fn main() -> exprnn::Result<()> {
    let n = 3;
    let target = expm(&SquareMat::from_rows(&[
        [0.0, 0.9, -0.4],
        [-0.9, 0.0, 1.1],
        [0.4, -1.1, 0.0],
    ]))?;
    let objective = |b: &SquareMat| (b - &target).fro_norm().powi(2);
    let gradient = |b: &SquareMat| (b - &target).scaled(2.0);

    let mut layer = OrthoLayer::new(SkewParam::zeros(n));
    let mut opt = Optimizer::sgd(skew_len(n));
    let mut rgd = SquareMat::identity(n);
    let eta = 0.1;
    for step in 0..=200 {
        let b = layer.refresh()?.clone();
        if step % 40 == 0 {
            println!(
                "step {step:>3}  expparam {:.3e}  rgd {:.3e}  residual {:.1e}",
                objective(&b),
                objective(&rgd),
                b.ortho_residual()
            );
        }
        layer.expparam_step(&gradient(&b), eta, &mut opt)?;
        rgd = rgd_step(&rgd, &gradient(&rgd), eta)?;
    }
    Ok(())
}
