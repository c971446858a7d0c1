//! Monotone fit by pool-adjacent-violators and the isotonic adaptive test.

use conetest::project::{pava_unit, project, CovarianceSpec};
use conetest::testkit::{adaptive_test_b, alpha_adjustment_for, AdjustmentMode};
use conetest::PolyhedralCone;

fn main() -> conetest::Result<()> {
    let y = [3.0, 1.0, 2.0, 5.0, 4.5, 4.0];
    let fit = pava_unit(&y)?;
    println!("y      = {y:?}");
    println!("fitted = {:?}", fit.fitted);
    println!("blocks = {:?} ({} levels)", fit.blocks, fit.levels);

    let p = y.len();
    let cone = PolyhedralCone::isotonic(p)?;
    let cov = CovarianceSpec::identity(p);
    let proj = project(&y, &cone, &cov)?;
    println!("LR = {:.4}, df = {} = p - levels", proj.lr, proj.face_rank);

    let adj = alpha_adjustment_for(&cone, AdjustmentMode::ExactBound)?;
    let out = adaptive_test_b(&y, &cone, &cov, 0.05, &adj)?;
    println!(
        "adjusted factor {:.6}: critical value {:.4}, reject = {}",
        adj.factor, out.critical_value, out.reject
    );
    Ok(())
}
