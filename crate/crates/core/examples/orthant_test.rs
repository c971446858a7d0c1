//! Adaptive and mixture tests of `μ ≤ 0` in two dimensions.

use conetest::dist::orthant_weights;
use conetest::project::CovarianceSpec;
use conetest::testkit::{
    adaptive_test_b, alpha_adjustment_for, mixture_test_b, AdjustmentMode, AlphaAdjustment,
};
use conetest::PolyhedralCone;

fn main() -> conetest::Result<()> {
    let cone = PolyhedralCone::orthant(2)?;
    let cov = CovarianceSpec::identity(2);
    let exact = alpha_adjustment_for(&cone, AdjustmentMode::ExactBound)?;
    let mix = orthant_weights(2);

    println!("y\tLR\tdf\tadaptive\tadjusted\tmixture");
    for y in [
        [-1.0, -2.0],
        [2.1, -1.0],
        [-0.5, 2.3],
        [1.6, 1.7],
        [2.5, 2.5],
    ] {
        let plain = adaptive_test_b(&y, &cone, &cov, 0.05, &AlphaAdjustment::none())?;
        let adj = adaptive_test_b(&y, &cone, &cov, 0.05, &exact)?;
        let classical = mixture_test_b(&y, &cone, &cov, 0.05, &mix)?;
        println!(
            "{y:?}\t{:.3}\t{}\t{:.3} {}\t{:.3} {}\t{:.3} {}",
            plain.statistic,
            plain.df,
            plain.critical_value,
            plain.reject,
            adj.critical_value,
            adj.reject,
            classical.critical_value,
            classical.reject,
        );
    }
    Ok(())
}
