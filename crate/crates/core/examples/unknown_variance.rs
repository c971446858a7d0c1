//! Adaptive test with the variance scale estimated from independent data.

use conetest::project::CovarianceSpec;
use conetest::testkit::{adaptive_test_b_unknown_var, alpha_adjustment_for, AdjustmentMode};
use conetest::PolyhedralCone;

fn main() -> conetest::Result<()> {
    let cone = PolyhedralCone::orthant(2)?;
    let sigma = CovarianceSpec::identity(2);
    let adj = alpha_adjustment_for(&cone, AdjustmentMode::ExactBound)?;
    let y = [2.0, -0.7];
    // σ̂² with m degrees of freedom, scaled as σ̂²/σ² ~ χ²(m).
    for (sigma_hat2, m) in [(10.0, 10), (6.0, 10), (30.0, 30), (20.0, 30)] {
        let out = adaptive_test_b_unknown_var(&y, &cone, &sigma, sigma_hat2, m, 0.05, &adj)?;
        println!(
            "σ̂²={sigma_hat2:>4} m={m:>2}: statistic {:.4}, df {}, critical {:.4}, reject {}",
            out.statistic, out.df, out.critical_value, out.reject
        );
    }
    Ok(())
}
