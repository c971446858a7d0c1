//! Simulated rejection rates at null means, unadjusted and adjusted.

use conetest::project::CovarianceSpec;
use conetest::sim::estimate_level;
use conetest::testkit::{
    alpha_adjustment_for, AdjustmentMode, AlphaAdjustment, PreparedTest, TestKind,
};
use conetest::PolyhedralCone;

fn main() -> conetest::Result<()> {
    let nsim = 100_000;
    for cone in [PolyhedralCone::orthant(2)?, PolyhedralCone::isotonic(3)?] {
        let p = cone.dim();
        let cov = CovarianceSpec::identity(p);
        let exact = alpha_adjustment_for(&cone, AdjustmentMode::ExactBound)?;
        for (label, adj) in [("unadjusted", AlphaAdjustment::none()), ("adjusted", exact)] {
            let test = PreparedTest::new(TestKind::AdaptiveB, &cone, &cov, 0.05, adj)?;
            let mut mu = vec![0.0; p];
            for step in 0..3 {
                let est = estimate_level(&test, &mu, nsim, 11)?;
                println!(
                    "{} p={p} {label:<10} μ={mu:?}: {:.4} ± {:.4}",
                    cone.family(),
                    est.rate,
                    est.half_width
                );
                mu[0] -= 0.5 * (step + 1) as f64;
            }
        }
    }
    Ok(())
}
