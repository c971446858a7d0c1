//! Testing `μ = 0` against `μ` in a cone.

use conetest::project::CovarianceSpec;
use conetest::testkit::{adaptive_test_a, type_a_adjustment_for, AdjustmentMode};
use conetest::PolyhedralCone;
use nalgebra::DMatrix;

fn main() -> conetest::Result<()> {
    let cone = PolyhedralCone::new(DMatrix::identity(2, 2), None)?;
    let cov = CovarianceSpec::identity(2);
    let adj = type_a_adjustment_for(&cone, &cov, AdjustmentMode::ExactBound)?;
    println!("adjustment factor {:.6}", adj.factor);
    for y in [[3.0, -1.0], [1.5, 1.5], [-1.0, -1.0], [2.2, 0.3]] {
        let out = adaptive_test_a(&y, &cone, &cov, 0.05, &adj)?;
        println!(
            "{y:?}: statistic {:.3}, df {}, critical {:.3}, reject {}",
            out.statistic, out.df, out.critical_value, out.reject
        );
    }
    Ok(())
}
