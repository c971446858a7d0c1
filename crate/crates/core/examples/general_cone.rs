//! A cone given by its constraint matrix, with correlated observations.

use conetest::dist::mc_weights;
use conetest::project::{project, CovarianceSpec};
use conetest::testkit::{
    adaptive_test_b, alpha_adjustment_with_cov, mixture_test_b, AdjustmentMode,
};
use conetest::PolyhedralCone;
use nalgebra::DMatrix;

fn main() -> conetest::Result<()> {
    // μ₁ ≥ 0, μ₂ ≥ μ₁, μ₁ + μ₂ + μ₃ ≥ 0
    let cone = PolyhedralCone::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 1.0, 0.0],
        vec![1.0, 1.0, 1.0],
    ])?;
    let cov = CovarianceSpec::new(DMatrix::from_row_slice(
        3,
        3,
        &[1.0, 0.4, 0.1, 0.4, 1.5, 0.2, 0.1, 0.2, 0.8],
    ))?;
    println!("family: {}", cone.family());
    println!("polar generators:\n{}", cone.polar().generators());

    let y = [0.8, -1.9, 0.5];
    let proj = project(&y, &cone, &cov)?;
    println!("projection {:?}", proj.point);
    println!(
        "LR {:.4}, active {:?}, face rank {}",
        proj.lr, proj.active_set, proj.face_rank
    );

    // No closed-form bound or weights for this cone: simulate both.
    let mode = AdjustmentMode::MonteCarloEstimate {
        nsim: 100_000,
        seed: 7,
    };
    let adj = alpha_adjustment_with_cov(&cone, &cov, mode)?;
    let mix = mc_weights(&cone, &cov, 100_000, 8)?;
    let adaptive = adaptive_test_b(&y, &cone, &cov, 0.05, &adj)?;
    let classical = mixture_test_b(&y, &cone, &cov, 0.05, &mix)?;
    println!(
        "estimated factor {:.4} (level warning: {})",
        adj.factor,
        adj.level_warning()
    );
    println!(
        "adaptive: crit {:.4} reject {}",
        adaptive.critical_value, adaptive.reject
    );
    println!(
        "mixture:  crit {:.4} reject {}",
        classical.critical_value, classical.reject
    );
    Ok(())
}
