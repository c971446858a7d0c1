//! Power difference between the mixture and adaptive tests on a grid.
//!
//! Writes `power_orthant.csv` and `power_isotonic.csv` to the current
//! directory for contour plotting.

use std::fs::File;

use conetest::project::CovarianceSpec;
use conetest::sim::{power_grid, Grid, MeanParam};
use conetest::PolyhedralCone;

fn main() -> conetest::Result<()> {
    for (name, cone) in [
        ("orthant", PolyhedralCone::orthant(2)?),
        ("isotonic", PolyhedralCone::isotonic(3)?),
    ] {
        let param = MeanParam::for_cone(&cone)?;
        let full = Grid::default_for(param);
        // Every fourth lattice point keeps the run short.
        let grid = Grid {
            xs: full.xs.iter().step_by(4).copied().collect(),
            ys: full.ys.iter().step_by(4).copied().collect(),
        };
        let cov = CovarianceSpec::identity(cone.dim());
        let report = power_grid(&cone, &cov, 0.05, &grid, 20_000, 2024)?;
        let (best, worst) = report.extremes().expect("nonempty grid");
        println!(
            "{name}: adaptive gains {:.3} at ({:.2}, {:.2}), loses {:.3} at ({:.2}, {:.2})",
            -best.diff(),
            best.x,
            best.y,
            worst.diff(),
            worst.x,
            worst.y
        );
        report.write_csv(File::create(format!("power_{name}.csv"))?)?;
    }
    Ok(())
}
