mod common;

use common::binom_sigma;
use conetest::cone::{ConeFamily, PolyhedralCone};
use conetest::dist::{chi2_quantile, mixture_quantile, orthant_weights};
use conetest::project::CovarianceSpec;
use conetest::sim::{crossover_curve, estimate_level, power_grid, Grid, SimReport};
use conetest::testkit::{alpha_adjustment_for, AdjustmentMode, PreparedTest, TestKind};
use conetest::ConeTestError;

const ALPHA: f64 = 0.05;

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
        .install(f)
}

fn adjusted(cone: &PolyhedralCone) -> PreparedTest {
    let cov = CovarianceSpec::identity(cone.dim());
    let adj = alpha_adjustment_for(cone, AdjustmentMode::ExactBound).unwrap();
    PreparedTest::new(TestKind::AdaptiveB, cone, &cov, ALPHA, adj).unwrap()
}

#[test]
fn level_is_independent_of_thread_count() {
    let cone = PolyhedralCone::isotonic(4).unwrap();
    let test = adjusted(&cone);
    let mu = [-1.0, -0.5, 0.0, 0.0];
    let one = in_pool(1, || estimate_level(&test, &mu, 30_000, 77).unwrap());
    let four = in_pool(4, || estimate_level(&test, &mu, 30_000, 77).unwrap());
    assert_eq!(one, four);
    let other_seed = in_pool(4, || estimate_level(&test, &mu, 30_000, 78).unwrap());
    assert_ne!(one.rejections, other_seed.rejections);
}

#[test]
fn power_grid_is_independent_of_thread_count() {
    let cone = PolyhedralCone::orthant(2).unwrap();
    let cov = CovarianceSpec::identity(2);
    let grid = Grid::square(-1.0, 3.0, 3);
    let run = |threads| {
        in_pool(threads, || {
            power_grid(&cone, &cov, ALPHA, &grid, 10_000, 5).unwrap()
        })
    };
    let (a, b) = (run(1), run(4));
    assert_eq!(a, b);
    let csv = |r: &SimReport| {
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        buf
    };
    assert_eq!(csv(&a), csv(&b));
    let text = String::from_utf8(csv(&a)).unwrap();
    assert!(text.starts_with("# seed=5 nsim=10000 alpha=0.05 family=orthant\n"));
    assert_eq!(text.lines().count(), 2 + 9);
}

#[test]
fn too_few_simulations_rejected() {
    let cone = PolyhedralCone::orthant(2).unwrap();
    let err = estimate_level(&adjusted(&cone), &[0.0, 0.0], 500, 1).unwrap_err();
    assert!(matches!(err, ConeTestError::TooFewSimulations { .. }));
    let err = estimate_level(&adjusted(&cone), &[1.0, 0.0], 20_000, 1).unwrap_err();
    assert!(matches!(err, ConeTestError::MuOutsideNull));
}

#[test]
fn isotonic_crossover_at_three() {
    let curve = crossover_curve(ConeFamily::Isotonic, 2..=10, ALPHA).unwrap();
    let row = curve.row(3).unwrap();
    assert_eq!(row.max_violations, 1);
    assert!((row.mixture_quantile - 4.6).abs() < 0.05);
    for row in &curve.rows {
        let k = row.max_violations;
        if k > 0 {
            assert!(chi2_quantile(k as u32, 1.0 - ALPHA).unwrap() < row.mixture_quantile);
        }
        if k < row.p {
            assert!(chi2_quantile(k as u32 + 1, 1.0 - ALPHA).unwrap() >= row.mixture_quantile);
        }
    }
}

#[test]
fn orthant_crossover_tracks_half_the_dimension() {
    let curve = crossover_curve(ConeFamily::Orthant, 2..=100, ALPHA).unwrap();
    assert_eq!(curve.rows.len(), 99);
    let mut off = 0;
    for row in &curve.rows {
        let gap = row.max_violations.abs_diff(row.p / 2);
        if gap > 2 {
            off += 1;
        }
        let q = mixture_quantile(&orthant_weights(row.p), ALPHA).unwrap();
        assert_eq!(q, row.mixture_quantile);
    }
    eprintln!("orthant crossover: {off} of 99 dimensions more than 2 from p/2");
    assert!(curve
        .rows
        .windows(2)
        .all(|w| w[0].max_violations <= w[1].max_violations));
}

#[test]
fn crossover_rejects_general_family() {
    let err = crossover_curve(ConeFamily::General, 2..=3, ALPHA).unwrap_err();
    assert!(matches!(err, ConeTestError::UnsupportedFamily(_)));
}

/// `(x, y, adaptive_should_win)` for each grid point.
fn check_power_signs(cone: &PolyhedralCone, points: &[(f64, f64, bool)]) {
    let nsim = 100_000;
    let cov = CovarianceSpec::identity(cone.dim());
    for (i, &(x, y, adaptive_wins)) in points.iter().enumerate() {
        let grid = Grid {
            xs: vec![x],
            ys: vec![y],
        };
        let report = power_grid(cone, &cov, ALPHA, &grid, nsim, 900 + i as u64).unwrap();
        let pt = &report.points[0];
        let gap = if adaptive_wins { -pt.diff() } else { pt.diff() };
        let overlap =
            1.96 * (binom_sigma(pt.rate_adaptive, nsim) + binom_sigma(pt.rate_mixture, nsim));
        assert!(
            gap > overlap,
            "({x},{y}): adaptive {} mixture {}",
            pt.rate_adaptive,
            pt.rate_mixture
        );
    }
}

#[test]
fn orthant_power_signs() {
    let cone = PolyhedralCone::orthant(2).unwrap();
    check_power_signs(
        &cone,
        &[
            (3.0, -3.0, true),
            (2.0, -1.0, true),
            (2.5, 2.5, false),
            (1.5, 1.5, false),
        ],
    );
}

#[test]
fn isotonic_power_signs() {
    let cone = PolyhedralCone::isotonic(3).unwrap();
    check_power_signs(
        &cone,
        &[
            (1.0, -4.0, true),
            (3.0, -3.0, true),
            (2.0, 2.0, false),
            (1.5, 1.5, false),
        ],
    );
}
