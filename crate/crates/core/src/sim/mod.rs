//! Monte Carlo harness: rejection rates at null points, power grids comparing
//! the adaptive and mixture tests, and crossover curves.
//!
//! Every work item (grid point) owns a range of RNG streams, and each stream
//! covers a fixed-size chunk of draws. Counts are summed, so results are
//! bit-identical for a given seed whatever the number of worker threads.

mod crossover;

use std::io::Write;

use nalgebra::DVector;
use rand_distr::{ChiSquared, Distribution};
use rayon::prelude::*;

pub use crossover::{crossover_curve, CrossoverCurve, CrossoverRow};

use crate::cone::{ConeFamily, PolyhedralCone, MEMBERSHIP_TOL};
use crate::dist::{exact_weights, MIN_MC_SIMULATIONS};
use crate::error::{ConeTestError, Result};
use crate::fmt::sig;
use crate::project::CovarianceSpec;
use crate::rng;
use crate::testkit::{
    alpha_adjustment_with_cov, AdjustmentMode, AlphaAdjustment, PreparedTest, TestKind,
};

/// `1.96·√(r(1 − r)/n)`.
pub fn half_width(rate: f64, nsim: usize) -> f64 {
    1.96 * (rate * (1.0 - rate) / nsim as f64).sqrt()
}

/// Rejection counts of each test over `nsim` draws of `Y ~ N(μ, V)`, all tests
/// seeing the same draws. `V` is the covariance of the first test.
///
/// Unknown-variance tests get an independent `σ̂² ~ χ²(m)` per draw, the true
/// `σ²` being 1.
pub fn rejection_counts(
    tests: &[&PreparedTest],
    mu: &[f64],
    nsim: usize,
    seed: u64,
    item: usize,
) -> Result<Vec<u64>> {
    let first = tests.first().ok_or(ConeTestError::EmptyInput)?;
    let cov = first.projector().covariance();
    first.projector().cone().check_dim(mu.len())?;
    let gauss = rng::Gaussian::new(mu, cov.cholesky());
    let chi2 = tests
        .iter()
        .map(|t| match t.kind() {
            TestKind::AdaptiveBUnknownVar { m } => {
                Some(ChiSquared::new(f64::from(*m)).expect("m ≥ 1"))
            }
            _ => None,
        })
        .collect::<Vec<_>>();
    let p = mu.len();
    rng::chunks(nsim)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = rng::stream(seed, rng::stream_id(item, chunk));
            let mut xi = DVector::zeros(p);
            let mut y = Vec::with_capacity(p);
            let mut counts = vec![0u64; tests.len()];
            for _ in 0..len {
                gauss.sample_into(&mut rng, &mut xi, &mut y);
                for (k, t) in tests.iter().enumerate() {
                    let out = match &chi2[k] {
                        Some(d) => t.evaluate_unknown_var(&y, d.sample(&mut rng))?,
                        None => t.evaluate(&y)?,
                    };
                    counts[k] += u64::from(out.reject);
                }
            }
            Ok(counts)
        })
        .try_reduce(
            || vec![0u64; tests.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )
}

fn check_nsim(nsim: usize) -> Result<()> {
    if nsim < MIN_MC_SIMULATIONS {
        return Err(ConeTestError::TooFewSimulations {
            found: nsim,
            minimum: MIN_MC_SIMULATIONS,
        });
    }
    Ok(())
}

/// Rejection rate of one test at one null mean.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelEstimate {
    pub mu: Vec<f64>,
    pub rejections: u64,
    pub rate: f64,
    pub half_width: f64,
    pub nsim: usize,
    pub seed: u64,
}

impl LevelEstimate {
    /// Binomial standard error of the rate at `rate0`.
    pub fn sigma_at(&self, rate0: f64) -> f64 {
        (rate0 * (1.0 - rate0) / self.nsim as f64).sqrt()
    }
}

/// Estimate the rejection rate of `test` at a null mean.
///
/// For type B tests `μ` must lie in the cone; for the type A test the null is
/// `μ = 0`.
pub fn estimate_level(
    test: &PreparedTest,
    mu: &[f64],
    nsim: usize,
    seed: u64,
) -> Result<LevelEstimate> {
    check_nsim(nsim)?;
    let cone = test.projector().cone();
    cone.check_dim(mu.len())?;
    let in_null = match test.kind() {
        TestKind::AdaptiveA => mu.iter().all(|&v| v == 0.0),
        _ => cone.contains(mu, MEMBERSHIP_TOL)?,
    };
    if !in_null {
        return Err(ConeTestError::MuOutsideNull);
    }
    let rejections = rejection_counts(&[test], mu, nsim, seed, 0)?[0];
    let rate = rejections as f64 / nsim as f64;
    Ok(LevelEstimate {
        mu: mu.to_vec(),
        rejections,
        rate,
        half_width: half_width(rate, nsim),
        nsim,
        seed,
    })
}

/// How a 2-d grid coordinate `(x, y)` maps to a mean vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanParam {
    /// `μ = (x, y)`.
    Raw,
    /// Successive differences of a 3-vector: `η₁ = μ₁ − μ₂ = x`,
    /// `η₂ = μ₂ − μ₃ = y`, with `μ₁ = 0`.
    Differences,
}

impl MeanParam {
    pub fn dim(self) -> usize {
        match self {
            MeanParam::Raw => 2,
            MeanParam::Differences => 3,
        }
    }

    pub fn mean(self, x: f64, y: f64) -> Vec<f64> {
        match self {
            MeanParam::Raw => vec![x, y],
            MeanParam::Differences => vec![0.0, -x, -x - y],
        }
    }

    /// Default for a cone: differences for isotonic, raw otherwise.
    pub fn for_cone(cone: &PolyhedralCone) -> Result<Self> {
        let param = match cone.family() {
            ConeFamily::Isotonic => MeanParam::Differences,
            _ => MeanParam::Raw,
        };
        cone.check_dim(param.dim())?;
        Ok(param)
    }
}

/// Rectangular lattice `xs × ys`, traversed with `x` varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Grid {
    /// `n` evenly spaced points on `[lo, hi]` along both axes.
    pub fn square(lo: f64, hi: f64, n: usize) -> Self {
        let axis: Vec<f64> = match n {
            0 => vec![],
            1 => vec![lo],
            _ => (0..n)
                .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
                .collect(),
        };
        Grid {
            xs: axis.clone(),
            ys: axis,
        }
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .flat_map(|&x| self.ys.iter().map(move |&y| (x, y)))
            .collect()
    }

    /// Default lattice: 41×41 over `[−1, 6]²` for orthants, `[−6, 1]²` in the
    /// differences for isotonic cones.
    pub fn default_for(param: MeanParam) -> Self {
        match param {
            MeanParam::Raw => Grid::square(-1.0, 6.0, 41),
            MeanParam::Differences => Grid::square(-6.0, 1.0, 41),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerPoint {
    pub x: f64,
    pub y: f64,
    pub mu: Vec<f64>,
    pub rate_adaptive: f64,
    pub rate_mixture: f64,
    /// Larger of the two rates' 95% half-widths.
    pub half_width: f64,
}

impl PowerPoint {
    /// `rate_mixture − rate_adaptive`: positive where the classical test is
    /// more powerful.
    pub fn diff(&self) -> f64 {
        self.rate_mixture - self.rate_adaptive
    }
}

/// Power of the adaptive and mixture tests over a grid of means.
#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub points: Vec<PowerPoint>,
    pub nsim: usize,
    pub seed: u64,
    pub alpha: f64,
    pub family: ConeFamily,
}

impl SimReport {
    /// CSV with a `#` comment header, then
    /// `x,y,rate_adaptive,rate_mixture,diff,half_width`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# seed={} nsim={} alpha={} family={}",
            self.seed,
            self.nsim,
            sig(self.alpha, 10),
            self.family
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "x",
            "y",
            "rate_adaptive",
            "rate_mixture",
            "diff",
            "half_width",
        ])?;
        for pt in &self.points {
            w.write_record(
                [
                    pt.x,
                    pt.y,
                    pt.rate_adaptive,
                    pt.rate_mixture,
                    pt.diff(),
                    pt.half_width,
                ]
                .map(|v| sig(v, 10)),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// Point where the adaptive test gains most over the mixture test, and
    /// where it loses most.
    pub fn extremes(&self) -> Option<(&PowerPoint, &PowerPoint)> {
        let by_diff = |a: &&PowerPoint, b: &&PowerPoint| a.diff().total_cmp(&b.diff());
        Some((
            self.points.iter().min_by(by_diff)?,
            self.points.iter().max_by(by_diff)?,
        ))
    }
}

/// The two tests compared by a power study.
#[derive(Debug, Clone)]
pub struct PowerSetup {
    pub alpha: f64,
    pub adaptive: PreparedTest,
    pub mixture: PreparedTest,
}

impl PowerSetup {
    /// Exactly adjusted adaptive test against the exact mixture test. Needs a
    /// cone and covariance with closed-form weights.
    pub fn exact(cone: &PolyhedralCone, cov: &CovarianceSpec, alpha: f64) -> Result<Self> {
        let adj = alpha_adjustment_with_cov(cone, cov, AdjustmentMode::ExactBound)?;
        let mix = exact_weights(cone, cov).ok_or(ConeTestError::UnsupportedFamily("general"))?;
        Self::new(cone, cov, alpha, adj, mix)
    }

    pub fn new(
        cone: &PolyhedralCone,
        cov: &CovarianceSpec,
        alpha: f64,
        adj: AlphaAdjustment,
        mix: crate::dist::ChiBarMixture,
    ) -> Result<Self> {
        Ok(PowerSetup {
            alpha,
            adaptive: PreparedTest::new(TestKind::AdaptiveB, cone, cov, alpha, adj)?,
            mixture: PreparedTest::new(
                TestKind::MixtureB(mix),
                cone,
                cov,
                alpha,
                AlphaAdjustment::none(),
            )?,
        })
    }
}

/// Power grid with exact adjustment and exact mixture weights, using the
/// default mean parameterization for the cone.
pub fn power_grid(
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    alpha: f64,
    grid: &Grid,
    nsim: usize,
    seed: u64,
) -> Result<SimReport> {
    let setup = PowerSetup::exact(cone, cov, alpha)?;
    power_grid_with(&setup, MeanParam::for_cone(cone)?, grid, nsim, seed)
}

/// Power of both tests at each grid point, from common random draws.
pub fn power_grid_with(
    setup: &PowerSetup,
    param: MeanParam,
    grid: &Grid,
    nsim: usize,
    seed: u64,
) -> Result<SimReport> {
    check_nsim(nsim)?;
    let cone = setup.adaptive.projector().cone();
    cone.check_dim(param.dim())?;
    let points = grid
        .points()
        .into_iter()
        .enumerate()
        .map(|(item, (x, y))| {
            let mu = param.mean(x, y);
            let counts =
                rejection_counts(&[&setup.adaptive, &setup.mixture], &mu, nsim, seed, item)?;
            let rate_adaptive = counts[0] as f64 / nsim as f64;
            let rate_mixture = counts[1] as f64 / nsim as f64;
            Ok(PowerPoint {
                x,
                y,
                mu,
                rate_adaptive,
                rate_mixture,
                half_width: half_width(rate_adaptive, nsim).max(half_width(rate_mixture, nsim)),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SimReport {
        points,
        nsim,
        seed,
        alpha: setup.alpha,
        family: cone.family(),
    })
}
