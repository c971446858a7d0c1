//! Hypothesis tests built on the cone projection.
//!
//! The adaptive tests compare the LR statistic with a `χ²(r)` quantile whose
//! degrees of freedom `r` are read off the face reached by the projection.
//! [`PreparedTest`] caches the projector and the critical value per `r`, which
//! is what the simulation harness uses; the free functions are one-shot
//! wrappers around it.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::cone::{ConeFamily, PolyhedralCone, MEMBERSHIP_TOL};
use crate::dist::{
    chi2_quantile, chi2_ratio_sf, chi2_sf, fratio_quantile, ChiBarMixture, MIN_MC_SIMULATIONS,
};
use crate::error::{ConeTestError, Result};
use crate::fmt::sig;
use crate::project::{CovarianceSpec, Projector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Adaptive critical value for `H: μ ∈ C` against all alternatives.
    AdaptiveB,
    /// Chi-bar-squared mixture test for the same hypothesis.
    MixtureB,
    /// Adaptive test with `V = σ²Σ` and `σ²` estimated.
    AdaptiveBUnknownVar,
    /// Adaptive test of `μ = 0` against `μ ∈ C`.
    AdaptiveA,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::AdaptiveB => "adaptive_b",
            Method::MixtureB => "mixture_b",
            Method::AdaptiveBUnknownVar => "adaptive_b_unknown_var",
            Method::AdaptiveA => "adaptive_a",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = ConeTestError;

    fn from_str(s: &str) -> Result<Self> {
        [
            Method::AdaptiveB,
            Method::MixtureB,
            Method::AdaptiveBUnknownVar,
            Method::AdaptiveA,
        ]
        .into_iter()
        .find(|m| m.name() == s)
        .ok_or_else(|| ConeTestError::Usage(format!("unknown method `{s}`")))
    }
}

/// Degrees of freedom behind the critical value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectedDf {
    Adaptive(usize),
    Mixture,
}

impl SelectedDf {
    pub fn adaptive(self) -> Option<usize> {
        match self {
            SelectedDf::Adaptive(r) => Some(r),
            SelectedDf::Mixture => None,
        }
    }
}

impl fmt::Display for SelectedDf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SelectedDf::Adaptive(r) => write!(f, "{r}"),
            SelectedDf::Mixture => f.write_str("mixture"),
        }
    }
}

impl FromStr for SelectedDf {
    type Err = ConeTestError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "mixture" {
            return Ok(SelectedDf::Mixture);
        }
        s.parse()
            .map(SelectedDf::Adaptive)
            .map_err(|_| ConeTestError::Usage(format!("bad df `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome {
    pub method: Method,
    pub statistic: f64,
    pub critical_value: f64,
    pub df: SelectedDf,
    /// `statistic > critical_value`.
    pub reject: bool,
    /// `factor·α` for adaptive tests, `α` for the mixture test.
    pub effective_alpha: f64,
    /// Tail probability of the statistic under the selected reference law,
    /// divided by the adjustment factor; 1 when `r = 0`. A reporting
    /// convenience only: `reject` is always decided by the critical value.
    pub informal_p_value: f64,
    /// The adjustment was estimated by simulation and may overshoot `α`.
    pub level_warning: bool,
}

const OUTCOME_HEADER: [&str; 8] = [
    "method",
    "statistic",
    "critical_value",
    "df",
    "reject",
    "effective_alpha",
    "informal_p_value",
    "level_warning",
];

impl TestOutcome {
    /// Write a header and one record; reals at 10 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(OUTCOME_HEADER)?;
        w.write_record([
            self.method.to_string(),
            sig(self.statistic, 10),
            sig(self.critical_value, 10),
            self.df.to_string(),
            self.reject.to_string(),
            sig(self.effective_alpha, 10),
            sig(self.informal_p_value, 10),
            self.level_warning.to_string(),
        ])?;
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        if rdr.headers()?.iter().ne(OUTCOME_HEADER) {
            return Err(ConeTestError::parse(1, "unexpected test outcome header"));
        }
        let rec = rdr
            .records()
            .next()
            .ok_or_else(|| ConeTestError::parse(2, "missing outcome record"))??;
        let line = rec.position().map_or(2, |p| p.line() as usize);
        let real = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| {
                ConeTestError::parse(line, format!("bad {} `{}`", OUTCOME_HEADER[i], &rec[i]))
            })
        };
        let flag = |i: usize| -> Result<bool> {
            rec[i].parse().map_err(|_| {
                ConeTestError::parse(line, format!("bad {} `{}`", OUTCOME_HEADER[i], &rec[i]))
            })
        };
        let bad = |e: ConeTestError| ConeTestError::parse(line, e.to_string());
        Ok(TestOutcome {
            method: rec[0].parse().map_err(bad)?,
            statistic: real(1)?,
            critical_value: real(2)?,
            df: rec[3].parse().map_err(bad)?,
            reject: flag(4)?,
            effective_alpha: real(5)?,
            informal_p_value: real(6)?,
            level_warning: flag(7)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustmentBasis {
    None,
    /// Closed-form lower bound on the null probability of the cone.
    ExactBound,
    MonteCarloEstimate {
        nsim: usize,
        seed: u64,
    },
}

/// Multiplier applied to `α` to spend the slack in the adaptive level bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaAdjustment {
    pub factor: f64,
    pub basis: AdjustmentBasis,
}

impl AlphaAdjustment {
    pub fn none() -> Self {
        AlphaAdjustment {
            factor: 1.0,
            basis: AdjustmentBasis::None,
        }
    }

    pub fn level_warning(&self) -> bool {
        matches!(self.basis, AdjustmentBasis::MonteCarloEstimate { .. })
    }

    fn exact(factor: f64) -> Self {
        AlphaAdjustment {
            factor,
            basis: AdjustmentBasis::ExactBound,
        }
    }
}

impl Default for AlphaAdjustment {
    fn default() -> Self {
        Self::none()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdjustmentMode {
    None,
    ExactBound,
    MonteCarloEstimate { nsim: usize, seed: u64 },
}

/// `2ᵖ/(2ᵖ − 1)`.
pub fn orthant_factor(p: usize) -> f64 {
    1.0 / (1.0 - 0.5_f64.powi(p as i32))
}

/// `p!/(p! − 1)`, clamped to 1 from `p = 13` on where it is within `1e−9` of 1.
pub fn isotonic_factor(p: usize) -> f64 {
    if p >= 13 {
        return 1.0;
    }
    let f = (2..=p as u64).product::<u64>() as f64;
    f / (f - 1.0)
}

/// Adjustment for the type B adaptive test with identity covariance.
pub fn alpha_adjustment_for(
    cone: &PolyhedralCone,
    mode: AdjustmentMode,
) -> Result<AlphaAdjustment> {
    alpha_adjustment_with_cov(cone, &CovarianceSpec::identity(cone.dim()), mode)
}

/// Adjustment for the type B adaptive test, `1/(1 − P(Y ∈ C))` at `μ = 0`.
///
/// The exact bound is available for orthants under a diagonal covariance and
/// for isotonic cones under equal variances.
pub fn alpha_adjustment_with_cov(
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    mode: AdjustmentMode,
) -> Result<AlphaAdjustment> {
    cone.check_dim(cov.dim())?;
    match mode {
        AdjustmentMode::None => Ok(AlphaAdjustment::none()),
        AdjustmentMode::ExactBound => {
            if cone.is_signed_orthant() {
                if cov.is_diagonal() {
                    return Ok(AlphaAdjustment::exact(orthant_factor(cone.dim())));
                }
                return Err(ConeTestError::UnsupportedFamily(
                    "orthant with correlated covariance",
                ));
            }
            match cone.family() {
                ConeFamily::Isotonic if cov.is_scalar() => {
                    Ok(AlphaAdjustment::exact(isotonic_factor(cone.dim())))
                }
                ConeFamily::Isotonic => Err(ConeTestError::UnsupportedFamily(
                    "isotonic with unequal variances",
                )),
                _ => Err(ConeTestError::UnsupportedFamily("general")),
            }
        }
        AdjustmentMode::MonteCarloEstimate { nsim, seed } => {
            check_nsim(nsim)?;
            let counts = crate::dist::face_rank_counts(cone, cov, nsim, seed)?;
            Ok(mc_adjustment(counts[0], nsim, seed))
        }
    }
}

/// Adjustment for the type A adaptive test, `1/(1 − P(Y ∈ C°))` at `μ = 0`.
///
/// Orthants under a diagonal covariance give `2ᵖ/(2ᵖ − 1)`. An isotonic cone
/// contains the constant vectors, so `C°` is a null set and no adjustment is
/// possible.
pub fn type_a_adjustment_for(
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    mode: AdjustmentMode,
) -> Result<AlphaAdjustment> {
    cone.check_dim(cov.dim())?;
    match mode {
        AdjustmentMode::None => Ok(AlphaAdjustment::none()),
        AdjustmentMode::ExactBound => {
            if cone.is_signed_orthant() && cov.is_diagonal() {
                Ok(AlphaAdjustment::exact(orthant_factor(cone.dim())))
            } else if cone.family() == ConeFamily::Isotonic {
                Ok(AlphaAdjustment::exact(1.0))
            } else {
                Err(ConeTestError::UnsupportedFamily("general"))
            }
        }
        AdjustmentMode::MonteCarloEstimate { nsim, seed } => {
            check_nsim(nsim)?;
            let in_polar = polar_hits(cone, cov, nsim, seed)?;
            Ok(mc_adjustment(in_polar, nsim, seed))
        }
    }
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

fn mc_adjustment(hits: u64, nsim: usize, seed: u64) -> AlphaAdjustment {
    AlphaAdjustment {
        factor: 1.0 / (1.0 - hits as f64 / nsim as f64),
        basis: AdjustmentBasis::MonteCarloEstimate { nsim, seed },
    }
}

fn polar_hits(cone: &PolyhedralCone, cov: &CovarianceSpec, nsim: usize, seed: u64) -> Result<u64> {
    use rayon::prelude::*;

    let projector = Projector::new(cone, cov)?;
    let p = cone.dim();
    let gauss = crate::rng::Gaussian::new(&vec![0.0; p], cov.cholesky());
    crate::rng::chunks(nsim)
        .into_par_iter()
        .map(|(chunk, len)| {
            let mut rng = crate::rng::stream(seed, crate::rng::stream_id(0, chunk));
            let mut xi = nalgebra::DVector::zeros(p);
            let mut z = Vec::with_capacity(p);
            let mut hits = 0u64;
            for _ in 0..len {
                gauss.sample_into(&mut rng, &mut xi, &mut z);
                let proj = projector.project(&z)?;
                let norm = proj
                    .whitened_polar
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                let point = proj
                    .whitened_point
                    .iter()
                    .map(|v| v * v)
                    .sum::<f64>()
                    .sqrt();
                hits += u64::from(point <= MEMBERSHIP_TOL * norm);
            }
            Ok(hits)
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

/// Which test a [`PreparedTest`] runs.
#[derive(Debug, Clone, PartialEq)]
pub enum TestKind {
    AdaptiveB,
    MixtureB(ChiBarMixture),
    AdaptiveBUnknownVar { m: u32 },
    AdaptiveA,
}

impl TestKind {
    pub fn method(&self) -> Method {
        match self {
            TestKind::AdaptiveB => Method::AdaptiveB,
            TestKind::MixtureB(_) => Method::MixtureB,
            TestKind::AdaptiveBUnknownVar { .. } => Method::AdaptiveBUnknownVar,
            TestKind::AdaptiveA => Method::AdaptiveA,
        }
    }
}

/// A test with its projector and critical values precomputed.
#[derive(Debug, Clone)]
pub struct PreparedTest {
    kind: TestKind,
    projector: Projector,
    adj: AlphaAdjustment,
    effective_alpha: f64,
    /// Critical value by selected df; a single entry for the mixture test.
    critical: Vec<f64>,
}

impl PreparedTest {
    pub fn new(
        kind: TestKind,
        cone: &PolyhedralCone,
        cov: &CovarianceSpec,
        alpha: f64,
        adj: AlphaAdjustment,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(ConeTestError::InvalidProbability(alpha));
        }
        let projector = Projector::new(cone, cov)?;
        let p = cone.dim();
        let (effective_alpha, critical) = match &kind {
            TestKind::MixtureB(mix) => {
                if mix.max_df() > p {
                    return Err(ConeTestError::DimensionMismatch {
                        expected: p + 1,
                        found: mix.weights().len(),
                    });
                }
                (alpha, vec![mix.quantile(alpha)?])
            }
            _ => {
                let ea = adj.factor * alpha;
                if ea >= 1.0 || ea.is_nan() {
                    return Err(ConeTestError::AlphaOverflow {
                        alpha,
                        factor: adj.factor,
                    });
                }
                let table = (0..=p as u32)
                    .map(|r| match (&kind, r) {
                        (_, 0) => Ok(0.0),
                        (TestKind::AdaptiveBUnknownVar { m }, r) => {
                            fratio_quantile(r, *m, 1.0 - ea)
                        }
                        (_, r) => chi2_quantile(r, 1.0 - ea),
                    })
                    .collect::<Result<Vec<_>>>()?;
                (ea, table)
            }
        };
        let adj = match kind {
            TestKind::MixtureB(_) => AlphaAdjustment::none(),
            _ => adj,
        };
        Ok(PreparedTest {
            kind,
            projector,
            adj,
            effective_alpha,
            critical,
        })
    }

    pub fn kind(&self) -> &TestKind {
        &self.kind
    }

    pub fn method(&self) -> Method {
        self.kind.method()
    }

    pub fn projector(&self) -> &Projector {
        &self.projector
    }

    pub fn effective_alpha(&self) -> f64 {
        self.effective_alpha
    }

    /// Critical value for selected df `r` (ignored by the mixture test).
    pub fn critical_value(&self, r: usize) -> f64 {
        match self.kind {
            TestKind::MixtureB(_) => self.critical[0],
            _ => self.critical[r],
        }
    }

    /// Run a known-variance test.
    pub fn evaluate(&self, y: &[f64]) -> Result<TestOutcome> {
        if let TestKind::AdaptiveBUnknownVar { .. } = self.kind {
            return Err(ConeTestError::Usage(
                "the unknown-variance test needs a variance estimate".into(),
            ));
        }
        self.run(y, 1.0)
    }

    /// Run the unknown-variance test with estimate `σ̂²`.
    pub fn evaluate_unknown_var(&self, y: &[f64], sigma_hat2: f64) -> Result<TestOutcome> {
        if !matches!(self.kind, TestKind::AdaptiveBUnknownVar { .. }) {
            return Err(ConeTestError::Usage(
                "a variance estimate only applies to the unknown-variance test".into(),
            ));
        }
        if !(sigma_hat2 > 0.0 && sigma_hat2.is_finite()) {
            return Err(ConeTestError::NonPositiveVarianceEstimate(sigma_hat2));
        }
        self.run(y, sigma_hat2)
    }

    fn run(&self, y: &[f64], sigma_hat2: f64) -> Result<TestOutcome> {
        let proj = self.projector.project(y)?;
        let (statistic, df) = match &self.kind {
            TestKind::AdaptiveA => (
                proj.whitened_point.iter().map(|v| v * v).sum(),
                SelectedDf::Adaptive(self.projector.primal_face_dim(&proj)),
            ),
            TestKind::MixtureB(_) => (proj.lr, SelectedDf::Mixture),
            TestKind::AdaptiveBUnknownVar { .. } => {
                (proj.lr / sigma_hat2, SelectedDf::Adaptive(proj.face_rank))
            }
            TestKind::AdaptiveB => (proj.lr, SelectedDf::Adaptive(proj.face_rank)),
        };
        let critical_value = self.critical_value(df.adaptive().unwrap_or(0));
        let informal_p_value = match (&self.kind, df) {
            (TestKind::MixtureB(mix), _) => mix.sf(statistic),
            (_, SelectedDf::Adaptive(0)) => 1.0,
            (TestKind::AdaptiveBUnknownVar { m }, SelectedDf::Adaptive(r)) => {
                chi2_ratio_sf(r as u32, *m, statistic) / self.adj.factor
            }
            (_, SelectedDf::Adaptive(r)) => chi2_sf(r as u32, statistic) / self.adj.factor,
            (_, SelectedDf::Mixture) => unreachable!("only the mixture test selects the mixture"),
        };
        Ok(TestOutcome {
            method: self.method(),
            statistic,
            critical_value,
            df,
            reject: statistic > critical_value,
            effective_alpha: self.effective_alpha,
            informal_p_value,
            level_warning: self.adj.level_warning(),
        })
    }
}

/// Adaptive test of `μ ∈ C` against all alternatives: reject when the LR
/// exceeds the `1 − factor·α` quantile of `χ²(r)`, `r` the polar face rank.
pub fn adaptive_test_b(
    y: &[f64],
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    alpha: f64,
    adj: &AlphaAdjustment,
) -> Result<TestOutcome> {
    PreparedTest::new(TestKind::AdaptiveB, cone, cov, alpha, *adj)?.evaluate(y)
}

/// Classical test against the `1 − α` quantile of the chi-bar-squared mixture.
pub fn mixture_test_b(
    y: &[f64],
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    alpha: f64,
    mix: &ChiBarMixture,
) -> Result<TestOutcome> {
    PreparedTest::new(
        TestKind::MixtureB(mix.clone()),
        cone,
        cov,
        alpha,
        AlphaAdjustment::none(),
    )?
    .evaluate(y)
}

/// Adaptive type B test when `V = σ²Σ` with `σ̂²/σ² ~ χ²(m)` independent of `y`.
///
/// The statistic is the `Σ`-norm LR divided by `σ̂²` and the reference law is
/// `χ²(r)/χ²(m)`.
pub fn adaptive_test_b_unknown_var(
    y: &[f64],
    cone: &PolyhedralCone,
    sigma_mat: &CovarianceSpec,
    sigma_hat2: f64,
    m: u32,
    alpha: f64,
    adj: &AlphaAdjustment,
) -> Result<TestOutcome> {
    if m == 0 {
        return Err(ConeTestError::Usage("m must be positive".into()));
    }
    PreparedTest::new(
        TestKind::AdaptiveBUnknownVar { m },
        cone,
        sigma_mat,
        alpha,
        *adj,
    )?
    .evaluate_unknown_var(y, sigma_hat2)
}

/// Adaptive test of `μ = 0` against `μ ∈ C`: the statistic is `‖Π_V(y|C)‖²_V`
/// and `r` is the dimension of the face of `C` holding the projection.
pub fn adaptive_test_a(
    y: &[f64],
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
    alpha: f64,
    adj: &AlphaAdjustment,
) -> Result<TestOutcome> {
    PreparedTest::new(TestKind::AdaptiveA, cone, cov, alpha, *adj)?.evaluate(y)
}
