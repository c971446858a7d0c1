//! Likelihood-ratio tests for polyhedral-cone hypotheses on Gaussian data.
//!
//! The null hypothesis is `μ ∈ C` with `C = {μ : Aμ ≥ 0}`, tested against all
//! alternatives from a single observation `Y ~ N(μ, V)`. The LR statistic is the
//! squared `V`-distance from `Y` to `C`, which equals the squared norm of the
//! projection of `Y` onto the polar cone `C°`.
//!
//! Two calibrations are provided:
//!
//! * the **adaptive critical value**: compare the LR with a single `χ²(r)`
//!   quantile, where `r` is the rank of the face of `C°` that receives the
//!   polar projection. No mixture weights are required, and the level is at
//!   most `(1 − P(Y ∈ C))·α`, which can be spent back through an
//!   [`AlphaAdjustment`](testkit::AlphaAdjustment);
//! * the classical **chi-bar-squared** test against the quantile of
//!   `Σ wᵢ χ²(i)`.
//!
//! ```
//! use conetest::{cone::PolyhedralCone, project::CovarianceSpec, testkit};
//!
//! let cone = PolyhedralCone::isotonic(3).unwrap();
//! let cov = CovarianceSpec::identity(3);
//! let adj = testkit::alpha_adjustment_for(&cone, testkit::AdjustmentMode::ExactBound).unwrap();
//! let out = testkit::adaptive_test_b(&[3.0, 1.0, 2.0], &cone, &cov, 0.05, &adj).unwrap();
//! assert_eq!(out.df.adaptive(), Some(2));
//! assert!(!out.reject);
//! ```

pub mod cli;
pub mod cone;
pub mod dist;
pub mod error;
pub(crate) mod fmt;
pub mod project;
pub mod sim;
pub mod testkit;

pub use cone::{ConeFamily, PolarCone, PolyhedralCone};
pub use dist::{ChiBarMixture, WeightProvenance};
pub use error::{ConeTestError, Result};
pub use project::{ConeProjection, CovarianceSpec};
pub use testkit::{AlphaAdjustment, Method, TestOutcome};
pub(crate) mod rng;
