//! Projection of an observation onto a polyhedral cone and its polar.
//!
//! Everything happens in the whitened frame `z = Wy` (with `WᵀW = V⁻¹`),
//! where the `V`-norm is Euclidean and the cone becomes `{z : ALz ≥ 0}`. The
//! polar projection is found by active-set NNLS over the whitened polar
//! generators `−Lᵀaᵢ`; the primal projection follows from the Moreau
//! decomposition `z = Π(z|C) + Π(z|C°)`.

mod covariance;
mod nnls;
mod pava;

use nalgebra::{DMatrix, DVector};

pub use covariance::{CovarianceKind, CovarianceSpec};
pub use pava::{pava, pava_unit, IsotonicFit};

use crate::cone::{ConeFamily, PolyhedralCone, MEMBERSHIP_TOL};
#[cfg(test)]
use crate::error::ConeTestError;
use crate::error::Result;

/// Relative singular-value cutoff for numerical rank, scaled by `p·σ_max`.
pub const RANK_TOL: f64 = 1e-10;

/// Result of projecting `y` onto `C` (and `C°`) in the `V`-norm.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeProjection {
    /// `Π_V(y|C)`, the constrained MLE.
    pub point: Vec<f64>,
    /// `y − point`, the polar component in the original frame.
    pub polar_point: Vec<f64>,
    /// `‖y − point‖²_V`.
    pub lr: f64,
    /// Constraints active at `point` (`aᵢᵀ point = 0`). Their generators span
    /// the face of `C°` exposed by `point`, which holds the polar projection.
    pub active_set: Vec<usize>,
    /// Rank of the active generators: the dimension of that face.
    pub face_rank: usize,
    /// The active generators are linearly dependent (possible only when the
    /// constraint rows are).
    pub dependent_generators: bool,
    pub whitened_point: Vec<f64>,
    pub whitened_polar: Vec<f64>,
}

/// Reusable projection setup for a fixed cone and covariance.
#[derive(Debug, Clone)]
pub struct Projector {
    cone: PolyhedralCone,
    cov: CovarianceSpec,
    /// `p×k` whitened polar generators `−Lᵀaᵢ`.
    generators: DMatrix<f64>,
    max_iter: usize,
    fast_path: bool,
}

impl Projector {
    pub fn new(cone: &PolyhedralCone, cov: &CovarianceSpec) -> Result<Self> {
        cone.check_dim(cov.dim())?;
        let whitened_rows = cone.constraints() * cov.cholesky();
        Ok(Projector {
            cone: cone.clone(),
            cov: cov.clone(),
            generators: -whitened_rows.transpose(),
            max_iter: 50 * cone.num_constraints().max(1),
            fast_path: true,
        })
    }

    /// Override the active-set iteration cap (default `50·k`).
    pub fn with_max_iterations(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    /// Always use the general active-set engine, even for orthant and
    /// isotonic cones.
    pub fn active_set_only(mut self) -> Self {
        self.fast_path = false;
        self
    }

    pub fn cone(&self) -> &PolyhedralCone {
        &self.cone
    }

    pub fn covariance(&self) -> &CovarianceSpec {
        &self.cov
    }

    pub fn project(&self, y: &[f64]) -> Result<ConeProjection> {
        self.cone.check_dim(y.len())?;
        if self.fast_path && self.cov.is_diagonal() {
            match self.cone.family() {
                ConeFamily::Orthant => return Ok(orthant_diag(y, &self.cov)),
                ConeFamily::Isotonic => return isotonic_diag(y, &self.cov),
                ConeFamily::General => {}
            }
        }
        self.project_general(y)
    }

    fn project_general(&self, y: &[f64]) -> Result<ConeProjection> {
        let y = DVector::from_column_slice(y);
        let z = self.cov.whiten(&y);
        let sol = nnls::nnls(&self.generators, &z, self.max_iter)?;
        let mut polar_w = &self.generators * &sol.coef;
        let mut point_w = &z - &polar_w;

        let z_norm = z.norm();
        let active_set: Vec<usize> = (0..self.generators.ncols())
            .filter(|&i| {
                if sol.passive.contains(&i) {
                    return true;
                }
                let g = self.generators.column(i);
                g.dot(&point_w).abs() <= MEMBERSHIP_TOL * g.norm() * z_norm
            })
            .collect();
        let face_rank = numerical_rank(&self.generators.select_columns(active_set.iter()));
        if face_rank == z.len() {
            // The active constraints pin the projection to the origin.
            point_w.fill(0.0);
            polar_w.copy_from(&z);
        }
        let point = self.cov.unwhiten(&point_w);
        let polar_point = &y - &point;
        Ok(ConeProjection {
            point: point.as_slice().to_vec(),
            polar_point: polar_point.as_slice().to_vec(),
            lr: polar_w.norm_squared(),
            dependent_generators: active_set.len() > face_rank,
            active_set,
            face_rank,
            whitened_point: point_w.as_slice().to_vec(),
            whitened_polar: polar_w.as_slice().to_vec(),
        })
    }

    /// Dimension of the face of `C` (not `C°`) whose relative interior holds
    /// the primal projection. This is the degrees of freedom of the `H₀: μ = 0`
    /// vs `μ ∈ C` adaptive test.
    pub fn primal_face_dim(&self, proj: &ConeProjection) -> usize {
        self.cone.dim() - proj.face_rank
    }
}

/// Project `y` onto the cone in the `V`-norm.
///
/// Orthant and isotonic cones with diagonal covariance take exact fast paths;
/// all other inputs go through the active-set engine.
pub fn project(y: &[f64], cone: &PolyhedralCone, cov: &CovarianceSpec) -> Result<ConeProjection> {
    Projector::new(cone, cov)?.project(y)
}

/// Project with the general active-set engine regardless of cone family.
pub fn project_active_set(
    y: &[f64],
    cone: &PolyhedralCone,
    cov: &CovarianceSpec,
) -> Result<ConeProjection> {
    Projector::new(cone, cov)?.active_set_only().project(y)
}

/// Closed-form projection onto the negative orthant `{μ ≤ 0}` with `V = I`.
///
/// Zero coordinates are active constraints.
pub fn project_orthant(y: &[f64]) -> ConeProjection {
    orthant_diag(y, &CovarianceSpec::identity(y.len()))
}

fn orthant_diag(y: &[f64], cov: &CovarianceSpec) -> ConeProjection {
    let sd: Vec<f64> = cov.variances().iter().map(|v| v.sqrt()).collect();
    let point: Vec<f64> = y.iter().map(|&v| v.min(0.0)).collect();
    let polar_point: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
    let active_set: Vec<usize> = (0..y.len()).filter(|&i| y[i] >= 0.0).collect();
    let whitened_polar: Vec<f64> = polar_point.iter().zip(&sd).map(|(v, s)| v / s).collect();
    ConeProjection {
        lr: whitened_polar.iter().map(|v| v * v).sum(),
        whitened_point: point.iter().zip(&sd).map(|(v, s)| v / s).collect(),
        whitened_polar,
        face_rank: active_set.len(),
        active_set,
        dependent_generators: false,
        point,
        polar_point,
    }
}

fn isotonic_diag(y: &[f64], cov: &CovarianceSpec) -> Result<ConeProjection> {
    let variances = cov.variances();
    let weights: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
    let fit = pava(y, &weights)?;
    let sd: Vec<f64> = variances.iter().map(|v| v.sqrt()).collect();

    let polar_point: Vec<f64> = y.iter().zip(&fit.fitted).map(|(a, b)| a - b).collect();
    let whitened_polar: Vec<f64> = polar_point.iter().zip(&sd).map(|(v, s)| v / s).collect();
    // Constraint i couples coordinates i and i+1; it is active when both sit in
    // the same block.
    let active_set: Vec<usize> = fit
        .blocks
        .iter()
        .flat_map(|b| b.start..b.end.saturating_sub(1))
        .collect();
    Ok(ConeProjection {
        lr: whitened_polar.iter().map(|v| v * v).sum(),
        whitened_point: fit.fitted.iter().zip(&sd).map(|(v, s)| v / s).collect(),
        whitened_polar,
        face_rank: y.len() - fit.levels,
        active_set,
        dependent_generators: false,
        point: fit.fitted,
        polar_point,
    })
}

/// Number of singular values above `p·σ_max·RANK_TOL`.
pub(crate) fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return 0;
    }
    if cols == 1 {
        return usize::from(m.iter().any(|&v| v != 0.0));
    }
    let sv = m.singular_values();
    let smax = sv.max();
    if smax == 0.0 {
        return 0;
    }
    let cutoff = rows as f64 * smax * RANK_TOL;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Check a projection against the cone: the point is feasible, and the
/// residual is orthogonal to the point in the whitened frame.
pub fn is_valid_projection(proj: &ConeProjection, cone: &PolyhedralCone, tol: f64) -> Result<bool> {
    cone.check_dim(proj.point.len())?;
    let point = DVector::from_column_slice(&proj.point);
    let y_norm = (&point + DVector::from_column_slice(&proj.polar_point)).norm();
    let feasible = cone
        .constraints()
        .row_iter()
        .all(|a| a.transpose().dot(&point) >= -tol * a.norm() * y_norm);
    let x = DVector::from_column_slice(&proj.whitened_point);
    let r = DVector::from_column_slice(&proj.whitened_polar);
    let scale = (x.norm() + r.norm()).max(f64::MIN_POSITIVE);
    Ok(feasible && x.dot(&r).abs() <= tol * scale * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn orthant_inside_null() {
        let cone = PolyhedralCone::orthant(2).unwrap();
        let pr = project_active_set(&[-1.0, -2.0], &cone, &CovarianceSpec::identity(2)).unwrap();
        assert_eq!(pr.point, vec![-1.0, -2.0]);
        assert_eq!((pr.lr, pr.face_rank), (0.0, 0));
    }

    #[test]
    fn orthant_one_violation() {
        let cone = PolyhedralCone::orthant(2).unwrap();
        let pr = project_active_set(&[1.0, -2.0], &cone, &CovarianceSpec::identity(2)).unwrap();
        assert!(close(&pr.point, &[0.0, -2.0], 1e-14));
        assert!((pr.lr - 1.0).abs() < 1e-14);
        assert_eq!(pr.face_rank, 1);
        assert_eq!(pr.active_set, vec![0]);
    }

    #[test]
    fn isotonic_full_pool_active_set() {
        let cone = PolyhedralCone::isotonic(3).unwrap();
        let pr = project_active_set(&[3.0, 1.0, 2.0], &cone, &CovarianceSpec::identity(3)).unwrap();
        assert!(close(&pr.point, &[2.0, 2.0, 2.0], 1e-12));
        assert!((pr.lr - 2.0).abs() < 1e-12);
        assert_eq!(pr.face_rank, 2);

        let fast = project(&[3.0, 1.0, 2.0], &cone, &CovarianceSpec::identity(3)).unwrap();
        assert_eq!(fast.point, vec![2.0, 2.0, 2.0]);
        assert_eq!(fast.lr, 2.0);
        assert_eq!(fast.face_rank, 2);
        assert_eq!(fast.active_set, vec![0, 1]);
    }

    #[test]
    fn orthant_fast_path_examples() {
        let pr = project_orthant(&[1.0, -2.0, 3.0]);
        assert_eq!((pr.lr, pr.face_rank), (10.0, 2));
        let pr = project_orthant(&[0.0, 0.0]);
        assert_eq!((pr.lr, pr.face_rank), (0.0, 2));
        let pr = project_orthant(&[-5.0]);
        assert_eq!((pr.lr, pr.face_rank), (0.0, 0));

        let cone = PolyhedralCone::orthant(3).unwrap();
        let general =
            project_active_set(&[1.0, -2.0, 3.0], &cone, &CovarianceSpec::identity(3)).unwrap();
        assert!((general.lr - 10.0).abs() < 1e-12);
        assert_eq!(general.face_rank, 2);
    }

    #[test]
    fn boundary_points_keep_zero_lr() {
        let cone = PolyhedralCone::orthant(2).unwrap();
        let pr = project_active_set(&[0.0, -1.0], &cone, &CovarianceSpec::identity(2)).unwrap();
        assert_eq!((pr.lr, pr.face_rank), (0.0, 1));
        let pr = project_active_set(&[0.0, 0.0], &cone, &CovarianceSpec::identity(2)).unwrap();
        assert_eq!((pr.lr, pr.face_rank), (0.0, 2));
        assert_eq!(project_orthant(&[0.0, -1.0]).face_rank, 1);
    }

    #[test]
    fn diagonal_fast_paths_match_engine() {
        let cov = CovarianceSpec::diagonal(&[0.5, 2.0, 3.0, 1.5]).unwrap();
        let y = [0.7, -1.2, 2.5, 0.1];
        for cone in [
            PolyhedralCone::orthant(4).unwrap(),
            PolyhedralCone::isotonic(4).unwrap(),
        ] {
            let fast = project(&y, &cone, &cov).unwrap();
            let slow = project_active_set(&y, &cone, &cov).unwrap();
            assert!(
                (fast.lr - slow.lr).abs() < 1e-12,
                "{} vs {}",
                fast.lr,
                slow.lr
            );
            assert!(close(&fast.point, &slow.point, 1e-12));
            assert_eq!(fast.face_rank, slow.face_rank);
            assert_eq!(fast.active_set, slow.active_set);
        }
    }

    #[test]
    fn dense_covariance_moreau() {
        let v = DMatrix::from_row_slice(3, 3, &[2.0, 0.6, 0.3, 0.6, 1.0, -0.2, 0.3, -0.2, 1.5]);
        let cov = CovarianceSpec::new(v).unwrap();
        let cone = PolyhedralCone::isotonic(3).unwrap();
        let y = [2.0, -1.0, 0.5];
        let pr = project(&y, &cone, &cov).unwrap();
        assert!(is_valid_projection(&pr, &cone, 1e-10).unwrap());
        let sum: Vec<f64> = pr
            .point
            .iter()
            .zip(&pr.polar_point)
            .map(|(a, b)| a + b)
            .collect();
        assert!(close(&sum, &y, 1e-12));
        let d = DVector::from_column_slice(&pr.polar_point);
        assert!((cov.norm_squared(&d) - pr.lr).abs() < 1e-10);
    }

    #[test]
    fn dimension_errors() {
        let cone = PolyhedralCone::orthant(2).unwrap();
        assert!(matches!(
            project(&[1.0], &cone, &CovarianceSpec::identity(2)),
            Err(ConeTestError::DimensionMismatch { .. })
        ));
        assert!(matches!(
            project(&[1.0, 1.0], &cone, &CovarianceSpec::identity(3)),
            Err(ConeTestError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn primal_face_dims() {
        // Nonnegative quadrant {μ ≥ 0}.
        let cone = PolyhedralCone::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let pj = Projector::new(&cone, &CovarianceSpec::identity(2)).unwrap();
        for (y, dim) in [([-1.0, -2.0], 0), ([3.0, -1.0], 1), ([2.0, 2.0], 2)] {
            let pr = pj.project(&y).unwrap();
            assert_eq!(pj.primal_face_dim(&pr), dim, "y={y:?}");
        }
        // The isotonic cone contains the constant vectors.
        let iso = PolyhedralCone::isotonic(3).unwrap();
        let pj = Projector::new(&iso, &CovarianceSpec::identity(3)).unwrap();
        let pr = pj.project(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(pj.primal_face_dim(&pr), 1);
    }

    #[test]
    fn rank_deficient_generators_are_flagged() {
        // Three constraints in the plane: the polar has dependent generators.
        let cone =
            PolyhedralCone::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]]).unwrap();
        let pr = project_active_set(&[-3.0, -3.0], &cone, &CovarianceSpec::identity(2)).unwrap();
        assert!(pr.lr > 0.0);
        assert!(pr.face_rank <= 2);
        assert!((pr.lr - 18.0).abs() < 1e-10);
        assert_eq!(pr.face_rank, 2);
    }
}
