use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::cone::parse_numbers;
use crate::error::{ConeTestError, Result};

const SYMMETRY_TOL: f64 = 1e-10;

/// Structure of `V` that the projection fast paths care about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceKind {
    Identity,
    Diagonal,
    Dense,
}

/// A symmetric positive-definite covariance `V` with a lower-triangular
/// whitener `W` such that `WᵀW = V⁻¹`.
///
/// With `V = LLᵀ` (Cholesky), `W = L⁻¹`. Whitening maps `y ↦ Wy`, so the
/// `V`-norm becomes the Euclidean norm.
#[derive(Debug, Clone)]
pub struct CovarianceSpec {
    v: DMatrix<f64>,
    chol: DMatrix<f64>,
    whitener: DMatrix<f64>,
    kind: CovarianceKind,
}

impl CovarianceSpec {
    pub fn identity(p: usize) -> Self {
        let i = DMatrix::identity(p, p);
        CovarianceSpec {
            v: i.clone(),
            chol: i.clone(),
            whitener: i,
            kind: CovarianceKind::Identity,
        }
    }

    pub fn diagonal(variances: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(
            variances,
        )))
    }

    pub fn new(v: DMatrix<f64>) -> Result<Self> {
        let (r, c) = v.shape();
        if r != c {
            return Err(ConeTestError::DimensionMismatch {
                expected: r,
                found: c,
            });
        }
        if r == 0 {
            return Err(ConeTestError::EmptyInput);
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(ConeTestError::SingularCovariance);
        }
        let scale = v.amax();
        for i in 0..r {
            for j in 0..i {
                if (v[(i, j)] - v[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(ConeTestError::SingularCovariance);
                }
            }
        }
        let chol = nalgebra::Cholesky::new(v.clone())
            .ok_or(ConeTestError::SingularCovariance)?
            .l();
        if (0..r).any(|i| chol[(i, i)] <= f64::EPSILON.sqrt() * scale.sqrt() * 1e-4) {
            return Err(ConeTestError::SingularCovariance);
        }
        let whitener = chol
            .clone()
            .solve_lower_triangular(&DMatrix::identity(r, r))
            .ok_or(ConeTestError::SingularCovariance)?;

        let off_diagonal_zero = (0..r).all(|i| (0..r).all(|j| i == j || v[(i, j)] == 0.0));
        let kind = if v == DMatrix::identity(r, r) {
            CovarianceKind::Identity
        } else if off_diagonal_zero {
            CovarianceKind::Diagonal
        } else {
            CovarianceKind::Dense
        };
        Ok(CovarianceSpec {
            v,
            chol,
            whitener,
            kind,
        })
    }

    /// Parse a `p×p` matrix, one row per line, whitespace or comma separated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = parse_numbers(line).map_err(|m| ConeTestError::parse(i + 1, m))?;
            if let Some(first) = rows.first() {
                if row.len() != first.len() {
                    return Err(ConeTestError::parse(
                        i + 1,
                        format!("expected {} values, found {}", first.len(), row.len()),
                    ));
                }
            }
            rows.push(row);
        }
        let p = rows.len();
        if p == 0 {
            return Err(ConeTestError::parse(1, "empty covariance matrix"));
        }
        if rows[0].len() != p {
            return Err(ConeTestError::parse(
                1,
                format!(
                    "covariance must be square, got {p} rows of {}",
                    rows[0].len()
                ),
            ));
        }
        Self::new(DMatrix::from_row_iterator(p, p, rows.into_iter().flatten()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| e.with_path(path))
    }

    pub fn dim(&self) -> usize {
        self.v.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// Lower Cholesky factor `L` of `V`.
    pub fn cholesky(&self) -> &DMatrix<f64> {
        &self.chol
    }

    /// Lower-triangular `W = L⁻¹` with `WᵀW = V⁻¹`.
    pub fn whitener(&self) -> &DMatrix<f64> {
        &self.whitener
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn is_identity(&self) -> bool {
        self.kind == CovarianceKind::Identity
    }

    pub fn is_diagonal(&self) -> bool {
        self.kind != CovarianceKind::Dense
    }

    /// True if `V = s·I` for some `s > 0`.
    pub fn is_scalar(&self) -> bool {
        self.is_diagonal() && {
            let d0 = self.v[(0, 0)];
            (0..self.dim()).all(|i| self.v[(i, i)] == d0)
        }
    }

    pub fn variances(&self) -> Vec<f64> {
        self.v.diagonal().iter().copied().collect()
    }

    /// `y ↦ Wy`.
    pub fn whiten(&self, y: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            CovarianceKind::Identity => y.clone(),
            _ => &self.whitener * y,
        }
    }

    /// `z ↦ Lz`, the inverse of [`whiten`](Self::whiten).
    pub fn unwhiten(&self, z: &DVector<f64>) -> DVector<f64> {
        match self.kind {
            CovarianceKind::Identity => z.clone(),
            _ => &self.chol * z,
        }
    }

    /// `‖x‖²_V = xᵀV⁻¹x`.
    pub fn norm_squared(&self, x: &DVector<f64>) -> f64 {
        self.whiten(x).norm_squared()
    }

    /// `σ²·V` for `σ² > 0`.
    pub fn scaled(&self, s2: f64) -> Result<Self> {
        if !(s2 > 0.0 && s2.is_finite()) {
            return Err(ConeTestError::NonPositiveVarianceEstimate(s2));
        }
        Self::new(&self.v * s2)
    }
}
