//! Polyhedral cones `C = {μ ∈ ℝᵖ : Aμ ≥ 0}` and their polar cones.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{ConeTestError, Result};

/// Default relative tolerance for membership tests.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Cone families with exact fast paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConeFamily {
    /// `A = −I`: the null is `μ ≤ 0` componentwise.
    Orthant,
    /// `A` is the `(p−1)×p` difference matrix: the null is `μ₁ ≤ … ≤ μₚ`.
    Isotonic,
    General,
}

impl ConeFamily {
    pub fn name(self) -> &'static str {
        match self {
            ConeFamily::Orthant => "orthant",
            ConeFamily::Isotonic => "isotonic",
            ConeFamily::General => "general",
        }
    }
}

impl fmt::Display for ConeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ConeFamily {
    type Err = ConeTestError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "orthant" => Ok(ConeFamily::Orthant),
            "isotonic" => Ok(ConeFamily::Isotonic),
            "general" => Ok(ConeFamily::General),
            other => Err(ConeTestError::Usage(format!(
                "unknown cone family `{other}`"
            ))),
        }
    }
}

/// A polyhedral cone given by its inequality description.
///
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralCone {
    constraints: DMatrix<f64>,
    family: ConeFamily,
}

impl PolyhedralCone {
    /// Build a cone from a `k×p` constraint matrix, one row per inequality
    /// `aᵢᵀμ ≥ 0`.
    ///
    /// Exact duplicate rows are dropped. The family is detected from the
    /// matrix; a hint of `General` disables detection, while an `Orthant` or
    /// `Isotonic` hint must match the pattern.
    pub fn new(constraints: DMatrix<f64>, family_hint: Option<ConeFamily>) -> Result<Self> {
        let (k, p) = constraints.shape();
        if k == 0 || p == 0 {
            return Err(ConeTestError::EmptyInput);
        }
        for (i, row) in constraints.row_iter().enumerate() {
            if row.iter().any(|v| !v.is_finite()) {
                return Err(ConeTestError::InvalidWeights(format!(
                    "constraint row {i} has a non-finite entry"
                )));
            }
            if row.iter().all(|&v| v == 0.0) {
                return Err(ConeTestError::ZeroRow { row: i });
            }
        }

        let constraints = dedup_rows(constraints);
        let detected = detect_family(&constraints);
        let family = match family_hint {
            None => detected,
            Some(ConeFamily::General) => ConeFamily::General,
            Some(hint) if hint == detected => hint,
            Some(hint) => return Err(ConeTestError::FamilyMismatch(hint.name())),
        };
        Ok(PolyhedralCone {
            constraints,
            family,
        })
    }

    /// Build from row vectors. All rows must have the same length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let p = rows
            .first()
            .map(Vec::len)
            .ok_or(ConeTestError::EmptyInput)?;
        for row in rows {
            if row.len() != p {
                return Err(ConeTestError::DimensionMismatch {
                    expected: p,
                    found: row.len(),
                });
            }
        }
        let m = DMatrix::from_row_iterator(rows.len(), p, rows.iter().flatten().copied());
        Self::new(m, None)
    }

    /// The negative orthant `{μ : μᵢ ≤ 0 ∀i}`.
    pub fn orthant(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(ConeTestError::EmptyInput);
        }
        Self::new(-DMatrix::identity(p, p), Some(ConeFamily::Orthant))
    }

    /// The monotone cone `{μ : μ₁ ≤ μ₂ ≤ … ≤ μₚ}`, `p ≥ 2`.
    pub fn isotonic(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(ConeTestError::DimensionMismatch {
                expected: 2,
                found: p,
            });
        }
        Self::new(difference_matrix(p), Some(ConeFamily::Isotonic))
    }

    /// Ambient dimension `p`.
    pub fn dim(&self) -> usize {
        self.constraints.ncols()
    }

    /// Number of (deduplicated) constraints `k`.
    pub fn num_constraints(&self) -> usize {
        self.constraints.nrows()
    }

    pub fn constraints(&self) -> &DMatrix<f64> {
        &self.constraints
    }

    pub fn family(&self) -> ConeFamily {
        self.family
    }

    /// True if every row is `±eᵢ` and each coordinate is constrained exactly
    /// once, i.e. the cone is an orthant up to coordinate sign flips.
    pub fn is_signed_orthant(&self) -> bool {
        let (k, p) = self.constraints.shape();
        if k != p {
            return false;
        }
        let mut seen = vec![false; p];
        for row in self.constraints.row_iter() {
            let nz: Vec<usize> = (0..p).filter(|&j| row[j] != 0.0).collect();
            if nz.len() != 1 || row[nz[0]].abs() != 1.0 || seen[nz[0]] {
                return false;
            }
            seen[nz[0]] = true;
        }
        true
    }

    /// Membership test with relative tolerance:
    /// `μ ∈ C ⇔ minᵢ aᵢᵀμ ≥ −tol·‖aᵢ‖·‖μ‖`.
    pub fn contains(&self, mu: &[f64], tol: f64) -> Result<bool> {
        self.check_dim(mu.len())?;
        let mu = DVector::from_column_slice(mu);
        let mu_norm = mu.norm();
        Ok(self.constraints.row_iter().all(|row| {
            let a = row.transpose();
            a.dot(&mu) >= -tol * a.norm() * mu_norm
        }))
    }

    /// The polar cone, stored by its generators `{−aᵢ}`.
    pub fn polar(&self) -> PolarCone {
        PolarCone {
            // `+ 0.0` turns the `-0.0` entries into `0.0`.
            generators: self.constraints.transpose().map(|v| -v + 0.0),
        }
    }

    pub(crate) fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(ConeTestError::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// Parse the plain-text cone format: an optional `# family=...` header,
    /// a line `p k`, then `k` rows of `p` numbers.
    pub fn parse(text: &str) -> Result<Self> {
        let mut hint = None;
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());

        let mut header = None;
        for (no, line) in lines.by_ref() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(value) = comment.trim().strip_prefix("family=") {
                    hint = Some(
                        value
                            .parse::<ConeFamily>()
                            .map_err(|e| ConeTestError::parse(no, e.to_string()))?,
                    );
                }
                continue;
            }
            header = Some((no, line));
            break;
        }
        let (no, header) = header.ok_or_else(|| ConeTestError::parse(1, "missing `p k` line"))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| ConeTestError::parse(no, format!("bad dimensions: {e}")))?;
        let [p, k] = dims[..] else {
            return Err(ConeTestError::parse(
                no,
                "expected exactly two integers `p k`",
            ));
        };
        if p == 0 || k == 0 {
            return Err(ConeTestError::parse(no, "p and k must be positive"));
        }

        let mut values = Vec::with_capacity(p * k);
        let mut rows = 0;
        for (no, line) in lines {
            if line.starts_with('#') {
                continue;
            }
            if rows == k {
                return Err(ConeTestError::parse(no, format!("more than {k} rows")));
            }
            let row: Vec<f64> = parse_numbers(line).map_err(|m| ConeTestError::parse(no, m))?;
            if row.len() != p {
                return Err(ConeTestError::parse(
                    no,
                    format!("expected {p} values, found {}", row.len()),
                ));
            }
            values.extend(row);
            rows += 1;
        }
        if rows != k {
            return Err(ConeTestError::parse(
                text.lines().count().max(1),
                format!("expected {k} rows, found {rows}"),
            ));
        }
        Self::new(DMatrix::from_row_slice(k, p, &values), hint)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| e.with_path(path))
    }

    /// Render in the plain-text cone format.
    pub fn to_file_string(&self) -> String {
        let mut out = String::new();
        if self.family != ConeFamily::General {
            out.push_str(&format!("# family={}\n", self.family));
        }
        out.push_str(&format!("{} {}\n", self.dim(), self.num_constraints()));
        for row in self.constraints.row_iter() {
            let cells: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }
}

/// Split on whitespace and/or commas and parse each token.
pub(crate) fn parse_numbers(line: &str) -> std::result::Result<Vec<f64>, String> {
    line.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| format!("`{t}` is not a number"))
                .and_then(|v| {
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(format!("`{t}` is not finite"))
                    }
                })
        })
        .collect()
}

/// The polar cone `C° = {Σ λᵢ(−aᵢ) : λᵢ ≥ 0}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarCone {
    /// `p×k`, one generator per column.
    generators: DMatrix<f64>,
}

impl PolarCone {
    pub fn generators(&self) -> &DMatrix<f64> {
        &self.generators
    }

    pub fn generator(&self, i: usize) -> DVector<f64> {
        self.generators.column(i).into_owned()
    }

    pub fn len(&self) -> usize {
        self.generators.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.ncols() == 0
    }
}

fn difference_matrix(p: usize) -> DMatrix<f64> {
    let mut a = DMatrix::zeros(p - 1, p);
    for i in 0..p - 1 {
        a[(i, i)] = -1.0;
        a[(i, i + 1)] = 1.0;
    }
    a
}

fn dedup_rows(m: DMatrix<f64>) -> DMatrix<f64> {
    let mut keep: Vec<usize> = Vec::with_capacity(m.nrows());
    for i in 0..m.nrows() {
        if !keep.iter().any(|&j| m.row(j) == m.row(i)) {
            keep.push(i);
        }
    }
    if keep.len() == m.nrows() {
        m
    } else {
        m.select_rows(keep.iter())
    }
}

fn detect_family(a: &DMatrix<f64>) -> ConeFamily {
    let (k, p) = a.shape();
    if k == p && *a == -DMatrix::<f64>::identity(p, p) {
        ConeFamily::Orthant
    } else if p >= 2 && k == p - 1 && *a == difference_matrix(p) {
        ConeFamily::Isotonic
    } else {
        ConeFamily::General
    }
}
