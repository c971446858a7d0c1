use std::io::Write;
use std::ops::RangeInclusive;

use crate::cone::ConeFamily;
use crate::dist::{chi2_quantile, isotonic_weights, mixture_quantile, orthant_weights};
use crate::error::{ConeTestError, Result};
use crate::fmt::sig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverRow {
    pub p: usize,
    /// Largest `k` with `χ²(k)` quantile below the mixture quantile: with at
    /// most this many violated constraints the adaptive test has the smaller
    /// critical value.
    pub max_violations: usize,
    pub mixture_quantile: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossoverCurve {
    pub family: ConeFamily,
    pub alpha: f64,
    pub rows: Vec<CrossoverRow>,
}

impl CrossoverCurve {
    /// CSV with a `#` comment header, then `p,max_violations,mixture_quantile`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(
            out,
            "# alpha={} family={}",
            sig(self.alpha, 10),
            self.family
        )?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "max_violations", "mixture_quantile"])?;
        for row in &self.rows {
            w.write_record([
                row.p.to_string(),
                row.max_violations.to_string(),
                sig(row.mixture_quantile, 10),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn row(&self, p: usize) -> Option<&CrossoverRow> {
        self.rows.iter().find(|r| r.p == p)
    }
}

/// Compare the mixture quantile with `χ²(k)` quantiles for each dimension in
/// `ps`, using exact orthant or isotonic weights. Deterministic.
///
/// When `α ≥ 1 − w₀` the mixture quantile is 0 and no `k` qualifies; the row
/// then reports 0.
pub fn crossover_curve(
    family: ConeFamily,
    ps: RangeInclusive<usize>,
    alpha: f64,
) -> Result<CrossoverCurve> {
    let rows = ps
        .map(|p| {
            let mix = match family {
                ConeFamily::Orthant if p >= 1 => orthant_weights(p),
                ConeFamily::Isotonic => isotonic_weights(p)?,
                ConeFamily::Orthant => return Err(ConeTestError::EmptyInput),
                ConeFamily::General => return Err(ConeTestError::UnsupportedFamily("general")),
            };
            let q = mixture_quantile(&mix, alpha)?;
            let mut max_violations = 0;
            for k in 1..=p {
                if chi2_quantile(k as u32, 1.0 - alpha)? < q {
                    max_violations = k;
                } else {
                    break;
                }
            }
            Ok(CrossoverRow {
                p,
                max_violations,
                mixture_quantile: q,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CrossoverCurve {
        family,
        alpha,
        rows,
    })
}
