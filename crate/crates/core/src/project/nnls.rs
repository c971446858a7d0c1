//! Lawson–Hanson active-set nonnegative least squares.
//!
//! Solves `min ‖Eλ − f‖` subject to `λ ≥ 0`. When the columns of `E` are the
//! polar generators, `Eλ` is the projection of `f` onto the polar cone and the
//! passive set identifies the face that receives it.

use nalgebra::{DMatrix, DVector};

use crate::error::{ConeTestError, Result};

/// Entering threshold on the scaled gradient `eⱼᵀr / (‖eⱼ‖·‖f‖)`. Anything at or
/// below it is treated as a tie and resolved toward the null (no entry).
const GRADIENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub(crate) struct NnlsSolution {
    pub coef: DVector<f64>,
    /// Columns with strictly positive coefficients, ascending.
    pub passive: Vec<usize>,
}

pub(crate) fn nnls(e: &DMatrix<f64>, f: &DVector<f64>, max_iter: usize) -> Result<NnlsSolution> {
    let n = e.ncols();
    let mut x = DVector::zeros(n);
    let f_norm = f.norm();
    if f_norm == 0.0 || n == 0 {
        return Ok(NnlsSolution {
            coef: x,
            passive: Vec::new(),
        });
    }
    let col_norms: Vec<f64> = e.column_iter().map(|c| c.norm()).collect();

    let mut passive = vec![false; n];
    let mut blocked = vec![false; n];
    let mut iterations = 0usize;
    let mut w = e.tr_mul(&(f - e * &x));

    loop {
        let entering = (0..n)
            .filter(|&j| !passive[j] && !blocked[j])
            .map(|j| (j, w[j] / (col_norms[j] * f_norm)))
            .filter(|&(_, g)| g > GRADIENT_TOL)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((j, _)) = entering else { break };
        passive[j] = true;

        let mut first = true;
        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(ConeTestError::MaxIterationsExceeded(max_iter));
            }
            let idx: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let s = least_squares(&e.select_columns(idx.iter()), f);

            if first {
                first = false;
                let pos = idx
                    .iter()
                    .position(|&i| i == j)
                    .expect("entering column is passive");
                if s[pos] <= 0.0 {
                    // Numerically dependent on the current passive set.
                    passive[j] = false;
                    blocked[j] = true;
                    break;
                }
            }

            if s.iter().all(|&v| v > 0.0) {
                for (k, &i) in idx.iter().enumerate() {
                    x[i] = s[k];
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }

            // Step toward s until the first passive coefficient hits zero.
            let (mut step, mut leaving) = (f64::INFINITY, idx[0]);
            for (k, &i) in idx.iter().enumerate() {
                if s[k] <= 0.0 {
                    let t = x[i] / (x[i] - s[k]);
                    if t < step {
                        step = t;
                        leaving = i;
                    }
                }
            }
            for (k, &i) in idx.iter().enumerate() {
                x[i] += step * (s[k] - x[i]);
                if x[i] <= 0.0 || i == leaving {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
            blocked.iter_mut().for_each(|b| *b = false);
        }
        w = e.tr_mul(&(f - e * &x));
    }

    let passive: Vec<usize> = (0..n).filter(|&i| passive[i] && x[i] > 0.0).collect();
    Ok(NnlsSolution { coef: x, passive })
}

/// Unconstrained least squares on a (small) column subset.
fn least_squares(b: &DMatrix<f64>, f: &DVector<f64>) -> DVector<f64> {
    let (m, q) = b.shape();
    if q <= m {
        let qr = b.clone().qr();
        let r = qr.r();
        let rmax = r.diagonal().amax();
        if r.diagonal().iter().all(|d| d.abs() > 1e-12 * rmax) {
            let qtf = qr.q().tr_mul(f);
            if let Some(s) = r.solve_upper_triangular(&qtf) {
                return s;
            }
        }
    }
    b.clone()
        .svd(true, true)
        .solve(f, 1e-12 * b.amax())
        .expect("SVD computed with both factors")
}
