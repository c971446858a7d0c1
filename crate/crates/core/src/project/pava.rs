//! Weighted pool-adjacent-violators algorithm for the nondecreasing fit.

use crate::error::{ConeTestError, Result};

/// Weighted isotonic least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotonicFit {
    pub fitted: Vec<f64>,
    /// Number of distinct fitted values. Adjacent blocks with equal means are
    /// pooled, so this is also the number of blocks.
    pub levels: usize,
    /// Half-open index ranges of the pooled blocks, in order.
    pub blocks: Vec<std::ops::Range<usize>>,
}

#[derive(Clone, Copy)]
struct Block {
    start: usize,
    weight: f64,
    mean: f64,
}

/// Minimize `Σ wᵢ(yᵢ − θᵢ)²` subject to `θ₁ ≤ … ≤ θₚ`.
pub fn pava(y: &[f64], weights: &[f64]) -> Result<IsotonicFit> {
    if y.is_empty() {
        return Err(ConeTestError::EmptyInput);
    }
    if weights.len() != y.len() {
        return Err(ConeTestError::DimensionMismatch {
            expected: y.len(),
            found: weights.len(),
        });
    }
    if let Some((index, &value)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !(**w > 0.0 && w.is_finite()))
    {
        return Err(ConeTestError::NonPositiveWeight { index, value });
    }

    let mut stack: Vec<Block> = Vec::with_capacity(y.len());
    for (i, (&yi, &wi)) in y.iter().zip(weights).enumerate() {
        let mut cur = Block {
            start: i,
            weight: wi,
            mean: yi,
        };
        while let Some(prev) = stack.last() {
            if prev.mean < cur.mean {
                break;
            }
            let prev = stack.pop().expect("checked non-empty");
            let weight = prev.weight + cur.weight;
            cur = Block {
                start: prev.start,
                weight,
                mean: (prev.weight * prev.mean + cur.weight * cur.mean) / weight,
            };
        }
        stack.push(cur);
    }

    let mut fitted = vec![0.0; y.len()];
    let mut blocks = Vec::with_capacity(stack.len());
    for (b, block) in stack.iter().enumerate() {
        let end = stack.get(b + 1).map_or(y.len(), |next| next.start);
        fitted[block.start..end].fill(block.mean);
        blocks.push(block.start..end);
    }
    Ok(IsotonicFit {
        fitted,
        levels: stack.len(),
        blocks,
    })
}

/// Unit-weight PAVA.
pub fn pava_unit(y: &[f64]) -> Result<IsotonicFit> {
    pava(y, &vec![1.0; y.len()])
}
