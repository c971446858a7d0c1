//! Seeded, splittable random streams.
//!
//! Work is cut into fixed-size chunks and each chunk draws from its own ChaCha
//! stream keyed by `(seed, stream id)`. Results therefore depend only on the
//! seed and the chunk size, never on the number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub(crate) const CHUNK: usize = 8192;

pub(crate) fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Stream id for chunk `chunk` of work item `item`.
pub(crate) fn stream_id(item: usize, chunk: usize) -> u64 {
    ((item as u64) << 32) | chunk as u64
}

/// `(chunk index, draws in chunk)` covering `n` draws.
pub(crate) fn chunks(n: usize) -> Vec<(usize, usize)> {
    (0..n.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(n - c * CHUNK)))
        .collect()
}

/// Draws from `N(mean, LLᵀ)`.
#[derive(Debug, Clone)]
pub(crate) struct Gaussian {
    mean: DVector<f64>,
    chol: Option<DMatrix<f64>>,
}

impl Gaussian {
    pub(crate) fn new(mean: &[f64], chol: &DMatrix<f64>) -> Self {
        let p = mean.len();
        let identity = *chol == DMatrix::identity(p, p);
        Gaussian {
            mean: DVector::from_column_slice(mean),
            chol: (!identity).then(|| chol.clone()),
        }
    }

    pub(crate) fn sample_into<R: Rng>(
        &self,
        rng: &mut R,
        xi: &mut DVector<f64>,
        out: &mut Vec<f64>,
    ) {
        for v in xi.iter_mut() {
            *v = rng.sample(StandardNormal);
        }
        out.clear();
        match &self.chol {
            None => out.extend(xi.iter().zip(self.mean.iter()).map(|(e, m)| m + e)),
            Some(l) => {
                let d = l * &*xi;
                out.extend(d.iter().zip(self.mean.iter()).map(|(e, m)| m + e));
            }
        }
    }
}
