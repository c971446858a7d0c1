#![allow(dead_code)]

use conetest::cone::PolyhedralCone;
use conetest::project::CovarianceSpec;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

/// `min ‖z − x‖²` over `{x : Bx ≥ 0}` by trying every candidate active set:
/// for each row subset `S`, project `z` onto `{B_S x = 0}` and keep the
/// closest feasible result.
pub fn brute_force_lr(b: &DMatrix<f64>, z: &DVector<f64>) -> f64 {
    let k = b.nrows();
    let scale = z.norm().max(1e-300);
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << k) {
        let rows: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
        let x = if rows.is_empty() {
            z.clone()
        } else {
            let bs = b.select_rows(rows.iter());
            let gram_pinv = (&bs * bs.transpose()).pseudo_inverse(1e-12).unwrap();
            z - bs.transpose() * (gram_pinv * (&bs * z))
        };
        let feasible = b
            .row_iter()
            .all(|row| row.transpose().dot(&x) >= -1e-10 * row.norm() * scale);
        if feasible {
            best = best.min((z - x).norm_squared());
        }
    }
    best
}

/// The brute-force LR in the `V`-norm, whitening with a fresh Cholesky factor.
pub fn oracle_lr(y: &[f64], cone: &PolyhedralCone, cov: &CovarianceSpec) -> f64 {
    let l = cov.matrix().clone().cholesky().unwrap().l();
    let y = DVector::from_column_slice(y);
    let z = l.solve_lower_triangular(&y).unwrap();
    brute_force_lr(&(cone.constraints() * &l), &z)
}

pub struct Instance {
    pub cone: PolyhedralCone,
    pub cov: CovarianceSpec,
    pub y: Vec<f64>,
}

pub fn normal_vec<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn random_cov<R: Rng>(rng: &mut R, p: usize) -> CovarianceSpec {
    match rng.random_range(0..3) {
        0 => CovarianceSpec::identity(p),
        1 => {
            let v: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..3.0)).collect();
            CovarianceSpec::diagonal(&v).unwrap()
        }
        _ => {
            let b = DMatrix::from_vec(p, p, normal_vec(rng, p * p));
            let v = &b * b.transpose() / p as f64 + DMatrix::identity(p, p) * 0.3;
            CovarianceSpec::new(v).unwrap()
        }
    }
}

/// Random cone with `p ≤ 5` and at most 7 Gaussian constraint rows, random
/// covariance and observation.
pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let p = rng.random_range(1..=5);
    let k = rng.random_range(1..=(p + 2).min(7));
    let a = DMatrix::from_vec(k, p, normal_vec(rng, k * p));
    let cone = PolyhedralCone::new(a, None).unwrap();
    let cov = random_cov(rng, p);
    let y = normal_vec(rng, p).into_iter().map(|v| 2.0 * v).collect();
    Instance { cone, cov, y }
}

/// Binomial standard deviation of a rate estimate.
pub fn binom_sigma(rate: f64, n: usize) -> f64 {
    (rate * (1.0 - rate) / n as f64).sqrt()
}
