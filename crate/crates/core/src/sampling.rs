//! Seeded sampling helpers shared by the checks and the tests.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::matrix::Mat;
use crate::scalar::Rational;

pub const DEFAULT_SEED: u64 = 20_240_601;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The origin followed by `count` uniform points in `[−radius, radius]ⁿ`.
pub fn sample_points(n: usize, count: usize, radius: f64, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng(seed);
    let mut pts = vec![vec![0.0; n]];
    for _ in 0..count {
        pts.push((0..n).map(|_| r.gen_range(-radius..=radius)).collect());
    }
    pts
}

/// A rational `p/q` with `|p| ≤ num_bound` and `1 ≤ q ≤ den_bound`.
pub fn random_rational<R: Rng>(r: &mut R, num_bound: i64, den_bound: i64) -> Rational {
    let p = r.gen_range(-num_bound..=num_bound);
    let q = r.gen_range(1..=den_bound);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn random_rational_vec<R: Rng>(r: &mut R, n: usize) -> Vec<Rational> {
    (0..n).map(|_| random_rational(r, 9, 5)).collect()
}

/// A random rational symmetric matrix.
pub fn random_symmetric<R: Rng>(r: &mut R, n: usize) -> Mat<Rational> {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = random_rational(r, 9, 5);
            m[(i, j)] = v.clone();
            m[(j, i)] = v;
        }
    }
    m
}

/// `BᵀB + I` for a random rational `B`, always positive definite.
pub fn random_metric<R: Rng>(r: &mut R, n: usize) -> Mat<Rational> {
    let b = Mat::from_fn(n, n, |_, _| random_rational(r, 3, 2));
    b.transpose().matmul(&b).add(&Mat::identity(n))
}

/// A random unit vector in ℝⁿ.
pub fn random_unit<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..=1.0)).collect();
        let s: f64 = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if s > 1e-3 && s <= 1.0 {
            return v.into_iter().map(|a| a / s).collect();
        }
    }
}
