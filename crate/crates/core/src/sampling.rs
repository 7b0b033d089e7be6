//! Seeded sample grids. Every sweep draws from a ChaCha8 stream so that a
//! recorded seed reproduces the same points on every platform.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DEFAULT_SEED: u64 = 20_240_917;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Polar samples: `r` log-spaced in `[10^{-3}, 10]`, `θ` uniform in `[−π, π]`.
pub fn polar_points(seed: u64, count: usize) -> Vec<[f64; 2]> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| {
            let t: f64 = g.random_range(-3.0..=1.0);
            let theta = g.random_range(-std::f64::consts::PI..=std::f64::consts::PI);
            [10f64.powf(t), theta]
        })
        .collect()
}

/// Cartesian samples uniform in `[−radius, radius]²`.
pub fn cartesian_points(seed: u64, count: usize, radius: f64) -> Vec<[f64; 2]> {
    let mut g = rng(seed);
    (0..count)
        .map(|_| [g.random_range(-radius..=radius), g.random_range(-radius..=radius)])
        .collect()
}

/// Random rational in `[lo, hi]` with denominator at most `max_den`.
pub fn rational_in(g: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> BigRational {
    let den = g.random_range(1..=max_den);
    let num = g.random_range(lo * den..=hi * den);
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Square grid of `side²` points spanning `[−radius, radius]²`, including the origin when `side` is odd.
pub fn square_grid(side: usize, radius: f64) -> Vec<[f64; 2]> {
    let step = if side > 1 { 2.0 * radius / (side - 1) as f64 } else { 0.0 };
    let coord = |i: usize| if side > 1 { -radius + step * i as f64 } else { 0.0 };
    (0..side)
        .flat_map(|i| (0..side).map(move |j| [coord(i), coord(j)]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible() {
        assert_eq!(polar_points(5, 10), polar_points(5, 10));
        assert_ne!(polar_points(5, 10), polar_points(6, 10));
        for [r, t] in polar_points(1, 500) {
            assert!((1e-3..=10.0).contains(&r));
            assert!(t.abs() <= std::f64::consts::PI);
        }
    }

    #[test]
    fn grid_shape() {
        let g = square_grid(5, 2.0);
        assert_eq!(g.len(), 25);
        assert!(g.contains(&[0.0, 0.0]));
        assert!(g.contains(&[-2.0, 2.0]));
    }
}
