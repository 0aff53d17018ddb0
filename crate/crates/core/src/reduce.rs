//! Reproducible parallel sums.
//!
//! Work is split into tiles of a fixed size that does not depend on the
//! number of workers. Each tile is summed sequentially, and the tile
//! partials are then added in tile order, so a result is bit-identical for
//! every pool size.

use rayon::prelude::*;

pub const DEFAULT_TILE: usize = 64;

/// Sum `term(i)` over `0..n` with the fixed tiling.
pub fn tiled_sum<F>(n: usize, tile: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    tiled_sums::<1, _>(n, tile, |i| [term(i)])[0]
}

/// Vector-valued variant: several sums share one pass over `0..n`.
pub fn tiled_sums<const K: usize, F>(n: usize, tile: usize, term: F) -> [f64; K]
where
    F: Fn(usize) -> [f64; K] + Sync,
{
    let tile = tile.max(1);
    let tiles = n.div_ceil(tile);
    let partials: Vec<[f64; K]> = (0..tiles)
        .into_par_iter()
        .map(|t| {
            let mut acc = [0.0; K];
            for i in t * tile..((t + 1) * tile).min(n) {
                let v = term(i);
                for k in 0..K {
                    acc[k] += v[k];
                }
            }
            acc
        })
        .collect();
    let mut total = [0.0; K];
    for p in partials {
        for k in 0..K {
            total[k] += p[k];
        }
    }
    total
}

/// Order-independent maximum, NaN-propagating.
pub fn par_max<F>(n: usize, term: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    (0..n)
        .into_par_iter()
        .map(|i| term(i))
        .reduce(
            || f64::NEG_INFINITY,
            |a, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) },
        )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_across_pool_sizes() {
        let f = |i: usize| ((i as f64) * 0.37).sin() / (1.0 + i as f64);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| tiled_sum(10_007, DEFAULT_TILE, f))
        };
        let a = run(1);
        assert_eq!(a.to_bits(), run(3).to_bits());
        assert_eq!(a.to_bits(), run(8).to_bits());
    }

    #[test]
    fn empty_and_max() {
        assert_eq!(tiled_sum(0, 16, |_| 1.0), 0.0);
        assert_eq!(par_max(5, |i| i as f64), 4.0);
        assert_eq!(par_max(0, |i| i as f64), f64::NEG_INFINITY);
    }
}
