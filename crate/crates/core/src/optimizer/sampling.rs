//! Uniform sampling of the bounded parameter box.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::Bounds;
use crate::{Error, Result};

/// Draws `count` full parameter vectors uniformly over the free-parameter
/// box; fixed parameters carry their pinned values. Deterministic in
/// `seed`.
pub fn sample_uniform(bounds: &Bounds, count: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Err(Error::config("sample count must be >= 1"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let x: Vec<f64> = bounds
            .params()
            .iter()
            .map(|p| match p.fixed {
                Some(v) => v,
                None => rng.random_range(p.lower..=p.upper),
            })
            .collect();
        out.push(x);
    }
    Ok(out)
}
