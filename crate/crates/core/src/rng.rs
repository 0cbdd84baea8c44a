//! Seed handling. Every random routine takes an explicit `u64` seed; independent
//! sub-streams (per trial, per slice, per step) are derived with [`derive_seed`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

/// Builds a generator from a seed.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Rows generated per independent sub-stream by [`par_fill_rows`].
pub const ROWS_PER_STREAM: usize = 1 << 14;

/// Fills a row-major buffer in parallel. Rows are cut into blocks of
/// [`ROWS_PER_STREAM`]; block `b` is drawn from `derive_seed(seed, b)`, so the
/// result does not depend on the thread count.
pub fn par_fill_rows<E, F>(out: &mut [f64], width: usize, seed: u64, fill: F) -> Result<(), E>
where
    E: Send,
    F: Fn(&mut Rng, &mut [f64]) -> Result<(), E> + Sync,
{
    use rayon::prelude::*;
    out.par_chunks_mut(ROWS_PER_STREAM * width.max(1))
        .enumerate()
        .try_for_each(|(b, block)| fill(&mut rng(derive_seed(seed, b as u64)), block))
}
